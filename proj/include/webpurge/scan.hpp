#ifndef WEBPURGE_SCAN_HPP
#define WEBPURGE_SCAN_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <system_error>
#include <vector>

#include "webpurge/origin.hpp"
#include "webpurge/util.hpp"

namespace webpurge {

namespace fs = std::filesystem;

struct FileRecord {
    std::string path;
    std::uint64_t size_bytes = 0;
    UnixTime mtime = 0;
    OriginMetadata origin;  // filled by attach_origin
};

struct DriveInfo {
    std::uint64_t capacity_bytes = 0;
    std::uint64_t free_bytes = 0;
};

struct ScanResult {
    std::vector<FileRecord> records;  // largest first
    std::uint64_t files_seen = 0;
    std::uint64_t bytes_seen = 0;
    std::uint64_t skipped = 0;  // unreadable entries, broken symlinks, races
};

inline std::optional<DriveInfo> drive_info(const std::string& path) {
    std::error_code ec;
    auto sp = fs::space(path, ec);
    if (ec) return std::nullopt;
    return DriveInfo{sp.capacity, sp.available};
}

namespace detail {

// Largest first; equal sizes break ties by path so scans are reproducible.
inline bool record_less(const FileRecord& a, const FileRecord& b) {
    if (a.size_bytes != b.size_bytes) return a.size_bytes > b.size_bytes;
    return a.path < b.path;
}

inline UnixTime file_mtime(const fs::directory_entry& e, std::error_code& ec) {
    auto ft = e.last_write_time(ec);
    if (ec) return 0;
    // file_clock -> system_clock. C++20 clock_cast is not available on every
    // libstdc++ we target, so go through the epoch difference.
    auto sys = std::chrono::time_point_cast<std::chrono::seconds>(
        ft - fs::file_time_type::clock::now() + std::chrono::system_clock::now());
    return static_cast<UnixTime>(sys.time_since_epoch().count());
}

}  // namespace detail

// Walk `root` and keep the `top_n` largest regular files.  Uses a min-heap so
// memory stays O(top_n) even on huge trees.  Symlinks are never followed.
// `exclude` (optional) rejects paths the caller never wants considered.
inline ScanResult walk_largest(const std::string& root, size_t top_n,
                               bool fixture_mode = false,
                               const std::function<bool(const std::string&)>& exclude = {}) {
    ScanResult out;
    if (top_n == 0) return out;

    auto cmp = [](const FileRecord& a, const FileRecord& b) {
        // heap top = smallest record under record_less ordering
        return detail::record_less(a, b);
    };
    std::priority_queue<FileRecord, std::vector<FileRecord>, decltype(cmp)> heap(cmp);

    std::error_code ec;
    fs::recursive_directory_iterator it(
        root, fs::directory_options::skip_permission_denied, ec);
    if (ec) {
        out.skipped++;
        return out;
    }
    fs::recursive_directory_iterator end;
    while (it != end) {
        const fs::directory_entry& entry = *it;
        std::error_code tec;
        if (entry.is_symlink(tec) || tec) {
            if (entry.is_directory(tec) && !tec) it.disable_recursion_pending();
            out.skipped += tec ? 1 : 0;
        } else if (entry.is_regular_file(tec) && !tec) {
            std::string p = entry.path().string();
            bool sidecar = fixture_mode && p.size() > std::strlen(kSidecarSuffix) &&
                           p.compare(p.size() - std::strlen(kSidecarSuffix),
                                     std::string::npos, kSidecarSuffix) == 0;
            if (sidecar || (exclude && exclude(p))) {
                // not a user file; fall through to the iterator advance
            } else {
                std::uint64_t sz = entry.file_size(tec);
                if (tec) {
                    out.skipped++;
                } else {
                    out.files_seen++;
                    out.bytes_seen += sz;
                    FileRecord rec;
                    rec.path = std::move(p);
                    rec.size_bytes = sz;
                    rec.mtime = detail::file_mtime(entry, tec);
                    if (heap.size() < top_n) {
                        heap.push(std::move(rec));
                    } else if (detail::record_less(rec, heap.top())) {
                        heap.pop();
                        heap.push(std::move(rec));
                    }
                }
            }
        }
        it.increment(ec);
        if (ec) {
            // iterator got stuck (e.g. directory vanished); bail out rather
            // than loop forever
            out.skipped++;
            break;
        }
    }

    out.records.reserve(heap.size());
    while (!heap.empty()) {
        out.records.push_back(heap.top());
        heap.pop();
    }
    std::reverse(out.records.begin(), out.records.end());
    return out;
}

// Read provenance metadata for each record.  Separate pass so callers can
// trim the candidate list before paying for xattr reads.
inline void attach_origin(std::vector<FileRecord>& records, bool fixture_mode = false) {
    for (auto& r : records) {
        auto origin = read_origin(r.path, fixture_mode);
        r.origin = origin ? *origin : OriginMetadata{};
    }
}

}  // namespace webpurge

#endif  // WEBPURGE_SCAN_HPP

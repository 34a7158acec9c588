#ifndef WEBPURGE_STORE_HPP
#define WEBPURGE_STORE_HPP

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "webpurge/util.hpp"

namespace webpurge {

class StoreError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class StoreNotFound : public StoreError {
  public:
    using StoreError::StoreError;
};

enum class RecipeStatus { active, stale, restored };

inline const char* to_string(RecipeStatus s) {
    switch (s) {
        case RecipeStatus::stale: return "stale";
        case RecipeStatus::restored: return "restored";
        default: return "active";
    }
}

inline std::optional<RecipeStatus> recipe_status_from(const std::string& s) {
    if (s == "active") return RecipeStatus::active;
    if (s == "stale") return RecipeStatus::stale;
    if (s == "restored") return RecipeStatus::restored;
    return std::nullopt;
}

struct StoreIndexEntry {
    std::string recipe_id;  // 16-hex prefix of hash_full
    std::string original_path;
    std::string file_name;
    std::uint64_t size_bytes = 0;
    RecipeStatus status = RecipeStatus::active;
    UnixTime last_maintained_at = 0;

    bool operator==(const StoreIndexEntry&) const = default;
};

struct RepairReport {
    std::vector<std::string> orphans_quarantined;  // blob had no index entry
    std::vector<std::string> dangling_dropped;     // entry had no blob
    bool clean() const { return orphans_quarantined.empty() && dangling_dropped.empty(); }
};

// One JSON index plus one .wrcp blob per recipe.  All mutations go through a
// single handle (advisory flock keeps other processes out); every write is
// staged to a temp name and renamed so a crash never leaves a half-written
// index or blob in place.
class RecipeStore {
  public:
    // Test hook: called with a label at each step of a mutation.  Throwing
    // from it simulates a crash at that point.
    std::function<void(const char* step)> on_step;

    RecipeStore(const RecipeStore&) = delete;
    RecipeStore& operator=(const RecipeStore&) = delete;
    RecipeStore(RecipeStore&& o) noexcept { *this = std::move(o); }
    RecipeStore& operator=(RecipeStore&& o) noexcept {
        if (this != &o) {
            close_lock();
            dir_ = std::move(o.dir_);
            entries_ = std::move(o.entries_);
            repair_ = std::move(o.repair_);
            lock_fd_ = o.lock_fd_;
            on_step = std::move(o.on_step);
            o.lock_fd_ = -1;
        }
        return *this;
    }
    ~RecipeStore() { close_lock(); }

    // Opens (creating if asked) and repairs the store: entries without blobs
    // are dropped, blobs without entries are moved to quarantine/.
    static RecipeStore open(const std::string& dir, bool create = true) {
        namespace fs = std::filesystem;
        RecipeStore s(dir);
        if (!fs::exists(dir)) {
            if (!create) throw StoreError("store directory does not exist: " + dir);
            fs::create_directories(dir);
        }
        fs::create_directories(s.quarantine_dir());

        s.lock_fd_ = ::open(s.lock_path().c_str(), O_CREAT | O_RDWR, 0644);
        if (s.lock_fd_ < 0) throw StoreError("cannot open store lock file");
        if (flock(s.lock_fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(s.lock_fd_);
            s.lock_fd_ = -1;
            throw StoreError("store is locked by another process: " + dir);
        }

        if (fs::exists(s.index_path())) {
            s.load_index();
        } else if (create) {
            s.write_index("init");
        } else {
            throw StoreError("store has no index: " + dir);
        }
        s.repair();
        return s;
    }

    const std::string& dir() const { return dir_; }
    const RepairReport& last_repair() const { return repair_; }

    std::string blob_path(const std::string& recipe_id) const {
        return dir_ + "/" + recipe_id + ".wrcp";
    }

    // Returns recipe_id.  Re-putting an identical recipe is a no-op; a
    // different recipe mapping to the same id is a prefix collision and is
    // refused rather than silently merged.
    std::string put(const std::vector<unsigned char>& blob, const StoreIndexEntry& entry) {
        check_id(entry.recipe_id);
        if (const StoreIndexEntry* existing = find(entry.recipe_id)) {
            if (existing->size_bytes != entry.size_bytes)
                throw StoreError("recipe_id collision with differing size: " + entry.recipe_id);
            return entry.recipe_id;  // same recipe, nothing to do
        }

        std::string final_path = blob_path(entry.recipe_id);
        std::string tmp = final_path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw StoreError("cannot write blob: " + tmp);
            out.write(reinterpret_cast<const char*>(blob.data()),
                      static_cast<std::streamsize>(blob.size()));
            if (!out) throw StoreError("short write on blob: " + tmp);
        }
        step("put.blob_staged");
        if (std::rename(tmp.c_str(), final_path.c_str()) != 0)
            throw StoreError("cannot commit blob: " + final_path);
        step("put.blob_renamed");

        entries_.push_back(entry);
        sort_entries();
        write_index("put");
        return entry.recipe_id;
    }

    std::vector<unsigned char> get(const std::string& recipe_id) const {
        check_id(recipe_id);
        if (!find(recipe_id)) throw StoreNotFound("no such recipe: " + recipe_id);
        std::ifstream in(blob_path(recipe_id), std::ios::binary);
        if (!in) throw StoreError("blob unreadable: " + blob_path(recipe_id));
        std::vector<unsigned char> blob{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
        return blob;
    }

    const std::vector<StoreIndexEntry>& list() const { return entries_; }

    const StoreIndexEntry* find(const std::string& recipe_id) const {
        for (const auto& e : entries_)
            if (e.recipe_id == recipe_id) return &e;
        return nullptr;
    }

    void remove(const std::string& recipe_id) {
        check_id(recipe_id);
        if (!find(recipe_id)) throw StoreNotFound("no such recipe: " + recipe_id);
        std::error_code ec;
        std::filesystem::remove(blob_path(recipe_id), ec);  // blob first
        step("remove.blob_deleted");
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                      [&](const StoreIndexEntry& e) {
                                          return e.recipe_id == recipe_id;
                                      }),
                       entries_.end());
        write_index("remove");
    }

    void update_status(const std::string& recipe_id, RecipeStatus status, UnixTime when) {
        check_id(recipe_id);
        for (auto& e : entries_) {
            if (e.recipe_id == recipe_id) {
                e.status = status;
                e.last_maintained_at = when;
                write_index("update");
                return;
            }
        }
        throw StoreNotFound("no such recipe: " + recipe_id);
    }

  private:
    explicit RecipeStore(std::string dir) : dir_(std::move(dir)) {}

    std::string index_path() const { return dir_ + "/index.json"; }
    std::string lock_path() const { return dir_ + "/.lock"; }
    std::string quarantine_dir() const { return dir_ + "/quarantine"; }

    void step(const char* label) {
        if (on_step) on_step(label);
    }

    static void check_id(const std::string& id) {
        if (id.size() != 16 || !is_hex_string(id))
            throw StoreError("malformed recipe_id: " + id);
    }

    void sort_entries() {
        std::sort(entries_.begin(), entries_.end(),
                  [](const StoreIndexEntry& a, const StoreIndexEntry& b) {
                      return a.recipe_id < b.recipe_id;
                  });
    }

    void load_index() {
        std::ifstream in(index_path());
        if (!in) throw StoreError("cannot read index: " + index_path());
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw StoreError(std::string("index is not valid JSON: ") + e.what());
        }
        entries_.clear();
        for (const auto& je : j.value("entries", nlohmann::json::array())) {
            StoreIndexEntry e;
            e.recipe_id = je.at("recipe_id").get<std::string>();
            e.original_path = je.at("original_path").get<std::string>();
            e.file_name = je.at("file_name").get<std::string>();
            e.size_bytes = je.at("size_bytes").get<std::uint64_t>();
            auto st = recipe_status_from(je.at("status").get<std::string>());
            if (!st) throw StoreError("index entry has unknown status");
            e.status = *st;
            auto t = parse_rfc3339(je.at("last_maintained_at").get<std::string>());
            if (!t) throw StoreError("index entry has bad timestamp");
            e.last_maintained_at = *t;
            entries_.push_back(std::move(e));
        }
        sort_entries();
    }

    void write_index(const char* op) {
        nlohmann::json j;
        j["entries"] = nlohmann::json::array();
        for (const auto& e : entries_) {
            j["entries"].push_back({
                {"recipe_id", e.recipe_id},
                {"original_path", e.original_path},
                {"file_name", e.file_name},
                {"size_bytes", e.size_bytes},
                {"status", to_string(e.status)},
                {"last_maintained_at", format_rfc3339(e.last_maintained_at)},
            });
        }
        std::string tmp = index_path() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw StoreError("cannot write index: " + tmp);
            out << j.dump(2) << '\n';
            if (!out) throw StoreError("short write on index");
        }
        step((std::string(op) + ".index_staged").c_str());
        if (std::rename(tmp.c_str(), index_path().c_str()) != 0)
            throw StoreError("cannot commit index");
        step((std::string(op) + ".index_renamed").c_str());
    }

    void repair() {
        namespace fs = std::filesystem;
        repair_ = {};

        // entries whose blob vanished are useless: drop them
        std::vector<StoreIndexEntry> keep;
        for (auto& e : entries_) {
            if (fs::exists(blob_path(e.recipe_id))) keep.push_back(e);
            else repair_.dangling_dropped.push_back(e.recipe_id);
        }

        // blobs the index does not know about get quarantined, never deleted
        for (const auto& de : fs::directory_iterator(dir_)) {
            if (!de.is_regular_file()) continue;
            std::string name = de.path().filename().string();
            if (name.size() > 4 && name.compare(name.size() - 4, 4, ".tmp") == 0) {
                // uncommitted staging leftovers from an interrupted write
                std::error_code ec;
                fs::remove(de.path(), ec);
                continue;
            }
            if (name.size() != 16 + 5 || name.substr(16) != ".wrcp") continue;
            std::string id = name.substr(0, 16);
            if (!is_hex_string(id)) continue;
            bool known = std::any_of(keep.begin(), keep.end(), [&](const StoreIndexEntry& e) {
                return e.recipe_id == id;
            });
            if (!known) {
                std::string dst = quarantine_dir() + "/" + name;
                std::error_code ec;
                fs::rename(de.path(), dst, ec);
                if (!ec) repair_.orphans_quarantined.push_back(id);
            }
        }

        if (!repair_.clean() || entries_.size() != keep.size()) {
            entries_ = std::move(keep);
            write_index("repair");
        }
    }

    void close_lock() {
        if (lock_fd_ >= 0) {
            flock(lock_fd_, LOCK_UN);
            ::close(lock_fd_);
            lock_fd_ = -1;
        }
    }

    std::string dir_;
    std::vector<StoreIndexEntry> entries_;
    RepairReport repair_;
    int lock_fd_ = -1;
};

}  // namespace webpurge

#endif  // WEBPURGE_STORE_HPP

#ifndef WEBPURGE_ENGINE_HPP
#define WEBPURGE_ENGINE_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "webpurge/config.hpp"
#include "webpurge/crypto.hpp"
#include "webpurge/hash.hpp"
#include "webpurge/recipe.hpp"
#include "webpurge/scan.hpp"
#include "webpurge/store.hpp"
#include "webpurge/webcheck.hpp"

namespace webpurge {

inline constexpr const char* kSidecarMarkerSuffix = ".wrcp-ref";
inline constexpr const char* kTrashDirName = ".webpurge-trash";

struct PurgeCandidate {
    FileRecord record;
    Recipe recipe;
    SourceCategory category = SourceCategory::LinksNotRecorded;
    AvailabilityOutcome outcome;
    std::uint64_t projected_saving_bytes = 0;

    bool auto_approvable() const { return outcome.best == RdStatus::PublicRd; }
};

struct PurgePlan {
    std::vector<PurgeCandidate> candidates;  // outcome.best != NotRedownloadable
    // examined but ineligible, kept so the user sees why nothing happened
    struct Rejected {
        FileRecord record;
        SourceCategory category = SourceCategory::LinksNotRecorded;
        std::string reason;
    };
    std::vector<Rejected> rejected;
    std::uint64_t examined = 0;
    bool target_met = false;

    std::uint64_t public_savings() const {
        std::uint64_t s = 0;
        for (const auto& c : candidates)
            if (c.outcome.best == RdStatus::PublicRd) s += c.projected_saving_bytes;
        return s;
    }
};

enum class PurgeAction { purged, skipped, failed };

struct PurgeResult {
    struct Item {
        std::string path;
        std::string recipe_id;
        PurgeAction action = PurgeAction::skipped;
        std::string reason;
        std::uint64_t bytes_freed = 0;
    };
    std::vector<Item> items;
    std::uint64_t bytes_freed = 0;
    size_t purged = 0, skipped = 0, failed = 0;
};

struct MaintenanceReport {
    struct Item {
        std::string recipe_id;
        std::string file_name;
        RecipeStatus status_after = RecipeStatus::active;
        RdStatus best = RdStatus::NotRedownloadable;
        std::string reason;
    };
    std::vector<Item> items;
    size_t current = 0, stale = 0;
};

struct RestoreResult {
    std::string recipe_id;
    std::string output_path;
    std::uint64_t bytes_written = 0;
    std::string channel_url;
    ChannelMode channel_mode = ChannelMode::direct;
};

class RestoreError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class DestinationExists : public RestoreError {
  public:
    using RestoreError::RestoreError;
};
class NotRetrievable : public RestoreError {
  public:
    using RestoreError::RestoreError;
};
class IntegrityMismatch : public RestoreError {
  public:
    using RestoreError::RestoreError;
};

namespace detail {

inline bool is_tool_artifact(const std::string& path, const std::string& store_dir) {
    auto ends_with = [&](const char* suf) {
        size_t n = std::strlen(suf);
        return path.size() >= n && path.compare(path.size() - n, n, suf) == 0;
    };
    if (ends_with(kSidecarMarkerSuffix) || ends_with(".wrcp") || ends_with(".part"))
        return true;
    if (path.find(std::string("/") + kTrashDirName + "/") != std::string::npos) return true;
    if (!store_dir.empty()) {
        std::error_code ec;
        auto canon_store = std::filesystem::weakly_canonical(store_dir, ec);
        if (!ec) {
            auto canon = std::filesystem::weakly_canonical(path, ec);
            if (!ec) {
                auto s = canon_store.string() + "/";
                if (canon.string().compare(0, s.size(), s) == 0) return true;
            }
        }
    }
    return false;
}

}  // namespace detail

// Fig-style creation flow: largest files first, read provenance, build the
// recipe, ask the web.  Stops early once verified-public savings cover the
// target.  Availability checks run `config.concurrency` at a time.
inline PurgePlan plan_purge(const std::string& root,
                            std::optional<std::uint64_t> target_free_bytes, size_t n,
                            Fetcher& fetcher, const Config& config,
                            UnixTime now = now_unix()) {
    PurgePlan plan;
    auto scan = walk_largest(root, n, config.fixture_mode, [&](const std::string& p) {
        return detail::is_tool_artifact(p, config.store_dir);
    });

    size_t i = 0;
    while (i < scan.records.size()) {
        if (target_free_bytes && plan.public_savings() >= *target_free_bytes) {
            plan.target_met = true;
            break;
        }
        size_t wave_end = std::min(i + config.concurrency, scan.records.size());

        struct Checked {
            FileRecord record;
            std::optional<Recipe> recipe;
            SourceCategory category = SourceCategory::LinksNotRecorded;
            AvailabilityOutcome outcome;
            std::string fail;
        };
        std::vector<std::future<Checked>> wave;
        for (size_t k = i; k < wave_end; ++k) {
            FileRecord rec = scan.records[k];
            wave.push_back(std::async(std::launch::async, [rec, &fetcher, &config,
                                                           now]() mutable {
                Checked c;
                auto origin = read_origin(rec.path, config.fixture_mode);
                rec.origin = origin ? *origin : OriginMetadata{};
                c.record = rec;
                std::string name = std::filesystem::path(rec.path).filename().string();
                c.category = classify_source(rec.origin, file_extension(name),
                                             config.categories);
                if (rec.origin.empty() || !rec.origin.has_any_url()) {
                    c.outcome.reason = rec.origin.empty() ? "no provenance metadata"
                                                          : "links not recorded";
                    return c;
                }
                FileHashes h;
                try {
                    h = hash_file(rec.path);
                } catch (const std::exception& e) {
                    c.fail = std::string("unreadable: ") + e.what();
                    return c;
                }
                c.recipe = create_recipe(rec.path, rec.size_bytes, rec.origin, h, now);
                c.outcome = check_availability(*c.recipe, fetcher, config);
                return c;
            }));
        }
        for (auto& f : wave) {
            Checked c = f.get();
            plan.examined++;
            if (c.recipe && c.outcome.best != RdStatus::NotRedownloadable) {
                PurgeCandidate cand;
                cand.record = c.record;
                cand.recipe = *c.recipe;
                cand.category = c.category;
                cand.outcome = c.outcome;
                std::uint64_t footprint =
                    serialize_recipe(cand.recipe).size() + kMagicLen + kSaltLen +
                    kNonceLen + kTagLen + cand.recipe.recipe_id().size() +
                    config.store_dir.size() + 2;
                cand.projected_saving_bytes =
                    c.record.size_bytes > footprint ? c.record.size_bytes - footprint : 0;
                plan.candidates.push_back(std::move(cand));
            } else {
                std::string why = !c.fail.empty() ? c.fail
                                  : !c.outcome.reason.empty()
                                      ? c.outcome.reason
                                      : "not redownloadable";
                if (c.recipe && c.outcome.best == RdStatus::NotRedownloadable) {
                    const auto& ch = c.outcome.via_hu ? c.outcome.via_hu : c.outcome.via_ru;
                    if (ch && !ch->reason.empty()) why = ch->reason;
                }
                plan.rejected.push_back({c.record, c.category, why});
            }
        }
        i = wave_end;
    }
    if (target_free_bytes && plan.public_savings() >= *target_free_bytes)
        plan.target_met = true;
    return plan;
}

namespace detail {

inline void write_sidecar_marker(const std::string& original_path,
                                 const std::string& recipe_id,
                                 const std::string& blob_path) {
    std::string marker = original_path + kSidecarMarkerSuffix;
    std::ofstream out(marker, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write marker: " + marker);
    out << recipe_id << '\n' << blob_path << '\n';
    if (!out) throw std::runtime_error("short write on marker: " + marker);
}

// Either unlink or stage into a trash directory next to the file.
inline void dispose_file(const std::string& path, bool use_trash) {
    namespace fs = std::filesystem;
    if (!use_trash) {
        fs::remove(path);
        return;
    }
    fs::path p(path);
    fs::path trash = p.parent_path() / kTrashDirName;
    fs::create_directories(trash);
    fs::path dst = trash / p.filename();
    for (int n = 1; fs::exists(dst); ++n)
        dst = trash / (p.filename().string() + "." + std::to_string(n));
    fs::rename(p, dst);
}

}  // namespace detail

// Approved candidates only; verified-public required unless allow_auth.
// Ordering rule: the recipe reaches the store before the file is touched, so
// a crash can duplicate data but never lose it.
inline PurgeResult execute_purge(const PurgePlan& plan, const std::vector<bool>& approvals,
                                 RecipeStore& store, const std::string& passphrase,
                                 const Config& config) {
    PurgeResult out;
    for (size_t i = 0; i < plan.candidates.size(); ++i) {
        const PurgeCandidate& c = plan.candidates[i];
        PurgeResult::Item item;
        item.path = c.record.path;
        item.recipe_id = c.recipe.recipe_id();

        auto skip = [&](std::string reason) {
            item.action = PurgeAction::skipped;
            item.reason = std::move(reason);
        };
        if (i >= approvals.size() || !approvals[i]) {
            skip("not approved");
        } else if (c.outcome.best != RdStatus::PublicRd &&
                   !(c.outcome.best == RdStatus::RdWithAuth && config.allow_auth)) {
            skip(c.outcome.best == RdStatus::RdWithAuth
                     ? "requires authentication (pass --allow-auth to override)"
                     : "not eligible");
        } else {
            try {
                FileHashes live = hash_file(c.record.path, c.recipe.hash_algo,
                                            c.recipe.partial_len);
                if (live.hash_full != c.recipe.hash_full) {
                    skip("changed since plan");
                } else {
                    EncryptedRecipe blob = encrypt_recipe(c.recipe, passphrase);
                    StoreIndexEntry entry;
                    entry.recipe_id = c.recipe.recipe_id();
                    entry.original_path = c.recipe.original_path;
                    entry.file_name = c.recipe.file_name;
                    entry.size_bytes = c.recipe.size_bytes;
                    entry.status = RecipeStatus::active;
                    entry.last_maintained_at = c.recipe.last_maintained_at;
                    store.put(blob, entry);
                    // put() is a no-op when the id already exists, so a file
                    // that was purged, restored, and purged again would keep
                    // its old "restored" status and drop out of maintenance.
                    const StoreIndexEntry* stored = store.find(entry.recipe_id);
                    if (stored && stored->status != RecipeStatus::active)
                        store.update_status(entry.recipe_id, RecipeStatus::active,
                                            entry.last_maintained_at);
                    detail::write_sidecar_marker(c.record.path, entry.recipe_id,
                                                 store.blob_path(entry.recipe_id));
                    try {
                        detail::dispose_file(c.record.path, config.use_trash);
                    } catch (...) {
                        // deletion failed: the marker would lie, take it back
                        std::error_code ec;
                        std::filesystem::remove(c.record.path + kSidecarMarkerSuffix, ec);
                        throw;
                    }
                    item.action = PurgeAction::purged;
                    item.bytes_freed = c.record.size_bytes;
                    item.reason = "ok";
                }
            } catch (const std::exception& e) {
                item.action = PurgeAction::failed;
                item.reason = e.what();
            }
        }
        switch (item.action) {
            case PurgeAction::purged: out.purged++; out.bytes_freed += item.bytes_freed; break;
            case PurgeAction::skipped: out.skipped++; break;
            case PurgeAction::failed: out.failed++; break;
        }
        out.items.push_back(std::move(item));
    }
    return out;
}

// Currency sweep over every active recipe.  A recipe stays active while its
// source still verifies (or is presumed reachable with an account); anything
// else goes stale so the user can hunt down a replacement while one may
// still exist.
inline MaintenanceReport maintain(RecipeStore& store, Fetcher& fetcher,
                                  const std::string& passphrase, UnixTime now,
                                  const Config& config) {
    MaintenanceReport rep;
    std::vector<StoreIndexEntry> active;
    for (const auto& e : store.list())
        if (e.status == RecipeStatus::active) active.push_back(e);

    for (const auto& e : active) {
        MaintenanceReport::Item item;
        item.recipe_id = e.recipe_id;
        item.file_name = e.file_name;

        Recipe r = decrypt_recipe(store.get(e.recipe_id), passphrase);  // auth errors are fatal
        AvailabilityOutcome oc = check_availability(r, fetcher, config);
        item.best = oc.best;
        bool current = oc.best == RdStatus::PublicRd ||
                       (oc.best == RdStatus::RdWithAuth && config.presume_auth);
        if (current) {
            item.status_after = RecipeStatus::active;
            item.reason = to_string(oc.best);
            rep.current++;
        } else {
            item.status_after = RecipeStatus::stale;
            const auto& ch = oc.via_hu ? oc.via_hu : oc.via_ru;
            item.reason = ch && !ch->reason.empty() ? ch->reason
                          : !oc.reason.empty()      ? oc.reason
                                                    : "not redownloadable";
            rep.stale++;
        }
        store.update_status(e.recipe_id, item.status_after, now);
        rep.items.push_back(std::move(item));
    }
    return rep;
}

namespace detail {

struct DownloadAttempt {
    bool verified = false;
    bool integrity_mismatch = false;  // full body came back but hashed wrong
    std::string url;
    ChannelMode mode = ChannelMode::direct;
    std::uint64_t bytes = 0;
    CapturedBody page;
};

// check_direct semantics, but the body lands in tmp_path.
inline DownloadAttempt download_direct(const std::string& url, const Recipe& recipe,
                                       Fetcher& fetcher, const std::string& tmp_path,
                                       bool want_page) {
    DownloadAttempt at;
    at.url = url;
    auto parsed = parse_url(url);
    if (!parsed || (parsed->scheme != "http" && parsed->scheme != "https")) return at;

    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw RestoreError("cannot write temporary file: " + tmp_path);

    Hasher full(recipe.hash_algo);
    bool armed = recipe.partial_hash.has_value() &&
                 recipe.size_bytes >= recipe.partial_len && recipe.partial_len > 0;
    bool dead = false;  // hash can no longer match
    std::uint64_t consumed = 0;
    std::string captured;

    auto sink = [&](const char* data, size_t len) -> bool {
        if (want_page && captured.size() < kPageCaptureCap)
            captured.append(data, std::min(len, kPageCaptureCap - captured.size()));
        out.write(data, static_cast<std::streamsize>(len));
        if (armed && consumed < recipe.partial_len && consumed + len >= recipe.partial_len) {
            size_t head = static_cast<size_t>(recipe.partial_len - consumed);
            full.update(data, head);
            if (full.hex_digest() != *recipe.partial_hash) {
                dead = true;
                consumed += head;
                return false;
            }
            full.update(data + head, len - head);
        } else {
            full.update(data, len);
        }
        consumed += len;
        if (consumed > recipe.size_bytes && (!want_page || consumed >= kPageCaptureCap)) {
            dead = true;
            return false;
        }
        return true;
    };

    FetchResult res = fetcher.fetch(url, sink);
    out.close();
    if (out.fail() && consumed > 0)
        throw RestoreError("write failure on temporary file: " + tmp_path);
    at.bytes = consumed;
    if (!res.ok && !res.sink_aborted) return at;
    if (res.status != 200) return at;
    if (want_page && looks_html(res)) {
        at.page.data = std::move(captured);
        at.page.is_html = true;
    }
    if (!dead && !res.sink_aborted && full.hex_digest() == recipe.hash_full) {
        at.verified = true;
        return at;
    }
    // A complete body that simply hashes wrong is an integrity signal, but
    // only when the server really sent a file (pages are expected to differ).
    if (!res.sink_aborted && !at.page.is_html && consumed > 0) at.integrity_mismatch = true;
    return at;
}

}  // namespace detail

// Pull the bytes back from the web and put the file where it was (or at
// dest).  Only a full-hash match ever reaches the destination path.
// Presumption flags are ignored here: restoring means actually fetching.
inline RestoreResult reconstitute(const std::string& recipe_id, RecipeStore& store,
                                  Fetcher& fetcher, const std::string& passphrase,
                                  std::optional<std::string> dest, bool force,
                                  const Config& config, UnixTime now = now_unix()) {
    namespace fs = std::filesystem;
    (void)config;  // reserved: restore ignores presumption flags by design
    Recipe recipe = decrypt_recipe(store.get(recipe_id), passphrase);

    std::string out_path = dest.value_or(recipe.original_path);
    if (fs::exists(out_path) && !force)
        throw DestinationExists("destination already exists: " + out_path);

    fs::path parent = fs::path(out_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::string tmp = ((parent.empty() ? fs::path(".") : parent) /
                       (".webpurge-restore-" + recipe_id + ".part"))
                          .string();

    struct TmpGuard {
        std::string path;
        bool keep = false;
        ~TmpGuard() {
            if (!keep) {
                std::error_code ec;
                fs::remove(path, ec);
            }
        }
    } guard{tmp};

    bool integrity_seen = false;
    std::optional<detail::DownloadAttempt> winner;

    auto try_indirect = [&](const detail::DownloadAttempt& from) {
        auto links = scrape_links(from.page.data, from.url);
        auto ranked = detail::rank_candidates(links, recipe.file_name);
        for (const auto& cand : ranked) {
            auto probe = detail::download_direct(cand, recipe, fetcher, tmp, false);
            if (probe.verified) {
                probe.mode = ChannelMode::indirect;
                winner = probe;
                return;
            }
        }
    };

    for (const auto& url : {recipe.host_url, recipe.referrer_url}) {
        if (!url || winner) continue;
        if (is_local_reference(*url)) continue;  // nothing to dial
        auto at = detail::download_direct(*url, recipe, fetcher, tmp, true);
        if (at.verified) {
            winner = at;
            break;
        }
        integrity_seen = integrity_seen || at.integrity_mismatch;
        if (at.page.is_html) try_indirect(at);
        if (winner) break;
    }

    if (!winner) {
        if (integrity_seen)
            throw IntegrityMismatch("downloaded content does not match recorded hash for " +
                                    recipe_id);
        throw NotRetrievable("no recorded source currently serves this file: " + recipe_id);
    }

    if (std::rename(tmp.c_str(), out_path.c_str()) != 0)
        throw RestoreError("cannot move restored file into place: " + out_path);
    guard.keep = true;

    std::error_code ec;
    fs::remove(recipe.original_path + kSidecarMarkerSuffix, ec);  // breadcrumb no longer true
    store.update_status(recipe_id, RecipeStatus::restored, now);

    RestoreResult res;
    res.recipe_id = recipe_id;
    res.output_path = out_path;
    res.bytes_written = winner->bytes;
    res.channel_url = winner->url;
    res.channel_mode = winner->mode;
    return res;
}

}  // namespace webpurge

#endif  // WEBPURGE_ENGINE_HPP

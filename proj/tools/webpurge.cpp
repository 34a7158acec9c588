// webpurge: find your largest downloaded files, check whether the web still
// serves them byte-for-byte, and swap the proven ones for small encrypted
// recipes that can reconstitute the original on demand.

#include <webpurge/webpurge.hpp>

#include <CLI11.hpp>

#include <unistd.h>
#include <termios.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace webpurge;

namespace {

// Exit codes: 0 ok, 1 partial-or-stale, 2 usage-or-fatal, 3 auth.
constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kFatal = 2;
constexpr int kAuth = 3;

struct CliOptions {
    std::string config_file;
    std::string root;
    std::optional<size_t> top;
    std::optional<std::string> target_free;
    std::optional<std::string> store;
    std::optional<size_t> concurrency;
    std::optional<int> timeout;
    bool yes = false;
    bool allow_auth = false;
    bool trash = false;
    bool json = false;
    bool fixture_mode = false;
};

Config make_config(const CliOptions& o) {
    Config cfg;
    if (!o.config_file.empty()) cfg = load_config(o.config_file);
    if (o.top) cfg.top_n = *o.top;
    if (o.target_free) {
        auto v = parse_bytes(*o.target_free);
        if (!v) throw std::invalid_argument("cannot parse --target-free value: " + *o.target_free);
        cfg.target_free = *v;
    }
    if (o.store) cfg.store_dir = *o.store;
    if (o.concurrency) cfg.concurrency = *o.concurrency;
    if (o.timeout) cfg.timeout_secs = *o.timeout;
    if (o.allow_auth) cfg.allow_auth = true;
    if (o.trash) cfg.use_trash = true;
    if (o.fixture_mode) cfg.fixture_mode = true;
    if (cfg.store_dir.empty()) {
        const char* home = std::getenv("HOME");
        cfg.store_dir = std::string(home ? home : ".") + "/.webpurge/store";
    }
    cfg.validate();
    return cfg;
}

// Passphrase comes from the configured environment variable, or an
// interactive prompt when stdin is a terminal. Never from a flag: other
// users could read it out of the process list.
std::optional<std::string> get_passphrase(const Config& cfg) {
    if (const char* env = std::getenv(cfg.passphrase_env.c_str()); env && *env)
        return std::string(env);
    if (!isatty(STDIN_FILENO)) return std::nullopt;
    std::cerr << "passphrase for recipe store: ";
    termios old{};
    bool muted = tcgetattr(STDIN_FILENO, &old) == 0;
    if (muted) {
        termios quiet = old;
        quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
        tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
    }
    std::string pass;
    std::getline(std::cin, pass);
    if (muted) tcsetattr(STDIN_FILENO, TCSANOW, &old);
    std::cerr << "\n";
    if (pass.empty()) return std::nullopt;
    return pass;
}

std::string mtime_date(UnixTime t) { return format_rfc3339(t).substr(0, 10); }

nlohmann::json origin_to_json(const OriginMetadata& m) {
    nlohmann::json j;
    j["zone_id"] = m.zone_id ? nlohmann::json(*m.zone_id) : nlohmann::json(nullptr);
    j["referrer_url"] = m.referrer_url ? nlohmann::json(*m.referrer_url) : nlohmann::json(nullptr);
    j["host_url"] = m.host_url ? nlohmann::json(*m.host_url) : nlohmann::json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------
// scan

int cmd_scan(const CliOptions& opt) {
    Config cfg = make_config(opt);
    if (opt.root.empty() || !fs::is_directory(opt.root)) {
        std::cerr << "scan: not a directory: " << opt.root << "\n";
        return kFatal;
    }
    ScanResult res = walk_largest(opt.root, cfg.top_n, cfg.fixture_mode);
    attach_origin(res.records, cfg.fixture_mode);
    auto drive = drive_info(opt.root);

    if (opt.json) {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& r : res.records) {
            files.push_back({{"path", r.path},
                             {"size_bytes", r.size_bytes},
                             {"mtime", format_rfc3339(r.mtime)},
                             {"origin", r.origin.empty() ? nlohmann::json(nullptr)
                                                         : origin_to_json(r.origin)}});
        }
        nlohmann::json out{{"root", opt.root},
                           {"files_seen", res.files_seen},
                           {"bytes_seen", res.bytes_seen},
                           {"files", files}};
        out["drive"] = drive ? nlohmann::json{{"capacity_bytes", drive->capacity_bytes},
                                              {"free_bytes", drive->free_bytes}}
                             : nlohmann::json(nullptr);
        std::cout << out.dump(2) << "\n";
        return kOk;
    }

    if (drive)
        std::cout << "drive: " << format_bytes_decimal(drive->free_bytes) << " free of "
                  << format_bytes_decimal(drive->capacity_bytes) << "\n";
    std::cout << "largest " << res.records.size() << " of " << res.files_seen
              << " files under " << opt.root << "\n";
    for (size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        std::string marker = r.origin.empty() ? " " : (r.origin.has_any_url() ? "U" : "z");
        std::printf("%3zu  %10s  %s  %s  %s\n", i + 1,
                    format_bytes_decimal(r.size_bytes).c_str(),
                    mtime_date(r.mtime).c_str(), marker.c_str(), r.path.c_str());
    }
    std::cout << "(U = download URLs recorded, z = marked as downloaded, no URLs)\n";
    std::cout << "scan finished\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// purge

void print_candidate(size_t idx, size_t total, const PurgeCandidate& c) {
    std::printf("[%zu/%zu] %s\n", idx + 1, total, c.record.path.c_str());
    std::printf("       size %s   source %s   availability %s (%s)\n",
                format_bytes_decimal(c.record.size_bytes).c_str(),
                to_string(c.category), to_string(c.outcome.best),
                c.outcome.via_hu && !c.outcome.via_hu->reason.empty()
                    ? c.outcome.via_hu->reason.c_str()
                    : (c.outcome.via_ru ? c.outcome.via_ru->reason.c_str() : "-"));
    std::printf("       would free %s\n",
                format_bytes_decimal(c.projected_saving_bytes).c_str());
}

int cmd_purge(const CliOptions& opt) {
    Config cfg = make_config(opt);
    if (opt.root.empty() || !fs::is_directory(opt.root)) {
        std::cerr << "purge: not a directory: " << opt.root << "\n";
        return kFatal;
    }
    HttpFetcher fetcher(cfg.timeout_secs, cfg.user_agent);
    PurgePlan plan = plan_purge(opt.root, cfg.target_free, cfg.top_n, fetcher, cfg);

    std::cout << "examined " << plan.examined << " files: " << plan.candidates.size()
              << " replaceable, " << plan.rejected.size() << " kept\n";
    for (const auto& r : plan.rejected)
        std::cout << "  keeping " << r.record.path << " (" << r.reason << ")\n";
    if (plan.target_met) std::cout << "stopped early: projected savings reach the target\n";

    if (plan.candidates.empty()) {
        std::cout << "no eligible candidates\n";
        return kOk;
    }

    std::vector<bool> approvals(plan.candidates.size(), false);
    if (opt.yes) {
        for (size_t i = 0; i < plan.candidates.size(); ++i)
            approvals[i] = plan.candidates[i].auto_approvable();
        std::cout << "--yes: auto-approving publicly redownloadable candidates only\n";
    } else {
        bool approve_rest = false, quit = false;
        for (size_t i = 0; i < plan.candidates.size() && !quit; ++i) {
            print_candidate(i, plan.candidates.size(), plan.candidates[i]);
            if (approve_rest) {
                approvals[i] = true;
                continue;
            }
            for (;;) {
                std::cout << "  replace with recipe? [y]es / [n]o / [a]ll / [q]uit: " << std::flush;
                std::string line;
                if (!std::getline(std::cin, line)) {
                    quit = true;
                    break;
                }
                std::string t = to_lower(trim(line));
                if (t == "y" || t == "yes") { approvals[i] = true; break; }
                if (t == "n" || t == "no") break;
                if (t == "a" || t == "all") { approvals[i] = true; approve_rest = true; break; }
                if (t == "q" || t == "quit") { quit = true; break; }
            }
        }
    }

    size_t approved = 0;
    for (bool a : approvals) approved += a;
    if (approved == 0) {
        std::cout << "nothing approved; nothing purged\n";
        return kOk;
    }

    auto pass = get_passphrase(cfg);
    if (!pass) {
        std::cerr << "purge: a passphrase is required to write recipes "
                  << "(set " << cfg.passphrase_env << " or run interactively)\n";
        return kAuth;
    }

    RecipeStore store = RecipeStore::open(cfg.store_dir);
    PurgeResult result = execute_purge(plan, approvals, store, *pass, cfg);

    for (const auto& item : result.items) {
        const char* verb = item.action == PurgeAction::purged ? "purged"
                           : item.action == PurgeAction::skipped ? "skipped"
                                                                 : "FAILED";
        std::cout << "  " << verb << "  " << item.path;
        if (!item.reason.empty()) std::cout << "  (" << item.reason << ")";
        if (item.action == PurgeAction::purged)
            std::cout << "  recipe " << item.recipe_id;
        std::cout << "\n";
    }
    std::cout << "freed " << format_bytes_decimal(result.bytes_freed);
    if (cfg.target_free)
        std::cout << " of " << format_bytes_decimal(*cfg.target_free) << " requested";
    std::cout << " (" << result.purged << " purged, " << result.skipped << " skipped, "
              << result.failed << " failed)\n";
    return result.failed > 0 ? kPartial : kOk;
}

// ---------------------------------------------------------------------------
// maintain

int cmd_maintain(const CliOptions& opt) {
    Config cfg = make_config(opt);
    RecipeStore store = RecipeStore::open(cfg.store_dir);
    if (store.list().empty()) {
        std::cout << "store is empty; nothing to maintain\n";
        return kOk;
    }
    auto pass = get_passphrase(cfg);
    if (!pass) {
        std::cerr << "maintain: passphrase required (set " << cfg.passphrase_env << ")\n";
        return kAuth;
    }
    HttpFetcher fetcher(cfg.timeout_secs, cfg.user_agent);
    MaintenanceReport rep = maintain(store, fetcher, *pass, now_unix(), cfg);
    for (const auto& item : rep.items) {
        std::cout << "  " << item.recipe_id << "  " << item.file_name << "  "
                  << to_string(item.status_after);
        if (!item.reason.empty()) std::cout << "  (" << item.reason << ")";
        std::cout << "\n";
    }
    std::cout << rep.current << " current, " << rep.stale << " stale\n";
    return rep.stale > 0 ? kPartial : kOk;
}

// ---------------------------------------------------------------------------
// restore

int cmd_restore(const CliOptions& opt, const std::string& id, bool all) {
    Config cfg = make_config(opt);
    RecipeStore store = RecipeStore::open(cfg.store_dir);
    auto pass = get_passphrase(cfg);
    if (!pass) {
        std::cerr << "restore: passphrase required (set " << cfg.passphrase_env << ")\n";
        return kAuth;
    }
    HttpFetcher fetcher(cfg.timeout_secs, cfg.user_agent);

    std::vector<std::string> ids;
    if (all) {
        for (const auto& e : store.list())
            if (e.status != RecipeStatus::restored) ids.push_back(e.recipe_id);
        if (ids.empty()) {
            std::cout << "nothing to restore\n";
            return kOk;
        }
    } else {
        if (!store.find(id)) {
            std::cerr << "restore: no such recipe: " << id << "\n";
            return kFatal;
        }
        ids.push_back(id);
    }

    size_t failed = 0;
    for (const auto& rid : ids) {
        try {
            RestoreResult r = reconstitute(rid, store, fetcher, *pass, std::nullopt,
                                           /*force=*/false, cfg);
            std::cout << "  restored " << r.output_path << "  ("
                      << format_bytes_decimal(r.bytes_written) << " via "
                      << to_string(r.channel_mode) << " " << r.channel_url << ")\n";
        } catch (const AuthenticationError&) {
            std::cerr << "restore: wrong passphrase or corrupted recipe blob\n";
            return kAuth;
        } catch (const RestoreError& e) {
            std::cerr << "  failed " << rid << ": " << e.what() << "\n";
            ++failed;
        }
    }
    if (failed == ids.size()) return all ? kPartial : kFatal;
    return failed > 0 ? kPartial : kOk;
}

// ---------------------------------------------------------------------------
// report

// Availability for reports is taken from the recorded metadata and the
// presumption rules alone; the command does not touch the network.
struct OfflineFetcher : Fetcher {
    FetchResult fetch(const std::string&, const BodySink&) override {
        FetchResult r;
        r.ok = false;
        r.error = "web checks skipped in report mode";
        return r;
    }
};

int cmd_report(const CliOptions& opt, const std::string& target) {
    Config cfg = make_config(opt);
    std::vector<CorpusRecord> records;
    if (fs::is_regular_file(target)) {
        records = load_corpus_jsonl(target);
    } else if (fs::is_directory(target)) {
        ScanResult res = walk_largest(target, cfg.top_n, cfg.fixture_mode);
        attach_origin(res.records, cfg.fixture_mode);
        for (const auto& r : res.records) {
            CorpusRecord c;
            c.path = r.path;
            c.size_bytes = r.size_bytes;
            c.participant = "local";
            c.mtime = r.mtime;
            if (!r.origin.empty()) {
                c.referrer_url = r.origin.referrer_url;
                c.host_url = r.origin.host_url;
                c.zone_id = r.origin.zone_id;
            }
            records.push_back(std::move(c));
        }
    } else {
        std::cerr << "report: no such file or directory: " << target << "\n";
        return kFatal;
    }

    ScanSummary summary = summarize_scan(records, now_unix());

    OfflineFetcher fetcher;
    std::vector<AvailabilityOutcome> outcomes;
    outcomes.reserve(records.size());
    for (const auto& rec : records) {
        Recipe r;
        r.original_path = rec.path;
        r.file_name = detail::corpus_base_name(rec.path);
        r.size_bytes = rec.size_bytes;
        r.hash_full = rec.hash.empty() ? std::string(64, '0') : rec.hash;
        r.hash_algo = "sha256";
        r.referrer_url = rec.referrer_url;
        r.host_url = rec.host_url;
        outcomes.push_back(check_availability_full(r, fetcher, cfg));
    }
    std::vector<std::string> participants;
    for (const auto& rec : records)
        if (std::find(participants.begin(), participants.end(), rec.participant) ==
            participants.end())
            participants.push_back(rec.participant);

    auto t_ru = redownloadability_report(
        Channel::referrer, channel_outcomes(records, outcomes, Channel::referrer, cfg.categories),
        participants);
    auto t_hu = redownloadability_report(
        Channel::host, channel_outcomes(records, outcomes, Channel::host, cfg.categories),
        participants);

    if (opt.json) {
        nlohmann::json out{{"summary", scan_summary_to_json(summary)},
                           {"via_referrer", redownloadability_to_json(t_ru)},
                           {"via_host", redownloadability_to_json(t_hu)},
                           {"note", "availability from presumption rules only; no web checks"}};
        std::cout << out.dump(2) << "\n";
        return kOk;
    }
    std::cout << render_scan_summary_text(summary) << "\n"
              << render_redownloadability_text(t_ru) << "\n"
              << render_redownloadability_text(t_hu)
              << "note: availability from presumption rules only; no web checks\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// recipe show

int cmd_recipe_show(const CliOptions& opt, const std::string& id) {
    Config cfg = make_config(opt);
    RecipeStore store = RecipeStore::open(cfg.store_dir);
    if (!store.find(id)) {
        std::cerr << "recipe: no such recipe: " << id << "\n";
        return kFatal;
    }
    auto pass = get_passphrase(cfg);
    if (!pass) {
        std::cerr << "recipe: passphrase required (set " << cfg.passphrase_env << ")\n";
        return kAuth;
    }
    Recipe r = decrypt_recipe(store.get(id), *pass);
    if (opt.json) {
        std::cout << serialize_recipe(r) << "\n";
        return kOk;
    }
    auto line = [](const char* k, const std::string& v) {
        std::printf("  %-18s %s\n", k, v.c_str());
    };
    std::cout << "recipe " << r.recipe_id() << "\n";
    line("file name", r.file_name);
    line("original path", r.original_path);
    line("size", format_bytes_decimal(r.size_bytes) + " (" +
                     std::to_string(r.size_bytes) + " bytes)");
    line("hash", r.hash_algo + ":" + r.hash_full);
    line("partial hash", r.partial_hash
                             ? *r.partial_hash + " (first " +
                                   std::to_string(r.partial_len) + " bytes)"
                             : std::string("-"));
    line("host url", r.host_url.value_or("-"));
    line("referrer url", r.referrer_url.value_or("-"));
    line("created", format_rfc3339(r.created_at));
    line("last maintained", format_rfc3339(r.last_maintained_at));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"replace large re-downloadable files with encrypted recipes"};
    app.require_subcommand(1);

    CliOptions opt;
    std::string report_target, restore_id, show_id;
    bool restore_all = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--store", opt.store, "recipe store directory");
        cmd->add_option("--config", opt.config_file, "config file (JSON)");
        cmd->add_option("--timeout", opt.timeout, "per-request timeout, seconds");
        cmd->add_option("--concurrency", opt.concurrency, "parallel web checks");
        cmd->add_flag("--json", opt.json, "machine-readable output");
        cmd->add_flag("--fixture-mode", opt.fixture_mode,
                      "read provenance from .zoneid sidecar files");
    };

    CLI::App* scan = app.add_subcommand("scan", "list the largest files and their provenance");
    scan->add_option("root,--root", opt.root, "directory to scan");
    scan->add_option("--top", opt.top, "how many files to keep");
    add_common(scan);

    CLI::App* purge = app.add_subcommand("purge", "verify availability and replace approved files");
    purge->add_option("root,--root", opt.root, "directory to scan");
    purge->add_option("--top", opt.top, "how many files to consider");
    purge->add_option("--target-free", opt.target_free,
                      "stop once projected savings reach this size (e.g. 10GB)");
    purge->add_flag("--yes", opt.yes, "approve publicly redownloadable candidates without asking");
    purge->add_flag("--allow-auth", opt.allow_auth,
                    "let auth-gated candidates be purged too");
    purge->add_flag("--trash", opt.trash, "move originals to a trash directory instead of deleting");
    add_common(purge);

    CLI::App* maintain_cmd = app.add_subcommand("maintain", "re-verify stored recipes");
    add_common(maintain_cmd);

    CLI::App* restore = app.add_subcommand("restore", "reconstitute purged files");
    restore->add_option("recipe_id", restore_id, "recipe to restore");
    restore->add_flag("--all", restore_all, "restore every non-restored recipe");
    add_common(restore);

    CLI::App* report = app.add_subcommand("report", "summarize a corpus file or a directory");
    report->add_option("target", report_target, "corpus .jsonl file or directory")->required();
    report->add_option("--top", opt.top, "files to keep when scanning a directory");
    add_common(report);

    CLI::App* recipe = app.add_subcommand("recipe", "inspect stored recipes");
    CLI::App* show = recipe->add_subcommand("show", "decrypt and display one recipe");
    show->add_option("recipe_id", show_id, "recipe id")->required();
    add_common(show);
    recipe->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kFatal;
    }

    try {
        if (scan->parsed()) return cmd_scan(opt);
        if (purge->parsed()) return cmd_purge(opt);
        if (maintain_cmd->parsed()) return cmd_maintain(opt);
        if (restore->parsed()) {
            if (!restore_all && restore_id.empty()) {
                std::cerr << "restore: give a recipe id or --all\n";
                return kFatal;
            }
            return cmd_restore(opt, restore_id, restore_all);
        }
        if (report->parsed()) return cmd_report(opt, report_target);
        if (recipe->parsed() && show->parsed()) return cmd_recipe_show(opt, show_id);
        std::cerr << "no command\n";
        return kFatal;
    } catch (const AuthenticationError&) {
        std::cerr << "error: wrong passphrase or corrupted recipe blob\n";
        return kAuth;
    } catch (const StoreNotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFatal;
    }
}

#pragma once

// Aggregate reporting: corpus summaries (what did we find on disk, how much of
// it has provenance) and redownloadability tables (per source category, how
// much of it could we get back).  Consumes scan records or a recorded corpus
// in JSONL form, plus availability outcomes from webcheck.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "origin.hpp"
#include "scan.hpp"
#include "util.hpp"
#include "webcheck.hpp"

namespace webpurge {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One file as recorded in a study corpus.  `hash` may be empty when unknown
// (live scans that skipped hashing); such records are left out of duplicate
// accounting.
struct CorpusRecord {
  std::string path;
  std::uint64_t size_bytes = 0;
  std::string participant;
  std::optional<std::string> referrer_url;
  std::optional<std::string> host_url;
  std::optional<int> zone_id;
  UnixTime mtime = 0;
  std::string hash;
};

namespace detail {

// Filename helpers that survive recorded Windows paths on a POSIX build:
// std::filesystem::path would treat backslashes as ordinary characters.
inline std::string corpus_base_name(const std::string& path) {
  const auto pos = path.find_last_of("/\\");
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

inline std::string corpus_stem(const std::string& path) {
  std::string name = corpus_base_name(path);
  const auto dot = name.find_last_of('.');
  if (dot == std::string::npos || dot == 0) return name;
  return name.substr(0, dot);
}

}  // namespace detail

// Parse one JSONL corpus line.  Keys: path, size, participant, ru, hu,
// zone_id, mtime (RFC 3339), hash.  ru/hu/zone_id may be null or absent.
inline CorpusRecord corpus_record_from_json(const nlohmann::json& j) {
  CorpusRecord rec;
  try {
    rec.path = j.at("path").get<std::string>();
    rec.size_bytes = j.at("size").get<std::uint64_t>();
    rec.participant = j.at("participant").get<std::string>();
    if (j.contains("ru") && !j["ru"].is_null())
      rec.referrer_url = j["ru"].get<std::string>();
    if (j.contains("hu") && !j["hu"].is_null())
      rec.host_url = j["hu"].get<std::string>();
    if (j.contains("zone_id") && !j["zone_id"].is_null())
      rec.zone_id = j["zone_id"].get<int>();
    if (j.contains("mtime") && !j["mtime"].is_null()) {
      auto t = parse_rfc3339(j["mtime"].get<std::string>());
      if (!t) throw CorpusError("bad mtime: " + j["mtime"].get<std::string>());
      rec.mtime = *t;
    }
    if (j.contains("hash") && !j["hash"].is_null())
      rec.hash = j["hash"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("corpus record: ") + e.what());
  }
  return rec;
}

inline std::vector<CorpusRecord> load_corpus_jsonl(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw CorpusError("cannot open corpus file: " + file);
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    nlohmann::json j = nlohmann::json::parse(t, nullptr, false);
    if (j.is_discarded())
      throw CorpusError("corpus line " + std::to_string(lineno) +
                        ": invalid JSON");
    out.push_back(corpus_record_from_json(j));
  }
  return out;
}

// Provenance view of a corpus record; nullopt when the record carries no
// download metadata at all (no zone marker, no URLs).
inline std::optional<OriginMetadata> corpus_origin(const CorpusRecord& rec) {
  if (!rec.zone_id && !rec.referrer_url && !rec.host_url) return std::nullopt;
  OriginMetadata m;
  m.zone_id = rec.zone_id;
  m.referrer_url = rec.referrer_url;
  m.host_url = rec.host_url;
  m.channel = rec.zone_id ? OriginChannel::ads : OriginChannel::xattr;
  return m;
}

// ---------------------------------------------------------------------------
// Scan summary

struct ScanSummary {
  std::size_t files_total = 0;
  std::size_t participants = 0;
  std::uint64_t bytes_total = 0;

  // URL provenance buckets.  `neither` means metadata was present (a zone
  // marker or similar) but carried no URLs; `no_metadata` means nothing was
  // recorded for the file at all.
  std::size_t ru_only = 0;
  std::size_t hu_only = 0;
  std::size_t both_urls = 0;
  std::size_t neither = 0;
  std::size_t no_metadata = 0;

  std::size_t zoneid_reported = 0;

  // Duplicate content: intra counts extra copies within one owner, inter
  // counts hash groups spanning owners (one per additional owner).
  std::size_t dup_intra = 0;
  std::size_t dup_inter = 0;

  Stats size_stats;      // bytes
  Stats days_stats;      // days since last modified
  Stats name_len_stats;  // filename length excluding extension

  std::size_t metadata_reported() const {
    return ru_only + hu_only + both_urls + neither;
  }
  std::size_t with_any_url() const { return ru_only + hu_only + both_urls; }
};

inline ScanSummary summarize_scan(const std::vector<CorpusRecord>& records,
                                  UnixTime now) {
  ScanSummary s;
  s.files_total = records.size();
  std::set<std::string> participants;
  std::vector<double> sizes, days, name_lens;
  sizes.reserve(records.size());
  days.reserve(records.size());
  name_lens.reserve(records.size());
  // hash -> participant -> copies
  std::map<std::string, std::map<std::string, std::size_t>> groups;

  for (const auto& r : records) {
    participants.insert(r.participant);
    s.bytes_total += r.size_bytes;
    sizes.push_back(static_cast<double>(r.size_bytes));
    days.push_back(static_cast<double>(now - r.mtime) / 86400.0);
    name_lens.push_back(
        static_cast<double>(detail::corpus_stem(r.path).size()));

    const bool ru = r.referrer_url.has_value();
    const bool hu = r.host_url.has_value();
    if (ru && hu) ++s.both_urls;
    else if (ru) ++s.ru_only;
    else if (hu) ++s.hu_only;
    else if (r.zone_id) ++s.neither;
    else ++s.no_metadata;
    if (r.zone_id) ++s.zoneid_reported;

    if (!r.hash.empty()) ++groups[r.hash][r.participant];
  }

  s.participants = participants.size();
  for (const auto& [hash, owners] : groups) {
    (void)hash;
    for (const auto& [who, copies] : owners) {
      (void)who;
      if (copies > 1) s.dup_intra += copies - 1;
    }
    if (owners.size() > 1) s.dup_inter += owners.size() - 1;
  }
  s.size_stats = compute_stats(sizes);
  s.days_stats = compute_stats(days);
  s.name_len_stats = compute_stats(name_lens);
  return s;
}

// Live-scan variant: single local user, no recorded hashes.
inline ScanSummary summarize_scan(const std::vector<FileRecord>& records,
                                  UnixTime now) {
  std::vector<CorpusRecord> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
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
    rows.push_back(std::move(c));
  }
  return summarize_scan(rows, now);
}

// ---------------------------------------------------------------------------
// Redownloadability tables

enum class Channel { referrer, host };

inline const char* to_string(Channel c) {
  return c == Channel::referrer ? "referrer URL" : "host URL";
}

// One file evaluated against one channel.  `has_url` false routes the file to
// the links-not-recorded row regardless of `status`.
struct FileChannelOutcome {
  std::string participant;
  std::uint64_t size_bytes = 0;
  SourceCategory category = SourceCategory::LinksNotRecorded;
  bool has_url = false;
  RdStatus status = RdStatus::NotRedownloadable;
};

struct CategoryRow {
  SourceCategory category = SourceCategory::LinksNotRecorded;
  std::size_t files = 0;
  std::size_t not_rd = 0;
  std::size_t public_rd = 0;
  std::size_t auth_rd = 0;
  std::uint64_t public_bytes = 0;
  std::uint64_t auth_bytes = 0;
};

struct PerParticipantBytes {
  double mean_all = 0.0;       // denominator: every participant
  double stddev_all = 0.0;     // sample stddev over all participants
  double mean_nonzero = 0.0;   // denominator: participants with > 0 bytes
  double stddev_nonzero = 0.0;
  std::size_t participants_nonzero = 0;
};

inline constexpr std::array<SourceCategory, 8> kCategoryOrder = {
    SourceCategory::CloudCollaboration, SourceCategory::Webmail,
    SourceCategory::BigTechCSP,         SourceCategory::SmallCSP,
    SourceCategory::ApplicationsTools,  SourceCategory::LocalAccess,
    SourceCategory::DirectLink,         SourceCategory::LinksNotRecorded,
};

struct RedownloadabilityTable {
  Channel channel = Channel::referrer;
  std::array<CategoryRow, 8> rows{};  // kCategoryOrder
  std::size_t files_total = 0;
  std::size_t not_rd_total = 0;
  std::size_t public_total = 0;
  std::size_t auth_total = 0;
  std::uint64_t public_bytes = 0;
  std::uint64_t auth_bytes = 0;
  PerParticipantBytes public_per_participant;
  PerParticipantBytes auth_per_participant;

  const CategoryRow& row(SourceCategory c) const {
    for (const auto& r : rows)
      if (r.category == c) return r;
    throw std::logic_error("category row missing");
  }
};

namespace detail {

inline PerParticipantBytes per_participant(
    const std::map<std::string, std::uint64_t>& by_p,
    const std::vector<std::string>& participants) {
  PerParticipantBytes out;
  std::vector<double> all, nonzero;
  for (const auto& p : participants) {
    auto it = by_p.find(p);
    double v = it == by_p.end() ? 0.0 : static_cast<double>(it->second);
    all.push_back(v);
    if (v > 0.0) nonzero.push_back(v);
  }
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  out.mean_all = mean(all);
  out.stddev_all = sample_stddev(all);
  out.mean_nonzero = mean(nonzero);
  out.stddev_nonzero = sample_stddev(nonzero);
  out.participants_nonzero = nonzero.size();
  return out;
}

}  // namespace detail

// Build one channel's table.  Row key is the file-level source category; a
// file without this channel's URL lands in links-not-recorded and counts as
// not redownloadable for this channel.  `participants` fixes the denominator
// for the per-participant means (participants with zero recovered bytes
// included in the _all variants).
inline RedownloadabilityTable redownloadability_report(
    Channel channel, const std::vector<FileChannelOutcome>& outcomes,
    const std::vector<std::string>& participants) {
  RedownloadabilityTable t;
  t.channel = channel;
  for (std::size_t i = 0; i < kCategoryOrder.size(); ++i)
    t.rows[i].category = kCategoryOrder[i];
  auto row_for = [&](SourceCategory c) -> CategoryRow& {
    for (auto& r : t.rows)
      if (r.category == c) return r;
    return t.rows.back();
  };
  std::map<std::string, std::uint64_t> pub_by_p, auth_by_p;

  for (const auto& o : outcomes) {
    ++t.files_total;
    CategoryRow& row = row_for(
        o.has_url ? o.category : SourceCategory::LinksNotRecorded);
    ++row.files;
    RdStatus st = o.has_url ? o.status : RdStatus::NotRedownloadable;
    switch (st) {
      case RdStatus::PublicRd:
        ++row.public_rd;
        ++t.public_total;
        row.public_bytes += o.size_bytes;
        t.public_bytes += o.size_bytes;
        pub_by_p[o.participant] += o.size_bytes;
        break;
      case RdStatus::RdWithAuth:
        ++row.auth_rd;
        ++t.auth_total;
        row.auth_bytes += o.size_bytes;
        t.auth_bytes += o.size_bytes;
        auth_by_p[o.participant] += o.size_bytes;
        break;
      case RdStatus::NotRedownloadable:
        ++row.not_rd;
        ++t.not_rd_total;
        break;
    }
  }
  t.public_per_participant = detail::per_participant(pub_by_p, participants);
  t.auth_per_participant = detail::per_participant(auth_by_p, participants);
  return t;
}

// Glue from corpus rows + availability outcomes (index-aligned) to the
// per-channel view above.  Category is the file-level classification; the
// file routes to links-not-recorded when it lacks this channel's URL.
inline std::vector<FileChannelOutcome> channel_outcomes(
    const std::vector<CorpusRecord>& records,
    const std::vector<AvailabilityOutcome>& outcomes, Channel channel,
    const CategoryLists& lists = {}) {
  if (records.size() != outcomes.size())
    throw std::invalid_argument("records/outcomes size mismatch");
  std::vector<FileChannelOutcome> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    FileChannelOutcome fo;
    fo.participant = r.participant;
    fo.size_bytes = r.size_bytes;
    auto origin = corpus_origin(r);
    fo.category = classify_source(
        origin, file_extension(detail::corpus_base_name(r.path)), lists);
    const auto& url =
        channel == Channel::referrer ? r.referrer_url : r.host_url;
    fo.has_url = url.has_value();
    if (fo.has_url) {
      const auto& ch = channel == Channel::referrer ? outcomes[i].via_ru
                                                    : outcomes[i].via_hu;
      fo.status = ch ? ch->status : RdStatus::NotRedownloadable;
    }
    out.push_back(std::move(fo));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

inline std::string pct(std::size_t num, std::size_t den) {
  if (den == 0) return "-";
  return fmt("%.1f%%", 100.0 * static_cast<double>(num) /
                           static_cast<double>(den));
}

inline std::string stat_cell(double v, bool bytes) {
  if (v != v) return "-";  // NaN: empty input
  return bytes ? format_bytes_decimal(static_cast<std::uint64_t>(v + 0.5))
               : fmt("%.1f", v);
}

inline std::string stats_line(const Stats& s, bool bytes) {
  if (s.count == 0) return "-";
  return stat_cell(s.min, bytes) + " / " + stat_cell(s.mean, bytes) + " / " +
         stat_cell(s.median, bytes) + " / " + stat_cell(s.max, bytes);
}

}  // namespace detail

inline std::string render_scan_summary_text(const ScanSummary& s) {
  std::ostringstream os;
  const std::size_t meta = s.metadata_reported();
  auto line = [&](const std::string& label, const std::string& value) {
    os << "  " << label;
    for (std::size_t i = label.size(); i < 34; ++i) os << ' ';
    os << value << '\n';
  };
  auto count_line = [&](const std::string& label, std::size_t n) {
    std::string v = std::to_string(n);
    v += "  (" + detail::pct(n, meta) + " of reported, " +
         detail::pct(n, s.files_total) + " of all)";
    line(label, v);
  };
  os << "Scan summary\n";
  line("participants", std::to_string(s.participants));
  line("files", std::to_string(s.files_total));
  line("total size", format_bytes_decimal(s.bytes_total));
  line("with download metadata",
       std::to_string(meta) + "  (" + detail::pct(meta, s.files_total) +
           " of all)");
  line("without any metadata", std::to_string(s.no_metadata));
  count_line("zone id reported", s.zoneid_reported);
  count_line("referrer URL only", s.ru_only);
  count_line("host URL only", s.hu_only);
  count_line("both URLs", s.both_urls);
  count_line("metadata but no URLs", s.neither);
  line("duplicates within one owner", std::to_string(s.dup_intra));
  line("duplicates across owners", std::to_string(s.dup_inter));
  line("file size (min/mean/med/max)",
       detail::stats_line(s.size_stats, true));
  line("days since modified", detail::stats_line(s.days_stats, false));
  line("name length w/o extension", detail::stats_line(s.name_len_stats,
                                                       false));
  return os.str();
}

inline nlohmann::json scan_summary_to_json(const ScanSummary& s) {
  auto stats = [](const Stats& st) {
    if (st.count == 0) return nlohmann::json(nullptr);
    return nlohmann::json{{"min", st.min},
                          {"mean", st.mean},
                          {"median", st.median},
                          {"max", st.max}};
  };
  return nlohmann::json{
      {"participants", s.participants},
      {"files_total", s.files_total},
      {"bytes_total", s.bytes_total},
      {"metadata_reported", s.metadata_reported()},
      {"no_metadata", s.no_metadata},
      {"zoneid_reported", s.zoneid_reported},
      {"ru_only", s.ru_only},
      {"hu_only", s.hu_only},
      {"both_urls", s.both_urls},
      {"neither", s.neither},
      {"dup_intra", s.dup_intra},
      {"dup_inter", s.dup_inter},
      {"size_stats", stats(s.size_stats)},
      {"days_stats", stats(s.days_stats)},
      {"name_length_stats", stats(s.name_len_stats)},
  };
}

inline std::string render_redownloadability_text(
    const RedownloadabilityTable& t) {
  std::ostringstream os;
  os << "Redownloadability via " << to_string(t.channel) << "\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "  %-24s %6s %8s %10s %10s\n", "category",
                "files", "not rd", "public rd", "rd w auth");
  os << buf;
  for (const auto& r : t.rows) {
    if (r.files == 0) continue;
    std::snprintf(buf, sizeof(buf), "  %-24s %6zu %8zu %10zu %10zu\n",
                  to_string(r.category), r.files, r.not_rd, r.public_rd,
                  r.auth_rd);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "  %-24s %6zu %8zu %10zu %10zu\n", "total",
                t.files_total, t.not_rd_total, t.public_total, t.auth_total);
  os << buf;
  os << "  publicly redownloadable   " << format_bytes_decimal(t.public_bytes)
     << "\n";
  os << "  redownloadable with auth  " << format_bytes_decimal(t.auth_bytes)
     << "\n";
  auto pp = [&](const char* label, const PerParticipantBytes& p) {
    os << "  " << label << " per participant: mean "
       << format_bytes_decimal(static_cast<std::uint64_t>(p.mean_all + 0.5))
       << " (sd "
       << format_bytes_decimal(static_cast<std::uint64_t>(p.stddev_all + 0.5))
       << ")";
    if (p.participants_nonzero > 0) {
      os << "; over " << p.participants_nonzero << " with any: mean "
         << format_bytes_decimal(
                static_cast<std::uint64_t>(p.mean_nonzero + 0.5))
         << " (sd "
         << format_bytes_decimal(
                static_cast<std::uint64_t>(p.stddev_nonzero + 0.5))
         << ")";
    }
    os << "\n";
  };
  pp("public", t.public_per_participant);
  pp("auth", t.auth_per_participant);
  return os.str();
}

inline nlohmann::json redownloadability_to_json(
    const RedownloadabilityTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"category", to_string(r.category)},
                    {"files", r.files},
                    {"not_rd", r.not_rd},
                    {"public_rd", r.public_rd},
                    {"auth_rd", r.auth_rd},
                    {"public_bytes", r.public_bytes},
                    {"auth_bytes", r.auth_bytes}});
  }
  auto pp = [](const PerParticipantBytes& p) {
    return nlohmann::json{{"mean_all", p.mean_all},
                          {"stddev_all", p.stddev_all},
                          {"mean_nonzero", p.mean_nonzero},
                          {"stddev_nonzero", p.stddev_nonzero},
                          {"participants_nonzero", p.participants_nonzero}};
  };
  return nlohmann::json{
      {"channel", t.channel == Channel::referrer ? "referrer" : "host"},
      {"rows", rows},
      {"files_total", t.files_total},
      {"not_rd_total", t.not_rd_total},
      {"public_total", t.public_total},
      {"auth_total", t.auth_total},
      {"public_bytes", t.public_bytes},
      {"auth_bytes", t.auth_bytes},
      {"public_per_participant", pp(t.public_per_participant)},
      {"auth_per_participant", pp(t.auth_per_participant)},
  };
}

}  // namespace webpurge

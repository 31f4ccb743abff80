#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "codec.hpp"
#include "digest.hpp"
#include "maze.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "search.hpp"

namespace tracegrid {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kShardFormat = "tracegrid-shard/1";
inline constexpr const char* kManifestFormat = "tracegrid-dataset/1";
inline constexpr const char* kManifestFile = "manifest.json";

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DigestMismatch : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

class ParseError : public DatasetError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DatasetError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InsufficientInstances : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

// ---------------------------------------------------------------------------
// Records

struct InstanceRecord {
  std::string id;
  GeneratorKind kind = GeneratorKind::Wilson;
  std::uint64_t seed = 0;
  std::string problem;
  std::string trace;
  std::string plan;
  std::size_t difficulty = 0;
  std::size_t plan_len = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const InstanceRecord&, const InstanceRecord&) = default;
};

/// Record ids are the first 64 bits of SHA-256 over the problem string.
inline std::string record_id(std::string_view problem) { return sha256_hex(problem).substr(0, 16); }

inline InstanceRecord make_record(const ProblemInstance& inst) {
  if (!inst.search.solved()) throw GenerationError("cannot record an unsolved instance");
  InstanceRecord r;
  r.problem = join_tokens(encode_problem(inst.grid));
  r.trace = join_tokens(encode_trace(inst.search.trace));
  r.plan = join_tokens(encode_plan(*inst.search.plan));
  r.id = record_id(r.problem);
  r.kind = inst.kind;
  r.seed = inst.seed;
  r.difficulty = inst.search.difficulty();
  r.plan_len = inst.search.plan->size();
  r.width = inst.grid.width();
  r.height = inst.grid.height();
  return r;
}

inline Grid record_grid(const InstanceRecord& r) {
  const auto seq = split_tokens(r.problem);
  return decode_problem(seq, r.width, r.height);
}

/// Re-checks a stored record: id, length law, and ValidOptimal plan.
inline std::optional<std::string> verify_record(const InstanceRecord& r) {
  if (r.id != record_id(r.problem)) return "id does not match problem hash";
  const auto trace = split_tokens(r.trace);
  if (trace.size() != 5 * r.difficulty) return "trace token count is not 5 x difficulty";
  const auto plan_tokens = split_tokens(r.plan);
  if (plan_tokens.size() != 3 * r.plan_len) return "plan token count is not 3 x plan length";
  try {
    const Grid grid = record_grid(r);
    if (!validate_plan(grid, decode_plan(plan_tokens)).optimal()) return "plan is not valid and optimal";
  } catch (const std::exception& e) {
    return e.what();
  }
  return std::nullopt;
}

inline std::string to_line(const InstanceRecord& r) {
  const json meta = {{"id", r.id},         {"kind", std::string(to_string(r.kind))},
                     {"seed", r.seed},     {"difficulty", r.difficulty},
                     {"plan_len", r.plan_len}, {"width", r.width},
                     {"height", r.height}};
  return meta.dump() + '\t' + r.problem + '\t' + r.trace + '\t' + r.plan;
}

inline InstanceRecord parse_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == '\t') {
      fields.push_back(line.substr(begin, i - begin));
      begin = i + 1;
    }
  if (fields.size() != 4) throw ParseError(line_no, "expected 4 tab-separated fields");
  InstanceRecord r;
  try {
    const json meta = json::parse(fields[0]);
    r.id = meta.at("id").get<std::string>();
    const auto kind = parse_kind(meta.at("kind").get<std::string>());
    if (!kind) throw ParseError(line_no, "unknown generator kind");
    r.kind = *kind;
    r.seed = meta.at("seed").get<std::uint64_t>();
    r.difficulty = meta.at("difficulty").get<std::size_t>();
    r.plan_len = meta.at("plan_len").get<std::size_t>();
    r.width = meta.at("width").get<int>();
    r.height = meta.at("height").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(line_no, std::string("bad metadata: ") + e.what());
  }
  r.problem = fields[1];
  r.trace = fields[2];
  r.plan = fields[3];
  return r;
}

// ---------------------------------------------------------------------------
// Shards

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string render_shard(std::span<const InstanceRecord> records, std::size_t shard_index) {
  const json header = {{"format", kShardFormat}, {"shard", shard_index}, {"records", records.size()}};
  std::string out = header.dump() + '\n';
  for (const auto& r : records) out += to_line(r) + '\n';
  return out;
}

/// Writes a shard and returns its SHA-256.
inline std::string write_shard(const fs::path& path, std::span<const InstanceRecord> records,
                               std::size_t shard_index = 0) {
  const std::string text = render_shard(records, shard_index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot create " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw DatasetError("write failed for " + path.string());
  return sha256_hex(text);
}

inline std::vector<InstanceRecord> parse_shard(std::string_view text) {
  std::vector<InstanceRecord> out;
  std::size_t line_no = 0;
  std::optional<std::size_t> declared;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) throw ParseError(line_no, "truncated line (no terminating newline)");
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line_no == 1) {
      try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != kShardFormat) throw ParseError(1, "unknown shard format");
        declared = header.at("records").get<std::size_t>();
      } catch (const json::exception& e) {
        throw ParseError(1, std::string("bad shard header: ") + e.what());
      }
      continue;
    }
    out.push_back(parse_line(line, line_no));
  }
  if (!declared) throw ParseError(1, "missing shard header");
  if (*declared != out.size())
    throw ParseError(line_no + 1, "shard declares " + std::to_string(*declared) + " records, found " +
                                      std::to_string(out.size()));
  return out;
}

/// Reads a shard; with `expected_digest` the file content is verified first.
inline std::vector<InstanceRecord> read_shard(const fs::path& path,
                                              std::optional<std::string> expected_digest = std::nullopt) {
  const std::string text = read_file(path);
  if (expected_digest && sha256_hex(text) != *expected_digest)
    throw DigestMismatch("digest mismatch for " + path.string());
  return parse_shard(text);
}

// ---------------------------------------------------------------------------
// Configuration and manifest

struct KindCount {
  GeneratorKind kind = GeneratorKind::Wilson;
  std::size_t count = 0;
};

struct DatasetConfig {
  std::vector<KindCount> mix;
  std::uint64_t master_seed = 0;
  std::size_t shard_size = 50'000;
  /// Dimensions and kind-specific parameters; `kind` and `seed` are ignored.
  GenConfig params;
};

struct ShardInfo {
  std::string file;
  std::size_t records = 0;
  std::string sha256;
};

struct Split {
  std::uint64_t seed = 0;
  std::size_t holdout_per_kind = 0;
  std::map<std::string, std::vector<std::string>> holdout;  // kind -> ids
  std::size_t train_count = 0;
};

struct DatasetManifest {
  DatasetConfig config;
  std::map<std::string, std::size_t> kind_counts;
  std::vector<ShardInfo> shards;
  std::optional<Split> split;

  std::size_t total_records() const {
    std::size_t n = 0;
    for (const auto& s : shards) n += s.records;
    return n;
  }
};

inline json params_to_json(const GenConfig& p) {
  return {{"width", p.width},
          {"height", p.height},
          {"floor_fraction", p.floor_fraction},
          {"wall_fraction_min", p.wall_fraction_min},
          {"wall_fraction_max", p.wall_fraction_max},
          {"min_difficulty", p.min_difficulty},
          {"max_attempts", p.max_attempts},
          {"wall_levels", p.wall_levels}};
}

inline GenConfig params_from_json(const json& j) {
  GenConfig p;
  p.width = j.at("width").get<int>();
  p.height = j.at("height").get<int>();
  p.floor_fraction = j.at("floor_fraction").get<double>();
  p.wall_fraction_min = j.at("wall_fraction_min").get<double>();
  p.wall_fraction_max = j.at("wall_fraction_max").get<double>();
  p.min_difficulty = j.at("min_difficulty").get<std::size_t>();
  p.max_attempts = j.at("max_attempts").get<std::size_t>();
  p.wall_levels = j.at("wall_levels").get<int>();
  return p;
}

/// Manifest body without the digest field.
inline json manifest_body(const DatasetManifest& m) {
  json mix = json::array();
  for (const auto& kc : m.config.mix) mix.push_back({{"kind", std::string(to_string(kc.kind))}, {"count", kc.count}});
  json shards = json::array();
  for (const auto& s : m.shards) shards.push_back({{"file", s.file}, {"records", s.records}, {"sha256", s.sha256}});
  json body = {{"format", kManifestFormat},
               {"config",
                {{"mix", mix},
                 {"master_seed", m.config.master_seed},
                 {"shard_size", m.config.shard_size},
                 {"params", params_to_json(m.config.params)}}},
               {"kind_counts", m.kind_counts},
               {"shards", shards}};
  if (m.split) {
    body["split"] = {{"seed", m.split->seed},
                     {"holdout_per_kind", m.split->holdout_per_kind},
                     {"holdout", m.split->holdout},
                     {"train_count", m.split->train_count}};
  }
  return body;
}

/// SHA-256 of the canonical manifest body; a pure function of the content.
inline std::string manifest_digest(const DatasetManifest& m) { return sha256_hex(manifest_body(m).dump()); }

inline std::string manifest_to_string(const DatasetManifest& m) {
  json j = manifest_body(m);
  j["digest"] = manifest_digest(m);
  return j.dump(2) + '\n';
}

inline DatasetManifest manifest_from_json(const json& j) {
  if (j.at("format").get<std::string>() != kManifestFormat) throw DatasetError("unknown manifest format");
  DatasetManifest m;
  const auto& cfg = j.at("config");
  for (const auto& e : cfg.at("mix")) {
    const auto kind = parse_kind(e.at("kind").get<std::string>());
    if (!kind) throw DatasetError("unknown kind in manifest");
    m.config.mix.push_back({*kind, e.at("count").get<std::size_t>()});
  }
  m.config.master_seed = cfg.at("master_seed").get<std::uint64_t>();
  m.config.shard_size = cfg.at("shard_size").get<std::size_t>();
  m.config.params = params_from_json(cfg.at("params"));
  m.kind_counts = j.at("kind_counts").get<std::map<std::string, std::size_t>>();
  for (const auto& s : j.at("shards"))
    m.shards.push_back({s.at("file").get<std::string>(), s.at("records").get<std::size_t>(),
                        s.at("sha256").get<std::string>()});
  if (j.contains("split")) {
    const auto& s = j.at("split");
    m.split = Split{s.at("seed").get<std::uint64_t>(), s.at("holdout_per_kind").get<std::size_t>(),
                    s.at("holdout").get<std::map<std::string, std::vector<std::string>>>(),
                    s.at("train_count").get<std::size_t>()};
  }
  return m;
}

inline void write_manifest(const fs::path& dir, const DatasetManifest& m) {
  std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write manifest in " + dir.string());
  out << manifest_to_string(m);
  if (!out) throw DatasetError("manifest write failed");
}

/// Loads a manifest and checks its recorded digest.
inline DatasetManifest read_manifest(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_file(dir / kManifestFile));
  } catch (const json::exception& e) {
    throw DatasetError(std::string("bad manifest: ") + e.what());
  }
  auto m = manifest_from_json(j);
  if (j.value("digest", std::string{}) != manifest_digest(m)) throw DigestMismatch("manifest digest mismatch");
  return m;
}

/// All records of a dataset in shard order, each shard digest-verified.
inline std::vector<InstanceRecord> load_records(const fs::path& dir, const DatasetManifest& m) {
  std::vector<InstanceRecord> out;
  out.reserve(m.total_records());
  for (const auto& s : m.shards) {
    auto records = read_shard(dir / s.file, s.sha256);
    if (records.size() != s.records) throw DatasetError("record count mismatch in " + s.file);
    std::move(records.begin(), records.end(), std::back_inserter(out));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Building

inline std::string shard_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard-%05zu.tsv", index);
  return buf;
}

/// Per-instance seed: independent of worker count and mix order.
inline std::uint64_t instance_seed(std::uint64_t master, GeneratorKind kind, std::size_t index) {
  return derive_seed(master, static_cast<std::uint64_t>(kind) + 1, index);
}

/// Generates every kind in the mix, drops duplicate ids (continuing with the
/// next derived index until each kind's count is met), and writes fixed-size
/// shards plus manifest.json into `out_dir`. Output is a pure function of
/// `config`. On failure, files written by this call are removed.
inline DatasetManifest build_dataset(const DatasetConfig& config, const fs::path& out_dir,
                                     std::optional<unsigned> workers = std::nullopt) {
  if (config.mix.empty()) throw ConfigError("dataset mix is empty");
  if (config.shard_size == 0) throw ConfigError("shard size must be positive");
  for (const auto& kc : config.mix) {
    GenConfig probe = config.params;
    probe.kind = kc.kind;
    probe.validate();
  }
  const unsigned pool = resolve_workers(workers);

  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  DatasetManifest manifest;
  manifest.config = config;

  try {
    std::vector<InstanceRecord> pending;
    std::unordered_set<std::string> seen;
    const auto flush = [&](bool final) {
      while (pending.size() >= config.shard_size || (final && !pending.empty())) {
        const std::size_t take = std::min(pending.size(), config.shard_size);
        const auto name = shard_name(manifest.shards.size());
        const fs::path path = out_dir / name;
        written.push_back(path);
        const auto digest =
            write_shard(path, std::span(pending.data(), take), manifest.shards.size());
        manifest.shards.push_back({name, take, digest});
        pending.erase(pending.begin(), pending.begin() + static_cast<std::ptrdiff_t>(take));
      }
    };

    constexpr std::size_t kBlock = 4096;
    for (const auto& kc : config.mix) {
      GenConfig base = config.params;
      base.kind = kc.kind;
      const std::size_t budget = 10 * kc.count + 1000;
      std::size_t accepted = 0;
      std::size_t next_index = 0;
      while (accepted < kc.count) {
        if (next_index >= budget)
          throw GenerationError(std::string("duplicate budget exhausted for kind ") + std::string(to_string(kc.kind)));
        const std::size_t block = std::min({kBlock, kc.count - accepted, budget - next_index});
        std::vector<std::optional<InstanceRecord>> slots(block);
        const std::size_t first = next_index;
        parallel_for(block, pool, [&](std::size_t i) {
          GenConfig cfg = base;
          cfg.seed = instance_seed(config.master_seed, kc.kind, first + i);
          try {
            slots[i] = make_record(generate_instance(cfg));
          } catch (const std::exception& e) {
            throw GenerationError("instance " + std::to_string(first + i) + " (" +
                                  std::string(to_string(kc.kind)) + "): " + e.what());
          }
        });
        next_index += block;
        for (auto& slot : slots) {
          if (accepted == kc.count) break;
          if (!seen.insert(slot->id).second) continue;
          pending.push_back(std::move(*slot));
          ++accepted;
        }
        flush(false);
      }
      manifest.kind_counts[std::string(to_string(kc.kind))] += accepted;
    }
    flush(true);
    written.push_back(out_dir / kManifestFile);
    write_manifest(out_dir, manifest);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
  return manifest;
}

/// Uniform per-kind holdout without replacement; the rest is train.
inline DatasetManifest split_holdout(DatasetManifest manifest, std::span<const InstanceRecord> records,
                                     std::size_t per_kind_count, std::uint64_t seed) {
  std::map<std::string, std::vector<std::string>> by_kind;
  for (const auto& r : records) by_kind[std::string(to_string(r.kind))].push_back(r.id);

  Split split;
  split.seed = seed;
  split.holdout_per_kind = per_kind_count;
  std::size_t held = 0;
  for (auto& [kind, ids] : by_kind) {
    if (per_kind_count > ids.size())
      throw InsufficientInstances("holdout of " + std::to_string(per_kind_count) + " requested for " + kind +
                                  " but only " + std::to_string(ids.size()) + " available");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(*parse_kind(kind)) + 1));
    // Partial shuffle; sorting the chosen ids keeps the manifest canonical.
    for (std::size_t i = 0; i < per_kind_count; ++i) std::swap(ids[i], ids[i + rng.below(ids.size() - i)]);
    std::vector<std::string> chosen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(per_kind_count));
    std::sort(chosen.begin(), chosen.end());
    held += chosen.size();
    split.holdout[kind] = std::move(chosen);
  }
  split.train_count = records.size() - held;
  manifest.split = std::move(split);
  return manifest;
}

/// Train / holdout membership test for a split manifest.
inline bool is_holdout(const DatasetManifest& m, const InstanceRecord& r) {
  if (!m.split) return false;
  const auto it = m.split->holdout.find(std::string(to_string(r.kind)));
  return it != m.split->holdout.end() && std::binary_search(it->second.begin(), it->second.end(), r.id);
}

}  // namespace tracegrid

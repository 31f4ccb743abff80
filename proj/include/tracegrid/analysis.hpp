#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "codec.hpp"
#include "dataset.hpp"
#include "search.hpp"

namespace tracegrid {

inline constexpr std::size_t kDefaultContextLimit = 32'000;

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IdMismatch : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

struct ModelResponse {
  std::string id;
  EncodedSequence tokens;

  std::size_t token_count() const noexcept { return tokens.size(); }
  bool truncated(std::size_t limit) const noexcept { return tokens.size() >= limit; }
};

/// Responses file: one `id<TAB>token string` per line. Blank lines are skipped.
inline std::vector<ModelResponse> parse_responses(std::string_view text) {
  std::vector<ModelResponse> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) throw ParseError(line_no, "expected 'id<TAB>tokens'");
    out.push_back({std::string(line.substr(0, tab)), split_tokens(line.substr(tab + 1))});
  }
  return out;
}

inline std::vector<ModelResponse> read_responses(const fs::path& path) { return parse_responses(read_file(path)); }

inline std::string format_response(const ModelResponse& r) { return r.id + '\t' + join_tokens(r.tokens) + '\n'; }

struct JudgeOptions {
  std::size_t limit = kDefaultContextLimit;
  /// Replay the intermediate region as A* operations and fail illegal traces.
  bool strict_trace = false;
  /// Measure y as all generated tokens instead of tokens before `plan`.
  bool count_total = false;
};

struct ScatterPoint {
  std::string id;
  GeneratorKind kind = GeneratorKind::Wilson;
  std::size_t x = 0;  // ground-truth trace tokens, 5 x difficulty
  std::size_t y = 0;  // generated intermediate tokens
  Verdict verdict;
  bool truncated = false;

  friend bool operator==(const ScatterPoint&, const ScatterPoint&) = default;
};

inline ScatterPoint judge_response(const InstanceRecord& record, const ModelResponse& response,
                                   const JudgeOptions& options = {}) {
  if (record.id != response.id) throw IdMismatch("response " + response.id + " judged against record " + record.id);
  const auto parsed = parse_response(std::span<const std::string>(response.tokens));

  ScatterPoint p;
  p.id = record.id;
  p.kind = record.kind;
  p.x = 5 * record.difficulty;
  p.y = options.count_total ? parsed.total_token_count : parsed.intermediate_token_count;
  p.truncated = response.truncated(options.limit);

  if (p.truncated) {
    p.verdict = Verdict::invalid(InvalidReason::Truncated);
  } else if (!parsed.plan) {
    p.verdict = Verdict::invalid(parsed.failure, parsed.failure_at);
  } else {
    const Grid grid = record_grid(record);
    p.verdict = validate_plan(grid, *parsed.plan);
    if (p.verdict.valid() && options.strict_trace) {
      const auto check = replay_trace(
          grid, std::span<const std::string>(response.tokens).first(parsed.intermediate_token_count));
      if (!check.ok) p.verdict = Verdict::invalid(InvalidReason::IllegalTrace, check.at);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationStats {
  bool defined = false;  // false when n < 2 or a margin is constant
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t n = 0;
  double mean_abs_diff = 0.0;
  double within_10pct = 0.0;  // fraction with |y - x| <= 0.1 x
};

namespace detail {

inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks, ties receive the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

inline CorrelationStats correlate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("correlate: length mismatch");
  CorrelationStats s;
  s.n = x.size();
  if (s.n == 0) return s;
  double diff = 0;
  std::size_t close = 0;
  for (std::size_t i = 0; i < s.n; ++i) {
    diff += std::abs(y[i] - x[i]);
    close += std::abs(y[i] - x[i]) <= 0.1 * x[i];
  }
  s.mean_abs_diff = diff / static_cast<double>(s.n);
  s.within_10pct = static_cast<double>(close) / static_cast<double>(s.n);
  if (s.n < 2) return s;
  const auto r = detail::pearson(x, y);
  if (!r) return s;
  const auto rx = detail::average_ranks(x);
  const auto ry = detail::average_ranks(y);
  s.pearson = *r;
  s.spearman = detail::pearson(rx, ry).value_or(0.0);
  s.defined = true;
  return s;
}

inline CorrelationStats correlate(std::span<const ScatterPoint> points) {
  std::vector<double> x, y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const auto& p : points) {
    x.push_back(static_cast<double>(p.x));
    y.push_back(static_cast<double>(p.y));
  }
  return correlate(x, y);
}

// ---------------------------------------------------------------------------
// Report

struct KindSummary {
  std::size_t count = 0;
  std::size_t valid = 0;
  std::size_t optimal = 0;
  std::size_t truncated = 0;
  CorrelationStats stats;

  double rate(std::size_t k) const { return count ? static_cast<double>(k) / static_cast<double>(count) : 0.0; }
  double valid_rate() const { return rate(valid); }
  double optimal_rate() const { return rate(optimal); }
  double truncation_rate() const { return rate(truncated); }
};

struct AnalysisReport {
  std::map<GeneratorKind, KindSummary> per_kind;
  KindSummary total;
  /// Sorted by kind, then x, then y, then id.
  std::vector<ScatterPoint> scatter;
  /// Records that had no response, sorted.
  std::vector<std::string> missing;
};

inline bool scatter_less(const ScatterPoint& a, const ScatterPoint& b) {
  return std::tie(a.kind, a.x, a.y, a.id) < std::tie(b.kind, b.x, b.y, b.id);
}

inline KindSummary summarize(std::span<const ScatterPoint> points) {
  KindSummary s;
  for (const auto& p : points) {
    ++s.count;
    s.valid += p.verdict.valid();
    s.optimal += p.verdict.optimal();
    s.truncated += p.truncated;
  }
  s.stats = correlate(points);
  return s;
}

inline AnalysisReport build_report(std::span<const InstanceRecord> records, std::span<const ModelResponse> responses,
                                   const JudgeOptions& options = {}) {
  std::unordered_map<std::string, const InstanceRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);

  AnalysisReport report;
  std::unordered_map<std::string, bool> answered;
  for (const auto& resp : responses) {
    const auto it = by_id.find(resp.id);
    if (it == by_id.end()) throw IdMismatch("response for unknown record " + resp.id);
    if (!answered.emplace(resp.id, true).second) throw AnalysisError("duplicate response for record " + resp.id);
    report.scatter.push_back(judge_response(*it->second, resp, options));
  }
  for (const auto& r : records)
    if (!answered.contains(r.id)) report.missing.push_back(r.id);
  std::sort(report.missing.begin(), report.missing.end());
  std::sort(report.scatter.begin(), report.scatter.end(), scatter_less);

  const std::span<const ScatterPoint> all(report.scatter);
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].kind == all[i].kind) ++j;
    report.per_kind[all[i].kind] = summarize(all.subspan(i, j - i));
    i = j;
  }
  report.total = summarize(all);
  return report;
}

inline nlohmann::json to_json(const CorrelationStats& s) {
  nlohmann::json j = {{"defined", s.defined}, {"n", s.n}, {"mean_abs_diff", s.mean_abs_diff},
                      {"within_10pct", s.within_10pct}};
  if (s.defined) {
    j["pearson"] = s.pearson;
    j["spearman"] = s.spearman;
  } else {
    j["pearson"] = nullptr;
    j["spearman"] = nullptr;
  }
  return j;
}

inline nlohmann::json to_json(const KindSummary& s) {
  return {{"count", s.count},
          {"valid", s.valid},
          {"optimal", s.optimal},
          {"truncated", s.truncated},
          {"valid_rate", s.valid_rate()},
          {"optimal_rate", s.optimal_rate()},
          {"truncation_rate", s.truncation_rate()},
          {"correlation", to_json(s.stats)}};
}

inline nlohmann::json to_json(const AnalysisReport& r) {
  nlohmann::json kinds = nlohmann::json::object();
  for (const auto& [k, s] : r.per_kind) kinds[std::string(to_string(k))] = to_json(s);
  return {{"per_kind", kinds}, {"total", to_json(r.total)}, {"missing", r.missing}};
}

inline std::string scatter_csv(const AnalysisReport& report) {
  std::string out = "kind,x,y,verdict,truncated\n";
  for (const auto& p : report.scatter) {
    out += std::string(to_string(p.kind)) + ',' + std::to_string(p.x) + ',' + std::to_string(p.y) + ',' +
           std::string(to_string(p.verdict.kind)) + ',' + (p.truncated ? "true" : "false") + '\n';
  }
  return out;
}

inline void emit_scatter_csv(const AnalysisReport& report, const fs::path& path) {
  const std::string text = scatter_csv(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw AnalysisError("cannot create " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw AnalysisError("write failed for " + path.string());
}

struct CsvRow {
  std::string kind;
  std::size_t x = 0;
  std::size_t y = 0;
  std::string verdict;
  bool truncated = false;
};

inline std::vector<CsvRow> parse_scatter_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line_no == 1) {
      if (line != "kind,x,y,verdict,truncated") throw ParseError(1, "unexpected CSV header");
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t b = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(b, i - b));
        b = i + 1;
      }
    if (f.size() != 5) throw ParseError(line_no, "expected 5 CSV columns");
    const auto x = detail::parse_int(f[1]);
    const auto y = detail::parse_int(f[2]);
    if (!x || !y) throw ParseError(line_no, "bad x/y");
    rows.push_back({std::string(f[0]), static_cast<std::size_t>(*x), static_cast<std::size_t>(*y),
                    std::string(f[3]), f[4] == "true"});
  }
  return rows;
}

}  // namespace tracegrid

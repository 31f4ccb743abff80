#pragma once

#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "analysis.hpp"
#include "codec.hpp"
#include "dataset.hpp"
#include "maze.hpp"
#include "search.hpp"

namespace tracegrid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Coord parse_coord(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("coordinate must look like X,Y: " + text);
  const auto x = detail::parse_int(std::string_view(text).substr(0, comma));
  const auto y = detail::parse_int(std::string_view(text).substr(comma + 1));
  if (!x || !y) throw UsageError("coordinate must look like X,Y: " + text);
  return {*x, *y};
}

inline GeneratorKind kind_or_throw(const std::string& name) {
  const auto k = parse_kind(name);
  if (!k) throw UsageError("unknown kind: " + name);
  return *k;
}

inline std::vector<std::string> kind_names() {
  std::vector<std::string> out;
  for (auto k : kAllKinds) out.emplace_back(to_string(k));
  return out;
}

/// Generation flags shared by generate, solve and dataset.
struct GenFlags {
  int size = kDefaultSize;
  std::uint64_t seed = 0;
  double floor_fraction = 0.45;
  int wall_levels = 4;
  std::size_t min_difficulty = 10;

  void attach(CLI::App& app) {
    app.add_option("--size", size, "Grid width and height")->capture_default_str()->check(CLI::Range(5, 4096));
    app.add_option("--seed", seed, "Master seed")->capture_default_str();
    app.add_option("--floor-fraction", floor_fraction, "Drunkard floor fraction target")->capture_default_str();
    app.add_option("--wall-levels", wall_levels, "Free-space outer wall rings")->capture_default_str();
    app.add_option("--min-difficulty", min_difficulty, "Searchformer minimum A* operation count")
        ->capture_default_str();
  }

  GenConfig config(GeneratorKind kind) const {
    GenConfig cfg;
    cfg.kind = kind;
    cfg.width = cfg.height = size;
    cfg.seed = seed;
    cfg.floor_fraction = floor_fraction;
    cfg.wall_levels = wall_levels;
    cfg.min_difficulty = min_difficulty;
    return cfg;
  }
};

struct JudgeFlags {
  std::string dataset;
  std::string responses;
  std::size_t limit = kDefaultContextLimit;
  bool strict_trace = false;
  bool count_total = false;

  void attach(CLI::App& app) {
    app.add_option("--dataset", dataset, "Dataset directory (manifest.json + shards)")->required();
    app.add_option("--responses", responses, "Responses file: id<TAB>tokens per line")->required();
    app.add_option("--limit", limit, "Context limit; responses this long count as truncated")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_flag("--strict-trace", strict_trace, "Replay pre-plan tokens as A* operations");
    app.add_flag("--count-total", count_total, "Count all generated tokens instead of pre-plan tokens");
  }

  JudgeOptions options() const { return {limit, strict_trace, count_total}; }
};

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DatasetError("cannot create " + path);
  f << text;
  if (!f) throw DatasetError("write failed for " + path);
}

/// Entry point for the `tracegrid` tool. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Traced A* grid pathfinding: generate, solve, build datasets, judge model responses"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // generate
  auto* generate = app.add_subcommand("generate", "Generate problem instances as record lines");
  GenFlags gen_flags;
  std::string gen_kind;
  std::size_t gen_count = 1;
  std::string gen_out;
  generate->add_option("--kind", gen_kind, "Generator kind")->required()->check(CLI::IsMember(kind_names()));
  generate->add_option("--count", gen_count, "Number of instances")->capture_default_str()->check(CLI::PositiveNumber);
  generate->add_option("--out", gen_out, "Output file (default stdout)");
  gen_flags.attach(*generate);

  // solve
  auto* solve = app.add_subcommand("solve", "Print the A* trace and plan for one problem");
  GenFlags solve_flags;
  std::string solve_kind = "freespace";
  std::string solve_start, solve_goal, problem_file;
  bool show_problem = false;
  auto* kind_opt = solve->add_option("--kind", solve_kind, "Generator kind for the layout")
                       ->capture_default_str()
                       ->check(CLI::IsMember(kind_names()));
  auto* start_opt = solve->add_option("--start", solve_start, "Start cell X,Y");
  auto* goal_opt = solve->add_option("--goal", solve_goal, "Goal cell X,Y");
  start_opt->needs(goal_opt);
  goal_opt->needs(start_opt);
  auto* problem_opt = solve->add_option("--problem-file", problem_file, "File holding one problem token line");
  problem_opt->excludes(kind_opt)->excludes(start_opt)->excludes(goal_opt);
  solve->add_flag("--show-problem", show_problem, "Also print the problem line first");
  solve_flags.attach(*solve);

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Build a sharded dataset with manifest");
  GenFlags ds_flags;
  std::vector<std::string> ds_kinds;
  std::size_t ds_count = 0;
  std::string ds_out;
  std::size_t shard_size = 50'000;
  unsigned workers = 0;
  std::optional<std::size_t> ds_holdout;
  dataset->add_option("--kind", ds_kinds, "Generator kind (repeat for a mix)")
      ->required()
      ->check(CLI::IsMember(kind_names()));
  dataset->add_option("--count", ds_count, "Instances per kind")->required()->check(CLI::PositiveNumber);
  dataset->add_option("--out", ds_out, "Output directory")->required();
  dataset->add_option("--shard-size", shard_size, "Records per shard")->capture_default_str()->check(CLI::PositiveNumber);
  dataset->add_option("--workers", workers, "Worker threads (default: $TRACEGRID_WORKERS or all cores)");
  dataset->add_option("--holdout-per-kind", ds_holdout, "Also split this many held-out records per kind");
  ds_flags.attach(*dataset);

  // split
  auto* split = app.add_subcommand("split", "Assign held-out records per kind in an existing dataset");
  std::string split_dir;
  std::size_t split_count = 0;
  std::uint64_t split_seed = 0;
  split->add_option("--dataset", split_dir, "Dataset directory")->required();
  split->add_option("--holdout-per-kind", split_count, "Held-out records per kind")->required();
  split->add_option("--seed", split_seed, "Split seed")->capture_default_str();

  // judge
  auto* judge = app.add_subcommand("judge", "Judge each response; one JSON object per line");
  JudgeFlags judge_flags;
  std::string judge_out;
  judge_flags.attach(*judge);
  judge->add_option("--out", judge_out, "Output file (default stdout)");

  // report
  auto* report = app.add_subcommand("report", "Aggregate judgments into a JSON report and scatter CSV");
  JudgeFlags report_flags;
  std::string report_out, csv_path;
  report_flags.attach(*report);
  report->add_option("--out", report_out, "Report JSON file (default stdout)");
  report->add_option("--csv", csv_path, "Scatter CSV output");

  // vocab
  auto* vocab = app.add_subcommand("vocab", "Export the token vocabulary as token<TAB>id lines");
  int vocab_size = kDefaultSize;
  std::optional<int> max_cost;
  int extra_specials = 0;
  std::string vocab_out;
  vocab->add_option("--size", vocab_size, "Grid width and height")->capture_default_str()->check(CLI::Range(1, 4096));
  vocab->add_option("--max-cost", max_cost, "Largest cost token (default size*size)");
  vocab->add_option("--extra-specials", extra_specials, "Additional reserved special tokens")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  vocab->add_option("--out", vocab_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (generate->parsed()) {
      const auto kind = kind_or_throw(gen_kind);
      gen_flags.config(kind).validate();
      DedupeSet seen;
      std::string text;
      for (std::size_t i = 0; i < gen_count; ++i) {
        GenConfig cfg = gen_flags.config(kind);
        cfg.seed = instance_seed(gen_flags.seed, kind, i);
        text += to_line(make_record(generate_instance(cfg, &seen))) + '\n';
      }
      write_text(gen_out, text, out);
    } else if (solve->parsed()) {
      std::optional<Grid> grid;
      if (!problem_file.empty()) {
        grid = decode_problem(split_tokens(read_file(problem_file)), solve_flags.size, solve_flags.size);
      } else {
        const auto kind = kind_or_throw(solve_kind);
        GenConfig cfg = solve_flags.config(kind);
        cfg.validate();
        if (!solve_start.empty()) {
          if (kind == GeneratorKind::SearchformerStyle)
            throw UsageError("--start/--goal cannot be combined with --kind searchformer");
          grid = Grid(generate_layout(cfg), parse_coord(solve_start), parse_coord(solve_goal));
        } else {
          grid = generate_instance(cfg).grid;
        }
      }
      const SearchResult result = astar_trace(*grid);
      if (show_problem) out << join_tokens(encode_problem(*grid)) << '\n';
      out << join_tokens(encode_trace(result.trace)) << '\n';
      if (!result.solved()) {
        err << "unsolvable: open list exhausted after " << result.difficulty() << " operations\n";
        return kExitDomain;
      }
      out << join_tokens(encode_plan(*result.plan)) << '\n';
    } else if (dataset->parsed()) {
      DatasetConfig cfg;
      for (const auto& k : ds_kinds) cfg.mix.push_back({kind_or_throw(k), ds_count});
      cfg.master_seed = ds_flags.seed;
      cfg.shard_size = shard_size;
      cfg.params = ds_flags.config(GeneratorKind::Wilson);
      auto manifest = build_dataset(cfg, ds_out, workers ? std::optional(workers) : std::nullopt);
      if (ds_holdout) {
        const auto records = load_records(ds_out, manifest);
        manifest = split_holdout(std::move(manifest), records, *ds_holdout, ds_flags.seed);
        write_manifest(ds_out, manifest);
      }
      err << "wrote " << manifest.total_records() << " records in " << manifest.shards.size() << " shard(s) to "
          << ds_out << '\n';
      out << manifest_digest(manifest) << '\n';
    } else if (split->parsed()) {
      auto manifest = read_manifest(split_dir);
      const auto records = load_records(split_dir, manifest);
      manifest = split_holdout(std::move(manifest), records, split_count, split_seed);
      write_manifest(split_dir, manifest);
      err << "held out " << split_count << " per kind; train " << manifest.split->train_count << '\n';
      out << manifest_digest(manifest) << '\n';
    } else if (judge->parsed()) {
      const auto manifest = read_manifest(judge_flags.dataset);
      const auto records = load_records(judge_flags.dataset, manifest);
      std::unordered_map<std::string, const InstanceRecord*> by_id;
      for (const auto& r : records) by_id.emplace(r.id, &r);
      std::string text;
      for (const auto& resp : read_responses(judge_flags.responses)) {
        const auto it = by_id.find(resp.id);
        if (it == by_id.end()) throw IdMismatch("response for unknown record " + resp.id);
        const auto p = judge_response(*it->second, resp, judge_flags.options());
        const nlohmann::json j = {{"id", p.id},
                                  {"kind", std::string(to_string(p.kind))},
                                  {"x", p.x},
                                  {"y", p.y},
                                  {"verdict", std::string(to_string(p.verdict.kind))},
                                  {"reason", std::string(to_string(p.verdict.reason))},
                                  {"truncated", p.truncated}};
        text += j.dump() + '\n';
      }
      write_text(judge_out, text, out);
    } else if (report->parsed()) {
      const auto manifest = read_manifest(report_flags.dataset);
      const auto records = load_records(report_flags.dataset, manifest);
      const auto responses = read_responses(report_flags.responses);
      const auto result = build_report(records, responses, report_flags.options());
      auto j = to_json(result);
      j["limit"] = report_flags.limit;
      j["y_measure"] = report_flags.count_total ? "total_tokens" : "pre_plan_tokens";
      const std::string body = j.dump(2) + '\n';
      if (!csv_path.empty()) emit_scatter_csv(result, csv_path);
      write_text(report_out, body, out);
      err << "judged " << result.total.count << " responses; valid rate " << result.total.valid_rate() << '\n';
    } else if (vocab->parsed()) {
      const auto v = build_vocab(vocab_size, vocab_size, max_cost, extra_specials);
      write_text(vocab_out, v.export_table(), out);
      err << "vocabulary size " << v.size() << '\n';
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace tracegrid::cli

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include <tracegrid/codec.hpp>
#include <tracegrid/maze.hpp>

#include "golden.hpp"
#include "support.hpp"

using namespace tracegrid;

namespace {

GenConfig config(GeneratorKind kind, int size, std::uint64_t seed) {
  GenConfig cfg;
  cfg.kind = kind;
  cfg.width = cfg.height = size;
  cfg.seed = seed;
  return cfg;
}

std::vector<Layout> enumerate_two_by_two_trees() {
  // Brute force over the four possible passages of a 2x2 node lattice.
  const std::array<Coord, 4> passages{{{2, 1}, {1, 2}, {3, 2}, {2, 3}}};
  std::vector<Layout> trees;
  for (unsigned mask = 0; mask < 16; ++mask) {
    Layout l(5, 5, Cell::Wall);
    for (auto c : {Coord{1, 1}, Coord{3, 1}, Coord{1, 3}, Coord{3, 3}}) l.set(c, Cell::Free);
    for (int i = 0; i < 4; ++i)
      if (mask & (1u << i)) l.set(passages[i], Cell::Free);
    if (support::is_spanning_tree(l)) trees.push_back(l);
  }
  return trees;
}

}  // namespace

TEST(NodeLattice, Embedding) {
  const auto shape = NodeLattice::for_grid(30, 30);
  EXPECT_EQ(shape.cols(), 14);
  EXPECT_EQ(shape.rows(), 14);
  NodeLattice lat(2, 1);
  lat.connect(0, 1);
  EXPECT_TRUE(lat.connected(1, 0));
  const auto l = lat.render(5, 3);
  EXPECT_TRUE(l.is_free({1, 1}) && l.is_free({2, 1}) && l.is_free({3, 1}));
  EXPECT_EQ(l.free_count(), 3u);
  NodeLattice column(1, 3);
  column.connect(0, 1);  // vertical even though ids are consecutive
  EXPECT_TRUE(column.render(3, 7).is_free({1, 2}));
}

TEST(Generators, AcyclicKindsAreSpanningTrees) {
  for (auto kind : {GeneratorKind::Wilson, GeneratorKind::Kruskal, GeneratorKind::DfsBacktracker}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      for (int size : {5, 10, 30, 31}) {
        const auto l = generate_layout(config(kind, size, seed));
        ASSERT_TRUE(support::is_spanning_tree(l)) << to_string(kind) << " seed " << seed << " size " << size;
        const auto shape = NodeLattice::for_grid(size, size);
        EXPECT_TRUE(l.is_free({1, 1}));
        EXPECT_GE(l.free_count(), shape.count());
      }
    }
  }
}

TEST(Generators, FixedSeedIsDeterministic) {
  for (auto kind : kAllKinds) {
    if (kind == GeneratorKind::SearchformerStyle) {
      const auto a = gen_searchformer(config(kind, 30, 99));
      const auto b = gen_searchformer(config(kind, 30, 99));
      EXPECT_EQ(a.grid, b.grid);
      continue;
    }
    EXPECT_EQ(generate_layout(config(kind, 30, 99)), generate_layout(config(kind, 30, 99))) << to_string(kind);
  }
}

TEST(Wilson, UniformOnTwoByTwoLattice) {
  const auto trees = enumerate_two_by_two_trees();
  ASSERT_EQ(trees.size(), 4u);
  std::array<int, 4> counts{};
  constexpr int kSamples = 10'000;
  for (int s = 0; s < kSamples; ++s) {
    Rng rng(derive_seed(12345, 0, static_cast<std::uint64_t>(s)));
    const auto l = gen_wilson(config(GeneratorKind::Wilson, 5, 0), rng);
    const auto it = std::find(trees.begin(), trees.end(), l);
    ASSERT_NE(it, trees.end());
    ++counts[static_cast<std::size_t>(it - trees.begin())];
  }
  for (int c : counts) {
    const double freq = static_cast<double>(c) / kSamples;
    EXPECT_NEAR(freq, 0.25, 0.02);
  }
}

TEST(Kruskal, DistinctSeedsGiveDistinctGrids) {
  std::set<std::vector<Cell>> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    EXPECT_TRUE(seen.insert(generate_layout(config(GeneratorKind::Kruskal, 30, seed)).cells()).second);
}

TEST(Dfs, FewerJunctionsThanWilson) {
  double dfs = 0, wilson = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    dfs += static_cast<double>(support::free_graph(generate_layout(config(GeneratorKind::DfsBacktracker, 30, seed))).junctions);
    wilson += static_cast<double>(support::free_graph(generate_layout(config(GeneratorKind::Wilson, 30, seed))).junctions);
  }
  EXPECT_LT(dfs / 100, wilson / 100);
}

TEST(Drunkard, StoppingRuleAndConnectivity) {
  bool any_cycle = false;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cfg = config(GeneratorKind::Drunkard, 30, seed);
    const auto l = generate_layout(cfg);
    EXPECT_EQ(cfg.floor_target(), 405u);
    EXPECT_EQ(l.free_count(), 405u);  // each step carves at most one cell
    EXPECT_TRUE(support::connected(l));
    for (int i = 0; i < 30; ++i)
      EXPECT_TRUE(!l.is_free({i, 0}) && !l.is_free({0, i}) && !l.is_free({i, 29}) && !l.is_free({29, i}));
    any_cycle = any_cycle || support::has_cycle(l);
  }
  EXPECT_TRUE(any_cycle);
}

TEST(Drunkard, RejectsUnreachableTarget) {
  auto cfg = config(GeneratorKind::Drunkard, 5, 1);
  cfg.floor_fraction = 0.5;  // 13 cells, only 9 interior
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.floor_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Searchformer, AcceptedInstancesSatisfyConstraints) {
  DedupeSet seen;
  bool any_cycle = false;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = gen_searchformer(config(GeneratorKind::SearchformerStyle, 30, seed), &seen);
    const double frac = static_cast<double>(inst.grid.layout().wall_count()) / 900.0;
    EXPECT_GE(frac, 0.30);
    EXPECT_LE(frac, 0.50);
    EXPECT_TRUE(bfs_shortest_len(inst.grid).has_value());
    EXPECT_GE(inst.search.difficulty(), 10u);
    any_cycle = any_cycle || support::has_cycle(inst.grid.layout());
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_TRUE(any_cycle);
}

TEST(Searchformer, DuplicatesAreResampled) {
  // Re-running the same seed against a populated dedupe set must not return
  // the instance already seen.
  DedupeSet seen;
  const auto cfg = config(GeneratorKind::SearchformerStyle, 6, 3);
  const auto first = gen_searchformer(cfg, &seen);
  const auto second = gen_searchformer(cfg, &seen);
  EXPECT_NE(dedupe_key(first.grid), dedupe_key(second.grid));
}

TEST(Searchformer, VacuousThresholdAcceptsFirstSolvable) {
  auto cfg = config(GeneratorKind::SearchformerStyle, 10, 5);
  cfg.min_difficulty = 1;
  cfg.max_attempts = 1;
  // With one attempt allowed, success means the first solvable draw was taken
  // or the budget error surfaces; both are deterministic for a fixed seed.
  std::size_t accepted = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    try {
      const auto inst = gen_searchformer(cfg);
      ++accepted;
      EXPECT_TRUE(inst.search.solved());
    } catch (const GenerationError&) {
    }
  }
  EXPECT_GT(accepted, 0u);
}

TEST(Searchformer, BudgetExceeded) {
  auto cfg = config(GeneratorKind::SearchformerStyle, 5, 1);
  cfg.min_difficulty = 1'000;  // impossible on 5x5
  cfg.max_attempts = 20;
  EXPECT_THROW(gen_searchformer(cfg), GenerationError);
}

TEST(FreeSpace, RingArithmetic) {
  auto cfg = config(GeneratorKind::FreeSpace, 30, 0);
  const auto l = gen_freespace(cfg);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x)
      EXPECT_EQ(l.is_free({x, y}), std::min({x, y, 29 - x, 29 - y}) >= 4);
  EXPECT_EQ(l.free_count(), 22u * 22u);

  cfg.width = cfg.height = 5;
  cfg.wall_levels = 1;
  EXPECT_EQ(gen_freespace(cfg).free_count(), 9u);
  cfg.wall_levels = 2;
  EXPECT_THROW(gen_freespace(cfg), ConfigError);
}

TEST(FreeSpace, ProblemStartsWithColumnZeroWalls) {
  const auto text = join_tokens(encode_problem(golden::grid()));
  EXPECT_EQ(text.substr(0, golden::kProblemPrefix.size()), golden::kProblemPrefix);
}

TEST(SampleEndpoints, ForcedPair) {
  Layout l(5, 5, Cell::Wall);
  l.set({1, 1}, Cell::Free);
  l.set({3, 3}, Cell::Free);
  const auto g = sample_endpoints(l, 42);
  const std::set<Coord> got{g.start(), g.goal()};
  EXPECT_EQ(got, (std::set<Coord>{{1, 1}, {3, 3}}));
  l.set({3, 3}, Cell::Wall);
  EXPECT_THROW(sample_endpoints(l, 42), GenerationError);
}

TEST(SampleEndpoints, UniformStartWithinThreeSigma) {
  auto cfg = config(GeneratorKind::FreeSpace, 5, 0);
  cfg.wall_levels = 1;
  const auto layout = gen_freespace(cfg);
  constexpr int kDraws = 10'000;
  std::map<Coord, int> counts;
  for (int i = 0; i < kDraws; ++i) {
    const auto g = sample_endpoints(layout, derive_seed(7, 0, static_cast<std::uint64_t>(i)));
    EXPECT_NE(g.start(), g.goal());
    ++counts[g.start()];
  }
  ASSERT_EQ(counts.size(), 9u);
  const double p = 1.0 / 9.0;
  const double mean = kDraws * p, sigma = std::sqrt(kDraws * p * (1 - p));
  for (const auto& [c, n] : counts) EXPECT_LE(std::abs(n - mean), 3 * sigma) << to_string(c);
  EXPECT_EQ(sample_endpoints(layout, 5), sample_endpoints(layout, 5));
}

TEST(GenerateInstance, GoldenFreeSpace) {
  const auto inst = make_instance(config(GeneratorKind::FreeSpace, 30, 0), golden::kStart, golden::kGoal);
  EXPECT_EQ(inst.search.difficulty(), 25u);
  EXPECT_EQ(inst.search.plan->size(), 5u);
}

TEST(GenerateInstance, SelfValidatesForEveryKind) {
  for (auto kind : kAllKinds)
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto inst = generate_instance(config(kind, 30, seed));
      ASSERT_TRUE(inst.search.solved()) << to_string(kind);
      EXPECT_EQ(validate_plan(inst.grid, *inst.search.plan).kind, Verdict::Kind::ValidOptimal);
      // Every plan cell is expanded before the goal under a consistent heuristic.
      EXPECT_GE(inst.search.difficulty(), inst.search.plan->size());
    }
}

TEST(GenerateInstance, FreeSpaceDifficultyDependsOnlyOnEndpoints) {
  const auto a = make_instance(config(GeneratorKind::FreeSpace, 30, 1), {5, 6}, {20, 25});
  const auto b = make_instance(config(GeneratorKind::FreeSpace, 30, 999), {5, 6}, {20, 25});
  EXPECT_EQ(a.search.trace, b.search.trace);
}

TEST(GenConfig, Validation) {
  EXPECT_THROW(config(GeneratorKind::Wilson, 4, 0).validate(), ConfigError);
  auto sf = config(GeneratorKind::SearchformerStyle, 10, 0);
  sf.wall_fraction_min = 0.6;
  EXPECT_THROW(sf.validate(), ConfigError);
  Rng rng(1);
  EXPECT_THROW(gen_wilson(config(GeneratorKind::Kruskal, 10, 0), rng), ConfigError);
  EXPECT_EQ(parse_kind("dfs"), GeneratorKind::DfsBacktracker);
  EXPECT_FALSE(parse_kind("prim").has_value());
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "grid.hpp"
#include "rng.hpp"
#include "search.hpp"

namespace tracegrid {

enum class GeneratorKind : std::uint8_t {
  Wilson,
  Kruskal,
  DfsBacktracker,
  Drunkard,
  SearchformerStyle,
  FreeSpace,
};

inline constexpr std::array<GeneratorKind, 6> kAllKinds{
    GeneratorKind::Wilson,   GeneratorKind::Kruskal,           GeneratorKind::DfsBacktracker,
    GeneratorKind::Drunkard, GeneratorKind::SearchformerStyle, GeneratorKind::FreeSpace,
};

constexpr std::string_view to_string(GeneratorKind k) noexcept {
  switch (k) {
    case GeneratorKind::Wilson: return "wilson";
    case GeneratorKind::Kruskal: return "kruskal";
    case GeneratorKind::DfsBacktracker: return "dfs";
    case GeneratorKind::Drunkard: return "drunkard";
    case GeneratorKind::SearchformerStyle: return "searchformer";
    case GeneratorKind::FreeSpace: return "freespace";
  }
  return "unknown";
}

inline std::optional<GeneratorKind> parse_kind(std::string_view name) noexcept {
  for (auto k : kAllKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

constexpr bool is_acyclic(GeneratorKind k) noexcept {
  return k == GeneratorKind::Wilson || k == GeneratorKind::Kruskal ||
         k == GeneratorKind::DfsBacktracker;
}

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GenConfig {
  GeneratorKind kind = GeneratorKind::Wilson;
  int width = kDefaultSize;
  int height = kDefaultSize;
  std::uint64_t seed = 0;

  double floor_fraction = 0.45;               // Drunkard
  double wall_fraction_min = 0.30;            // SearchformerStyle
  double wall_fraction_max = 0.50;            // SearchformerStyle
  std::size_t min_difficulty = 10;            // SearchformerStyle
  std::size_t max_attempts = 10'000;          // SearchformerStyle, per instance
  int wall_levels = 4;                        // FreeSpace

  /// Throws ConfigError on the first violated constraint.
  void validate() const {
    if (width < 5 || height < 5) throw ConfigError("grid dimensions must be at least 5");
    switch (kind) {
      case GeneratorKind::Drunkard: {
        if (!(floor_fraction > 0.0 && floor_fraction < 1.0))
          throw ConfigError("floor_fraction must lie in (0, 1)");
        const auto interior = static_cast<std::size_t>(width - 2) * static_cast<std::size_t>(height - 2);
        if (floor_target() > interior)
          throw ConfigError("floor_fraction target exceeds the carveable interior");
        break;
      }
      case GeneratorKind::SearchformerStyle:
        if (!(wall_fraction_min >= 0.0 && wall_fraction_max <= 1.0 &&
              wall_fraction_min <= wall_fraction_max))
          throw ConfigError("wall fraction bounds must satisfy 0 <= min <= max <= 1");
        if (max_attempts == 0) throw ConfigError("max_attempts must be positive");
        break;
      case GeneratorKind::FreeSpace:
        if (wall_levels < 1) throw ConfigError("wall_levels must be at least 1");
        if (width - 2 * wall_levels < 2 || height - 2 * wall_levels < 2)
          throw ConfigError("wall_levels leaves less than a 2x2 inner grid");
        break;
      default:
        break;
    }
  }

  std::size_t floor_target() const {
    return static_cast<std::size_t>(
        std::ceil(floor_fraction * static_cast<double>(width) * static_cast<double>(height) - 1e-9));
  }
};

// ---------------------------------------------------------------------------
// Node lattice shared by the spanning-tree generators.
//
// Node (i, j) sits on grid cell (2i+1, 2j+1). A passage between two adjacent
// nodes carves the cell between them. Everything else stays Wall.

class NodeLattice {
 public:
  NodeLattice(int cols, int rows) : cols_(cols), rows_(rows), right_(count(), false), down_(count(), false) {
    if (cols < 1 || rows < 1) throw ConfigError("node lattice needs at least one node");
  }

  static NodeLattice for_grid(int width, int height) {
    return NodeLattice((width - 1) / 2, (height - 1) / 2);
  }

  int cols() const noexcept { return cols_; }
  int rows() const noexcept { return rows_; }
  std::size_t count() const noexcept { return static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_); }
  std::size_t id(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(i);
  }
  std::pair<int, int> node(std::size_t id) const noexcept {
    return {static_cast<int>(id % static_cast<std::size_t>(cols_)), static_cast<int>(id / static_cast<std::size_t>(cols_))};
  }

  /// Lattice neighbours in the fixed left, right, up, down order.
  std::vector<std::size_t> neighbors(std::size_t id) const {
    const auto [i, j] = node(id);
    std::vector<std::size_t> out;
    out.reserve(4);
    if (i > 0) out.push_back(this->id(i - 1, j));
    if (i + 1 < cols_) out.push_back(this->id(i + 1, j));
    if (j > 0) out.push_back(this->id(i, j - 1));
    if (j + 1 < rows_) out.push_back(this->id(i, j + 1));
    return out;
  }

  /// All candidate edges (a < b) in row-major order.
  std::vector<std::pair<std::size_t, std::size_t>> all_edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (int j = 0; j < rows_; ++j)
      for (int i = 0; i < cols_; ++i) {
        if (i + 1 < cols_) out.emplace_back(id(i, j), id(i + 1, j));
        if (j + 1 < rows_) out.emplace_back(id(i, j), id(i, j + 1));
      }
    return out;
  }

  void connect(std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    if (horizontal(a, b)) right_[a] = true;
    else if (b == a + static_cast<std::size_t>(cols_)) down_[a] = true;
    else throw std::logic_error("nodes are not lattice neighbours");
  }

  bool connected(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    if (horizontal(a, b)) return right_[a];
    if (b == a + static_cast<std::size_t>(cols_)) return down_[a];
    return false;
  }

  std::size_t edge_count() const noexcept {
    return static_cast<std::size_t>(std::count(right_.begin(), right_.end(), true) +
                                    std::count(down_.begin(), down_.end(), true));
  }

  Layout render(int width, int height) const {
    Layout layout(width, height, Cell::Wall);
    for (int j = 0; j < rows_; ++j)
      for (int i = 0; i < cols_; ++i) {
        const auto a = id(i, j);
        layout.set({2 * i + 1, 2 * j + 1}, Cell::Free);
        if (right_[a]) layout.set({2 * i + 2, 2 * j + 1}, Cell::Free);
        if (down_[a]) layout.set({2 * i + 1, 2 * j + 2}, Cell::Free);
      }
    return layout;
  }

 private:
  bool horizontal(std::size_t a, std::size_t b) const noexcept {
    return b == a + 1 && node(a).second == node(b).second;
  }

  int cols_;
  int rows_;
  std::vector<bool> right_;
  std::vector<bool> down_;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

inline void require_kind(const GenConfig& cfg, GeneratorKind kind) {
  if (cfg.kind != kind) throw ConfigError("generator called with mismatched kind");
  cfg.validate();
}

}  // namespace detail

/// Uniform spanning tree by Wilson's loop-erased random walks.
inline NodeLattice wilson_tree(int cols, int rows, Rng& rng) {
  NodeLattice lattice(cols, rows);
  const std::size_t n = lattice.count();
  std::vector<bool> in_tree(n, false);
  std::vector<std::size_t> next(n, 0);
  in_tree[rng.below(n)] = true;

  for (std::size_t origin = 0; origin < n; ++origin) {
    if (in_tree[origin]) continue;
    // Random walk until the tree is hit; overwriting `next` erases loops.
    for (auto u = origin; !in_tree[u]; u = next[u]) {
      const auto nb = lattice.neighbors(u);
      next[u] = nb[rng.below(nb.size())];
    }
    for (auto u = origin; !in_tree[u]; u = next[u]) {
      in_tree[u] = true;
      lattice.connect(u, next[u]);
    }
  }
  return lattice;
}

inline NodeLattice kruskal_tree(int cols, int rows, Rng& rng) {
  NodeLattice lattice(cols, rows);
  auto edges = lattice.all_edges();
  rng.shuffle(std::span(edges));
  detail::DisjointSets sets(lattice.count());
  for (auto [a, b] : edges)
    if (sets.unite(a, b)) lattice.connect(a, b);
  return lattice;
}

/// Recursive backtracker, iterative form.
inline NodeLattice dfs_tree(int cols, int rows, Rng& rng) {
  NodeLattice lattice(cols, rows);
  std::vector<bool> visited(lattice.count(), false);
  std::vector<std::size_t> stack{static_cast<std::size_t>(rng.below(lattice.count()))};
  visited[stack.back()] = true;
  while (!stack.empty()) {
    const auto u = stack.back();
    std::vector<std::size_t> fresh;
    for (auto v : lattice.neighbors(u))
      if (!visited[v]) fresh.push_back(v);
    if (fresh.empty()) {
      stack.pop_back();
      continue;
    }
    const auto v = fresh[rng.below(fresh.size())];
    lattice.connect(u, v);
    visited[v] = true;
    stack.push_back(v);
  }
  return lattice;
}

inline Layout gen_wilson(const GenConfig& cfg, Rng& rng) {
  detail::require_kind(cfg, GeneratorKind::Wilson);
  const auto shape = NodeLattice::for_grid(cfg.width, cfg.height);
  return wilson_tree(shape.cols(), shape.rows(), rng).render(cfg.width, cfg.height);
}

inline Layout gen_kruskal(const GenConfig& cfg, Rng& rng) {
  detail::require_kind(cfg, GeneratorKind::Kruskal);
  const auto shape = NodeLattice::for_grid(cfg.width, cfg.height);
  return kruskal_tree(shape.cols(), shape.rows(), rng).render(cfg.width, cfg.height);
}

inline Layout gen_dfs_backtracker(const GenConfig& cfg, Rng& rng) {
  detail::require_kind(cfg, GeneratorKind::DfsBacktracker);
  const auto shape = NodeLattice::for_grid(cfg.width, cfg.height);
  return dfs_tree(shape.cols(), shape.rows(), rng).render(cfg.width, cfg.height);
}

/// Drunkard's walk cave. The walk stays inside the border ring and carves
/// every cell it visits until the floor target is reached.
inline Layout gen_drunkard(const GenConfig& cfg, Rng& rng) {
  detail::require_kind(cfg, GeneratorKind::Drunkard);
  Layout layout(cfg.width, cfg.height, Cell::Wall);
  const std::size_t target = cfg.floor_target();
  Coord pos{rng.between(1, cfg.width - 2), rng.between(1, cfg.height - 2)};
  layout.set(pos, Cell::Free);
  std::size_t floor = 1;
  while (floor < target) {
    const auto d = kStepOrder[rng.below(4)];
    const Coord n{pos.x + d.x, pos.y + d.y};
    if (n.x < 1 || n.y < 1 || n.x > cfg.width - 2 || n.y > cfg.height - 2) continue;
    pos = n;
    if (layout.at(pos) == Cell::Wall) {
      layout.set(pos, Cell::Free);
      ++floor;
    }
  }
  return layout;
}

/// Outer `wall_levels` rings are Wall, the interior is Free.
inline Layout gen_freespace(const GenConfig& cfg) {
  detail::require_kind(cfg, GeneratorKind::FreeSpace);
  Layout layout(cfg.width, cfg.height, Cell::Wall);
  for (int y = cfg.wall_levels; y < cfg.height - cfg.wall_levels; ++y)
    for (int x = cfg.wall_levels; x < cfg.width - cfg.wall_levels; ++x) layout.set({x, y}, Cell::Free);
  return layout;
}

/// Draws start and goal uniformly without replacement from the free cells.
inline Grid sample_endpoints(Layout layout, Rng& rng) {
  const auto free = layout.free_cells();
  if (free.size() < 2) throw GenerationError("too few free cells to place start and goal");
  const auto a = rng.below(free.size());
  auto b = rng.below(free.size() - 1);
  if (b >= a) ++b;
  return Grid(std::move(layout), free[a], free[b]);
}

inline Grid sample_endpoints(Layout layout, std::uint64_t seed) {
  Rng rng(seed);
  return sample_endpoints(std::move(layout), rng);
}

/// Canonical key identifying a problem: walls, start and goal.
inline std::string dedupe_key(const Grid& grid) {
  std::string key;
  key.reserve(grid.layout().size() + 16);
  for (auto c : grid.layout().cells()) key.push_back(c == Cell::Wall ? '#' : '.');
  key += '|' + std::to_string(grid.width()) + 'x' + std::to_string(grid.height());
  key += '|' + std::to_string(grid.start().x) + ',' + std::to_string(grid.start().y);
  key += '|' + std::to_string(grid.goal().x) + ',' + std::to_string(grid.goal().y);
  return key;
}

using DedupeSet = std::unordered_set<std::string>;

struct ProblemInstance {
  Grid grid;
  SearchResult search;
  GeneratorKind kind = GeneratorKind::Wilson;
  std::uint64_t seed = 0;
};

/// Searchformer-style rejection sampling: random wall fraction, random walls,
/// random endpoints; rejects unsolvable, too-easy and (when `seen` is given)
/// duplicate instances. Accepted keys are inserted into `seen`.
inline ProblemInstance gen_searchformer(const GenConfig& cfg, DedupeSet* seen = nullptr) {
  detail::require_kind(cfg, GeneratorKind::SearchformerStyle);
  Rng rng(derive_seed(cfg.seed, 0));
  const std::size_t cells = static_cast<std::size_t>(cfg.width) * static_cast<std::size_t>(cfg.height);
  const auto n = static_cast<double>(cells);
  const auto lo = static_cast<std::size_t>(std::ceil(cfg.wall_fraction_min * n - 1e-9));
  const auto hi = static_cast<std::size_t>(std::floor(cfg.wall_fraction_max * n + 1e-9));

  std::vector<std::size_t> order(cells);
  for (std::size_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const double p = rng.uniform(cfg.wall_fraction_min, cfg.wall_fraction_max);
    const auto walls = std::clamp(static_cast<std::size_t>(std::floor(p * n + 1e-9)), lo, hi);
    if (cells - walls < 2) continue;

    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `walls` entries are a uniform subset.
    for (std::size_t i = 0; i < walls; ++i) std::swap(order[i], order[i + rng.below(cells - i)]);
    Layout layout(cfg.width, cfg.height, Cell::Free);
    for (std::size_t i = 0; i < walls; ++i) layout.set(layout.coord(order[i]), Cell::Wall);

    Grid grid = sample_endpoints(std::move(layout), rng);
    SearchResult search = astar_trace(grid);
    if (!search.solved() || search.difficulty() < cfg.min_difficulty) continue;
    if (seen != nullptr && !seen->insert(dedupe_key(grid)).second) continue;
    return {std::move(grid), std::move(search), cfg.kind, cfg.seed};
  }
  throw GenerationError("rejection budget exceeded after " + std::to_string(cfg.max_attempts) +
                        " attempts");
}

/// Generator layout for every kind except SearchformerStyle.
inline Layout generate_layout(const GenConfig& cfg, Rng& rng) {
  switch (cfg.kind) {
    case GeneratorKind::Wilson: return gen_wilson(cfg, rng);
    case GeneratorKind::Kruskal: return gen_kruskal(cfg, rng);
    case GeneratorKind::DfsBacktracker: return gen_dfs_backtracker(cfg, rng);
    case GeneratorKind::Drunkard: return gen_drunkard(cfg, rng);
    case GeneratorKind::FreeSpace: return gen_freespace(cfg);
    case GeneratorKind::SearchformerStyle: break;
  }
  throw ConfigError("searchformer generation samples its own endpoints");
}

inline Layout generate_layout(const GenConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0));
  return generate_layout(cfg, rng);
}

/// Generator + endpoint sampling + traced A*.
inline ProblemInstance generate_instance(const GenConfig& cfg, DedupeSet* seen = nullptr) {
  cfg.validate();
  if (cfg.kind == GeneratorKind::SearchformerStyle) return gen_searchformer(cfg, seen);
  Grid grid = sample_endpoints(generate_layout(cfg), derive_seed(cfg.seed, 1));
  SearchResult search = astar_trace(grid);
  return {std::move(grid), std::move(search), cfg.kind, cfg.seed};
}

/// Instance on a generated layout with caller-chosen endpoints.
inline ProblemInstance make_instance(const GenConfig& cfg, Coord start, Coord goal) {
  cfg.validate();
  if (cfg.kind == GeneratorKind::SearchformerStyle)
    throw ConfigError("searchformer instances carry their own endpoints");
  Grid grid(generate_layout(cfg), start, goal);
  SearchResult search = astar_trace(grid);
  return {std::move(grid), std::move(search), cfg.kind, cfg.seed};
}

}  // namespace tracegrid

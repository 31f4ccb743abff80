#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "grid.hpp"

namespace tracegrid {

enum class EventKind : std::uint8_t { Create, Close };

/// One logged A* operation. `g` is the cost from start, `h` the Manhattan
/// estimate to the goal.
struct TraceEvent {
  EventKind kind = EventKind::Close;
  Coord pos;
  int g = 0;
  int h = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;
using Plan = std::vector<Coord>;

/// Trace of a search plus the reconstructed plan. `plan` is empty when the
/// open list ran dry before the goal was expanded; the partial trace is kept.
struct SearchResult {
  Trace trace;
  std::optional<Plan> plan;

  bool solved() const noexcept { return plan.has_value(); }
  std::size_t difficulty() const noexcept { return trace.size(); }
};

constexpr int manhattan(Coord a, Coord b) noexcept {
  return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

/// Fixed successor order: left, right, up, down.
inline constexpr std::array<Coord, 4> kStepOrder{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

inline std::vector<Coord> neighbors_in_order(const Layout& layout, Coord c) {
  std::vector<Coord> out;
  out.reserve(4);
  for (auto d : kStepOrder) {
    const Coord n{c.x + d.x, c.y + d.y};
    if (layout.is_free(n)) out.push_back(n);
  }
  return out;
}

inline std::vector<Coord> neighbors_in_order(const Grid& grid, Coord c) {
  return neighbors_in_order(grid.layout(), c);
}

/// A* over 4-connected unit-cost moves with the Manhattan heuristic, logging
/// every expansion (Close) and every enqueue or strict g-improvement (Create).
///
/// The open list is ordered by (f, insertion counter), so ties on f are broken
/// first-in first-out. Successors already closed are skipped. The start node
/// is closed without a preceding Create.
inline SearchResult astar_trace(const Grid& grid) {
  const Layout& layout = grid.layout();
  const Coord goal = grid.goal();
  const std::size_t n = layout.size();
  constexpr int kUnseen = std::numeric_limits<int>::max();
  constexpr auto kNoParent = std::numeric_limits<std::size_t>::max();

  struct Entry {
    int f;
    std::uint64_t seq;
    std::size_t node;
    int g;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      return a.f != b.f ? a.f > b.f : a.seq > b.seq;
    }
  };

  std::vector<int> best_g(n, kUnseen);
  std::vector<std::size_t> parent(n, kNoParent);
  std::vector<bool> closed(n, false);
  std::priority_queue<Entry, std::vector<Entry>, Later> open;
  std::uint64_t seq = 0;

  SearchResult result;
  const std::size_t start = layout.index(grid.start());
  best_g[start] = 0;
  open.push({manhattan(grid.start(), goal), seq++, start, 0});

  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    if (closed[top.node] || top.g != best_g[top.node]) continue;  // stale
    closed[top.node] = true;
    const Coord pos = layout.coord(top.node);
    result.trace.push_back({EventKind::Close, pos, top.g, manhattan(pos, goal)});

    if (pos == goal) {
      Plan plan;
      for (auto i = top.node; i != kNoParent; i = parent[i]) plan.push_back(layout.coord(i));
      std::reverse(plan.begin(), plan.end());
      result.plan = std::move(plan);
      return result;
    }

    for (auto next : neighbors_in_order(layout, pos)) {
      const auto idx = layout.index(next);
      if (closed[idx]) continue;
      const int g = top.g + 1;
      if (g >= best_g[idx]) continue;
      best_g[idx] = g;
      parent[idx] = top.node;
      const int h = manhattan(next, goal);
      open.push({g + h, seq++, idx, g});
      result.trace.push_back({EventKind::Create, next, g, h});
    }
  }
  return result;
}

/// Breadth-first shortest path length in moves, independent of astar_trace.
inline std::optional<int> bfs_shortest_len(const Layout& layout, Coord start, Coord goal) {
  if (!layout.is_free(start) || !layout.is_free(goal)) return std::nullopt;
  if (start == goal) return 0;
  std::vector<int> dist(layout.size(), -1);
  std::deque<Coord> queue{start};
  dist[layout.index(start)] = 0;
  while (!queue.empty()) {
    const Coord c = queue.front();
    queue.pop_front();
    const int d = dist[layout.index(c)];
    for (auto step : kStepOrder) {
      const Coord n{c.x + step.x, c.y + step.y};
      if (!layout.is_free(n) || dist[layout.index(n)] >= 0) continue;
      if (n == goal) return d + 1;
      dist[layout.index(n)] = d + 1;
      queue.push_back(n);
    }
  }
  return std::nullopt;
}

inline std::optional<int> bfs_shortest_len(const Grid& grid) {
  return bfs_shortest_len(grid.layout(), grid.start(), grid.goal());
}

enum class InvalidReason : std::uint8_t {
  None,
  EmptyPlan,
  WrongStart,
  WallCell,
  NonAdjacentStep,
  WrongTerminus,
  // Response-level failures, assigned by the analyzer before plan checks.
  Truncated,
  NoPlan,
  MalformedPlan,
  IllegalTrace,
};

constexpr std::string_view to_string(InvalidReason r) noexcept {
  switch (r) {
    case InvalidReason::None: return "none";
    case InvalidReason::EmptyPlan: return "empty_plan";
    case InvalidReason::WrongStart: return "wrong_start";
    case InvalidReason::WallCell: return "wall_cell";
    case InvalidReason::NonAdjacentStep: return "non_adjacent_step";
    case InvalidReason::WrongTerminus: return "wrong_terminus";
    case InvalidReason::Truncated: return "truncated";
    case InvalidReason::NoPlan: return "no_plan";
    case InvalidReason::MalformedPlan: return "malformed_plan";
    case InvalidReason::IllegalTrace: return "illegal_trace";
  }
  return "unknown";
}

struct Verdict {
  enum class Kind : std::uint8_t { Valid, ValidOptimal, Invalid };

  Kind kind = Kind::Invalid;
  InvalidReason reason = InvalidReason::None;
  /// Index of the offending plan cell for step-level failures.
  std::size_t at = 0;

  bool valid() const noexcept { return kind != Kind::Invalid; }
  bool optimal() const noexcept { return kind == Kind::ValidOptimal; }

  static Verdict invalid(InvalidReason r, std::size_t at = 0) { return {Kind::Invalid, r, at}; }

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

constexpr std::string_view to_string(Verdict::Kind k) noexcept {
  switch (k) {
    case Verdict::Kind::Valid: return "valid";
    case Verdict::Kind::ValidOptimal: return "valid_optimal";
    case Verdict::Kind::Invalid: return "invalid";
  }
  return "unknown";
}

/// Checks an arbitrary plan against a layout and endpoints. Reports the first
/// violated rule in plan order. The start == goal form exists for judging
/// degenerate model output; Grid itself never has coincident endpoints.
inline Verdict validate_plan(const Layout& layout, Coord start, Coord goal, const Plan& plan) {
  if (plan.empty()) return Verdict::invalid(InvalidReason::EmptyPlan);
  if (plan.front() != start) return Verdict::invalid(InvalidReason::WrongStart, 0);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!layout.is_free(plan[i])) return Verdict::invalid(InvalidReason::WallCell, i);
    if (i > 0 && manhattan(plan[i - 1], plan[i]) != 1)
      return Verdict::invalid(InvalidReason::NonAdjacentStep, i);
  }
  if (plan.back() != goal) return Verdict::invalid(InvalidReason::WrongTerminus, plan.size() - 1);

  const auto shortest = bfs_shortest_len(layout, start, goal);
  const bool optimal = shortest && static_cast<std::size_t>(*shortest) + 1 == plan.size();
  return {optimal ? Verdict::Kind::ValidOptimal : Verdict::Kind::Valid, InvalidReason::None, 0};
}

inline Verdict validate_plan(const Grid& grid, const Plan& plan) {
  return validate_plan(grid.layout(), grid.start(), grid.goal(), plan);
}

inline std::size_t difficulty(const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("difficulty of an empty trace");
  return trace.size();
}

}  // namespace tracegrid

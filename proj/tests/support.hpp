#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include <tracegrid/grid.hpp>
#include <tracegrid/search.hpp>

// Structural statistics of the free-cell graph, computed independently of
// the generators.
namespace support {

struct FreeGraph {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t components = 0;
  std::size_t junctions = 0;  // free cells with >= 3 free neighbours
};

inline FreeGraph free_graph(const tracegrid::Layout& layout) {
  using tracegrid::Coord;
  FreeGraph g;
  std::vector<bool> seen(layout.size(), false);
  for (int y = 0; y < layout.height(); ++y)
    for (int x = 0; x < layout.width(); ++x) {
      const Coord c{x, y};
      if (!layout.is_free(c)) continue;
      ++g.nodes;
      int degree = 0;
      for (auto d : tracegrid::kStepOrder) degree += layout.is_free({x + d.x, y + d.y});
      g.edges += layout.is_free({x + 1, y}) + layout.is_free({x, y + 1});
      g.junctions += degree >= 3;
      if (seen[layout.index(c)]) continue;
      ++g.components;
      std::deque<Coord> q{c};
      seen[layout.index(c)] = true;
      while (!q.empty()) {
        const Coord u = q.front();
        q.pop_front();
        for (auto d : tracegrid::kStepOrder) {
          const Coord v{u.x + d.x, u.y + d.y};
          if (layout.is_free(v) && !seen[layout.index(v)]) {
            seen[layout.index(v)] = true;
            q.push_back(v);
          }
        }
      }
    }
  return g;
}

inline bool is_spanning_tree(const tracegrid::Layout& layout) {
  const auto g = free_graph(layout);
  return g.components == 1 && g.edges + 1 == g.nodes;
}

inline bool connected(const tracegrid::Layout& layout) { return free_graph(layout).components == 1; }

inline bool has_cycle(const tracegrid::Layout& layout) {
  const auto g = free_graph(layout);
  return g.edges + g.components > g.nodes;
}

}  // namespace support

#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace tracegrid {

inline constexpr int kDefaultSize = 30;

struct Coord {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(Coord, Coord) = default;
  friend constexpr auto operator<=>(Coord, Coord) = default;
};

enum class Cell : std::uint8_t { Free, Wall };

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// W×H lattice of Free/Wall cells with no endpoints attached.
class Layout {
 public:
  Layout() = default;
  Layout(int width, int height, Cell fill = Cell::Free)
      : width_(width), height_(height),
        cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width <= 0 || height <= 0) throw GridError("grid dimensions must be positive");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return cells_.size(); }

  bool in_bounds(Coord c) const noexcept {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  std::size_t index(Coord c) const noexcept {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }
  Coord coord(std::size_t i) const noexcept {
    return {static_cast<int>(i % static_cast<std::size_t>(width_)),
            static_cast<int>(i / static_cast<std::size_t>(width_))};
  }

  Cell at(Coord c) const { return cells_[index(c)]; }
  void set(Coord c, Cell v) { cells_[index(c)] = v; }
  bool is_free(Coord c) const noexcept { return in_bounds(c) && cells_[index(c)] == Cell::Free; }

  std::size_t free_count() const noexcept {
    std::size_t n = 0;
    for (auto c : cells_) n += c == Cell::Free;
    return n;
  }
  std::size_t wall_count() const noexcept { return size() - free_count(); }

  std::vector<Coord> free_cells() const {
    std::vector<Coord> out;
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (cells_[i] == Cell::Free) out.push_back(coord(i));
    return out;
  }

  const std::vector<Cell>& cells() const noexcept { return cells_; }

  friend bool operator==(const Layout&, const Layout&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
};

/// A problem instance: a layout plus distinct free start and goal cells.
class Grid {
 public:
  Grid() = default;
  Grid(Layout layout, Coord start, Coord goal)
      : layout_(std::move(layout)), start_(start), goal_(goal) {
    if (start == goal) throw GridError("start and goal must differ");
    if (!layout_.is_free(start)) throw GridError("start must be a free in-bounds cell");
    if (!layout_.is_free(goal)) throw GridError("goal must be a free in-bounds cell");
  }

  const Layout& layout() const noexcept { return layout_; }
  Coord start() const noexcept { return start_; }
  Coord goal() const noexcept { return goal_; }
  int width() const noexcept { return layout_.width(); }
  int height() const noexcept { return layout_.height(); }
  bool in_bounds(Coord c) const noexcept { return layout_.in_bounds(c); }
  bool is_free(Coord c) const noexcept { return layout_.is_free(c); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Layout layout_;
  Coord start_{};
  Coord goal_{};
};

inline std::string to_string(Coord c) {
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

}  // namespace tracegrid

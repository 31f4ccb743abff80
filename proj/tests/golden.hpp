#pragma once

#include <string_view>

#include <tracegrid/grid.hpp>
#include <tracegrid/maze.hpp>

// Worked free-space example: 30x30, four outer wall rings, start (18,11),
// goal (15,12).
namespace golden {

inline constexpr tracegrid::Coord kStart{18, 11};
inline constexpr tracegrid::Coord kGoal{15, 12};

inline constexpr std::string_view kTrace =
    "close 18 11 c0 c4 create 17 11 c1 c3 create 19 11 c1 c5 create 18 10 c1 c5 "
    "create 18 12 c1 c3 close 17 11 c1 c3 create 16 11 c2 c2 create 17 10 c2 c4 "
    "create 17 12 c2 c2 close 18 12 c1 c3 create 19 12 c2 c4 create 18 13 c2 c4 "
    "close 16 11 c2 c2 create 15 11 c3 c1 create 16 10 c3 c3 create 16 12 c3 c1 "
    "close 17 12 c2 c2 create 17 13 c3 c3 close 15 11 c3 c1 create 14 11 c4 c2 "
    "create 15 10 c4 c2 create 15 12 c4 c0 close 16 12 c3 c1 create 16 13 c4 c2 "
    "close 15 12 c4 c0";

inline constexpr std::string_view kPlan = "plan 18 11 plan 17 11 plan 16 11 plan 15 11 plan 15 12";

inline constexpr std::string_view kProblemPrefix =
    "start 18 11 goal 15 12 wall 0 0 wall 0 1 wall 0 2 wall 0 3 wall 0 4 wall 0 5 "
    "wall 0 6 wall 0 7 wall 0 8 wall 0 9 wall 0 10 wall 0 11 wall 0 12 wall 0 13";

inline tracegrid::Grid grid() {
  tracegrid::GenConfig cfg;
  cfg.kind = tracegrid::GeneratorKind::FreeSpace;
  cfg.wall_levels = 4;
  return tracegrid::Grid(tracegrid::gen_freespace(cfg), kStart, kGoal);
}

}  // namespace golden

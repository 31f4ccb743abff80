#pragma once

// Umbrella header.
#include "analysis.hpp"
#include "codec.hpp"
#include "dataset.hpp"
#include "digest.hpp"
#include "grid.hpp"
#include "maze.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "search.hpp"

#pragma once

#include "mechlab/env.hpp"
#include "mechlab/feasibility.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace mechlab {

struct GridPoint {
  double alpha = 0.0;
  double delta = 0.0;
};

using EnvFactory = std::function<Environment(double alpha, double delta)>;

// lo, lo + step, ..., hi (inclusive up to rounding); values snapped to 1e-12.
// Throws InvalidInput on an empty or malformed grid.
std::vector<double> make_grid(double lo, double hi, double step);

// Thread cap for scans: MECHLAB_THREADS when set to a positive integer,
// otherwise the OpenMP default.
int scan_threads();

// Runs body(0..count-1), possibly concurrently. The first exception by index
// is rethrown after every iteration has finished.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads = 0);

// Reference and OpenMP versions of the same sweep; results are in grid order
// and bit-identical.
std::vector<ScanRow> scan_serial(const EnvFactory& make, const std::vector<GridPoint>& grid, double tol);
std::vector<ScanRow> scan_parallel(const EnvFactory& make, const std::vector<GridPoint>& grid, double tol,
                                   int threads = 0);

}  // namespace mechlab

#include "mechlab/scan.hpp"

#include "mechlab/csv.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>

namespace mechlab {

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step))
    throw InvalidInput("grid bounds must be finite");
  if (!(step > 0.0)) throw InvalidInput("grid step must be positive, got " + format_number(step));
  if (hi < lo) throw InvalidInput("empty grid: hi " + format_number(hi) + " < lo " + format_number(lo));
  const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 1000000) throw InvalidInput("grid too large (" + std::to_string(count) + " points)");
  std::vector<double> out;
  out.reserve(count);
  for (long k = 0; k < count; ++k) out.push_back(std::round((lo + k * step) * 1e12) / 1e12);
  return out;
}

int scan_threads() {
  if (const char* env = std::getenv("MECHLAB_THREADS")) {
    char* end = nullptr;
    long t = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && t >= 1) return static_cast<int>(t);
  }
  return omp_get_max_threads();
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int threads) {
  if (threads <= 0) threads = scan_threads();
  std::vector<std::exception_ptr> errors(count);
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (long k = 0; k < n; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ScanRow> scan_serial(const EnvFactory& make, const std::vector<GridPoint>& grid, double tol) {
  std::vector<ScanRow> rows;
  rows.reserve(grid.size());
  for (const auto& g : grid) {
    ScanRow r = evaluate_point(make(g.alpha, g.delta), g.alpha, tol);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ScanRow> scan_parallel(const EnvFactory& make, const std::vector<GridPoint>& grid, double tol,
                                   int threads) {
  std::vector<ScanRow> rows(grid.size());
  parallel_for(
      grid.size(), [&](std::size_t k) { rows[k] = evaluate_point(make(grid[k].alpha, grid[k].delta), grid[k].alpha, tol); },
      threads);
  return rows;
}

}  // namespace mechlab

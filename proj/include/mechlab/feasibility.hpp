#pragma once

#include "mechlab/env.hpp"
#include "mechlab/solver.hpp"
#include "mechlab/values.hpp"

#include <string>
#include <vector>

namespace mechlab {

struct MinMaxResult {
  Mechanism mechanism;   // <p*, U*>; ex post tables identical across contexts
  ValueTable vcg;        // U^vcg
  Vector buyer_floor;    // min_i U^vcg_B(v_i, c_j), per seller column j
  Vector seller_floor;   // min_j U^vcg_S(v_i, c_j), per buyer row i
  std::vector<int> buyer_argmin;
  std::vector<int> seller_argmin;
  // Distance between the explicit floor and the value at v_1 (resp. c_M);
  // anything above 1e-10 means the environment broke the monotone ordering.
  double anomaly_gap = 0.0;
  bool anomaly() const { return anomaly_gap > 1e-10; }
};

MinMaxResult minmax(const Environment& env);
ValueTable minmax_values(const Environment& env);

struct Constraint {
  std::string id;  // "pi_star" or "pi_v<i>_c<j>"
  int slot = 0;
  double value = 0.0;
};

struct SurplusVector {
  ContextSpace space;
  double pi_star = 0.0;
  Matrix pi_star_state;  // N x M
  double pi_vcg = 0.0;
  Matrix pi_vcg_state;
  std::vector<Constraint> constraints;  // N*M + 1, period 1 first
  int argmin = 0;                       // index into constraints
  double path_gap = 0.0;                // |definition - decomposition|, max over slots

  double min_component() const { return constraints[argmin].value; }
  Vector by_slot() const;
};

SurplusVector pi_star(const Environment& env);

struct FeasibilityDecision {
  bool feasible = false;
  SurplusVector surplus;
  double min_component = 0.0;
  std::string binding;
};

FeasibilityDecision is_efficient_feasible(const Environment& env, double tol = 1e-9);

// One evaluated grid point of a feasibility scan.
struct ScanRow {
  double alpha = 0.0;
  double delta = 0.0;
  double pi_star = 0.0;
  Matrix state;
  double min_component = 0.0;
  bool feasible = false;
};

ScanRow evaluate_point(const Environment& env, double alpha, double tol);

struct DeltaThreshold {
  enum class Kind { crossing, feasible_everywhere, infeasible_throughout, irregular };
  Kind kind = Kind::crossing;
  double delta_star = 0.0;  // NaN when there is none
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::vector<double> crossings;  // every sign change, bisected
  std::vector<ScanRow> profile;
};

std::string to_string(DeltaThreshold::Kind k);

// Pre-scan on {0, step, ..., delta_max}, then bisection on the sign of the
// smallest component. A single infeasible-to-feasible change is the normal
// case; anything else is reported, never smoothed over.
DeltaThreshold delta_threshold(const Environment& base, double grid_step, double bisect_tol,
                               double delta_max = 0.999, double tol = 1e-9);

struct AlphaThreshold {
  bool feasible_at_start = false;
  bool feasible_throughout = false;
  double alpha_star = 0.0;  // largest grid alpha with every smaller grid alpha feasible; NaN if none
  std::vector<ScanRow> profile;
};

// Diagonal alpha_B = alpha_S = alpha scan of a Lambda family at fixed delta.
// Rejects bases whose one-shot surplus Pi*(delta = 0) is nonnegative.
AlphaThreshold alpha_threshold(const Environment& base, LambdaKind kind, double delta, double alpha_lo,
                               double alpha_hi, double grid_step, double tol = 1e-9);

// Header alpha|delta, pi_star, pi_v1_c1, ..., pi_vN_cM, feasible.
std::vector<std::string> scan_header(const std::string& param, int n, int m);

}  // namespace mechlab

#include "mechlab/feasibility.hpp"

#include "mechlab/csv.hpp"
#include "mechlab/scan.hpp"

#include <cmath>
#include <limits>

namespace mechlab {

MinMaxResult minmax(const Environment& env) {
  require_infinite(env, "minmax_values");
  require_valid(env);
  const int n = env.n(), m = env.m();
  MechanismKernel k = vcg_kernel(env);
  MinMaxResult r;
  r.vcg = solve_stationary_values(env, k);
  const Matrix& UB = r.vcg.expost_B[0];
  const Matrix& US = r.vcg.expost_S[0];

  r.buyer_floor.resize(m);
  r.buyer_argmin.assign(m, 0);
  for (int j = 0; j < m; ++j) {
    int at = 0;
    for (int i = 1; i < n; ++i)
      if (UB(i, j) < UB(at, j)) at = i;
    r.buyer_floor(j) = UB(at, j);
    r.buyer_argmin[j] = at;
    r.anomaly_gap = std::max(r.anomaly_gap, UB(0, j) - UB(at, j));
  }
  r.seller_floor.resize(n);
  r.seller_argmin.assign(n, m - 1);
  for (int i = 0; i < n; ++i) {
    int at = m - 1;
    for (int j = m - 2; j >= 0; --j)
      if (US(i, j) < US(i, at)) at = j;
    r.seller_floor(i) = US(i, at);
    r.seller_argmin[i] = at;
    r.anomaly_gap = std::max(r.anomaly_gap, US(i, m - 1) - US(i, at));
  }

  Matrix starB = UB.rowwise() - r.buyer_floor.transpose();
  Matrix starS = US.colwise() - r.seller_floor;
  r.mechanism = {"minmax", k.allocation, stationary_value_table(env, starB, starS)};
  return r;
}

ValueTable minmax_values(const Environment& env) { return minmax(env).mechanism.values; }

Vector SurplusVector::by_slot() const {
  Vector out(constraints.size());
  for (const auto& c : constraints) out(c.slot) = c.value;
  return out;
}

SurplusVector pi_star(const Environment& env) {
  MinMaxResult mm = minmax(env);
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();

  Vector direct = budget_surplus(env, mm.mechanism);
  Mechanism vcg{"vcg", mm.mechanism.allocation, mm.vcg};
  Vector pv = budget_surplus(env, vcg);

  SurplusVector out;
  out.space = cs;
  double scale = 1.0;
  for (int s = 0; s < cs.size(); ++s) {
    double decomposed = pv(s) + mm.vcg.interim_B(s, 0) + mm.vcg.interim_S(s, m - 1);
    out.path_gap = std::max(out.path_gap, std::abs(direct(s) - decomposed));
    scale = std::max(scale, std::abs(direct(s)));
  }
  if (out.path_gap > 1e-9 * scale)
    throw NumericalFault("surplus paths disagree by " + format_number(out.path_gap) +
                         (mm.anomaly() ? " (lowest-type floor not at v_1/c_M)" : ""));

  out.pi_star = direct(0);
  out.pi_vcg = pv(0);
  out.pi_star_state.resize(n, m);
  out.pi_vcg_state.resize(n, m);
  out.constraints.push_back({"pi_star", 0, direct(0)});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      int s = cs.slot(i, j);
      out.pi_star_state(i, j) = direct(s);
      out.pi_vcg_state(i, j) = pv(s);
      out.constraints.push_back({"pi_v" + std::to_string(i + 1) + "_c" + std::to_string(j + 1), s, direct(s)});
    }
  for (size_t c = 1; c < out.constraints.size(); ++c)
    if (out.constraints[c].value < out.constraints[out.argmin].value) out.argmin = static_cast<int>(c);
  return out;
}

FeasibilityDecision is_efficient_feasible(const Environment& env, double tol) {
  FeasibilityDecision d;
  d.surplus = pi_star(env);
  d.min_component = d.surplus.min_component();
  d.binding = d.surplus.constraints[d.surplus.argmin].id;
  d.feasible = d.min_component >= -tol;
  return d;
}

ScanRow evaluate_point(const Environment& env, double alpha, double tol) {
  FeasibilityDecision d = is_efficient_feasible(env, tol);
  ScanRow r;
  r.alpha = alpha;
  r.delta = env.discount;
  r.pi_star = d.surplus.pi_star;
  r.state = d.surplus.pi_star_state;
  r.min_component = d.min_component;
  r.feasible = d.feasible;
  return r;
}

std::string to_string(DeltaThreshold::Kind k) {
  switch (k) {
    case DeltaThreshold::Kind::crossing: return "crossing";
    case DeltaThreshold::Kind::feasible_everywhere: return "feasible_everywhere";
    case DeltaThreshold::Kind::infeasible_throughout: return "infeasible_throughout";
    case DeltaThreshold::Kind::irregular: return "irregular";
  }
  return "?";
}

DeltaThreshold delta_threshold(const Environment& base, double grid_step, double bisect_tol, double delta_max,
                               double tol) {
  require_infinite(base, "delta_threshold");
  if (!(delta_max > 0.0 && delta_max < 1.0)) throw InvalidInput("delta_max must lie in (0, 1)");
  if (!(bisect_tol > 0.0)) throw InvalidInput("bisection tolerance must be positive");
  std::vector<double> deltas = make_grid(0.0, delta_max, grid_step);
  if (deltas.back() < delta_max - 1e-12) deltas.push_back(delta_max);

  auto at = [&base](double a, double d) {
    (void)a;
    Environment e = base;
    e.discount = d;
    return e;
  };
  std::vector<GridPoint> grid;
  for (double d : deltas) grid.push_back({0.0, d});
  DeltaThreshold out;
  out.profile = scan_parallel(at, grid, tol);

  auto feasible = [&](double d) { return is_efficient_feasible(at(0.0, d), tol).feasible; };
  struct Bracket {
    double lo, hi;
    bool rising;
  };
  std::vector<Bracket> brackets;
  for (size_t k = 0; k + 1 < out.profile.size(); ++k) {
    bool a = out.profile[k].feasible, b = out.profile[k + 1].feasible;
    if (a == b) continue;
    double lo = deltas[k], hi = deltas[k + 1];
    while (hi - lo > bisect_tol) {
      double mid = 0.5 * (lo + hi);
      (feasible(mid) == b ? hi : lo) = mid;
    }
    brackets.push_back({lo, hi, b});
    out.crossings.push_back(hi);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool end_feasible = out.profile.back().feasible;
  if (brackets.empty()) {
    out.kind = end_feasible ? DeltaThreshold::Kind::feasible_everywhere : DeltaThreshold::Kind::infeasible_throughout;
    out.delta_star = end_feasible ? 0.0 : nan;
    out.bracket_lo = out.bracket_hi = out.delta_star;
    return out;
  }
  out.kind = (brackets.size() == 1 && brackets[0].rising) ? DeltaThreshold::Kind::crossing
                                                          : DeltaThreshold::Kind::irregular;
  if (end_feasible && brackets.back().rising) {
    out.delta_star = brackets.back().hi;
    out.bracket_lo = brackets.back().lo;
    out.bracket_hi = brackets.back().hi;
  } else {
    out.delta_star = out.bracket_lo = out.bracket_hi = nan;
  }
  return out;
}

AlphaThreshold alpha_threshold(const Environment& base, LambdaKind kind, double delta, double alpha_lo,
                               double alpha_hi, double grid_step, double tol) {
  require_infinite(base, "alpha_threshold");
  Environment stat = base;
  stat.discount = 0.0;
  double pi0 = pi_star(stat).pi_star;
  if (!(pi0 < 0.0))
    throw InvalidInput("alpha threshold needs a base with negative one-shot surplus Pi*(delta=0) < 0; got " +
                       format_number(pi0));

  auto at = [&base, kind](double a, double d) {
    Environment e = base;
    e.discount = d;
    return make_lambda_family(e, kind, a, a);
  };
  std::vector<GridPoint> grid;
  for (double a : make_grid(alpha_lo, alpha_hi, grid_step)) grid.push_back({a, delta});

  AlphaThreshold out;
  out.profile = scan_parallel(at, grid, tol);
  out.feasible_at_start = out.profile.front().feasible;
  out.alpha_star = std::numeric_limits<double>::quiet_NaN();
  size_t k = 0;
  while (k < out.profile.size() && out.profile[k].feasible) out.alpha_star = out.profile[k++].alpha;
  out.feasible_throughout = k == out.profile.size();
  return out;
}

std::vector<std::string> scan_header(const std::string& param, int n, int m) {
  std::vector<std::string> h{param, "pi_star"};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) h.push_back("pi_v" + std::to_string(i + 1) + "_c" + std::to_string(j + 1));
  h.push_back("feasible");
  return h;
}

}  // namespace mechlab

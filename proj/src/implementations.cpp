#include "mechlab/implementations.hpp"

#include "mechlab/csv.hpp"
#include "mechlab/feasibility.hpp"
#include "mechlab/solver.hpp"

#include <cmath>
#include <limits>

namespace mechlab {

FeeSchedule fee_schedule(const Environment& env) {
  require_infinite(env, "fee_schedule");
  require_valid(env);
  const int n = env.n(), m = env.m();
  const double d = env.discount;
  ValueTable vcg = solve_stationary_values(env, vcg_kernel(env));

  Vector b(m), a(n);
  for (int j = 0; j < m; ++j) b(j) = vcg.buyer_given(0, j);
  for (int i = 0; i < n; ++i) a(i) = vcg.seller_given(m - 1, i);

  FeeSchedule fs;
  fs.z_B = b - d * env.seller_transition * b;
  fs.z_S = a - d * env.buyer_transition * a;
  fs.z_B1 = vcg.initial_B(0) - d * env.seller_prior.dot(b);
  fs.z_S1 = vcg.initial_S(m - 1) - d * env.buyer_prior.dot(a);
  return fs;
}

MechanismKernel fee_kernel(const Environment& env) {
  FeeSchedule fs = fee_schedule(env);
  MechanismKernel k = vcg_kernel(env);
  k.buyer_fee.resize(env.m() + 1);
  k.seller_fee.resize(env.n() + 1);
  k.buyer_fee << fs.z_B1, fs.z_B;
  k.seller_fee << fs.z_S1, fs.z_S;
  return k;
}

BetaWeights uniform_beta(const Environment& env, double buyer, double seller) {
  const int slots = env.contexts().size();
  return {Vector::Constant(slots, buyer), Vector::Constant(slots, seller)};
}

Mechanism minmax_mechanism(const Environment& env) { return minmax(env).mechanism; }

namespace {

void require_feasible(const SurplusVector& sv, double tol) {
  if (sv.min_component() < -tol) {
    const Constraint& c = sv.constraints[sv.argmin];
    throw InvalidInput("efficient trade is not implementable under interim budget balance: " + c.id + " = " +
                       format_number(c.value) + " < 0");
  }
}

}  // namespace

Mechanism beta_mechanism(const Environment& env, const BetaWeights& w, double tol) {
  const ContextSpace cs = env.contexts();
  if (w.buyer.size() != cs.size() || w.seller.size() != cs.size())
    throw InvalidInput("beta weights need one entry per context (" + std::to_string(cs.size()) + ")");
  for (int s = 0; s < cs.size(); ++s) {
    double b = w.buyer(s), c = w.seller(s);
    if (!(b >= 0.0 && c >= 0.0) || !(b + c <= 1.0 + 1e-12))
      throw InvalidInput("beta weights at " + cs.label(s) + " violate beta_B, beta_S >= 0, beta_B + beta_S <= 1 (" +
                         format_number(b) + ", " + format_number(c) + ")");
  }
  SurplusVector sv = pi_star(env);
  require_feasible(sv, tol);
  Vector pi = sv.by_slot();
  MinMaxResult mm = minmax(env);
  const ValueTable& star = mm.mechanism.values;
  std::vector<Matrix> B(cs.size()), S(cs.size());
  for (int s = 0; s < cs.size(); ++s) {
    B[s] = star.expost_B[s].array() + w.buyer(s) * pi(s);
    S[s] = star.expost_S[s].array() + w.seller(s) * pi(s);
  }
  return {"beta", mm.mechanism.allocation, make_value_table(env, std::move(B), std::move(S))};
}

Mechanism zero_surplus_mechanism(const Environment& env, double tol) {
  Mechanism m = beta_mechanism(env, uniform_beta(env, 0.5, 0.5), tol);
  m.name = "zero_surplus";
  return m;
}

MechanismKernel interim_to_expost(const Environment& env, const Mechanism& mech, double beta, double tol) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidInput("surplus split beta must lie in [0, 1]");
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  Vector pi = budget_surplus(env, mech);
  for (int s = 0; s < cs.size(); ++s)
    if (pi(s) < -tol)
      throw InvalidInput("mechanism violates interim budget balance at " + cs.label(s) + ": Pi = " +
                         format_number(pi(s)));

  std::vector<Matrix> B(cs.size()), S(cs.size());
  for (int s = 0; s < cs.size(); ++s) {
    B[s] = mech.values.expost_B[s].array() + beta * pi(s);
    S[s] = mech.values.expost_S[s].array() + (1.0 - beta) * pi(s);
  }
  ValueTable shifted = make_value_table(env, std::move(B), std::move(S));
  MechanismKernel flows = kernel_from_utilities(env, mech.allocation, shifted);

  MechanismKernel out;
  out.allocation = mech.allocation;
  out.buyer_context_transfer.resize(cs.size());
  for (int s = 0; s < cs.size(); ++s) {
    Vector f = env.buyer_dist(s), g = env.seller_dist(s);
    Vector xb = flows.buyer_context_transfer[s] * g;                  // x_B(v | s)
    Vector xs = flows.seller_context_transfer[s].transpose() * f;     // x_S(c | s)
    double xbar = f.dot(xb);
    Matrix x(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) x(i, j) = xs(j) + (xb(i) - xbar);
    out.buyer_context_transfer[s] = x;
  }
  out.seller_context_transfer = out.buyer_context_transfer;
  out.buyer_transfer = out.buyer_context_transfer[0];
  out.seller_transfer = out.seller_context_transfer[0];
  return out;
}

MechanismKernel expost_transfers(const Environment& env, double tol) {
  return interim_to_expost(env, zero_surplus_mechanism(env, tol), 0.5, tol);
}

BondReport bond_mechanism(const Environment& env, double tol) {
  SurplusVector sv = pi_star(env);
  if (sv.pi_star < -tol)
    throw InvalidInput("bond needs ex ante budget balance, Pi* >= 0; got Pi* = " + format_number(sv.pi_star));
  ValueTable vcg = solve_stationary_values(env, vcg_kernel(env));
  FeeSchedule fs = fee_schedule(env);
  BondReport r;
  r.upfront_B = vcg.initial_B(0);
  r.upfront_S = vcg.initial_S(env.m() - 1);
  r.max_fee = std::max(std::abs(fs.z_B1), fs.z_B.cwiseAbs().maxCoeff());
  r.ratio_percent = r.max_fee > 0.0 ? 100.0 * r.upfront_B / r.max_fee : std::numeric_limits<double>::quiet_NaN();
  return r;
}

MechanismKernel bond_kernel(const Environment& env) {
  ValueTable vcg = solve_stationary_values(env, vcg_kernel(env));
  MechanismKernel k = vcg_kernel(env);
  k.buyer_fee = Vector::Zero(env.m() + 1);
  k.seller_fee = Vector::Zero(env.n() + 1);
  k.buyer_fee(0) = vcg.initial_B(0);
  k.seller_fee(0) = vcg.initial_S(env.m() - 1);
  return k;
}

BetaDecomposition decompose_against_minmax(const Environment& env, const Mechanism& mech) {
  const ContextSpace cs = env.contexts();
  Vector pi = pi_star(env).by_slot();
  ValueTable star = minmax_values(env);
  BetaDecomposition out;
  out.weights.buyer.resize(cs.size());
  out.weights.seller.resize(cs.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int s = 0; s < cs.size(); ++s) {
    Vector aB = mech.values.interim_B.row(s) - star.interim_B.row(s);
    Vector aS = mech.values.interim_S.row(s) - star.interim_S.row(s);
    out.constancy_gap = std::max({out.constancy_gap, aB.maxCoeff() - aB.minCoeff(), aS.maxCoeff() - aS.minCoeff()});
    bool usable = std::abs(pi(s)) > 1e-12;
    out.weights.buyer(s) = usable ? aB.mean() / pi(s) : nan;
    out.weights.seller(s) = usable ? aS.mean() / pi(s) : nan;
  }
  return out;
}

}  // namespace mechlab

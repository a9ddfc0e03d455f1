#include "mechlab/intermediate.hpp"

#include "mechlab/csv.hpp"
#include "mechlab/feasibility.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/solver.hpp"

#include <cmath>

namespace mechlab {

namespace {

void require_stp(const Environment& env, const char* who) {
  require_valid(env);
  if (!is_stp(env)) throw InvalidInput(std::string(who) + " requires a 2x2 STP with v_H > c_H > v_L > c_L");
}

// Types of the other agent that produce the same trade outcome as the
// reported pair did; for the buyer this is a set of seller indices.
std::vector<int> buyer_cell(const Allocation& p, int i, int j) {
  std::vector<int> out;
  for (int l = 0; l < p.cols(); ++l)
    if (p(i, l) == p(i, j)) out.push_back(l);
  return out;
}

std::vector<int> seller_cell(const Allocation& p, int i, int j) {
  std::vector<int> out;
  for (int k = 0; k < p.rows(); ++k)
    if (p(k, j) == p(i, j)) out.push_back(k);
  return out;
}

// Prior-weighted average of `rent` over `cell`; faults if the weights vanish.
double pooled(const Vector& prior, const Vector& rent, const std::vector<int>& cell) {
  double w = 0.0, acc = 0.0;
  for (int k : cell) {
    w += prior(k);
    acc += prior(k) * rent(k);
  }
  if (!(w > 0.0)) throw NumericalFault("pooling weights do not normalize (empty or zero-mass cell)");
  return acc / w;
}

}  // namespace

InfoPartition partitions(const Environment& env) {
  require_stp(env, "partitions");
  InfoPartition ip;
  const Vector& v = env.buyer_types;
  const Vector& c = env.seller_types;
  ip.buyer_trade.resize(env.n());
  ip.buyer_no_trade.resize(env.n());
  ip.seller_trade.resize(env.m());
  ip.seller_no_trade.resize(env.m());
  for (int i = 0; i < env.n(); ++i)
    for (int j = 0; j < env.m(); ++j) {
      (c(j) < v(i) ? ip.buyer_trade[i] : ip.buyer_no_trade[i]).push_back(j);
      (v(i) > c(j) ? ip.seller_trade[j] : ip.seller_no_trade[j]).push_back(i);
    }
  return ip;
}

PooledValues pi_double_star(const Environment& env, double tol) {
  require_stp(env, "pi_double_star");
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  MinMaxResult mm = minmax(env);
  SurplusVector sv = pi_star(env);
  const Allocation& p = mm.mechanism.allocation;

  // rents of the lowest types the public mechanism strips in each context
  Vector b(m), a(n);
  for (int j = 0; j < m; ++j) b(j) = mm.vcg.buyer_given(0, j);
  for (int i = 0; i < n; ++i) a(i) = mm.vcg.seller_given(m - 1, i);

  PooledValues out;
  out.pi_star = sv.pi_star;
  out.pi_star_state = sv.pi_star_state;
  out.extraction_B.resize(cs.size());
  out.extraction_S.resize(cs.size());
  out.extraction_B(0) = mm.vcg.initial_B(0);
  out.extraction_S(0) = mm.vcg.initial_S(m - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      int s = cs.slot(i, j);
      out.extraction_B(s) = pooled(env.seller_prior, b, buyer_cell(p, i, j));
      out.extraction_S(s) = pooled(env.buyer_prior, a, seller_cell(p, i, j));
    }

  Vector pd(cs.size());
  for (int s = 0; s < cs.size(); ++s) {
    double pv = s == 0 ? sv.pi_vcg : sv.pi_vcg_state(cs.at(s).buyer, cs.at(s).seller);
    pd(s) = pv + out.extraction_B(s) + out.extraction_S(s);
  }
  out.pi_dstar = pd(0);
  out.pi_dstar_state.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out.pi_dstar_state(i, j) = pd(cs.slot(i, j));
  if (std::abs(out.pi_dstar - out.pi_star) > 1e-9 * std::max(1.0, std::abs(out.pi_star)))
    throw NumericalFault("ex ante pooled surplus " + format_number(out.pi_dstar) + " differs from Pi* " +
                         format_number(out.pi_star));

  // what each agent believes it holds, by (context, own type, outcome)
  const Matrix& UB = mm.mechanism.values.expost_B[0];
  const Matrix& US = mm.mechanism.values.expost_S[0];
  for (int s = 0; s < cs.size(); ++s) {
    Vector qB = Vector::Zero(m), qS = Vector::Zero(n);
    if (s == 0) {
      qB = env.seller_prior;
      qS = env.buyer_prior;
    } else {
      Context ctx = cs.at(s);
      std::vector<int> kb = buyer_cell(p, ctx.buyer, ctx.seller), ks = seller_cell(p, ctx.buyer, ctx.seller);
      double wb = 0.0, ws = 0.0;
      for (int l : kb) {
        qB += env.seller_prior(l) * env.seller_transition.row(l).transpose();
        wb += env.seller_prior(l);
      }
      for (int k : ks) {
        qS += env.buyer_prior(k) * env.buyer_transition.row(k).transpose();
        ws += env.buyer_prior(k);
      }
      qB /= wb;
      qS /= ws;
    }
    for (int i = 0; i < n; ++i)
      for (int o = 1; o >= 0; --o) {
        double w = 0.0, acc = 0.0;
        for (int j = 0; j < m; ++j)
          if (p(i, j) == o) {
            w += qB(j);
            acc += qB(j) * UB(i, j);
          }
        if (w > 0.0) out.pooled.push_back({'B', s, i, o, acc / w});
      }
    for (int j = 0; j < m; ++j)
      for (int o = 1; o >= 0; --o) {
        double w = 0.0, acc = 0.0;
        for (int i = 0; i < n; ++i)
          if (p(i, j) == o) {
            w += qS(i);
            acc += qS(i) * US(i, j);
          }
        if (w > 0.0) out.pooled.push_back({'S', s, j, o, acc / w});
      }
  }

  // One more period of outcomes: posterior over the previous type given two
  // cells, against the one-cell posterior used above.
  for (int i1 = 0; i1 < n; ++i1)
    for (int j1 = 0; j1 < m; ++j1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int j2 = 0; j2 < m; ++j2) {
          std::vector<int> kb1 = buyer_cell(p, i1, j1), kb2 = buyer_cell(p, i2, j2);
          Vector post = Vector::Zero(m);
          for (int c1 : kb1)
            for (int c2 : kb2) post(c2) += env.seller_prior(c1) * env.seller_transition(c1, c2);
          double deep = post.dot(b) / post.sum();
          out.deeper_history_gap = std::max(out.deeper_history_gap, std::abs(deep - out.extraction_B(cs.slot(i2, j2))));

          std::vector<int> ks1 = seller_cell(p, i1, j1), ks2 = seller_cell(p, i2, j2);
          Vector postS = Vector::Zero(n);
          for (int v1 : ks1)
            for (int v2 : ks2) postS(v2) += env.buyer_prior(v1) * env.buyer_transition(v1, v2);
          double deepS = postS.dot(a) / postS.sum();
          out.deeper_history_gap =
              std::max(out.deeper_history_gap, std::abs(deepS - out.extraction_S(cs.slot(i2, j2))));
        }
  out.deeper_history_flag = out.deeper_history_gap > tol;
  return out;
}

IntermediateDecision intermediate_feasible(const Environment& env, double tol) {
  IntermediateDecision d;
  d.pooled = pi_double_star(env, tol);
  d.min_component = std::min(d.pooled.pi_dstar, d.pooled.pi_dstar_state.minCoeff());
  d.feasible = d.min_component >= -tol;
  return d;
}

PriceCertificate unique_price_check(const Environment& env) {
  require_stp(env, "unique_price_check");
  PriceCertificate pc;
  pc.low_lo = env.seller_types(0);
  pc.low_hi = env.buyer_types(0);
  pc.high_lo = env.seller_types(1);
  pc.high_hi = env.buyer_types(1);
  double lo = std::max(pc.low_lo, pc.high_lo), hi = std::min(pc.low_hi, pc.high_hi);
  pc.possible = lo <= hi;
  auto iv = [](double a, double b) { return "[" + format_number(a) + ", " + format_number(b) + "]"; };
  pc.text = pc.possible ? "single price exists in " + iv(lo, hi)
                        : "impossible: " + iv(pc.low_lo, pc.low_hi) + " and " + iv(pc.high_lo, pc.high_hi) +
                              " are disjoint";
  return pc;
}

}  // namespace mechlab

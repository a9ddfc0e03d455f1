#pragma once

// Plain-loop oracles used to cross-check the library. Nothing here calls the
// linear solver or the min-max construction.

#include "mechlab/env.hpp"
#include "mechlab/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using mechlab::Environment;
using mechlab::MechanismKernel;

// W[s](i, j) for one agent, by value iteration on
//   W(s, i, j) = flow(s, i, j) + delta * sum f(i'|i) g(j'|j) W(slot(i, j), i', j').
struct Values {
  std::vector<mechlab::Matrix> B, S;
};

inline Values iterate(const Environment& env, const MechanismKernel& k, int max_iter = 200000) {
  const auto cs = env.contexts();
  const int n = env.n(), m = env.m(), slots = cs.size();
  Values w{std::vector<mechlab::Matrix>(slots, mechlab::Matrix::Zero(n, m)),
           std::vector<mechlab::Matrix>(slots, mechlab::Matrix::Zero(n, m))};
  for (int it = 0; it < max_iter; ++it) {
    Values nx = w;
    double change = 0.0;
    for (int s = 0; s < slots; ++s)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          double p = k.allocation(i, j);
          double fb = p * env.buyer_types(i) - k.buyer_payment(cs, s, i, j);
          double fs = k.seller_receipt(cs, s, i, j) - p * env.seller_types(j);
          double cb = 0.0, cS = 0.0;
          int next = cs.slot(i, j);
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < m; ++b) {
              double pr = env.buyer_transition(i, a) * env.seller_transition(j, b);
              cb += pr * w.B[next](a, b);
              cS += pr * w.S[next](a, b);
            }
          nx.B[s](i, j) = fb + env.discount * cb;
          nx.S[s](i, j) = fs + env.discount * cS;
          change = std::max({change, std::abs(nx.B[s](i, j) - w.B[s](i, j)), std::abs(nx.S[s](i, j) - w.S[s](i, j))});
        }
    w = std::move(nx);
    if (change < 1e-14) break;
  }
  return w;
}

inline double interim_B(const Environment& env, const Values& w, int s, int i) {
  auto g = env.seller_dist(s);
  double acc = 0.0;
  for (int j = 0; j < env.m(); ++j) acc += g(j) * w.B[s](i, j);
  return acc;
}

inline double interim_S(const Environment& env, const Values& w, int s, int j) {
  auto f = env.buyer_dist(s);
  double acc = 0.0;
  for (int i = 0; i < env.n(); ++i) acc += f(i) * w.S[s](i, j);
  return acc;
}

// Budget surplus of the min-max mechanism per slot:
//   E[total surplus | s] - E[U_B - U_B(v_1)] - E[U_S - U_S(c_M)]
// with VCG values from value iteration.
inline std::vector<double> pi_star(const Environment& env) {
  MechanismKernel k = mechlab::vcg_kernel(env);
  Values w = iterate(env, k);
  MechanismKernel zero = k;
  zero.buyer_transfer.setZero();
  zero.seller_transfer.setZero();
  Values gains = iterate(env, zero);  // B: p v, S: -p c
  const auto cs = env.contexts();
  std::vector<double> out(cs.size());
  for (int s = 0; s < cs.size(); ++s) {
    auto f = env.buyer_dist(s);
    auto g = env.seller_dist(s);
    double total = 0.0;
    for (int i = 0; i < env.n(); ++i)
      for (int j = 0; j < env.m(); ++j) total += f(i) * g(j) * (gains.B[s](i, j) + gains.S[s](i, j));
    double ub = 0.0, us = 0.0;
    for (int i = 0; i < env.n(); ++i) ub += f(i) * (interim_B(env, w, s, i) - interim_B(env, w, s, 0));
    for (int j = 0; j < env.m(); ++j) us += g(j) * (interim_S(env, w, s, j) - interim_S(env, w, s, env.m() - 1));
    out[s] = total - ub - us;
  }
  return out;
}

// USSTP with alpha = 1/2 (iid): every component equals
//   (2 - c + v) / (4 (1 - delta)) - (1 - v + c) / 4.
inline double usstp_iid_pi(double v, double c, double delta) {
  return (2.0 - c + v) / (4.0 * (1.0 - delta)) - (1.0 - v + c) / 4.0;
}

}  // namespace oracle

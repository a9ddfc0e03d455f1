#pragma once

#include "mechlab/env.hpp"
#include "mechlab/types.hpp"

#include <string>
#include <vector>

namespace mechlab {

// Which types of the other agent are consistent with each trade outcome.
// Indices are 0-based type indices of the other agent.
struct InfoPartition {
  std::vector<std::vector<int>> buyer_trade;     // [v]_1 = {c : c < v}
  std::vector<std::vector<int>> buyer_no_trade;  // [v]_0 = {c : c > v}
  std::vector<std::vector<int>> seller_trade;    // [c]_1 = {v : v > c}
  std::vector<std::vector<int>> seller_no_trade; // [c]_0 = {v : v < c}
};

// Requires a 2x2 STP.
InfoPartition partitions(const Environment& env);

// Value an agent believes it holds after seeing only the trade outcome.
struct PooledEntry {
  char agent = 'B';
  int context = 0;  // slot
  int own = 0;      // own current type
  int outcome = 0;  // 1 trade, 0 no trade
  double value = 0.0;
};

struct PooledValues {
  double pi_star = 0.0;
  double pi_dstar = 0.0;
  Matrix pi_star_state;   // 2 x 2
  Matrix pi_dstar_state;  // 2 x 2
  Vector extraction_B;    // per slot: pooled lowest-type rent the buyer pays
  Vector extraction_S;
  std::vector<PooledEntry> pooled;
  // Largest change in pooled extraction when the posterior is built from two
  // periods of outcomes instead of one; flagged above tol.
  double deeper_history_gap = 0.0;
  bool deeper_history_flag = false;
};

PooledValues pi_double_star(const Environment& env, double tol = 1e-9);

struct IntermediateDecision {
  bool feasible = false;
  double min_component = 0.0;
  PooledValues pooled;
};

IntermediateDecision intermediate_feasible(const Environment& env, double tol = 1e-9);

// Single price p with c_L <= p <= v_L and c_H <= p <= v_H.
struct PriceCertificate {
  bool possible = false;
  double low_lo = 0.0, low_hi = 0.0;    // [c_L, v_L]
  double high_lo = 0.0, high_hi = 0.0;  // [c_H, v_H]
  std::string text;
};

PriceCertificate unique_price_check(const Environment& env);

}  // namespace mechlab

#pragma once

#include "mechlab/env.hpp"
#include "mechlab/types.hpp"

#include <string>
#include <vector>

namespace mechlab {

using Allocation = Matrix;  // N x M, p[i][j] = probability of trade at (v_i, c_j)

// Expected utilities of a Markov mechanism, present value at the current
// period. One ex post table per context slot; for history-independent
// mechanisms all slots hold the same table. Interim rows are derived:
//   interim_B(s, i) = sum_j g(c_j | s) expost_B[s](i, j)
//   interim_S(s, j) = sum_i f(v_i | s) expost_S[s](i, j)
struct ValueTable {
  ContextSpace space;
  std::vector<Matrix> expost_B;
  std::vector<Matrix> expost_S;
  Matrix interim_B;  // slots x N
  Matrix interim_S;  // slots x M

  double initial_B(int i) const { return interim_B(0, i); }
  double initial_S(int j) const { return interim_S(0, j); }
  // U_B(v_i | c~_k): history-independent tables only depend on the seller part
  double buyer_given(int i, int seller_prev) const { return interim_B(space.slot(0, seller_prev), i); }
  double seller_given(int j, int buyer_prev) const { return interim_S(space.slot(buyer_prev, 0), j); }
};

ValueTable make_value_table(const Environment& env, std::vector<Matrix> expost_B, std::vector<Matrix> expost_S);
ValueTable stationary_value_table(const Environment& env, const Matrix& expost_B, const Matrix& expost_S);

// Largest |interim - sum of ex post| over every slot; 0 for tables built above.
double interim_consistency_gap(const Environment& env, const ValueTable& t);

// <p, U> form of a mechanism: what the checkers consume.
struct Mechanism {
  std::string name;
  Allocation allocation;
  ValueTable values;
};

}  // namespace mechlab

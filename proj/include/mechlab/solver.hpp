#pragma once

#include "mechlab/env.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/values.hpp"

#include <ostream>

namespace mechlab {

// W(s, i, j) = flow(s, i, j) + delta * C(i, j), where the continuation C
// solves (I - delta * kron(F, G)) C = r on the N*M states and r(i, j) is the
// expected flow at context (i, j). Faults on a singular system or a
// recursion residual above 1e-10 * (1 + max|U|).
ValueTable solve_stationary_values(const Environment& env, const MechanismKernel& kernel);

// Backward induction from period T, written without the linear solve.
ValueTable finite_horizon_oracle(const Environment& env, const MechanismKernel& kernel, int periods);

// Infinite horizon: stationary solve; finite horizon: the oracle at T.
ValueTable utilities_from_kernel(const Environment& env, const MechanismKernel& kernel);
Mechanism mechanism_from_kernel(const Environment& env, const MechanismKernel& kernel, std::string name);

// Largest |W - flow - delta * E[next interim]| over every slot and cell.
double recursion_residual(const Environment& env, const MechanismKernel& kernel, const ValueTable& values);

struct SurplusTable {
  double S = 0.0;
  Matrix S_state;  // N x M, expected discounted surplus from the current state
};

SurplusTable solve_surplus(const Environment& env);
SurplusTable solve_surplus(const Environment& env, const Allocation& p);

// Pi(s) = E[S(v,c) - U_B(v,c|s) - U_S(v,c|s) | s] for every context slot.
Vector budget_surplus(const Environment& env, const Mechanism& mech);

// Pi_t(s) = Pi(s) - delta * E[Pi(next) | s]: the within-period expected surplus.
Vector instantaneous_surplus(const Environment& env, const Vector& pi);

// Columns agent, own_index, other_index_or_context, value. Interim rows carry
// the context label; ex post rows are written as "c<j>@<context>" (buyer) and
// "v<i>@<context>" (seller).
void write_value_table_csv(std::ostream& os, const Environment& env, const ValueTable& t, bool with_expost);

}  // namespace mechlab

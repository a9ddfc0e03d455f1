#pragma once

#include "mechlab/env.hpp"
#include "mechlab/values.hpp"

#include <string>
#include <vector>

namespace mechlab {

// <p, x> form. The buyer pays buyer_transfer(i, j) + buyer_fee and the seller
// receives seller_transfer(i, j) - seller_fee. Fees are keyed by the other
// agent's previous report: buyer_fee has M + 1 slots (0 = period 1, 1 + l after
// seller report c_l), seller_fee has N + 1. Context tables, when present, hold
// one transfer table per context slot and replace the base tables.
struct MechanismKernel {
  Allocation allocation;
  Matrix buyer_transfer;
  Matrix seller_transfer;
  Vector buyer_fee;
  Vector seller_fee;
  std::vector<Matrix> buyer_context_transfer;
  std::vector<Matrix> seller_context_transfer;

  bool has_fees() const { return buyer_fee.size() > 0; }
  bool context_keyed() const { return !buyer_context_transfer.empty(); }
  double buyer_payment(const ContextSpace& cs, int slot, int i, int j) const;
  double seller_receipt(const ContextSpace& cs, int slot, int i, int j) const;
};

// Throws InvalidInput on shape mismatches or a half-populated fee map.
void check_kernel_shape(const Environment& env, const MechanismKernel& k);

Allocation efficient_allocation(const Environment& env);
MechanismKernel vcg_kernel(const Environment& env);
MechanismKernel zero_transfer_kernel(const Environment& env);

// Per-period flows implied by the values (inverse of the value recursion).
// Output is context-keyed; interim rows that disagree with their ex post
// tables by more than tol are rejected with the offending location.
MechanismKernel kernel_from_utilities(const Environment& env, const Allocation& p, const ValueTable& values,
                                      double tol = 1e-10);

// Columns buyer_index, seller_index, p, x_B, x_S (context-keyed kernels get a
// leading context column), then a blank line and the fee block
// context_type, fee_B, fee_S.
void write_kernel_csv(std::ostream& os, const Environment& env, const MechanismKernel& k);

}  // namespace mechlab

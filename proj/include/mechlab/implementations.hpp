#pragma once

#include "mechlab/env.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/values.hpp"

namespace mechlab {

struct FeeSchedule {
  double z_B1 = 0.0;
  double z_S1 = 0.0;
  Vector z_B;  // indexed by the seller's previous type c_j
  Vector z_S;  // indexed by the buyer's previous type v_i
};

FeeSchedule fee_schedule(const Environment& env);

// VCG stage every period plus the participation fees above.
MechanismKernel fee_kernel(const Environment& env);

// One weight per context slot.
struct BetaWeights {
  Vector buyer;
  Vector seller;
};

BetaWeights uniform_beta(const Environment& env, double buyer, double seller);

Mechanism minmax_mechanism(const Environment& env);

// U* + beta * Pi*(context), context by context. Rejects weights outside
// beta >= 0, beta_B + beta_S <= 1 and environments with a negative component.
Mechanism beta_mechanism(const Environment& env, const BetaWeights& w, double tol = 1e-9);
Mechanism zero_surplus_mechanism(const Environment& env, double tol = 1e-9);

// Shift by beta * Pi(context) (buyer) and (1 - beta) * Pi(context) (seller) so
// the budget surplus is zero, recover per-period payments, then balance:
//   x(v, c | s) = E_v[x_S(v, c | s)] + E_c[x_B(v, c | s)] - E_{v,c}[x_B | s].
// Both context tables of the output hold the same bits.
MechanismKernel interim_to_expost(const Environment& env, const Mechanism& mech, double beta = 0.5,
                                  double tol = 1e-9);

// interim_to_expost applied to the zero-surplus mechanism.
MechanismKernel expost_transfers(const Environment& env, double tol = 1e-9);

struct BondReport {
  double upfront_B = 0.0;  // U^vcg_B(v_1) collected in period 1
  double upfront_S = 0.0;  // U^vcg_S(c_M)
  double max_fee = 0.0;    // max |z_B| over all contexts of the fee schedule
  double ratio_percent = 0.0;
};

BondReport bond_mechanism(const Environment& env, double tol = 1e-9);

// VCG every period with the bond charged once, in period 1.
MechanismKernel bond_kernel(const Environment& env);

// Reads a mechanism as U* + a(context) and reports a / Pi*; the constancy
// gap says how far the shift varies with the agent's own type.
struct BetaDecomposition {
  BetaWeights weights;
  double constancy_gap = 0.0;
};

BetaDecomposition decompose_against_minmax(const Environment& env, const Mechanism& mech);

}  // namespace mechlab

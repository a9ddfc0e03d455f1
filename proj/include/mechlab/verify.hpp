#pragma once

#include "mechlab/env.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/values.hpp"

#include <string>

namespace mechlab {

// worst is the largest signed violation (negative = slack everywhere);
// pass <=> worst <= tol.
struct CheckReport {
  std::string family;
  bool pass = true;
  double worst = 0.0;
  std::string where;
  long checked = 0;
  double tol = 0.0;
  std::string note;
};

inline constexpr double kCheckTol = 1e-8;

// One-shot deviations at period 1 and every Markov context, every
// (true, reported) pair.
CheckReport check_ic(const Environment& env, const Mechanism& mech, double tol = kCheckTol);
// Same inequalities for each fixed current type of the other agent.
CheckReport check_expost_ic(const Environment& env, const Mechanism& mech, double tol = kCheckTol);
CheckReport check_ir(const Environment& env, const Mechanism& mech, double tol = kCheckTol);
CheckReport check_expost_ir(const Environment& env, const Mechanism& mech, double tol = kCheckTol);
CheckReport check_interim_bb(const Environment& env, const Mechanism& mech, double tol = kCheckTol);
// Exact: buyer payment and seller receipt must be the same double everywhere.
CheckReport check_expost_bb(const Environment& env, const MechanismKernel& kernel);
// Local downward (buyer) and upward (seller) constraints as equalities plus
// a monotone allocation; |gap| is reported as worst.
CheckReport check_tight(const Environment& env, const Mechanism& mech, double tol = kCheckTol);

// Best deviation plan over the next `depth` periods (reports may depend on
// the true type and the public context), truthful afterwards, found by
// dynamic programming over payments recovered from the values.
CheckReport check_ic_depth(const Environment& env, const Mechanism& mech, int depth, double tol = kCheckTol);

// Deviation value of reporting `report` with true type `truth` at `slot`.
double buyer_deviation_value(const Environment& env, const Mechanism& mech, int slot, int truth, int report);
double seller_deviation_value(const Environment& env, const Mechanism& mech, int slot, int truth, int report);

// Context-keyed constants added to every value of the agent (a_B, a_S have
// one entry per slot).
Mechanism payoff_translate(const Environment& env, const Mechanism& mech, const Vector& a_B, const Vector& a_S);
// Constants may also depend on the other agent's current type:
// a_B is slots x M, a_S is slots x N.
Mechanism payoff_translate_expost(const Environment& env, const Mechanism& mech, const Matrix& a_B,
                                  const Matrix& a_S);

}  // namespace mechlab

#include "doctest.h"
#include "mechlab/feasibility.hpp"
#include "mechlab/implementations.hpp"
#include "mechlab/solver.hpp"
#include "mechlab/verify.hpp"
#include "support.hpp"

#include <cmath>

using namespace mechlab;

TEST_CASE("fees of the iid usstp") {
  // U(v_L | any) = 4.5125 so z = 4.5125 - 0.95 * 4.5125 everywhere
  FeeSchedule fs = fee_schedule(make_usstp(0.05, 0.95, 0.5, 0.95));
  CHECK(std::abs(fs.z_B1 - 0.225625) < 1e-9);
  CHECK(std::abs(fs.z_B(0) - 0.225625) < 1e-9);
  CHECK(std::abs(fs.z_B(1) - 0.225625) < 1e-9);
  CHECK(std::abs(fs.z_S(0) - 0.225625) < 1e-9);
  CHECK(std::abs(fs.z_S1 - 0.225625) < 1e-9);
}

TEST_CASE("fee kernel implements the min-max values") {
  for (int trial = 0; trial < 20; ++trial) {
    Environment e = sample_environment(900 + trial, 1 + trial % 4, 1 + (trial / 4) % 4, 0.85);
    Mechanism fee = mechanism_from_kernel(e, fee_kernel(e), "fee");
    Mechanism mm = minmax_mechanism(e);
    CHECK((fee.values.interim_B - mm.values.interim_B).cwiseAbs().maxCoeff() < 1e-9 / 0.15);
    CHECK((fee.values.interim_S - mm.values.interim_S).cwiseAbs().maxCoeff() < 1e-9 / 0.15);
  }
}

TEST_CASE("bond of the iid usstp is twenty times the fee") {
  BondReport b = bond_mechanism(make_usstp(0.05, 0.95, 0.5, 0.95));
  CHECK(b.upfront_B == doctest::Approx(4.5125));
  CHECK(b.max_fee == doctest::Approx(0.225625));
  CHECK(b.ratio_percent == doctest::Approx(2000.0));
}

TEST_CASE("bond kernel charges once") {
  Environment e = make_usstp(0.05, 0.95, 0.7, 0.95);
  MechanismKernel k = bond_kernel(e);
  Mechanism m = mechanism_from_kernel(e, k, "bond");
  CHECK(std::abs(m.values.initial_B(0)) < 1e-9);
  CHECK(std::abs(m.values.initial_S(1)) < 1e-9);
  for (int t = 1; t < k.buyer_fee.size(); ++t) CHECK(k.buyer_fee(t) == 0.0);
  // later contexts keep the VCG rent
  CHECK(m.values.interim_B(1, 0) > 1.0);
}

TEST_CASE("beta family") {
  Environment e = make_usstp(0.05, 0.95, 0.7, 0.95);
  SurplusVector sv = pi_star(e);
  Mechanism mm = minmax_mechanism(e);
  Mechanism b = beta_mechanism(e, uniform_beta(e, 0.25, 0.5));
  auto cs = e.contexts();
  Vector pi = sv.by_slot();
  for (int s = 0; s < cs.size(); ++s) {
    CHECK(b.values.interim_B(s, 1) == doctest::Approx(mm.values.interim_B(s, 1) + 0.25 * pi(s)));
    CHECK(b.values.interim_S(s, 0) == doctest::Approx(mm.values.interim_S(s, 0) + 0.5 * pi(s)));
  }
  Vector left = budget_surplus(e, b);
  for (int s = 0; s < cs.size(); ++s) CHECK(left(s) == doctest::Approx(0.25 * pi(s)).epsilon(1e-9));

  BetaDecomposition d = decompose_against_minmax(e, b);
  CHECK(d.constancy_gap < 1e-9);
  CHECK(d.weights.buyer(3) == doctest::Approx(0.25));

  CHECK_THROWS_AS(beta_mechanism(e, uniform_beta(e, 0.7, 0.5)), InvalidInput);
  CHECK_THROWS_AS(beta_mechanism(e, uniform_beta(e, -0.1, 0.5)), InvalidInput);
  CHECK_THROWS_AS(beta_mechanism(make_usstp(0.05, 0.95, 0.9, 0.5), uniform_beta(e, 0.5, 0.5)), InvalidInput);
}

TEST_CASE("zero-surplus mechanism leaves nothing") {
  Environment e = make_usstp(0.05, 0.95, 0.8, 0.95);
  Vector left = budget_surplus(e, zero_surplus_mechanism(e));
  CHECK(left.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ex post transfers balance and reproduce the target values") {
  Environment e = make_usstp(0.05, 0.95, 0.8, 0.95);
  MechanismKernel k = expost_transfers(e);
  CHECK(check_expost_bb(e, k).pass);
  auto cs = e.contexts();
  for (int s = 0; s < cs.size(); ++s) CHECK(k.buyer_context_transfer[s] == k.seller_context_transfer[s]);
  Mechanism got = mechanism_from_kernel(e, k, "expost");
  Mechanism want = zero_surplus_mechanism(e);
  CHECK((got.values.interim_B - want.values.interim_B).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((got.values.interim_S - want.values.interim_S).cwiseAbs().maxCoeff() < 1e-9);
  // at alpha = 1/2 the first entries of the ex post table are history free
  MechanismKernel iid = expost_transfers(make_usstp(0.05, 0.95, 0.5, 0.95));
  CHECK(iid.buyer_context_transfer[cs.slot(1, 0)](1, 0) == doctest::Approx(0.625));
  CHECK(iid.buyer_context_transfer[cs.slot(0, 1)](0, 1) == doctest::Approx(0.125));
}

TEST_CASE("ex post construction with a lopsided split") {
  Environment e = sample_environment(77, 3, 2, 0.9);
  REQUIRE(is_efficient_feasible(e).feasible);
  Mechanism mm = minmax_mechanism(e);
  MechanismKernel k = interim_to_expost(e, mm, 0.2);
  Mechanism got = mechanism_from_kernel(e, k, "x");
  Vector pi = pi_star(e).by_slot();
  for (int s = 0; s < e.contexts().size(); ++s) {
    for (int i = 0; i < e.n(); ++i)
      CHECK(got.values.interim_B(s, i) == doctest::Approx(mm.values.interim_B(s, i) + 0.2 * pi(s)).epsilon(1e-9));
    for (int j = 0; j < e.m(); ++j)
      CHECK(got.values.interim_S(s, j) == doctest::Approx(mm.values.interim_S(s, j) + 0.8 * pi(s)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(interim_to_expost(e, mm, 1.5), InvalidInput);
}

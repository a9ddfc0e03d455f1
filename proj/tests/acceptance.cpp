// One line per acceptance criterion; exit status 1 if any fails.

#include "mechlab/csv.hpp"
#include "mechlab/feasibility.hpp"
#include "mechlab/implementations.hpp"
#include "mechlab/intermediate.hpp"
#include "mechlab/scan.hpp"
#include "mechlab/solver.hpp"
#include "mechlab/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace mechlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const std::array<double, 5> kAlphas{0.5, 0.6, 0.7, 0.8, 0.9};

Environment usstp(double alpha, double delta = 0.95) { return make_usstp(0.05, 0.95, alpha, delta); }

// alpha: z_B(c_H), z_B(c_L), z_B1
const double kTable1[5][3] = {{0.225, 0.225, 0.225},
                              {0.215, 0.230, 0.222},
                              {0.192, 0.243, 0.218},
                              {0.160, 0.259, 0.209},
                              {0.114, 0.261, 0.188}};
const double kTable2[5] = {2000, 1934, 1790, 1619, 1437};
// x(vH,cL | vH,cL), x(vH,cL | vH,cH), x(vL,cH | vL,cH), x(vL,cH | vH,cH)
const double kTable3[5][4] = {{0.625, 0.625, 0.125, 0.125},
                              {0.596, 0.742, 0.009, 0.118},
                              {0.567, 0.879, -0.096, 0.043},
                              {0.540, 1.090, -0.195, -0.178},
                              {0.517, 1.607, -0.289, -0.8831}};

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s %s: %s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
  std::fflush(stdout);
}

std::string num(double x) { return format_number(x); }

std::vector<GridPoint> scan_grid() {
  std::vector<GridPoint> g;
  for (double a : kAlphas)
    for (double d : make_grid(0.05, 0.95, 0.05)) g.push_back({a, d});
  return g;
}

// Feasible environments for the property suites: the usstp grid plus sampled ones.
std::vector<Environment> feasible_pool() {
  std::vector<Environment> pool;
  for (const auto& p : scan_grid()) {
    Environment e = usstp(p.alpha, p.delta);
    if (is_efficient_feasible(e).feasible) pool.push_back(e);
  }
  for (std::uint64_t seed = 1; pool.size() < 120 && seed < 5000; ++seed) {
    int n = 1 + static_cast<int>(seed % 4), m = 1 + static_cast<int>((seed / 4) % 4);
    Environment e = sample_environment(seed, n, m, 0.7 + 0.25 * ((seed * 7) % 10) / 10.0);
    if (is_efficient_feasible(e).feasible) pool.push_back(e);
  }
  return pool;
}

}  // namespace

int main() {
  report(1, "fee table", [] {
    auto t0 = Clock::now();
    double worst = 0.0;
    std::string at;
    for (int r = 0; r < 5; ++r) {
      FeeSchedule fs = fee_schedule(usstp(kAlphas[r]));
      double got[3] = {fs.z_B(1), fs.z_B(0), fs.z_B1};
      for (int c = 0; c < 3; ++c)
        if (std::abs(got[c] - kTable1[r][c]) > worst) {
          worst = std::abs(got[c] - kTable1[r][c]);
          at = "alpha " + num(kAlphas[r]) + " col " + std::to_string(c + 1);
        }
    }
    double secs = seconds_since(t0);
    return Outcome{worst <= 2e-3 && secs < 1.0,
                   "max |err| " + num(worst) + " at " + at + " (tol 2e-3), " + num(secs) + " s"};
  });

  report(2, "bond ratio", [] {
    double worst = 0.0;
    std::ostringstream got;
    for (int r = 0; r < 5; ++r) {
      double ratio = bond_mechanism(usstp(kAlphas[r])).ratio_percent;
      worst = std::max(worst, std::abs(ratio - kTable2[r]));
      got << (r ? " " : "") << num(std::round(ratio * 100) / 100);
    }
    return Outcome{worst <= 1.0, "ratios " + got.str() + "; max |err| " + num(worst) + " pp (tol 1)"};
  });

  report(3, "ex post transfers", [] {
    int bad = 0;
    std::ostringstream miss;
    for (int r = 0; r < 5; ++r) {
      Environment e = usstp(kAlphas[r]);
      MechanismKernel k = expost_transfers(e);
      auto cs = e.contexts();
      const auto& x = k.buyer_context_transfer;
      double got[4] = {x[cs.slot(1, 0)](1, 0), x[cs.slot(1, 1)](1, 0), x[cs.slot(0, 1)](0, 1), x[cs.slot(1, 1)](0, 1)};
      for (int c = 0; c < 4; ++c) {
        double tol = (r == 4 && c == 3) ? 5e-4 : 2e-3;
        if (std::abs(got[c] - kTable3[r][c]) > tol) {
          if (bad < 4) miss << (bad ? "; " : "") << "alpha " << num(kAlphas[r]) << " col " << c + 1 << " got "
                            << num(std::round(got[c] * 1e4) / 1e4) << " want " << num(kTable3[r][c]);
          ++bad;
        }
      }
    }
    return Outcome{bad == 0, std::to_string(20 - bad) + "/20 entries within tolerance" +
                                 (bad ? " (" + miss.str() + (bad > 4 ? "; ..." : "") + ")" : "")};
  });

  report(4, "analytic anchor", [] {
    // iid: U(v_L) = 0.95 * (0.5 * 0.5 * 0.95) / 0.05, z = U (1 - 0.95)
    Environment e = usstp(0.5);
    ValueTable t = solve_stationary_values(e, vcg_kernel(e));
    double worst_u = 0.0;
    for (int s = 0; s < e.contexts().size(); ++s) worst_u = std::max(worst_u, std::abs(t.interim_B(s, 0) - 4.5125));
    FeeSchedule fs = fee_schedule(e);
    double worst_z = std::max({std::abs(fs.z_B1 - 0.225625), std::abs(fs.z_B(0) - 0.225625),
                               std::abs(fs.z_B(1) - 0.225625)});
    return Outcome{worst_u <= 1e-9 && worst_z <= 1e-9,
                   "|U - 4.5125| " + num(worst_u) + ", |z - 0.225625| " + num(worst_z)};
  });

  report(5, "static impossibility", [] {
    int checked = 0, wrong = 0;
    // symmetric gaps: c = 1 - v, so c - v > 1/2 iff v < 1/4
    for (double v : {0.01, 0.05, 0.1, 0.2, 0.24, 0.249, 0.251, 0.26, 0.3, 0.4, 0.45, 0.49}) {
      double c = 1.0 - v;
      bool feasible = is_efficient_feasible(make_usstp(v, c, 0.5, 0.0)).feasible;
      ++checked;
      if (feasible != (c - v < 0.5)) ++wrong;
    }
    return Outcome{wrong == 0, std::to_string(checked - wrong) + "/" + std::to_string(checked) +
                                   " (v, c) pairs classified by c - v vs 1/2 at delta = 0"};
  });

  report(6, "surplus shape", [] {
    auto grid = scan_grid();
    auto rows = scan_parallel([](double a, double d) { return usstp(a, d); }, grid, 1e-9);
    bool a_ok = true, b_ok = true, c_ok = true, dA_ok = true, dD_ok = true;
    std::array<bool, 5> comp_ok{true, true, true, true, true};
    const char* names[5] = {"ex ante", "(v_L,c_L)", "(v_L,c_H)", "(v_H,c_L)", "(v_H,c_H)"};
    std::string dA_where, dD_where;
    const double eps = 1e-9;
    const int nd = static_cast<int>(grid.size() / kAlphas.size());
    // row layout: alpha-major, delta inner; state(i, j) with v_H = 1, c_L = 0
    auto comp = [&](const ScanRow& r, int c) { return c == 0 ? r.pi_star : r.state((c - 1) / 2, (c - 1) % 2); };
    for (int ia = 0; ia < 5; ++ia)
      for (int id = 0; id < nd; ++id) {
        const ScanRow& r = rows[ia * nd + id];
        double scale = std::max(1.0, std::abs(r.pi_star));
        if (ia == 0)
          for (int c = 1; c < 5; ++c) a_ok = a_ok && std::abs(comp(r, c) - r.pi_star) <= eps * scale;
        b_ok = b_ok && r.state(1, 0) <= r.state.minCoeff() + eps * scale;
        c_ok = c_ok && std::abs(r.state(1, 1) - r.state(0, 0)) <= eps * scale;
        for (int c = 0; c < 5; ++c) {
          if ((ia > 0 && comp(r, c) > comp(rows[(ia - 1) * nd + id], c) + eps * scale) ||
              (id > 0 && comp(r, c) < comp(rows[ia * nd + id - 1], c) - eps * scale))
            comp_ok[c] = false;
          if (ia > 0 && comp(r, c) > comp(rows[(ia - 1) * nd + id], c) + eps * scale) {
            if (dA_ok) dA_where = "component " + std::to_string(c) + " at delta " + num(r.delta) + ", alpha " +
                                  num(kAlphas[ia - 1]) + " -> " + num(kAlphas[ia]);
            dA_ok = false;
          }
          if (id > 0 && comp(r, c) < comp(rows[ia * nd + id - 1], c) - eps * scale) {
            if (dD_ok) dD_where = "component " + std::to_string(c) + " at alpha " + num(r.alpha);
            dD_ok = false;
          }
        }
      }
    std::string d = std::string("(a) ") + (a_ok ? "ok" : "no") + ", (b) " + (b_ok ? "ok" : "no") + ", (c) " +
                    (c_ok ? "ok" : "no") + ", (d) alpha " + (dA_ok ? "ok" : "no [first: " + dA_where + "]") +
                    ", delta " + (dD_ok ? "ok" : "no [first: " + dD_where + "]");
    std::string held;
    for (int c = 0; c < 5; ++c)
      if (comp_ok[c]) held += std::string(held.empty() ? "" : ", ") + names[c];
    d += "; monotone in both: " + (held.empty() ? std::string("none") : held) +
         "; grid alpha 0.5:0.9:0.1 x delta 0.05:0.95:0.05";
    return Outcome{a_ok && b_ok && c_ok && dA_ok && dD_ok, d};
  });

  report(7, "oracle equivalence", [] {
    auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(1, 4);
    std::uniform_real_distribution<double> disc(0.05, 0.97);
    int bad = 0, runs = 0;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Environment e = sample_environment(rng(), size(rng), size(rng), disc(rng));
      for (const MechanismKernel& k : {vcg_kernel(e), fee_kernel(e)}) {
        ValueTable inf = solve_stationary_values(e, k);
        double max_flow = 0.0;
        auto cs = e.contexts();
        for (int s = 0; s < cs.size(); ++s)
          for (int i = 0; i < e.n(); ++i)
            for (int j = 0; j < e.m(); ++j) {
              double p = k.allocation(i, j);
              max_flow = std::max({max_flow, std::abs(p * e.buyer_types(i) - k.buyer_payment(cs, s, i, j)),
                                   std::abs(k.seller_receipt(cs, s, i, j) - p * e.seller_types(j))});
            }
        for (int T : {50, 200}) {
          ValueTable fin = finite_horizon_oracle(e, k, T);
          double gap = 0.0;
          for (int s = 0; s < cs.size(); ++s)
            gap = std::max({gap, (inf.expost_B[s] - fin.expost_B[s]).cwiseAbs().maxCoeff(),
                            (inf.expost_S[s] - fin.expost_S[s]).cwiseAbs().maxCoeff()});
          // rounding allowance once the tail bound underflows
          double bound = std::pow(e.discount, T) * max_flow / (1.0 - e.discount) + 1e-12 / (1.0 - e.discount);
          worst_ratio = std::max(worst_ratio, gap / bound);
          ++runs;
          if (gap > bound) ++bad;
        }
      }
    }
    double secs = seconds_since(t0);
    return Outcome{bad == 0 && secs < 30.0, std::to_string(runs - bad) + "/" + std::to_string(runs) +
                                                " within the tail bound (worst gap/bound " + num(worst_ratio) +
                                                "), " + num(secs) + " s"};
  });

  report(8, "constraint suite", [] {
    int points = 0, bad = 0;
    std::string first;
    for (const auto& p : scan_grid()) {
      Environment e = usstp(p.alpha, p.delta);
      if (!is_efficient_feasible(e).feasible) continue;
      ++points;
      Mechanism mm = minmax_mechanism(e);
      std::vector<CheckReport> reps{check_ic(e, mm, 1e-7), check_expost_ic(e, mm, 1e-7), check_ir(e, mm, 1e-7),
                                    check_interim_bb(e, mm, 1e-7), check_tight(e, mm, 1e-7)};
      bool ok = true;
      for (const auto& r : reps)
        if (!r.pass) {
          ok = false;
          if (first.empty()) first = r.family + " at alpha " + num(p.alpha) + " delta " + num(p.delta);
        }
      for (int s = 0; s < e.contexts().size(); ++s)
        if (std::abs(mm.values.interim_B(s, 0)) > 1e-7 || std::abs(mm.values.interim_S(s, e.m() - 1)) > 1e-7) {
          ok = false;
          if (first.empty()) first = "IR slack at the lowest type, slot " + std::to_string(s);
        }
      if (!ok) ++bad;
    }
    return Outcome{bad == 0 && points > 0, std::to_string(points - bad) + "/" + std::to_string(points) +
                                               " feasible grid points pass" + (first.empty() ? "" : "; " + first)};
  });

  report(9, "interim to ex post", [] {
    std::vector<Environment> pool = feasible_pool();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int cases = 0, bad = 0;
    double worst_value = 0.0;
    std::string first;
    auto run = [&](const Environment& e, const Mechanism& m, const std::string& what) {
      ++cases;
      MechanismKernel k = interim_to_expost(e, m);
      Mechanism got = mechanism_from_kernel(e, k, "dagger");
      Vector left = budget_surplus(e, m);
      double gap = 0.0;
      for (int s = 0; s < e.contexts().size(); ++s) {
        for (int i = 0; i < e.n(); ++i)
          gap = std::max(gap, std::abs(got.values.interim_B(s, i) - (m.values.interim_B(s, i) + 0.5 * left(s))));
        for (int j = 0; j < e.m(); ++j)
          gap = std::max(gap, std::abs(got.values.interim_S(s, j) - (m.values.interim_S(s, j) + 0.5 * left(s))));
      }
      worst_value = std::max(worst_value, gap);
      bool ok = check_expost_bb(e, k).pass && check_ic(e, got, 1e-7).pass && check_ir(e, got, 1e-7).pass &&
                gap <= 1e-9;
      if (!ok) {
        ++bad;
        if (first.empty()) first = what;
      }
    };
    for (size_t k = 0; k < pool.size(); k += 8) {
      run(pool[k], minmax_mechanism(pool[k]), "minmax #" + std::to_string(k));
      run(pool[k], zero_surplus_mechanism(pool[k]), "zero #" + std::to_string(k));
    }
    for (int t = 0; t < 50; ++t) {
      const Environment& e = pool[(t * 37) % pool.size()];
      const int slots = e.contexts().size();
      BetaWeights w{Vector(slots), Vector(slots)};
      for (int s = 0; s < slots; ++s) {
        double a = u(rng), b = u(rng);
        w.buyer(s) = std::min(a, b);
        w.seller(s) = std::abs(a - b);
      }
      run(e, beta_mechanism(e, w), "beta #" + std::to_string(t));
    }
    return Outcome{bad == 0, std::to_string(cases - bad) + "/" + std::to_string(cases) +
                                 " mechanisms (min-max, zero-surplus, 50 beta) pass; worst interim drift " +
                                 num(worst_value) + (first.empty() ? "" : "; first failure " + first)};
  });

  report(10, "intermediate mechanism", [] {
    bool ante = true, equal_lh = true, signs = true, iid_equal = true;
    int points = 0;
    for (const auto& p : scan_grid()) {
      PooledValues pv = pi_double_star(usstp(p.alpha, p.delta));
      ++points;
      ante = ante && std::abs(pv.pi_dstar - pv.pi_star) <= 1e-9;
      equal_lh = equal_lh && std::abs(pv.pi_dstar_state(0, 1) - pv.pi_star_state(0, 1)) <= 1e-9;
      if (p.alpha > 0.5)
        signs = signs && pv.pi_dstar_state(1, 1) > pv.pi_star_state(1, 1) &&
                pv.pi_dstar_state(1, 0) < pv.pi_star_state(1, 0);
      else
        iid_equal = iid_equal && (pv.pi_dstar_state - pv.pi_star_state).cwiseAbs().maxCoeff() <= 1e-9;
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int stps = 0, impossible = 0;
    for (int t = 0; t < 200; ++t) {
      std::array<double, 4> x{u(rng), u(rng), u(rng), u(rng)};
      std::sort(x.begin(), x.end());
      if (x[0] == x[1] || x[1] == x[2] || x[2] == x[3]) continue;
      StpSpec s;
      s.c_low = x[0];
      s.v_low = x[1];
      s.c_high = x[2];
      s.v_high = x[3];
      s.buyer_high_prob = 0.05 + 0.9 * u(rng);
      s.seller_high_prob = 0.05 + 0.9 * u(rng);
      s.alpha_high = s.alpha_low = s.beta_high = s.beta_low = 0.5 + 0.49 * u(rng);
      ++stps;
      if (unique_price_check(make_stp(s)).text.rfind("impossible", 0) == 0) ++impossible;
    }
    bool ok = ante && equal_lh && signs && iid_equal && impossible == stps;
    return Outcome{ok, std::string("ex ante ") + (ante ? "ok" : "no") + ", (v_L,c_H) equality " +
                           (equal_lh ? "ok" : "no") + ", strict signs for alpha > 1/2 " + (signs ? "ok" : "no") +
                           ", all equal at alpha = 1/2 " + (iid_equal ? "ok" : "no") + " over " +
                           std::to_string(points) + " grid points; price impossible on " + std::to_string(impossible) +
                           "/" + std::to_string(stps) + " random STPs"};
  });

  report(11, "translation invariance", [] {
    std::vector<Environment> pool = feasible_pool();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    int bad_interim = 0, bad_expost = 0;
    for (int t = 0; t < 100; ++t) {
      const Environment& e = pool[(t * 13) % pool.size()];
      const int slots = e.contexts().size();
      Mechanism mm = minmax_mechanism(e);
      Vector aB(slots), aS(slots);
      Matrix xB(slots, e.m()), xS(slots, e.n());
      for (int s = 0; s < slots; ++s) {
        aB(s) = u(rng);
        aS(s) = u(rng);
        for (int j = 0; j < e.m(); ++j) xB(s, j) = u(rng);
        for (int i = 0; i < e.n(); ++i) xS(s, i) = u(rng);
      }
      if (!check_ic(e, payoff_translate(e, mm, aB, aS), 1e-7).pass) ++bad_interim;
      if (!check_expost_ic(e, payoff_translate_expost(e, mm, xB, xS), 1e-7).pass) ++bad_expost;
    }
    return Outcome{bad_interim == 0 && bad_expost == 0,
                   "interim IC kept in " + std::to_string(100 - bad_interim) + "/100, ex post IC kept in " +
                       std::to_string(100 - bad_expost) + "/100"};
  });

  // trends on finite grids; not a numbered criterion
  {
    bool ok = true;
    std::string d;
    try {
      double prev = 1.0;
      std::ostringstream os;
      for (double alpha : {0.9, 0.8, 0.7, 0.6, 0.5}) {
        DeltaThreshold t = delta_threshold(usstp(alpha, 0.0), 0.02, 1e-6);
        ok = ok && t.kind == DeltaThreshold::Kind::crossing && t.delta_star <= prev;
        prev = t.delta_star;
        os << (alpha < 0.9 ? " " : "") << num(std::round(t.delta_star * 1e4) / 1e4);
      }
      AlphaThreshold a = alpha_threshold(usstp(0.5, 0.0), LambdaKind::mix_identity, 0.9, 0.0, 0.98, 0.02);
      ok = ok && a.feasible_at_start && !a.profile.back().feasible;
      d = "delta* for alpha 0.9..0.5: " + os.str() + "; mix family at delta 0.9 loses feasibility above alpha " +
          num(a.alpha_star);
    } catch (const std::exception& e) {
      ok = false;
      d = e.what();
    }
    if (!ok) ++failures;
    std::printf("trends %s threshold scans: %s\n", ok ? "PASS" : "FAIL", d.c_str());
  }

  std::printf("%d failing\n", failures);
  return failures ? 1 : 0;
}

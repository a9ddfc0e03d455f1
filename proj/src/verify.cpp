#include "mechlab/verify.hpp"

#include "mechlab/csv.hpp"
#include "mechlab/solver.hpp"

#include <cmath>
#include <limits>

namespace mechlab {

namespace {

struct Tracker {
  CheckReport r;
  Tracker(std::string family, double tol) {
    r.family = std::move(family);
    r.tol = tol;
    r.worst = -std::numeric_limits<double>::infinity();
  }
  template <class Where>
  void see(double violation, Where&& where) {
    ++r.checked;
    if (violation > r.worst) {
      r.worst = violation;
      r.where = where();
    }
  }
  CheckReport done() {
    if (r.checked == 0) r.worst = 0.0;
    r.pass = r.worst <= r.tol;
    return r;
  }
};

std::string v_lbl(int i) { return "v" + std::to_string(i + 1); }
std::string c_lbl(int j) { return "c" + std::to_string(j + 1); }

// Belief-shift continuation term of a buyer who is v_i but reported v_r.
double buyer_shift(const Environment& env, const ValueTable& t, int truth, int report, int seller_now) {
  int next = t.space.slot(report, seller_now);
  return env.discount *
         (env.buyer_transition.row(truth) - env.buyer_transition.row(report)).dot(t.interim_B.row(next));
}

double seller_shift(const Environment& env, const ValueTable& t, int truth, int report, int buyer_now) {
  int next = t.space.slot(buyer_now, report);
  return env.discount *
         (env.seller_transition.row(truth) - env.seller_transition.row(report)).dot(t.interim_S.row(next));
}

double buyer_dev_expost(const Environment& env, const Mechanism& mech, int s, int truth, int report, int j) {
  const ValueTable& t = mech.values;
  double gain = (env.buyer_types(truth) - env.buyer_types(report)) * mech.allocation(report, j);
  return t.expost_B[s](report, j) + gain + buyer_shift(env, t, truth, report, j);
}

double seller_dev_expost(const Environment& env, const Mechanism& mech, int s, int truth, int report, int i) {
  const ValueTable& t = mech.values;
  double gain = (env.seller_types(report) - env.seller_types(truth)) * mech.allocation(i, report);
  return t.expost_S[s](i, report) + gain + seller_shift(env, t, truth, report, i);
}

}  // namespace

double buyer_deviation_value(const Environment& env, const Mechanism& mech, int s, int truth, int report) {
  Vector g = env.seller_dist(s);
  double v = 0.0;
  for (int j = 0; j < env.m(); ++j) v += g(j) * buyer_dev_expost(env, mech, s, truth, report, j);
  return v;
}

double seller_deviation_value(const Environment& env, const Mechanism& mech, int s, int truth, int report) {
  Vector f = env.buyer_dist(s);
  double v = 0.0;
  for (int i = 0; i < env.n(); ++i) v += f(i) * seller_dev_expost(env, mech, s, truth, report, i);
  return v;
}

CheckReport check_ic(const Environment& env, const Mechanism& mech, double tol) {
  Tracker tr("ic", tol);
  const ValueTable& t = mech.values;
  const ContextSpace cs = env.contexts();
  for (int s = 0; s < cs.size(); ++s) {
    for (int i = 0; i < env.n(); ++i)
      for (int r = 0; r < env.n(); ++r)
        if (r != i)
          tr.see(buyer_deviation_value(env, mech, s, i, r) - t.interim_B(s, i),
                 [&] { return "buyer " + v_lbl(i) + " reports " + v_lbl(r) + " at " + cs.label(s); });
    for (int j = 0; j < env.m(); ++j)
      for (int r = 0; r < env.m(); ++r)
        if (r != j)
          tr.see(seller_deviation_value(env, mech, s, j, r) - t.interim_S(s, j),
                 [&] { return "seller " + c_lbl(j) + " reports " + c_lbl(r) + " at " + cs.label(s); });
  }
  return tr.done();
}

CheckReport check_expost_ic(const Environment& env, const Mechanism& mech, double tol) {
  Tracker tr("expost_ic", tol);
  const ValueTable& t = mech.values;
  const ContextSpace cs = env.contexts();
  for (int s = 0; s < cs.size(); ++s) {
    for (int i = 0; i < env.n(); ++i)
      for (int r = 0; r < env.n(); ++r)
        for (int j = 0; j < env.m() && r != i; ++j)
          tr.see(buyer_dev_expost(env, mech, s, i, r, j) - t.expost_B[s](i, j), [&] {
            return "buyer " + v_lbl(i) + " reports " + v_lbl(r) + " against " + c_lbl(j) + " at " + cs.label(s);
          });
    for (int j = 0; j < env.m(); ++j)
      for (int r = 0; r < env.m(); ++r)
        for (int i = 0; i < env.n() && r != j; ++i)
          tr.see(seller_dev_expost(env, mech, s, j, r, i) - t.expost_S[s](i, j), [&] {
            return "seller " + c_lbl(j) + " reports " + c_lbl(r) + " against " + v_lbl(i) + " at " + cs.label(s);
          });
  }
  return tr.done();
}

CheckReport check_ir(const Environment& env, const Mechanism& mech, double tol) {
  Tracker tr("ir", tol);
  const ValueTable& t = mech.values;
  const ContextSpace cs = env.contexts();
  for (int s = 0; s < cs.size(); ++s) {
    for (int i = 0; i < env.n(); ++i)
      tr.see(-t.interim_B(s, i), [&] { return "buyer " + v_lbl(i) + " at " + cs.label(s); });
    for (int j = 0; j < env.m(); ++j)
      tr.see(-t.interim_S(s, j), [&] { return "seller " + c_lbl(j) + " at " + cs.label(s); });
  }
  return tr.done();
}

CheckReport check_expost_ir(const Environment& env, const Mechanism& mech, double tol) {
  Tracker tr("expost_ir", tol);
  const ValueTable& t = mech.values;
  const ContextSpace cs = env.contexts();
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < env.n(); ++i)
      for (int j = 0; j < env.m(); ++j) {
        auto where = [&] { return v_lbl(i) + c_lbl(j) + " at " + cs.label(s); };
        tr.see(-t.expost_B[s](i, j), [&] { return "buyer " + where(); });
        tr.see(-t.expost_S[s](i, j), [&] { return "seller " + where(); });
      }
  return tr.done();
}

CheckReport check_interim_bb(const Environment& env, const Mechanism& mech, double tol) {
  Tracker tr("interim_bb", tol);
  Vector pi = budget_surplus(env, mech);
  const ContextSpace cs = env.contexts();
  for (int s = 0; s < cs.size(); ++s) tr.see(-pi(s), [&] { return cs.label(s); });
  return tr.done();
}

CheckReport check_expost_bb(const Environment& env, const MechanismKernel& k) {
  check_kernel_shape(env, k);
  Tracker tr("expost_bb", 0.0);
  const ContextSpace cs = env.contexts();
  bool exact = true;
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < env.n(); ++i)
      for (int j = 0; j < env.m(); ++j) {
        double pay = k.buyer_payment(cs, s, i, j), rec = k.seller_receipt(cs, s, i, j);
        exact = exact && pay == rec;
        tr.see(std::abs(pay - rec), [&] { return v_lbl(i) + c_lbl(j) + " at " + cs.label(s); });
      }
  CheckReport r = tr.done();
  r.pass = exact;
  return r;
}

CheckReport check_tight(const Environment& env, const Mechanism& mech, double tol) {
  Tracker tr("tight", tol);
  const ValueTable& t = mech.values;
  const ContextSpace cs = env.contexts();
  for (int s = 0; s < cs.size(); ++s) {
    for (int i = 1; i < env.n(); ++i)
      tr.see(std::abs(t.interim_B(s, i) - buyer_deviation_value(env, mech, s, i, i - 1)),
             [&] { return "buyer local " + v_lbl(i) + "->" + v_lbl(i - 1) + " at " + cs.label(s); });
    for (int j = 0; j + 1 < env.m(); ++j)
      tr.see(std::abs(t.interim_S(s, j) - seller_deviation_value(env, mech, s, j, j + 1)),
             [&] { return "seller local " + c_lbl(j) + "->" + c_lbl(j + 1) + " at " + cs.label(s); });
  }
  CheckReport r = tr.done();
  const Allocation& p = mech.allocation;
  bool monotone = true;
  for (int i = 0; i < env.n(); ++i)
    for (int j = 0; j < env.m(); ++j) {
      if (i > 0 && p(i, j) < p(i - 1, j)) monotone = false;
      if (j > 0 && p(i, j) > p(i, j - 1)) monotone = false;
    }
  if (!monotone) {
    r.pass = false;
    r.note = "allocation not monotone";
  } else {
    r.note = r.pass ? "monotone allocation; full IC implied" : "monotone allocation";
  }
  return r;
}

CheckReport check_ic_depth(const Environment& env, const Mechanism& mech, int depth, double tol) {
  if (depth < 1) throw InvalidInput("deviation depth must be >= 1");
  Tracker tr("ic_depth", tol);
  const ValueTable& t = mech.values;
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m(), slots = cs.size();
  const double d = env.discount;
  MechanismKernel k = kernel_from_utilities(env, mech.allocation, t);

  // V(s, i): best value over plans of the remaining depth, agent of type i at slot s
  Matrix VB = t.interim_B, VS = t.interim_S;
  for (int step = 0; step < depth; ++step) {
    Matrix nB(slots, n), nS(slots, m);
    for (int s = 0; s < slots; ++s) {
      Vector f = env.buyer_dist(s), g = env.seller_dist(s);
      for (int i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < n; ++r) {
          double v = 0.0;
          for (int j = 0; j < m; ++j)
            v += g(j) * (env.buyer_types(i) * mech.allocation(r, j) - k.buyer_payment(cs, s, r, j) +
                         d * env.buyer_transition.row(i).dot(VB.row(cs.slot(r, j))));
          best = std::max(best, v);
        }
        nB(s, i) = best;
      }
      for (int j = 0; j < m; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < m; ++r) {
          double v = 0.0;
          for (int i = 0; i < n; ++i)
            v += f(i) * (k.seller_receipt(cs, s, i, r) - env.seller_types(j) * mech.allocation(i, r) +
                         d * env.seller_transition.row(j).dot(VS.row(cs.slot(i, r))));
          best = std::max(best, v);
        }
        nS(s, j) = best;
      }
    }
    VB.swap(nB);
    VS.swap(nS);
  }
  for (int s = 0; s < slots; ++s) {
    for (int i = 0; i < n; ++i)
      tr.see(VB(s, i) - t.interim_B(s, i), [&] { return "buyer " + v_lbl(i) + " at " + cs.label(s); });
    for (int j = 0; j < m; ++j)
      tr.see(VS(s, j) - t.interim_S(s, j), [&] { return "seller " + c_lbl(j) + " at " + cs.label(s); });
  }
  CheckReport r = tr.done();
  r.note = "depth " + std::to_string(depth);
  return r;
}

Mechanism payoff_translate(const Environment& env, const Mechanism& mech, const Vector& a_B, const Vector& a_S) {
  const ContextSpace cs = env.contexts();
  if (a_B.size() != cs.size() || a_S.size() != cs.size())
    throw InvalidInput("translation constants need one entry per context");
  std::vector<Matrix> B = mech.values.expost_B, S = mech.values.expost_S;
  for (int s = 0; s < cs.size(); ++s) {
    B[s].array() += a_B(s);
    S[s].array() += a_S(s);
  }
  return {mech.name + "+a", mech.allocation, make_value_table(env, std::move(B), std::move(S))};
}

Mechanism payoff_translate_expost(const Environment& env, const Mechanism& mech, const Matrix& a_B,
                                  const Matrix& a_S) {
  const ContextSpace cs = env.contexts();
  if (a_B.rows() != cs.size() || a_B.cols() != env.m() || a_S.rows() != cs.size() || a_S.cols() != env.n())
    throw InvalidInput("ex post translation needs slots x M (buyer) and slots x N (seller) constants");
  std::vector<Matrix> B = mech.values.expost_B, S = mech.values.expost_S;
  for (int s = 0; s < cs.size(); ++s) {
    B[s].rowwise() += a_B.row(s);
    S[s].colwise() += a_S.row(s).transpose();
  }
  return {mech.name + "+a", mech.allocation, make_value_table(env, std::move(B), std::move(S))};
}

}  // namespace mechlab

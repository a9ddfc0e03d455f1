#include "mechlab/solver.hpp"

#include "mechlab/csv.hpp"

#include <cmath>

namespace mechlab {

ValueTable make_value_table(const Environment& env, std::vector<Matrix> expost_B, std::vector<Matrix> expost_S) {
  ValueTable t;
  t.space = env.contexts();
  const int slots = t.space.size();
  t.interim_B.resize(slots, env.n());
  t.interim_S.resize(slots, env.m());
  for (int s = 0; s < slots; ++s) {
    t.interim_B.row(s) = (expost_B[s] * env.seller_dist(s)).transpose();
    t.interim_S.row(s) = (expost_S[s].transpose() * env.buyer_dist(s)).transpose();
  }
  t.expost_B = std::move(expost_B);
  t.expost_S = std::move(expost_S);
  return t;
}

ValueTable stationary_value_table(const Environment& env, const Matrix& expost_B, const Matrix& expost_S) {
  const size_t slots = static_cast<size_t>(env.contexts().size());
  return make_value_table(env, std::vector<Matrix>(slots, expost_B), std::vector<Matrix>(slots, expost_S));
}

double interim_consistency_gap(const Environment& env, const ValueTable& t) {
  double gap = 0.0;
  for (int s = 0; s < t.space.size(); ++s) {
    gap = std::max(gap, ((t.expost_B[s] * env.seller_dist(s)).transpose() - t.interim_B.row(s)).cwiseAbs().maxCoeff());
    gap = std::max(gap,
                   ((t.expost_S[s].transpose() * env.buyer_dist(s)).transpose() - t.interim_S.row(s)).cwiseAbs().maxCoeff());
  }
  return gap;
}

namespace {

struct Flows {
  std::vector<Matrix> B, S;  // per slot
};

Flows flows(const Environment& env, const MechanismKernel& k) {
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  Flows f;
  f.B.assign(cs.size(), Matrix(n, m));
  f.S.assign(cs.size(), Matrix(n, m));
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        double p = k.allocation(i, j);
        f.B[s](i, j) = env.buyer_types(i) * p - k.buyer_payment(cs, s, i, j);
        f.S[s](i, j) = k.seller_receipt(cs, s, i, j) - env.seller_types(j) * p;
      }
  return f;
}

// kron(F, G) on states ordered s = i*M + j
Matrix product_transition(const Environment& env) {
  const int n = env.n(), m = env.m();
  Matrix P(n * m, n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < m; ++l) P(i * m + j, k * m + l) = env.buyer_transition(i, k) * env.seller_transition(j, l);
  return P;
}

Eigen::PartialPivLU<Matrix> factor(const Environment& env, const Matrix& P) {
  const int sz = static_cast<int>(P.rows());
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(sz, sz) - env.discount * P);
  if (!(lu.rcond() > 1e-13))
    throw NumericalFault("stationary system is singular (delta = " + format_number(env.discount) + ")");
  return lu;
}

Vector flatten(const Matrix& a) {
  Vector out(a.size());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i * a.cols() + j) = a(i, j);
  return out;
}

}  // namespace

ValueTable solve_stationary_values(const Environment& env, const MechanismKernel& kernel) {
  require_infinite(env, "solve_stationary_values");
  require_valid(env);
  check_kernel_shape(env, kernel);
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  const double d = env.discount;

  Flows f = flows(env, kernel);
  Matrix P = product_transition(env);
  auto lu = factor(env, P);

  Vector rB(n * m), rS(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      int s = cs.slot(i, j);
      rB(i * m + j) = P.row(i * m + j).dot(flatten(f.B[s]));
      rS(i * m + j) = P.row(i * m + j).dot(flatten(f.S[s]));
    }
  Vector cB = lu.solve(rB), cS = lu.solve(rS);

  std::vector<Matrix> WB(cs.size(), Matrix(n, m)), WS(cs.size(), Matrix(n, m));
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        WB[s](i, j) = f.B[s](i, j) + d * cB(i * m + j);
        WS[s](i, j) = f.S[s](i, j) + d * cS(i * m + j);
      }
  ValueTable t = make_value_table(env, std::move(WB), std::move(WS));

  double scale = 1.0;
  for (int s = 0; s < cs.size(); ++s)
    scale = std::max({scale, t.expost_B[s].cwiseAbs().maxCoeff(), t.expost_S[s].cwiseAbs().maxCoeff()});
  double res = recursion_residual(env, kernel, t);
  if (!(res <= 1e-10 * scale))
    throw NumericalFault("value recursion residual " + format_number(res) + " exceeds tolerance");
  return t;
}

double recursion_residual(const Environment& env, const MechanismKernel& kernel, const ValueTable& t) {
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  const double d = env.discount;
  Flows f = flows(env, kernel);
  double worst = 0.0;
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        int next = cs.slot(i, j);
        double b = f.B[s](i, j) + d * env.buyer_transition.row(i).dot(t.interim_B.row(next));
        double c = f.S[s](i, j) + d * env.seller_transition.row(j).dot(t.interim_S.row(next));
        worst = std::max({worst, std::abs(t.expost_B[s](i, j) - b), std::abs(t.expost_S[s](i, j) - c)});
      }
  return worst;
}

ValueTable finite_horizon_oracle(const Environment& env, const MechanismKernel& kernel, int periods) {
  if (periods < 1) throw InvalidInput("finite_horizon_oracle requires T >= 1");
  check_kernel_shape(env, kernel);
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  const double d = env.discount;
  const Matrix& F = env.buyer_transition;
  const Matrix& G = env.seller_transition;

  Flows f = flows(env, kernel);
  std::vector<Matrix> curB = f.B, curS = f.S;
  for (int t = 1; t < periods; ++t) {
    std::vector<Matrix> nextB = f.B, nextS = f.S;
    for (int s = 0; s < cs.size(); ++s)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          const Matrix& WB = curB[cs.slot(i, j)];
          const Matrix& WS = curS[cs.slot(i, j)];
          double eb = 0.0, es = 0.0;
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < m; ++l) {
              double w = F(i, k) * G(j, l);
              eb += w * WB(k, l);
              es += w * WS(k, l);
            }
          nextB[s](i, j) += d * eb;
          nextS[s](i, j) += d * es;
        }
    curB.swap(nextB);
    curS.swap(nextS);
  }
  return make_value_table(env, std::move(curB), std::move(curS));
}

ValueTable utilities_from_kernel(const Environment& env, const MechanismKernel& kernel) {
  if (env.infinite()) return solve_stationary_values(env, kernel);
  return finite_horizon_oracle(env, kernel, *env.horizon);
}

Mechanism mechanism_from_kernel(const Environment& env, const MechanismKernel& kernel, std::string name) {
  return {std::move(name), kernel.allocation, utilities_from_kernel(env, kernel)};
}

SurplusTable solve_surplus(const Environment& env) { return solve_surplus(env, efficient_allocation(env)); }

SurplusTable solve_surplus(const Environment& env, const Allocation& p) {
  require_infinite(env, "solve_surplus");
  require_valid(env);
  const int n = env.n(), m = env.m();
  Matrix P = product_transition(env);
  auto lu = factor(env, P);
  Vector y(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) y(i * m + j) = (env.buyer_types(i) - env.seller_types(j)) * p(i, j);
  Vector x = lu.solve(y);
  SurplusTable out;
  out.S_state.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) out.S_state(i, j) = x(i * m + j);
  out.S = env.buyer_prior.dot(out.S_state * env.seller_prior);
  return out;
}

Vector budget_surplus(const Environment& env, const Mechanism& mech) {
  SurplusTable st = solve_surplus(env, mech.allocation);
  const ContextSpace cs = env.contexts();
  Vector pi(cs.size());
  for (int s = 0; s < cs.size(); ++s) {
    Matrix net = st.S_state - mech.values.expost_B[s] - mech.values.expost_S[s];
    pi(s) = env.buyer_dist(s).dot(net * env.seller_dist(s));
  }
  return pi;
}

Vector instantaneous_surplus(const Environment& env, const Vector& pi) {
  const ContextSpace cs = env.contexts();
  Vector out(cs.size());
  for (int s = 0; s < cs.size(); ++s) {
    Vector f = env.buyer_dist(s), g = env.seller_dist(s);
    double cont = 0.0;
    for (int k = 0; k < env.n(); ++k)
      for (int l = 0; l < env.m(); ++l) cont += f(k) * g(l) * pi(cs.slot(k, l));
    out(s) = pi(s) - env.discount * cont;
  }
  return out;
}

void write_value_table_csv(std::ostream& os, const Environment& env, const ValueTable& t, bool with_expost) {
  CsvWriter w(os);
  const ContextSpace cs = env.contexts();
  w.header({"agent", "own_index", "other_index_or_context", "value"});
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < env.n(); ++i) w.cell(std::string("B")).cell(i + 1).cell(cs.label(s)).cell(t.interim_B(s, i)).end_row();
  for (int s = 0; s < cs.size(); ++s)
    for (int j = 0; j < env.m(); ++j) w.cell(std::string("S")).cell(j + 1).cell(cs.label(s)).cell(t.interim_S(s, j)).end_row();
  if (!with_expost) return;
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < env.n(); ++i)
      for (int j = 0; j < env.m(); ++j)
        w.cell(std::string("B")).cell(i + 1).cell("c" + std::to_string(j + 1) + "@" + cs.label(s)).cell(t.expost_B[s](i, j)).end_row();
  for (int s = 0; s < cs.size(); ++s)
    for (int j = 0; j < env.m(); ++j)
      for (int i = 0; i < env.n(); ++i)
        w.cell(std::string("S")).cell(j + 1).cell("v" + std::to_string(i + 1) + "@" + cs.label(s)).cell(t.expost_S[s](i, j)).end_row();
}

}  // namespace mechlab

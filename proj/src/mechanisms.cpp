#include "mechlab/mechanisms.hpp"

#include "mechlab/csv.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace mechlab {

double MechanismKernel::buyer_payment(const ContextSpace& cs, int slot, int i, int j) const {
  double x = context_keyed() ? buyer_context_transfer[slot](i, j) : buyer_transfer(i, j);
  if (has_fees()) x += buyer_fee(slot == 0 ? 0 : 1 + cs.at(slot).seller);
  return x;
}

double MechanismKernel::seller_receipt(const ContextSpace& cs, int slot, int i, int j) const {
  double x = context_keyed() ? seller_context_transfer[slot](i, j) : seller_transfer(i, j);
  if (has_fees()) x -= seller_fee(slot == 0 ? 0 : 1 + cs.at(slot).buyer);
  return x;
}

void check_kernel_shape(const Environment& env, const MechanismKernel& k) {
  const int n = env.n(), m = env.m();
  auto table = [&](const Matrix& t, const char* name) {
    if (t.rows() != n || t.cols() != m)
      throw InvalidInput(std::string("kernel ") + name + " must be " + std::to_string(n) + "x" + std::to_string(m));
  };
  table(k.allocation, "allocation");
  if (!k.context_keyed()) {
    table(k.buyer_transfer, "buyer_transfer");
    table(k.seller_transfer, "seller_transfer");
  } else {
    const size_t slots = static_cast<size_t>(env.contexts().size());
    if (k.buyer_context_transfer.size() != slots || k.seller_context_transfer.size() != slots)
      throw InvalidInput("context-keyed kernel needs one table per context for both agents");
    for (const auto& t : k.buyer_context_transfer) table(t, "buyer context transfer");
    for (const auto& t : k.seller_context_transfer) table(t, "seller context transfer");
  }
  bool bf = k.buyer_fee.size() > 0, sf = k.seller_fee.size() > 0;
  if (bf != sf) throw InvalidInput("fee maps must be both empty or both populated");
  if (bf && (k.buyer_fee.size() != m + 1 || k.seller_fee.size() != n + 1))
    throw InvalidInput("fee maps need a period-1 slot plus one entry per type of the other agent");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (!(k.allocation(i, j) >= 0.0 && k.allocation(i, j) <= 1.0))
        throw InvalidInput("allocation entry outside [0,1] at v" + std::to_string(i + 1) + "c" +
                           std::to_string(j + 1));
}

Allocation efficient_allocation(const Environment& env) {
  Allocation p = Allocation::Zero(env.n(), env.m());
  for (int i = 0; i < env.n(); ++i)
    for (int j = 0; j < env.m(); ++j) p(i, j) = env.buyer_types(i) > env.seller_types(j) ? 1.0 : 0.0;
  return p;
}

MechanismKernel vcg_kernel(const Environment& env) {
  const int n = env.n(), m = env.m();
  const Vector& v = env.buyer_types;
  const Vector& c = env.seller_types;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (v(i) == c(j))
        throw InvalidInput("tie v" + std::to_string(i + 1) + " = c" + std::to_string(j + 1) +
                           "; supports must be disjoint");

  MechanismKernel k;
  k.allocation = efficient_allocation(env);
  k.buyer_transfer = Matrix::Zero(n, m);
  k.seller_transfer = Matrix::Zero(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      if (k.allocation(i, j) == 0.0) continue;
      double lowest_above = std::numeric_limits<double>::infinity();
      for (int a = 0; a < n; ++a)
        if (v(a) > c(j)) lowest_above = std::min(lowest_above, v(a));
      double highest_below = -std::numeric_limits<double>::infinity();
      for (int b = 0; b < m; ++b)
        if (c(b) < v(i)) highest_below = std::max(highest_below, c(b));
      k.buyer_transfer(i, j) = lowest_above;
      k.seller_transfer(i, j) = highest_below;
    }
  return k;
}

MechanismKernel zero_transfer_kernel(const Environment& env) {
  MechanismKernel k;
  k.allocation = efficient_allocation(env);
  k.buyer_transfer = Matrix::Zero(env.n(), env.m());
  k.seller_transfer = Matrix::Zero(env.n(), env.m());
  return k;
}

MechanismKernel kernel_from_utilities(const Environment& env, const Allocation& p, const ValueTable& values,
                                      double tol) {
  require_infinite(env, "kernel_from_utilities");
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  if (static_cast<int>(values.expost_B.size()) != cs.size() || values.interim_B.rows() != cs.size())
    throw InvalidInput("value table does not cover every context");

  double scale = 1.0;
  for (int s = 0; s < cs.size(); ++s)
    scale = std::max({scale, values.expost_B[s].cwiseAbs().maxCoeff(), values.expost_S[s].cwiseAbs().maxCoeff()});
  double worst = 0.0;
  std::string where;
  for (int s = 0; s < cs.size(); ++s) {
    Vector bg = values.expost_B[s] * env.seller_dist(s);
    Vector sg = values.expost_S[s].transpose() * env.buyer_dist(s);
    for (int i = 0; i < n; ++i)
      if (double r = std::abs(bg(i) - values.interim_B(s, i)); r > worst) {
        worst = r;
        where = "buyer interim v" + std::to_string(i + 1) + " at " + cs.label(s);
      }
    for (int j = 0; j < m; ++j)
      if (double r = std::abs(sg(j) - values.interim_S(s, j)); r > worst) {
        worst = r;
        where = "seller interim c" + std::to_string(j + 1) + " at " + cs.label(s);
      }
  }
  if (worst > tol * scale)
    throw InvalidInput("inconsistent value table: residual " + format_number(worst) + " at " + where);

  const double d = env.discount;
  MechanismKernel k;
  k.allocation = p;
  k.buyer_context_transfer.assign(cs.size(), Matrix::Zero(n, m));
  k.seller_context_transfer.assign(cs.size(), Matrix::Zero(n, m));
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        int next = cs.slot(i, j);
        double cont_B = env.buyer_transition.row(i).dot(values.interim_B.row(next));
        double cont_S = env.seller_transition.row(j).dot(values.interim_S.row(next));
        k.buyer_context_transfer[s](i, j) = env.buyer_types(i) * p(i, j) - values.expost_B[s](i, j) + d * cont_B;
        k.seller_context_transfer[s](i, j) =
            values.expost_S[s](i, j) + env.seller_types(j) * p(i, j) - d * cont_S;
      }
  k.buyer_transfer = k.buyer_context_transfer[0];
  k.seller_transfer = k.seller_context_transfer[0];
  return k;
}

void write_kernel_csv(std::ostream& os, const Environment& env, const MechanismKernel& k) {
  CsvWriter w(os);
  const ContextSpace cs = env.contexts();
  const int n = env.n(), m = env.m();
  if (k.context_keyed()) {
    w.header({"context", "buyer_index", "seller_index", "p", "x_B", "x_S"});
    for (int s = 0; s < cs.size(); ++s)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          w.cell(cs.label(s)).cell(i + 1).cell(j + 1).cell(k.allocation(i, j));
          w.cell(k.buyer_context_transfer[s](i, j)).cell(k.seller_context_transfer[s](i, j)).end_row();
        }
  } else {
    w.header({"buyer_index", "seller_index", "p", "x_B", "x_S"});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        w.cell(i + 1).cell(j + 1).cell(k.allocation(i, j)).cell(k.buyer_transfer(i, j)).cell(k.seller_transfer(i, j)).end_row();
  }
  if (!k.has_fees()) return;
  os << '\n';
  w.header({"context_type", "fee_B", "fee_S"});
  w.cell(std::string("period1")).cell(k.buyer_fee(0)).cell(k.seller_fee(0)).end_row();
  for (int t = 0; t < std::max(n, m); ++t) {
    w.cell("prev" + std::to_string(t + 1));
    if (t < m) w.cell(k.buyer_fee(1 + t)); else w.cell(std::string());
    if (t < n) w.cell(k.seller_fee(1 + t)); else w.cell(std::string());
    w.end_row();
  }
}

}  // namespace mechlab

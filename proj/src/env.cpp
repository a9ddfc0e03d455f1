#include "mechlab/env.hpp"

#include "mechlab/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace mechlab {

Vector Environment::buyer_dist(int slot) const {
  if (slot == 0) return buyer_prior;
  return buyer_transition.row(contexts().at(slot).buyer).transpose();
}

Vector Environment::seller_dist(int slot) const {
  if (slot == 0) return seller_prior;
  return seller_transition.row(contexts().at(slot).seller).transpose();
}

namespace {

std::string at_index(const char* name, int i) { return std::string(name) + "[" + std::to_string(i + 1) + "]"; }

std::string at_index(const char* name, int i, int k) {
  return std::string(name) + "[" + std::to_string(i + 1) + "][" + std::to_string(k + 1) + "]";
}

struct Checker {
  ValidationReport& rep;
  void flag(std::string id, std::string where, double mag) {
    rep.ok = false;
    rep.violations.push_back({std::move(id), std::move(where), mag});
  }

  void increasing(const Vector& t, const char* id, const char* name) {
    for (int i = 1; i < t.size(); ++i)
      if (!(t(i) > t(i - 1))) flag(id, at_index(name, i), t(i - 1) - t(i));
  }

  void prior(const Vector& p, const char* name) {
    std::string nm(name);
    for (int i = 0; i < p.size(); ++i)
      if (!(p(i) > 0.0)) flag(nm + "_positive", at_index(name, i), p(i));
    double s = p.sum();
    if (!(std::abs(s - 1.0) <= kStochasticTol)) flag(nm + "_sum", name, s - 1.0);
  }

  void transition(const Matrix& t, const char* name) {
    std::string nm(name);
    for (int i = 0; i < t.rows(); ++i) {
      for (int k = 0; k < t.cols(); ++k)
        if (!(t(i, k) > 0.0)) flag(nm + "_positive", at_index(name, i, k), t(i, k));
      double s = t.row(i).sum();
      if (!(std::abs(s - 1.0) <= kStochasticTol))
        flag(nm + "_row_sum", "row " + std::to_string(i + 1) + " of " + nm, s - 1.0);
    }
    // higher current type: cumulative mass on low next types weakly smaller
    for (int i = 0; i < t.rows(); ++i)
      for (int i2 = i + 1; i2 < t.rows(); ++i2) {
        double lo = 0.0, hi = 0.0;
        for (int k = 0; k + 1 < t.cols(); ++k) {
          lo += t(i, k);
          hi += t(i2, k);
          if (hi - lo > kStochasticTol)
            flag(nm + "_fosd",
                 "rows " + std::to_string(i + 1) + "<" + std::to_string(i2 + 1) + " through column " +
                     std::to_string(k + 1),
                 hi - lo);
        }
      }
  }
};

bool all_finite(const Eigen::Ref<const Matrix>& a) { return a.allFinite(); }

}  // namespace

ValidationReport validate_environment(const Environment& env) {
  ValidationReport rep;
  Checker ck{rep};
  const int n = env.n(), m = env.m();

  if (n == 0) ck.flag("shape", "buyer_types empty", 0.0);
  if (m == 0) ck.flag("shape", "seller_types empty", 0.0);
  if (env.buyer_prior.size() != n) ck.flag("shape", "buyer_prior length", env.buyer_prior.size() - n);
  if (env.seller_prior.size() != m) ck.flag("shape", "seller_prior length", env.seller_prior.size() - m);
  if (env.buyer_transition.rows() != n || env.buyer_transition.cols() != n)
    ck.flag("shape", "buyer_transition dimensions", 0.0);
  if (env.seller_transition.rows() != m || env.seller_transition.cols() != m)
    ck.flag("shape", "seller_transition dimensions", 0.0);
  if (!rep.ok) return rep;  // nothing below is meaningful on mismatched shapes

  if (!all_finite(env.buyer_types) || !all_finite(env.seller_types) || !all_finite(env.buyer_prior) ||
      !all_finite(env.seller_prior) || !all_finite(env.buyer_transition) ||
      !all_finite(env.seller_transition) || !std::isfinite(env.discount)) {
    ck.flag("finite", "non-finite entry", 0.0);
    return rep;
  }

  ck.increasing(env.buyer_types, "buyer_types_increasing", "buyer_types");
  ck.increasing(env.seller_types, "seller_types_increasing", "seller_types");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      if (env.buyer_types(i) == env.seller_types(j))
        ck.flag("disjoint_supports", "v" + std::to_string(i + 1) + " = c" + std::to_string(j + 1), 0.0);

  ck.prior(env.buyer_prior, "buyer_prior");
  ck.prior(env.seller_prior, "seller_prior");
  ck.transition(env.buyer_transition, "buyer_transition");
  ck.transition(env.seller_transition, "seller_transition");

  if (env.discount < 0.0) ck.flag("discount_range", "discount < 0", env.discount);
  if (env.infinite() && !(env.discount < 1.0))
    ck.flag("discount_range", "discount >= 1 with infinite horizon", env.discount - 1.0);
  if (!env.infinite() && env.discount > 1.0) ck.flag("discount_range", "discount > 1", env.discount - 1.0);
  if (env.horizon && *env.horizon < 1) ck.flag("horizon_range", "horizon < 1", *env.horizon);
  return rep;
}

void require_valid(const Environment& env) {
  ValidationReport rep = validate_environment(env);
  if (rep.ok) return;
  std::ostringstream os;
  os << "invalid environment:";
  for (const auto& v : rep.violations) os << " [" << v.invariant << " at " << v.location << "]";
  throw InvalidInput(os.str());
}

void require_infinite(const Environment& env, std::string_view who) {
  if (!env.infinite())
    throw InvalidInput(std::string(who) + " requires an infinite horizon (got T = " +
                       std::to_string(*env.horizon) + ")");
}

namespace {

Matrix two_state(double stay_low, double stay_high) {
  Matrix t(2, 2);
  t << stay_low, 1.0 - stay_low, 1.0 - stay_high, stay_high;
  return t;
}

void require_open_unit(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) throw InvalidInput(std::string(name) + " must lie in (0, 1), got " + format_number(x));
}

}  // namespace

Environment make_usstp(double v, double c, double alpha, double delta) {
  if (!(v > 0.0)) throw InvalidInput("USSTP requires v > 0, got v = " + format_number(v));
  if (!(c > v)) throw InvalidInput("USSTP requires c > v, got c = " + format_number(c) + ", v = " + format_number(v));
  if (!(c < 1.0)) throw InvalidInput("USSTP requires 1 > c, got c = " + format_number(c));
  if (!(std::abs(1.0 - v - c) <= 1e-12))
    throw InvalidInput("USSTP requires symmetric gaps 1 - v = c, got 1 - v = " + format_number(1.0 - v) +
                       ", c = " + format_number(c));
  // alpha = 1/2 is the iid point every table starts from, so it is admitted
  if (!(alpha >= 0.5 && alpha < 1.0))
    throw InvalidInput("USSTP requires 1/2 <= alpha < 1, got alpha = " + format_number(alpha));
  if (!(delta >= 0.0 && delta < 1.0))
    throw InvalidInput("USSTP requires 0 <= delta < 1, got delta = " + format_number(delta));

  Environment env;
  env.buyer_types = Vector{{v, 1.0}};
  env.seller_types = Vector{{0.0, c}};
  env.buyer_prior = Vector::Constant(2, 0.5);
  env.seller_prior = Vector::Constant(2, 0.5);
  env.buyer_transition = two_state(alpha, alpha);
  env.seller_transition = two_state(alpha, alpha);
  env.discount = delta;
  require_valid(env);
  return env;
}

bool is_stp(const Environment& env) {
  if (env.n() != 2 || env.m() != 2) return false;
  double vl = env.buyer_types(0), vh = env.buyer_types(1);
  double cl = env.seller_types(0), ch = env.seller_types(1);
  return vh > ch && ch > vl && vl > cl;
}

Environment make_stp(const StpSpec& s) {
  auto fail = [](const char* rel, double a, const char* an, double b, const char* bn) {
    throw InvalidInput(std::string("STP ordering fails at ") + rel + " (" + an + " = " + format_number(a) + ", " +
                       bn + " = " + format_number(b) + ")");
  };
  if (!(s.v_high > s.c_high)) fail("v_H > c_H", s.v_high, "v_H", s.c_high, "c_H");
  if (!(s.c_high > s.v_low)) fail("c_H > v_L", s.c_high, "c_H", s.v_low, "v_L");
  if (!(s.v_low > s.c_low)) fail("v_L > c_L", s.v_low, "v_L", s.c_low, "c_L");
  require_open_unit(s.buyer_high_prob, "f(v_H)");
  require_open_unit(s.seller_high_prob, "g(c_H)");
  require_open_unit(s.alpha_high, "alpha_H");
  require_open_unit(s.alpha_low, "alpha_L");
  require_open_unit(s.beta_high, "beta_H");
  require_open_unit(s.beta_low, "beta_L");

  Environment env;
  env.buyer_types = Vector{{s.v_low, s.v_high}};
  env.seller_types = Vector{{s.c_low, s.c_high}};
  env.buyer_prior = Vector{{1.0 - s.buyer_high_prob, s.buyer_high_prob}};
  env.seller_prior = Vector{{1.0 - s.seller_high_prob, s.seller_high_prob}};
  env.buyer_transition = two_state(s.alpha_low, s.alpha_high);
  env.seller_transition = two_state(s.beta_low, s.beta_high);
  env.discount = s.delta;
  require_valid(env);
  return env;
}

Environment make_lambda_family(const Environment& base, LambdaKind kind, double alpha_buyer, double alpha_seller) {
  Environment env = base;
  auto build = [kind](const Matrix& tilde, double a, const char* who) {
    const int n = static_cast<int>(tilde.rows());
    if (kind == LambdaKind::renewal) {
      if (n == 1) return Matrix(Matrix::Ones(1, 1));
      if (!(a >= 1.0 / n && a < 1.0))
        throw InvalidInput(std::string("renewal family requires 1/N <= alpha < 1 for the ") + who +
                           ", got alpha = " + format_number(a));
      Matrix t = Matrix::Constant(n, n, (1.0 - a) / (n - 1));
      t.diagonal().setConstant(a);
      return t;
    }
    if (!(a >= 0.0 && a < 1.0))
      throw InvalidInput(std::string("mixing family requires 0 <= alpha < 1 for the ") + who +
                         ", got alpha = " + format_number(a));
    if (a == 0.0) return Matrix(tilde);
    return Matrix((1.0 - a) * tilde + a * Matrix::Identity(n, n));
  };

  if (kind == LambdaKind::mix_identity) {
    for (const auto& v : validate_environment(base).violations)
      if (v.invariant.find("fosd") != std::string::npos)
        throw InvalidInput("mixing family requires FOSD base transitions: " + v.invariant + " at " + v.location);
  }
  env.buyer_transition = build(base.buyer_transition, alpha_buyer, "buyer");
  env.seller_transition = build(base.seller_transition, alpha_seller, "seller");

  ValidationReport rep = validate_environment(env);
  if (!rep.ok) {
    const auto& v = rep.violations.front();
    throw InvalidInput("constructed family violates " + v.invariant + " at " + v.location);
  }
  return env;
}

ParseError::ParseError(std::string source, int line, const std::string& what)
    : InvalidInput(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_numbers(std::string_view text, const std::string& src, int line) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view tok = trim(text.substr(pos, comma - pos));
    if (tok.empty()) throw ParseError(src, line, "empty array element");
    double x = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw ParseError(src, line, "not a number: '" + std::string(tok) + "'");
    out.push_back(x);
    pos = comma + 1;
  }
  return out;
}

Vector to_vector(const std::vector<double>& xs) { return Eigen::Map<const Vector>(xs.data(), xs.size()); }

}  // namespace

Environment parse_environment(std::string_view text, const std::string& src) {
  static const char* kKeys[] = {"buyer_types",      "seller_types",      "buyer_prior", "seller_prior",
                                "buyer_transition", "seller_transition", "discount",    "horizon"};
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;

  int lineno = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (size_t hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    size_t eq = line.find_first_of("=:");
    if (eq == std::string_view::npos) throw ParseError(src, lineno, "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
      throw ParseError(src, lineno, "unknown key '" + key + "'");
    if (entries.count(key))
      throw ParseError(src, lineno, "duplicate key '" + key + "' (first on line " +
                                        std::to_string(entries[key].line) + ")");
    if (value.empty()) throw ParseError(src, lineno, "missing value for '" + key + "'");
    entries[key] = {std::string(value), lineno};
  }
  for (const char* k : kKeys)
    if (k != std::string("horizon") && !entries.count(k))
      throw ParseError(src, lineno, std::string("missing key '") + k + "'");

  auto nums = [&](const char* key) {
    const Entry& e = entries.at(key);
    return parse_numbers(e.value, src, e.line);
  };

  Environment env;
  env.buyer_types = to_vector(nums("buyer_types"));
  env.seller_types = to_vector(nums("seller_types"));
  env.buyer_prior = to_vector(nums("buyer_prior"));
  env.seller_prior = to_vector(nums("seller_prior"));
  auto square = [&](const char* key, int n) {
    std::vector<double> xs = nums(key);
    if (static_cast<int>(xs.size()) != n * n)
      throw ParseError(src, entries.at(key).line,
                       std::string(key) + " needs " + std::to_string(n * n) + " entries (row-major), got " +
                           std::to_string(xs.size()));
    Matrix t(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) t(i, k) = xs[i * n + k];
    return t;
  };
  env.buyer_transition = square("buyer_transition", env.n());
  env.seller_transition = square("seller_transition", env.m());

  std::vector<double> d = nums("discount");
  if (d.size() != 1) throw ParseError(src, entries.at("discount").line, "discount takes one value");
  env.discount = d[0];

  if (auto it = entries.find("horizon"); it != entries.end()) {
    std::string h = it->second.value;
    if (h == "inf" || h == "infinite" || h == "infinity") {
      env.horizon.reset();
    } else {
      int t = 0;
      auto res = std::from_chars(h.data(), h.data() + h.size(), t);
      if (res.ec != std::errc() || res.ptr != h.data() + h.size())
        throw ParseError(src, it->second.line, "horizon must be 'inf' or a positive integer, got '" + h + "'");
      env.horizon = t;
    }
  }
  return env;
}

Environment load_environment(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open environment file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_environment(ss.str(), path);
}

std::string format_environment(const Environment& env) {
  std::ostringstream os;
  auto row = [&](const char* key, const Matrix& a) {
    os << key << " = ";
    for (int i = 0; i < a.rows(); ++i)
      for (int k = 0; k < a.cols(); ++k) os << (i || k ? ", " : "") << format_number(a(i, k));
    os << '\n';
  };
  row("buyer_types", env.buyer_types.transpose());
  row("seller_types", env.seller_types.transpose());
  row("buyer_prior", env.buyer_prior.transpose());
  row("seller_prior", env.seller_prior.transpose());
  row("buyer_transition", env.buyer_transition);
  row("seller_transition", env.seller_transition);
  os << "discount = " << format_number(env.discount) << '\n';
  os << "horizon = " << (env.horizon ? std::to_string(*env.horizon) : std::string("inf")) << '\n';
  return os.str();
}

namespace {

Matrix sample_transition(std::mt19937_64& rng, int n) {
  if (n == 1) return Matrix::Ones(1, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> mu(n);
  for (auto& x : mu) x = u(rng) * (n - 1);
  std::sort(mu.begin(), mu.end());
  double sigma = 0.3 + 1.2 * u(rng);
  double eps = 0.02 + 0.28 * u(rng);
  Matrix t(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) t(i, k) = std::exp(-(k - mu[i]) * (k - mu[i]) / (2 * sigma * sigma));
    t.row(i) /= t.row(i).sum();
    t.row(i) = (1.0 - eps) * t.row(i).array() + eps / n;
  }
  return t;
}

Vector sample_prior(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Vector p(n);
  for (int i = 0; i < n; ++i) p(i) = u(rng);
  return p / p.sum();
}

}  // namespace

Environment sample_environment(std::uint64_t seed, int n, int m, double delta) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pts;
  while (static_cast<int>(pts.size()) < n + m) {
    double x = std::round(u(rng) * 1000.0) / 1000.0;
    bool clash = std::any_of(pts.begin(), pts.end(), [x](double y) { return std::abs(x - y) < 1e-9; });
    if (!clash) pts.push_back(x);
  }
  std::vector<int> side(n + m, 0);
  std::fill(side.begin() + n, side.end(), 1);
  std::shuffle(side.begin(), side.end(), rng);
  std::vector<double> vs, cs;
  for (int k = 0; k < n + m; ++k) (side[k] == 0 ? vs : cs).push_back(pts[k]);
  std::sort(vs.begin(), vs.end());
  std::sort(cs.begin(), cs.end());

  Environment env;
  env.buyer_types = to_vector(vs);
  env.seller_types = to_vector(cs);
  env.buyer_prior = sample_prior(rng, n);
  env.seller_prior = sample_prior(rng, m);
  env.buyer_transition = sample_transition(rng, n);
  env.seller_transition = sample_transition(rng, m);
  env.discount = delta;
  require_valid(env);
  return env;
}

}  // namespace mechlab

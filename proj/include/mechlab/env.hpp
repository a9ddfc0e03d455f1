#pragma once

#include "mechlab/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mechlab {

// Types are stored ascending: buyer_types(0) is the lowest valuation v_1,
// seller_types(M-1) the highest cost c_M.
struct Environment {
  Vector buyer_types;
  Vector seller_types;
  Vector buyer_prior;
  Vector seller_prior;
  Matrix buyer_transition;   // [i][k] = f(v_k | v_i)
  Matrix seller_transition;  // [j][l] = g(c_l | c_j)
  double discount = 0.0;
  std::optional<int> horizon;  // empty: infinite

  int n() const { return static_cast<int>(buyer_types.size()); }
  int m() const { return static_cast<int>(seller_types.size()); }
  bool infinite() const { return !horizon.has_value(); }
  ContextSpace contexts() const { return {n(), m()}; }

  // Distribution of the current own/other type given the context slot.
  Vector buyer_dist(int slot) const;
  Vector seller_dist(int slot) const;
};

struct Violation {
  std::string invariant;
  std::string location;
  double magnitude = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

inline constexpr double kStochasticTol = 1e-12;

ValidationReport validate_environment(const Environment& env);

// Throws InvalidInput listing every violation.
void require_valid(const Environment& env);
void require_infinite(const Environment& env, std::string_view who);

Environment make_usstp(double v, double c, double alpha, double delta);

struct StpSpec {
  double v_high = 1.0;
  double v_low = 0.05;
  double c_high = 0.95;
  double c_low = 0.0;
  double buyer_high_prob = 0.5;   // f(v_H)
  double seller_high_prob = 0.5;  // g(c_H)
  double alpha_high = 0.5;        // f(v_H | v_H)
  double alpha_low = 0.5;         // f(v_L | v_L)
  double beta_high = 0.5;         // g(c_H | c_H)
  double beta_low = 0.5;          // g(c_L | c_L)
  double delta = 0.95;
};

Environment make_stp(const StpSpec& spec);

// True when env is a 2x2 grid with v_H > c_H > v_L > c_L.
bool is_stp(const Environment& env);

enum class LambdaKind { renewal, mix_identity };

Environment make_lambda_family(const Environment& base, LambdaKind kind, double alpha_buyer,
                               double alpha_seller);

// Line-oriented "key = a, b, c" text. Throws ParseError with the line number.
class ParseError : public InvalidInput {
 public:
  ParseError(std::string source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

Environment parse_environment(std::string_view text, const std::string& source = "<input>");
Environment load_environment(const std::string& path);
std::string format_environment(const Environment& env);

// Random valid environment for property tests and benchmarks. Transitions
// come from a discretized Gaussian location family (MLR, hence FOSD) mixed
// with uniform mass for full support.
Environment sample_environment(std::uint64_t seed, int n, int m, double delta);

}  // namespace mechlab

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mechlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A precondition was violated; the message names the failed relation.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Valid input, but a solve or an internal cross-check went wrong.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Public state a Markov mechanism conditions on. Slot 0 is period 1 (priors
// apply); slot 1 + i*M + j follows a period in which (v_i, c_j) was reported.
// Indices are 0-based in code, 1-based in every printed label.
struct Context {
  int buyer = -1;
  int seller = -1;
  bool initial() const { return buyer < 0; }
};

struct ContextSpace {
  int n = 0;
  int m = 0;

  int size() const { return n * m + 1; }
  int slot(int i, int j) const { return 1 + i * m + j; }
  Context at(int slot) const;
  // "period1" or "v<i>c<j>"
  std::string label(int slot) const;
};

}  // namespace mechlab

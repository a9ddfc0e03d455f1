#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mechlab::cli {

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

// "lo:hi:step"; throws InvalidInput on anything else.
Grid parse_grid(const std::string& text);

struct RunConfig {
  std::string subcommand;

  // environment source: exactly one of preset / env_file
  std::string preset;  // usstp | stp | lambda-renewal | lambda-mix
  std::string env_file;
  double v = 0.05, c = 0.95, alpha = 0.5, delta = 0.95;
  double v_high = 1.0, v_low = 0.05, c_high = 0.95, c_low = 0.0;
  double buyer_high_prob = 0.5, seller_high_prob = 0.5;
  double alpha_high = 0.5, alpha_low = 0.5, beta_high = 0.5, beta_low = 0.5;

  std::optional<double> tol;  // default 1e-9, checkers 1e-8
  std::string out_dir;
  std::optional<Grid> alpha_grid;
  std::optional<Grid> delta_grid;
  std::string mechanism;  // default depends on subcommand
  std::string check = "all";
  std::string emit = "values";
  double beta_buyer = 0.5, beta_seller = 0.5;
  int depth = 3;
  double bisect_tol = 1e-6;
  bool threshold = false;
  bool gnuplot_hints = false;
};

// Exit status: 0 ok, 1 failed verification or numerical fault, 2 bad input.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses argv with CLI11 and calls run.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mechlab::cli

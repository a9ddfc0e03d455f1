#include "mechlab/cli.hpp"

#include "mechlab/csv.hpp"
#include "mechlab/env.hpp"
#include "mechlab/feasibility.hpp"
#include "mechlab/implementations.hpp"
#include "mechlab/intermediate.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/scan.hpp"
#include "mechlab/solver.hpp"
#include "mechlab/verify.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <utility>

namespace mechlab::cli {

Grid parse_grid(const std::string& text) {
  std::vector<double> parts;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t colon = text.find(':', pos);
    if (colon == std::string::npos) colon = text.size();
    std::string tok = text.substr(pos, colon - pos);
    double x = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw InvalidInput("grid must be lo:hi:step, got '" + text + "'");
    parts.push_back(x);
    pos = colon + 1;
  }
  if (parts.size() != 3) throw InvalidInput("grid must be lo:hi:step, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

namespace {

using Legend = std::vector<std::pair<std::string, std::string>>;

class Source {
 public:
  explicit Source(const RunConfig& cfg) : cfg_(cfg) {
    bool has_preset = !cfg.preset.empty(), has_file = !cfg.env_file.empty();
    if (has_preset == has_file) throw InvalidInput("give exactly one environment source: --preset or --env-file");
    if (has_preset && cfg.preset != "usstp" && cfg.preset != "stp" && cfg.preset != "lambda-renewal" &&
        cfg.preset != "lambda-mix")
      throw InvalidInput("unknown preset '" + cfg.preset + "' (usstp, stp, lambda-renewal, lambda-mix)");
  }

  bool file() const { return !cfg_.env_file.empty(); }

  // Preset with persistence alpha and discount delta.
  Environment at(double alpha, double delta) const {
    if (file()) throw InvalidInput("parameter grids need a preset environment source");
    const std::string& p = cfg_.preset;
    if (p == "usstp") return make_usstp(cfg_.v, cfg_.c, alpha, delta);
    if (p == "stp") {
      StpSpec s = stp_spec(delta);
      s.alpha_high = s.alpha_low = s.beta_high = s.beta_low = alpha;
      return make_stp(s);
    }
    Environment base = make_usstp(cfg_.v, cfg_.c, 0.5, delta);
    return make_lambda_family(base, p == "lambda-renewal" ? LambdaKind::renewal : LambdaKind::mix_identity, alpha,
                              alpha);
  }

  Environment single() const {
    if (file()) return load_environment(cfg_.env_file);
    if (cfg_.preset == "stp") return make_stp(stp_spec(cfg_.delta));
    return at(cfg_.alpha, cfg_.delta);
  }

  Environment single_valid() const {
    Environment e = single();
    require_valid(e);
    return e;
  }

 private:
  StpSpec stp_spec(double delta) const {
    StpSpec s;
    s.v_high = cfg_.v_high;
    s.v_low = cfg_.v_low;
    s.c_high = cfg_.c_high;
    s.c_low = cfg_.c_low;
    s.buyer_high_prob = cfg_.buyer_high_prob;
    s.seller_high_prob = cfg_.seller_high_prob;
    s.alpha_high = cfg_.alpha_high;
    s.alpha_low = cfg_.alpha_low;
    s.beta_high = cfg_.beta_high;
    s.beta_low = cfg_.beta_low;
    s.delta = delta;
    return s;
  }

  const RunConfig& cfg_;
};

std::vector<double> values_of(const std::optional<Grid>& g, double fallback) {
  if (!g) return {fallback};
  return make_grid(g->lo, g->hi, g->step);
}

std::string state_label(int i, int j) { return "v" + std::to_string(i + 1) + "_c" + std::to_string(j + 1); }

Legend scan_legend(const std::string& param, int n, int m) {
  Legend l{{param, param == "alpha" ? "persistence parameter" : "discount factor"},
           {"pi_star", "ex ante expected budget surplus of the min-max mechanism"}};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      l.push_back({"pi_" + state_label(i, j), "expected budget surplus after reports (v" + std::to_string(i + 1) +
                                                  ", c" + std::to_string(j + 1) + ")"});
  l.push_back({"feasible", "1 if every component is >= -tol"});
  return l;
}

void write_scan_rows(CsvWriter& w, const std::vector<ScanRow>& rows, bool by_alpha) {
  for (const auto& r : rows) {
    w.cell(by_alpha ? r.alpha : r.delta).cell(r.pi_star);
    for (int i = 0; i < r.state.rows(); ++i)
      for (int j = 0; j < r.state.cols(); ++j) w.cell(r.state(i, j));
    w.cell(r.feasible).end_row();
  }
}

// ---- subcommands ----

int cmd_validate(const RunConfig&, const Source& src, std::ostream& os, std::ostream&, Legend& legend) {
  Environment env = src.single();
  ValidationReport rep = validate_environment(env);
  CsvWriter w(os);
  w.header({"invariant", "location", "magnitude"});
  for (const auto& v : rep.violations) w.cell(v.invariant).cell(v.location).cell(v.magnitude).end_row();
  legend = {{"invariant", "identifier of the violated invariant"},
            {"location", "where it fails (1-based indices)"},
            {"magnitude", "size of the violation"}};
  return rep.ok ? 0 : 1;
}

struct Built {
  Mechanism mech;
  std::optional<MechanismKernel> kernel;
};

Built build_mechanism(const std::string& name, const Environment& env, const RunConfig& cfg, double tol) {
  auto from_kernel = [&](MechanismKernel k) {
    Mechanism m = mechanism_from_kernel(env, k, name);
    return Built{std::move(m), std::move(k)};
  };
  if (name == "vcg") return from_kernel(vcg_kernel(env));
  if (name == "fee") return from_kernel(fee_kernel(env));
  if (name == "bond") return from_kernel(bond_kernel(env));
  if (name == "expost") return from_kernel(expost_transfers(env, tol));
  if (name == "minmax") return {minmax_mechanism(env), std::nullopt};
  if (name == "zero") return {zero_surplus_mechanism(env, tol), std::nullopt};
  if (name == "beta") return {beta_mechanism(env, uniform_beta(env, cfg.beta_buyer, cfg.beta_seller), tol), std::nullopt};
  throw InvalidInput("unknown mechanism '" + name + "' (vcg, minmax, fee, beta, zero, expost, bond)");
}

int cmd_solve(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream&, Legend& legend) {
  Environment env = src.single_valid();
  double tol = cfg.tol.value_or(1e-9);
  Built b = build_mechanism(cfg.mechanism.empty() ? "vcg" : cfg.mechanism, env, cfg, tol);
  if (cfg.emit == "values") {
    write_value_table_csv(os, env, b.mech.values, true);
    legend = {{"agent", "B buyer, S seller"},
              {"own_index", "1-based own type index"},
              {"other_index_or_context", "context label for interim rows; <other>@<context> for ex post rows"},
              {"value", "expected discounted utility, present value at the current period"}};
  } else if (cfg.emit == "kernel") {
    MechanismKernel k = b.kernel ? *b.kernel : kernel_from_utilities(env, b.mech.allocation, b.mech.values);
    write_kernel_csv(os, env, k);
    legend = {{"buyer_index", "1-based buyer type"}, {"seller_index", "1-based seller type"},
              {"p", "trade probability"},          {"x_B", "buyer payment before fees"},
              {"x_S", "seller receipt before fees"}, {"context_type/fee_B/fee_S", "fee block after a blank line"}};
  } else if (cfg.emit == "surplus") {
    require_infinite(env, "surplus output");
    Vector pi = budget_surplus(env, b.mech);
    SurplusTable st = solve_surplus(env, b.mech.allocation);
    const ContextSpace cs = env.contexts();
    CsvWriter w(os);
    w.header({"context", "expected_surplus", "budget_surplus"});
    for (int s = 0; s < cs.size(); ++s)
      w.cell(cs.label(s)).cell(env.buyer_dist(s).dot(st.S_state * env.seller_dist(s))).cell(pi(s)).end_row();
    legend = {{"context", "period1 or previous reports"},
              {"expected_surplus", "expected discounted gains from trade"},
              {"budget_surplus", "expected discounted net transfers to the designer"}};
  } else {
    throw InvalidInput("unknown --emit '" + cfg.emit + "' (values, kernel, surplus)");
  }
  return 0;
}

int cmd_feasible(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream& err, Legend& legend) {
  Environment env = src.single_valid();
  double tol = cfg.tol.value_or(1e-9);
  MinMaxResult mm = minmax(env);
  if (mm.anomaly())
    err << "warning: lowest-type floor not at v_1/c_M (gap " << format_number(mm.anomaly_gap) << ")\n";
  FeasibilityDecision d = is_efficient_feasible(env, tol);
  std::vector<std::string> h = scan_header("delta", env.n(), env.m());
  h.push_back("min_component");
  h.push_back("binding");
  CsvWriter w(os);
  w.header(h);
  w.cell(env.discount).cell(d.surplus.pi_star);
  for (int i = 0; i < env.n(); ++i)
    for (int j = 0; j < env.m(); ++j) w.cell(d.surplus.pi_star_state(i, j));
  w.cell(d.feasible).cell(d.min_component).cell(d.binding).end_row();
  legend = scan_legend("delta", env.n(), env.m());
  legend.push_back({"min_component", "smallest of the N*M+1 components"});
  legend.push_back({"binding", "which component is smallest"});
  return 0;
}

int cmd_fees(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream&, Legend& legend) {
  CsvWriter w(os);
  if (!cfg.alpha_grid && src.file()) {
    Environment env = src.single_valid();
    FeeSchedule fs = fee_schedule(env);
    w.header({"context_type", "fee_B", "fee_S"});
    w.cell(std::string("period1")).cell(fs.z_B1).cell(fs.z_S1).end_row();
    for (int t = 0; t < std::max(env.n(), env.m()); ++t) {
      w.cell("prev" + std::to_string(t + 1));
      if (t < env.m()) w.cell(fs.z_B(t)); else w.cell(std::string());
      if (t < env.n()) w.cell(fs.z_S(t)); else w.cell(std::string());
      w.end_row();
    }
    legend = {{"context_type", "period1, or prev<k>: other agent's previous type k"},
              {"fee_B", "buyer fee z_B keyed by the seller's previous type"},
              {"fee_S", "seller fee z_S keyed by the buyer's previous type"}};
    return 0;
  }
  std::vector<double> alphas = values_of(cfg.alpha_grid, cfg.alpha);
  std::vector<FeeSchedule> rows(alphas.size());
  parallel_for(alphas.size(), [&](size_t k) { rows[k] = fee_schedule(src.at(alphas[k], cfg.delta)); });
  const int m = static_cast<int>(rows.front().z_B.size());
  std::vector<std::string> h{"alpha"};
  for (int j = m; j >= 1; --j) h.push_back("z_B_c" + std::to_string(j));
  h.push_back("z_B1");
  w.header(h);
  legend = {{"alpha", "persistence"}};
  for (int j = m; j >= 1; --j)
    legend.push_back({"z_B_c" + std::to_string(j), "buyer fee after seller type c" + std::to_string(j)});
  legend.push_back({"z_B1", "buyer fee in period 1"});
  for (size_t k = 0; k < alphas.size(); ++k) {
    w.cell(alphas[k]);
    for (int j = m - 1; j >= 0; --j) w.cell(rows[k].z_B(j));
    w.cell(rows[k].z_B1).end_row();
  }
  return 0;
}

int cmd_bond(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream&, Legend& legend) {
  double tol = cfg.tol.value_or(1e-9);
  std::vector<double> alphas = src.file() ? std::vector<double>{std::nan("")} : values_of(cfg.alpha_grid, cfg.alpha);
  std::vector<BondReport> rows(alphas.size());
  parallel_for(alphas.size(), [&](size_t k) {
    rows[k] = bond_mechanism(src.file() ? src.single_valid() : src.at(alphas[k], cfg.delta), tol);
  });
  CsvWriter w(os);
  w.header({"alpha", "max_abs_z_B_normalized", "UP_percent", "UP_percent_exact", "upfront_B", "upfront_S", "max_abs_z_B"});
  for (size_t k = 0; k < alphas.size(); ++k) {
    const BondReport& r = rows[k];
    if (src.file()) w.cell(std::string()); else w.cell(alphas[k]);
    w.cell(1.0).cell(static_cast<int>(std::lround(r.ratio_percent))).cell(r.ratio_percent);
    w.cell(r.upfront_B).cell(r.upfront_S).cell(r.max_fee).end_row();
  }
  legend = {{"alpha", "persistence (blank for file environments)"},
            {"max_abs_z_B_normalized", "largest buyer fee over all contexts, normalized to 1"},
            {"UP_percent", "upfront bond relative to that fee, whole percent"},
            {"UP_percent_exact", "same, full precision"},
            {"upfront_B", "buyer bond"},
            {"upfront_S", "seller bond"},
            {"max_abs_z_B", "largest buyer fee before normalization"}};
  return 0;
}

int cmd_expost(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream&, Legend& legend) {
  double tol = cfg.tol.value_or(1e-9);
  CsvWriter w(os);
  if (cfg.alpha_grid) {
    std::vector<double> alphas = values_of(cfg.alpha_grid, cfg.alpha);
    std::vector<MechanismKernel> ks(alphas.size());
    std::vector<Environment> envs(alphas.size());
    parallel_for(alphas.size(), [&](size_t k) {
      envs[k] = src.at(alphas[k], cfg.delta);
      if (envs[k].n() != 2 || envs[k].m() != 2) throw InvalidInput("table layout needs a 2x2 environment");
      ks[k] = expost_transfers(envs[k], tol);
    });
    w.header({"alpha", "x_v2c1_given_v2c1", "x_v2c1_given_v2c2", "x_v1c2_given_v1c2", "x_v1c2_given_v2c2"});
    for (size_t k = 0; k < alphas.size(); ++k) {
      const ContextSpace cs = envs[k].contexts();
      const auto& x = ks[k].buyer_context_transfer;
      w.cell(alphas[k]).cell(x[cs.slot(1, 0)](1, 0)).cell(x[cs.slot(1, 1)](1, 0));
      w.cell(x[cs.slot(0, 1)](0, 1)).cell(x[cs.slot(1, 1)](0, 1)).end_row();
    }
    legend = {{"alpha", "persistence"},
              {"x_v2c1_given_v2c1", "transfer at (v_H, c_L) after (v_H, c_L)"},
              {"x_v2c1_given_v2c2", "transfer at (v_H, c_L) after (v_H, c_H)"},
              {"x_v1c2_given_v1c2", "transfer at (v_L, c_H) after (v_L, c_H)"},
              {"x_v1c2_given_v2c2", "transfer at (v_L, c_H) after (v_H, c_H)"}};
    return 0;
  }
  Environment env = src.single_valid();
  MechanismKernel k = expost_transfers(env, tol);
  const ContextSpace cs = env.contexts();
  w.header({"context", "buyer_index", "seller_index", "x"});
  for (int s = 0; s < cs.size(); ++s)
    for (int i = 0; i < env.n(); ++i)
      for (int j = 0; j < env.m(); ++j)
        w.cell(cs.label(s)).cell(i + 1).cell(j + 1).cell(k.buyer_context_transfer[s](i, j)).end_row();
  legend = {{"context", "period1 or previous reports"},
            {"buyer_index", "1-based"},
            {"seller_index", "1-based"},
            {"x", "payment from buyer to seller"}};
  return 0;
}

int cmd_scan_delta(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream& err, Legend& legend) {
  if (!cfg.delta_grid) throw InvalidInput("scan-delta needs --delta-grid lo:hi:step");
  double tol = cfg.tol.value_or(1e-9);
  std::vector<double> deltas = values_of(cfg.delta_grid, 0.0);
  std::optional<Environment> fixed;
  if (src.file()) fixed = src.single_valid();
  EnvFactory make = [&](double, double d) {
    Environment e = fixed ? *fixed : src.at(cfg.alpha, d);
    e.discount = d;
    return e;
  };
  std::vector<GridPoint> grid;
  for (double d : deltas) grid.push_back({cfg.alpha, d});
  std::vector<ScanRow> rows = scan_parallel(make, grid, tol);
  const int n = static_cast<int>(rows.front().state.rows()), m = static_cast<int>(rows.front().state.cols());
  CsvWriter w(os);
  w.header(scan_header("delta", n, m));
  write_scan_rows(w, rows, false);
  legend = scan_legend("delta", n, m);
  if (cfg.threshold) {
    DeltaThreshold t = delta_threshold(make(cfg.alpha, 0.0), cfg.delta_grid->step, cfg.bisect_tol,
                                       std::min(0.999, deltas.back() < 1.0 ? std::max(deltas.back(), 1e-3) : 0.999), tol);
    err << "delta_threshold kind=" << to_string(t.kind) << " delta_star=" << format_number(t.delta_star)
        << " bracket=[" << format_number(t.bracket_lo) << ", " << format_number(t.bracket_hi) << "]\n";
  }
  return 0;
}

int cmd_scan_alpha(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream& err, Legend& legend) {
  if (!cfg.alpha_grid) throw InvalidInput("scan-alpha needs --alpha-grid lo:hi:step");
  if (src.file()) throw InvalidInput("scan-alpha needs a preset environment source");
  double tol = cfg.tol.value_or(1e-9);
  std::vector<GridPoint> grid;
  for (double a : values_of(cfg.alpha_grid, 0.0)) grid.push_back({a, cfg.delta});
  EnvFactory make = [&](double a, double d) { return src.at(a, d); };
  std::vector<ScanRow> rows = scan_parallel(make, grid, tol);
  const int n = static_cast<int>(rows.front().state.rows()), m = static_cast<int>(rows.front().state.cols());
  CsvWriter w(os);
  w.header(scan_header("alpha", n, m));
  write_scan_rows(w, rows, true);
  legend = scan_legend("alpha", n, m);
  if (cfg.threshold) {
    size_t k = 0;
    while (k < rows.size() && rows[k].feasible) ++k;
    err << "alpha_threshold alpha_star=" << (k ? format_number(rows[k - 1].alpha) : std::string("none"))
        << (k == rows.size() ? " (feasible on the whole grid)" : "") << '\n';
  }
  return 0;
}

int cmd_intermediate(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream& err, Legend& legend) {
  double tol = cfg.tol.value_or(1e-9);
  struct Row {
    double alpha, delta;
    FeasibilityDecision pub;
    IntermediateDecision mid;
  };
  std::vector<Row> rows;
  if (src.file()) {
    Environment env = src.single_valid();
    rows.push_back({std::nan(""), env.discount, {}, {}});
  } else {
    for (double d : values_of(cfg.delta_grid, cfg.delta))
      for (double a : values_of(cfg.alpha_grid, cfg.alpha)) rows.push_back({a, d, {}, {}});
  }
  parallel_for(rows.size(), [&](size_t k) {
    Environment env = src.file() ? src.single_valid() : src.at(rows[k].alpha, rows[k].delta);
    rows[k].pub = is_efficient_feasible(env, tol);
    rows[k].mid = intermediate_feasible(env, tol);
  });
  CsvWriter w(os);
  w.header({"alpha", "delta", "pi_star", "pi_dstar", "d_v1_c1", "d_v1_c2", "d_v2_c1", "d_v2_c2", "public_feasible",
            "intermediate_feasible", "deeper_history_gap"});
  for (const auto& r : rows) {
    const PooledValues& pv = r.mid.pooled;
    if (std::isnan(r.alpha)) w.cell(std::string()); else w.cell(r.alpha);
    w.cell(r.delta).cell(pv.pi_star).cell(pv.pi_dstar);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) w.cell(pv.pi_dstar_state(i, j) - pv.pi_star_state(i, j));
    w.cell(r.pub.feasible).cell(r.mid.feasible).cell(pv.deeper_history_gap).end_row();
  }
  Environment first = src.file() ? src.single_valid() : src.at(rows.front().alpha, rows.front().delta);
  err << "unique price: " << unique_price_check(first).text << '\n';
  legend = {{"alpha", "persistence"},
            {"delta", "discount factor"},
            {"pi_star", "ex ante surplus, public mechanism"},
            {"pi_dstar", "ex ante surplus, outcome-only information"},
            {"d_v<i>_c<j>", "Pi**(v_i, c_j) - Pi*(v_i, c_j)"},
            {"public_feasible", "all Pi* components >= -tol"},
            {"intermediate_feasible", "all Pi** components >= -tol"},
            {"deeper_history_gap", "change in pooled extraction with two periods of outcomes"}};
  return 0;
}

int cmd_verify(const RunConfig& cfg, const Source& src, std::ostream& os, std::ostream&, Legend& legend) {
  Environment env = src.single_valid();
  double tol = cfg.tol.value_or(kCheckTol);
  Built b = build_mechanism(cfg.mechanism.empty() ? "minmax" : cfg.mechanism, env, cfg, 1e-9);
  auto kernel = [&] { return b.kernel ? *b.kernel : kernel_from_utilities(env, b.mech.allocation, b.mech.values); };

  std::vector<std::pair<std::string, std::function<CheckReport()>>> all{
      {"ic", [&] { return check_ic(env, b.mech, tol); }},
      {"xic", [&] { return check_expost_ic(env, b.mech, tol); }},
      {"ir", [&] { return check_ir(env, b.mech, tol); }},
      {"xir", [&] { return check_expost_ir(env, b.mech, tol); }},
      {"ibb", [&] { return check_interim_bb(env, b.mech, tol); }},
      {"xbb", [&] { return check_expost_bb(env, kernel()); }},
      {"tight", [&] { return check_tight(env, b.mech, tol); }},
      {"depth", [&] { return check_ic_depth(env, b.mech, cfg.depth, tol); }},
  };
  std::vector<CheckReport> reports;
  bool known = false;
  for (auto& [name, fn] : all) {
    if (cfg.check == name || (cfg.check == "all" && name != "depth")) {
      reports.push_back(fn());
      known = true;
    }
  }
  if (!known) throw InvalidInput("unknown --check '" + cfg.check + "' (ic, xic, ir, xir, ibb, xbb, tight, depth, all)");
  CsvWriter w(os);
  w.header({"check", "pass", "worst", "where", "checked", "tol", "note"});
  bool ok = true;
  for (const auto& r : reports) {
    w.cell(r.family).cell(r.pass).cell(r.worst).cell(r.where).cell(static_cast<int>(r.checked)).cell(r.tol).cell(r.note).end_row();
    ok = ok && r.pass;
  }
  legend = {{"check", "constraint family"},
            {"pass", "1 if worst <= tol"},
            {"worst", "largest violation (negative means slack everywhere)"},
            {"where", "location of the worst case"},
            {"checked", "number of inequalities evaluated"},
            {"tol", "tolerance used"},
            {"note", "extra detail"}};
  return ok ? 0 : 1;
}

const std::map<std::string, int (*)(const RunConfig&, const Source&, std::ostream&, std::ostream&, Legend&)>&
commands() {
  static const std::map<std::string, int (*)(const RunConfig&, const Source&, std::ostream&, std::ostream&, Legend&)>
      table{{"validate", cmd_validate},     {"solve", cmd_solve},         {"feasible", cmd_feasible},
            {"fees", cmd_fees},             {"bond", cmd_bond},           {"expost", cmd_expost},
            {"scan-delta", cmd_scan_delta}, {"scan-alpha", cmd_scan_alpha}, {"intermediate", cmd_intermediate},
            {"verify", cmd_verify}};
  return table;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  auto it = commands().find(cfg.subcommand);
  if (it == commands().end()) {
    err << "error: unknown subcommand '" << cfg.subcommand << "'\n";
    return 2;
  }
  try {
    Source src(cfg);
    std::ostringstream body;
    Legend legend;
    int status = it->second(cfg, src, body, err, legend);

    std::ostringstream lg;
    for (size_t k = 0; k < legend.size(); ++k)
      lg << "column " << k + 1 << ": " << legend[k].first << " - " << legend[k].second << '\n';
    if (cfg.out_dir.empty()) {
      out << body.str();
      if (cfg.gnuplot_hints) err << lg.str();
    } else {
      std::filesystem::create_directories(cfg.out_dir);
      std::filesystem::path base = std::filesystem::path(cfg.out_dir) / cfg.subcommand;
      std::ofstream f(base.string() + ".csv", std::ios::binary);
      if (!f) throw InvalidInput("cannot write to " + base.string() + ".csv");
      f << body.str();
      if (cfg.gnuplot_hints) {
        std::ofstream l(base.string() + ".legend", std::ios::binary);
        l << lg.str();
      }
    }
    return status;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFault& e) {
    err << "numerical fault: " << e.what() << '\n';
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mechlab: repeated bilateral trade mechanisms"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string alpha_grid, delta_grid;
  double tol = 0.0;

  app.add_option("--preset", cfg.preset, "usstp | stp | lambda-renewal | lambda-mix");
  app.add_option("--env-file", cfg.env_file, "environment file (key = values)");
  app.add_option("--v", cfg.v, "USSTP low valuation");
  app.add_option("--c", cfg.c, "USSTP high cost");
  app.add_option("--alpha", cfg.alpha, "persistence");
  app.add_option("--delta", cfg.delta, "discount factor");
  app.add_option("--vH", cfg.v_high);
  app.add_option("--vL", cfg.v_low);
  app.add_option("--cH", cfg.c_high);
  app.add_option("--cL", cfg.c_low);
  app.add_option("--fH", cfg.buyer_high_prob, "prior probability of v_H");
  app.add_option("--gH", cfg.seller_high_prob, "prior probability of c_H");
  app.add_option("--alphaH", cfg.alpha_high, "f(v_H | v_H)");
  app.add_option("--alphaL", cfg.alpha_low, "f(v_L | v_L)");
  app.add_option("--betaH", cfg.beta_high, "g(c_H | c_H)");
  app.add_option("--betaL", cfg.beta_low, "g(c_L | c_L)");
  auto* tol_opt = app.add_option("--tol", tol, "tolerance (default 1e-9; 1e-8 for verify)");
  app.add_option("--out-dir", cfg.out_dir, "write <subcommand>.csv here instead of stdout");
  app.add_option("--alpha-grid", alpha_grid, "lo:hi:step");
  app.add_option("--delta-grid", delta_grid, "lo:hi:step");
  app.add_option("--mechanism", cfg.mechanism, "vcg | minmax | fee | beta | zero | expost | bond");
  app.add_option("--check", cfg.check, "ic | xic | ir | xir | ibb | xbb | tight | depth | all");
  app.add_option("--emit", cfg.emit, "solve output: values | kernel | surplus");
  app.add_option("--beta-B", cfg.beta_buyer, "buyer share of surplus (beta mechanism)");
  app.add_option("--beta-S", cfg.beta_seller, "seller share of surplus (beta mechanism)");
  app.add_option("--depth", cfg.depth, "deviation depth for --check depth");
  app.add_option("--bisect-tol", cfg.bisect_tol, "bracket width for the delta threshold");
  app.add_flag("--threshold", cfg.threshold, "also report the threshold on stderr");
  app.add_flag("--gnuplot-hints", cfg.gnuplot_hints, "emit a column legend");

  for (const auto& [name, fn] : commands()) {
    (void)fn;
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  if (tol_opt->count()) cfg.tol = tol;
  try {
    if (!alpha_grid.empty()) cfg.alpha_grid = parse_grid(alpha_grid);
    if (!delta_grid.empty()) cfg.delta_grid = parse_grid(delta_grid);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return run(cfg, out, err);
}

}  // namespace mechlab::cli

// Command-line front end: builds or loads models, runs the filtration and
// decay analyses, certifies channels, and exports CSV/report files.
//
// Exit codes: 0 success, 1 runtime or certification failure, 2 bad input.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <lindblad/lindblad.hpp>

namespace {

using namespace lindblad;

struct Options {
  std::string model_path;
  std::string scenario;
  std::string params;
  std::vector<std::string> cat;
  std::string out;
  std::string format = "report";
  std::string fit_window = "1e-3,1e-2";
  std::string grid;
  double t_max = 1.0;
  int steps = 0;  // 0: per-command default
  double tol = 1e-10;
  double hbar = 0.0;  // 0: no override
};

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> kv;
  if (text.empty()) return kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("--params: expected k=v, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const std::string vs = item.substr(eq + 1);
      kv[key] = std::stod(vs, &used);
      if (used != vs.size()) throw std::invalid_argument(vs);
    } catch (const std::exception&) {
      throw ValidationError("--params: cannot parse value for '" + key + "'");
    }
  }
  return kv;
}

SystemModel build_scenario(const std::string& name, const std::string& params, double hbar) {
  auto kv = parse_params(params);
  const auto take = [&](const std::string& key, double defv) {
    const auto it = kv.find(key);
    if (it == kv.end()) return defv;
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  std::optional<SystemModel> m;
  if (name == "free_particle") {
    m = scenario_free_particle(take("m", 1.0), take("Lambda", 1.0), hbar);
  } else if (name == "quadratic_potential") {
    m = scenario_quadratic_potential(take("m", 1.0), take("omega0", 1.0),
                                     take("Lambda", 1.0), hbar);
  } else if (name == "damped_oscillator") {
    m = scenario_damped_oscillator(take("gamma", 1.0), take("omega", 1.0),
                                   take("nbar", 0.0), hbar);
  } else if (name == "pq") {
    m = scenario_pq(take("lambda", 1.0), take("Lambda", 1.0), hbar);
  } else if (name == "chain") {
    const int n = static_cast<int>(take("n", 3.0));
    const double om = take("omega", 1.0);
    const double delta = take("delta", 0.5);
    const int site = static_cast<int>(take("site", 1.0));
    const double gamma_ = take("gamma", 1.0);
    const double nbar = take("nbar", 0.0);
    if (n < 1) throw ValidationError("--params: chain needs n >= 1");
    Vec freqs = Vec::Constant(n, om);
    Mat dl = Mat::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) dl(i, i + 1) = dl(i + 1, i) = delta;
    m = scenario_chain(freqs, dl, site, gamma_, nbar, hbar);
  } else {
    throw ValidationError("--scenario: unknown name '" + name +
                          "' (expected free_particle, quadratic_potential, "
                          "damped_oscillator, pq, chain)");
  }
  if (!kv.empty())
    throw ValidationError("--params: unknown parameter '" + kv.begin()->first + "' for " +
                          name);
  return *m;
}

SystemModel resolve_model(const Options& opt) {
  if (opt.model_path.empty() == opt.scenario.empty())
    throw ValidationError("exactly one of --model and --scenario must be given");
  const double hbar = opt.hbar > 0.0 ? opt.hbar : 1.0;
  if (!opt.scenario.empty()) return build_scenario(opt.scenario, opt.params, hbar);
  SystemModel m = load_model(opt.model_path);
  if (opt.hbar > 0.0) return SystemModel(m.n(), opt.hbar, m.Q(), m.lindblad());
  return m;
}

CatCoherence parse_cat(const Options& opt, int n) {
  if (opt.cat.size() != 2)
    throw ValidationError("--cat: expected two values, z1=p,q... and z2=p,q...");
  CatCoherence cat;
  for (const auto& entry : opt.cat) {
    Vec* target = nullptr;
    std::string body;
    if (entry.rfind("z1=", 0) == 0) {
      target = &cat.z1;
      body = entry.substr(3);
    } else if (entry.rfind("z2=", 0) == 0) {
      target = &cat.z2;
      body = entry.substr(3);
    } else {
      throw ValidationError("--cat: entries must start with z1= or z2=");
    }
    const auto nums = parse_number_list(body, "--cat");
    if (static_cast<int>(nums.size()) != 2 * n)
      throw ValidationError("--cat: expected " + std::to_string(2 * n) +
                            " coordinates, got " + std::to_string(nums.size()));
    target->resize(nums.size());
    for (std::size_t i = 0; i < nums.size(); ++i) (*target)(i) = nums[i];
  }
  if (cat.z1.size() == 0 || cat.z2.size() == 0)
    throw ValidationError("--cat: both z1= and z2= are required");
  return cat;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto nums = parse_number_list(text, "--fit-window");
  if (nums.size() != 2 || !(nums[0] > 0.0) || !(nums[1] > nums[0]))
    throw ValidationError("--fit-window: expected lo,hi with 0 < lo < hi");
  return {nums[0], nums[1]};
}

void check_format(const Options& opt) {
  if (opt.format != "csv" && opt.format != "report")
    throw ValidationError("--format: must be csv or report");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("--out: cannot open '" + path + "' for writing");
  return f;
}

int cmd_analyze(const Options& opt) {
  const SystemModel m = resolve_model(opt);
  const HormanderFiltration f = filtration(m, opt.tol);
  const std::string text = filtration_report_json(m, f).dump(2) + "\n";
  if (!opt.out.empty()) {
    auto f_out = open_out(opt.out);
    f_out << text;
  } else {
    std::cout << text;
  }
  return 0;
}

int cmd_simulate(const Options& opt) {
  check_format(opt);
  const SystemModel m = resolve_model(opt);
  const CatCoherence cat = parse_cat(opt, m.n());
  const auto [lo, hi] = parse_window(opt.fit_window);
  if (!(opt.t_max > 0.0)) throw ValidationError("--t-max must be > 0");
  const int steps = opt.steps > 0 ? opt.steps : 200;
  if (steps < 2) throw ValidationError("--steps must be >= 2");

  std::vector<double> grid;
  for (int i = 0; i < 12; ++i) grid.push_back(lo * std::pow(hi / lo, i / 11.0));
  for (int i = 0; i <= steps; ++i) grid.push_back(opt.t_max * i / steps);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const auto series = decay_series(m, cat, grid);
  const HormanderFiltration filt = filtration(m, opt.tol);
  const DecayPrediction pred = predict(m, filt, cat);
  const ExponentFit fit = fit_exponent(series, lo, hi);

  if (!opt.out.empty()) {
    auto f_out = open_out(opt.out);
    write_decay_csv(f_out, series);
    std::cout << prediction_report_json(pred, &fit).dump(2) << "\n";
  } else if (opt.format == "csv") {
    write_decay_csv(std::cout, series);
  } else {
    std::cout << prediction_report_json(pred, &fit).dump(2) << "\n";
  }
  return 0;
}

int cmd_check(const Options& opt) {
  check_format(opt);
  const SystemModel m = resolve_model(opt);
  if (!(opt.t_max > 0.0)) throw ValidationError("--t-max must be > 0");
  const int steps = opt.steps > 0 ? opt.steps : 50;
  if (steps < 2) throw ValidationError("--steps must be >= 2");

  std::vector<CheckRow> rows;
  double worst_cp = 0.0, worst_semigroup = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = opt.t_max * i / steps;
    CheckRow row;
    row.t = t;
    const Mat r = flow(m, t);
    row.d = diffusion(m, t);
    row.min_eig_d = min_eigenvalue(row.d);
    row.cp_min_eig = cp_min_eig({r, row.d, m.hbar()});
    rows.push_back(row);
    worst_cp = std::min(worst_cp, row.cp_min_eig);
    if (t > 0.0) {
      const Mat rh = flow(m, t / 2.0);
      const Mat dh = diffusion(m, t / 2.0);
      const double resid = (row.d - (dh + rh * dh * rh.transpose())).norm();
      worst_semigroup = std::max(worst_semigroup, resid);
    }
  }
  const bool pass = worst_cp >= -1e-10 && worst_semigroup <= 1e-8;
  nlohmann::json summary = {{"pass", pass},
                            {"max_cp_violation", std::max(0.0, -worst_cp)},
                            {"max_semigroup_residual", worst_semigroup}};
  if (!opt.out.empty()) {
    auto f_out = open_out(opt.out);
    write_check_csv(f_out, rows);
    std::cout << summary.dump(2) << "\n";
  } else if (opt.format == "csv") {
    write_check_csv(std::cout, rows);
  } else {
    std::cout << summary.dump(2) << "\n";
  }
  return pass ? 0 : 1;
}

int cmd_scenario(const Options& opt) {
  if (opt.scenario.empty()) throw ValidationError("scenario: --scenario NAME is required");
  const double hbar = opt.hbar > 0.0 ? opt.hbar : 1.0;
  const SystemModel m = build_scenario(opt.scenario, opt.params, hbar);
  if (!opt.out.empty()) {
    save_model(m, opt.out);
  } else {
    std::cout << model_to_json(m).dump(2) << "\n";
  }
  return 0;
}

int cmd_wigner(const Options& opt) {
  check_format(opt);
  const SystemModel m = resolve_model(opt);
  const CatCoherence cat = parse_cat(opt, m.n());
  const int steps = opt.steps > 0 ? opt.steps : 128;

  GridSpec grid;
  if (!opt.grid.empty()) {
    const auto nums = parse_number_list(opt.grid, "--grid");
    if (nums.size() != 4)
      throw ValidationError("--grid: expected pmin,pmax,qmin,qmax");
    grid.pmin = nums[0];
    grid.pmax = nums[1];
    grid.qmin = nums[2];
    grid.qmax = nums[3];
  } else {
    double zmax = 0.0;
    for (int i = 0; i < 2 * m.n(); ++i)
      zmax = std::max({zmax, std::abs(cat.z1(i)), std::abs(cat.z2(i))});
    const double half = zmax + 8.0 * std::sqrt(m.hbar());
    grid.pmin = grid.qmin = -half;
    grid.pmax = grid.qmax = half;
  }
  grid.np = grid.nq = steps;

  const auto field = wigner_field(m, cat_state_terms(cat.z1, cat.z2), opt.t_max, grid);
  if (field.aliasing_warning)
    std::cerr << "warning: characteristic function not resolved by the dual grid "
                 "(aliasing ratio "
              << field.aliasing_ratio << "); enlarge the grid or sample count\n";

  double wmax = 0.0, wmin = 0.0;
  for (const auto& v : field.values) {
    wmax = std::max(wmax, v.real());
    wmin = std::min(wmin, v.real());
  }
  nlohmann::json summary = wigner_meta_json(field);
  summary["w_max"] = wmax;
  summary["w_min"] = wmin;

  if (!opt.out.empty()) {
    auto f_out = open_out(opt.out);
    write_wigner_csv(f_out, field);
    auto f_meta = open_out(opt.out + ".meta.json");
    f_meta << wigner_meta_json(field).dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
  } else if (opt.format == "csv") {
    write_wigner_csv(std::cout, field);
  } else {
    std::cout << summary.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-channel evolution, decoherence-free structure, and "
               "cat-coherence decay for quadratic open systems"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--model", opt.model_path, "Path to a model file");
  app.add_option("--scenario", opt.scenario,
                 "Built-in scenario: free_particle, quadratic_potential, "
                 "damped_oscillator, pq, chain");
  app.add_option("--params", opt.params, "Scenario parameters, k=v,k=v,...");
  app.add_option("--cat", opt.cat, "Coherence endpoints: z1=p,q... z2=p,q...")
      ->expected(2);
  app.add_option("--t-max", opt.t_max, "Top of the time range (wigner: the render time)");
  app.add_option("--steps", opt.steps,
                 "Grid intervals (simulate/check) or per-axis samples (wigner)");
  app.add_option("--tol", opt.tol, "Filtration rank tolerance");
  app.add_option("--hbar", opt.hbar, "Override hbar");
  app.add_option("--out", opt.out, "Output path for CSV data");
  app.add_option("--format", opt.format, "csv or report (stdout format without --out)");
  app.add_option("--fit-window", opt.fit_window, "Decay-fit window lo,hi");
  app.add_option("--grid", opt.grid, "Wigner window pmin,pmax,qmin,qmax");

  auto* analyze = app.add_subcommand("analyze", "Filtration and decoherence-free report");
  auto* simulate = app.add_subcommand("simulate", "Cat-coherence decay series and fit");
  auto* check = app.add_subcommand("check", "CP certificate and semigroup residuals");
  auto* scenario = app.add_subcommand("scenario", "Write a built-in scenario model file");
  auto* wigner = app.add_subcommand("wigner", "Wigner field of a cat state on a grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (check->parsed()) return cmd_check(opt);
    if (scenario->parsed()) return cmd_scenario(opt);
    if (wigner->parsed()) return cmd_wigner(opt);
    throw ValidationError("no command given");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "gpclt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "gpclt/errors.hpp"
#include "gpclt/harness.hpp"
#include "gpclt/hermite.hpp"
#include "gpclt/kernel.hpp"
#include "gpclt/sigma_models.hpp"
#include "gpclt/simulate.hpp"
#include "gpclt/text.hpp"
#include "gpclt/variance.hpp"

namespace gpclt::cli {

namespace {

using ojson = nlohmann::ordered_json;

// Raised when a verification subcommand's assertion does not hold.
class VerificationFailure : public Error {
 public:
  explicit VerificationFailure(const std::string& detail) : Error("verification", detail) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& detail) : Error("usage", detail) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& detail) : Error("io", detail) {}
};

int exit_code_for(const Error& e) {
  const auto& c = e.category();
  if (c == "parse" || c == "usage") return kExitUsage;
  if (c == "covariance-invalid") return kExitCovariance;
  if (c == "verification") return kExitVerification;
  return kExitDomain;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes `body` to `path`, or to `fallback` when no path was given.
void emit(const std::string& path, const std::string& body, std::ostream& fallback) {
  if (path.empty()) {
    fallback << body;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << body;
  if (!f) throw IoError("write failed for " + path);
}

// Flag values as parsed; only the ones the user actually passed are merged.
struct Flags {
  std::string config;
  std::string sigma, f, h_grid, expect, out, z_out, hist_out;
  double a = 0.0, b = 1.0, tol = 0.0;
  std::vector<double> h;
  std::vector<int> k;
  std::size_t paths = 0;
  int n_per_h = 0, max = 0, j_max = 0, k0 = 0, threads = 0;
  std::uint64_t seed = 0;
  bool explore = false, no_sup = false;
};

class Registry {
 public:
  void add(CLI::App* app, const std::string& name, CLI::Option* opt) { opts_[app][name] = opt; }
  bool given(CLI::App* app, const std::string& name) const {
    auto it = opts_.find(app);
    if (it == opts_.end()) return false;
    auto jt = it->second.find(name);
    return jt != it->second.end() && jt->second->count() > 0;
  }

 private:
  std::map<CLI::App*, std::map<std::string, CLI::Option*>> opts_;
};

ExperimentConfig merge(const Flags& fl, CLI::App* sub, const Registry& reg) {
  ExperimentConfig cfg;
  if (reg.given(sub, "config")) cfg = config_from_json(read_file(fl.config));
  auto g = [&](const char* name) { return reg.given(sub, name); };
  if (g("sigma")) cfg.sigma = fl.sigma;
  if (g("f")) cfg.f = fl.f;
  if (g("a")) cfg.a = fl.a;
  if (g("b")) cfg.b = fl.b;
  if (g("h")) {
    if (fl.h.size() == 1) {
      cfg.h = fl.h.front();
    } else {
      cfg.h_grid = fl.h;
    }
  }
  if (g("h-grid")) cfg.h_grid = parse_h_grid(fl.h_grid);
  if (g("k")) cfg.k = fl.k;
  if (g("paths")) cfg.n_paths = fl.paths;
  if (g("n-per-h")) cfg.n_per_h = fl.n_per_h;
  if (g("seed")) cfg.seed = fl.seed;
  if (g("tol")) cfg.tol = fl.tol;
  if (g("max")) cfg.max = fl.max;
  if (g("jmax")) cfg.j_max = fl.j_max;
  if (g("k0")) cfg.k0 = fl.k0;
  if (g("no-sup")) cfg.with_sup = false;
  if (g("expect")) cfg.expect = fl.expect;
  if (g("explore")) cfg.explore = true;
  if (g("out")) cfg.out = fl.out;
  if (g("z-out")) cfg.z_out = fl.z_out;
  if (g("hist-out")) cfg.hist_out = fl.hist_out;
  return cfg;
}

void need(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what + " is required");
}

IncrementVarianceSpec sigma_of(const ExperimentConfig& c) {
  need(!c.sigma.empty(), "--sigma");
  return parse_sigma_spec(c.sigma);
}

FunctionSpec f_of(const ExperimentConfig& c) {
  need(!c.f.empty(), "--f");
  return parse_function_spec(c.f);
}

std::vector<double> h_values(const ExperimentConfig& c) {
  if (!c.h_grid.empty()) return c.h_grid;
  need(c.h.has_value(), "--h or --h-grid");
  return {*c.h};
}

Interval interval_of(const ExperimentConfig& c) {
  if (!(c.b > c.a)) throw DomainError("interval requires a < b");
  return {c.a, c.b};
}

std::string cmd_coeffs(const ExperimentConfig& c) {
  const auto f = f_of(c);
  const auto e = coefficients(f, c.max, c.tol.value_or(kDefaultCoeffTol));
  return to_json(e) + "\n";
}

std::string cmd_kernel(const ExperimentConfig& c, int threads) {
  const auto spec = sigma_of(c);
  need(!c.k.empty(), "--k");
  const auto hs = h_values(c);
  const auto table = moment_table(spec, interval_of(c), c.k, hs, c.tol.value_or(kDefaultKernelTol),
                                  c.with_sup, threads);
  std::ostringstream os;
  write_csv(table, os);
  return os.str();
}

std::string cmd_conditions(const ExperimentConfig& c, int threads) {
  const auto spec = sigma_of(c);
  need(!c.h_grid.empty(), "--h-grid");
  int k0 = 1;
  if (c.k0) {
    k0 = *c.k0;
  } else if (!c.f.empty()) {
    k0 = coefficients(f_of(c), c.max).k0;
  }
  const int j_max = std::max(c.j_max, 2 * k0 + 2);
  const auto rep = check_conditions(spec, interval_of(c), c.h_grid, j_max, k0,
                                    c.tol.value_or(kDefaultKernelTol), threads);
  return to_json(rep) + "\n";
}

std::string cmd_variance(const ExperimentConfig& c) {
  const auto spec = sigma_of(c);
  const auto fexp = coefficients(f_of(c), c.max);
  need(c.h.has_value(), "--h");
  const auto rep = exact_variance(fexp, spec, interval_of(c), *c.h,
                                  c.tol.value_or(kDefaultVarianceTol));
  return to_json(rep) + "\n";
}

std::string cmd_asymptotics(const ExperimentConfig& c) {
  const auto spec = sigma_of(c);
  const auto iv = interval_of(c);
  ojson j;
  j["sigma"] = to_string(spec);
  auto rows = ojson::array();
  for (int k : c.k) {
    const auto aj = asymptotic_J(spec, k, iv);
    ojson row;
    row["k"] = k;
    row["regime"] = to_string(aj.regime);
    if (aj.bounds_only) {
      row["constant"] = nullptr;
    } else {
      row["constant"] = aj.constant;
    }
    row["rate"] = aj.rate_text();
    rows.push_back(row);
  }
  j["J"] = rows;
  if (!c.f.empty()) {
    const auto fexp = coefficients(f_of(c), c.max);
    const auto av = asymptotic_variance(fexp, spec, iv);
    j["variance"] = {{"regime", to_string(av.regime)}, {"formula", av.formula}};
    if (c.h) j["variance"]["predicted"] = av.eval(*c.h);
  }
  if (c.k.empty() && c.f.empty()) throw UsageError("--k or --f is required");
  return j.dump(2) + "\n";
}

std::string cmd_simulate(const ExperimentConfig& c, int threads) {
  const auto spec = sigma_of(c);
  need(c.h.has_value(), "--h");
  const GridSpec grid{c.a, c.b, *c.h, c.n_per_h};
  const auto bundle = sample_paths(spec, grid, c.n_paths, c.seed, threads);
  std::ostringstream os;
  write_csv(bundle, os);
  return os.str();
}

std::string cmd_clt(const ExperimentConfig& c, int threads, std::ostream& out) {
  CltConfig cc;
  cc.f = f_of(c);
  cc.sigma = sigma_of(c);
  need(c.h.has_value(), "--h");
  cc.a = c.a;
  cc.b = c.b;
  cc.h = *c.h;
  cc.n_per_h = c.n_per_h;
  cc.n_paths = c.n_paths;
  cc.seed = c.seed;
  cc.tol = c.tol.value_or(kDefaultVarianceTol);
  cc.expansion_length = c.max;
  if (!c.expect.empty() && c.expect != "normal" && c.expect != "nonnormal") {
    throw UsageError("--expect must be normal or nonnormal");
  }
  const auto rep = run_clt_experiment(cc, threads);

  std::optional<std::string> verdict;
  bool pass = true;
  if (!c.explore && !c.expect.empty()) {
    if (c.expect == "normal") {
      pass = rep.ks.p_value > 0.01;
    } else {
      pass = rep.ks.p_value < 1e-6;
    }
    verdict = pass ? "pass" : "fail";
  }
  if (!c.z_out.empty()) {
    std::ostringstream os;
    write_z_csv(rep.z, os);
    emit(c.z_out, os.str(), out);
  }
  if (!c.hist_out.empty()) {
    std::ostringstream os;
    write_histogram_csv(rep.z, os);
    emit(c.hist_out, os.str(), out);
  }
  emit(c.out, to_json(rep, verdict) + "\n", out);
  if (!pass) {
    throw VerificationFailure("expected " + c.expect + " but ks.p_value = " +
                              text::digits17(rep.ks.p_value));
  }
  return {};
}

std::string cmd_study(const ExperimentConfig& c, int threads) {
  const auto spec = sigma_of(c);
  const auto f = f_of(c);
  need(!c.h_grid.empty(), "--h-grid");
  const auto rows = variance_convergence_study(f, spec, interval_of(c), c.h_grid, c.max,
                                               c.tol.value_or(kDefaultVarianceTol), threads);
  std::ostringstream os;
  write_csv(rows, os);
  return os.str();
}

int default_threads() {
  if (const char* env = std::getenv("GPCLT_THREADS")) {
    const auto n = text::parse_integer(env, "GPCLT_THREADS");
    if (n < 0) throw ParseError("GPCLT_THREADS must be >= 0");
    return static_cast<int>(n);
  }
  return 0;
}

}  // namespace

std::string to_json(const ExperimentConfig& c, int indent) {
  ojson j;
  if (!c.sigma.empty()) j["sigma"] = c.sigma;
  if (!c.f.empty()) j["f"] = c.f;
  j["a"] = c.a;
  j["b"] = c.b;
  if (c.h) j["h"] = *c.h;
  if (!c.h_grid.empty()) j["h_grid"] = c.h_grid;
  if (!c.k.empty()) j["k"] = c.k;
  j["n_paths"] = c.n_paths;
  j["n_per_h"] = c.n_per_h;
  j["seed"] = c.seed;
  if (c.tol) j["tol"] = *c.tol;
  j["max"] = c.max;
  j["j_max"] = c.j_max;
  if (c.k0) j["k0"] = *c.k0;
  j["with_sup"] = c.with_sup;
  if (!c.expect.empty()) j["expect"] = c.expect;
  j["explore"] = c.explore;
  if (!c.out.empty()) j["out"] = c.out;
  if (!c.z_out.empty()) j["z_out"] = c.z_out;
  if (!c.hist_out.empty()) j["hist_out"] = c.hist_out;
  return j.dump(indent);
}

ExperimentConfig config_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "sigma") c.sigma = v.get<std::string>();
      else if (key == "f") c.f = v.get<std::string>();
      else if (key == "a") c.a = v.get<double>();
      else if (key == "b") c.b = v.get<double>();
      else if (key == "h") c.h = v.get<double>();
      else if (key == "h_grid") {
        c.h_grid = v.is_string() ? parse_h_grid(v.get<std::string>()) : v.get<std::vector<double>>();
      }
      else if (key == "k") c.k = v.get<std::vector<int>>();
      else if (key == "n_paths") c.n_paths = v.get<std::size_t>();
      else if (key == "n_per_h") c.n_per_h = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "tol") c.tol = v.get<double>();
      else if (key == "max") c.max = v.get<int>();
      else if (key == "j_max") c.j_max = v.get<int>();
      else if (key == "k0") c.k0 = v.get<int>();
      else if (key == "with_sup") c.with_sup = v.get<bool>();
      else if (key == "expect") c.expect = v.get<std::string>();
      else if (key == "explore") c.explore = v.get<bool>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "z_out") c.z_out = v.get<std::string>();
      else if (key == "hist_out") c.hist_out = v.get<std::string>();
      else throw ParseError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

std::vector<double> parse_h_grid(const std::string& s) {
  std::vector<double> out;
  if (s.rfind("dyadic:", 0) == 0) {
    const auto parts = text::split(std::string_view(s).substr(7), ':');
    if (parts.size() != 2) throw ParseError("h grid 'dyadic:<i>:<j>' expects two exponents");
    const auto i = text::parse_integer(parts[0], "first exponent");
    const auto jx = text::parse_integer(parts[1], "last exponent");
    if (i < 0 || jx < i || jx > 1000) throw ParseError("h grid exponents must satisfy 0 <= i <= j");
    for (auto e = i; e <= jx; ++e) out.push_back(std::ldexp(1.0, static_cast<int>(-e)));
    return out;
  }
  for (auto tok : text::split(s, ',')) out.push_back(text::parse_double(tok, "h"));
  if (out.empty()) throw ParseError("empty h grid");
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for CLTs of L^p moduli of continuity of Gaussian processes",
               "gpclt"};
  // `--h` is the step size, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Flags fl;
  Registry reg;
  int threads = 0;

  auto* coeffs = app.add_subcommand("coeffs", "Hermite coefficients of f (JSON)");
  auto* kernel = app.add_subcommand("kernel", "Kernel moment table J_k, S_k (CSV)");
  auto* conditions = app.add_subcommand("conditions", "CLT hypothesis diagnostics (JSON)");
  auto* variance = app.add_subcommand("variance", "Exact series variance (JSON)");
  auto* asymptotics = app.add_subcommand("asymptotics", "Asymptotic regimes and constants (JSON)");
  auto* simulate = app.add_subcommand("simulate", "Sample increment paths (CSV)");
  auto* clt = app.add_subcommand("clt", "Monte Carlo CLT experiment (JSON)");
  auto* study = app.add_subcommand("study", "Variance convergence study (CSV)");
  const std::vector<CLI::App*> all{coeffs, kernel,   conditions, variance,
                                   asymptotics, simulate, clt,   study};

  for (auto* s : all) {
    reg.add(s, "config", s->add_option("--config", fl.config, "JSON config file"));
    reg.add(s, "out", s->add_option("--out", fl.out, "Output file (default stdout)"));
    reg.add(s, "tol", s->add_option("--tol", fl.tol, "Tolerance"));
    s->add_option("--threads", threads, "Worker threads (default $GPCLT_THREADS)");
  }
  for (auto* s : {coeffs, conditions, variance, asymptotics, clt, study}) {
    reg.add(s, "f", s->add_option("--f", fl.f, "Test function spec"));
    reg.add(s, "max", s->add_option("--max", fl.max, "Hermite expansion length M"));
  }
  for (auto* s : {kernel, conditions, variance, asymptotics, simulate, clt, study}) {
    reg.add(s, "sigma", s->add_option("--sigma", fl.sigma, "Increment variance spec"));
    reg.add(s, "a", s->add_option("--a", fl.a, "Left end of the interval"));
    reg.add(s, "b", s->add_option("--b", fl.b, "Right end of the interval"));
  }
  for (auto* s : {kernel, variance, asymptotics, simulate, clt}) {
    reg.add(s, "h", s->add_option("--h", fl.h, "Step h (kernel: comma list)")->delimiter(','));
  }
  for (auto* s : {kernel, conditions, study}) {
    reg.add(s, "h-grid", s->add_option("--h-grid", fl.h_grid, "dyadic:<i>:<j> or comma list"));
  }
  for (auto* s : {kernel, asymptotics}) {
    reg.add(s, "k", s->add_option("--k", fl.k, "Moment orders (comma list)")->delimiter(','));
  }
  reg.add(kernel, "no-sup", kernel->add_flag("--no-sup", fl.no_sup, "Skip the sup-integrals"));
  reg.add(conditions, "jmax", conditions->add_option("--jmax", fl.j_max, "Largest moment order"));
  reg.add(conditions, "k0", conditions->add_option("--k0", fl.k0, "Hermite index k0"));
  for (auto* s : {simulate, clt}) {
    reg.add(s, "paths", s->add_option("--paths", fl.paths, "Number of paths"));
    reg.add(s, "n-per-h", s->add_option("--n-per-h", fl.n_per_h, "Grid points per h"));
    reg.add(s, "seed", s->add_option("--seed", fl.seed, "Random seed"));
  }
  reg.add(clt, "expect", clt->add_option("--expect", fl.expect, "normal | nonnormal"));
  reg.add(clt, "explore", clt->add_flag("--explore", fl.explore, "Report without a verdict"));
  reg.add(clt, "z-out", clt->add_option("--z-out", fl.z_out, "CSV of standardized values"));
  reg.add(clt, "hist-out", clt->add_option("--hist-out", fl.hist_out, "Histogram CSV"));

  try {
    threads = default_threads();
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.category() << ": " << e.what() << "\n";
    return exit_code_for(e);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const auto cfg = merge(fl, sub, reg);
    std::string body;
    if (sub == coeffs) body = cmd_coeffs(cfg);
    else if (sub == kernel) body = cmd_kernel(cfg, threads);
    else if (sub == conditions) body = cmd_conditions(cfg, threads);
    else if (sub == variance) body = cmd_variance(cfg);
    else if (sub == asymptotics) body = cmd_asymptotics(cfg);
    else if (sub == simulate) body = cmd_simulate(cfg, threads);
    else if (sub == study) body = cmd_study(cfg, threads);
    else if (sub == clt) {
      cmd_clt(cfg, threads, out);
      return kExitOk;
    }
    emit(cfg.out, body, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.category() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::bad_alloc&) {
    err << "error: memory: allocation failed\n";
    return kExitDomain;
  }
}

}  // namespace gpclt::cli

#include "threshold_regret/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include "threshold_regret/chernoff.hpp"
#include "threshold_regret/errors.hpp"
#include "threshold_regret/ewm.hpp"
#include "threshold_regret/inference.hpp"
#include "threshold_regret/montecarlo.hpp"
#include "threshold_regret/nuisance.hpp"
#include "threshold_regret/regret_asymptotics.hpp"
#include "threshold_regret/sample.hpp"
#include "threshold_regret/swm.hpp"

namespace threshold_regret {

namespace {

using Json = nlohmann::ordered_json;

enum class Format { Text, Csv, Json };

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string scalar_string(const Json& v, Format f) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    return f == Format::Text ? fmt_text(d) : fmt17(d);
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ValidationError(what + ": '" + text + "' is not a finite number");
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ValidationError(what + ": '" + text + "' is not a nonnegative integer");
  return v;
}

std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_u64(item, "--n");
    if (v < 2) throw ValidationError("--n: sample sizes must be at least 2");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ValidationError("--n: empty list");
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

BandwidthRule parse_bandwidth(const std::string& text) {
  BandwidthRule rule;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "auto" && colon == std::string::npos)
    rule = PlugInOptimal{};
  else if (head == "fixed" && !arg.empty())
    rule = FixedBandwidth{parse_double(arg, "--bandwidth fixed")};
  else if (head == "lambda" && !arg.empty())
    rule = LambdaRate{parse_double(arg, "--bandwidth lambda"), 2};
  else if (head == "undersmooth")
    rule = Undersmoothed{arg.empty() ? 0.05 : parse_double(arg, "--bandwidth undersmooth"), std::nullopt};
  else
    throw ValidationError("--bandwidth must be auto, fixed:<sigma>, lambda:<lambda> or undersmooth[:<shrink>] (got '" +
                          text + "')");
  validate_rule(rule);
  return rule;
}

/// Collects the configuration echo and the result, then renders them.
class Report {
 public:
  explicit Report(Format f) : format_(f) {}

  Json& config() { return config_; }
  Json& result() { return result_; }
  /// Preformatted table appended after the key/value block (text and CSV).
  void set_table(std::string t) { table_ = std::move(t); }
  Json& table_json() { return table_json_; }

  std::string render() const {
    std::ostringstream out;
    if (format_ == Format::Json) {
      Json doc;
      doc["config"] = config_;
      if (!result_.is_null()) doc["result"] = result_;
      if (!table_json_.is_null()) doc["table"] = table_json_;
      out << doc.dump(2) << '\n';
      return out.str();
    }
    for (const auto& [k, v] : config_.items()) out << "# " << k << ": " << scalar_string(v, format_) << '\n';
    if (!result_.is_null()) {
      if (format_ == Format::Csv) out << "key,value\n";
      for (const auto& [k, v] : result_.items()) {
        if (v.is_array()) {
          for (const auto& item : v)
            out << k << (format_ == Format::Csv ? "," : ": ") << scalar_string(item, format_) << '\n';
          continue;
        }
        out << k << (format_ == Format::Csv ? "," : ": ") << scalar_string(v, format_) << '\n';
      }
    }
    out << table_;
    return out.str();
  }

 private:
  Format format_;
  Json config_ = Json::object();
  Json result_;
  Json table_json_;
  std::string table_;
};

struct Common {
  std::string format = "text";
  std::string out_path;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
};

struct DataOptions {
  std::string data;
  std::optional<double> propensity;
  double eta = 0.01;
  std::optional<double> tmin, tmax;
};

struct ChernoffOptions {
  std::size_t paths = 200000;
  double step = 5e-4;
  double halfwidth = 2.5;
};

Format parse_format(const std::string& s) {
  if (s == "text") return Format::Text;
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ValidationError("--format must be text, csv or json");
}

std::uint64_t resolve_seed(const Common& c, Json& config) {
  if (c.seed) {
    config["seed"] = *c.seed;
    config["seed_source"] = "flag";
    return *c.seed;
  }
  if (const char* env = std::getenv("THRESHOLD_REGRET_SEED"); env && *env) {
    const auto s = parse_u64(env, "THRESHOLD_REGRET_SEED");
    config["seed"] = s;
    config["seed_source"] = "env";
    return s;
  }
  config["seed"] = 42;
  config["seed_source"] = "default";
  return 42;
}

void add_common(CLI::App* sub, Common& c, bool seeded) {
  sub->add_option("--format", c.format, "Output format: text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  sub->add_option("--out", c.out_path, "Write output to this file instead of stdout");
  if (seeded) {
    sub->add_option("--seed", c.seed, "Master seed (fallback: THRESHOLD_REGRET_SEED, then 42)");
    sub->add_option("--jobs", c.jobs, "Worker threads, 0 = all cores; results do not depend on it");
  }
}

void add_data(CLI::App* sub, DataOptions& d) {
  sub->add_option("--data", d.data, "CSV file with columns y,d,x[,p]")->required();
  sub->add_option("--propensity", d.propensity, "Known constant propensity when the CSV has no p column");
  sub->add_option("--eta", d.eta, "Overlap bound: propensities must lie in [eta, 1 - eta]");
  sub->add_option("--tmin", d.tmin, "Lower end of the threshold search space");
  sub->add_option("--tmax", d.tmax, "Upper end of the threshold search space");
}

void add_chernoff(CLI::App* sub, ChernoffOptions& c, const std::string& prefix) {
  sub->add_option("--" + prefix + "paths", c.paths, "Chernoff simulation paths");
  sub->add_option("--" + prefix + "step", c.step, "Chernoff grid step");
  sub->add_option("--" + prefix + "halfwidth", c.halfwidth, "Chernoff domain half-width");
}

ChernoffConfig chernoff_config(const ChernoffOptions& o, std::uint64_t seed, unsigned jobs, Json& config) {
  ChernoffConfig c;
  c.n_paths = o.paths;
  c.grid_step = o.step;
  c.domain_halfwidth = o.halfwidth;
  c.seed = seed;
  c.jobs = jobs;
  config["chernoff_paths"] = o.paths;
  config["chernoff_step"] = o.step;
  config["chernoff_halfwidth"] = o.halfwidth;
  return c;
}

struct LoadedData {
  Sample sample;
  ParamSpace space;
};

LoadedData load_data(const DataOptions& d, Json& config) {
  config["data"] = d.data;
  if (d.propensity) config["propensity"] = *d.propensity;
  config["eta"] = d.eta;
  SampleOptions opts;
  opts.eta = d.eta;
  Sample s = read_sample_csv(d.data, d.propensity, opts);
  ParamSpace space = ParamSpace::around(s);
  if (d.tmin) space.lo = *d.tmin;
  if (d.tmax) space.hi = *d.tmax;
  if (!(space.lo < space.hi)) throw ValidationError("--tmin must be below --tmax");
  config["tmin"] = space.lo;
  config["tmax"] = space.hi;
  return {std::move(s), space};
}

void put_estimate(const ThresholdEstimate& est, Json& r) {
  r["policy"] = to_string(est.policy_kind);
  r["t_hat"] = est.t_hat;
  r["objective"] = est.objective_value;
  r["n"] = est.n;
  if (est.maximizing_interval) {
    r["interval_lo"] = est.maximizing_interval->first;
    r["interval_hi"] = est.maximizing_interval->second;
  }
  if (est.bandwidth) r["bandwidth"] = *est.bandwidth;
  if (est.lambda) r["lambda"] = *est.lambda;
  if (est.rule) r["bandwidth_rule"] = describe(*est.rule);
  if (est.policy_kind == PolicyKind::Swm) r["bandwidth_fallback"] = est.bandwidth_fallback;
  if (!est.warnings.empty()) r["warning"] = est.warnings;
}

void emit(const Report& report, const Common& c, std::ostream& out) {
  const std::string text = report.render();
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out_path, std::ios::binary);
  if (!file) throw ValidationError("cannot open output file '" + c.out_path + "'");
  file << text;
  if (!file) throw ValidationError("failed writing output file '" + c.out_path + "'");
}

// estimate ----------------------------------------------------------------

struct EstimateArgs {
  Common common;
  DataOptions data;
  std::string policy = "ewm";
  std::string bandwidth = "auto";
};

void run_estimate(const EstimateArgs& a, std::ostream& out) {
  Report report(parse_format(a.common.format));
  Json& cfg = report.config();
  cfg["command"] = "estimate";
  cfg["policy"] = a.policy;
  std::optional<BandwidthRule> rule;
  if (a.policy == "swm") {
    rule = parse_bandwidth(a.bandwidth);
    cfg["bandwidth"] = describe(*rule);
  }
  const Kernel kernel = gaussian_cdf_kernel();
  auto [sample, space] = load_data(a.data, cfg);
  const ThresholdEstimate est = a.policy == "ewm"
                                    ? fit_ewm(sample, space)
                                    : fit_swm(sample, kernel, *rule, space, ewm_plug_in_nuisance(space, kernel));
  put_estimate(est, report.result());
  emit(report, a.common, out);
}

// infer -------------------------------------------------------------------

struct InferArgs {
  Common common;
  DataOptions data;
  ChernoffOptions chernoff;
  std::string policy = "ewm";
  std::optional<std::string> method;
  std::string bandwidth = "auto";
  double level = 0.95;
  std::size_t reps = 999;
};

void put_interval(const ConfidenceInterval& ci, Json& r) {
  r["method"] = to_string(ci.method);
  r["level"] = ci.level;
  r["lo"] = ci.lo;
  r["hi"] = ci.hi;
  r["center"] = ci.center;
  r["half_width"] = ci.half_width;
  r["bias_correction"] = ci.bias_correction;
}

void put_nuisance(const NuisanceEstimates& nu, Json& r) {
  r["K_hat"] = nu.k_hat;
  r["H_hat"] = nu.h_hat;
  r["A_hat"] = nu.a_hat;
  r["nuisance_point"] = nu.eval_point;
}

void run_infer(const InferArgs& a, std::ostream& out) {
  Report report(parse_format(a.common.format));
  Json& cfg = report.config();
  cfg["command"] = "infer";
  const std::string method = a.method.value_or(a.policy == "ewm" ? "plugin" : "bias-corrected");
  const bool ewm = a.policy == "ewm";
  if (ewm && method != "plugin" && method != "bootstrap")
    throw ValidationError("--method " + method + " applies to --policy swm; use plugin or bootstrap with ewm");
  if (!ewm && method != "bias-corrected" && method != "undersmooth")
    throw ValidationError("--method " + method + " applies to --policy ewm; use bias-corrected or undersmooth with swm");
  if (!(a.level > 0.0 && a.level < 1.0)) throw ValidationError("--level must lie in (0,1)");
  cfg["policy"] = a.policy;
  cfg["method"] = method;
  cfg["level"] = a.level;

  std::optional<BandwidthRule> rule;
  if (!ewm) {
    rule = parse_bandwidth(a.bandwidth);
    if (method == "undersmooth") {
      if (std::holds_alternative<FixedBandwidth>(*rule))
        throw ValidationError("--method undersmooth needs --bandwidth auto, lambda:<lambda> or undersmooth[:<shrink>]");
      if (const auto* l = std::get_if<LambdaRate>(&*rule)) rule = Undersmoothed{0.05, l->lambda};
      if (std::holds_alternative<PlugInOptimal>(*rule)) rule = Undersmoothed{};
    } else if (std::holds_alternative<Undersmoothed>(*rule)) {
      throw ValidationError("--method bias-corrected cannot use an undersmooth bandwidth; use --method undersmooth");
    }
    cfg["bandwidth"] = describe(*rule);
  }
  const std::uint64_t seed = resolve_seed(a.common, cfg);
  if (ewm && method == "bootstrap") {
    if (a.reps < 200) throw ValidationError("--reps must be at least 200 for the bootstrap");
    cfg["reps"] = a.reps;
  }
  std::optional<ChernoffConfig> ccfg;
  if (ewm && method == "plugin") {
    ccfg = chernoff_config(a.chernoff, seed, a.common.jobs, cfg);
    if (ccfg->domain_halfwidth < 2.0 || ccfg->grid_step > 1e-3 || ccfg->n_paths < 10000)
      throw ValidationError("Chernoff settings need halfwidth >= 2, step <= 1e-3 and paths >= 10000");
  }

  const Kernel kernel = gaussian_cdf_kernel();
  auto [sample, space] = load_data(a.data, cfg);
  Json& r = report.result();
  if (ewm) {
    const ThresholdEstimate est = fit_ewm(sample, space);
    const NuisanceEstimates nu = estimate_khA(sample, est.t_hat, kernel);
    put_estimate(est, r);
    put_nuisance(nu, r);
    if (method == "plugin") {
      const ChernoffTable table = simulate_chernoff(*ccfg);
      put_interval(ewm_ci(sample, est, nu, table, a.level), r);
    } else {
      const BootstrapDistribution boot = ewm_bootstrap(sample, est, nu.h_hat, a.reps, seed, a.common.jobs);
      put_interval(boot.percentile_interval(a.level), r);
    }
  } else {
    const ThresholdEstimate est = fit_swm(sample, kernel, *rule, space, ewm_plug_in_nuisance(space, kernel));
    const NuisanceEstimates nu = estimate_khA(sample, est.t_hat, kernel);
    put_estimate(est, r);
    put_nuisance(nu, r);
    const auto mode = method == "undersmooth" ? SwmIntervalMode::Undersmoothed : SwmIntervalMode::BiasCorrected;
    put_interval(swm_ci(sample, est, nu, kernel, *est.lambda, a.level, mode), r);
  }
  emit(report, a.common, out);
}

// asymptotics -------------------------------------------------------------

struct AsymptoticsArgs {
  Common common;
  ChernoffOptions chernoff;
  int model = 1;
  std::string n_list = "500,1000,2000,3000";
  std::string constants = "declared";
  std::optional<double> k, h, a;
};

void run_asymptotics(const AsymptoticsArgs& args, std::ostream& out) {
  const Format format = parse_format(args.common.format);
  Report report(format);
  Json& cfg = report.config();
  cfg["command"] = "asymptotics";
  if (args.model != 1 && args.model != 2) throw ValidationError("--model must be 1 or 2");
  if (args.constants != "declared" && args.constants != "tabulated")
    throw ValidationError("--constants must be declared or tabulated");
  const auto n_list = parse_n_list(args.n_list);
  const Dgp dgp = args.model == 2 && args.constants == "tabulated" ? Dgp::model2_tabulated() : Dgp::model(args.model);
  AsymptoticConstants c = dgp.constants();
  if (args.k) c.k = *args.k;
  if (args.h) c.h = *args.h;
  if (args.a) c.a = *args.a;
  if (!(c.k > 0.0) || !(c.h > 0.0)) throw ValidationError("K and H must be positive");
  cfg["model"] = args.model;
  cfg["constants"] = args.constants;
  cfg["n"] = join(n_list);
  cfg["K"] = c.k;
  cfg["H"] = c.h;
  cfg["A"] = c.a;
  const std::uint64_t seed = resolve_seed(args.common, cfg);
  const ChernoffConfig ccfg = chernoff_config(args.chernoff, seed, args.common.jobs, cfg);
  const ChernoffTable table = simulate_chernoff(ccfg);
  const Kernel kernel = gaussian_cdf_kernel();

  if (format == Format::Json) {
    Json rows = Json::array();
    for (std::size_t n : n_list) {
      const auto e = ewm_regret_dist(c.k, c.h, n, table);
      Json row;
      row["n"] = n;
      row["ewm_mean"] = e.mean();
      row["ewm_median"] = e.median();
      if (c.a != 0.0) {
        const double lambda = optimal_lambda(c.k, c.a, kernel);
        const auto s = swm_regret_dist(c.k, c.h, c.a, lambda, kernel, n);
        row["lambda_star"] = lambda;
        row["swm_mean"] = s.mean();
        row["swm_median"] = s.median();
      }
      rows.push_back(row);
    }
    report.table_json() = rows;
  } else {
    if (c.a == 0.0) throw NumericError("A = 0: the regret-optimal lambda is unbounded");
    report.set_table(asymptotic_table(args.model, c, n_list, table, kernel,
                                      format == Format::Csv ? TableFormat::Csv : TableFormat::Text));
  }
  emit(report, args.common, out);
}

// chernoff ----------------------------------------------------------------

struct ChernoffArgs {
  Common common;
  ChernoffOptions chernoff;
};

void run_chernoff(const ChernoffArgs& args, std::ostream& out) {
  const Format format = parse_format(args.common.format);
  Report report(format);
  Json& cfg = report.config();
  cfg["command"] = "chernoff";
  const std::uint64_t seed = resolve_seed(args.common, cfg);
  const ChernoffConfig ccfg = chernoff_config(args.chernoff, seed, args.common.jobs, cfg);
  const ChernoffTable table = simulate_chernoff(ccfg);
  Json& r = report.result();
  r["mean"] = table.mean();
  r["second_moment"] = table.second_moment();
  r["sd"] = table.standard_deviation();
  r["ewm_constant"] = ewm_regret_constant(table);
  static constexpr double qs[] = {0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.995};
  if (format == Format::Json) {
    Json rows = Json::array();
    for (double q : qs)
      rows.push_back(Json{{"q", q}, {"z", table.quantile(q)}, {"z_squared", table.square_quantile(q)}});
    report.table_json() = rows;
  } else {
    std::ostringstream t;
    if (format == Format::Csv) {
      t << "q,z,z_squared\n";
      for (double q : qs) t << q << ',' << fmt17(table.quantile(q)) << ',' << fmt17(table.square_quantile(q)) << '\n';
    } else {
      char line[96];
      std::snprintf(line, sizeof line, "%8s %10s %10s\n", "q", "z", "z^2");
      t << line;
      for (double q : qs) {
        std::snprintf(line, sizeof line, "%8.3f %10.4f %10.4f\n", q, table.quantile(q), table.square_quantile(q));
        t << line;
      }
    }
    report.set_table(t.str());
  }
  emit(report, args.common, out);
}

// simulate ----------------------------------------------------------------

struct SimulateArgs {
  Common common;
  ChernoffOptions chernoff;
  int model = 1;
  std::string n_list = "500,1000,2000,3000";
  std::size_t reps = 5000;
  std::string variants = "ewm,swm-infeasible,swm-feasible";
  std::string statistic = "mean";
  std::string config_path;
};

std::vector<Variant> parse_variants(const std::string& text) {
  std::vector<Variant> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "ewm")
      out.push_back(Variant::Ewm);
    else if (item == "swm-infeasible")
      out.push_back(Variant::SwmInfeasible);
    else if (item == "swm-feasible")
      out.push_back(Variant::SwmFeasible);
    else
      throw ValidationError("--variants: unknown variant '" + item + "' (ewm, swm-infeasible, swm-feasible)");
  }
  if (out.empty()) throw ValidationError("--variants: empty list");
  return out;
}

// Fills options not given on the command line from a JSON config file.
void apply_config_file(SimulateArgs& a, CLI::App* sub) {
  std::ifstream in(a.config_path);
  if (!in) throw ValidationError("cannot open config file '" + a.config_path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config file '" + a.config_path + "': " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
  auto unset = [&](const char* flag) { return sub->count(flag) == 0; };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "model") {
        if (unset("--model")) a.model = v.get<int>();
      } else if (key == "n") {
        if (!unset("--n")) continue;
        if (v.is_array()) {
          std::vector<std::size_t> ns = v.get<std::vector<std::size_t>>();
          a.n_list = join(ns);
        } else {
          a.n_list = v.is_string() ? v.get<std::string>() : std::to_string(v.get<std::size_t>());
        }
      } else if (key == "reps") {
        if (unset("--reps")) a.reps = v.get<std::size_t>();
      } else if (key == "seed") {
        if (unset("--seed")) a.common.seed = v.get<std::uint64_t>();
      } else if (key == "jobs") {
        if (unset("--jobs")) a.common.jobs = v.get<unsigned>();
      } else if (key == "variants") {
        if (!unset("--variants")) continue;
        if (v.is_array()) {
          std::string s;
          for (const auto& item : v) s += (s.empty() ? "" : ",") + item.get<std::string>();
          a.variants = s;
        } else {
          a.variants = v.get<std::string>();
        }
      } else if (key == "statistic") {
        if (unset("--statistic")) a.statistic = v.get<std::string>();
      } else if (key == "chernoff_paths") {
        if (unset("--chernoff-paths")) a.chernoff.paths = v.get<std::size_t>();
      } else if (key == "chernoff_step") {
        if (unset("--chernoff-step")) a.chernoff.step = v.get<double>();
      } else if (key == "chernoff_halfwidth") {
        if (unset("--chernoff-halfwidth")) a.chernoff.halfwidth = v.get<double>();
      } else {
        throw ValidationError("config file: unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ValidationError("config file '" + a.config_path + "': " + e.what());
  }
}

void run_simulate(SimulateArgs a, CLI::App* sub, std::ostream& out) {
  if (!a.config_path.empty()) apply_config_file(a, sub);
  const Format format = parse_format(a.common.format);
  Report report(format);
  Json& cfg = report.config();
  cfg["command"] = "simulate";
  if (a.model != 1 && a.model != 2) throw ValidationError("--model must be 1 or 2");
  if (a.reps < 2) throw ValidationError("--reps must be at least 2");
  if (a.statistic != "mean" && a.statistic != "median") throw ValidationError("--statistic must be mean or median");
  ExperimentConfig ec;
  ec.model_id = a.model;
  ec.dgp = Dgp::model(a.model);
  ec.n_list = parse_n_list(a.n_list);
  ec.replications = a.reps;
  ec.variants = parse_variants(a.variants);
  ec.jobs = a.common.jobs;
  cfg["model"] = a.model;
  cfg["n"] = join(ec.n_list);
  cfg["reps"] = a.reps;
  cfg["variants"] = a.variants;
  cfg["statistic"] = a.statistic;
  ec.seed = resolve_seed(a.common, cfg);
  const ChernoffConfig ccfg = chernoff_config(a.chernoff, ec.seed, a.common.jobs, cfg);
  if (ccfg.domain_halfwidth < 2.0 || ccfg.grid_step > 1e-3 || ccfg.n_paths < 10000)
    throw ValidationError("Chernoff settings need halfwidth >= 2, step <= 1e-3 and paths >= 10000");

  const ExperimentResult result = run_experiment(ec);
  const ChernoffTable table = simulate_chernoff(ccfg);
  const Kernel kernel = gaussian_cdf_kernel();
  if (format == Format::Json) {
    Json cells = Json::array();
    for (const CellResult& c : result.cells) {
      cells.push_back(Json{{"n", c.n},
                           {"variant", to_string(c.variant)},
                           {"completed", c.completed},
                           {"failures", c.failures},
                           {"fallbacks", c.fallbacks},
                           {"mean_regret", c.mean_regret},
                           {"median_regret", c.median_regret},
                           {"standard_error", c.standard_error}});
    }
    Json ratios = Json::array();
    for (std::size_t n : ec.n_list) {
      Json row{{"n", n}};
      if (auto r = result.ratio(n)) row["mean_ratio"] = *r;
      if (auto r = result.median_ratio(n)) row["median_ratio"] = *r;
      ratios.push_back(row);
    }
    report.result() = Json{{"cells", cells}, {"ratios", ratios}};
  } else {
    std::ostringstream t;
    t << regret_table(result, table, kernel, a.statistic, format == Format::Csv ? TableFormat::Csv : TableFormat::Text);
    std::size_t failures = 0, fallbacks = 0;
    for (const CellResult& c : result.cells) {
      failures += c.failures;
      fallbacks += c.fallbacks;
    }
    t << "# failures: " << failures << "\n# bandwidth_fallbacks: " << fallbacks << '\n';
    report.set_table(t.str());
  }
  emit(report, a.common, out);
}

// generate ----------------------------------------------------------------

struct GenerateArgs {
  Common common;
  int model = 1;
  std::size_t n = 1000;
};

void run_generate(const GenerateArgs& a, std::ostream& out) {
  if (a.model != 1 && a.model != 2) throw ValidationError("--model must be 1 or 2");
  if (a.n < 2) throw ValidationError("--n must be at least 2");
  Json cfg;
  const std::uint64_t seed = resolve_seed(a.common, cfg);
  const Sample s = draw_sample(Dgp::model(a.model), a.n, seed);
  std::ostringstream text;
  write_sample_csv(text, s);
  if (a.common.out_path.empty()) {
    out << text.str();
    return;
  }
  std::ofstream file(a.common.out_path, std::ios::binary);
  if (!file) throw ValidationError("cannot open output file '" + a.common.out_path + "'");
  file << text.str();
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold treatment rules: EWM and SWM estimation, inference and regret asymptotics"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Fit a threshold rule to a CSV sample");
  add_common(est_cmd, est.common, false);
  add_data(est_cmd, est.data);
  est_cmd->add_option("--policy", est.policy, "ewm or swm")->check(CLI::IsMember({"ewm", "swm"}));
  est_cmd->add_option("--bandwidth", est.bandwidth, "SWM bandwidth: auto, fixed:<sigma>, lambda:<lambda>, undersmooth[:<shrink>]");

  InferArgs inf;
  auto* inf_cmd = app.add_subcommand("infer", "Confidence interval for the optimal threshold");
  add_common(inf_cmd, inf.common, true);
  add_data(inf_cmd, inf.data);
  add_chernoff(inf_cmd, inf.chernoff, "chernoff-");
  inf_cmd->add_option("--policy", inf.policy, "ewm or swm")->check(CLI::IsMember({"ewm", "swm"}));
  inf_cmd->add_option("--method", inf.method, "plugin, bootstrap (ewm); bias-corrected, undersmooth (swm)")
      ->check(CLI::IsMember({"plugin", "bootstrap", "bias-corrected", "undersmooth"}));
  inf_cmd->add_option("--bandwidth", inf.bandwidth, "SWM bandwidth rule");
  inf_cmd->add_option("--level", inf.level, "Confidence level in (0,1)");
  inf_cmd->add_option("--reps", inf.reps, "Bootstrap replications (>= 200)");

  AsymptoticsArgs asy;
  auto* asy_cmd = app.add_subcommand("asymptotics", "Asymptotic mean regrets of both policies");
  add_common(asy_cmd, asy.common, true);
  add_chernoff(asy_cmd, asy.chernoff, "chernoff-");
  asy_cmd->add_option("--model", asy.model, "Design 1 or 2");
  asy_cmd->add_option("--n", asy.n_list, "Comma-separated sample sizes");
  asy_cmd->add_option("--constants", asy.constants, "Model 2 noise convention: declared or tabulated");
  asy_cmd->add_option("--K", asy.k, "Override K");
  asy_cmd->add_option("--H", asy.h, "Override H");
  asy_cmd->add_option("--A", asy.a, "Override A");

  ChernoffArgs chr;
  auto* chr_cmd = app.add_subcommand("chernoff", "Simulate the Chernoff law; moments and quantiles");
  add_common(chr_cmd, chr.common, true);
  add_chernoff(chr_cmd, chr.chernoff, "");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo regret study");
  add_common(sim_cmd, sim.common, true);
  add_chernoff(sim_cmd, sim.chernoff, "chernoff-");
  sim_cmd->add_option("--model", sim.model, "Design 1 or 2");
  sim_cmd->add_option("--n", sim.n_list, "Comma-separated sample sizes");
  sim_cmd->add_option("--reps", sim.reps, "Replications per sample size");
  sim_cmd->add_option("--variants", sim.variants, "Comma-separated: ewm, swm-infeasible, swm-feasible");
  sim_cmd->add_option("--statistic", sim.statistic, "Table statistic: mean or median");
  sim_cmd->add_option("--config", sim.config_path, "JSON file with defaults for the options above");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Draw a sample from a simulation design as CSV");
  gen_cmd->add_option("--out", gen.common.out_path, "Write to this file instead of stdout");
  gen_cmd->add_option("--seed", gen.common.seed, "Seed (fallback: THRESHOLD_REGRET_SEED, then 42)");
  gen_cmd->add_option("--model", gen.model, "Design 1 or 2");
  gen_cmd->add_option("--n", gen.n, "Sample size");

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
    return 1;
  }

  try {
    if (est_cmd->parsed())
      run_estimate(est, out);
    else if (inf_cmd->parsed())
      run_infer(inf, out);
    else if (asy_cmd->parsed())
      run_asymptotics(asy, out);
    else if (chr_cmd->parsed())
      run_chernoff(chr, out);
    else if (sim_cmd->parsed())
      run_simulate(sim, sim_cmd, out);
    else if (gen_cmd->parsed())
      run_generate(gen, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace threshold_regret

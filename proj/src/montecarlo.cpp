#include "threshold_regret/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/ewm.hpp"
#include "threshold_regret/parallel.hpp"
#include "threshold_regret/random.hpp"
#include "threshold_regret/regret_asymptotics.hpp"
#include "threshold_regret/stats.hpp"
#include "threshold_regret/swm.hpp"

namespace threshold_regret {

Dgp Dgp::with_gamma(std::string name, double gamma, double beta1, double beta2, double p) {
  Dgp d;
  d.name = std::move(name);
  d.beta1 = beta1;
  d.beta2 = beta2;
  d.p = p;
  d.noise_sd_treated = gamma;
  d.noise_sd_control = gamma;
  return d;
}

Dgp Dgp::model1() { return with_gamma("model1", 1.0, 1.0, -0.5, 0.5); }
Dgp Dgp::model2() { return with_gamma("model2", 3.0, 0.5, -1.0, 0.5); }

Dgp Dgp::model2_tabulated() {
  Dgp d = model2();
  d.name = "model2-tabulated";
  d.noise_sd_treated = std::sqrt(3.0);
  return d;
}

Dgp Dgp::model(int id) {
  switch (id) {
    case 1: return model1();
    case 2: return model2();
    default: throw ValidationError("unknown model " + std::to_string(id) + " (expected 1 or 2)");
  }
}

double Dgp::welfare(double t) const {
  const double pdf = normal_pdf(t);
  // Integrals of x^3, x^2 and x against the standard normal density over (t, inf).
  const double cubic = (t * t + 2.0) * pdf;
  const double square = 1.0 - normal_cdf(t) + t * pdf;
  return cubic + beta2 * square + beta1 * pdf;
}

AsymptoticConstants Dgp::constants() const {
  const double f0 = normal_pdf(0.0);
  AsymptoticConstants c;
  c.k = f0 * (noise_sd_treated * noise_sd_treated / p +
              noise_sd_control * noise_sd_control / (1.0 - p));
  c.h = f0 * beta1;
  c.a = -f0 * beta2;
  return c;
}

double closed_form_welfare(const Dgp& dgp, double t) { return dgp.welfare(t); }

Sample draw_sample(const Dgp& dgp, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("draw_sample needs n >= 2");
  Engine engine = make_engine(seed);
  boost::random::normal_distribution<double> normal;
  boost::random::bernoulli_distribution<double> treat(dgp.p);
  std::vector<double> y(n), x(n);
  std::vector<int> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = normal(engine);
    const double e1 = dgp.noise_sd_treated * normal(engine);
    const double y0 = dgp.noise_sd_control * normal(engine);
    const int di = treat(engine) ? 1 : 0;
    x[i] = xi;
    d[i] = di;
    y[i] = di == 1 ? dgp.cate(xi) + e1 : y0;
  }
  return Sample(std::move(y), std::move(d), std::move(x), dgp.p);
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Ewm: return "ewm";
    case Variant::SwmInfeasible: return "swm-infeasible";
    case Variant::SwmFeasible: return "swm-feasible";
  }
  return "unknown";
}

std::uint64_t replication_seed(const ExperimentConfig& config, std::size_t n, std::size_t rep) {
  return derive_seed(config.seed, {static_cast<std::uint64_t>(config.model_id), n, rep});
}

const CellResult* ExperimentResult::find(std::size_t n, Variant v) const {
  for (const auto& c : cells)
    if (c.n == n && c.variant == v) return &c;
  return nullptr;
}

std::optional<double> ExperimentResult::ratio(std::size_t n) const {
  const auto* e = find(n, Variant::Ewm);
  const auto* s = find(n, Variant::SwmFeasible);
  if (!e || !s) return std::nullopt;
  return e->mean_regret / s->mean_regret;
}

std::optional<double> ExperimentResult::median_ratio(std::size_t n) const {
  const auto* e = find(n, Variant::Ewm);
  const auto* s = find(n, Variant::SwmFeasible);
  if (!e || !s) return std::nullopt;
  return e->median_regret / s->median_regret;
}

namespace {

struct Draw {
  double regret = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double bandwidth = std::numeric_limits<double>::quiet_NaN();
  bool fallback = false;
};

bool has(const std::vector<Variant>& vs, Variant v) {
  return std::find(vs.begin(), vs.end(), v) != vs.end();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.n_list.empty()) throw ValidationError("experiment needs at least one sample size");
  for (std::size_t n : config.n_list)
    if (n < 100) throw ValidationError("experiment sample sizes must be >= 100");
  if (config.replications == 0) throw ValidationError("experiment needs replications > 0");
  if (config.variants.empty()) throw ValidationError("experiment needs at least one policy variant");

  const Kernel kernel = gaussian_cdf_kernel();
  const AsymptoticConstants truth = config.dgp.constants();
  const double lambda_star = optimal_lambda(truth.k, truth.a, kernel);
  const auto welfare = [&](double t) { return config.dgp.welfare(t); };
  const bool want_ewm = has(config.variants, Variant::Ewm);
  const bool want_inf = has(config.variants, Variant::SwmInfeasible);
  const bool want_feas = has(config.variants, Variant::SwmFeasible);

  const std::size_t reps = config.replications;
  const std::size_t tasks = config.n_list.size() * reps;
  // draws[task][variant]
  std::vector<std::array<Draw, 3>> draws(tasks);

  parallel_for(tasks, config.jobs, [&](std::size_t task) {
    const std::size_t n = config.n_list[task / reps];
    const std::size_t rep = task % reps;
    const Sample sample = draw_sample(config.dgp, n, replication_seed(config, n, rep));
    const ParamSpace space = ParamSpace::around(sample);
    auto& out = draws[task];

    std::optional<double> ewm_t;
    try {
      ewm_t = fit_ewm(sample, space).t_hat;
    } catch (const std::exception&) {
    }
    if (want_ewm && ewm_t) {
      out[0].threshold = *ewm_t;
      out[0].regret = regret(welfare, config.dgp.t_star, *ewm_t);
    }
    if (want_inf) {
      try {
        const auto est = fit_swm(sample, kernel, LambdaRate{lambda_star, kernel.order}, space);
        out[1].threshold = est.t_hat;
        out[1].bandwidth = *est.bandwidth;
        out[1].regret = regret(welfare, config.dgp.t_star, est.t_hat);
      } catch (const std::exception&) {
      }
    }
    if (want_feas && ewm_t) {
      try {
        const double t_eval = *ewm_t;
        const NuisanceProvider provider = [&](const Sample& s) {
          return estimate_khA(s, t_eval, kernel, config.nuisance);
        };
        const auto est = fit_swm(sample, kernel, PlugInOptimal{}, space, provider);
        out[2].threshold = est.t_hat;
        out[2].bandwidth = *est.bandwidth;
        out[2].fallback = est.bandwidth_fallback;
        out[2].regret = regret(welfare, config.dgp.t_star, est.t_hat);
      } catch (const std::exception&) {
      }
    }
  });

  ExperimentResult result;
  result.config = config;
  const Variant order[3] = {Variant::Ewm, Variant::SwmInfeasible, Variant::SwmFeasible};
  for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
    for (int v = 0; v < 3; ++v) {
      if (!has(config.variants, order[v])) continue;
      CellResult cell;
      cell.n = config.n_list[ni];
      cell.variant = order[v];
      std::vector<double> ok;
      ok.reserve(reps);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const Draw& d = draws[ni * reps + rep][v];
        if (std::isnan(d.regret))
          ++cell.failures;
        else
          ok.push_back(d.regret);
        if (d.fallback) ++cell.fallbacks;
        if (config.retain_samples) {
          cell.regrets.push_back(d.regret);
          cell.thresholds.push_back(d.threshold);
          cell.bandwidths.push_back(d.bandwidth);
        }
      }
      cell.completed = ok.size();
      if (!ok.empty()) {
        cell.mean_regret = mean(ok);
        cell.standard_error =
            ok.size() > 1 ? standard_deviation(ok) / std::sqrt(static_cast<double>(ok.size())) : 0.0;
        cell.median_regret = median(ok);
      } else {
        cell.mean_regret = cell.median_regret = cell.standard_error =
            std::numeric_limits<double>::quiet_NaN();
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

namespace {

class TableWriter {
 public:
  TableWriter(TableFormat format, std::vector<std::string> header)
      : format_(format), header_(std::move(header)) {}

  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string str() const {
    std::ostringstream out;
    if (format_ == TableFormat::Csv) {
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << cells[c];
        out << '\n';
      };
      line(header_);
      for (const auto& r : rows_) line(r);
      return out.str();
    }
    std::vector<std::size_t> width(header_.size());
    for (std::size_t c = 0; c < header_.size(); ++c) width[c] = header_[c].size();
    for (const auto& r : rows_)
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t c = 0; c < cells.size(); ++c)
        out << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << cells[c];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out.str();
  }

 private:
  TableFormat format_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string fixed3(double v) {
  if (std::isnan(v)) return "NA";
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

std::string number(double v, TableFormat format) {
  if (format == TableFormat::Text) return fixed3(v);
  if (std::isnan(v)) return "NA";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

constexpr double kScale = 1e4;

}  // namespace

std::string asymptotic_table(int model_id, const AsymptoticConstants& c,
                             const std::vector<std::size_t>& n_list, const ChernoffTable& chernoff,
                             const Kernel& kernel, TableFormat format) {
  TableWriter table(format, {"model", "n", "ewm", "swm", "K", "H", "A"});
  for (std::size_t n : n_list) {
    const double ewm = ewm_regret_dist(c.k, c.h, n, chernoff).mean();
    const double swm = optimal_lambda_mean(c.k, c.h, c.a, kernel, n);
    table.row({std::to_string(model_id), std::to_string(n), number(ewm * kScale, format),
               number(swm * kScale, format), number(c.k, format), number(c.h, format),
               number(c.a, format)});
  }
  return table.str();
}

std::string regret_table(const ExperimentResult& result, const ChernoffTable& chernoff,
                         const Kernel& kernel, const std::string& statistic, TableFormat format) {
  const bool use_median = statistic == "median";
  if (!use_median && statistic != "mean")
    throw ValidationError("regret_table statistic must be 'mean' or 'median'");
  TableWriter table(format, {"model", "n", "ewm_empirical", "ewm_asymptotic", "swm_empirical_sigma_star",
                             "swm_empirical_sigma_hat", "swm_asymptotic", "ratio"});
  if (result.cells.empty()) return table.str();

  const AsymptoticConstants c = result.config.dgp.constants();
  const double lambda_star = optimal_lambda(c.k, c.a, kernel);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t n : result.config.n_list) {
    auto stat = [&](Variant v) {
      const CellResult* cell = result.find(n, v);
      if (!cell) return nan;
      return (use_median ? cell->median_regret : cell->mean_regret) * kScale;
    };
    const auto ewm_law = ewm_regret_dist(c.k, c.h, n, chernoff);
    const double ewm_asym = use_median ? ewm_law.median() : ewm_law.mean();
    const double swm_asym = use_median
                                ? swm_regret_dist(c.k, c.h, c.a, lambda_star, kernel, n).median()
                                : optimal_lambda_mean(c.k, c.h, c.a, kernel, n);
    const auto ratio = use_median ? result.median_ratio(n) : result.ratio(n);
    table.row({std::to_string(result.config.model_id), std::to_string(n), number(stat(Variant::Ewm), format),
               number(ewm_asym * kScale, format), number(stat(Variant::SwmInfeasible), format),
               number(stat(Variant::SwmFeasible), format), number(swm_asym * kScale, format),
               number(ratio.value_or(nan), format)});
  }
  return table.str();
}

}  // namespace threshold_regret

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace threshold_regret {

struct SampleOptions {
  /// Overlap margin: every propensity must lie in [eta, 1 - eta].
  double eta = 0.01;
};

/// One experimental dataset: outcome y, binary treatment d, scalar index x
/// and the known propensity score of each unit. Immutable once constructed;
/// construction validates every invariant and throws ValidationError.
class Sample {
 public:
  /// Per-unit propensities.
  Sample(std::vector<double> y, std::vector<int> d, std::vector<double> x,
         std::vector<double> propensity, SampleOptions options = {});
  /// Constant propensity, broadcast to all units.
  Sample(std::vector<double> y, std::vector<int> d, std::vector<double> x, double propensity,
         SampleOptions options = {});

  std::size_t size() const { return y_.size(); }
  std::span<const double> y() const { return y_; }
  std::span<const int> d() const { return d_; }
  std::span<const double> x() const { return x_; }
  std::span<const double> propensity() const { return p_; }
  const SampleOptions& options() const { return options_; }

  /// Ties in x violate the continuity assumption; they are allowed but flagged.
  bool has_duplicate_x() const { return duplicate_x_; }
  bool has_constant_propensity() const { return constant_p_; }

  /// Indices sorting x ascending; ties keep their original order.
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  void validate();

  std::vector<double> y_;
  std::vector<int> d_;
  std::vector<double> x_;
  std::vector<double> p_;
  SampleOptions options_;
  std::vector<std::size_t> order_;
  bool duplicate_x_ = false;
  bool constant_p_ = false;
};

/// Compact set of admissible thresholds.
struct ParamSpace {
  double lo;
  double hi;

  ParamSpace(double lo, double hi);
  /// [min(x) - m, max(x) + m] with m = margin_fraction * range(x) (or
  /// margin_fraction itself when all x coincide).
  static ParamSpace around(const Sample& sample, double margin_fraction = 0.01);

  double clamp(double t) const;
  double range() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
};

/// Inverse-propensity-weighted treatment-effect scores
/// g_i = d_i y_i / p_i - (1 - d_i) y_i / (1 - p_i).
struct IpwScores {
  std::vector<double> g;
  std::vector<std::size_t> x_sorted_order;
};

IpwScores ipw_scores(const Sample& sample);

/// Per-unit welfare contributions under treatment (d y / p) and control
/// ((1 - d) y / (1 - p)).
double treated_term(const Sample& sample, std::size_t i);
double control_term(const Sample& sample, std::size_t i);

/// Sample-analog welfare of the policy "treat iff x > t".
double empirical_welfare(const Sample& sample, double t);

/// Regret W(t*) - W(t_hat). Values in [-1e-9, 0) are clamped to zero; a more
/// negative value means t_star is not the maximizer and raises NumericError.
double regret(const std::function<double(double)>& welfare, double t_star, double t_hat);

/// Reads `y,d,x[,p]` CSV (header required, columns in any order). A `p`
/// column overrides `propensity`; without either, ValidationError.
Sample read_sample_csv(std::istream& in, std::optional<double> propensity = std::nullopt,
                       SampleOptions options = {});
Sample read_sample_csv(const std::string& path, std::optional<double> propensity = std::nullopt,
                       SampleOptions options = {});
/// Writes `y,d,x,p` with 17 significant digits.
void write_sample_csv(std::ostream& out, const Sample& sample);

}  // namespace threshold_regret

#include "threshold_regret/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "threshold_regret/errors.hpp"
#include "threshold_regret/stats.hpp"

namespace threshold_regret {

Sample::Sample(std::vector<double> y, std::vector<int> d, std::vector<double> x,
               std::vector<double> propensity, SampleOptions options)
    : y_(std::move(y)), d_(std::move(d)), x_(std::move(x)), p_(std::move(propensity)),
      options_(options) {
  validate();
}

Sample::Sample(std::vector<double> y, std::vector<int> d, std::vector<double> x, double propensity,
               SampleOptions options)
    : y_(std::move(y)), d_(std::move(d)), x_(std::move(x)), options_(options) {
  p_.assign(y_.size(), propensity);
  validate();
  constant_p_ = true;
}

void Sample::validate() {
  const std::size_t n = y_.size();
  if (d_.size() != n || x_.size() != n || p_.size() != n) {
    std::ostringstream msg;
    msg << "sample columns differ in length: y=" << n << " d=" << d_.size() << " x=" << x_.size()
        << " p=" << p_.size();
    throw ValidationError(msg.str());
  }
  if (n < 2) throw ValidationError("sample needs at least 2 units");
  const double eta = options_.eta;
  if (!(eta > 0.0 && eta < 0.5)) throw ValidationError("eta must lie in (0, 0.5)");
  for (std::size_t i = 0; i < n; ++i) {
    auto fail = [i](const std::string& what) {
      throw ValidationError("unit " + std::to_string(i) + ": " + what);
    };
    if (!std::isfinite(y_[i])) fail("y is not finite");
    if (!std::isfinite(x_[i])) fail("x is not finite");
    if (d_[i] != 0 && d_[i] != 1) fail("d must be 0 or 1");
    if (!(p_[i] >= eta && p_[i] <= 1.0 - eta)) fail("propensity outside [eta, 1 - eta]");
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [this](std::size_t a, std::size_t b) { return x_[a] < x_[b]; });
  duplicate_x_ = false;
  for (std::size_t k = 1; k < n; ++k)
    if (x_[order_[k]] == x_[order_[k - 1]]) {
      duplicate_x_ = true;
      break;
    }
  constant_p_ = std::all_of(p_.begin(), p_.end(), [&](double p) { return p == p_.front(); });
}

ParamSpace::ParamSpace(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw ValidationError("parameter space requires finite lo < hi");
}

ParamSpace ParamSpace::around(const Sample& sample, double margin_fraction) {
  const auto [mn, mx] = std::minmax_element(sample.x().begin(), sample.x().end());
  const double range = *mx - *mn;
  const double margin = range > 0.0 ? margin_fraction * range : margin_fraction;
  return ParamSpace(*mn - margin, *mx + margin);
}

double ParamSpace::clamp(double t) const { return std::clamp(t, lo, hi); }

double treated_term(const Sample& s, std::size_t i) {
  return s.d()[i] == 1 ? s.y()[i] / s.propensity()[i] : 0.0;
}

double control_term(const Sample& s, std::size_t i) {
  return s.d()[i] == 0 ? s.y()[i] / (1.0 - s.propensity()[i]) : 0.0;
}

IpwScores ipw_scores(const Sample& sample) {
  IpwScores out;
  out.g.resize(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i)
    out.g[i] = treated_term(sample, i) - control_term(sample, i);
  out.x_sorted_order = sample.order();
  return out;
}

double empirical_welfare(const Sample& sample, double t) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < sample.size(); ++i)
    sum += sample.x()[i] > t ? treated_term(sample, i) : control_term(sample, i);
  return sum.value() / static_cast<double>(sample.size());
}

double regret(const std::function<double(double)>& welfare, double t_star, double t_hat) {
  const double r = welfare(t_star) - welfare(t_hat);
  if (!std::isfinite(r)) throw NumericError("regret is not finite");
  if (r < -1e-9) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "negative regret " << r << ": t_star=" << t_star
        << " is not the welfare maximizer";
    throw NumericError(msg.str());
  }
  return std::max(r, 0.0);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_field(std::string_view text, std::size_t row, std::string_view column) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ValidationError("row " + std::to_string(row) + ", column '" + std::string(column) +
                          "': cannot parse '" + std::string(text) + "'");
  return value;
}

}  // namespace

Sample read_sample_csv(std::istream& in, std::optional<double> propensity, SampleOptions options) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty; expected header y,d,x[,p]");
  const auto header = split(line);
  int col_y = -1, col_d = -1, col_x = -1, col_p = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& h = header[c];
    int* slot = h == "y" ? &col_y : h == "d" ? &col_d : h == "x" ? &col_x : h == "p" ? &col_p : nullptr;
    if (slot == nullptr) throw ValidationError("CSV header: unknown column '" + std::string(h) + "'");
    if (*slot != -1) throw ValidationError("CSV header: duplicate column '" + std::string(h) + "'");
    *slot = static_cast<int>(c);
  }
  if (col_y < 0 || col_d < 0 || col_x < 0)
    throw ValidationError("CSV header must contain columns y, d and x");
  if (col_p < 0 && !propensity)
    throw ValidationError("no 'p' column in CSV and no constant propensity given");

  std::vector<double> y, x, p;
  std::vector<int> d;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size())
      throw ValidationError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    y.push_back(parse_field<double>(fields[col_y], row, "y"));
    d.push_back(parse_field<int>(fields[col_d], row, "d"));
    x.push_back(parse_field<double>(fields[col_x], row, "x"));
    if (col_p >= 0) p.push_back(parse_field<double>(fields[col_p], row, "p"));
    if (d.back() != 0 && d.back() != 1)
      throw ValidationError("row " + std::to_string(row) + ", column 'd': must be 0 or 1");
  }
  if (col_p >= 0) return Sample(std::move(y), std::move(d), std::move(x), std::move(p), options);
  return Sample(std::move(y), std::move(d), std::move(x), *propensity, options);
}

Sample read_sample_csv(const std::string& path, std::optional<double> propensity,
                       SampleOptions options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  return read_sample_csv(in, propensity, options);
}

void write_sample_csv(std::ostream& out, const Sample& sample) {
  const auto old_precision = out.precision(17);
  out << "y,d,x,p\n";
  for (std::size_t i = 0; i < sample.size(); ++i)
    out << sample.y()[i] << ',' << sample.d()[i] << ',' << sample.x()[i] << ','
        << sample.propensity()[i] << '\n';
  out.precision(old_precision);
}

}  // namespace threshold_regret

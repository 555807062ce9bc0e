#include "genet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "genet/errors.hpp"

namespace genet::stats {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sum_sq_dev(const std::vector<double>& v, double mean) {
  double sum = 0.0;
  for (double x : v) sum += (x - mean) * (x - mean);
  return sum;
}

}  // namespace

std::vector<int> equal_width_bins(const std::vector<double>& values, int bins) {
  if (bins < 1) raise(Errc::InvalidRequest, "bin count must be >= 1");
  auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  double lo = *min_it, hi = *max_it;
  std::vector<int> out(values.size(), 0);
  if (hi <= lo) return out;  // all-equal values share one bin
  double width = (hi - lo) / bins;
  for (size_t i = 0; i < values.size(); ++i) {
    int bin = static_cast<int>((values[i] - lo) / width);
    out[i] = std::min(bin, bins - 1);
  }
  return out;
}

double entropy_bits(const std::vector<long>& counts) {
  long total = std::accumulate(counts.begin(), counts.end(), 0L);
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (long c : counts) {
    if (c <= 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double binned_entropy(const std::vector<double>& values, int bins) {
  std::vector<int> assignment = equal_width_bins(values, bins);
  std::vector<long> counts(bins, 0);
  for (int bin : assignment) ++counts[bin];
  return entropy_bits(counts);
}

double info_gain(const std::vector<std::string>& factor_labels,
                 const std::vector<double>& values, int bins) {
  if (factor_labels.size() != values.size()) {
    raise(Errc::LengthMismatch, "factor and value vectors differ in length");
  }
  if (values.size() < 2) {
    raise(Errc::DegenerateInput, "information gain needs at least 2 samples");
  }
  if (bins < 2) raise(Errc::InvalidRequest, "bin count must be >= 2");

  std::vector<int> assignment = equal_width_bins(values, bins);
  std::vector<long> y_counts(bins, 0);
  for (int bin : assignment) ++y_counts[bin];
  double h_y = entropy_bits(y_counts);

  std::map<std::string, std::vector<long>> per_level;
  for (size_t i = 0; i < values.size(); ++i) {
    auto& counts = per_level[factor_labels[i]];
    if (counts.empty()) counts.assign(bins, 0);
    ++counts[assignment[i]];
  }
  double h_y_given_x = 0.0;
  for (const auto& [label, counts] : per_level) {
    long level_total = std::accumulate(counts.begin(), counts.end(), 0L);
    double p_level =
        static_cast<double>(level_total) / static_cast<double>(values.size());
    h_y_given_x += p_level * entropy_bits(counts);
  }
  return h_y - h_y_given_x;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    raise(Errc::LengthMismatch, "vectors differ in length");
  }
  if (x.size() < 2) {
    raise(Errc::DegenerateInput, "correlation needs at least 2 samples");
  }
  double mean_x = mean_of(x), mean_y = mean_of(y);
  double ss_x = sum_sq_dev(x, mean_x), ss_y = sum_sq_dev(y, mean_y);
  if (ss_x <= 0.0 || ss_y <= 0.0) {
    raise(Errc::DegenerateInput, "correlation undefined for a constant vector");
  }
  double cov = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mean_x) * (y[i] - mean_y);
  }
  return cov / std::sqrt(ss_x * ss_y);
}

TTestResult t_test_ind(const std::vector<double>& a,
                       const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    raise(Errc::DegenerateInput, "each sample needs at least 2 values");
  }
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  double mean_a = mean_of(a), mean_b = mean_of(b);
  double pooled_var =
      (sum_sq_dev(a, mean_a) + sum_sq_dev(b, mean_b)) / (na + nb - 2.0);

  TTestResult result;
  result.df = na + nb - 2.0;
  if (pooled_var <= 0.0) {
    if (mean_a == mean_b) {
      result.t = 0.0;
      return result;
    }
    raise(Errc::PooledVarianceZero,
          "zero pooled variance with unequal means");
  }
  result.t = (mean_a - mean_b) /
             (std::sqrt(pooled_var) * std::sqrt(1.0 / na + 1.0 / nb));
  return result;
}

LeveneResult levene(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    raise(Errc::DegenerateInput, "each group needs at least 2 values");
  }
  auto abs_deviations = [](const std::vector<double>& group) {
    double mean = mean_of(group);
    std::vector<double> out(group.size());
    for (size_t i = 0; i < group.size(); ++i) out[i] = std::abs(group[i] - mean);
    return out;
  };
  std::vector<double> za = abs_deviations(a);
  std::vector<double> zb = abs_deviations(b);

  double na = static_cast<double>(za.size());
  double nb = static_cast<double>(zb.size());
  double mean_za = mean_of(za), mean_zb = mean_of(zb);
  double grand = (na * mean_za + nb * mean_zb) / (na + nb);

  double between = na * (mean_za - grand) * (mean_za - grand) +
                   nb * (mean_zb - grand) * (mean_zb - grand);
  double within = sum_sq_dev(za, mean_za) + sum_sq_dev(zb, mean_zb);

  LeveneResult result;
  result.df1 = 1;
  result.df2 = static_cast<int>(na + nb) - 2;
  if (between <= 0.0) {
    result.w = 0.0;  // identical deviation profiles, incl. all-constant groups
    return result;
  }
  if (within <= 0.0) {
    result.w = std::numeric_limits<double>::infinity();
    return result;
  }
  result.w = (na + nb - 2.0) / 1.0 * between / within;
  return result;
}

}  // namespace genet::stats

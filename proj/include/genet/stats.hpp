#pragma once

#include <string>
#include <vector>

namespace genet::stats {

/// Indices of equal-width bins over [min, max]; all-equal values collapse
/// into a single bin 0.
std::vector<int> equal_width_bins(const std::vector<double>& values, int bins);

/// Shannon entropy in bits of a count histogram, with 0 log 0 := 0.
double entropy_bits(const std::vector<long>& counts);

/// H(binned values) in bits.
double binned_entropy(const std::vector<double>& values, int bins);

/// Information gain H(Y) - H(Y|X) in bits, with Y discretized into
/// equal-width bins.
double info_gain(const std::vector<std::string>& factor_labels,
                 const std::vector<double>& values, int bins);

/// Product-moment correlation; throws DegenerateInput on a constant vector.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
};

/// Student's two-sample t with pooled variance; df = |a| + |b| - 2.
TTestResult t_test_ind(const std::vector<double>& a,
                       const std::vector<double>& b);

struct LeveneResult {
  double w = 0.0;
  int df1 = 1;
  int df2 = 0;
};

/// Levene's W over absolute deviations from the group means (the classic
/// mean-centered variant); two groups, so df1 = 1.
LeveneResult levene(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace genet::stats

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace textlime {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> values);
double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator). Requires at least 2 values.
double sample_std(std::span<const double> values);

// Linear interpolation between order statistics (the default "type 7"
// definition). q in [0, 1]; values need not be sorted.
double quantile(std::span<const double> values, double q);

struct Summary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // 0 for a single value
};

Summary summarize(std::span<const double> values);

// Least-squares slope of y against x.
double fitted_slope(std::span<const double> x, std::span<const double> y);

}  // namespace textlime

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace exitlab::stats {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double dof = 0.0;  // chi-squared tests only
};

/// Survival function of the Kolmogorov distribution, P[K > t].
double kolmogorov_q(double t);

/// One-sample KS against a continuous CDF (Stephens' small-sample correction).
TestResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Pearson goodness of fit; cells with zero expected probability must be empty.
TestResult chi2_goodness_of_fit(std::span<const double> observed, std::span<const double> probabilities);
/// Pearson independence test on a rows x cols table; all-zero rows/columns are dropped.
TestResult chi2_contingency(const std::vector<std::vector<double>>& table);
/// Homogeneity of two categorical samples (2 x k contingency).
TestResult chi2_two_sample(std::span<const double> counts_a, std::span<const double> counts_b);

/// Upper tail of the chi-squared distribution.
double chi2_sf(double x, double dof);

/// Half the L1 distance between two histograms, each normalised to sum 1.
double tv_distance(std::span<const double> a, std::span<const double> b);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);

/// Empirical quantile by linear interpolation of the sorted sample.
double quantile(std::vector<double> x, double q);

}  // namespace exitlab::stats

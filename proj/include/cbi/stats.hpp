#pragma once

#include <functional>
#include <vector>

namespace cbi {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

double standard_normal_cdf(double x);

/// Asymptotic Kolmogorov tail probability Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_p(double lambda);

/// One-sample KS test of the data against a continuous CDF.
KsResult ks_one_sample(std::vector<double> data,
                       const std::function<double(double)>& cdf);

/// Two-sample KS test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace cbi

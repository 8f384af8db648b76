#include "cbi/stats.hpp"

#include <algorithm>
#include <cmath>

namespace cbi {

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double kolmogorov_p(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term =
            2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_one_sample(std::vector<double> data,
                       const std::function<double(double)>& cdf) {
    KsResult r;
    r.n = data.size();
    if (data.empty()) return r;
    std::sort(data.begin(), data.end());
    const double n = static_cast<double>(data.size());
    double d = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f = cdf(data[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    r.statistic = d;
    const double en = std::sqrt(n);
    r.p_value = kolmogorov_p((en + 0.12 + 0.11 / en) * d);
    return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    KsResult r;
    if (a.empty() || b.empty()) return r;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
    }
    r.statistic = d;
    r.n = a.size() + b.size();
    const double en = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_p((en + 0.12 + 0.11 / en) * d);
    return r;
}

}  // namespace cbi

#include "cbi/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace cbi {

namespace {

using Complex = std::complex<double>;

Complex project(const Eigen::VectorXcd& v, const Eigen::VectorXd& x) {
    Complex ip{0.0, 0.0};
    for (int j = 0; j < x.size(); ++j) ip += v(j) * x(j);
    return ip;
}

Eigen::Matrix2d empirical_cov(const Eigen::MatrixX2d& rows) {
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    const auto n = rows.rows();
    if (n == 0) return cov;
    for (Eigen::Index i = 0; i < n; ++i)
        cov += rows.row(i).transpose() * rows.row(i);
    return cov / static_cast<double>(n);
}

}  // namespace

std::vector<double> w_samples(const Ensemble& ens, const SpectralSummary& spec,
                              double T) {
    if (!(spec.s > 0.0) || !spec.u)
        throw std::invalid_argument("w_samples: requires supercritical Perron pair");
    const double scale = std::exp(-spec.s * T);
    std::vector<double> out(ens.terminal.rows());
    for (Eigen::Index i = 0; i < ens.terminal.rows(); ++i)
        out[i] = scale * spec.u->dot(ens.terminal.row(i));
    return out;
}

ScaledSample projection_statistic(const Ensemble& ens, const EigenPair& pair,
                                  const SpectralSummary& spec, double T,
                                  ProjectionScaling scaling,
                                  double survivor_threshold) {
    const double s = spec.s;
    const Eigen::VectorXd& u = *spec.u;
    ScaledSample out;
    out.scaling_tag = scaling;
    const auto n = ens.terminal.rows();
    out.rows.resize(n, 2);
    out.survivor_mask.resize(n, 0);

    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd x = ens.terminal.row(i);
        const Complex p = project(pair.v, x);
        const double ux = u.dot(x);
        out.survivor_mask[i] = ux > survivor_threshold ? 1 : 0;
        Eigen::Vector2d row(p.real(), p.imag());
        switch (scaling) {
            case ProjectionScaling::Thm31ii:
                row *= std::exp(-0.5 * s * T) / std::sqrt(T);
                break;
            case ProjectionScaling::Thm31iii:
                row *= std::exp(-0.5 * s * T);
                break;
            case ProjectionScaling::Thm35i: {
                if (x.isZero(0.0)) {
                    row.setZero();
                    break;
                }
                const double im = pair.lambda.imag();
                Eigen::Matrix2d rot;
                rot << std::cos(im * T), std::sin(im * T), -std::sin(im * T),
                    std::cos(im * T);
                row = rot * row / std::pow(ux, pair.lambda.real() / s);
                break;
            }
            case ProjectionScaling::Thm35ii:
                row = ux > 1.0 ? (row / std::sqrt(ux * std::log(ux))).eval()
                               : Eigen::Vector2d::Zero().eval();
                break;
            case ProjectionScaling::Thm35iii:
                row = x.isZero(0.0) ? Eigen::Vector2d::Zero().eval()
                                    : (row / std::sqrt(ux)).eval();
                break;
        }
        out.rows.row(i) = row.transpose();
    }
    return out;
}

RelFreqReport relative_frequencies(const Ensemble& ens,
                                   const Eigen::VectorXd* utilde) {
    RelFreqReport rep;
    const auto n = ens.terminal.rows();
    const auto d = ens.terminal.cols();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (ens.terminal.row(i).sum() > 0.0) keep.push_back(i);
    rep.survivors = keep.size();
    rep.rows.resize(static_cast<Eigen::Index>(keep.size()), d);
    rep.survivor_mean = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const Eigen::VectorXd x = ens.terminal.row(keep[k]);
        rep.rows.row(static_cast<Eigen::Index>(k)) = (x / x.sum()).transpose();
        rep.survivor_mean += x / x.sum();
    }
    if (!keep.empty()) rep.survivor_mean /= static_cast<double>(keep.size());
    if (utilde && !keep.empty())
        rep.max_mean_deviation = (rep.survivor_mean - *utilde).cwiseAbs().maxCoeff();
    return rep;
}

TestReport gaussian_test(const ScaledSample& sample,
                         const Eigen::Matrix2d& Sigma, SigmaClass cls,
                         double alpha) {
    TestReport rep;
    rep.name = "gaussian_test";

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Sigma);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw std::invalid_argument("gaussian_test: Sigma not PSD");

    Eigen::MatrixX2d rows(sample.rows.rows(), 2);
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < sample.rows.rows(); ++i)
        if (sample.survivor_mask[i]) rows.row(m++) = sample.rows.row(i);
    rows.conservativeResize(m, 2);
    rep.n = static_cast<std::size_t>(m);
    if (m < 100) {
        rep.notes = "insufficient data";
        return rep;
    }

    auto ks_coord = [&](const Eigen::VectorXd& col) {
        std::vector<double> data(col.data(), col.data() + col.size());
        return ks_one_sample(data, [](double x) { return standard_normal_cdf(x); });
    };

    if (cls == SigmaClass::Invertible) {
        // whiten by Sigma^{-1/2}
        const Eigen::Matrix2d W =
            es.eigenvectors() *
            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
            es.eigenvectors().transpose();
        Eigen::MatrixX2d white = rows * W.transpose();
        const KsResult k1 = ks_coord(white.col(0));
        const KsResult k2 = ks_coord(white.col(1));
        const Eigen::Matrix2d cov = empirical_cov(white);
        const double cov_dev = (cov - Eigen::Matrix2d::Identity()).norm();
        const double cov_bound = 4.0 / std::sqrt(static_cast<double>(m));
        rep.p_values = {k1.p_value, k2.p_value};
        rep.statistics = {k1.statistic, k2.statistic, cov_dev, cov_bound};
        rep.passed = k1.p_value > alpha && k2.p_value > alpha;
        rep.notes = "whitened KS per coordinate; covariance deviation reported";
    } else if (cls == SigmaClass::SingularNonzero) {
        const Eigen::Vector2d range_dir = es.eigenvectors().col(1);
        const Eigen::Vector2d null_dir = es.eigenvectors().col(0);
        const double range_var = es.eigenvalues()(1);
        Eigen::VectorXd range_proj = rows * range_dir / std::sqrt(range_var);
        Eigen::VectorXd null_proj = rows * null_dir;
        const KsResult k1 = ks_coord(range_proj);
        const double null_var = null_proj.squaredNorm() / static_cast<double>(m);
        rep.p_values = {k1.p_value};
        rep.statistics = {k1.statistic, null_var};
        rep.passed = k1.p_value > alpha && null_var <= 1e-3 * range_var;
        rep.notes = "range-direction KS, null-direction collapse";
    } else {
        const double var0 = rows.col(0).squaredNorm() / static_cast<double>(m);
        const double var1 = rows.col(1).squaredNorm() / static_cast<double>(m);
        rep.statistics = {var0, var1};
        rep.passed = var0 <= 1e-6 && var1 <= 1e-6;
        rep.notes = "collapse of both coordinates";
    }
    return rep;
}

TestReport atom_scan(const std::vector<double>& samples,
                     double max_duplicate_fraction_times_n,
                     double max_bin_mass_factor) {
    TestReport rep;
    rep.name = "atom_scan";
    rep.n = samples.size();
    if (samples.size() < 1000) {
        rep.notes = "insufficient data (need N >= 1000)";
        return rep;
    }
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    std::size_t max_dup = 1, run = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        run = sorted[i] == sorted[i - 1] ? run + 1 : 1;
        max_dup = std::max(max_dup, run);
    }
    const double dup_freq = static_cast<double>(max_dup) / n;

    const double range = sorted.back() - sorted.front();
    double max_bin_mass = 1.0;
    double uniform_mass = 1.0;
    if (range > 0.0) {
        const int bins = static_cast<int>(std::sqrt(n));
        std::vector<std::size_t> counts(bins, 0);
        for (double x : sorted) {
            int b = static_cast<int>((x - sorted.front()) / range * bins);
            counts[std::clamp(b, 0, bins - 1)]++;
        }
        max_bin_mass =
            static_cast<double>(*std::max_element(counts.begin(), counts.end())) / n;
        uniform_mass = 1.0 / bins;
    }
    rep.statistics = {dup_freq, max_bin_mass, uniform_mass};
    rep.passed = dup_freq <= max_duplicate_fraction_times_n / n &&
                 max_bin_mass <= max_bin_mass_factor * uniform_mass;
    return rep;
}

TestReport convergence_diagnostic(const std::vector<Path>& paths,
                                  const EigenPair& pair,
                                  const std::vector<double>& checkpoints) {
    TestReport rep;
    rep.name = "convergence_diagnostic";
    rep.n = paths.size();
    if (paths.empty() || checkpoints.size() < 2) {
        rep.notes = "insufficient data";
        return rep;
    }
    // scaled value e^{-lambda T} <v, X_T> at each checkpoint, per path
    const std::size_t K = checkpoints.size();
    std::vector<double> mean_increment(K - 1, 0.0);
    for (const Path& p : paths) {
        std::vector<Complex> scaled(K);
        for (std::size_t k = 0; k < K; ++k) {
            // nearest recorded grid point
            const auto it = std::lower_bound(p.times.begin(), p.times.end(),
                                             checkpoints[k] - 1e-12);
            const std::size_t idx =
                std::min<std::size_t>(it - p.times.begin(), p.states.size() - 1);
            scaled[k] = std::exp(-pair.lambda * p.times[idx]) *
                        project(pair.v, p.states[idx]);
        }
        for (std::size_t k = 0; k + 1 < K; ++k)
            mean_increment[k] += std::abs(scaled[k + 1] - scaled[k]);
    }
    for (double& m : mean_increment) m /= static_cast<double>(paths.size());
    rep.statistics = mean_increment;

    // geometric decay beyond the first gap, with slack for MC noise
    bool decays = true;
    for (std::size_t k = 1; k + 1 < mean_increment.size(); ++k)
        if (mean_increment[k + 1] > 0.9 * mean_increment[k] + 1e-12) decays = false;
    if (mean_increment.back() > 0.5 * mean_increment.front() + 1e-12)
        decays = false;
    rep.passed = decays;
    return rep;
}

TestReport qv_limit_check(const std::vector<Path>& paths,
                          const CbiParams& params, const EigenPair& pair,
                          const SpectralSummary& spec, double T,
                          const Eigen::Matrix2d& Sigma, double w_mean_estimate,
                          double rel_tol) {
    TestReport rep;
    rep.name = "qv_limit_check";
    rep.n = paths.size();
    if (paths.empty()) {
        rep.notes = "insufficient data";
        return rep;
    }
    for (const Path& p : paths)
        if (p.times.size() < 2)
            throw std::invalid_argument("qv_limit_check: need full-grid paths");

    const Complex lambda = pair.lambda;
    auto outer = [&](double u, Complex ip) {
        const Complex a = std::exp(-lambda * u) * ip;
        Eigen::Vector2d g(a.real(), a.imag());
        return (g * g.transpose()).eval();
    };

    Eigen::Matrix2d mean_qv = Eigen::Matrix2d::Zero();
    for (const Path& p : paths) {
        Eigen::Matrix2d qv = Eigen::Matrix2d::Zero();
        // diffusion QV on the grid
        for (std::size_t k = 0; k + 1 < p.times.size(); ++k) {
            const double du = p.times[k + 1] - p.times[k];
            for (int l = 0; l < params.d; ++l) {
                if (params.c(l) <= 0.0) continue;
                qv += 2.0 * params.c(l) * std::max(p.states[k](l), 0.0) * du *
                      outer(p.times[k], pair.v(l));
            }
        }
        // jump QV from the log (compensators are continuous, so raw jumps
        // carry the whole quadratic variation)
        for (const JumpEvent& j : p.jump_log)
            qv += outer(j.time, project(pair.v, j.vec));
        mean_qv += qv;
    }
    mean_qv /= static_cast<double>(paths.size());

    const double gap = spec.s - 2.0 * lambda.real();
    const Eigen::Matrix2d scaled = std::exp(-gap * T) * mean_qv;
    const Eigen::Matrix2d target = w_mean_estimate * Sigma;

    const double scale = std::max(target.cwiseAbs().maxCoeff(), 1e-12);
    const double err = (scaled - target).cwiseAbs().maxCoeff();
    rep.statistics = {scaled(0, 0), scaled(0, 1), scaled(1, 1),
                      target(0, 0), target(0, 1), target(1, 1), err / scale};
    rep.passed = err <= rel_tol * scale;
    return rep;
}

}  // namespace cbi

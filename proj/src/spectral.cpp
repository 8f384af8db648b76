#include "cbi/spectral.hpp"

#include <algorithm>
#include <stdexcept>

namespace cbi {

bool is_irreducible(const Eigen::MatrixXd& M) {
    const int d = static_cast<int>(M.rows());
    if (d == 1) return true;  // no 1-by-1 matrix is reducible

    // Strong connectivity via forward and backward reachability from node 0.
    auto reach = [&](bool transpose) {
        std::vector<char> seen(d, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < d; ++j) {
                if (j == i || seen[j]) continue;
                const double w = transpose ? M(i, j) : M(j, i);  // edge i->j iff M_{ji} > 0
                if (w > 0.0) {
                    seen[j] = 1;
                    stack.push_back(j);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach(false) && reach(true);
}

namespace {

std::complex<double> snap_real(std::complex<double> z) {
    if (std::abs(z.imag()) < 1e-12) return {z.real(), 0.0};
    return z;
}

// Deterministic phase fix: largest-modulus component real positive, unit norm.
Eigen::VectorXcd normalize_phase(Eigen::VectorXcd v) {
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        const double m = std::abs(v(i));
        if (m > best + 1e-14) {
            best = m;
            imax = i;
        }
    }
    const std::complex<double> pivot = v(imax);
    if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
    v /= v.norm();
    // Kill round-off imaginary dust on effectively real vectors.
    if (v.imag().cwiseAbs().maxCoeff() < 1e-13)
        v = v.real().template cast<std::complex<double>>();
    return v;
}

}  // namespace

SpectralSummary spectral_summary(const Eigen::MatrixXd& Btilde) {
    const int d = static_cast<int>(Btilde.rows());
    Eigen::EigenSolver<Eigen::MatrixXd> es(Btilde);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_summary: eigensolver failed");

    SpectralSummary out;
    out.s = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        const std::complex<double> ev = snap_real(es.eigenvalues()(i));
        out.eigenvalues.push_back(ev);
        out.s = std::max(out.s, ev.real());
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
              [](auto a, auto b) {
                  return a.real() != b.real() ? a.real() < b.real()
                                              : a.imag() < b.imag();
              });
    out.irreducible = is_irreducible(Btilde);
    out.criticality = out.s < 0.0   ? Criticality::Subcritical
                      : out.s > 0.0 ? Criticality::Supercritical
                                    : Criticality::Critical;
    if (out.irreducible) {
        // Perron pair: s is real and simple, eigenvectors strictly positive.
        Eigen::VectorXd utilde(d), u(d);
        {
            // right eigenvector of Btilde for s
            Eigen::EigenSolver<Eigen::MatrixXd> esr(Btilde);
            int idx = 0;
            double bestgap = std::numeric_limits<double>::infinity();
            for (int i = 0; i < d; ++i) {
                const double gap = std::abs(esr.eigenvalues()(i) -
                                            std::complex<double>(out.s, 0.0));
                if (gap < bestgap) {
                    bestgap = gap;
                    idx = i;
                }
            }
            Eigen::VectorXcd vc = esr.eigenvectors().col(idx);
            utilde = vc.real();
            if (utilde.sum() < 0.0) utilde = -utilde;
        }
        {
            Eigen::EigenSolver<Eigen::MatrixXd> esl(Btilde.transpose());
            int idx = 0;
            double bestgap = std::numeric_limits<double>::infinity();
            for (int i = 0; i < d; ++i) {
                const double gap = std::abs(esl.eigenvalues()(i) -
                                            std::complex<double>(out.s, 0.0));
                if (gap < bestgap) {
                    bestgap = gap;
                    idx = i;
                }
            }
            Eigen::VectorXcd vc = esl.eigenvectors().col(idx);
            u = vc.real();
            if (u.sum() < 0.0) u = -u;
        }
        utilde /= utilde.sum();          // sum of coordinates = 1
        u /= utilde.dot(u);              // <utilde, u> = 1
        out.utilde = utilde;
        out.u = u;
    }
    return out;
}

EigenPair left_eigenpair(const Eigen::MatrixXd& Btilde,
                         std::complex<double> target) {
    const int d = static_cast<int>(Btilde.rows());
    Eigen::MatrixXcd Bt = Btilde.transpose().cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Bt);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("left_eigenpair: eigensolver failed");

    int idx = -1;
    double bestgap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < d; ++i) {
        const double gap = std::abs(es.eigenvalues()(i) - target);
        if (gap < bestgap) {
            bestgap = gap;
            idx = i;
        }
    }
    const double scale = std::max(1.0, Btilde.norm());
    if (idx < 0 || bestgap > 1e-8 * scale)
        throw std::invalid_argument("left_eigenpair: target is not an eigenvalue");

    const std::complex<double> lambda = snap_real(es.eigenvalues()(idx));
    // Geometric multiplicity check: rank of (Btilde^T - lambda I).
    Eigen::MatrixXcd shifted =
        Bt - lambda * Eigen::MatrixXcd::Identity(d, d);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(shifted);
    cod.setThreshold(1e-9);
    if (d - cod.rank() > 1)
        throw std::runtime_error(
            "left_eigenpair: eigenvalue is geometrically multiple");

    EigenPair pair;
    pair.lambda = lambda;
    pair.v = normalize_phase(es.eigenvectors().col(idx));

    const double resid = (pair.v.transpose() * Btilde.cast<std::complex<double>>() -
                          lambda * pair.v.transpose())
                             .norm();
    if (resid > 1e-10 * scale)
        throw std::runtime_error("left_eigenpair: residual too large");
    return pair;
}

Regime regime(std::complex<double> lambda, double s) {
    if (!(s > 0.0))
        throw std::invalid_argument("regime: requires supercritical s > 0");
    const double tol = 1e-10 * std::max(1.0, s);
    const double re = lambda.real();
    if (std::abs(re - 0.5 * s) <= tol) return Regime::II;
    if (re > 0.5 * s) return Regime::I;
    return Regime::III;
}

}  // namespace cbi

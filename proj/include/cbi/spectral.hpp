#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

namespace cbi {

enum class Criticality { Subcritical, Critical, Supercritical };

/// Regime of an eigenvalue lambda of Btilde relative to s = s(Btilde) > 0:
///   I   : Re(lambda) in (s/2, s]
///   II  : Re(lambda) =  s/2
///   III : Re(lambda) <  s/2
enum class Regime { I, II, III };

/// Left eigenpair of Btilde: v^T Btilde = lambda v^T. The returned vector is
/// scaled so ||v|| = 1 and its largest-modulus component is real positive
/// (first such component on ties).
struct EigenPair {
    std::complex<double> lambda;
    Eigen::VectorXcd v;
};

struct SpectralSummary {
    std::vector<std::complex<double>> eigenvalues;
    double s = 0.0;                 // max real part
    bool irreducible = false;
    Criticality criticality = Criticality::Critical;
    // Perron pair, present only when irreducible: u left, utilde right,
    // normalized so sum(utilde) = 1 and <utilde, u> = 1.
    std::optional<Eigen::VectorXd> u;
    std::optional<Eigen::VectorXd> utilde;
};

/// Strong connectivity of the positivity digraph of an essentially
/// non-negative matrix (edge i->j iff M_{ji} > 0, i != j). 1x1 is always true.
bool is_irreducible(const Eigen::MatrixXd& M);

/// Dense eigenstructure of Btilde. Eigenvalues with |Im| < 1e-12 are snapped
/// to the real axis. Throws on eigensolver failure.
SpectralSummary spectral_summary(const Eigen::MatrixXd& Btilde);

/// Left eigenpair for the eigenvalue closest to `target`; throws if no
/// eigenvalue lies within 1e-8 of the target, or if the eigenvalue is
/// geometrically multiple.
EigenPair left_eigenpair(const Eigen::MatrixXd& Btilde,
                         std::complex<double> target);

/// Throws std::invalid_argument if s <= 0.
Regime regime(std::complex<double> lambda, double s);

}  // namespace cbi

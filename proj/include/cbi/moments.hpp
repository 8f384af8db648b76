#pragma once

#include <functional>
#include <optional>

#include "cbi/model.hpp"
#include "cbi/spectral.hpp"

namespace cbi {

enum class SigmaClass { Zero, SingularNonzero, Invertible };

/// Asymptotic covariance of (Re<v,X_t>, Im<v,X_t>) under the regime scaling,
/// together with its defining per-type constants.
struct SigmaReport {
    Regime regime = Regime::III;
    Eigen::VectorXd C;                   // C_{v,l} >= 0
    Eigen::VectorXcd Ctilde;             // complex C~_{v,l}
    Eigen::Matrix2d Sigma;
    SigmaClass classification = SigmaClass::Zero;
    std::string reason;
};

enum class ScalingTag {
    ExpMinusSt,        // e^{-s t}
    TinvExpMinusSt,    // t^{-1} e^{-s t}
    ExpMinusTwoReLt,   // e^{-2 Re(lambda) t}
};

struct M2Limit {
    ScalingTag h;
    double M2 = 0.0;
};

struct MomentReport {
    double t = 0.0;
    double value = 0.0;   // E |<v, X_t>|^2
    double h_of_t = 1.0;
    double M2 = 0.0;
};

/// E(X_t) = e^{t Btilde} E(X_0) + ∫_0^t e^{u Btilde} betatilde du,
/// via the augmented (d+1)x(d+1) block matrix exponential.
Eigen::VectorXd mean_at(const EffectiveParams& eff, const Eigen::VectorXd& Ex0,
                        double t);

/// E(w_{u,X0}) = <u, E X_0> + <u, betatilde>/s. Requires supercritical s > 0.
double w_mean(const SpectralSummary& spec, const EffectiveParams& eff,
              const Eigen::VectorXd& Ex0);

/// Exact finite-t second moment E |<v, X_t>|^2 of the projection on a left
/// eigenpair; the time integral over E(X_u) is evaluated by adaptive Simpson
/// (absolute tolerance 1e-9).
double second_moment(const CbiParams& params, const EffectiveParams& eff,
                     const EigenPair& pair, const InitialLaw& x0, double t);

/// Scaling descriptor h and limit constant M2 with h(t) E|<v,X_t>|^2 -> M2.
M2Limit m2_limit(const CbiParams& params, const EffectiveParams& eff,
                 const SpectralSummary& spec, const EigenPair& pair,
                 const InitialLaw& x0);

double eval_scaling(ScalingTag h, double s, std::complex<double> lambda, double t);

/// Sigma_v for regime II or III; throws std::invalid_argument in regime I.
SigmaReport sigma_v(const CbiParams& params, const SpectralSummary& spec,
                    const EigenPair& pair);

/// w_mean * Sigma_v.
Eigen::Matrix2d variance_limit(const CbiParams& params,
                               const SpectralSummary& spec,
                               const EffectiveParams& eff, const EigenPair& pair,
                               const Eigen::VectorXd& Ex0);

/// Classification of Sigma_v from the parameter-level conditions alone:
/// Zero iff c_l <v,e_l> = 0 and mu_l{<v,z> != 0} = 0 for all l; otherwise
/// Invertible when Im(lambda) != 0 and SingularNonzero when lambda is real.
std::pair<SigmaClass, std::string> sigma_classification(const CbiParams& params,
                                                        const EigenPair& pair);

/// If <v, X_t> is deterministic for all t (trivial process, or deterministic
/// initial projection with all noise sources killed in the v direction),
/// returns t |-> e^{lambda t} <v, E X_0> + <v, betatilde> ∫_0^t e^{lambda u} du.
std::optional<std::function<std::complex<double>(double)>>
deterministic_projection(const CbiParams& params, const EffectiveParams& eff,
                         const EigenPair& pair, const InitialLaw& x0);

}  // namespace cbi

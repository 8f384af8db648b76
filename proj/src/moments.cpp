#include "cbi/moments.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <stdexcept>

#include "cbi/quadrature.hpp"

namespace cbi {

namespace {

using Complex = std::complex<double>;

// ∫_0^t e^{a u} du with the a = 0 limit handled.
Complex exp_integral(Complex a, double t) {
    if (std::abs(a) < 1e-14) return {t, 0.0};
    return (std::exp(a * t) - 1.0) / a;
}

// Per-type constants C_{v,l} and C~_{v,l}.
void projection_constants(const CbiParams& params, const Eigen::VectorXcd& v,
                          Eigen::VectorXd& C, Eigen::VectorXcd& Ct) {
    const int d = params.d;
    C.resize(d);
    Ct.resize(d);
    for (int l = 0; l < d; ++l) {
        const ProjectionQuadratics pq = params.mu[l].projection_quadratics(v);
        C(l) = 2.0 * std::norm(v(l)) * params.c(l) + pq.abs_sq;
        Ct(l) = 2.0 * v(l) * v(l) * params.c(l) + pq.sq;
    }
}

Eigen::Matrix2d rotation_block(Complex z) {
    Eigen::Matrix2d m;
    m << z.real(), z.imag(), z.imag(), -z.real();
    return m;
}

}  // namespace

Eigen::VectorXd mean_at(const EffectiveParams& eff, const Eigen::VectorXd& Ex0,
                        double t) {
    const int d = static_cast<int>(eff.Btilde.rows());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(d + 1, d + 1);
    aug.topLeftCorner(d, d) = eff.Btilde;
    aug.topRightCorner(d, 1) = eff.betatilde;
    const Eigen::MatrixXd E = (t * aug).exp();
    Eigen::VectorXd out =
        E.topLeftCorner(d, d) * Ex0 + E.topRightCorner(d, 1);
    return out.cwiseMax(0.0);
}

double w_mean(const SpectralSummary& spec, const EffectiveParams& eff,
              const Eigen::VectorXd& Ex0) {
    if (!(spec.s > 0.0))
        throw std::invalid_argument("w_mean: requires supercritical s > 0");
    if (!spec.u) throw std::invalid_argument("w_mean: Perron pair unavailable");
    return spec.u->dot(Ex0) + spec.u->dot(eff.betatilde) / spec.s;
}

double second_moment(const CbiParams& params, const EffectiveParams& eff,
                     const EigenPair& pair, const InitialLaw& x0, double t) {
    const Complex lambda = pair.lambda;
    const Eigen::VectorXcd& v = pair.v;
    const double two_re = 2.0 * lambda.real();

    Complex v_beta{0.0, 0.0};
    for (int j = 0; j < params.d; ++j) v_beta += v(j) * eff.betatilde(j);

    // E_{v,lambda}(t) = E |e^{lambda t} <v,X0> + <v,betatilde> ∫_0^t e^{lambda(t-u)} du|^2
    const Complex J = exp_integral(lambda, t);  // equals ∫_0^t e^{lambda(t-u)} du
    const Complex elt = std::exp(lambda * t);
    const double E_term =
        x0.second_moment_of_projection(elt * v, v_beta * J);

    Eigen::VectorXd C;
    Eigen::VectorXcd Ct;
    projection_constants(params, v, C, Ct);

    // sum_l C_{v,l} I_{lambda,l}(t), with I_{lambda,l}(t) = ∫_0^t e^{2Re(lambda)(t-u)} E(X_{u,l}) du
    const Eigen::VectorXd Ex0 = x0.mean();
    double branch_term = 0.0;
    if (C.cwiseAbs().sum() > 0.0) {
        auto integrand = [&](double u) {
            const Eigen::VectorXd m = mean_at(eff, Ex0, u);
            return std::exp(two_re * (t - u)) * C.dot(m);
        };
        branch_term = adaptive_simpson(integrand, 0.0, t, 1e-9);
    }

    const double I_lambda = exp_integral(Complex(two_re, 0.0), t).real();
    const double nu_term = I_lambda * params.nu.projection_quadratics(v).abs_sq;

    return E_term + branch_term + nu_term;
}

double eval_scaling(ScalingTag h, double s, std::complex<double> lambda,
                    double t) {
    switch (h) {
        case ScalingTag::ExpMinusSt: return std::exp(-s * t);
        case ScalingTag::TinvExpMinusSt: return std::exp(-s * t) / t;
        case ScalingTag::ExpMinusTwoReLt: return std::exp(-2.0 * lambda.real() * t);
    }
    return 1.0;
}

M2Limit m2_limit(const CbiParams& params, const EffectiveParams& eff,
                 const SpectralSummary& spec, const EigenPair& pair,
                 const InitialLaw& x0) {
    if (!(spec.s > 0.0) || !spec.irreducible)
        throw std::invalid_argument("m2_limit: requires supercritical irreducible");
    const Complex lambda = pair.lambda;
    const Eigen::VectorXcd& v = pair.v;
    const double s = spec.s;
    const double re = lambda.real();

    Eigen::VectorXd C;
    Eigen::VectorXcd Ct;
    projection_constants(params, v, C, Ct);
    const Eigen::VectorXd Ex0 = x0.mean();

    M2Limit out;
    const Regime reg = regime(lambda, s);
    if (reg == Regime::I) {
        out.h = ScalingTag::ExpMinusTwoReLt;
        Complex v_beta{0.0, 0.0};
        for (int j = 0; j < params.d; ++j) v_beta += v(j) * eff.betatilde(j);
        double m2 = x0.second_moment_of_projection(v, v_beta / lambda);
        m2 += params.nu.projection_quadratics(v).abs_sq / (2.0 * re);
        Eigen::MatrixXd A =
            2.0 * re * Eigen::MatrixXd::Identity(params.d, params.d) - eff.Btilde;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible())
            throw std::runtime_error("m2_limit: 2Re(lambda)I - Btilde singular");
        const Eigen::VectorXd resolvent =
            lu.solve(Ex0 + eff.betatilde / (2.0 * re));
        m2 += C.dot(resolvent);
        out.M2 = m2;
    } else {
        const double wm = w_mean(spec, eff, Ex0);
        const double weighted = C.dot(*spec.utilde);
        if (reg == Regime::II) {
            out.h = ScalingTag::TinvExpMinusSt;
            out.M2 = wm * weighted;
        } else {
            out.h = ScalingTag::ExpMinusSt;
            out.M2 = wm * weighted / (s - 2.0 * re);
        }
    }
    return out;
}

SigmaReport sigma_v(const CbiParams& params, const SpectralSummary& spec,
                    const EigenPair& pair) {
    if (!(spec.s > 0.0) || !spec.irreducible)
        throw std::invalid_argument("sigma_v: requires supercritical irreducible");
    const Regime reg = regime(pair.lambda, spec.s);
    if (reg == Regime::I)
        throw std::invalid_argument("sigma_v: undefined in regime I");

    SigmaReport rep;
    rep.regime = reg;
    projection_constants(params, pair.v, rep.C, rep.Ctilde);

    const double s = spec.s;
    const Complex lambda = pair.lambda;
    const bool lambda_real = lambda.imag() == 0.0;
    const Eigen::VectorXd& ut = *spec.utilde;

    Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
    for (int l = 0; l < params.d; ++l) {
        if (reg == Regime::II) {
            sigma += 0.5 * ut(l) *
                     (rep.C(l) * Eigen::Matrix2d::Identity() +
                      (lambda_real ? rotation_block(rep.Ctilde(l))
                                   : Eigen::Matrix2d::Zero().eval()));
        } else {
            sigma += 0.5 * ut(l) *
                     (rep.C(l) / (s - 2.0 * lambda.real()) *
                          Eigen::Matrix2d::Identity() +
                      rotation_block(rep.Ctilde(l) / (s - 2.0 * lambda)));
        }
    }
    rep.Sigma = sigma;

    auto [cls, reason] = sigma_classification(params, pair);
    rep.classification = cls;
    rep.reason = reason;

    // Cross-check the parameter-level classification against the matrix itself.
    const double norm = sigma.norm();
    const double det = sigma.determinant();
    const double tr = sigma.trace();
    if (cls == SigmaClass::Zero && norm > 1e-12)
        throw std::logic_error("sigma_v: Zero classification but ||Sigma|| > 0");
    if (cls == SigmaClass::Invertible && det <= 1e-12 * tr * tr)
        throw std::logic_error("sigma_v: Invertible classification but det ~ 0");
    return rep;
}

Eigen::Matrix2d variance_limit(const CbiParams& params,
                               const SpectralSummary& spec,
                               const EffectiveParams& eff, const EigenPair& pair,
                               const Eigen::VectorXd& Ex0) {
    return w_mean(spec, eff, Ex0) * sigma_v(params, spec, pair).Sigma;
}

std::pair<SigmaClass, std::string> sigma_classification(const CbiParams& params,
                                                        const EigenPair& pair) {
    bool zero = true;
    std::string why;
    for (int l = 0; l < params.d; ++l) {
        const bool diffusion_alive =
            params.c(l) * std::abs(pair.v(l)) > 1e-14;
        const double hits =
            params.mu[l].projection_quadratics(pair.v).support_hits;
        if (diffusion_alive || hits > 0.0) {
            zero = false;
            why = "type " + std::to_string(l) +
                  (diffusion_alive ? ": c_l <v,e_l> != 0" : ": mu_l{<v,z> != 0} > 0");
            break;
        }
    }
    if (zero)
        return {SigmaClass::Zero,
                "c_l <v,e_l> = 0 and mu_l{<v,z> != 0} = 0 for every type"};
    if (pair.lambda.imag() != 0.0) return {SigmaClass::Invertible, why};
    return {SigmaClass::SingularNonzero, why + " (real eigenvalue)"};
}

std::optional<std::function<std::complex<double>(double)>>
deterministic_projection(const CbiParams& params, const EffectiveParams& eff,
                         const EigenPair& pair, const InitialLaw& x0) {
    const bool trivial = is_trivial(params, x0.is_zero_as());
    bool killed = x0.projection_deterministic(pair.v);
    if (killed) {
        for (int l = 0; l < params.d && killed; ++l) {
            if (params.c(l) * std::abs(pair.v(l)) > 1e-14) killed = false;
            if (params.mu[l].projection_quadratics(pair.v).support_hits > 0.0)
                killed = false;
        }
        if (params.nu.projection_quadratics(pair.v).support_hits > 0.0)
            killed = false;
    }
    if (!trivial && !killed) return std::nullopt;

    Complex v_ex0{0.0, 0.0};
    const Eigen::VectorXd Ex0 = x0.mean();
    Complex v_beta{0.0, 0.0};
    for (int j = 0; j < params.d; ++j) {
        v_ex0 += pair.v(j) * Ex0(j);
        v_beta += pair.v(j) * eff.betatilde(j);
    }
    const Complex lambda = pair.lambda;
    return [=](double t) {
        return std::exp(lambda * t) * v_ex0 + v_beta * exp_integral(lambda, t);
    };
}

}  // namespace cbi

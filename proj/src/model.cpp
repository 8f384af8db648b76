#include "cbi/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cbi {

bool InitialLaw::is_zero_as() const {
    for (const auto& [x, p] : support)
        if (p > 0.0 && x.norm() > 0.0) return false;
    return true;
}

Eigen::VectorXd InitialLaw::mean() const {
    if (support.empty()) throw std::logic_error("InitialLaw: empty support");
    Eigen::VectorXd m = Eigen::VectorXd::Zero(support.front().first.size());
    for (const auto& [x, p] : support) m += p * x;
    return m;
}

double InitialLaw::second_moment_of_projection(const Eigen::VectorXcd& v,
                                               std::complex<double> shift) const {
    double s = 0.0;
    for (const auto& [x, p] : support) {
        std::complex<double> ip = shift;
        for (int j = 0; j < x.size(); ++j) ip += v(j) * x(j);
        s += p * std::norm(ip);
    }
    return s;
}

bool InitialLaw::projection_deterministic(const Eigen::VectorXcd& v) const {
    if (support.size() <= 1) return true;
    std::complex<double> first{0.0, 0.0};
    bool have_first = false;
    for (const auto& [x, p] : support) {
        if (p <= 0.0) continue;
        std::complex<double> ip{0.0, 0.0};
        for (int j = 0; j < x.size(); ++j) ip += v(j) * x(j);
        if (!have_first) {
            first = ip;
            have_first = true;
        } else if (std::abs(ip - first) > 1e-12 * (1.0 + std::abs(first))) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> validate(const CbiParams& p) {
    std::vector<std::string> out;
    if (p.d < 1) out.push_back("d must be >= 1");
    if (p.c.size() != p.d) out.push_back("c has wrong dimension");
    if (p.beta.size() != p.d) out.push_back("beta has wrong dimension");
    if (p.B.rows() != p.d || p.B.cols() != p.d) out.push_back("B has wrong shape");
    if (static_cast<int>(p.mu.size()) != p.d)
        out.push_back("mu must contain exactly d measures");
    if (!out.empty()) return out;  // shape errors mask everything else

    for (int i = 0; i < p.d; ++i) {
        if (p.c(i) < 0.0) out.push_back("c[" + std::to_string(i) + "] negative");
        if (p.beta(i) < 0.0) out.push_back("beta[" + std::to_string(i) + "] negative");
        for (int j = 0; j < p.d; ++j)
            if (i != j && p.B(i, j) < 0.0)
                out.push_back("B off-diagonal (" + std::to_string(i) + "," +
                              std::to_string(j) + ") negative");
    }
    for (const std::string& v : p.nu.violations()) out.push_back("nu: " + v);
    if (p.nu.dim() != p.d) out.push_back("nu: dimension mismatch");
    for (int i = 0; i < p.d; ++i) {
        if (p.mu[i].dim() != p.d) {
            out.push_back("mu[" + std::to_string(i) + "]: dimension mismatch");
            continue;
        }
        for (const std::string& v : p.mu[i].violations())
            out.push_back("mu[" + std::to_string(i) + "]: " + v);
    }
    return out;
}

EffectiveParams effective(const CbiParams& p) {
    EffectiveParams eff;
    eff.Btilde = p.B;
    for (int j = 0; j < p.d; ++j)
        for (int i = 0; i < p.d; ++i)
            eff.Btilde(i, j) += p.mu[j].positive_part_integral(i, i == j ? 1 : 0);
    eff.betatilde = p.beta + p.nu.mean_vector();
    return eff;
}

MomentFlags check_moments(const CbiParams& p, std::complex<double> lambda,
                          double s) {
    MomentFlags f;
    const double nu1 = p.nu.tail_moment(TailKind::Power1);
    const double nu2 = p.nu.tail_moment(TailKind::Power2);
    double branch_tail = 0.0, branch4 = 0.0, branch2 = 0.0;
    const double re = lambda.real();
    for (const auto& m : p.mu) {
        branch4 += m.tail_moment(TailKind::Power4);
        branch2 += m.tail_moment(TailKind::Power2);
        if (re > 0.0 && std::abs(re - s) <= 1e-10 * std::max(1.0, std::abs(s)))
            branch_tail += m.tail_moment(TailKind::XLogX);
        else if (re > 0.0)
            branch_tail += m.tail_moment(TailKind::PowerRatio, s / re);
    }
    f.nu_tail_value = nu1;
    f.branch_tail_value = branch_tail;
    f.nu_first = std::isfinite(nu1);
    f.xlogx_or_power = std::isfinite(branch_tail);
    f.fourth_branch_second_immig = std::isfinite(branch4) && std::isfinite(nu2);
    f.second_both = std::isfinite(branch2) && std::isfinite(nu2);
    return f;
}

Eigen::VectorXd phi(const CbiParams& p, const Eigen::VectorXd& lam) {
    for (int i = 0; i < lam.size(); ++i)
        if (lam(i) < 0.0)
            throw std::invalid_argument("phi: lam must be component-wise >= 0");
    Eigen::VectorXd out(p.d);
    for (int i = 0; i < p.d; ++i) {
        double v = p.c(i) * lam(i) * lam(i) - p.B.col(i).dot(lam);
        for (const Atom& a : p.mu[i].atoms()) {
            const double ip = lam.dot(a.point);
            v += a.mass * (std::exp(-ip) - 1.0 + lam(i) * std::min(1.0, a.point(i)));
        }
        out(i) = v;
    }
    return out;
}

double psi(const CbiParams& p, const Eigen::VectorXd& lam) {
    for (int i = 0; i < lam.size(); ++i)
        if (lam(i) < 0.0)
            throw std::invalid_argument("psi: lam must be component-wise >= 0");
    double v = p.beta.dot(lam);
    for (const Atom& a : p.nu.atoms())
        v += a.mass * (1.0 - std::exp(-lam.dot(a.point)));
    return v;
}

namespace {

// RK4 right-hand side d/dt v = -phi(v); components clamped at 0 afterwards.
Eigen::VectorXd riccati_rhs(const CbiParams& p, const Eigen::VectorXd& v) {
    Eigen::VectorXd vv = v.cwiseMax(0.0);
    return -phi(p, vv);
}

}  // namespace

double laplace(const CbiParams& p, const Eigen::VectorXd& x0,
               const Eigen::VectorXd& lam, double t, double ode_step) {
    if (t <= 0.0) return std::exp(-x0.dot(lam));
    // Even step count for composite Simpson on the same grid.
    int n = static_cast<int>(std::ceil(t / ode_step));
    if (n % 2 != 0) ++n;
    const double h = t / n;

    const double neg_tol = 1e-6 * std::max(1.0, lam.maxCoeff());
    Eigen::VectorXd v = lam;
    std::vector<double> psi_vals;
    psi_vals.reserve(n + 1);
    psi_vals.push_back(psi(p, v.cwiseMax(0.0)));
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd k1 = riccati_rhs(p, v);
        const Eigen::VectorXd k2 = riccati_rhs(p, v + 0.5 * h * k1);
        const Eigen::VectorXd k3 = riccati_rhs(p, v + 0.5 * h * k2);
        const Eigen::VectorXd k4 = riccati_rhs(p, v + h * k3);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (v.minCoeff() < -neg_tol)
            throw std::runtime_error(
                "laplace: Riccati flow left R_+^d, decrease ode_step");
        v = v.cwiseMax(0.0);
        psi_vals.push_back(psi(p, v));
    }
    double integral = psi_vals.front() + psi_vals.back();
    for (int k = 1; k < n; ++k) integral += (k % 2 == 1 ? 4.0 : 2.0) * psi_vals[k];
    integral *= h / 3.0;

    const double val = std::exp(-x0.dot(v) - integral);
    return std::min(1.0, std::max(val, std::numeric_limits<double>::min()));
}

bool is_trivial(const CbiParams& p, bool x0_is_zero_as) {
    return x0_is_zero_as && p.beta.isZero(0.0) && p.nu.empty();
}

}  // namespace cbi

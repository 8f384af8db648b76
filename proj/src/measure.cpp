#include "cbi/measure.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cbi {

DiscreteMeasure::DiscreteMeasure(int dim, std::vector<Atom> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {}

void DiscreteMeasure::add_atom(const Eigen::VectorXd& point, double mass) {
    atoms_.push_back(Atom{point, mass});
}

std::vector<std::string> DiscreteMeasure::violations() const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        const Atom& a = atoms_[k];
        const std::string tag = "atom " + std::to_string(k);
        if (a.point.size() != dim_) {
            out.push_back(tag + ": point dimension " +
                          std::to_string(a.point.size()) + " != " + std::to_string(dim_));
            continue;
        }
        if (!(a.mass > 0.0) || !std::isfinite(a.mass))
            out.push_back(tag + ": mass must be strictly positive and finite");
        bool any_positive = false;
        for (int i = 0; i < dim_; ++i) {
            if (a.point(i) < 0.0 || !std::isfinite(a.point(i))) {
                out.push_back(tag + ": coordinate " + std::to_string(i) +
                              " outside R_+");
                any_positive = false;
                break;
            }
            if (a.point(i) > 0.0) any_positive = true;
        }
        if (!any_positive) out.push_back(tag + ": point outside U_d (all coordinates zero)");
    }
    return out;
}

double DiscreteMeasure::total_mass() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.mass;
    return s;
}

Eigen::VectorXd DiscreteMeasure::mean_vector() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_);
    for (const Atom& a : atoms_) m += a.mass * a.point;
    return m;
}

double DiscreteMeasure::positive_part_integral(int i, int delta) const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.mass * std::max(a.point(i) - delta, 0.0);
    return s;
}

double DiscreteMeasure::tail_moment(TailKind kind, double q) const {
    double s = 0.0;
    for (const Atom& a : atoms_) {
        const double r = a.point.norm();
        if (r < 1.0) continue;
        double g;
        switch (kind) {
            case TailKind::Power1: g = r; break;
            case TailKind::Power2: g = r * r; break;
            case TailKind::Power4: g = r * r * r * r; break;
            case TailKind::XLogX: g = r * std::log(r); break;
            case TailKind::PowerRatio: g = std::pow(r, q); break;
            default: g = 0.0; break;
        }
        s += a.mass * g;
    }
    return s;
}

ProjectionQuadratics DiscreteMeasure::projection_quadratics(
    const Eigen::VectorXcd& v) const {
    if (v.size() != dim_)
        throw std::invalid_argument("projection_quadratics: dimension mismatch");
    ProjectionQuadratics pq;
    const double vnorm = v.norm();
    for (const Atom& a : atoms_) {
        // <v,z> with the convention sum_j v_j * conj(z_j); z is real.
        std::complex<double> ip{0.0, 0.0};
        for (int j = 0; j < dim_; ++j) ip += v(j) * a.point(j);
        pq.abs_sq += a.mass * std::norm(ip);
        pq.sq += a.mass * ip * ip;
        pq.lin += a.mass * ip;
        if (std::abs(ip) > 1e-12 * vnorm * a.point.norm()) pq.support_hits += a.mass;
    }
    return pq;
}

}  // namespace cbi

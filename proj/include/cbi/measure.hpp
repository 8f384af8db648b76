#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace cbi {

/// One atom of a finite discrete measure on U_d = R_+^d \ {0}.
struct Atom {
    Eigen::VectorXd point;
    double mass = 0.0;
};

enum class TailKind { Power1, Power2, Power4, XLogX, PowerRatio };

/// Results of integrating |<v,z>|^2, <v,z>^2, <v,z> against a measure,
/// plus the mass of the support set where <v,z> != 0.
struct ProjectionQuadratics {
    double abs_sq = 0.0;                    // ∫ |<v,z>|^2 dm
    std::complex<double> sq{0.0, 0.0};      // ∫ <v,z>^2 dm
    std::complex<double> lin{0.0, 0.0};     // ∫ <v,z> dm
    double support_hits = 0.0;              // m{z : <v,z> != 0}
};

/// Finite discrete measure on U_d, stored as an atom list in insertion order.
/// Immutable usage pattern: build once, then share freely across threads.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(int dim) : dim_(dim) {}
    DiscreteMeasure(int dim, std::vector<Atom> atoms);

    int dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }

    void add_atom(const Eigen::VectorXd& point, double mass);

    /// Checks the U_d invariants; returns human-readable violations.
    std::vector<std::string> violations() const;

    double total_mass() const;
    Eigen::VectorXd mean_vector() const;

    /// ∫ (z_i - delta)^+ m(dz), 0-based coordinate index.
    double positive_part_integral(int i, int delta) const;

    /// ∫ g(||z||) 1_{||z||>=1} m(dz); q is only read for PowerRatio.
    double tail_moment(TailKind kind, double q = 1.0) const;

    /// Inner product convention <x,y> = sum_j x_j * conj(y_j).
    /// The zero test for support_hits is |<v,z>| <= 1e-12 * ||v|| * ||z||.
    ProjectionQuadratics projection_quadratics(const Eigen::VectorXcd& v) const;

private:
    int dim_;
    std::vector<Atom> atoms_;
};

}  // namespace cbi

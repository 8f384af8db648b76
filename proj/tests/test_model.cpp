#include <doctest.h>

#include <cmath>

#include "cbi/model.hpp"

using cbi::CbiParams;
using cbi::DiscreteMeasure;
using cbi::InitialLaw;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

CbiParams blank(int d) {
    CbiParams p;
    p.d = d;
    p.c = Eigen::VectorXd::Zero(d);
    p.beta = Eigen::VectorXd::Zero(d);
    p.B = Eigen::MatrixXd::Zero(d, d);
    p.nu = DiscreteMeasure(d);
    p.mu.assign(d, DiscreteMeasure(d));
    return p;
}

}  // namespace

TEST_CASE("validate") {
    SUBCASE("negative diagonal allowed") {
        CbiParams p = blank(1);
        p.c(0) = 1.0;
        p.B(0, 0) = -3.0;
        CHECK(cbi::validate(p).empty());
    }
    SUBCASE("negative off-diagonal flagged") {
        CbiParams p = blank(2);
        p.B(0, 1) = -0.1;
        CHECK(!cbi::validate(p).empty());
    }
    SUBCASE("atom at origin flagged") {
        CbiParams p = blank(2);
        p.mu[0].add_atom(vec({0, 0}), 1.0);
        CHECK(!cbi::validate(p).empty());
    }
}

TEST_CASE("effective") {
    SUBCASE("worked example") {
        CbiParams p = blank(2);
        p.beta = vec({1, 0});
        p.mu[0].add_atom(vec({1, 2}), 0.5);
        p.nu.add_atom(vec({0.5, 0.5}), 2.0);
        const auto eff = cbi::effective(p);
        CHECK(eff.Btilde(0, 0) == doctest::Approx(0.0));
        CHECK(eff.Btilde(0, 1) == doctest::Approx(0.0));
        CHECK(eff.Btilde(1, 0) == doctest::Approx(1.0));
        CHECK(eff.Btilde(1, 1) == doctest::Approx(0.0));
        CHECK(eff.betatilde(0) == doctest::Approx(2.0));
        CHECK(eff.betatilde(1) == doctest::Approx(1.0));
    }
    SUBCASE("empty measures are the identity adjustment") {
        CbiParams p = blank(2);
        p.B << 1, 2, 3, 4;
        p.beta = vec({0.5, 0.25});
        const auto eff = cbi::effective(p);
        CHECK((eff.Btilde - p.B).norm() == 0.0);
        CHECK((eff.betatilde - p.beta).norm() == 0.0);
    }
    SUBCASE("symmetric jump measures") {
        CbiParams p = blank(2);
        p.B << 2, 0, 0, 2;
        p.mu[0].add_atom(vec({1, 1}), 1.0);
        p.mu[1].add_atom(vec({1, 1}), 1.0);
        const auto eff = cbi::effective(p);
        Eigen::MatrixXd want(2, 2);
        want << 2, 1, 1, 2;
        CHECK((eff.Btilde - want).norm() == doctest::Approx(0.0));
    }
    SUBCASE("atom splitting leaves Btilde unchanged") {
        CbiParams p = blank(2);
        p.B << 0.5, 0.1, 0.3, 0.2;
        p.mu[0].add_atom(vec({1.5, 0.7}), 0.8);
        CbiParams q = p;
        q.mu[0] = DiscreteMeasure(2);
        q.mu[0].add_atom(vec({1.5, 0.7}), 0.4);
        q.mu[0].add_atom(vec({1.5, 0.7}), 0.4);
        CHECK((cbi::effective(p).Btilde - cbi::effective(q).Btilde)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-14);
    }
}

TEST_CASE("check_moments") {
    CbiParams p = blank(1);
    p.mu[0].add_atom(vec({3}), 1.0);
    const auto f = cbi::check_moments(p, {1.0, 0.0}, 1.0);
    CHECK(f.nu_first);
    CHECK(f.xlogx_or_power);
    CHECK(f.fourth_branch_second_immig);
    CHECK(f.second_both);
    CHECK(f.branch_tail_value == doctest::Approx(3.0 * std::log(3.0)));

    const auto g = cbi::check_moments(blank(2), {1.0, 0.0}, 2.0);
    CHECK(g.nu_first);
    CHECK(g.second_both);
}

TEST_CASE("phi") {
    SUBCASE("vanishes at zero") {
        CbiParams p = blank(2);
        p.c = vec({1, 2});
        p.B << 1, 0.5, 0.25, -1;
        p.mu[0].add_atom(vec({1, 1}), 1.0);
        CHECK(cbi::phi(p, vec({0, 0})).isZero(0.0));
    }
    SUBCASE("worked scalar example") {
        CbiParams p = blank(1);
        p.c(0) = 1.0;
        p.B(0, 0) = 1.0;
        p.mu[0].add_atom(vec({2}), 1.0);
        const double got = cbi::phi(p, vec({1}))(0);
        CHECK(got == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    }
    SUBCASE("no mechanism, no drift") {
        CbiParams p = blank(1);
        CHECK(cbi::phi(p, vec({5}))(0) == 0.0);
    }
    SUBCASE("negative argument throws") {
        CHECK_THROWS_AS(cbi::phi(blank(1), vec({-1})), std::invalid_argument);
    }
}

TEST_CASE("psi") {
    CHECK(cbi::psi(blank(2), vec({0, 0})) == 0.0);

    CbiParams p = blank(2);
    p.beta = vec({1, 0});
    CHECK(cbi::psi(p, vec({2, 3})) == doctest::Approx(2.0));

    CbiParams q = blank(2);
    q.nu.add_atom(vec({1, 0}), 1.0);
    CHECK(cbi::psi(q, vec({std::log(2.0), 7})) == doctest::Approx(0.5));

    CHECK_THROWS_AS(cbi::psi(blank(1), vec({-0.5})), std::invalid_argument);
}

TEST_CASE("laplace") {
    SUBCASE("lambda zero gives one") {
        CbiParams p = blank(1);
        p.c(0) = 1.0;
        p.B(0, 0) = 1.0;
        CHECK(cbi::laplace(p, vec({2}), vec({0}), 1.0) == doctest::Approx(1.0));
    }
    SUBCASE("trivial process gives one") {
        CbiParams p = blank(2);
        p.c = vec({1, 1});
        p.B << 1, 1, 1, 1;
        CHECK(cbi::laplace(p, vec({0, 0}), vec({3, 5}), 2.0) ==
              doctest::Approx(1.0));
    }
    SUBCASE("linear drift closed form") {
        // c=0, mu empty, b=1, beta=1: v(t) = lambda e^t and
        // -log L = x0 lambda e^t + lambda (e^t - 1).
        CbiParams p = blank(1);
        p.B(0, 0) = 1.0;
        p.beta(0) = 1.0;
        const double got = cbi::laplace(p, vec({1}), vec({1}), 1.0);
        const double e = std::exp(1.0);
        CHECK(got == doctest::Approx(std::exp(-e - (e - 1.0))).epsilon(1e-8));
    }
    SUBCASE("monotone in lambda and x0") {
        CbiParams p = blank(1);
        p.c(0) = 0.5;
        p.B(0, 0) = 0.7;
        p.beta(0) = 0.3;
        p.mu[0].add_atom(vec({1}), 0.5);
        double prev = 1.0;
        for (double lam = 0.5; lam <= 2.5; lam += 0.5) {
            const double cur = cbi::laplace(p, vec({1}), vec({lam}), 1.0);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
        CHECK(cbi::laplace(p, vec({2}), vec({1}), 1.0) <=
              cbi::laplace(p, vec({1}), vec({1}), 1.0) + 1e-12);
    }
    SUBCASE("small-t expansion") {
        CbiParams p = blank(1);
        p.c(0) = 1.0;
        p.B(0, 0) = 1.0;
        p.beta(0) = 0.5;
        p.mu[0].add_atom(vec({2}), 1.0);
        const Eigen::VectorXd x0 = vec({1});
        const Eigen::VectorXd lam = vec({1});
        const double t = 1e-3;
        const double lhs = -std::log(cbi::laplace(p, x0, lam, t, 1e-5));
        const double rhs = x0.dot(lam) +
                           t * (cbi::psi(p, lam) - x0.dot(cbi::phi(p, lam)));
        CHECK(std::abs(lhs - rhs) < 10.0 * t * t);
    }
}

TEST_CASE("is_trivial") {
    CbiParams p = blank(2);
    CHECK(cbi::is_trivial(p, true));

    CbiParams q = blank(2);
    q.nu.add_atom(vec({1, 0}), 1.0);
    CHECK(!cbi::is_trivial(q, true));

    CHECK(!cbi::is_trivial(p, false));
}

TEST_CASE("InitialLaw") {
    const auto det = InitialLaw::deterministic(vec({1, 2}));
    CHECK(det.is_deterministic());
    CHECK(!det.is_zero_as());
    CHECK(det.mean()(1) == doctest::Approx(2.0));

    InitialLaw law;
    law.support = {{vec({1, 0}), 0.5}, {vec({0, 1}), 0.5}};
    CHECK(!law.is_deterministic());
    CHECK(law.mean()(0) == doctest::Approx(0.5));

    Eigen::VectorXcd ones(2);
    ones << 1.0, 1.0;
    CHECK(law.projection_deterministic(ones));
    Eigen::VectorXcd e1(2);
    e1 << 1.0, 0.0;
    CHECK(!law.projection_deterministic(e1));

    // E|<v,X0> + shift|^2 over the two-point law with v = e1, shift = 1:
    // 0.5*|1+1|^2 + 0.5*|0+1|^2 = 2.5.
    CHECK(law.second_moment_of_projection(e1, {1.0, 0.0}) ==
          doctest::Approx(2.5));
}

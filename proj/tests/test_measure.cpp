#include <doctest.h>

#include <cmath>

#include "cbi/measure.hpp"

using cbi::DiscreteMeasure;
using cbi::TailKind;

namespace {

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXcd cv2(std::complex<double> a, std::complex<double> b) {
    Eigen::VectorXcd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("total_mass") {
    DiscreteMeasure empty(2);
    CHECK(empty.total_mass() == 0.0);

    DiscreteMeasure single(2);
    single.add_atom(v2(1, 2), 0.5);
    CHECK(single.total_mass() == doctest::Approx(0.5));

    DiscreteMeasure two(2);
    two.add_atom(v2(1, 0), 1.0);
    two.add_atom(v2(0, 1), 2.0);
    CHECK(two.total_mass() == doctest::Approx(3.0));
}

TEST_CASE("mean_vector") {
    DiscreteMeasure empty(2);
    CHECK(empty.mean_vector().isZero(0.0));

    DiscreteMeasure m(2);
    m.add_atom(v2(0.5, 0.5), 2.0);
    CHECK(m.mean_vector()(0) == doctest::Approx(1.0));
    CHECK(m.mean_vector()(1) == doctest::Approx(1.0));

    DiscreteMeasure m2(2);
    m2.add_atom(v2(1, 2), 0.5);
    CHECK(m2.mean_vector()(0) == doctest::Approx(0.5));
    CHECK(m2.mean_vector()(1) == doctest::Approx(1.0));
}

TEST_CASE("positive_part_integral") {
    DiscreteMeasure m(2);
    m.add_atom(v2(1, 2), 0.5);
    CHECK(m.positive_part_integral(0, 1) == doctest::Approx(0.0));
    CHECK(m.positive_part_integral(1, 0) == doctest::Approx(1.0));

    DiscreteMeasure empty(2);
    CHECK(empty.positive_part_integral(0, 0) == 0.0);
    CHECK(empty.positive_part_integral(1, 1) == 0.0);
}

TEST_CASE("tail_moment") {
    DiscreteMeasure m(2);
    m.add_atom(v2(2, 0), 1.0);
    CHECK(m.tail_moment(TailKind::Power4) == doctest::Approx(16.0));

    DiscreteMeasure small(2);
    small.add_atom(v2(0.5, 0), 3.0);
    CHECK(small.tail_moment(TailKind::Power1) == 0.0);
    CHECK(small.tail_moment(TailKind::Power4) == 0.0);
    CHECK(small.tail_moment(TailKind::XLogX) == 0.0);

    DiscreteMeasure me(2);
    me.add_atom(v2(std::exp(1.0), 0), 1.0);
    CHECK(me.tail_moment(TailKind::XLogX) == doctest::Approx(std::exp(1.0)));

    DiscreteMeasure mq(2);
    mq.add_atom(v2(2, 0), 1.0);
    CHECK(mq.tail_moment(TailKind::PowerRatio, 3.0) == doctest::Approx(8.0));
}

TEST_CASE("projection_quadratics") {
    SUBCASE("killed projection") {
        DiscreteMeasure m(2);
        m.add_atom(v2(1, 1), 1.0);
        const auto pq = m.projection_quadratics(cv2(1.0, -1.0));
        CHECK(pq.abs_sq == 0.0);
        CHECK(std::abs(pq.sq) == 0.0);
        CHECK(std::abs(pq.lin) == 0.0);
        CHECK(pq.support_hits == 0.0);
    }
    SUBCASE("axis atom") {
        DiscreteMeasure m(2);
        m.add_atom(v2(1, 0), 2.0);
        const auto pq = m.projection_quadratics(cv2(1.0, 0.0));
        CHECK(pq.abs_sq == doctest::Approx(2.0));
        CHECK(pq.sq.real() == doctest::Approx(2.0));
        CHECK(pq.lin.real() == doctest::Approx(2.0));
        CHECK(pq.support_hits == doctest::Approx(2.0));
    }
    SUBCASE("empty measure") {
        DiscreteMeasure m(2);
        const auto pq = m.projection_quadratics(cv2(3.0, -7.0));
        CHECK(pq.abs_sq == 0.0);
        CHECK(std::abs(pq.sq) == 0.0);
        CHECK(std::abs(pq.lin) == 0.0);
        CHECK(pq.support_hits == 0.0);
    }
    SUBCASE("dimension mismatch throws") {
        DiscreteMeasure m(2);
        Eigen::VectorXcd v(3);
        v.setOnes();
        CHECK_THROWS_AS(m.projection_quadratics(v), std::invalid_argument);
    }
    SUBCASE("real v, real atoms: imaginary parts vanish") {
        DiscreteMeasure m(2);
        m.add_atom(v2(1, 2), 0.7);
        m.add_atom(v2(3, 0.5), 1.3);
        const auto pq = m.projection_quadratics(cv2(2.0, -1.0));
        CHECK(pq.sq.imag() == 0.0);
        CHECK(pq.lin.imag() == 0.0);
    }
    SUBCASE("Cauchy-Schwarz |J2| <= I2") {
        DiscreteMeasure m(3);
        Eigen::VectorXd p(3);
        p << 0.3, 1.7, 0.2;
        m.add_atom(p, 0.9);
        p << 2.0, 0.0, 1.1;
        m.add_atom(p, 0.4);
        Eigen::VectorXcd v(3);
        v << std::complex<double>(1.0, 0.5), std::complex<double>(-0.3, 2.0),
            std::complex<double>(0.0, -1.0);
        const auto pq = m.projection_quadratics(v);
        CHECK(std::abs(pq.sq) <= pq.abs_sq + 1e-12);
    }
}

TEST_CASE("additivity of measure operations") {
    DiscreteMeasure a(2), b(2), ab(2);
    a.add_atom(v2(1, 2), 0.5);
    a.add_atom(v2(3, 0.1), 1.5);
    b.add_atom(v2(0.2, 0.7), 2.0);
    for (const auto& atom : a.atoms()) ab.add_atom(atom.point, atom.mass);
    for (const auto& atom : b.atoms()) ab.add_atom(atom.point, atom.mass);

    CHECK(ab.total_mass() == doctest::Approx(a.total_mass() + b.total_mass()));
    CHECK((ab.mean_vector() - a.mean_vector() - b.mean_vector()).norm() ==
          doctest::Approx(0.0));
    for (int i = 0; i < 2; ++i)
        for (int delta = 0; delta <= 1; ++delta)
            CHECK(ab.positive_part_integral(i, delta) ==
                  doctest::Approx(a.positive_part_integral(i, delta) +
                                  b.positive_part_integral(i, delta)));
    CHECK(ab.tail_moment(TailKind::Power2) ==
          doctest::Approx(a.tail_moment(TailKind::Power2) +
                          b.tail_moment(TailKind::Power2)));
    const auto va = a.projection_quadratics(cv2({1, 1}, {-2, 0.3}));
    const auto vb = b.projection_quadratics(cv2({1, 1}, {-2, 0.3}));
    const auto vab = ab.projection_quadratics(cv2({1, 1}, {-2, 0.3}));
    CHECK(vab.abs_sq == doctest::Approx(va.abs_sq + vb.abs_sq));
    CHECK(std::abs(vab.sq - va.sq - vb.sq) == doctest::Approx(0.0));
    CHECK(vab.support_hits ==
          doctest::Approx(va.support_hits + vb.support_hits));
}

TEST_CASE("violations") {
    DiscreteMeasure bad(2);
    bad.add_atom(v2(0, 0), 1.0);
    CHECK(!bad.violations().empty());

    DiscreteMeasure neg(2);
    neg.add_atom(v2(1, 0), -0.5);
    CHECK(!neg.violations().empty());

    DiscreteMeasure ok(2);
    ok.add_atom(v2(1, 0), 0.5);
    CHECK(ok.violations().empty());
}

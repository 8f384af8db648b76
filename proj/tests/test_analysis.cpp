#include <doctest.h>

#include <cmath>

#include "cbi/analysis.hpp"
#include "cbi/model.hpp"
#include "cbi/moments.hpp"
#include "cbi/rng.hpp"
#include "cbi/simulate.hpp"
#include "cbi/spectral.hpp"

using cbi::CbiParams;
using cbi::DiscreteMeasure;
using cbi::Ensemble;
using cbi::InitialLaw;
using cbi::SigmaClass;
using cbi::SimConfig;

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

Ensemble ensemble_of(const Eigen::MatrixXd& terminal) {
    Ensemble ens;
    ens.terminal = terminal;
    return ens;
}

cbi::EigenPair pair_of(std::complex<double> lambda,
                       std::initializer_list<std::complex<double>> comps) {
    cbi::EigenPair p;
    p.lambda = lambda;
    p.v.resize(static_cast<int>(comps.size()));
    int i = 0;
    for (auto c : comps) p.v(i++) = c;
    return p;
}

}  // namespace

TEST_CASE("w_samples") {
    CbiParams p = blank(2);
    p.B << 1, 1, 1, 1;
    const auto spec = cbi::spectral_summary(cbi::effective(p).Btilde);

    SUBCASE("all-zero ensemble gives zeros") {
        const auto ws = cbi::w_samples(
            ensemble_of(Eigen::MatrixXd::Zero(5, 2)), spec, 2.0);
        for (double w : ws) CHECK(w == 0.0);
    }
    SUBCASE("T = 0 is the plain projection") {
        Eigen::MatrixXd term(1, 2);
        term << 2, 1;
        const auto ws = cbi::w_samples(ensemble_of(term), spec, 0.0);
        CHECK(ws[0] == doctest::Approx(3.0));   // u = (1,1)
    }
}

TEST_CASE("projection_statistic basics") {
    CbiParams p = blank(2);
    p.B << 1, 1, 1, 1;
    const auto spec = cbi::spectral_summary(cbi::effective(p).Btilde);
    const auto pair = pair_of({0.0, 0.0}, {1.0, -1.0});

    SUBCASE("zero ensemble: zero rows, dead masks") {
        const auto sample = cbi::projection_statistic(
            ensemble_of(Eigen::MatrixXd::Zero(4, 2)), pair, spec, 1.0,
            cbi::ProjectionScaling::Thm35iii);
        CHECK(sample.rows.cwiseAbs().maxCoeff() == 0.0);
        for (char m : sample.survivor_mask) CHECK(m == 0);
    }
    SUBCASE("raising the threshold never adds survivors") {
        Eigen::MatrixXd term(3, 2);
        term << 1, 0.2, 3, 1, 0.1, 0.1;
        const auto low = cbi::projection_statistic(
            ensemble_of(term), pair, spec, 1.0,
            cbi::ProjectionScaling::Thm31iii, 0.5);
        const auto high = cbi::projection_statistic(
            ensemble_of(term), pair, spec, 1.0,
            cbi::ProjectionScaling::Thm31iii, 2.0);
        for (std::size_t i = 0; i < low.survivor_mask.size(); ++i)
            CHECK(high.survivor_mask[i] <= low.survivor_mask[i]);
    }
    SUBCASE("re-running on the same ensemble is bit-identical") {
        Eigen::MatrixXd term(3, 2);
        term << 1, 0.2, 3, 1, 0.1, 0.1;
        const auto a = cbi::projection_statistic(
            ensemble_of(term), pair, spec, 1.0, cbi::ProjectionScaling::Thm31ii);
        const auto b = cbi::projection_statistic(
            ensemble_of(term), pair, spec, 1.0, cbi::ProjectionScaling::Thm31ii);
        CHECK((a.rows - b.rows).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("relative_frequencies") {
    SUBCASE("all-zero ensemble has no survivors") {
        const auto rep =
            cbi::relative_frequencies(ensemble_of(Eigen::MatrixXd::Zero(6, 3)));
        CHECK(rep.survivors == 0);
    }
    SUBCASE("single path arithmetic") {
        Eigen::MatrixXd term(1, 2);
        term << 2, 1;
        const auto rep = cbi::relative_frequencies(ensemble_of(term));
        CHECK(rep.survivors == 1);
        CHECK(rep.rows(0, 0) == doctest::Approx(2.0 / 3.0));
        CHECK(rep.rows(0, 1) == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("gaussian_test") {
    SUBCASE("draws from the target law pass, shifted draws fail") {
        // singular target diag(2,0)
        Eigen::Matrix2d Sigma;
        Sigma << 2, 0, 0, 0;
        const int n = 10000;
        cbi::ScaledSample ok, shifted;
        ok.rows.resize(n, 2);
        shifted.rows.resize(n, 2);
        ok.survivor_mask.assign(n, 1);
        shifted.survivor_mask.assign(n, 1);
        cbi::KeyedRng rng(99, 0, 0, 0);
        for (int i = 0; i < n; ++i) {
            const double g = std::sqrt(2.0) * rng.normal();
            ok.rows.row(i) << g, 0.0;
            shifted.rows.row(i) << g + 1.0, 0.0;
        }
        const auto pass =
            cbi::gaussian_test(ok, Sigma, SigmaClass::SingularNonzero);
        REQUIRE(pass.passed.has_value());
        CHECK(*pass.passed);
        CHECK(pass.statistics[1] < 1e-3 * 2.0);   // null-direction variance
        const auto fail =
            cbi::gaussian_test(shifted, Sigma, SigmaClass::SingularNonzero);
        REQUIRE(fail.passed.has_value());
        CHECK(!*fail.passed);
    }
    SUBCASE("invertible target with correlated draws") {
        Eigen::Matrix2d Sigma;
        Sigma << 1.0, 0.3, 0.3, 0.5;
        const Eigen::LLT<Eigen::Matrix2d> llt(Sigma);
        const Eigen::Matrix2d L = llt.matrixL();
        const int n = 20000;
        cbi::ScaledSample s;
        s.rows.resize(n, 2);
        s.survivor_mask.assign(n, 1);
        cbi::KeyedRng rng(4, 0, 0, 0);
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d g(rng.normal(), rng.normal());
            s.rows.row(i) = (L * g).transpose();
        }
        const auto rep = cbi::gaussian_test(s, Sigma, SigmaClass::Invertible);
        REQUIRE(rep.passed.has_value());
        CHECK(*rep.passed);
    }
    SUBCASE("empty survivor set is insufficient data") {
        cbi::ScaledSample s;
        s.rows.resize(10, 2);
        s.rows.setZero();
        s.survivor_mask.assign(10, 0);
        const auto rep = cbi::gaussian_test(s, Eigen::Matrix2d::Identity(),
                                            SigmaClass::Invertible);
        CHECK(!rep.passed.has_value());
        CHECK(rep.notes == "insufficient data");
    }
    SUBCASE("zero target: collapsed sample passes, live sample fails") {
        cbi::ScaledSample s;
        s.rows.resize(500, 2);
        s.rows.setZero();
        s.survivor_mask.assign(500, 1);
        const auto rep = cbi::gaussian_test(s, Eigen::Matrix2d::Zero(),
                                            SigmaClass::Zero);
        REQUIRE(rep.passed.has_value());
        CHECK(*rep.passed);
        s.rows.setOnes();
        const auto bad = cbi::gaussian_test(s, Eigen::Matrix2d::Zero(),
                                            SigmaClass::Zero);
        CHECK(!*bad.passed);
    }
}

TEST_CASE("atom_scan") {
    SUBCASE("constant sample fails") {
        std::vector<double> xs(2000, 1.5);
        const auto rep = cbi::atom_scan(xs);
        REQUIRE(rep.passed.has_value());
        CHECK(!*rep.passed);
        CHECK(rep.statistics[0] == doctest::Approx(1.0));
    }
    SUBCASE("uniform sample passes") {
        std::vector<double> xs(20000);
        cbi::KeyedRng rng(17, 0, 0, 0);
        for (double& x : xs) x = 2.0 * rng.uniform();
        const auto rep = cbi::atom_scan(xs);
        REQUIRE(rep.passed.has_value());
        CHECK(*rep.passed);
    }
    SUBCASE("small samples are insufficient") {
        std::vector<double> xs(100, 0.0);
        CHECK(!cbi::atom_scan(xs).passed.has_value());
    }
}

TEST_CASE("convergence_diagnostic") {
    SUBCASE("deterministic-projection model has vanishing increments") {
        CbiParams p = blank(2);
        p.B << 2, 0, 0, 2;
        p.mu[0].add_atom(vec({1, 1}), 1.0);
        p.mu[1].add_atom(vec({1, 1}), 1.0);
        p.nu.add_atom(vec({1, 1}), 1.0);
        const auto eff = cbi::effective(p);
        SimConfig cfg;
        cfg.T = 2.0;
        cfg.dt = 0.01;
        cfg.n_paths = 5;
        cfg.record = cbi::RecordMode::FullGrid;
        const auto paths = cbi::simulate_paths(
            p, eff, InitialLaw::deterministic(vec({2, 1})), cfg);
        const auto pair = pair_of({1.0, 0.0}, {1.0, -1.0});
        const auto rep =
            cbi::convergence_diagnostic(paths, pair, {0.5, 1.0, 1.5, 2.0});
        for (double m : rep.statistics) CHECK(m < 1e-10);
    }
    SUBCASE("supercritical scalar model: increments decay") {
        CbiParams p = blank(1);
        p.B(0, 0) = 1.0;
        p.c(0) = 0.5;
        p.beta(0) = 0.5;
        const auto eff = cbi::effective(p);
        SimConfig cfg;
        cfg.T = 6.0;
        cfg.dt = 0.01;
        cfg.n_paths = 200;
        cfg.seed = 9;
        cfg.record = cbi::RecordMode::FullGrid;
        const auto paths = cbi::simulate_paths(
            p, eff, InitialLaw::deterministic(vec({1})), cfg);
        const auto pair = pair_of({1.0, 0.0}, {1.0});
        const auto rep = cbi::convergence_diagnostic(
            paths, pair, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
        REQUIRE(rep.passed.has_value());
        CHECK(*rep.passed);
    }
}

TEST_CASE("qv_limit_check on the trivial process") {
    CbiParams p = blank(2);
    p.c = vec({1, 1});
    p.B << 1, 1, 1, 1;
    const auto eff = cbi::effective(p);
    const auto spec = cbi::spectral_summary(eff.Btilde);
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 0.01;
    cfg.n_paths = 3;
    cfg.record = cbi::RecordMode::FullGrid;
    cfg.log_jumps = true;
    const auto paths = cbi::simulate_paths(
        p, eff, InitialLaw::deterministic(Eigen::VectorXd::Zero(2)), cfg);
    const auto pair = pair_of({0.0, 0.0}, {1.0, -1.0});
    const auto rep = cbi::qv_limit_check(paths, p, pair, spec, cfg.T,
                                         Eigen::Matrix2d::Zero(), 0.0);
    REQUIRE(rep.passed.has_value());
    CHECK(*rep.passed);
    CHECK(rep.statistics[0] == 0.0);
}

// Batch front-end for the CBI toolkit: loads a JSON model config, runs
// validation / spectral / moment computations, launches simulation campaigns,
// and emits verification reports.
//
// Exit codes: 0 all requested checks pass; 1 a verification check failed;
// 2 config error; 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cbi/analysis.hpp"
#include "cbi/json_io.hpp"
#include "cbi/model.hpp"
#include "cbi/moments.hpp"
#include "cbi/simulate.hpp"
#include "cbi/spectral.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Loaded {
    cbi::Json raw;
    cbi::CbiParams params;
    cbi::EffectiveParams eff;
    cbi::InitialLaw x0;
};

cbi::Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return cbi::Json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

Loaded load_config(const std::string& path) {
    Loaded l;
    l.raw = read_json_file(path);
    try {
        l.params = cbi::params_from_json(l.raw.at("model"));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config error at /model: ") + e.what());
    }
    const auto violations = cbi::validate(l.params);
    if (!violations.empty()) {
        std::string msg = "model parameters are not admissible:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw ConfigError(msg);
    }
    l.eff = cbi::effective(l.params);
    if (l.raw.contains("x0")) {
        try {
            l.x0 = cbi::initial_law_from_json(l.raw.at("x0"), l.params.d);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    } else {
        l.x0 = cbi::InitialLaw::deterministic(Eigen::VectorXd::Zero(l.params.d));
    }
    return l;
}

Eigen::VectorXd vec_from_json(const cbi::Json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i];
    return v;
}

/// Resolves the target eigenvalue from config["eigenvalue"]: either
/// {"re":..,"im":..} (closest-match by value) or {"index": k} into the sorted
/// eigenvalue list of the spectral summary.
cbi::EigenPair resolve_pair(const Loaded& l, const cbi::SpectralSummary& spec) {
    if (!l.raw.contains("eigenvalue"))
        throw ConfigError("config error at /eigenvalue: selector required");
    const cbi::Json& sel = l.raw.at("eigenvalue");
    std::complex<double> target;
    if (sel.contains("index")) {
        const int k = sel.at("index").get<int>();
        if (k < 0 || k >= static_cast<int>(spec.eigenvalues.size()))
            throw ConfigError("config error at /eigenvalue/index: out of range");
        target = spec.eigenvalues[static_cast<std::size_t>(k)];
    } else {
        target = {sel.at("re").get<double>(),
                  sel.value("im", 0.0)};
    }
    return cbi::left_eigenpair(l.eff.Btilde, target);
}

cbi::SimConfig sim_config(const Loaded& l, std::uint64_t seed, int paths,
                          double dt, double T, int threads) {
    cbi::SimConfig cfg;
    const cbi::Json sim = l.raw.value("simulate", cbi::Json::object());
    cfg.T = T > 0 ? T : sim.value("T", 1.0);
    cfg.dt = dt > 0 ? dt : sim.value("dt", 0.0);
    cfg.n_paths = paths > 0 ? paths : sim.value("paths", 1000);
    cfg.seed = seed;
    cfg.threads = threads;
    if (cfg.dt <= 0) {
        const auto spec = cbi::spectral_summary(l.eff.Btilde);
        cfg.dt = cbi::default_dt(spec.s);
    }
    return cfg;
}

void emit(const cbi::Json& report, const std::string& out,
          const std::string& format) {
    if (out.empty()) {
        std::cout << report.dump(2) << "\n";
        return;
    }
    if (format == "csv") {
        // CSV emission is only meaningful for tabular payloads; reports carry
        // a "rows" array of equal-length arrays when CSV is requested.
        std::ostringstream os;
        if (report.contains("rows"))
            for (const auto& row : report.at("rows")) {
                for (std::size_t i = 0; i < row.size(); ++i)
                    os << (i ? "," : "") << row[i].get<double>();
                os << "\n";
            }
        cbi::atomic_write(out, os.str());
    } else {
        cbi::atomic_write(out, report.dump(2) + "\n");
    }
}

cbi::Json report_header(const Loaded& l, std::uint64_t seed) {
    return cbi::Json{{"params_hash", cbi::params_hash(l.params)},
                     {"seed", seed}};
}

cbi::Json test_report_json(const cbi::TestReport& r) {
    return cbi::test_report_to_json(r);
}

int run_verify(const Loaded& l, const std::vector<std::string>& theorems,
               std::uint64_t seed, int paths, double dt, double T, int threads,
               const std::string& out, const std::string& format) {
    const auto spec = cbi::spectral_summary(l.eff.Btilde);
    if (!spec.irreducible || spec.criticality != cbi::Criticality::Supercritical)
        throw ConfigError(
            "verify requires an irreducible supercritical model");
    const auto pair = resolve_pair(l, spec);
    const auto reg = cbi::regime(pair.lambda, spec.s);

    cbi::SimConfig cfg = sim_config(l, seed, paths, dt, T, threads);
    const bool need_paths =
        std::find(theorems.begin(), theorems.end(), "qv") != theorems.end();
    if (need_paths) {
        cfg.record = cbi::RecordMode::FullGrid;
        cfg.log_jumps = true;
    }

    cbi::Json report = report_header(l, seed);
    report["T"] = cfg.T;
    report["dt"] = cfg.dt;
    report["paths"] = cfg.n_paths;
    report["lambda"] = {{"re", pair.lambda.real()}, {"im", pair.lambda.imag()}};
    report["tests"] = cbi::Json::array();

    std::vector<cbi::Path> paths_data;
    cbi::Ensemble ens;
    if (need_paths) {
        paths_data = cbi::simulate_paths(l.params, l.eff, l.x0, cfg);
        ens.terminal.resize(static_cast<int>(paths_data.size()), l.params.d);
        for (std::size_t i = 0; i < paths_data.size(); ++i)
            ens.terminal.row(static_cast<int>(i)) =
                paths_data[i].terminal().transpose();
        ens.cfg = cfg;
        ens.params_hash = cbi::params_hash(l.params);
    } else {
        ens = cbi::simulate_ensemble(l.params, l.eff, l.x0, cfg);
    }

    bool all_passed = true;
    auto push = [&](const cbi::TestReport& tr) {
        report["tests"].push_back(test_report_json(tr));
        if (tr.passed && !*tr.passed) all_passed = false;
    };

    for (const std::string& tag : theorems) {
        if (tag == "3.6") {
            const auto rf = cbi::relative_frequencies(
                ens, spec.utilde ? &*spec.utilde : nullptr);
            cbi::TestReport tr;
            tr.name = "relative_frequencies";
            tr.n = rf.survivors;
            tr.statistics = {rf.max_mean_deviation};
            if (rf.survivors >= 100)
                tr.passed = rf.max_mean_deviation <= 0.02;
            else
                tr.notes = "insufficient survivor count";
            push(tr);
        } else if (tag == "3.5i" || tag == "3.5ii" || tag == "3.5iii" ||
                   tag == "3.1ii" || tag == "3.1iii") {
            cbi::ProjectionScaling sc = cbi::ProjectionScaling::Thm35iii;
            if (tag == "3.5i") sc = cbi::ProjectionScaling::Thm35i;
            if (tag == "3.5ii") sc = cbi::ProjectionScaling::Thm35ii;
            if (tag == "3.1ii") sc = cbi::ProjectionScaling::Thm31ii;
            if (tag == "3.1iii") sc = cbi::ProjectionScaling::Thm31iii;
            if (reg == cbi::Regime::I)
                throw ConfigError("tag " + tag + " needs a regime II/III eigenvalue");
            const auto sigma = cbi::sigma_v(l.params, spec, pair);
            const auto sample =
                cbi::projection_statistic(ens, pair, spec, cfg.T, sc);
            Eigen::Matrix2d target = sigma.Sigma;
            if (tag == "3.5ii")
                target /= spec.s;   // log-scaled statistic carries a 1/s
            auto tr = cbi::gaussian_test(sample, target, sigma.classification);
            tr.name = "projection_" + tag;
            if (tag == "3.5ii" || tag == "3.1ii") {
                // Regime II rates are too slow for a finite-T pass threshold;
                // reported as a diagnostic only.
                tr.notes += (tr.notes.empty() ? "" : "; ");
                tr.notes += "regime II diagnostic, no pass/fail";
                tr.passed.reset();
            }
            push(tr);
        } else if (tag == "qv") {
            if (reg != cbi::Regime::III)
                throw ConfigError("tag qv needs a regime III eigenvalue");
            const auto sigma = cbi::sigma_v(l.params, spec, pair);
            const auto ws = cbi::w_samples(ens, spec, cfg.T);
            double wm = 0.0;
            for (double w : ws) wm += w;
            wm /= static_cast<double>(ws.size());
            auto tr = cbi::qv_limit_check(paths_data, l.params, pair, spec,
                                          cfg.T, sigma.Sigma, wm);
            push(tr);
        } else if (tag == "3.3" || tag == "atoms") {
            const auto ws = cbi::w_samples(ens, spec, cfg.T);
            auto tr = cbi::atom_scan(ws);
            tr.name = "w_atom_scan";
            push(tr);
        } else {
            throw ConfigError("unknown theorem tag: " + tag);
        }
    }
    report["passed"] = all_passed;
    emit(report, out, format);
    return all_passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and analytic verification toolkit for "
                 "supercritical multi-type CBI processes"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::string format = "json";
    std::uint64_t seed = 0;
    int paths = 0;
    double dt = 0.0;
    double t_flag = -1.0;
    int threads = 1;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("config", config_path, "model config JSON")
                ->required();
        sub->add_option("--out", out, "output report path (stdout if absent)");
        sub->add_option("--format", format, "json|csv")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--paths", paths, "number of Monte Carlo paths");
        sub->add_option("--dt", dt, "time step");
        sub->add_option("--t", t_flag, "time horizon");
        sub->add_option("--threads", threads, "worker threads (speed only)");
    };

    auto* sc_validate = app.add_subcommand("validate", "check admissibility");
    add_common(sc_validate);

    auto* sc_spectral = app.add_subcommand("spectral", "eigenstructure of Btilde");
    add_common(sc_spectral);

    auto* sc_moments =
        app.add_subcommand("moments", "first/second moments on a t-grid");
    add_common(sc_moments);

    auto* sc_laplace = app.add_subcommand("laplace", "Laplace transform value");
    std::vector<double> lambda_flag;
    add_common(sc_laplace);
    sc_laplace->add_option("--lambda", lambda_flag, "lambda vector");

    auto* sc_simulate = app.add_subcommand("simulate", "terminal-state ensemble");
    add_common(sc_simulate);

    auto* sc_verify = app.add_subcommand("verify", "limit-theorem checks");
    std::vector<std::string> theorems;
    add_common(sc_verify);
    sc_verify->add_option("--theorems", theorems, "tags: 3.1ii 3.1iii 3.5i 3.5ii 3.5iii 3.6 3.3 qv")
        ->required()
        ->delimiter(',');

    auto* sc_perp = app.add_subcommand("perpetuity", "fixed-point sampler checks");
    add_common(sc_perp);

    auto* sc_decomp =
        app.add_subcommand("decompose", "X_{t+T} vs X_t^(1)+X_t^(2,T) comparison");
    double decomp_T = -1.0;
    add_common(sc_decomp);
    sc_decomp->add_option("--T", decomp_T, "decomposition lag T");

    CLI11_PARSE(app, argc, argv);

    try {
        Loaded l = load_config(config_path);

        if (*sc_validate) {
            cbi::Json report = report_header(l, seed);
            report["admissible"] = true;
            report["violations"] = cbi::Json::array();
            emit(report, out, format);
            return kExitOk;
        }

        const auto spec = cbi::spectral_summary(l.eff.Btilde);

        if (*sc_spectral) {
            cbi::Json report = report_header(l, seed);
            report["spectral"] = cbi::spectral_to_json(spec);
            emit(report, out, format);
            return kExitOk;
        }

        if (*sc_laplace) {
            Eigen::VectorXd lam;
            if (!lambda_flag.empty()) {
                lam = Eigen::Map<Eigen::VectorXd>(lambda_flag.data(),
                                                  static_cast<int>(lambda_flag.size()));
            } else if (l.raw.contains("lambda")) {
                lam = vec_from_json(l.raw.at("lambda"));
            } else {
                throw ConfigError("config error at /lambda: required for laplace");
            }
            if (lam.size() != l.params.d)
                throw ConfigError("config error at /lambda: wrong dimension");
            const double t = t_flag > 0 ? t_flag : l.raw.value("t", 1.0);
            if (!l.x0.is_deterministic())
                throw ConfigError("laplace requires a deterministic x0");
            const double val =
                cbi::laplace(l.params, l.x0.support.front().first, lam, t);
            cbi::Json report = report_header(l, seed);
            report["t"] = t;
            report["value"] = val;
            report["provenance"] = "analytic: RK4 Riccati flow + Simpson";
            emit(report, out, format);
            return kExitOk;
        }

        if (*sc_moments) {
            std::vector<double> grid;
            if (l.raw.contains("t_grid"))
                for (const auto& v : l.raw.at("t_grid")) grid.push_back(v);
            else
                grid = {t_flag > 0 ? t_flag : l.raw.value("t", 1.0)};
            cbi::Json report = report_header(l, seed);
            report["mean"] = cbi::Json::array();
            for (double t : grid) {
                const Eigen::VectorXd m = cbi::mean_at(l.eff, l.x0.mean(), t);
                cbi::Json row = cbi::Json::array();
                row.push_back(t);
                for (int i = 0; i < m.size(); ++i) row.push_back(m(i));
                report["mean"].push_back(row);
            }
            if (l.raw.contains("eigenvalue")) {
                const auto pair = resolve_pair(l, spec);
                report["second_moment"] = cbi::Json::array();
                for (double t : grid)
                    report["second_moment"].push_back(
                        {t, cbi::second_moment(l.params, l.eff, pair, l.x0, t)});
                const auto lim = cbi::m2_limit(l.params, l.eff, spec, pair, l.x0);
                report["M2"] = lim.M2;
                if (spec.criticality == cbi::Criticality::Supercritical &&
                    cbi::regime(pair.lambda, spec.s) != cbi::Regime::I)
                    report["sigma_v"] = cbi::sigma_report_to_json(
                        cbi::sigma_v(l.params, spec, pair));
            }
            report["provenance"] = "analytic: matrix exponential + adaptive Simpson";
            emit(report, out, format);
            return kExitOk;
        }

        if (*sc_simulate) {
            const cbi::SimConfig cfg = sim_config(l, seed, paths, dt, t_flag, threads);
            const auto ens = cbi::simulate_ensemble(l.params, l.eff, l.x0, cfg);
            cbi::Json report = report_header(l, seed);
            report["T"] = cfg.T;
            report["dt"] = cfg.dt;
            report["paths"] = cfg.n_paths;
            report["provenance"] = "MC terminal states";
            cbi::Json rows = cbi::Json::array();
            for (int i = 0; i < ens.terminal.rows(); ++i) {
                cbi::Json row = cbi::Json::array();
                for (int j = 0; j < ens.terminal.cols(); ++j)
                    row.push_back(ens.terminal(i, j));
                rows.push_back(row);
            }
            report["rows"] = rows;
            emit(report, out, format);
            return kExitOk;
        }

        if (*sc_verify)
            return run_verify(l, theorems, seed, paths, dt, t_flag, threads,
                              out, format);

        if (*sc_perp) {
            const cbi::Json pj = l.raw.value("perpetuity", cbi::Json::object());
            if (!pj.contains("A"))
                throw ConfigError("config error at /perpetuity/A: required");
            const cbi::Json& Aj = pj.at("A");
            const int dim = static_cast<int>(Aj.size());
            Eigen::MatrixXd A(dim, dim);
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) A(r, c) = Aj[r][c];
            // C spec: finite law as [{"point": [...], "prob": ...}, ...].
            std::vector<std::pair<Eigen::VectorXd, double>> c_law;
            double c_norm_bound = 0.0;
            for (const auto& a : pj.at("C")) {
                Eigen::VectorXd p = vec_from_json(a.at("point"));
                const double prob = a.at("prob").get<double>();
                c_norm_bound += prob * p.norm();
                c_law.emplace_back(std::move(p), prob);
            }
            auto c_sampler = [&c_law, dim](cbi::KeyedRng& rng) {
                const double u = rng.uniform();
                double acc = 0.0;
                for (const auto& [p, prob] : c_law) {
                    acc += prob;
                    if (u <= acc) return p;
                }
                return c_law.back().first;
            };
            const int n_terms = pj.value("n_terms", 64);
            const int n_samples = paths > 0 ? paths : pj.value("n_samples", 100000);
            const auto ps = cbi::perpetuity_sample(A, c_sampler, c_norm_bound,
                                                   n_terms, n_samples, seed);
            // Invariance under one fixed-point sweep, coordinate-wise.
            cbi::Json report = report_header(l, seed);
            report["n_samples"] = n_samples;
            report["n_terms"] = n_terms;
            bool ok = true;
            report["sweep_ks"] = cbi::Json::array();
            report["atom_scan"] = cbi::Json::array();
            for (int j = 0; j < ps.samples.cols(); ++j) {
                std::vector<double> a(ps.samples.rows()), b(ps.swept.rows());
                for (int i = 0; i < ps.samples.rows(); ++i) {
                    a[static_cast<std::size_t>(i)] = ps.samples(i, j);
                    b[static_cast<std::size_t>(i)] = ps.swept(i, j);
                }
                const auto ks = cbi::ks_two_sample(a, b);
                ok = ok && ks.p_value > 0.01;
                report["sweep_ks"].push_back(
                    {{"statistic", ks.statistic}, {"p_value", ks.p_value}});
                const auto sc = cbi::atom_scan(a);
                ok = ok && sc.passed.value_or(false);
                report["atom_scan"].push_back(test_report_json(sc));
            }
            report["passed"] = ok;
            emit(report, out, format);
            return ok ? kExitOk : kExitVerifyFailed;
        }

        if (*sc_decomp) {
            if (!spec.u)
                throw ConfigError("decompose requires an irreducible model");
            const double t = t_flag > 0 ? t_flag : l.raw.value("t", 1.0);
            const double T = decomp_T > 0 ? decomp_T : l.raw.value("T", 1.0);
            cbi::SimConfig cfg = sim_config(l, seed, paths, dt, -1.0, threads);
            const int n = cfg.n_paths;
            std::vector<double> lhs(static_cast<std::size_t>(n)),
                rhs(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                const auto [a, b] = cbi::simulate_decomposition_pair(
                    l.params, l.eff, l.x0, t, T, cfg,
                    static_cast<std::uint64_t>(i));
                lhs[static_cast<std::size_t>(i)] = spec.u->dot(a);
                rhs[static_cast<std::size_t>(i)] = spec.u->dot(b);
            }
            const auto ks = cbi::ks_two_sample(lhs, rhs);
            cbi::Json report = report_header(l, seed);
            report["t"] = t;
            report["T"] = T;
            report["paths"] = n;
            report["ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}};
            const bool ok = ks.p_value > 0.01;
            report["passed"] = ok;
            emit(report, out, format);
            return ok ? kExitOk : kExitVerifyFailed;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

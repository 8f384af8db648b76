#include "cbi/simulate.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace cbi {

namespace {

// Substream codes within one (path, step) cell.
constexpr std::uint64_t kSubDiffusion = 0;
constexpr std::uint64_t kSubBranchBase = 1;   // + type index
std::uint64_t sub_immigration(int d) { return kSubBranchBase + d; }
std::uint64_t sub_initial(int d) { return kSubBranchBase + d + 1; }

struct MeasureSampler {
    std::vector<double> cum;   // cumulative masses
    double total = 0.0;
    const DiscreteMeasure* m = nullptr;

    explicit MeasureSampler(const DiscreteMeasure& meas) : m(&meas) {
        for (const Atom& a : meas.atoms()) {
            total += a.mass;
            cum.push_back(total);
        }
    }

    const Eigen::VectorXd& draw(KeyedRng& rng) const {
        const double u = rng.uniform() * total;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const std::size_t k =
            std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
        return m->atoms()[k].point;
    }
};

// Precomputed step operators shared by all paths of one campaign.
struct StepPlan {
    Eigen::MatrixXd expA;          // e^{A dt}, A = net linear drift matrix
    Eigen::VectorXd drift_const;   // ∫_0^dt e^{A u} du * beta
    std::vector<MeasureSampler> mu_samplers;
    MeasureSampler nu_sampler;
    int n_steps = 0;
    int d = 0;

    StepPlan(const CbiParams& p, const EffectiveParams& eff,
             const SimConfig& cfg)
        : nu_sampler(p.nu) {
        d = p.d;
        n_steps = static_cast<int>(std::llround(cfg.T / cfg.dt));
        if (n_steps < 1) n_steps = 1;

        // Net drift beta + A X with A = B - diag(∫ (z_l ∧ 1) mu_l(dz)):
        // the compensators of the branching jump integrals folded into B~.
        Eigen::MatrixXd A = p.B;
        for (int l = 0; l < d; ++l) {
            double comp = 0.0;
            for (const Atom& a : p.mu[l].atoms())
                comp += a.mass * std::min(1.0, a.point(l));
            A(l, l) -= comp;
        }
        Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(d + 1, d + 1);
        aug.topLeftCorner(d, d) = A;
        aug.topRightCorner(d, 1) = p.beta;
        const Eigen::MatrixXd E = (cfg.dt * aug).exp();
        expA = E.topLeftCorner(d, d);
        drift_const = E.topRightCorner(d, 1);
        for (int l = 0; l < d; ++l) mu_samplers.emplace_back(p.mu[l]);
    }
};

Path run_path(const CbiParams& p, const StepPlan& plan,
              const Eigen::VectorXd& x0, const SimConfig& cfg,
              std::uint64_t path_index) {
    const int d = plan.d;
    const double dt = cfg.T / plan.n_steps;
    Path path;
    auto record = [&](int k, const Eigen::VectorXd& x) {
        bool keep = k == 0 || k == plan.n_steps;
        if (cfg.record == RecordMode::FullGrid)
            keep = true;
        else if (cfg.record == RecordMode::Thinned)
            keep = keep || k % std::max(1, cfg.stride) == 0;
        if (keep) {
            path.times.push_back(k * dt);
            path.states.push_back(x);
        }
    };

    Eigen::VectorXd x = x0;
    record(0, x);
    for (int k = 0; k < plan.n_steps; ++k) {
        const double t_left = k * dt;
        Eigen::VectorXd next = plan.expA * x + plan.drift_const;

        // diffusion, rates frozen at the left endpoint
        {
            KeyedRng rng(cfg.seed, path_index, static_cast<std::uint64_t>(k),
                         kSubDiffusion);
            for (int l = 0; l < d; ++l) {
                if (p.c(l) <= 0.0) continue;
                const double amp =
                    std::sqrt(2.0 * p.c(l) * std::max(x(l), 0.0) * dt);
                next(l) += amp * rng.normal();
            }
        }
        // branching jumps
        for (int l = 0; l < d; ++l) {
            const double rate = std::max(x(l), 0.0) * plan.mu_samplers[l].total;
            if (rate <= 0.0) continue;
            KeyedRng rng(cfg.seed, path_index, static_cast<std::uint64_t>(k),
                         kSubBranchBase + l);
            const unsigned count = rng.poisson(rate * dt);
            for (unsigned j = 0; j < count; ++j) {
                const Eigen::VectorXd& z = plan.mu_samplers[l].draw(rng);
                next += z;
                if (cfg.log_jumps)
                    path.jump_log.push_back(JumpEvent{t_left, l, z});
            }
        }
        // immigration jumps
        if (plan.nu_sampler.total > 0.0) {
            KeyedRng rng(cfg.seed, path_index, static_cast<std::uint64_t>(k),
                         sub_immigration(d));
            const unsigned count = rng.poisson(plan.nu_sampler.total * dt);
            for (unsigned j = 0; j < count; ++j) {
                const Eigen::VectorXd& r = plan.nu_sampler.draw(rng);
                next += r;
                if (cfg.log_jumps)
                    path.jump_log.push_back(JumpEvent{t_left, -1, r});
            }
        }
        next = next.cwiseMax(0.0);
        if (!next.allFinite())
            throw std::runtime_error(
                "simulate_path: non-finite state, decrease dt");
        x = next;
        record(k + 1, x);
    }
    return path;
}

Eigen::VectorXd sample_initial(const InitialLaw& law, const SimConfig& cfg,
                               std::uint64_t path_index, int d) {
    if (law.is_deterministic()) return law.support.front().first;
    KeyedRng rng(cfg.seed, path_index, 0, sub_initial(d));
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& [x, prob] : law.support) {
        acc += prob;
        if (u <= acc) return x;
    }
    return law.support.back().first;
}

std::uint64_t fnv_hash_params(const CbiParams& p) {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    feed(p.d);
    for (int i = 0; i < p.d; ++i) feed(p.c(i));
    for (int i = 0; i < p.d; ++i) feed(p.beta(i));
    for (int i = 0; i < p.d; ++i)
        for (int j = 0; j < p.d; ++j) feed(p.B(i, j));
    auto feed_measure = [&](const DiscreteMeasure& m) {
        for (const Atom& a : m.atoms()) {
            for (int i = 0; i < a.point.size(); ++i) feed(a.point(i));
            feed(a.mass);
        }
    };
    feed_measure(p.nu);
    for (const auto& m : p.mu) feed_measure(m);
    return h;
}

template <typename Fn>
void parallel_over_paths(int n_paths, int threads, Fn&& body) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < n_paths; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> counter{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            int i;
            while ((i = counter.fetch_add(1)) < n_paths) body(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

double default_dt(double s_of_Btilde) {
    return std::min(0.01, 0.01 / std::max(1.0, s_of_Btilde));
}

Path simulate_path(const CbiParams& params, const EffectiveParams& eff,
                   const Eigen::VectorXd& x0, const SimConfig& cfg,
                   std::uint64_t path_index) {
    StepPlan plan(params, eff, cfg);
    return run_path(params, plan, x0, cfg, path_index);
}

Ensemble simulate_ensemble(const CbiParams& params, const EffectiveParams& eff,
                           const InitialLaw& x0, const SimConfig& cfg) {
    StepPlan plan(params, eff, cfg);
    Ensemble ens;
    ens.cfg = cfg;
    ens.params_hash = fnv_hash_params(params);
    ens.terminal.resize(cfg.n_paths, params.d);
    SimConfig path_cfg = cfg;
    path_cfg.record = RecordMode::TerminalOnly;
    parallel_over_paths(cfg.n_paths, cfg.threads, [&](int i) {
        const Eigen::VectorXd init =
            sample_initial(x0, cfg, static_cast<std::uint64_t>(i), params.d);
        const Path p = run_path(params, plan, init, path_cfg,
                                static_cast<std::uint64_t>(i));
        ens.terminal.row(i) = p.terminal().transpose();
    });
    return ens;
}

std::vector<Path> simulate_paths(const CbiParams& params,
                                 const EffectiveParams& eff,
                                 const InitialLaw& x0, const SimConfig& cfg) {
    StepPlan plan(params, eff, cfg);
    std::vector<Path> out(cfg.n_paths);
    parallel_over_paths(cfg.n_paths, cfg.threads, [&](int i) {
        const Eigen::VectorXd init =
            sample_initial(x0, cfg, static_cast<std::uint64_t>(i), params.d);
        out[i] = run_path(params, plan, init, cfg, static_cast<std::uint64_t>(i));
    });
    return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> simulate_decomposition_pair(
    const CbiParams& params, const EffectiveParams& eff, const InitialLaw& x0,
    double t, double T, const SimConfig& cfg, std::uint64_t pair_index) {
    CbiParams cb = params;   // immigration stripped: a pure CB process
    cb.beta.setZero();
    cb.nu = DiscreteMeasure(params.d);
    const EffectiveParams cb_eff = effective(cb);

    const std::uint64_t base = 4 * pair_index;
    SimConfig c = cfg;

    // sample A: one run over [0, t+T]
    c.T = std::max(t + T, cfg.dt);
    Eigen::VectorXd a;
    if (t + T <= 0.0) {
        a = sample_initial(x0, cfg, base, params.d);
    } else {
        a = simulate_path(params, eff,
                          sample_initial(x0, cfg, base, params.d), c, base)
                .terminal();
    }

    // sample B: CBI from zero over [0, t] ...
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(params.d);
    if (t > 0.0) {
        c.T = t;
        b1 = simulate_path(params, eff, Eigen::VectorXd::Zero(params.d), c,
                           base + 1)
                 .terminal();
    }
    // ... plus a CB run over [0, t] from an independent copy of X_T
    Eigen::VectorXd xT = sample_initial(x0, cfg, base + 2, params.d);
    if (T > 0.0) {
        c.T = T;
        xT = simulate_path(params, eff, xT, c, base + 2).terminal();
    }
    Eigen::VectorXd b2 = xT;
    if (t > 0.0) {
        c.T = t;
        b2 = simulate_path(cb, cb_eff, xT, c, base + 3).terminal();
    }
    return {a, b1 + b2};
}

PerpetuitySample perpetuity_sample(
    const Eigen::MatrixXd& A,
    const std::function<Eigen::VectorXd(KeyedRng&)>& c_sampler,
    double c_mean_norm_bound, int n_terms, int n_samples, std::uint64_t seed) {
    const int dim = static_cast<int>(A.rows());
    {
        Eigen::EigenSolver<Eigen::MatrixXd> es(A);
        double radius = 0.0;
        for (int i = 0; i < dim; ++i)
            radius = std::max(radius, std::abs(es.eigenvalues()(i)));
        if (radius >= 1.0)
            throw std::invalid_argument("perpetuity_sample: spectral radius >= 1");
        if (std::abs(A.determinant()) == 0.0)
            throw std::invalid_argument("perpetuity_sample: singular A");
    }
    // Truncation check via the Gelfand bound: ||A^n|| E||C|| must be tiny.
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(dim, dim);
    for (int k = 0; k < n_terms; ++k) {
        power = A * power;
        if (power.norm() * c_mean_norm_bound < 1e-15) break;
    }
    if (power.norm() * c_mean_norm_bound >= 1e-12)
        throw std::invalid_argument(
            "perpetuity_sample: n_terms too small for the requested accuracy");

    PerpetuitySample out;
    out.samples.resize(n_samples, dim);
    out.swept.resize(n_samples, dim);
    for (int i = 0; i < n_samples; ++i) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
        Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(dim, dim);
        KeyedRng rng(seed, static_cast<std::uint64_t>(i), 0, 0);
        for (int k = 0; k < n_terms; ++k) {
            acc += Ak * c_sampler(rng);
            Ak = A * Ak;
        }
        out.samples.row(i) = acc.transpose();
        KeyedRng sweep_rng(seed, static_cast<std::uint64_t>(i), 1, 0);
        out.swept.row(i) = (A * acc + c_sampler(sweep_rng)).transpose();
    }
    return out;
}

}  // namespace cbi

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cbi/model.hpp"
#include "cbi/rng.hpp"

namespace cbi {

enum class RecordMode { TerminalOnly, FullGrid, Thinned };

struct SimConfig {
    double T = 1.0;
    double dt = 0.01;
    int n_paths = 1;
    std::uint64_t seed = 0;
    RecordMode record = RecordMode::TerminalOnly;
    int stride = 1;          // used by RecordMode::Thinned
    bool log_jumps = false;
    int threads = 1;         // affects speed only, never results
};

struct JumpEvent {
    double time;
    int type;                // 0..d-1 branching type, -1 immigration
    Eigen::VectorXd vec;
};

struct Path {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<JumpEvent> jump_log;

    const Eigen::VectorXd& terminal() const { return states.back(); }
};

struct Ensemble {
    Eigen::MatrixXd terminal;        // n_paths x d
    SimConfig cfg;
    std::uint64_t params_hash = 0;
};

/// Default step keeping per-step jump counts small and the exponential
/// growth resolved.
double default_dt(double s_of_Btilde);

/// One path of the jump-diffusion Euler scheme for the CBI SDE. The linear
/// drift part (compensators folded in) is integrated exactly over each step;
/// diffusion and jump rates are frozen at the left endpoint; components are
/// clamped at 0 after the full step. The path is a pure function of
/// (cfg.seed, path_index).
Path simulate_path(const CbiParams& params, const EffectiveParams& eff,
                   const Eigen::VectorXd& x0, const SimConfig& cfg,
                   std::uint64_t path_index);

/// n_paths independent paths; terminal states collected in path order.
/// Output is identical for any cfg.threads.
Ensemble simulate_ensemble(const CbiParams& params, const EffectiveParams& eff,
                           const InitialLaw& x0, const SimConfig& cfg);

/// As simulate_ensemble but retaining whole paths (for diagnostics that need
/// grids or jump logs).
std::vector<Path> simulate_paths(const CbiParams& params,
                                 const EffectiveParams& eff,
                                 const InitialLaw& x0, const SimConfig& cfg);

/// One draw of (X_{t+T}, X_t^(1) + X_t^(2,T)): the left sample from a single
/// run over [0, t+T]; the right sample as an independent CBI run from 0 over
/// [0,t] plus an independent CB run (immigration stripped) started from an
/// independently simulated copy of X_T.
std::pair<Eigen::VectorXd, Eigen::VectorXd> simulate_decomposition_pair(
    const CbiParams& params, const EffectiveParams& eff, const InitialLaw& x0,
    double t, double T, const SimConfig& cfg, std::uint64_t pair_index);

struct PerpetuitySample {
    Eigen::MatrixXd samples;   // n_samples x dim, truncated series draws
    Eigen::MatrixXd swept;     // one extra X <- A X + C sweep of the same rows
};

/// Truncated-series sampler for the fixed point equation X =d= A X + C with
/// deterministic A, r(A) < 1, det(A) != 0. The summand sampler draws one
/// independent copy of C. Throws if the spectral-radius, determinant, or
/// truncation-depth preconditions fail.
PerpetuitySample perpetuity_sample(
    const Eigen::MatrixXd& A,
    const std::function<Eigen::VectorXd(KeyedRng&)>& c_sampler,
    double c_mean_norm_bound, int n_terms, int n_samples, std::uint64_t seed);

}  // namespace cbi

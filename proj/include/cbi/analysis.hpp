#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cbi/moments.hpp"
#include "cbi/simulate.hpp"
#include "cbi/stats.hpp"

namespace cbi {

/// Which limit-theorem scaling produced a ScaledSample.
enum class ProjectionScaling {
    Thm31ii,    // t^{-1/2} e^{-st/2} (Re, Im)
    Thm31iii,   // e^{-st/2} (Re, Im)
    Thm35i,     // <u,X>^{-Re(l)/s} rotation statistic, indicator X != 0
    Thm35ii,    // (<u,X> log <u,X>)^{-1/2}, indicator <u,X> > 1
    Thm35iii,   // <u,X>^{-1/2}, indicator X != 0
};

struct ScaledSample {
    Eigen::MatrixX2d rows;
    std::vector<char> survivor_mask;   // proxy for {w_{u,X0} > 0}
    ProjectionScaling scaling_tag = ProjectionScaling::Thm31iii;
};

struct TestReport {
    std::string name;
    std::optional<bool> passed;            // absent: insufficient data
    std::vector<double> statistics;
    std::vector<double> p_values;
    std::size_t n = 0;
    std::string notes;
};

struct RelFreqReport {
    Eigen::MatrixXd rows;              // survivors only, each row sums to 1
    Eigen::VectorXd survivor_mean;
    double max_mean_deviation = 0.0;   // vs utilde when provided
    std::size_t survivors = 0;
};

/// Per-path e^{-sT} <u, X_T>.
std::vector<double> w_samples(const Ensemble& ens, const SpectralSummary& spec,
                              double T);

/// Scaled projection rows per the chosen theorem display. The survivor mask
/// is the event proxy {<u, X_T> > survivor_threshold}.
ScaledSample projection_statistic(const Ensemble& ens, const EigenPair& pair,
                                  const SpectralSummary& spec, double T,
                                  ProjectionScaling scaling,
                                  double survivor_threshold = 1.0);

RelFreqReport relative_frequencies(const Ensemble& ens,
                                   const Eigen::VectorXd* utilde = nullptr);

/// Tests masked rows against the mixed-normal target N2(0, Sigma):
/// invertible Sigma -> whiten and KS per coordinate plus a covariance check;
/// singular nonzero -> KS along the range direction, collapse along the null
/// direction; zero -> collapse of both coordinates.
TestReport gaussian_test(const ScaledSample& sample,
                         const Eigen::Matrix2d& Sigma, SigmaClass cls,
                         double alpha = 0.01);

/// Empirical atomlessness scan: maximal exact-duplicate frequency and
/// maximal mass in any bin of width range/sqrt(N).
TestReport atom_scan(const std::vector<double>& samples,
                     double max_duplicate_fraction_times_n = 3.0,
                     double max_bin_mass_factor = 10.0);

/// Cauchy-increment decay of e^{-lambda T_k} <v, X_{T_k}> along checkpoints
/// (regime I diagnostic). The report's statistics are the mean absolute
/// increments per checkpoint gap.
TestReport convergence_diagnostic(const std::vector<Path>& paths,
                                  const EigenPair& pair,
                                  const std::vector<double>& checkpoints);

/// Empirical Crimaldi-Pratelli diagnostic (regime III): the scaled quadratic
/// variation of the projection martingale against w_mean * Sigma_v.
TestReport qv_limit_check(const std::vector<Path>& paths,
                          const CbiParams& params, const EigenPair& pair,
                          const SpectralSummary& spec, double T,
                          const Eigen::Matrix2d& Sigma, double w_mean_estimate,
                          double rel_tol = 0.15);

}  // namespace cbi

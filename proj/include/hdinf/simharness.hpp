#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hdinf/datagen.hpp"
#include "hdinf/inference.hpp"
#include "hdinf/linalg.hpp"

namespace hdinf {

// Pass bands used both for the acceptance suite and for the regime flag in
// reports: chi-square/binomial sampling error at R ~ 500 plus the bounds'
// unquantified o(1) terms.
constexpr double kVarianceRatioLo = 0.8;
constexpr double kVarianceRatioHi = 1.3;
constexpr double kCoverageLo = 0.90;
constexpr double kCoverageHi = 0.98;
constexpr double kSqrtNBiasMax = 0.15;

enum class ModelKind { linear_random_design, linear_fixed_design, ggm };
enum class ExperimentKind {
    linear_inference,
    bias_rate,
    oracle_inequality,
    local_perturbation,
    ggm
};
enum class TargetKind { coordinate, functional, precision_entry };

struct TargetSpec {
    TargetKind kind = TargetKind::coordinate;
    std::size_t j = 0; // coordinate index / precision column
    std::size_t i = 0; // precision row
    DenseVector xi;    // functional contrast
};

struct PerturbationSpec {
    enum class Kind { worst, coordinate, custom };
    Kind kind = Kind::worst;
    std::size_t j = 0; // coordinate kind
    DenseVector h;     // custom kind, used as given
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::linear_inference;
    ModelKind model = ModelKind::linear_random_design;
    std::size_t n = 100;
    std::size_t p = 50;
    std::size_t s = 2;
    std::size_t replications = 10;
    double signal = 1.0;
    double sigma_noise = 1.0;
    CovarianceSpec covariance; // dim is taken from p
    double lambda_constant = 1.4142135623730951;
    double lambda_j_constant = 1.4142135623730951;
    TargetSpec target;
    std::optional<PerturbationSpec> perturbation;
    double level = 0.95;
    std::uint64_t master_seed = 1;
    unsigned parallel_workers = 1;
    VarianceSource variance_source = VarianceSource::plug_in_theta_diag;
    std::size_t d_n = 0;                // 0 = unconstrained (d_n = p)
    std::vector<std::size_t> n_grid;    // bias_rate
    std::vector<std::size_t> s_grid;    // oracle_inequality
};

// Throws on inconsistent configurations (target/model mismatch, missing grid,
// out-of-range indices, ...).
void validate_config(const ExperimentConfig& cfg);

struct ReplicateRecord {
    std::size_t index = 0;
    bool ok = false;
    std::string error;
    double estimate = 0.0;          // de-biased estimate of the target
    double lasso_estimate = 0.0;    // penalized (biased) estimate of the same target
    double variance_estimate = 0.0;
    bool covered = false;
    double z = 0.0;                 // (estimate - truth)/std_error
    double l1_error = 0.0;          // |beta_hat - beta|_1, or |Theta_j - Theta0_j|_1
    std::size_t support_size = 0;   // |beta_hat|_0, or |gamma_j|_0 for ggm
    std::size_t nodewise_sparsity = 0;
    double tau_sq_error = 0.0;      // |tau_j^2 - 1/Theta0_jj| for the target column
    double sqrt_n_remainder = 0.0;  // sqrt(n) |b - beta - Theta0 X^T eps/n|_inf
};

struct Aggregates {
    std::size_t replicates_ok = 0;
    double truth = 0.0;
    double mean_estimate = 0.0;
    double mean_bias = 0.0;
    double sqrt_n_mean_bias = 0.0;
    double bias_mc_se = 0.0;
    double sqrt_n_bias_mc_se = 0.0;
    double n_times_variance = 0.0;
    double bound_per_sample = 0.0;
    double variance_ratio = 0.0;
    double coverage = 0.0;
    double coverage_mc_se = 0.0;
    double mean_z = 0.0;
    double var_z = 0.0;
    double ks = 0.0;
    double skewness = 0.0;
    double kurtosis_excess = 0.0;
    double mean_l1_error = 0.0;
    double mean_l1_error_sq = 0.0;
    double mean_lasso_estimate = 0.0;
    double sqrt_n_lasso_bias = 0.0;
    double mean_support_size = 0.0;
    double mean_nodewise_sparsity = 0.0;
    double mean_tau_sq_error = 0.0;
    double median_sqrt_n_remainder = 0.0;
    double zero_fit_fraction = 0.0;
    double lambda = 0.0;
    double lambda_j = 0.0;
    std::optional<bool> within_variance_band;
    std::optional<bool> within_coverage_band;
    std::optional<bool> within_bias_band;
    std::optional<bool> regime_violation;
    std::optional<double> perturbation_quadratic_form;
    std::optional<bool> perturbation_admissible;
};

struct GridPointReport {
    std::string key;        // "n" or "s"
    std::size_t value = 0;
    std::vector<ReplicateRecord> records;
    Aggregates aggregates;
    std::size_t failures = 0;
};

struct BiasTrendPoint {
    std::size_t n = 0;
    double sqrt_n_abs_bias = 0.0;
    double mc_se = 0.0; // standard error of sqrt(n) mean bias
    double sqrt_n_abs_bias_lasso = 0.0;
    double lasso_to_debias_ratio = 0.0;
};

struct BiasTrend {
    std::vector<BiasTrendPoint> points;
    bool nonincreasing_within_2se = false;
};

struct OracleTrendPoint {
    std::size_t s = 0;
    double lambda = 0.0;
    double s_lambda = 0.0;
    double mean_l1 = 0.0;
    double ratio = 0.0;    // mean_l1 / (s lambda)
    double k2_ratio = 0.0; // sqrt(mean_l1_sq) / (s lambda)
    double zero_fit_fraction = 0.0;
};

struct OracleTrend {
    std::vector<OracleTrendPoint> points;
    double ratio_max_over_min = 0.0;
    double k2_ratio_max_over_min = 0.0;
    double slope_l1_vs_s_lambda = 0.0; // least-squares through the origin
};

struct MonteCarloReport {
    ExperimentConfig config;
    std::vector<ReplicateRecord> records; // single-point experiments
    Aggregates aggregates;
    std::size_t failures = 0;
    std::vector<GridPointReport> grid;    // grid experiments
    std::optional<BiasTrend> bias_trend;
    std::optional<OracleTrend> oracle_trend;
    double wall_ms = 0.0;  // excluded from canonical comparisons
    unsigned workers = 1;  // likewise
};

// Replicated data -> fit -> de-bias -> CI pipeline under the linear model;
// aggregates compare n x empirical variance against the efficiency bound.
MonteCarloReport run_linear_inference_experiment(const ExperimentConfig& cfg);

// sqrt(n) |mean bias| of the de-biased and the plain penalized estimator over
// a grid of n.
MonteCarloReport run_bias_rate_experiment(const ExperimentConfig& cfg);

// Mean l1 error scaling in s lambda over a grid of s.
MonteCarloReport run_oracle_inequality_experiment(const ExperimentConfig& cfg);

// Data generated under beta0 + h/sqrt(n); z statistics against N(0,1).
MonteCarloReport run_local_perturbation_experiment(const ExperimentConfig& cfg);

// Precision entry inference via the de-sparsified nodewise Lasso.
MonteCarloReport run_ggm_experiment(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment.
MonteCarloReport run_experiment(const ExperimentConfig& cfg);

struct NormalityDiagnostics {
    double ks = 0.0;
    double skewness = 0.0;
    double kurtosis_excess = 0.0;
};

// Two-sided KS statistic at the order statistics against the standard normal,
// plus sample skewness and excess kurtosis. Requires at least 8 samples.
NormalityDiagnostics normality_diagnostics(const std::vector<double>& samples);

std::string experiment_kind_name(ExperimentKind k);
ExperimentKind experiment_kind_from_name(const std::string& name);
std::string model_kind_name(ModelKind m);
ModelKind model_kind_from_name(const std::string& name);

} // namespace hdinf

#include "hdinf/simharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>

#include "hdinf/bounds.hpp"
#include "hdinf/gauss.hpp"
#include "hdinf/lasso.hpp"
#include "hdinf/nodewise.hpp"
#include "hdinf/parallel.hpp"
#include "hdinf/rng.hpp"

namespace hdinf {

namespace {

constexpr std::uint64_t kStreamReplicates = 0xE0;
constexpr std::uint64_t kStreamFixedDesign = 0xFD;
constexpr std::uint64_t kStreamGrid = 0x62;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return kNaN;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// The data-generating context shared by all replicates of one experiment point.
struct LinearContext {
    const ExperimentConfig* cfg = nullptr;
    std::size_t n = 0;
    DenseMatrix sigma0, theta0;
    DenseVector beta0;    // unperturbed truth
    DenseVector beta_gen; // data-generating parameter (perturbed for local runs)
    DenseVector xi;
    std::size_t target_col = 0;
    double lambda = 0.0, lambda_j = 0.0;
    double truth = 0.0;
    double bound_per_sample = 0.0;
    double tau_sq_oracle = 0.0; // 1/Theta0_jj at the target column
    std::uint64_t replicate_root = 0;
    std::optional<double> perturbation_quadratic_form;
    std::optional<bool> perturbation_admissible;
    // fixed design only
    std::optional<DenseMatrix> x_fixed;
    std::optional<DenseMatrix> sigma_hat_fixed;
    std::shared_ptr<const NodewiseFit> nodewise_fixed;
};

DenseVector target_contrast(const ExperimentConfig& cfg) {
    if (cfg.target.kind == TargetKind::functional) return cfg.target.xi;
    return DenseVector::unit(cfg.p, cfg.target.j);
}

std::size_t contrast_main_column(const DenseVector& xi) {
    std::size_t best = 0;
    double mag = -1.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        if (std::abs(xi[k]) > mag) {
            mag = std::abs(xi[k]);
            best = k;
        }
    }
    return best;
}

// Zeroes the smallest-|h| coordinates outside supp(beta0) until the union
// support fits within d_n, then rescales so h^T Sigma0 h = 1 again.
DenseVector truncate_direction(DenseVector h, const DenseVector& beta0, std::size_t d_n,
                               const DenseMatrix& sigma0) {
    if (d_n == 0) return h;
    std::vector<std::size_t> order(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(h[a]) > std::abs(h[b]); });
    std::size_t budget = d_n > norm0(beta0) ? d_n - norm0(beta0) : 0;
    for (std::size_t k : order) {
        if (h[k] == 0.0) continue;
        if (beta0[k] != 0.0) continue; // already in the support, free
        if (budget > 0) {
            --budget;
        } else {
            h[k] = 0.0;
        }
    }
    const double q = quadratic_form(h, sigma0, h);
    if (q > 0.0) {
        const double scale = 1.0 / std::sqrt(q);
        for (double& v : h.data) v *= scale;
    }
    return h;
}

DenseVector build_perturbation(const ExperimentConfig& cfg, const DenseMatrix& sigma0,
                               const DenseMatrix& theta0, const DenseVector& beta0,
                               const DenseVector& xi) {
    const PerturbationSpec& ps = *cfg.perturbation;
    switch (ps.kind) {
        case PerturbationSpec::Kind::worst: {
            DenseVector h = normalized_direction(theta0, xi);
            return truncate_direction(std::move(h), beta0, cfg.d_n, sigma0);
        }
        case PerturbationSpec::Kind::coordinate: {
            DenseVector h = DenseVector::unit(cfg.p, ps.j);
            const double sjj = sigma0(ps.j, ps.j);
            h[ps.j] = 1.0 / std::sqrt(sjj);
            return h;
        }
        case PerturbationSpec::Kind::custom:
            if (ps.h.size() != cfg.p)
                throw InvalidArgument("perturbation: custom h has wrong length");
            return ps.h;
    }
    throw InvalidArgument("perturbation: unknown kind");
}

LinearContext make_linear_context(const ExperimentConfig& cfg, std::size_t n,
                                  std::uint64_t point_seed) {
    LinearContext ctx;
    ctx.cfg = &cfg;
    ctx.n = n;
    CovarianceSpec cov = cfg.covariance;
    cov.dim = cfg.p;
    std::tie(ctx.sigma0, ctx.theta0) = build_covariance(cov);
    ctx.beta0 = make_sparse_beta(cfg.p, cfg.s, cfg.signal, derive_seed(cfg.master_seed, kStreamBeta));
    ctx.xi = target_contrast(cfg);
    ctx.target_col = cfg.target.kind == TargetKind::coordinate ? cfg.target.j
                                                               : contrast_main_column(ctx.xi);
    ctx.lambda = default_lambda(n, cfg.p, cfg.lambda_constant);
    ctx.lambda_j = default_lambda(n, cfg.p, cfg.lambda_j_constant);
    ctx.tau_sq_oracle = 1.0 / ctx.theta0(ctx.target_col, ctx.target_col);
    ctx.replicate_root = derive_seed(point_seed, kStreamReplicates);

    ctx.beta_gen = ctx.beta0;
    if (cfg.experiment == ExperimentKind::local_perturbation && cfg.perturbation) {
        const DenseVector h = build_perturbation(cfg, ctx.sigma0, ctx.theta0, ctx.beta0, ctx.xi);
        ctx.beta_gen = add_scaled(ctx.beta0, 1.0 / std::sqrt(static_cast<double>(n)), h);
        ctx.perturbation_quadratic_form = quadratic_form(h, ctx.sigma0, h);
        ModelSet set;
        set.d_n = cfg.d_n > 0 ? cfg.d_n : cfg.p;
        const MembershipReport m = model_membership(ctx.beta_gen, set);
        ctx.perturbation_admissible = m.member && norm2(h) <= set.neighborhood_c + 1e-12;
    }
    ctx.truth = dot(ctx.xi, ctx.beta_gen);

    if (cfg.model == ModelKind::linear_fixed_design) {
        ctx.x_fixed = sample_mvn(n, ctx.sigma0, derive_seed(cfg.master_seed, kStreamFixedDesign));
        ctx.sigma_hat_fixed = gram(*ctx.x_fixed);
        LassoConfig lcfg;
        lcfg.lambda_constant = cfg.lambda_j_constant;
        ctx.nodewise_fixed = std::make_shared<const NodewiseFit>(
            fit_nodewise_gram(*ctx.sigma_hat_fixed, ctx.lambda_j, lcfg));
        // Theorem LR2's per-sample bound is Theta_jj of the frozen design.
        ctx.bound_per_sample = cfg.sigma_noise * cfg.sigma_noise /
                               ctx.nodewise_fixed->columns[ctx.target_col].tau_sq;
    } else {
        ctx.bound_per_sample =
            cr_bound_linear(ctx.theta0, ctx.xi, n, cfg.sigma_noise).bound_per_sample;
    }
    return ctx;
}

ReplicateRecord run_linear_replicate(const LinearContext& ctx, std::size_t r,
                                     bool fit_nodewise_per_replicate) {
    const ExperimentConfig& cfg = *ctx.cfg;
    ReplicateRecord rec;
    rec.index = r;
    try {
        const std::uint64_t rep_seed = derive_seed(ctx.replicate_root, r);
        const DenseMatrix* x = nullptr;
        DenseMatrix x_local;
        if (ctx.x_fixed) {
            x = &*ctx.x_fixed;
        } else {
            x_local = sample_mvn(ctx.n, ctx.sigma0, derive_seed(rep_seed, kStreamDesign));
            x = &x_local;
        }
        const DenseVector y =
            simulate_linear(*x, ctx.beta_gen, cfg.sigma_noise, derive_seed(rep_seed, kStreamNoise));

        const DenseMatrix* sigma_hat = nullptr;
        DenseMatrix sigma_local;
        if (ctx.sigma_hat_fixed) {
            sigma_hat = &*ctx.sigma_hat_fixed;
        } else {
            sigma_local = gram(*x);
            sigma_hat = &sigma_local;
        }

        const double inv_n = 1.0 / static_cast<double>(ctx.n);
        DenseVector xty = matvec_t(*x, y);
        for (double& v : xty.data) v *= inv_n;
        const double yty = dot(y, y) * inv_n;

        LassoConfig lcfg;
        lcfg.lambda_constant = cfg.lambda_constant;
        const LassoFit lasso = fit_lasso_gram(*sigma_hat, xty, yty, ctx.lambda, lcfg);
        rec.lasso_estimate = dot(ctx.xi, lasso.beta_hat);
        rec.l1_error = norm1(add_scaled(lasso.beta_hat, -1.0, ctx.beta_gen));
        rec.support_size = norm0(lasso.beta_hat);

        if (fit_nodewise_per_replicate || ctx.nodewise_fixed) {
            std::shared_ptr<const NodewiseFit> nw = ctx.nodewise_fixed;
            if (!nw) {
                LassoConfig ncfg;
                ncfg.lambda_constant = cfg.lambda_j_constant;
                nw = std::make_shared<const NodewiseFit>(
                    fit_nodewise_gram(*sigma_hat, ctx.lambda_j, ncfg));
            }
            const DenseVector b = desparsified_lasso(lasso.beta_hat, nw->theta_hat, *x, y);
            rec.estimate = dot(ctx.xi, b);
            const DenseMatrix& theta_for_var =
                cfg.variance_source == VarianceSource::oracle ? ctx.theta0 : nw->theta_hat;
            rec.variance_estimate = variance_estimate_linear(
                ctx.xi, theta_for_var, *sigma_hat, ctx.n, cfg.sigma_noise, cfg.variance_source);
            const auto ci = confidence_interval(rec.estimate, rec.variance_estimate, cfg.level);
            rec.covered = ci.first <= ctx.truth && ctx.truth <= ci.second;
            rec.z = (rec.estimate - ctx.truth) / std::sqrt(rec.variance_estimate);
            rec.nodewise_sparsity = nw->columns[ctx.target_col].sparsity;
            rec.tau_sq_error = std::abs(nw->columns[ctx.target_col].tau_sq - ctx.tau_sq_oracle);

            // sqrt(n) |b - beta - Theta0 X^T eps / n|_inf, the asymptotic-linearity
            // remainder (eps recovered exactly from the generating equation)
            DenseVector eps = y;
            for (std::size_t j = 0; j < cfg.p; ++j) {
                const double bj = ctx.beta_gen[j];
                if (bj == 0.0) continue;
                const double* col = x->col(j);
                for (std::size_t i = 0; i < ctx.n; ++i) eps[i] -= col[i] * bj;
            }
            DenseVector score = matvec_t(*x, eps);
            for (double& v : score.data) v *= inv_n;
            const DenseVector lin = matvec(ctx.theta0, score);
            double sup = 0.0;
            for (std::size_t j = 0; j < cfg.p; ++j)
                sup = std::max(sup, std::abs(b[j] - ctx.beta_gen[j] - lin[j]));
            rec.sqrt_n_remainder = std::sqrt(static_cast<double>(ctx.n)) * sup;
        } else {
            rec.estimate = rec.lasso_estimate;
            rec.variance_estimate = kNaN;
            rec.covered = false;
            rec.z = kNaN;
            rec.nodewise_sparsity = 0;
            rec.tau_sq_error = kNaN;
            rec.sqrt_n_remainder = kNaN;
        }
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

Aggregates compute_aggregates(const std::vector<ReplicateRecord>& records, std::size_t n,
                              double truth, double bound_per_sample, double level,
                              double lambda, double lambda_j, bool inference_bands) {
    Aggregates a;
    a.truth = truth;
    a.bound_per_sample = bound_per_sample;
    a.lambda = lambda;
    a.lambda_j = lambda_j;

    std::vector<double> est, lasso_est, zs, l1, l1sq, taue, rem;
    std::size_t covered = 0, zero_fits = 0;
    double support_sum = 0.0, nwsp_sum = 0.0;
    for (const auto& r : records) {
        if (!r.ok) continue;
        est.push_back(r.estimate);
        lasso_est.push_back(r.lasso_estimate);
        if (std::isfinite(r.z)) zs.push_back(r.z);
        l1.push_back(r.l1_error);
        l1sq.push_back(r.l1_error * r.l1_error);
        if (std::isfinite(r.tau_sq_error)) taue.push_back(r.tau_sq_error);
        if (std::isfinite(r.sqrt_n_remainder)) rem.push_back(r.sqrt_n_remainder);
        covered += r.covered;
        zero_fits += (r.support_size == 0);
        support_sum += static_cast<double>(r.support_size);
        nwsp_sum += static_cast<double>(r.nodewise_sparsity);
    }
    const std::size_t ok = est.size();
    a.replicates_ok = ok;
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    a.mean_estimate = mean_of(est);
    a.mean_bias = a.mean_estimate - truth;
    a.sqrt_n_mean_bias = sqrt_n * a.mean_bias;
    const double var_est = sample_variance(est);
    a.bias_mc_se = ok > 1 ? std::sqrt(var_est / static_cast<double>(ok)) : kNaN;
    a.sqrt_n_bias_mc_se = sqrt_n * a.bias_mc_se;
    a.n_times_variance = static_cast<double>(n) * var_est;
    a.variance_ratio = a.n_times_variance / bound_per_sample;
    a.coverage = ok > 0 ? static_cast<double>(covered) / static_cast<double>(ok) : kNaN;
    a.coverage_mc_se =
        ok > 0 ? std::sqrt(level * (1.0 - level) / static_cast<double>(ok)) : kNaN;

    a.mean_z = mean_of(zs);
    a.var_z = sample_variance(zs);
    if (zs.size() >= 8) {
        const NormalityDiagnostics d = normality_diagnostics(zs);
        a.ks = d.ks;
        a.skewness = d.skewness;
        a.kurtosis_excess = d.kurtosis_excess;
    } else {
        a.ks = a.skewness = a.kurtosis_excess = kNaN;
    }

    a.mean_l1_error = mean_of(l1);
    a.mean_l1_error_sq = mean_of(l1sq);
    a.mean_lasso_estimate = mean_of(lasso_est);
    a.sqrt_n_lasso_bias = sqrt_n * (a.mean_lasso_estimate - truth);
    a.mean_support_size = ok > 0 ? support_sum / static_cast<double>(ok) : kNaN;
    a.mean_nodewise_sparsity = ok > 0 ? nwsp_sum / static_cast<double>(ok) : kNaN;
    a.mean_tau_sq_error = mean_of(taue);
    a.median_sqrt_n_remainder = median_of(rem);
    a.zero_fit_fraction = ok > 0 ? static_cast<double>(zero_fits) / static_cast<double>(ok) : kNaN;

    if (inference_bands) {
        a.within_variance_band =
            a.variance_ratio >= kVarianceRatioLo && a.variance_ratio <= kVarianceRatioHi;
        a.within_coverage_band = a.coverage >= kCoverageLo && a.coverage <= kCoverageHi;
        a.within_bias_band = std::abs(a.sqrt_n_mean_bias) <= kSqrtNBiasMax;
        a.regime_violation = !(*a.within_variance_band && *a.within_bias_band);
    }
    return a;
}

std::vector<ReplicateRecord> run_replicates(
    std::size_t count, unsigned workers,
    const std::function<ReplicateRecord(std::size_t)>& one) {
    std::vector<ReplicateRecord> records(count);
    parallel_for(count, workers, [&](std::size_t r) { records[r] = one(r); });
    return records;
}

std::size_t count_failures(const std::vector<ReplicateRecord>& records) {
    std::size_t f = 0;
    for (const auto& r : records) f += !r.ok;
    return f;
}

struct GgmContext {
    const ExperimentConfig* cfg = nullptr;
    DenseMatrix sigma0, theta0;
    std::size_t ei = 0, ej = 0;
    double lambda_j = 0.0;
    double truth = 0.0;
    double bound_per_sample = 0.0;
    double tau_sq_oracle = 0.0;
    std::uint64_t replicate_root = 0;
};

GgmContext make_ggm_context(const ExperimentConfig& cfg) {
    GgmContext ctx;
    ctx.cfg = &cfg;
    CovarianceSpec cov = cfg.covariance;
    cov.dim = cfg.p;
    std::tie(ctx.sigma0, ctx.theta0) = build_covariance(cov);
    ctx.ei = cfg.target.i;
    ctx.ej = cfg.target.j;
    ctx.lambda_j = default_lambda(cfg.n, cfg.p, cfg.lambda_j_constant);
    ctx.truth = ctx.theta0(ctx.ei, ctx.ej);
    ctx.bound_per_sample = ggm_bound(ctx.theta0, DenseVector::unit(cfg.p, ctx.ei),
                                     DenseVector::unit(cfg.p, ctx.ej), cfg.n)
                               .bound_per_sample;
    ctx.tau_sq_oracle = 1.0 / ctx.theta0(ctx.ej, ctx.ej);
    ctx.replicate_root = derive_seed(cfg.master_seed, kStreamReplicates);
    return ctx;
}

ReplicateRecord run_ggm_replicate(const GgmContext& ctx, std::size_t r) {
    const ExperimentConfig& cfg = *ctx.cfg;
    ReplicateRecord rec;
    rec.index = r;
    try {
        const std::uint64_t rep_seed = derive_seed(ctx.replicate_root, r);
        const DenseMatrix x =
            sample_mvn(cfg.n, ctx.sigma0, derive_seed(rep_seed, kStreamDesign));
        const DenseMatrix sigma_hat = gram(x);
        LassoConfig ncfg;
        ncfg.lambda_constant = cfg.lambda_j_constant;
        const NodewiseFit nw = fit_nodewise_gram(sigma_hat, ctx.lambda_j, ncfg);
        const DenseMatrix t_hat = desparsified_precision(nw.theta_hat, sigma_hat);
        const DebiasedEstimate est =
            precision_entry_inference(t_hat, nw.theta_hat, ctx.ei, ctx.ej, cfg.n, cfg.level);

        rec.estimate = est.value;
        rec.lasso_estimate = nw.theta_hat(ctx.ei, ctx.ej);
        rec.variance_estimate = est.variance;
        rec.covered = est.ci_lo <= ctx.truth && ctx.truth <= est.ci_hi;
        rec.z = (est.value - ctx.truth) / est.std_error;

        DenseVector theta_col_err(cfg.p);
        for (std::size_t k = 0; k < cfg.p; ++k)
            theta_col_err[k] = nw.theta_hat(k, ctx.ej) - ctx.theta0(k, ctx.ej);
        rec.l1_error = norm1(theta_col_err);
        rec.support_size = nw.columns[ctx.ej].sparsity;
        rec.nodewise_sparsity = nw.columns[ctx.ej].sparsity;
        rec.tau_sq_error = std::abs(nw.columns[ctx.ej].tau_sq - ctx.tau_sq_oracle);

        // sqrt(n) |T_ij - Theta_ij + (Theta0 (Sigma_hat - Sigma0) Theta0)_ij|
        DenseMatrix diff = sigma_hat;
        for (std::size_t k = 0; k < diff.data.size(); ++k) diff.data[k] -= ctx.sigma0.data[k];
        DenseVector ti(cfg.p), tj(cfg.p);
        for (std::size_t k = 0; k < cfg.p; ++k) {
            ti[k] = ctx.theta0(k, ctx.ei);
            tj[k] = ctx.theta0(k, ctx.ej);
        }
        const double lin = -quadratic_form(ti, diff, tj);
        rec.sqrt_n_remainder = std::sqrt(static_cast<double>(cfg.n)) *
                               std::abs(rec.estimate - ctx.truth - lin);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

} // namespace

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.replications < 1) throw InvalidArgument("config: replications must be >= 1");
    if (cfg.p < 2) throw InvalidArgument("config: p must be >= 2");
    if (cfg.s > cfg.p) throw SparsityExceedsDim("config: s exceeds p");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw InvalidLevel("config: level in (0,1)");
    if (!(cfg.sigma_noise > 0.0)) throw InvalidArgument("config: sigma_noise must be > 0");
    if (!(cfg.signal >= 0.0)) throw InvalidArgument("config: signal must be >= 0");
    if (!(cfg.lambda_constant > 0.0) || !(cfg.lambda_j_constant > 0.0))
        throw InvalidArgument("config: lambda constants must be > 0");
    if (cfg.d_n > cfg.p) throw InvalidArgument("config: d_n exceeds p");

    const bool is_ggm = cfg.experiment == ExperimentKind::ggm;
    if (is_ggm != (cfg.model == ModelKind::ggm))
        throw InvalidArgument("config: ggm experiment requires ggm model and vice versa");
    if (is_ggm != (cfg.target.kind == TargetKind::precision_entry))
        throw InvalidArgument("config: precision_entry target is for the ggm model only");

    if (cfg.target.kind == TargetKind::coordinate && cfg.target.j >= cfg.p)
        throw IndexOutOfRange("config: target coordinate out of range");
    if (cfg.target.kind == TargetKind::functional && cfg.target.xi.size() != cfg.p)
        throw DimensionMismatch("config: xi length must equal p");
    if (cfg.target.kind == TargetKind::precision_entry &&
        (cfg.target.i >= cfg.p || cfg.target.j >= cfg.p))
        throw IndexOutOfRange("config: precision entry out of range");

    if (cfg.experiment == ExperimentKind::bias_rate) {
        if (cfg.n_grid.empty()) throw InvalidArgument("config: bias_rate needs n_grid");
        for (std::size_t nv : cfg.n_grid)
            if (nv < 2) throw InvalidArgument("config: n_grid entries must be >= 2");
        if (cfg.model != ModelKind::linear_random_design)
            throw InvalidArgument("config: bias_rate runs on the random design model");
    } else if (cfg.experiment == ExperimentKind::oracle_inequality) {
        if (cfg.s_grid.empty()) throw InvalidArgument("config: oracle_inequality needs s_grid");
        for (std::size_t sv : cfg.s_grid)
            if (sv > cfg.p) throw SparsityExceedsDim("config: s_grid entry exceeds p");
        if (cfg.model == ModelKind::ggm)
            throw InvalidArgument("config: oracle_inequality runs on a linear model");
    } else {
        if (cfg.n < 2) throw InvalidArgument("config: n must be >= 2");
    }

    if (cfg.experiment == ExperimentKind::local_perturbation) {
        if (cfg.model != ModelKind::linear_random_design)
            throw InvalidArgument("config: local_perturbation runs on the random design model");
        if (cfg.perturbation && cfg.perturbation->kind == PerturbationSpec::Kind::coordinate &&
            cfg.perturbation->j >= cfg.p)
            throw IndexOutOfRange("config: perturbation coordinate out of range");
        if (cfg.perturbation && cfg.perturbation->kind == PerturbationSpec::Kind::custom &&
            cfg.perturbation->h.size() != cfg.p)
            throw DimensionMismatch("config: perturbation h length must equal p");
    }
    if (cfg.model == ModelKind::linear_fixed_design &&
        cfg.target.kind != TargetKind::coordinate)
        throw InvalidArgument("config: fixed design supports coordinate targets");
}

MonteCarloReport run_linear_inference_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (cfg.model == ModelKind::ggm)
        throw InvalidArgument("run_linear_inference_experiment: linear models only");
    const auto t0 = std::chrono::steady_clock::now();

    MonteCarloReport rep;
    rep.config = cfg;
    rep.workers = cfg.parallel_workers;
    const LinearContext ctx = make_linear_context(cfg, cfg.n, cfg.master_seed);
    rep.records = run_replicates(cfg.replications, cfg.parallel_workers, [&](std::size_t r) {
        return run_linear_replicate(ctx, r, /*fit_nodewise_per_replicate=*/true);
    });
    rep.failures = count_failures(rep.records);
    rep.aggregates = compute_aggregates(rep.records, ctx.n, ctx.truth, ctx.bound_per_sample,
                                        cfg.level, ctx.lambda, ctx.lambda_j, true);
    rep.aggregates.perturbation_quadratic_form = ctx.perturbation_quadratic_form;
    rep.aggregates.perturbation_admissible = ctx.perturbation_admissible;
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

MonteCarloReport run_local_perturbation_experiment(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.experiment = ExperimentKind::local_perturbation;
    if (!c.perturbation) c.perturbation = PerturbationSpec{}; // worst sub-direction
    return run_linear_inference_experiment(c);
}

MonteCarloReport run_bias_rate_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    MonteCarloReport rep;
    rep.config = cfg;
    rep.workers = cfg.parallel_workers;
    BiasTrend trend;
    const std::uint64_t grid_root = derive_seed(cfg.master_seed, kStreamGrid);
    for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
        const std::size_t nv = cfg.n_grid[g];
        const LinearContext ctx = make_linear_context(cfg, nv, derive_seed(grid_root, g));
        GridPointReport point;
        point.key = "n";
        point.value = nv;
        point.records = run_replicates(cfg.replications, cfg.parallel_workers, [&](std::size_t r) {
            return run_linear_replicate(ctx, r, true);
        });
        point.failures = count_failures(point.records);
        point.aggregates = compute_aggregates(point.records, nv, ctx.truth, ctx.bound_per_sample,
                                              cfg.level, ctx.lambda, ctx.lambda_j, true);

        BiasTrendPoint tp;
        tp.n = nv;
        tp.sqrt_n_abs_bias = std::abs(point.aggregates.sqrt_n_mean_bias);
        tp.mc_se = point.aggregates.sqrt_n_bias_mc_se;
        tp.sqrt_n_abs_bias_lasso = std::abs(point.aggregates.sqrt_n_lasso_bias);
        tp.lasso_to_debias_ratio =
            tp.sqrt_n_abs_bias > 0.0 ? tp.sqrt_n_abs_bias_lasso / tp.sqrt_n_abs_bias : kNaN;
        trend.points.push_back(tp);
        rep.grid.push_back(std::move(point));
    }
    trend.nonincreasing_within_2se = true;
    for (std::size_t g = 1; g < trend.points.size(); ++g) {
        const auto& a = trend.points[g - 1];
        const auto& b = trend.points[g];
        const double se = std::sqrt(a.mc_se * a.mc_se + b.mc_se * b.mc_se);
        if (b.sqrt_n_abs_bias > a.sqrt_n_abs_bias + 2.0 * se)
            trend.nonincreasing_within_2se = false;
    }
    rep.bias_trend = std::move(trend);
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

MonteCarloReport run_oracle_inequality_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    MonteCarloReport rep;
    rep.config = cfg;
    rep.workers = cfg.parallel_workers;
    OracleTrend trend;
    const std::uint64_t grid_root = derive_seed(cfg.master_seed, kStreamGrid);
    for (std::size_t g = 0; g < cfg.s_grid.size(); ++g) {
        ExperimentConfig pc = cfg;
        pc.s = cfg.s_grid[g];
        const LinearContext ctx = make_linear_context(pc, pc.n, derive_seed(grid_root, g));
        GridPointReport point;
        point.key = "s";
        point.value = pc.s;
        point.records = run_replicates(cfg.replications, cfg.parallel_workers, [&](std::size_t r) {
            return run_linear_replicate(ctx, r, /*fit_nodewise_per_replicate=*/false);
        });
        point.failures = count_failures(point.records);
        point.aggregates = compute_aggregates(point.records, pc.n, ctx.truth, kNaN, cfg.level,
                                              ctx.lambda, ctx.lambda_j, false);

        OracleTrendPoint tp;
        tp.s = pc.s;
        tp.lambda = ctx.lambda;
        tp.s_lambda = static_cast<double>(pc.s) * ctx.lambda;
        tp.mean_l1 = point.aggregates.mean_l1_error;
        tp.ratio = pc.s > 0 ? tp.mean_l1 / tp.s_lambda : kNaN;
        tp.k2_ratio =
            pc.s > 0 ? std::sqrt(point.aggregates.mean_l1_error_sq) / tp.s_lambda : kNaN;
        tp.zero_fit_fraction = point.aggregates.zero_fit_fraction;
        trend.points.push_back(tp);
        rep.grid.push_back(std::move(point));
    }

    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& tp : trend.points) {
        if (tp.s == 0) continue;
        rmin = std::min(rmin, tp.ratio);
        rmax = std::max(rmax, tp.ratio);
        kmin = std::min(kmin, tp.k2_ratio);
        kmax = std::max(kmax, tp.k2_ratio);
        sxy += tp.s_lambda * tp.mean_l1;
        sxx += tp.s_lambda * tp.s_lambda;
    }
    trend.ratio_max_over_min = rmin > 0.0 && std::isfinite(rmin) ? rmax / rmin : kNaN;
    trend.k2_ratio_max_over_min = kmin > 0.0 && std::isfinite(kmin) ? kmax / kmin : kNaN;
    trend.slope_l1_vs_s_lambda = sxx > 0.0 ? sxy / sxx : kNaN;
    rep.oracle_trend = std::move(trend);
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

MonteCarloReport run_ggm_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    MonteCarloReport rep;
    rep.config = cfg;
    rep.workers = cfg.parallel_workers;
    const GgmContext ctx = make_ggm_context(cfg);
    rep.records = run_replicates(cfg.replications, cfg.parallel_workers,
                                 [&](std::size_t r) { return run_ggm_replicate(ctx, r); });
    rep.failures = count_failures(rep.records);
    rep.aggregates =
        compute_aggregates(rep.records, cfg.n, ctx.truth, ctx.bound_per_sample, cfg.level,
                           kNaN, ctx.lambda_j, true);
    rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return rep;
}

MonteCarloReport run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case ExperimentKind::linear_inference: return run_linear_inference_experiment(cfg);
        case ExperimentKind::bias_rate: return run_bias_rate_experiment(cfg);
        case ExperimentKind::oracle_inequality: return run_oracle_inequality_experiment(cfg);
        case ExperimentKind::local_perturbation: return run_local_perturbation_experiment(cfg);
        case ExperimentKind::ggm: return run_ggm_experiment(cfg);
    }
    throw InvalidArgument("run_experiment: unknown experiment kind");
}

NormalityDiagnostics normality_diagnostics(const std::vector<double>& samples) {
    if (samples.size() < 8)
        throw TooFewSamples("normality_diagnostics: need at least 8 samples");
    std::vector<double> x = samples;
    std::sort(x.begin(), x.end());
    const std::size_t m = x.size();

    NormalityDiagnostics d;
    double ks = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double phi = normal_cdf(x[i]);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(m) - phi;
        const double lo = phi - static_cast<double>(i) / static_cast<double>(m);
        ks = std::max({ks, hi, lo});
    }
    d.ks = ks;

    const double mean = mean_of(x);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= static_cast<double>(m);
    m3 /= static_cast<double>(m);
    m4 /= static_cast<double>(m);
    d.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    d.kurtosis_excess = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    return d;
}

std::string experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::linear_inference: return "linear_inference";
        case ExperimentKind::bias_rate: return "bias_rate";
        case ExperimentKind::oracle_inequality: return "oracle_inequality";
        case ExperimentKind::local_perturbation: return "local_perturbation";
        case ExperimentKind::ggm: return "ggm";
    }
    return "linear_inference";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    if (name == "linear_inference") return ExperimentKind::linear_inference;
    if (name == "bias_rate") return ExperimentKind::bias_rate;
    if (name == "oracle_inequality") return ExperimentKind::oracle_inequality;
    if (name == "local_perturbation") return ExperimentKind::local_perturbation;
    if (name == "ggm") return ExperimentKind::ggm;
    throw InvalidArgument("unknown experiment kind: " + name);
}

std::string model_kind_name(ModelKind m) {
    switch (m) {
        case ModelKind::linear_random_design: return "linear_random_design";
        case ModelKind::linear_fixed_design: return "linear_fixed_design";
        case ModelKind::ggm: return "ggm";
    }
    return "linear_random_design";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "linear_random_design") return ModelKind::linear_random_design;
    if (name == "linear_fixed_design") return ModelKind::linear_fixed_design;
    if (name == "ggm") return ModelKind::ggm;
    throw InvalidArgument("unknown model kind: " + name);
}

} // namespace hdinf

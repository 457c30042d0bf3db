// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdinf/bounds.hpp"
#include "hdinf/datagen.hpp"
#include "hdinf/inference.hpp"
#include "hdinf/lasso.hpp"
#include "hdinf/nodewise.hpp"
#include "hdinf/report_json.hpp"
#include "hdinf/rng.hpp"
#include "hdinf/simharness.hpp"

using namespace hdinf;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED " + what;
        } else {
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

// ---- criterion 1: lasso vs exhaustive grid --------------------------------

double lasso_objective_direct(const DenseMatrix& x, const DenseVector& y,
                              const DenseVector& beta, double lambda) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double r = y[i];
        for (std::size_t j = 0; j < x.cols; ++j) r -= x(i, j) * beta[j];
        rss += r * r;
    }
    return rss / static_cast<double>(x.rows) + 2.0 * lambda * norm1(beta);
}

Check criterion1() {
    Check c;
    LassoConfig cfg;
    double worst_gap = -1e300, worst_kkt = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(inst);
        CounterRng rng(seed);
        DenseMatrix x(20, 2);
        for (double& v : x.data) v = rng.next_normal();
        if (inst % 2 == 1) { // correlate the columns on half the corpus
            for (std::size_t i = 0; i < 20; ++i) x(i, 1) = 0.7 * x(i, 0) + 0.5 * x(i, 1);
        }
        DenseVector beta0{0.9, -0.6};
        DenseVector y = matvec(x, beta0);
        for (double& v : y.data) v += 0.4 * rng.next_normal();
        const double lambda = 0.05 + 0.08 * static_cast<double>(inst % 4);

        const LassoFit fit = fit_lasso(x, y, lambda, cfg);
        c.require(fit.converged, "");
        if (fit.converged) {
            const double kkt = kkt_residual(x, y, fit.beta_hat, lambda);
            worst_kkt = std::max(worst_kkt, kkt);
            if (kkt > 100.0 * cfg.tol) c.require(false, "kkt residual " + fmt(kkt));
        }

        // exhaustive 401 x 401 grid on [-2,2]^2
        double grid_min = 1e300;
        DenseVector beta(2);
        for (int a = 0; a <= 400; ++a) {
            beta[0] = -2.0 + 0.01 * a;
            for (int b = 0; b <= 400; ++b) {
                beta[1] = -2.0 + 0.01 * b;
                grid_min = std::min(grid_min, lasso_objective_direct(x, y, beta, lambda));
            }
        }
        worst_gap = std::max(worst_gap, fit.objective - grid_min);
        if (fit.objective > grid_min + 1e-9)
            c.require(false, "objective above grid minimum by " + fmt(fit.objective - grid_min));
    }
    c.detail = "max(objective - grid_min) = " + fmt(worst_gap) + " (<= 0 up to 1e-9), max kkt = " +
               fmt(worst_kkt) + " <= " + fmt(100.0 * cfg.tol);
    return c;
}

Check criterion2() {
    Check c;
    LassoConfig cfg;
    double worst = -1e300;
    int design = 0;
    for (std::size_t p : {std::size_t{50}, std::size_t{150}}) {
        for (int k = 0; k < 10; ++k, ++design) {
            CovarianceSpec cov;
            cov.dim = p;
            if (design % 2 == 0) {
                cov.family = CovarianceFamily::identity;
            } else {
                cov.family = CovarianceFamily::toeplitz;
                cov.rho = 0.5;
            }
            auto [sigma0, theta0] = build_covariance(cov);
            (void)theta0;
            const DenseMatrix x =
                sample_mvn(200, sigma0, derive_seed(8100, static_cast<std::uint64_t>(design)));
            const DenseMatrix sh = gram(x);
            const NodewiseFit fit = fit_nodewise_gram(sh, default_lambda(200, p, std::sqrt(2.0)), cfg);
            for (const auto& col : fit.columns) c.require(col.converged, "");
            const double v = surrogate_inverse_violation(sh, fit);
            worst = std::max(worst, v);
        }
    }
    c.require(worst <= 100.0 * cfg.tol,
              "max signed violation " + fmt(worst) + " <= " + fmt(100.0 * cfg.tol));
    return c;
}

Check criterion3() {
    Check c;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const std::uint64_t seed = derive_seed(8200, static_cast<std::uint64_t>(k));
        const DenseMatrix x = sample_mvn(100, DenseMatrix::identity(10), seed);
        const DenseVector beta0 = make_sparse_beta(10, 3, 1.0, seed + 1);
        const DenseVector y = simulate_linear(x, beta0, 1.0, seed + 2);
        const DenseMatrix sh = gram(x);
        const DenseMatrix theta = invert_spd(sh);
        DenseVector xty = matvec_t(x, y);
        for (double& v : xty.data) v /= 100.0;
        const DenseVector ols = solve_spd(sh, xty);

        const LassoFit lasso = fit_lasso(x, y, default_lambda(100, 10, std::sqrt(2.0)));
        const DenseVector b = desparsified_lasso(lasso.beta_hat, theta, x, y);
        for (std::size_t j = 0; j < 10; ++j) worst = std::max(worst, std::abs(b[j] - ols[j]));
    }
    c.require(worst <= 1e-8, "max |b - ols|_inf = " + fmt(worst) + " <= 1e-8 over 20 seeds");
    return c;
}

ExperimentConfig criterion4_config() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::linear_inference;
    cfg.model = ModelKind::linear_random_design;
    cfg.n = 400;
    cfg.p = 200;
    cfg.s = 3;
    cfg.replications = 500;
    cfg.signal = 1.0;
    cfg.target.kind = TargetKind::coordinate;
    cfg.target.j = 0;
    cfg.master_seed = 20260801;
    return cfg;
}

Check criterion4() {
    Check c;
    const MonteCarloReport rep = run_linear_inference_experiment(criterion4_config());
    const Aggregates& a = rep.aggregates;
    c.require(rep.failures == 0, "failures = 0");
    c.require(a.variance_ratio >= kVarianceRatioLo && a.variance_ratio <= kVarianceRatioHi,
              "n Var / bound = " + fmt(a.variance_ratio) + " in [0.8, 1.3]");
    c.require(a.coverage >= kCoverageLo && a.coverage <= kCoverageHi,
              "coverage = " + fmt(a.coverage) + " in [0.90, 0.98]");
    c.require(std::abs(a.sqrt_n_mean_bias) <= kSqrtNBiasMax,
              "|sqrt(n) bias| = " + fmt(std::abs(a.sqrt_n_mean_bias)) + " <= 0.15");
    return c;
}

Check criterion5() {
    Check c;
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::ggm;
    cfg.model = ModelKind::ggm;
    cfg.n = 400;
    cfg.p = 50;
    cfg.replications = 500;
    cfg.target.kind = TargetKind::precision_entry;
    cfg.master_seed = 20260805;

    cfg.target.i = 0;
    cfg.target.j = 1;
    const MonteCarloReport off = run_ggm_experiment(cfg);
    c.require(off.failures == 0, "failures = 0");
    c.require(std::abs(off.aggregates.bound_per_sample - 1.0) < 1e-12, "sigma^2(0,1) = 1");
    c.require(off.aggregates.variance_ratio >= kVarianceRatioLo &&
                  off.aggregates.variance_ratio <= kVarianceRatioHi,
              "off-diagonal ratio = " + fmt(off.aggregates.variance_ratio) + " in [0.8, 1.3]");
    c.require(off.aggregates.coverage >= kCoverageLo && off.aggregates.coverage <= kCoverageHi,
              "coverage = " + fmt(off.aggregates.coverage) + " in [0.90, 0.98]");

    cfg.target.j = 0;
    const MonteCarloReport diag = run_ggm_experiment(cfg);
    c.require(std::abs(diag.aggregates.bound_per_sample - 2.0) < 1e-12, "sigma^2(0,0) = 2");
    c.require(diag.aggregates.variance_ratio >= kVarianceRatioLo &&
                  diag.aggregates.variance_ratio <= kVarianceRatioHi,
              "diagonal ratio = " + fmt(diag.aggregates.variance_ratio) + " in [0.8, 1.3]");
    return c;
}

Check criterion6() {
    Check c;
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::oracle_inequality;
    cfg.model = ModelKind::linear_random_design;
    cfg.n = 400;
    cfg.p = 200;
    cfg.signal = 2.0;
    cfg.s_grid = {2, 4, 8};
    cfg.replications = 200;
    cfg.master_seed = 20260806;
    const MonteCarloReport rep = run_oracle_inequality_experiment(cfg);
    c.require(rep.failures == 0, "failures = 0");
    const OracleTrend& tr = *rep.oracle_trend;
    c.require(tr.ratio_max_over_min <= 3.0,
              "l1 ratio max/min = " + fmt(tr.ratio_max_over_min) + " <= 3");
    c.require(tr.k2_ratio_max_over_min <= 3.0,
              "k=2 ratio max/min = " + fmt(tr.k2_ratio_max_over_min) + " <= 3");
    return c;
}

Check criterion7() {
    Check c;
    ExperimentConfig cfg = criterion4_config();
    cfg.experiment = ExperimentKind::local_perturbation;
    cfg.master_seed = 20260807;
    PerturbationSpec ps;
    ps.kind = PerturbationSpec::Kind::worst; // h = e_1 under the identity design
    cfg.perturbation = ps;
    const MonteCarloReport rep = run_local_perturbation_experiment(cfg);
    const Aggregates& a = rep.aggregates;
    const double ks_limit = 1.358 / std::sqrt(500.0) + 0.03;
    c.require(rep.failures == 0, "failures = 0");
    c.require(std::abs(*a.perturbation_quadratic_form - 1.0) <= 1e-10, "h' Sigma0 h = 1");
    c.require(std::abs(a.mean_z) <= 0.15, "|mean z| = " + fmt(std::abs(a.mean_z)) + " <= 0.15");
    c.require(a.ks <= ks_limit, "KS = " + fmt(a.ks) + " <= " + fmt(ks_limit));
    return c;
}

Check criterion8() {
    Check c;
    DenseMatrix t2(2, 2);
    t2(0, 0) = 4.0 / 3.0;
    t2(0, 1) = -2.0 / 3.0;
    t2(1, 0) = -2.0 / 3.0;
    t2(1, 1) = 4.0 / 3.0;
    const DenseVector e1 = DenseVector::unit(2, 0);
    const DenseVector e2 = DenseVector::unit(2, 1);

    const DenseVector c0 = worst_subdirection(t2, e1);
    c.require(std::abs(c0[0] - 1.0) <= 1e-10 && std::abs(c0[1] + 0.5) <= 1e-10,
              "worst sub-direction (1, -0.5)");
    const DenseVector h0 = normalized_direction(t2, e1);
    c.require(std::abs(h0[0] - (4.0 / 3.0) / std::sqrt(4.0 / 3.0)) <= 1e-10,
              "normalized direction");
    c.require(std::abs(cr_bound_linear(t2, e1, 100, 1.0).bound_per_sample - 4.0 / 3.0) <= 1e-10,
              "CR bound 4/3");
    c.require(std::abs(ggm_bound(t2, e1, e2, 100).bound_per_sample - 20.0 / 9.0) <= 1e-10,
              "GGM bound 20/9");
    DenseMatrix s2(2, 2);
    s2(0, 0) = 1.0;
    s2(0, 1) = 0.5;
    s2(1, 0) = 0.5;
    s2(1, 1) = 1.0;
    c.require(std::abs(lecam_bound(s2, e1) - 4.0 / 3.0) <= 1e-10, "Le Cam bound 4/3");
    c.require(std::abs(compatibility_lower_bound(s2) - 0.5) <= 1e-8, "lambda_min 0.5");
    c.require(std::abs(minimax_rate(100, 1000, 5) - (0.1 + 5.0 * std::log(1000.0) / 100.0)) <=
                  1e-12,
              "minimax rate");

    // Cauchy-Schwarz extremality over 500 random normalized directions
    CovarianceSpec cov{CovarianceFamily::toeplitz, 8, 0.5, 0, 0.0};
    auto [sigma0, theta0] = build_covariance(cov);
    const DenseVector g = DenseVector::unit(8, 3);
    const double qmax = quadratic_form(g, theta0, g);
    CounterRng rng(20260808);
    bool all_below = true;
    for (int k = 0; k < 500; ++k) {
        DenseVector h(8);
        for (double& v : h.data) v = rng.next_normal();
        const double q = quadratic_form(h, sigma0, h);
        for (double& v : h.data) v /= std::sqrt(q);
        const double val = dot(h, g);
        if (val * val > qmax + 1e-9) all_below = false;
    }
    c.require(all_below, "[h'g]^2 <= g'Theta0 g + 1e-9 over 500 normalized h");
    const DenseVector hstar = normalized_direction(theta0, g);
    c.require(std::abs(dot(hstar, g) * dot(hstar, g) - qmax) <= 1e-9, "equality at h0");
    return c;
}

Check criterion9() {
    Check c;
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::bias_rate;
    cfg.model = ModelKind::linear_random_design;
    cfg.p = 100;
    cfg.s = 3;
    cfg.replications = 500;
    cfg.n_grid = {200, 800, 3200};
    cfg.master_seed = 20260809;
    // target the first support coordinate so the penalized estimator's
    // shrinkage bias is visible in the contrast
    const DenseVector beta0 =
        make_sparse_beta(cfg.p, cfg.s, cfg.signal, derive_seed(cfg.master_seed, kStreamBeta));
    cfg.target.kind = TargetKind::coordinate;
    for (std::size_t j = 0; j < cfg.p; ++j) {
        if (beta0[j] != 0.0) {
            cfg.target.j = j;
            break;
        }
    }
    const MonteCarloReport rep = run_bias_rate_experiment(cfg);
    c.require(rep.failures == 0, "failures = 0");
    const BiasTrend& tr = *rep.bias_trend;
    c.require(tr.nonincreasing_within_2se, "sqrt(n)|bias| nonincreasing within 2 MC se");
    std::string seq;
    for (const auto& tp : tr.points) seq += fmt(tp.sqrt_n_abs_bias) + " ";
    c.require(true, "trend " + seq);
    const BiasTrendPoint& mid = tr.points[1]; // n = 800
    c.require(mid.sqrt_n_abs_bias_lasso >= 2.0 * mid.sqrt_n_abs_bias,
              "lasso/debias bias ratio at n=800 = " + fmt(mid.lasso_to_debias_ratio) + " >= 2");
    return c;
}

Check criterion10() {
    Check c;
    const fs::path dir = fs::temp_directory_path() / "hdinf_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    nlohmann::ordered_json cfg;
    cfg["model"] = "linear_random_design";
    cfg["n"] = 200;
    cfg["p"] = 50;
    cfg["s"] = 2;
    cfg["replications"] = 50;
    cfg["master_seed"] = 7;
    const fs::path cfg_path = dir / "cfg.json";
    {
        std::ofstream out(cfg_path);
        out << cfg.dump(2) << "\n";
    }
    auto run = [&](const std::string& extra, const fs::path& out_path) {
        const std::string cmd = std::string(HDINF_CLI_PATH) + " experiment --config " +
                                cfg_path.string() + " " + extra + " --out " + out_path.string() +
                                " 2> /dev/null";
        return std::system(cmd.c_str()) == 0;
    };
    auto canonical = [](const fs::path& path) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(ss.str());
        j.erase("wall_ms");
        j.erase("workers");
        return j.dump(2);
    };
    const fs::path o1 = dir / "r1.json", o2 = dir / "r2.json", o3 = dir / "r3.json";
    c.require(run("", o1) && run("", o2) && run("--workers 4", o3), "three CLI runs succeed");
    if (c.ok) {
        c.require(canonical(o1) == canonical(o2), "rerun is byte-identical (volatile block aside)");
        c.require(canonical(o1) == canonical(o3), "worker count does not change the report");
    }
    // the same holds in-process
    ExperimentConfig ec = experiment_config_from_json(cfg);
    const std::string a = canonical_report_string(run_experiment(ec));
    ec.parallel_workers = 3;
    const std::string b = canonical_report_string(run_experiment(ec));
    c.require(a == b, "library-level reports identical across worker counts");
    return c;
}

struct Criterion {
    int id;
    std::string name;
    std::function<Check()> run;
    double time_limit_s; // 0 = no stated limit
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "lasso correctness vs exhaustive grid + KKT certificates", criterion1, 10.0},
        {2, "surrogate-inverse certificate on random designs", criterion2, 60.0},
        {3, "exact-inverse debiasing equals least squares", criterion3, 0.0},
        {4, "variance attainment, linear model (ratio/coverage/bias)", criterion4, 300.0},
        {5, "variance attainment, GGM entries (1,2) and (1,1)", criterion5, 300.0},
        {6, "oracle-inequality scaling over s in {2,4,8}", criterion6, 300.0},
        {7, "Le Cam local regularity under sqrt(n)-perturbation", criterion7, 0.0},
        {8, "bound-calculator exactness + Cauchy-Schwarz extremality", criterion8, 0.0},
        {9, "unbiasedness rate trend and lasso-bias contrast", criterion9, 0.0},
        {10, "byte-identical reproducibility incl. worker counts", criterion10, 0.0},
    };

    int failures = 0;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = cr.run();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cr.time_limit_s > 0.0 && secs > cr.time_limit_s) {
            c.ok = false;
            c.detail += "; runtime " + fmt(secs) + " s exceeds " + fmt(cr.time_limit_s) + " s";
        }
        std::printf("%s criterion %d: %s [%s] (%.1f s)\n", c.ok ? "PASS" : "FAIL", cr.id,
                    cr.name.c_str(), c.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !c.ok;
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures;
}

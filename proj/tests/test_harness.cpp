#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hdinf/gauss.hpp"
#include "hdinf/report_json.hpp"
#include "hdinf/simharness.hpp"
#include "oracle_helpers.hpp"

using namespace hdinf;

namespace {

ExperimentConfig small_linear_config() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::linear_inference;
    cfg.model = ModelKind::linear_random_design;
    cfg.n = 150;
    cfg.p = 20;
    cfg.s = 2;
    cfg.replications = 60;
    cfg.target.kind = TargetKind::coordinate;
    cfg.target.j = 0;
    cfg.master_seed = 42;
    return cfg;
}

} // namespace

TEST_CASE("normality_diagnostics: construction oracles") {
    std::vector<double> scores;
    for (int i = 1; i <= 1000; ++i)
        scores.push_back(inverse_normal_cdf((static_cast<double>(i) - 0.5) / 1000.0));
    const NormalityDiagnostics perfect = normality_diagnostics(scores);
    CHECK(perfect.ks <= 0.001);
    CHECK(std::abs(perfect.skewness) < 0.01);

    const std::vector<double> zeros(100, 0.0);
    CHECK(normality_diagnostics(zeros).ks == doctest::Approx(0.5).epsilon(1e-12));

    std::vector<double> uniform;
    CounterRng rng(7);
    for (int i = 0; i < 2000; ++i) uniform.push_back(-3.0 + 6.0 * rng.next_uniform());
    CHECK(normality_diagnostics(uniform).ks >= 0.05);

    CHECK_THROWS_AS(normality_diagnostics(std::vector<double>(7, 0.0)), TooFewSamples);
}

TEST_CASE("run_linear_inference_experiment: R=1 aggregates equal the record") {
    ExperimentConfig cfg = small_linear_config();
    cfg.replications = 1;
    const MonteCarloReport rep = run_linear_inference_experiment(cfg);
    REQUIRE(rep.records.size() == 1);
    REQUIRE(rep.records[0].ok);
    CHECK(rep.failures == 0);
    CHECK(rep.aggregates.replicates_ok == 1);
    CHECK(rep.aggregates.mean_estimate == rep.records[0].estimate);
    CHECK(rep.aggregates.coverage == (rep.records[0].covered ? 1.0 : 0.0));
    CHECK(rep.aggregates.mean_l1_error == rep.records[0].l1_error);
}

TEST_CASE("run_linear_inference_experiment: sane bands at unit-test scale") {
    const ExperimentConfig cfg = small_linear_config();
    const MonteCarloReport rep = run_linear_inference_experiment(cfg);
    CHECK(rep.failures == 0);
    CHECK(rep.aggregates.bound_per_sample == doctest::Approx(1.0)); // identity Theta0
    CHECK(rep.aggregates.variance_ratio > 0.5);
    CHECK(rep.aggregates.variance_ratio < 2.0);
    CHECK(rep.aggregates.coverage >= 0.8);
    CHECK(std::abs(rep.aggregates.mean_z) < 0.5);
    // every aggregate recomputable from the records
    double mean = 0.0, l1 = 0.0;
    std::size_t covered = 0;
    for (const auto& r : rep.records) {
        mean += r.estimate;
        l1 += r.l1_error;
        covered += r.covered;
    }
    const double n_ok = static_cast<double>(rep.records.size());
    mean /= n_ok;
    CHECK(rep.aggregates.mean_estimate == doctest::Approx(mean).epsilon(1e-12));
    CHECK(rep.aggregates.mean_l1_error == doctest::Approx(l1 / n_ok).epsilon(1e-12));
    CHECK(rep.aggregates.coverage == doctest::Approx(covered / n_ok).epsilon(1e-12));
    double var = 0.0;
    for (const auto& r : rep.records) var += (r.estimate - mean) * (r.estimate - mean);
    var /= (n_ok - 1.0);
    CHECK(rep.aggregates.n_times_variance ==
          doctest::Approx(static_cast<double>(cfg.n) * var).epsilon(1e-10));
}

TEST_CASE("reproducibility: identical canonical reports across runs and workers") {
    ExperimentConfig cfg = small_linear_config();
    cfg.replications = 20;
    const std::string a = canonical_report_string(run_linear_inference_experiment(cfg));
    const std::string b = canonical_report_string(run_linear_inference_experiment(cfg));
    CHECK(a == b);
    cfg.parallel_workers = 3;
    const std::string c = canonical_report_string(run_linear_inference_experiment(cfg));
    CHECK(a == c);
}

TEST_CASE("variance sources: oracle and sandwich run end to end") {
    ExperimentConfig cfg = small_linear_config();
    cfg.replications = 15;
    cfg.variance_source = VarianceSource::oracle;
    const MonteCarloReport oracle_rep = run_linear_inference_experiment(cfg);
    CHECK(oracle_rep.failures == 0);
    // oracle variance with identity Theta0 is exactly 1/n
    CHECK(oracle_rep.records[0].variance_estimate ==
          doctest::Approx(1.0 / static_cast<double>(cfg.n)).epsilon(1e-12));
    cfg.variance_source = VarianceSource::sandwich;
    CHECK(run_linear_inference_experiment(cfg).failures == 0);
}

TEST_CASE("fixed design: one frozen X, nodewise shared across replicates") {
    ExperimentConfig cfg = small_linear_config();
    cfg.model = ModelKind::linear_fixed_design;
    cfg.replications = 25;
    const MonteCarloReport rep = run_linear_inference_experiment(cfg);
    CHECK(rep.failures == 0);
    // the nodewise sparsity column is constant because the design is frozen
    for (const auto& r : rep.records)
        CHECK(r.nodewise_sparsity == rep.records[0].nodewise_sparsity);
    CHECK(rep.aggregates.variance_ratio > 0.4);
    CHECK(rep.aggregates.variance_ratio < 2.5);
}

TEST_CASE("local perturbation with h = 0 reduces to the plain experiment") {
    ExperimentConfig base = small_linear_config();
    base.replications = 12;
    ExperimentConfig local = base;
    local.experiment = ExperimentKind::local_perturbation;
    PerturbationSpec ps;
    ps.kind = PerturbationSpec::Kind::custom;
    ps.h = DenseVector(base.p);
    local.perturbation = ps;
    const MonteCarloReport a = run_linear_inference_experiment(base);
    const MonteCarloReport b = run_local_perturbation_experiment(local);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t r = 0; r < a.records.size(); ++r) {
        CHECK(a.records[r].estimate == b.records[r].estimate);
        CHECK(a.records[r].z == b.records[r].z);
    }
}

TEST_CASE("local perturbation: worst direction is admissible and unit-normalized") {
    ExperimentConfig cfg = small_linear_config();
    cfg.experiment = ExperimentKind::local_perturbation;
    cfg.replications = 30;
    cfg.d_n = 6;
    PerturbationSpec ps;
    ps.kind = PerturbationSpec::Kind::worst;
    cfg.perturbation = ps;
    const MonteCarloReport rep = run_local_perturbation_experiment(cfg);
    REQUIRE(rep.aggregates.perturbation_quadratic_form.has_value());
    CHECK(*rep.aggregates.perturbation_quadratic_form == doctest::Approx(1.0).epsilon(1e-10));
    REQUIRE(rep.aggregates.perturbation_admissible.has_value());
    CHECK(*rep.aggregates.perturbation_admissible);
    CHECK(rep.failures == 0);
    CHECK(std::abs(rep.aggregates.mean_z) < 0.6);
}

TEST_CASE("bias_rate: grid sub-reports and trend shape") {
    ExperimentConfig cfg = small_linear_config();
    cfg.experiment = ExperimentKind::bias_rate;
    cfg.n_grid = {100, 300};
    cfg.replications = 30;
    const MonteCarloReport rep = run_bias_rate_experiment(cfg);
    REQUIRE(rep.grid.size() == 2);
    CHECK(rep.grid[0].key == "n");
    CHECK(rep.grid[0].value == 100);
    CHECK(rep.grid[1].value == 300);
    REQUIRE(rep.bias_trend.has_value());
    CHECK(rep.bias_trend->points.size() == 2);
    for (const auto& tp : rep.bias_trend->points) {
        CHECK(tp.sqrt_n_abs_bias >= 0.0);
        CHECK(tp.mc_se > 0.0);
    }
    // null model: bias indistinguishable from zero
    ExperimentConfig null_cfg = cfg;
    null_cfg.s = 0;
    null_cfg.n_grid = {200};
    null_cfg.replications = 50;
    const MonteCarloReport null_rep = run_bias_rate_experiment(null_cfg);
    const auto& tp = null_rep.bias_trend->points[0];
    CHECK(tp.sqrt_n_abs_bias <= 3.0 * tp.mc_se);
}

TEST_CASE("oracle_inequality: s grid, null support, ratios") {
    ExperimentConfig cfg = small_linear_config();
    cfg.experiment = ExperimentKind::oracle_inequality;
    cfg.n = 200;
    cfg.p = 40;
    cfg.signal = 2.0;
    cfg.s_grid = {0, 2, 4};
    cfg.replications = 30;
    const MonteCarloReport rep = run_oracle_inequality_experiment(cfg);
    REQUIRE(rep.grid.size() == 3);
    REQUIRE(rep.oracle_trend.has_value());
    const auto& tr = *rep.oracle_trend;
    REQUIRE(tr.points.size() == 3);
    // s = 0: the default lambda kills the fit entirely in most replicates
    CHECK(tr.points[0].zero_fit_fraction >= 0.5);
    CHECK(tr.points[0].mean_l1 <=
          static_cast<double>(cfg.p) * rep.grid[0].aggregates.lambda * 0.5);
    CHECK(std::isfinite(tr.points[1].ratio));
    CHECK(tr.points[1].ratio > 0.0);
    CHECK(std::isfinite(tr.ratio_max_over_min));
    CHECK(tr.slope_l1_vs_s_lambda > 0.0);
}

TEST_CASE("failure isolation: degenerate replicates recorded, run completes") {
    // p > n with a vanishing penalty drives tau^2 under the floor in every
    // replicate; the run must finish and carry the failure count
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::ggm;
    cfg.model = ModelKind::ggm;
    cfg.target.kind = TargetKind::precision_entry;
    cfg.target.i = 0;
    cfg.target.j = 1;
    cfg.n = 2;
    cfg.p = 4;
    cfg.replications = 5;
    cfg.lambda_j_constant = 1e-13;
    cfg.master_seed = 9;
    const MonteCarloReport rep = run_ggm_experiment(cfg);
    CHECK(rep.failures == rep.records.size());
    for (const auto& r : rep.records) {
        CHECK_FALSE(r.ok);
        CHECK_FALSE(r.error.empty());
    }
    CHECK(rep.aggregates.replicates_ok == 0);
}

TEST_CASE("ggm experiment: identity precision sanity at unit-test scale") {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::ggm;
    cfg.model = ModelKind::ggm;
    cfg.target.kind = TargetKind::precision_entry;
    cfg.target.i = 0;
    cfg.target.j = 1;
    cfg.n = 200;
    cfg.p = 15;
    cfg.replications = 60;
    cfg.master_seed = 77;
    const MonteCarloReport rep = run_ggm_experiment(cfg);
    CHECK(rep.failures == 0);
    CHECK(rep.aggregates.bound_per_sample == doctest::Approx(1.0));
    CHECK(rep.aggregates.variance_ratio > 0.5);
    CHECK(rep.aggregates.variance_ratio < 2.0);
    CHECK(rep.aggregates.coverage >= 0.8);
}

TEST_CASE("insufficient sparsity: the report flags the regime violation") {
    ExperimentConfig cfg = small_linear_config();
    cfg.p = 20;
    cfg.s = 10; // s >> sqrt(n)/log p
    cfg.replications = 40;
    const DenseVector beta0 =
        make_sparse_beta(cfg.p, cfg.s, cfg.signal, derive_seed(cfg.master_seed, kStreamBeta));
    for (std::size_t j = 0; j < cfg.p; ++j) {
        if (beta0[j] != 0.0) {
            cfg.target.j = j;
            break;
        }
    }
    const MonteCarloReport rep = run_linear_inference_experiment(cfg);
    REQUIRE(rep.aggregates.regime_violation.has_value());
    CHECK(*rep.aggregates.regime_violation);
    CHECK(std::abs(rep.aggregates.sqrt_n_mean_bias) > kSqrtNBiasMax);

    // and a well-specified run of the same shape does not trip the flag
    ExperimentConfig good = small_linear_config();
    good.replications = 40;
    const MonteCarloReport ok = run_linear_inference_experiment(good);
    REQUIRE(ok.aggregates.regime_violation.has_value());
    CHECK_FALSE(*ok.aggregates.regime_violation);
}

TEST_CASE("asymptotic linearity: the remainder shrinks as n grows") {
    ExperimentConfig cfg = small_linear_config();
    cfg.experiment = ExperimentKind::bias_rate;
    cfg.p = 40;
    cfg.s = 2;
    cfg.replications = 25;
    cfg.n_grid = {200, 800, 3200};
    const MonteCarloReport rep = run_bias_rate_experiment(cfg);
    REQUIRE(rep.grid.size() == 3);
    const double r0 = rep.grid[0].aggregates.median_sqrt_n_remainder;
    const double r1 = rep.grid[1].aggregates.median_sqrt_n_remainder;
    const double r2 = rep.grid[2].aggregates.median_sqrt_n_remainder;
    CHECK(r1 < r0);
    CHECK(r2 < r1);
}

TEST_CASE("local perturbation along the worst sub-direction keeps the limit law") {
    // correlated design, so the worst sub-direction is a genuine off-axis
    // vector; the shift of the z-law decays as n grows
    auto run_at = [](std::size_t n) {
        ExperimentConfig cfg;
        cfg.experiment = ExperimentKind::local_perturbation;
        cfg.model = ModelKind::linear_random_design;
        cfg.n = n;
        cfg.p = 30;
        cfg.s = 2;
        cfg.replications = 200;
        cfg.covariance.family = CovarianceFamily::toeplitz;
        cfg.covariance.rho = 0.5;
        cfg.target.kind = TargetKind::coordinate;
        cfg.target.j = 3;
        cfg.master_seed = 4242;
        PerturbationSpec ps;
        ps.kind = PerturbationSpec::Kind::worst;
        cfg.perturbation = ps;
        return run_local_perturbation_experiment(cfg);
    };
    const MonteCarloReport small_n = run_at(300);
    const MonteCarloReport large_n = run_at(1600);
    for (const auto* rep : {&small_n, &large_n}) {
        CHECK(rep->failures == 0);
        REQUIRE(rep->aggregates.perturbation_quadratic_form.has_value());
        CHECK(*rep->aggregates.perturbation_quadratic_form == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rep->aggregates.var_z > 0.6);
        CHECK(rep->aggregates.var_z < 1.4);
    }
    CHECK(std::abs(large_n.aggregates.mean_z) < 0.35);
    CHECK(std::abs(large_n.aggregates.mean_z) < std::abs(small_n.aggregates.mean_z));
}

TEST_CASE("ggm experiment: R=1 single-record report") {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::ggm;
    cfg.model = ModelKind::ggm;
    cfg.target.kind = TargetKind::precision_entry;
    cfg.target.i = 0;
    cfg.target.j = 1;
    cfg.n = 60;
    cfg.p = 8;
    cfg.replications = 1;
    const MonteCarloReport rep = run_ggm_experiment(cfg);
    REQUIRE(rep.records.size() == 1);
    CHECK(rep.aggregates.mean_estimate == rep.records[0].estimate);
    CHECK(rep.aggregates.mean_l1_error == rep.records[0].l1_error);
}

TEST_CASE("coverage MC standard error follows the nominal-level formula") {
    ExperimentConfig cfg = small_linear_config();
    cfg.replications = 60;
    const MonteCarloReport rep = run_linear_inference_experiment(cfg);
    CHECK(rep.aggregates.coverage_mc_se ==
          doctest::Approx(std::sqrt(0.95 * 0.05 / 60.0)).epsilon(1e-12));
}

TEST_CASE("validate_config: inconsistent configurations rejected") {
    ExperimentConfig cfg = small_linear_config();
    cfg.replications = 0;
    CHECK_THROWS_AS(validate_config(cfg), InvalidArgument);

    cfg = small_linear_config();
    cfg.s = cfg.p + 1;
    CHECK_THROWS_AS(validate_config(cfg), SparsityExceedsDim);

    cfg = small_linear_config();
    cfg.target.kind = TargetKind::precision_entry;
    CHECK_THROWS_AS(validate_config(cfg), InvalidArgument);

    cfg = small_linear_config();
    cfg.experiment = ExperimentKind::bias_rate;
    CHECK_THROWS_AS(validate_config(cfg), InvalidArgument); // missing n_grid

    cfg = small_linear_config();
    cfg.target.kind = TargetKind::functional;
    cfg.target.xi = DenseVector(3); // wrong length
    CHECK_THROWS_AS(validate_config(cfg), DimensionMismatch);

    cfg = small_linear_config();
    cfg.target.j = cfg.p;
    CHECK_THROWS_AS(validate_config(cfg), IndexOutOfRange);
}

TEST_CASE("config json round trip and strict parsing") {
    ExperimentConfig cfg = small_linear_config();
    cfg.target.kind = TargetKind::functional;
    cfg.target.xi = DenseVector(20);
    cfg.target.xi[0] = 1.0;
    cfg.target.xi[3] = -2.0;
    PerturbationSpec ps;
    ps.kind = PerturbationSpec::Kind::coordinate;
    ps.j = 4;
    cfg.perturbation = ps;
    const ordered_json j = config_to_json(cfg);
    const ExperimentConfig back = experiment_config_from_json(j);
    CHECK(config_to_json(back) == j);

    CHECK_THROWS_AS(parse_json_strict(R"({"a": 1, "a": 2})", "test"), ConfigParseError);
    CHECK_THROWS_AS(parse_json_strict(R"({"a": )", "test"), ConfigParseError);

    ordered_json bad = j;
    bad["nonsense_key"] = 1;
    CHECK_THROWS_AS(experiment_config_from_json(bad), ConfigParseError);

    // minimal config parses with defaults filled (R alias accepted)
    const ordered_json minimal = parse_json_strict(
        R"({"model": "linear_random_design", "n": 100, "p": 50, "s": 2, "R": 10,
            "master_seed": 7})",
        "minimal");
    const ExperimentConfig mc = experiment_config_from_json(minimal);
    CHECK(mc.replications == 10);
    CHECK(mc.master_seed == 7);
    CHECK(mc.level == doctest::Approx(0.95));
    CHECK(mc.lambda_constant == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("records csv export") {
    ExperimentConfig cfg = small_linear_config();
    cfg.replications = 5;
    const MonteCarloReport rep = run_linear_inference_experiment(cfg);
    const std::string path =
        (std::filesystem::temp_directory_path() / "hdinf_records_test.csv").string();
    write_records_csv(rep, path);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header.find("estimate") != std::string::npos);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 5);
}

#include "hdinf/report_json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hdinf {

namespace {

// SAX walker that rejects duplicate keys within any object.
class DuplicateKeyDetector : public nlohmann::json_sax<ordered_json> {
public:
    explicit DuplicateKeyDetector(std::string where) : where_(std::move(where)) {}

    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }

    bool start_object(std::size_t) override {
        stack_.emplace_back();
        return true;
    }
    bool key(string_t& k) override {
        if (!stack_.back().insert(k).second)
            throw ConfigParseError(where_ + ": duplicate key '" + k + "'");
        return true;
    }
    bool end_object() override {
        stack_.pop_back();
        return true;
    }
    bool start_array(std::size_t) override { return true; }
    bool end_array() override { return true; }

    bool parse_error(std::size_t pos, const std::string&,
                     const nlohmann::detail::exception& ex) override {
        throw ConfigParseError(where_ + " at byte " + std::to_string(pos) + ": " + ex.what());
    }

private:
    std::string where_;
    std::vector<std::set<std::string>> stack_;
};

ordered_json from_double(double x) {
    if (std::isnan(x)) return nullptr;
    return x;
}

ordered_json from_opt_bool(const std::optional<bool>& b) {
    if (!b) return nullptr;
    return *b;
}

ordered_json from_opt_double(const std::optional<double>& d) {
    if (!d) return nullptr;
    return from_double(*d);
}

ordered_json covariance_to_json(const CovarianceSpec& c) {
    ordered_json j;
    j["family"] = covariance_family_name(c.family);
    j["rho"] = c.rho;
    j["bandwidth"] = c.bandwidth;
    j["off_diag"] = c.off_diag;
    return j;
}

CovarianceSpec covariance_from_json(const ordered_json& j, const std::string& path) {
    StrictConfigReader o(j, path);
    CovarianceSpec c;
    c.family = covariance_family_from_name(o.get<std::string>("family", "identity"));
    c.rho = o.get<double>("rho", 0.0);
    c.bandwidth = o.get<std::size_t>("bandwidth", 0);
    c.off_diag = o.get<double>("off_diag", 0.0);
    o.finish();
    return c;
}

ordered_json target_to_json(const TargetSpec& t) {
    ordered_json j;
    switch (t.kind) {
        case TargetKind::coordinate:
            j["type"] = "coordinate";
            j["j"] = t.j;
            break;
        case TargetKind::functional:
            j["type"] = "functional";
            j["xi"] = t.xi.data;
            break;
        case TargetKind::precision_entry:
            j["type"] = "precision_entry";
            j["i"] = t.i;
            j["j"] = t.j;
            break;
    }
    return j;
}

TargetSpec target_from_json(const ordered_json& j, const std::string& path) {
    StrictConfigReader o(j, path);
    TargetSpec t;
    const std::string type = o.get<std::string>("type", "coordinate");
    if (type == "coordinate") {
        t.kind = TargetKind::coordinate;
        t.j = o.get<std::size_t>("j", 0);
    } else if (type == "functional") {
        t.kind = TargetKind::functional;
        t.xi.data = o.get<std::vector<double>>("xi", {});
    } else if (type == "precision_entry") {
        t.kind = TargetKind::precision_entry;
        t.i = o.get<std::size_t>("i", 0);
        t.j = o.get<std::size_t>("j", 0);
    } else {
        throw ConfigParseError(path + ".type: unknown target type '" + type + "'");
    }
    o.finish();
    return t;
}

ordered_json perturbation_to_json(const std::optional<PerturbationSpec>& p) {
    if (!p) return nullptr;
    ordered_json j;
    switch (p->kind) {
        case PerturbationSpec::Kind::worst: j["direction"] = "worst"; break;
        case PerturbationSpec::Kind::coordinate:
            j["direction"] = "coordinate";
            j["j"] = p->j;
            break;
        case PerturbationSpec::Kind::custom:
            j["direction"] = "custom";
            j["h"] = p->h.data;
            break;
    }
    return j;
}

PerturbationSpec perturbation_from_json(const ordered_json& j, const std::string& path) {
    StrictConfigReader o(j, path);
    PerturbationSpec p;
    const std::string dir = o.get<std::string>("direction", "worst");
    if (dir == "worst") {
        p.kind = PerturbationSpec::Kind::worst;
    } else if (dir == "coordinate") {
        p.kind = PerturbationSpec::Kind::coordinate;
        p.j = o.get<std::size_t>("j", 0);
    } else if (dir == "custom") {
        p.kind = PerturbationSpec::Kind::custom;
        p.h.data = o.get<std::vector<double>>("h", {});
    } else {
        throw ConfigParseError(path + ".direction: unknown direction '" + dir + "'");
    }
    o.finish();
    return p;
}

ordered_json record_to_json(const ReplicateRecord& r) {
    ordered_json j;
    j["index"] = r.index;
    j["ok"] = r.ok;
    j["error"] = r.error;
    j["estimate"] = from_double(r.estimate);
    j["lasso_estimate"] = from_double(r.lasso_estimate);
    j["variance_estimate"] = from_double(r.variance_estimate);
    j["covered"] = r.covered;
    j["z"] = from_double(r.z);
    j["l1_error"] = from_double(r.l1_error);
    j["support_size"] = r.support_size;
    j["nodewise_sparsity"] = r.nodewise_sparsity;
    j["tau_sq_error"] = from_double(r.tau_sq_error);
    j["sqrt_n_remainder"] = from_double(r.sqrt_n_remainder);
    return j;
}

ordered_json aggregates_to_json(const Aggregates& a) {
    ordered_json j;
    j["replicates_ok"] = a.replicates_ok;
    j["truth"] = from_double(a.truth);
    j["mean_estimate"] = from_double(a.mean_estimate);
    j["mean_bias"] = from_double(a.mean_bias);
    j["sqrt_n_mean_bias"] = from_double(a.sqrt_n_mean_bias);
    j["bias_mc_se"] = from_double(a.bias_mc_se);
    j["sqrt_n_bias_mc_se"] = from_double(a.sqrt_n_bias_mc_se);
    j["n_times_variance"] = from_double(a.n_times_variance);
    j["bound_per_sample"] = from_double(a.bound_per_sample);
    j["variance_ratio"] = from_double(a.variance_ratio);
    j["coverage"] = from_double(a.coverage);
    j["coverage_mc_se"] = from_double(a.coverage_mc_se);
    j["mean_z"] = from_double(a.mean_z);
    j["var_z"] = from_double(a.var_z);
    j["ks"] = from_double(a.ks);
    j["skewness"] = from_double(a.skewness);
    j["kurtosis_excess"] = from_double(a.kurtosis_excess);
    j["mean_l1_error"] = from_double(a.mean_l1_error);
    j["mean_l1_error_sq"] = from_double(a.mean_l1_error_sq);
    j["mean_lasso_estimate"] = from_double(a.mean_lasso_estimate);
    j["sqrt_n_lasso_bias"] = from_double(a.sqrt_n_lasso_bias);
    j["mean_support_size"] = from_double(a.mean_support_size);
    j["mean_nodewise_sparsity"] = from_double(a.mean_nodewise_sparsity);
    j["mean_tau_sq_error"] = from_double(a.mean_tau_sq_error);
    j["median_sqrt_n_remainder"] = from_double(a.median_sqrt_n_remainder);
    j["zero_fit_fraction"] = from_double(a.zero_fit_fraction);
    j["lambda"] = from_double(a.lambda);
    j["lambda_j"] = from_double(a.lambda_j);
    j["within_variance_band"] = from_opt_bool(a.within_variance_band);
    j["within_coverage_band"] = from_opt_bool(a.within_coverage_band);
    j["within_bias_band"] = from_opt_bool(a.within_bias_band);
    j["regime_violation"] = from_opt_bool(a.regime_violation);
    j["perturbation_quadratic_form"] = from_opt_double(a.perturbation_quadratic_form);
    j["perturbation_admissible"] = from_opt_bool(a.perturbation_admissible);
    return j;
}

} // namespace

StrictConfigReader::StrictConfigReader(const ordered_json& obj, std::string path)
    : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigParseError(path_ + ": expected a JSON object");
}

bool StrictConfigReader::has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
}

const ordered_json& StrictConfigReader::raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
}

void StrictConfigReader::finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
        if (!seen_.count(it.key()))
            throw ConfigParseError(path_ + ": unknown key '" + it.key() + "'");
    }
}

ordered_json parse_json_strict(const std::string& text, const std::string& where) {
    DuplicateKeyDetector detector(where);
    // first pass rejects duplicates and syntax errors with location context
    ordered_json::sax_parse(text, &detector);
    return ordered_json::parse(text);
}

ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json_strict(buf.str(), path);
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["experiment"] = experiment_kind_name(cfg.experiment);
    j["model"] = model_kind_name(cfg.model);
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["s"] = cfg.s;
    j["replications"] = cfg.replications;
    j["signal"] = cfg.signal;
    j["sigma_noise"] = cfg.sigma_noise;
    j["covariance"] = covariance_to_json(cfg.covariance);
    j["lambda_constant"] = cfg.lambda_constant;
    j["lambda_j_constant"] = cfg.lambda_j_constant;
    j["target"] = target_to_json(cfg.target);
    j["perturbation"] = perturbation_to_json(cfg.perturbation);
    j["level"] = cfg.level;
    j["master_seed"] = cfg.master_seed;
    j["variance_source"] = variance_source_name(cfg.variance_source);
    j["d_n"] = cfg.d_n;
    j["n_grid"] = cfg.n_grid;
    j["s_grid"] = cfg.s_grid;
    return j;
}

ExperimentConfig experiment_config_from_json(const ordered_json& j) {
    StrictConfigReader o(j, "config");
    ExperimentConfig cfg;
    cfg.experiment = experiment_kind_from_name(
        o.get<std::string>("experiment", "linear_inference"));
    cfg.model = model_kind_from_name(o.get<std::string>("model", "linear_random_design"));
    cfg.n = o.get<std::size_t>("n", 100);
    cfg.p = o.get<std::size_t>("p", 50);
    cfg.s = o.get<std::size_t>("s", 2);
    if (o.has("replications")) {
        cfg.replications = o.get<std::size_t>("replications", 10);
    } else {
        cfg.replications = o.get<std::size_t>("R", 10); // accepted alias
    }
    cfg.signal = o.get<double>("signal", 1.0);
    cfg.sigma_noise = o.get<double>("sigma_noise", 1.0);
    if (o.has("covariance"))
        cfg.covariance = covariance_from_json(o.raw("covariance"), "config.covariance");
    cfg.lambda_constant = o.get<double>("lambda_constant", cfg.lambda_constant);
    cfg.lambda_j_constant = o.get<double>("lambda_j_constant", cfg.lambda_j_constant);
    if (o.has("target")) cfg.target = target_from_json(o.raw("target"), "config.target");
    if (cfg.model == ModelKind::ggm && !o.has("target"))
        cfg.target.kind = TargetKind::precision_entry;
    if (o.has("perturbation") && !o.raw("perturbation").is_null())
        cfg.perturbation = perturbation_from_json(o.raw("perturbation"), "config.perturbation");
    cfg.level = o.get<double>("level", 0.95);
    cfg.master_seed = o.get<std::uint64_t>("master_seed", 1);
    cfg.parallel_workers = o.get<unsigned>("parallel_workers", 1);
    cfg.variance_source = variance_source_from_name(
        o.get<std::string>("variance_source", "plug_in_theta_diag"));
    cfg.d_n = o.get<std::size_t>("d_n", 0);
    cfg.n_grid = o.get<std::vector<std::size_t>>("n_grid", {});
    cfg.s_grid = o.get<std::vector<std::size_t>>("s_grid", {});
    o.finish();
    return cfg;
}

const std::vector<ConfigKeyDoc>& experiment_config_keys() {
    static const std::vector<ConfigKeyDoc> keys = {
        {"experiment", "string", "linear_inference",
         "one of linear_inference, bias_rate, oracle_inequality, local_perturbation, ggm"},
        {"model", "string", "linear_random_design",
         "one of linear_random_design, linear_fixed_design, ggm"},
        {"n", "int", "100", "sample size"},
        {"p", "int", "50", "dimension"},
        {"s", "int", "2", "sparsity of beta0"},
        {"replications", "int", "10", "Monte Carlo replicates (alias: R)"},
        {"R", "int", "10", "alias for replications"},
        {"signal", "real", "1.0", "l2 norm of beta0"},
        {"sigma_noise", "real", "1.0", "noise standard deviation"},
        {"covariance", "object", "{family: identity}",
         "family: identity|toeplitz|equicorrelation|banded_precision, rho, bandwidth, off_diag"},
        {"lambda_constant", "real", "1.41421356", "c in lambda = c sqrt(log p / n)"},
        {"lambda_j_constant", "real", "1.41421356", "c in the nodewise lambda_j"},
        {"target", "object", "{type: coordinate, j: 0}",
         "type: coordinate|functional|precision_entry with j, xi, or (i, j)"},
        {"perturbation", "object|null", "null",
         "direction: worst|coordinate|custom with j or h; used by local_perturbation"},
        {"level", "real", "0.95", "confidence level"},
        {"master_seed", "int", "1", "master seed; replicate r uses a derived stream"},
        {"parallel_workers", "int", "1", "worker threads (does not change results)"},
        {"variance_source", "string", "plug_in_theta_diag",
         "plug_in_theta_diag | sandwich | oracle"},
        {"d_n", "int", "0", "sparsity budget for perturbation truncation; 0 = p"},
        {"n_grid", "int array", "[]", "sample sizes for bias_rate"},
        {"s_grid", "int array", "[]", "sparsities for oracle_inequality"},
    };
    return keys;
}

namespace {

ordered_json grid_point_to_json(const GridPointReport& g) {
    ordered_json j;
    j["key"] = g.key;
    j["value"] = g.value;
    ordered_json recs = ordered_json::array();
    for (const auto& r : g.records) recs.push_back(record_to_json(r));
    j["records"] = std::move(recs);
    j["aggregates"] = aggregates_to_json(g.aggregates);
    j["failures"] = g.failures;
    return j;
}

ordered_json bias_trend_to_json(const BiasTrend& t) {
    ordered_json points = ordered_json::array();
    for (const auto& p : t.points) {
        ordered_json j;
        j["n"] = p.n;
        j["sqrt_n_abs_bias"] = from_double(p.sqrt_n_abs_bias);
        j["mc_se"] = from_double(p.mc_se);
        j["sqrt_n_abs_bias_lasso"] = from_double(p.sqrt_n_abs_bias_lasso);
        j["lasso_to_debias_ratio"] = from_double(p.lasso_to_debias_ratio);
        points.push_back(std::move(j));
    }
    ordered_json j;
    j["points"] = std::move(points);
    j["nonincreasing_within_2se"] = t.nonincreasing_within_2se;
    return j;
}

ordered_json oracle_trend_to_json(const OracleTrend& t) {
    ordered_json points = ordered_json::array();
    for (const auto& p : t.points) {
        ordered_json j;
        j["s"] = p.s;
        j["lambda"] = from_double(p.lambda);
        j["s_lambda"] = from_double(p.s_lambda);
        j["mean_l1"] = from_double(p.mean_l1);
        j["ratio"] = from_double(p.ratio);
        j["k2_ratio"] = from_double(p.k2_ratio);
        j["zero_fit_fraction"] = from_double(p.zero_fit_fraction);
        points.push_back(std::move(j));
    }
    ordered_json j;
    j["points"] = std::move(points);
    j["ratio_max_over_min"] = from_double(t.ratio_max_over_min);
    j["k2_ratio_max_over_min"] = from_double(t.k2_ratio_max_over_min);
    j["slope_l1_vs_s_lambda"] = from_double(t.slope_l1_vs_s_lambda);
    return j;
}

} // namespace

ordered_json report_to_json(const MonteCarloReport& report) {
    ordered_json j;
    j["config"] = config_to_json(report.config);
    ordered_json recs = ordered_json::array();
    for (const auto& r : report.records) recs.push_back(record_to_json(r));
    j["records"] = std::move(recs);
    j["aggregates"] = aggregates_to_json(report.aggregates);
    ordered_json grid = ordered_json::array();
    for (const auto& g : report.grid) grid.push_back(grid_point_to_json(g));
    j["grid"] = std::move(grid);
    j["bias_trend"] = report.bias_trend ? bias_trend_to_json(*report.bias_trend)
                                        : ordered_json(nullptr);
    j["oracle_trend"] = report.oracle_trend ? oracle_trend_to_json(*report.oracle_trend)
                                            : ordered_json(nullptr);
    j["failures"] = report.failures;
    // bounds hold asymptotically with unquantified o(1) terms; the Monte Carlo
    // evidence is at the configured (n, beta0) points, not uniform over the
    // parameter set
    j["scope_note"] =
        "Monte Carlo checks evaluate bias/variance/coverage at the configured "
        "(n, parameter) points; tolerance bands absorb the asymptotic o(1) terms.";
    j["wall_ms"] = report.wall_ms;
    j["workers"] = report.workers;
    return j;
}

ordered_json canonical_report_json(const MonteCarloReport& report) {
    ordered_json j = report_to_json(report);
    j.erase("wall_ms");
    j.erase("workers");
    return j;
}

std::string canonical_report_string(const MonteCarloReport& report) {
    return canonical_report_json(report).dump(2) + "\n";
}

void write_records_csv(const MonteCarloReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "grid_key,grid_value,index,ok,error,estimate,lasso_estimate,variance_estimate,"
           "covered,z,l1_error,support_size,nodewise_sparsity,tau_sq_error,sqrt_n_remainder\n";
    auto emit = [&](const std::string& key, std::size_t value, const ReplicateRecord& r) {
        char buf[64];
        auto num = [&buf](double x) -> std::string {
            if (std::isnan(x)) return "";
            std::snprintf(buf, sizeof(buf), "%.17g", x);
            return buf;
        };
        out << key << ',' << (key.empty() ? "" : std::to_string(value)) << ',' << r.index << ','
            << (r.ok ? 1 : 0) << ',' << r.error << ',' << num(r.estimate) << ','
            << num(r.lasso_estimate) << ',' << num(r.variance_estimate) << ','
            << (r.covered ? 1 : 0) << ',' << num(r.z) << ',' << num(r.l1_error) << ','
            << r.support_size << ',' << r.nodewise_sparsity << ',' << num(r.tau_sq_error) << ','
            << num(r.sqrt_n_remainder) << '\n';
    };
    for (const auto& r : report.records) emit("", 0, r);
    for (const auto& g : report.grid)
        for (const auto& r : g.records) emit(g.key, g.value, r);
    if (!out) throw IoError("write failed: " + path);
}

} // namespace hdinf

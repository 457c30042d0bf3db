// Command-line front end: estimation, bounds and Monte Carlo experiments
// driven by JSON configs, with CSV matrix I/O.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdinf/bounds.hpp"
#include "hdinf/datagen.hpp"
#include "hdinf/gauss.hpp"
#include "hdinf/inference.hpp"
#include "hdinf/lasso.hpp"
#include "hdinf/linalg.hpp"
#include "hdinf/nodewise.hpp"
#include "hdinf/report_json.hpp"
#include "hdinf/simharness.hpp"

namespace {

using hdinf::ordered_json;

constexpr std::size_t kInlineLimit = 50; // vectors/matrices beyond this are summarized

struct KeyDoc {
    const char* key;
    const char* def;
    const char* doc;
};

std::string footer_from(const std::vector<KeyDoc>& keys) {
    std::string s = "Config keys (JSON; unknown keys are rejected):\n";
    for (const auto& k : keys) {
        s += "  ";
        s += k.key;
        s += "  (default: ";
        s += k.def;
        s += ") - ";
        s += k.doc;
        s += "\n";
    }
    return s;
}

std::string experiment_footer() {
    std::string s = "Config keys (JSON; unknown keys are rejected):\n";
    for (const auto& k : hdinf::experiment_config_keys()) {
        s += "  " + k.key + "  (default: " + k.default_value + ") - " + k.doc + "\n";
    }
    return s;
}

const std::vector<KeyDoc>& estimate_keys() {
    static const std::vector<KeyDoc> keys = {
        {"x_csv", "required", "design matrix CSV (n rows, p columns)"},
        {"y_csv", "required", "response vector CSV (n rows)"},
        {"lambda", "c sqrt(log p/n)", "lasso tuning parameter; overrides lambda_constant"},
        {"lambda_constant", "1.41421356", "c in the default lambda"},
        {"lambda_j", "c_j sqrt(log p/n)", "nodewise tuning parameter"},
        {"lambda_j_constant", "1.41421356", "c_j in the default lambda_j"},
        {"theta", "nodewise", "surrogate inverse: nodewise | exact_inverse (needs p < n)"},
        {"target", "null", "optional {type: coordinate|functional, j or xi}"},
        {"sigma_noise", "1.0", "known noise standard deviation"},
        {"level", "0.95", "confidence level"},
        {"variance_source", "plug_in_theta_diag", "plug_in_theta_diag | sandwich"},
    };
    return keys;
}

const std::vector<KeyDoc>& nodewise_keys() {
    static const std::vector<KeyDoc> keys = {
        {"x_csv", "required", "design matrix CSV"},
        {"lambda_j", "c_j sqrt(log p/n)", "nodewise tuning parameter"},
        {"lambda_j_constant", "1.41421356", "c_j in the default lambda_j"},
        {"theta_csv", "none", "optional path: write Theta_hat as CSV"},
    };
    return keys;
}

const std::vector<KeyDoc>& ggm_keys() {
    static const std::vector<KeyDoc> keys = {
        {"x_csv", "required", "observation matrix CSV (rows ~ N(0, Sigma0))"},
        {"lambda_j", "c_j sqrt(log p/n)", "nodewise tuning parameter"},
        {"lambda_j_constant", "1.41421356", "c_j in the default lambda_j"},
        {"entry", "required", "{i, j}: precision entry for the confidence interval"},
        {"level", "0.95", "confidence level"},
        {"t_csv", "none", "optional path: write T_hat as CSV"},
    };
    return keys;
}

const std::vector<KeyDoc>& bound_keys() {
    static const std::vector<KeyDoc> keys = {
        {"kind", "required",
         "cr_linear | cr_fixed | ggm | lecam | minimax | compatibility"},
        {"covariance", "none", "covariance spec used to build Sigma0/Theta0 (needs p)"},
        {"p", "0", "dimension for covariance-spec inputs and minimax"},
        {"theta0_csv", "none", "Theta0 from CSV (cr_linear, ggm)"},
        {"sigma_csv", "none", "Sigma from CSV (compatibility)"},
        {"fisher_csv", "none", "Fisher information from CSV (lecam)"},
        {"x_csv", "none", "design CSV (cr_fixed; compatibility uses its Gram)"},
        {"xi", "unit 0", "contrast: {unit: j} or array (cr_linear, ggm)"},
        {"xi2", "unit 0", "second contrast for ggm"},
        {"g_dot", "unit 0", "gradient for lecam"},
        {"j", "0", "coordinate for cr_fixed"},
        {"lambda_j", "c_j sqrt(log p/n)", "nodewise tuning for cr_fixed"},
        {"lambda_j_constant", "1.41421356", "c_j in the default lambda_j"},
        {"n", "100", "sample size entering bound = bound_per_sample / n"},
        {"s", "0", "sparsity for minimax"},
        {"sigma_noise", "1.0", "noise scale for cr_linear"},
    };
    return keys;
}

const std::vector<KeyDoc>& dataset_keys() {
    static const std::vector<KeyDoc> keys = {
        {"n", "100", "sample size"},
        {"p", "50", "dimension"},
        {"s", "2", "sparsity of beta0"},
        {"signal", "1.0", "l2 norm of beta0"},
        {"sigma_noise", "1.0", "noise standard deviation"},
        {"covariance", "{family: identity}", "covariance spec"},
        {"seed", "1", "dataset seed"},
    };
    return keys;
}

ordered_json vector_to_json(const hdinf::DenseVector& v) {
    if (v.size() <= kInlineLimit) return v.data;
    ordered_json j;
    j["len"] = v.size();
    j["norm1"] = hdinf::norm1(v);
    j["norm2"] = hdinf::norm2(v);
    j["support"] = hdinf::norm0(v);
    return j;
}

ordered_json matrix_to_json(const hdinf::DenseMatrix& m) {
    if (m.rows <= kInlineLimit && m.cols <= kInlineLimit) {
        ordered_json rows = ordered_json::array();
        for (std::size_t i = 0; i < m.rows; ++i) {
            ordered_json row = ordered_json::array();
            for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
            rows.push_back(std::move(row));
        }
        return rows;
    }
    ordered_json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    double sup = 0.0;
    std::size_t nnz = 0;
    for (double x : m.data) {
        sup = std::max(sup, std::abs(x));
        nnz += (x != 0.0);
    }
    j["norm_inf"] = sup;
    j["support"] = nnz;
    return j;
}

ordered_json estimate_block(const hdinf::DebiasedEstimate& e) {
    ordered_json j;
    j["value"] = e.value;
    j["variance"] = e.variance;
    j["std_error"] = e.std_error;
    j["ci_lo"] = e.ci_lo;
    j["ci_hi"] = e.ci_hi;
    j["level"] = e.level;
    j["variance_source"] = hdinf::variance_source_name(e.variance_source);
    return j;
}

// ---- config plumbing -------------------------------------------------------

void apply_override(ordered_json& cfg, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw hdinf::ConfigParseError("--set expects key=value, got '" + spec + "'");
    const std::string path = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);

    ordered_json parsed;
    try {
        parsed = ordered_json::parse(value);
    } catch (const nlohmann::detail::exception&) {
        parsed = value; // plain string
    }

    ordered_json* node = &cfg;
    std::size_t start = 0;
    for (;;) {
        const auto dotpos = path.find('.', start);
        const std::string key = path.substr(start, dotpos - start);
        if (key.empty()) throw hdinf::ConfigParseError("--set: empty key in '" + spec + "'");
        if (dotpos == std::string::npos) {
            (*node)[key] = parsed;
            break;
        }
        node = &(*node)[key];
        start = dotpos + 1;
    }
}

ordered_json load_config(const std::string& path, const std::vector<std::string>& overrides) {
    ordered_json cfg = hdinf::load_json_file(path);
    for (const auto& o : overrides) apply_override(cfg, o);
    return cfg;
}

void write_output(const ordered_json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw hdinf::IoError("cannot open " + out_path + " for writing");
    out << text;
    if (!out) throw hdinf::IoError("write failed: " + out_path);
}

hdinf::DenseVector contrast_from_json(const ordered_json& j, std::size_t p,
                                      const std::string& what) {
    if (j.is_array()) {
        hdinf::DenseVector v;
        v.data = j.get<std::vector<double>>();
        if (v.size() != p)
            throw hdinf::ConfigParseError(what + ": expected length " + std::to_string(p));
        return v;
    }
    if (j.is_object() && j.contains("unit"))
        return hdinf::DenseVector::unit(p, j.at("unit").get<std::size_t>());
    throw hdinf::ConfigParseError(what + ": expected an array or {unit: j}");
}

hdinf::CovarianceSpec covariance_spec_from(hdinf::StrictConfigReader& o, std::size_t p) {
    hdinf::CovarianceSpec spec;
    if (o.has("covariance")) {
        hdinf::StrictConfigReader c(o.raw("covariance"), o.path() + ".covariance");
        spec.family = hdinf::covariance_family_from_name(c.get<std::string>("family", "identity"));
        spec.rho = c.get<double>("rho", 0.0);
        spec.bandwidth = c.get<std::size_t>("bandwidth", 0);
        spec.off_diag = c.get<double>("off_diag", 0.0);
        c.finish();
    }
    spec.dim = p;
    return spec;
}

// ---- subcommands ------------------------------------------------------------

int run_estimate(const ordered_json& cfg_json, const std::string& out_path) {
    hdinf::StrictConfigReader o(cfg_json, "config");
    const std::string x_csv = o.get<std::string>("x_csv", "");
    const std::string y_csv = o.get<std::string>("y_csv", "");
    if (x_csv.empty() || y_csv.empty())
        throw hdinf::ConfigParseError("config: x_csv and y_csv are required");
    const double lambda_constant = o.get<double>("lambda_constant", 1.4142135623730951);
    const double lambda_j_constant = o.get<double>("lambda_j_constant", 1.4142135623730951);
    const bool has_lambda = o.has("lambda");
    const double lambda_given = o.get<double>("lambda", 0.0);
    const bool has_lambda_j = o.has("lambda_j");
    const double lambda_j_given = o.get<double>("lambda_j", 0.0);
    const std::string theta_mode = o.get<std::string>("theta", "nodewise");
    const double sigma_noise = o.get<double>("sigma_noise", 1.0);
    const double level = o.get<double>("level", 0.95);
    const hdinf::VarianceSource source = hdinf::variance_source_from_name(
        o.get<std::string>("variance_source", "plug_in_theta_diag"));
    ordered_json target_json;
    if (o.has("target")) target_json = o.raw("target");
    o.finish();

    const hdinf::DenseMatrix x = hdinf::read_matrix_csv(x_csv);
    const hdinf::DenseVector y = hdinf::read_vector_csv(y_csv);
    const std::size_t n = x.rows, p = x.cols;
    const double lambda = has_lambda ? lambda_given : hdinf::default_lambda(n, p, lambda_constant);
    const double lambda_j =
        has_lambda_j ? lambda_j_given : hdinf::default_lambda(n, p, lambda_j_constant);

    const hdinf::LassoFit lasso = hdinf::fit_lasso(x, y, lambda);
    const hdinf::DenseMatrix sigma_hat = hdinf::gram(x);

    hdinf::DenseMatrix theta_hat;
    ordered_json certificate = nullptr;
    if (theta_mode == "nodewise") {
        const hdinf::NodewiseFit nw = hdinf::fit_nodewise_gram(sigma_hat, lambda_j);
        theta_hat = nw.theta_hat;
        certificate = nw.max_surrogate_violation;
    } else if (theta_mode == "exact_inverse") {
        theta_hat = hdinf::invert_spd(sigma_hat);
    } else {
        throw hdinf::ConfigParseError("config.theta: nodewise or exact_inverse");
    }

    const hdinf::DenseVector b = hdinf::desparsified_lasso(lasso.beta_hat, theta_hat, x, y);

    ordered_json out;
    out["n"] = n;
    out["p"] = p;
    out["lambda"] = lambda;
    out["lambda_j"] = theta_mode == "nodewise" ? ordered_json(lambda_j) : ordered_json(nullptr);
    out["theta"] = theta_mode;
    out["b_hat"] = b.data;
    ordered_json coords = ordered_json::array();
    for (std::size_t j = 0; j < p; ++j) {
        const hdinf::DenseVector ej = hdinf::DenseVector::unit(p, j);
        const double var =
            hdinf::variance_estimate_linear(ej, theta_hat, sigma_hat, n, sigma_noise, source);
        ordered_json blk = estimate_block(hdinf::make_debiased_estimate(b[j], var, level, source));
        blk["j"] = j;
        coords.push_back(std::move(blk));
    }
    out["coordinates"] = std::move(coords);

    if (!target_json.is_null()) {
        hdinf::StrictConfigReader t(target_json, "config.target");
        const std::string type = t.get<std::string>("type", "coordinate");
        if (type == "functional") {
            if (!t.has("xi")) throw hdinf::ConfigParseError("config.target: xi required");
            const hdinf::DenseVector xi = contrast_from_json(t.raw("xi"), p, "target.xi");
            const double value = hdinf::dot(xi, b);
            const double var =
                hdinf::variance_estimate_linear(xi, theta_hat, sigma_hat, n, sigma_noise, source);
            ordered_json blk =
                estimate_block(hdinf::make_debiased_estimate(value, var, level, source));
            blk["xi_l1_norm"] = hdinf::norm1(xi);
            out["target"] = std::move(blk);
        } else if (type == "coordinate") {
            const std::size_t j = t.get<std::size_t>("j", 0);
            if (j >= p) throw hdinf::IndexOutOfRange("target.j out of range");
            const hdinf::DenseVector ej = hdinf::DenseVector::unit(p, j);
            const double var =
                hdinf::variance_estimate_linear(ej, theta_hat, sigma_hat, n, sigma_noise, source);
            ordered_json blk =
                estimate_block(hdinf::make_debiased_estimate(b[j], var, level, source));
            blk["j"] = j;
            out["target"] = std::move(blk);
        } else {
            throw hdinf::ConfigParseError("config.target.type: coordinate or functional");
        }
        t.finish();
    } else {
        out["target"] = nullptr;
    }

    ordered_json lj;
    lj["objective"] = lasso.objective;
    lj["sweeps_used"] = lasso.sweeps_used;
    lj["converged"] = lasso.converged;
    lj["kkt_violation"] = lasso.kkt_violation;
    lj["support_size"] = hdinf::norm0(lasso.beta_hat);
    out["lasso"] = std::move(lj);
    out["max_surrogate_violation"] = certificate;

    write_output(out, out_path);
    return 0;
}

int run_nodewise(const ordered_json& cfg_json, const std::string& out_path,
                 unsigned workers) {
    hdinf::StrictConfigReader o(cfg_json, "config");
    const std::string x_csv = o.get<std::string>("x_csv", "");
    if (x_csv.empty()) throw hdinf::ConfigParseError("config: x_csv is required");
    const double lambda_j_constant = o.get<double>("lambda_j_constant", 1.4142135623730951);
    const bool has_lambda_j = o.has("lambda_j");
    const double lambda_j_given = o.get<double>("lambda_j", 0.0);
    const std::string theta_csv = o.get<std::string>("theta_csv", "");
    o.finish();

    const hdinf::DenseMatrix x = hdinf::read_matrix_csv(x_csv);
    const std::size_t n = x.rows, p = x.cols;
    const double lambda_j =
        has_lambda_j ? lambda_j_given : hdinf::default_lambda(n, p, lambda_j_constant);
    const hdinf::DenseMatrix sigma_hat = hdinf::gram(x);
    const hdinf::NodewiseFit nw = hdinf::fit_nodewise_gram(sigma_hat, lambda_j, {}, workers);

    ordered_json out;
    out["n"] = n;
    out["p"] = p;
    out["lambda_j"] = lambda_j;
    ordered_json cols = ordered_json::array();
    for (const auto& c : nw.columns) {
        ordered_json cj;
        cj["j"] = c.j;
        cj["tau_sq"] = c.tau_sq;
        cj["lambda_j"] = c.lambda_j;
        cj["sparsity"] = c.sparsity;
        cj["converged"] = c.converged;
        cj["kkt_violation"] = c.kkt_violation;
        cols.push_back(std::move(cj));
    }
    out["columns"] = std::move(cols);
    out["max_surrogate_violation"] = nw.max_surrogate_violation;
    out["surrogate_violation_signed"] = hdinf::surrogate_inverse_violation(sigma_hat, nw);
    out["theta_hat"] = matrix_to_json(nw.theta_hat);
    if (!theta_csv.empty()) {
        hdinf::write_matrix_csv(nw.theta_hat, theta_csv);
        out["theta_csv"] = theta_csv;
    }
    write_output(out, out_path);
    return 0;
}

int run_ggm_cmd(const ordered_json& cfg_json, const std::string& out_path,
                unsigned workers) {
    hdinf::StrictConfigReader o(cfg_json, "config");
    const std::string x_csv = o.get<std::string>("x_csv", "");
    if (x_csv.empty()) throw hdinf::ConfigParseError("config: x_csv is required");
    const double lambda_j_constant = o.get<double>("lambda_j_constant", 1.4142135623730951);
    const bool has_lambda_j = o.has("lambda_j");
    const double lambda_j_given = o.get<double>("lambda_j", 0.0);
    const double level = o.get<double>("level", 0.95);
    const std::string t_csv = o.get<std::string>("t_csv", "");
    if (!o.has("entry")) throw hdinf::ConfigParseError("config: entry {i, j} is required");
    hdinf::StrictConfigReader e(o.raw("entry"), "config.entry");
    const std::size_t ei = e.get<std::size_t>("i", 0);
    const std::size_t ej = e.get<std::size_t>("j", 0);
    e.finish();
    o.finish();

    const hdinf::DenseMatrix x = hdinf::read_matrix_csv(x_csv);
    const std::size_t n = x.rows, p = x.cols;
    const double lambda_j =
        has_lambda_j ? lambda_j_given : hdinf::default_lambda(n, p, lambda_j_constant);
    const hdinf::DenseMatrix sigma_hat = hdinf::gram(x);
    const hdinf::NodewiseFit nw = hdinf::fit_nodewise_gram(sigma_hat, lambda_j, {}, workers);
    const hdinf::DenseMatrix t_hat = hdinf::desparsified_precision(nw.theta_hat, sigma_hat);
    const hdinf::DebiasedEstimate est =
        hdinf::precision_entry_inference(t_hat, nw.theta_hat, ei, ej, n, level);

    ordered_json out;
    out["n"] = n;
    out["p"] = p;
    out["lambda_j"] = lambda_j;
    ordered_json entry = estimate_block(est);
    entry["i"] = ei;
    entry["j"] = ej;
    out["entry"] = std::move(entry);
    out["max_surrogate_violation"] = nw.max_surrogate_violation;
    out["t_hat"] = matrix_to_json(t_hat);
    if (!t_csv.empty()) {
        hdinf::write_matrix_csv(t_hat, t_csv);
        out["t_csv"] = t_csv;
    }
    write_output(out, out_path);
    return 0;
}

ordered_json bound_to_json(const hdinf::EfficiencyBound& b) {
    ordered_json j;
    j["bound_per_sample"] = b.bound_per_sample;
    j["bound"] = b.bound;
    j["n"] = b.n;
    j["direction"] = b.direction.size() > 0 ? vector_to_json(b.direction) : ordered_json(nullptr);
    j["direction_matrix"] =
        b.direction_matrix ? matrix_to_json(*b.direction_matrix) : ordered_json(nullptr);
    j["admissible"] = b.admissible ? ordered_json(*b.admissible) : ordered_json(nullptr);
    return j;
}

int run_bound(const ordered_json& cfg_json, const std::string& out_path) {
    hdinf::StrictConfigReader o(cfg_json, "config");
    const std::string kind = o.get<std::string>("kind", "");
    const std::size_t p = o.get<std::size_t>("p", 0);
    const std::size_t n = o.get<std::size_t>("n", 100);
    const double sigma_noise = o.get<double>("sigma_noise", 1.0);

    ordered_json out;
    out["kind"] = kind;

    auto theta0_source = [&](const char* csv_key) {
        if (o.has(csv_key)) return hdinf::read_matrix_csv(o.get<std::string>(csv_key, ""));
        if (p == 0)
            throw hdinf::ConfigParseError("config: p is required with a covariance spec");
        auto [sigma0, theta0] = hdinf::build_covariance(covariance_spec_from(o, p));
        (void)sigma0;
        return theta0;
    };

    if (kind == "cr_linear") {
        const hdinf::DenseMatrix theta0 = theta0_source("theta0_csv");
        const hdinf::DenseVector xi = o.has("xi")
            ? contrast_from_json(o.raw("xi"), theta0.rows, "config.xi")
            : hdinf::DenseVector::unit(theta0.rows, 0);
        out["bound"] = bound_to_json(hdinf::cr_bound_linear(theta0, xi, n, sigma_noise));
    } else if (kind == "cr_fixed") {
        const std::string x_csv = o.get<std::string>("x_csv", "");
        if (x_csv.empty()) throw hdinf::ConfigParseError("config: x_csv required for cr_fixed");
        const hdinf::DenseMatrix x = hdinf::read_matrix_csv(x_csv);
        const std::size_t j = o.get<std::size_t>("j", 0);
        const double c = o.get<double>("lambda_j_constant", 1.4142135623730951);
        const double lambda_j = o.has("lambda_j")
            ? o.get<double>("lambda_j", 0.0)
            : hdinf::default_lambda(x.rows, x.cols, c);
        out["bound"] = bound_to_json(hdinf::cr_bound_fixed(x, j, lambda_j, {}, x.rows));
    } else if (kind == "ggm") {
        const hdinf::DenseMatrix theta0 = theta0_source("theta0_csv");
        const hdinf::DenseVector xi1 = o.has("xi")
            ? contrast_from_json(o.raw("xi"), theta0.rows, "config.xi")
            : hdinf::DenseVector::unit(theta0.rows, 0);
        const hdinf::DenseVector xi2 = o.has("xi2")
            ? contrast_from_json(o.raw("xi2"), theta0.rows, "config.xi2")
            : hdinf::DenseVector::unit(theta0.rows, 0);
        out["bound"] = bound_to_json(hdinf::ggm_bound(theta0, xi1, xi2, n));
    } else if (kind == "lecam") {
        hdinf::DenseMatrix fisher;
        if (o.has("fisher_csv")) {
            fisher = hdinf::read_matrix_csv(o.get<std::string>("fisher_csv", ""));
        } else {
            if (p == 0) throw hdinf::ConfigParseError("config: p required with covariance spec");
            auto [sigma0, theta0] = hdinf::build_covariance(covariance_spec_from(o, p));
            (void)theta0;
            fisher = sigma0; // linear-model Fisher information
        }
        const hdinf::DenseVector g = o.has("g_dot")
            ? contrast_from_json(o.raw("g_dot"), fisher.rows, "config.g_dot")
            : hdinf::DenseVector::unit(fisher.rows, 0);
        out["value"] = hdinf::lecam_bound(fisher, g);
    } else if (kind == "minimax") {
        const std::size_t s = o.get<std::size_t>("s", 0);
        out["value"] = hdinf::minimax_rate(n, p, s);
    } else if (kind == "compatibility") {
        hdinf::DenseMatrix sigma;
        if (o.has("sigma_csv")) {
            sigma = hdinf::read_matrix_csv(o.get<std::string>("sigma_csv", ""));
        } else if (o.has("x_csv")) {
            sigma = hdinf::gram(hdinf::read_matrix_csv(o.get<std::string>("x_csv", "")));
        } else {
            if (p == 0) throw hdinf::ConfigParseError("config: p required with covariance spec");
            auto [sigma0, theta0] = hdinf::build_covariance(covariance_spec_from(o, p));
            (void)theta0;
            sigma = sigma0;
        }
        out["value"] = hdinf::compatibility_lower_bound(sigma);
    } else {
        throw hdinf::ConfigParseError("config.kind: unknown bound kind '" + kind + "'");
    }
    o.finish();
    write_output(out, out_path);
    return 0;
}

int run_experiment_cmd(const ordered_json& cfg_json, const std::string& out_path,
                       unsigned workers_override, const std::string& records_csv) {
    hdinf::ExperimentConfig cfg = hdinf::experiment_config_from_json(cfg_json);
    if (workers_override > 0) cfg.parallel_workers = workers_override;
    try {
        hdinf::validate_config(cfg);
    } catch (const std::exception& e) {
        throw hdinf::ConfigParseError(std::string("invalid experiment config: ") + e.what());
    }

    const auto t0 = std::chrono::steady_clock::now();
    const hdinf::MonteCarloReport report = hdinf::run_experiment(cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "experiment " << hdinf::experiment_kind_name(cfg.experiment)
              << ": R=" << cfg.replications << " n=" << cfg.n << " p=" << cfg.p
              << " failures=" << report.failures << " (" << secs << " s)\n";

    write_output(hdinf::report_to_json(report), out_path);
    if (!records_csv.empty()) hdinf::write_records_csv(report, records_csv);
    return 0;
}

int run_dataset(const ordered_json& cfg_json, const std::string& out_path) {
    hdinf::StrictConfigReader o(cfg_json, "config");
    hdinf::LinearModelSpec spec;
    spec.n = o.get<std::size_t>("n", 100);
    spec.p = o.get<std::size_t>("p", 50);
    spec.s = o.get<std::size_t>("s", 2);
    spec.signal = o.get<double>("signal", 1.0);
    spec.sigma_noise = o.get<double>("sigma_noise", 1.0);
    spec.covariance = covariance_spec_from(o, spec.p);
    spec.seed = o.get<std::uint64_t>("seed", 1);
    o.finish();

    if (out_path.empty())
        throw hdinf::ConfigParseError("dataset: --out PREFIX is required");

    const hdinf::Dataset d = hdinf::generate_dataset(spec);
    const std::string prefix = out_path;
    hdinf::write_matrix_csv(d.x, prefix + "_x.csv");
    hdinf::write_vector_csv(d.y, prefix + "_y.csv");
    hdinf::write_vector_csv(d.beta0, prefix + "_beta0.csv");
    hdinf::write_matrix_csv(d.sigma0, prefix + "_sigma0.csv");
    hdinf::write_matrix_csv(d.theta0, prefix + "_theta0.csv");

    ordered_json manifest;
    ordered_json sj;
    sj["n"] = spec.n;
    sj["p"] = spec.p;
    sj["s"] = spec.s;
    sj["signal"] = spec.signal;
    sj["sigma_noise"] = spec.sigma_noise;
    ordered_json cj;
    cj["family"] = hdinf::covariance_family_name(spec.covariance.family);
    cj["rho"] = spec.covariance.rho;
    cj["bandwidth"] = spec.covariance.bandwidth;
    cj["off_diag"] = spec.covariance.off_diag;
    sj["covariance"] = std::move(cj);
    manifest["spec"] = std::move(sj);
    manifest["seed"] = spec.seed;
    ordered_json files;
    files["x"] = prefix + "_x.csv";
    files["y"] = prefix + "_y.csv";
    files["beta0"] = prefix + "_beta0.csv";
    files["sigma0"] = prefix + "_sigma0.csv";
    files["theta0"] = prefix + "_theta0.csv";
    manifest["files"] = std::move(files);

    std::ofstream mf(prefix + "_manifest.json");
    if (!mf) throw hdinf::IoError("cannot open " + prefix + "_manifest.json");
    mf << manifest.dump(2) << "\n";
    std::cerr << "dataset: wrote " << prefix << "_{x,y,beta0,sigma0,theta0}.csv and manifest\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"De-biased lasso inference, efficiency bounds and Monte Carlo verification"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 success, 1 usage/config error, 2 runtime error.");

    std::string config_path, out_path, records_csv;
    std::vector<std::string> overrides;
    unsigned workers = 0;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "JSON config file");
        if (config_required) opt->required();
        sub->add_option("--out", out_path, "output path (default: stdout)");
        sub->add_option("--set", overrides, "override config key, e.g. --set n=200 (repeatable)");
        return sub;
    };

    auto* sub_estimate =
        add_common(app.add_subcommand("estimate", "de-biased linear-model inference"), true);
    sub_estimate->footer(footer_from(estimate_keys()));
    auto* sub_nodewise =
        add_common(app.add_subcommand("nodewise", "surrogate inverse with certificates"), true);
    sub_nodewise->add_option("--workers", workers, "column-fit threads (results unchanged)");
    sub_nodewise->footer(footer_from(nodewise_keys()));
    auto* sub_ggm =
        add_common(app.add_subcommand("ggm", "de-sparsified precision entry inference"), true);
    sub_ggm->add_option("--workers", workers, "column-fit threads (results unchanged)");
    sub_ggm->footer(footer_from(ggm_keys()));
    auto* sub_bound = add_common(app.add_subcommand("bound", "efficiency bound calculators"), true);
    sub_bound->footer(footer_from(bound_keys()));
    auto* sub_experiment =
        add_common(app.add_subcommand("experiment", "Monte Carlo experiment"), true);
    sub_experiment->add_option("--workers", workers, "worker threads (results unchanged)");
    sub_experiment->add_option("--records-csv", records_csv, "also write per-replicate CSV");
    sub_experiment->footer(experiment_footer());
    auto* sub_dataset =
        add_common(app.add_subcommand("dataset", "synthetic dataset export (--out PREFIX)"), true);
    sub_dataset->footer(footer_from(dataset_keys()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    ordered_json cfg;
    try {
        cfg = load_config(config_path, overrides);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (sub_estimate->parsed()) return run_estimate(cfg, out_path);
        if (sub_nodewise->parsed()) return run_nodewise(cfg, out_path, std::max(1u, workers));
        if (sub_ggm->parsed()) return run_ggm_cmd(cfg, out_path, std::max(1u, workers));
        if (sub_bound->parsed()) return run_bound(cfg, out_path);
        if (sub_experiment->parsed())
            return run_experiment_cmd(cfg, out_path, workers, records_csv);
        if (sub_dataset->parsed()) return run_dataset(cfg, out_path);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const hdinf::ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

#include "tvme/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "tvme/dataio.hpp"
#include "tvme/efficiency.hpp"
#include "tvme/errors.hpp"
#include "tvme/svg_plot.hpp"
#include "tvme/tvvar.hpp"
#include "tvme/unitroot.hpp"
#include "tvme/var.hpp"

namespace tvme::cli {

namespace {

using nlohmann::json;

struct Common {
    std::string input;
    std::string markets;       // comma-separated subset, empty = all
    bool as_returns = false;   // input already holds returns, skip the log step
    std::string date_column = "date";
    bool drop_incomplete = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--input", c.input, "input CSV of price indices (or returns with --returns)")
        ->required();
    sub->add_option("--markets", c.markets, "comma-separated market columns to use (default: all)");
    sub->add_flag("--returns", c.as_returns, "treat the input as returns instead of prices");
    sub->add_option("--date-column", c.date_column, "name of the date column")->capture_default_str();
    sub->add_flag("--drop-incomplete", c.drop_incomplete, "drop rows with missing cells instead of failing");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

ReturnsPanel load_input(const Common& c) {
    CsvLayout layout;
    layout.date_column = c.date_column;
    layout.markets = split_list(c.markets);
    layout.drop_incomplete_rows = c.drop_incomplete;
    if (c.as_returns) {
        return load_returns_panel(c.input, layout);
    }
    return to_log_returns(load_price_panel(c.input, layout));
}

// CSV cell with 6 significant digits; NaN prints as an empty cell.
std::string g6(double v) {
    if (!std::isfinite(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& body) {
    if (path == "-") {
        std::cout << body;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cli", "cannot write " + path);
    }
    out << body;
    if (!out.good()) {
        throw IoError("cli", "write failed for " + path);
    }
}

std::string sidecar_path(const std::string& output, const std::string& fallback) {
    return output == "-" ? fallback : output + ".run.json";
}

json common_config(const char* subcommand, const Common& c, const ReturnsPanel& panel) {
    return json{{"subcommand", subcommand},
                {"input", c.input},
                {"markets", panel.markets},
                {"input_is_returns", c.as_returns},
                {"date_column", c.date_column},
                {"drop_incomplete", c.drop_incomplete},
                {"observations", panel.T()}};
}

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

int resolve_p(const std::string& p_opt, int pmax_opt, const ReturnsPanel& panel, int* pmax_used) {
    if (p_opt != "auto") {
        const int p = std::stoi(p_opt);
        if (pmax_used) *pmax_used = 0;
        return p;
    }
    const int pmax = pmax_opt > 0 ? pmax_opt : var::default_pmax(panel.T(), panel.k());
    if (pmax_used) *pmax_used = pmax;
    return var::select_var_lag_bic(panel, pmax);
}

// describe -------------------------------------------------------------

struct DescribeOpts {
    Common common;
    std::string output = "-";
    std::string format = "csv";
};

int run_describe(const DescribeOpts& o) {
    const ReturnsPanel panel = load_input(o.common);
    const DescriptiveStats s = describe(panel);

    std::string body;
    if (o.format == "json") {
        json rows = json::array();
        for (std::size_t j = 0; j < s.markets.size(); ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            rows.push_back(json{{"market", s.markets[j]},
                                {"mean", s.mean(i)},
                                {"sd", s.sd(i)},
                                {"min", s.min(i)},
                                {"max", s.max(i)},
                                {"n", s.n}});
        }
        body = rows.dump(2) + "\n";
    } else {
        std::ostringstream csv;
        csv << "market,mean,sd,min,max,n\n";
        for (std::size_t j = 0; j < s.markets.size(); ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            csv << s.markets[j] << ',' << g6(s.mean(i)) << ',' << g6(s.sd(i)) << ','
                << g6(s.min(i)) << ',' << g6(s.max(i)) << ',' << s.n << '\n';
        }
        body = csv.str();
    }
    write_text(o.output, body);

    json cfg = common_config("describe", o.common, panel);
    cfg["output"] = o.output;
    cfg["format"] = o.format;
    write_text(sidecar_path(o.output, "tvme_describe.run.json"), cfg.dump(2) + "\n");
    return 0;
}

// unitroot -------------------------------------------------------------

struct UnitrootOpts {
    Common common;
    std::string model = "trend";
    std::string kmax = "auto";
    double cbar = 0.0;
    double cv = 0.0;
    std::string output = "-";
    std::string format = "csv";
};

int run_unitroot(const UnitrootOpts& o) {
    const ReturnsPanel panel = load_input(o.common);

    unitroot::AdfGlsOptions opts;
    opts.model = o.model == "constant" ? unitroot::DetrendModel::constant
                                       : unitroot::DetrendModel::constant_trend;
    opts.kmax = o.kmax == "auto" ? -1 : std::stoi(o.kmax);
    opts.cbar = o.cbar;
    opts.critical_value_1pct = o.cv;
    const std::vector<unitroot::UnitRootResult> results = unitroot::test_panel(panel, opts);

    std::string body;
    if (o.format == "json") {
        json rows = json::array();
        for (std::size_t j = 0; j < results.size(); ++j) {
            const auto& r = results[j];
            rows.push_back(json{{"market", panel.markets[j]},
                                {"stat", r.statistic},
                                {"lag", r.lag},
                                {"phi0", r.phi_hat(0)},
                                {"phi1", r.phi_hat.size() > 1 ? json(r.phi_hat(1)) : json()},
                                {"critical_value_1pct", r.critical_value_1pct},
                                {"reject_1pct", r.reject_at_1pct}});
        }
        body = rows.dump(2) + "\n";
    } else {
        std::ostringstream csv;
        csv << "market,stat,lag,phi0,phi1,reject_1pct\n";
        for (std::size_t j = 0; j < results.size(); ++j) {
            const auto& r = results[j];
            csv << panel.markets[j] << ',' << g6(r.statistic) << ',' << r.lag << ','
                << g6(r.phi_hat(0)) << ',' << (r.phi_hat.size() > 1 ? g6(r.phi_hat(1)) : "") << ','
                << (std::isfinite(r.critical_value_1pct) ? (r.reject_at_1pct ? "1" : "0") : "")
                << '\n';
        }
        body = csv.str();
    }
    write_text(o.output, body);

    json cfg = common_config("unitroot", o.common, panel);
    cfg["model"] = o.model;
    cfg["kmax"] = o.kmax == "auto" ? json(unitroot::default_kmax(panel.T())) : json(std::stoi(o.kmax));
    cfg["cbar"] = o.cbar != 0.0 ? o.cbar : unitroot::default_cbar(
        o.model == "constant" ? unitroot::DetrendModel::constant : unitroot::DetrendModel::constant_trend);
    cfg["output"] = o.output;
    cfg["format"] = o.format;
    write_text(sidecar_path(o.output, "tvme_unitroot.run.json"), cfg.dump(2) + "\n");
    return 0;
}

// var ------------------------------------------------------------------

struct VarOpts {
    Common common;
    std::string p = "auto";
    int pmax = 0;
    int bandwidth = -1;
    int lc_sim_reps = 0;
    double lc_level = 0.99;
    std::uint64_t seed = 1;
    std::string output = "-";
    std::string csv;  // optional flattened coefficients
};

int run_var(const VarOpts& o) {
    const ReturnsPanel panel = load_input(o.common);
    int pmax_used = 0;
    const int p = resolve_p(o.p, o.pmax, panel, &pmax_used);

    var::VarEstimate est = var::fit_var(panel, p);
    est.coef_cov_nw = var::newey_west_cov(est, o.bandwidth);
    var::ConstancyResult lc = var::hansen_lc(est);
    if (o.lc_sim_reps > 0) {
        lc.critical_value = var::simulate_lc_critical_value(est.k, p, panel.T(), o.lc_level,
                                                            o.lc_sim_reps, o.seed);
        lc.reject_hint = lc.lc > lc.critical_value;
    }

    json out;
    out["p"] = p;
    out["markets"] = est.markets;
    out["T_eff"] = est.T_eff;
    out["nu"] = to_json(est.nu);
    out["A"] = json::array();
    for (const auto& a : est.A) out["A"].push_back(to_json(a));
    out["adj_r2"] = to_json(est.adj_r2);
    json eqs = json::array();
    for (Eigen::Index i = 0; i < est.k; ++i) {
        const Eigen::VectorXd coefs = est.equation_coefs(i);
        const Eigen::VectorXd se =
            est.coef_cov_nw[static_cast<std::size_t>(i)].diagonal().cwiseSqrt();
        eqs.push_back(json{{"market", est.markets[static_cast<std::size_t>(i)]},
                           {"coefficients", to_json(coefs)},
                           {"nw_se", to_json(se)}});
    }
    out["equations"] = eqs;
    out["lc"] = lc.lc;
    out["lc_n_params"] = lc.n_params;
    out["lc_per_equation"] = to_json(lc.lc_per_equation);
    if (o.lc_sim_reps > 0) {
        out["lc_critical_value"] = lc.critical_value;
        out["lc_level"] = o.lc_level;
        out["lc_reject"] = lc.reject_hint;
    }
    write_text(o.output, out.dump(2) + "\n");

    if (!o.csv.empty()) {
        // Flattened per-equation coefficients: term order matches the design.
        std::ostringstream csv;
        csv << "equation,term,coef,nw_se\n";
        for (Eigen::Index i = 0; i < est.k; ++i) {
            const Eigen::VectorXd coefs = est.equation_coefs(i);
            const Eigen::VectorXd se =
                est.coef_cov_nw[static_cast<std::size_t>(i)].diagonal().cwiseSqrt();
            for (Eigen::Index c = 0; c < coefs.size(); ++c) {
                std::string term = "intercept";
                if (c > 0) {
                    const Eigen::Index lag = (c - 1) / est.k + 1;
                    const Eigen::Index j = (c - 1) % est.k;
                    term = "lag" + std::to_string(lag) + "." + est.markets[static_cast<std::size_t>(j)];
                }
                csv << est.markets[static_cast<std::size_t>(i)] << ',' << term << ',' << g6(coefs(c))
                    << ',' << g6(se(c)) << '\n';
            }
        }
        write_text(o.csv, csv.str());
    }

    json cfg = common_config("var", o.common, panel);
    cfg["p"] = p;
    cfg["p_mode"] = o.p;
    if (pmax_used > 0) cfg["pmax"] = pmax_used;
    cfg["nw_bandwidth"] = o.bandwidth >= 0 ? o.bandwidth : var::default_nw_bandwidth(est.T_eff);
    cfg["lc_sim_reps"] = o.lc_sim_reps;
    cfg["seed"] = o.seed;
    cfg["output"] = o.output;
    if (!o.csv.empty()) cfg["csv"] = o.csv;
    write_text(sidecar_path(o.output, "tvme_var.run.json"), cfg.dump(2) + "\n");
    return 0;
}

// tvvar ----------------------------------------------------------------

struct TvvarOpts {
    Common common;
    std::string p = "auto";
    int pmax = 0;
    double lambda = 1.0;
    std::string anchor = "ols";
    bool gls_refine = false;
    bool select_lambda = false;
    std::string output = "-";
    std::string meta;
};

tvvar::TvVarOptions make_tvvar_options(double lambda, const std::string& anchor, bool gls_refine) {
    tvvar::TvVarOptions opts;
    opts.lambda = lambda;
    opts.anchor = anchor == "diffuse" ? tvvar::AnchorMode::diffuse : tvvar::AnchorMode::ols;
    opts.gls_refine = gls_refine;
    return opts;
}

int run_tvvar(const TvvarOpts& o) {
    const ReturnsPanel panel = load_input(o.common);
    int pmax_used = 0;
    const int p = resolve_p(o.p, o.pmax, panel, &pmax_used);

    tvvar::TvVarOptions opts = make_tvvar_options(o.lambda, o.anchor, o.gls_refine);
    bool lambda_selected = false;
    if (o.select_lambda) {
        opts.lambda = tvvar::select_lambda(panel, p, opts);
        lambda_selected = true;
    }
    const tvvar::TvVarEstimate est = tvvar::fit_tvvar(panel, p, opts);

    std::ostringstream csv;
    csv << "date,block,row,col,value\n";
    for (Eigen::Index t = 0; t < est.T_eff; ++t) {
        const std::string date = est.dates[static_cast<std::size_t>(t)].str();
        for (int i = 1; i <= p; ++i) {
            const Eigen::MatrixXd block = est.lag_block(t, i);
            for (Eigen::Index r = 0; r < est.k; ++r) {
                for (Eigen::Index c = 0; c < est.k; ++c) {
                    csv << date << ',' << i << ',' << r + 1 << ',' << c + 1 << ','
                        << g6(block(r, c)) << '\n';
                }
            }
        }
    }
    write_text(o.output, csv.str());

    json meta;
    meta["p"] = p;
    meta["lambda"] = est.lambda;
    meta["lambda_selected_by_likelihood"] = lambda_selected;
    meta["anchor"] = o.anchor;
    meta["gls_refine"] = o.gls_refine;
    meta["markets"] = est.markets;
    meta["T_eff"] = est.T_eff;
    meta["nu"] = to_json(est.nu);
    meta["sigma_u"] = est.sigma_u;
    meta["sigma_v"] = est.sigma_v;
    meta["effective_parameters"] = est.edf;
    const std::string meta_path =
        !o.meta.empty() ? o.meta : (o.output == "-" ? "tvme_tvvar.meta.json" : o.output + ".meta.json");
    write_text(meta_path, meta.dump(2) + "\n");

    json cfg = common_config("tvvar", o.common, panel);
    cfg["p"] = p;
    cfg["p_mode"] = o.p;
    if (pmax_used > 0) cfg["pmax"] = pmax_used;
    cfg["lambda"] = est.lambda;
    cfg["lambda_requested"] = o.lambda;
    cfg["select_lambda"] = o.select_lambda;
    cfg["anchor"] = o.anchor;
    cfg["gls_refine"] = o.gls_refine;
    cfg["output"] = o.output;
    cfg["meta"] = meta_path;
    write_text(sidecar_path(o.output, "tvme_tvvar.run.json"), cfg.dump(2) + "\n");
    return 0;
}

// efficiency -----------------------------------------------------------

struct EfficiencyOpts {
    Common common;
    std::string p = "auto";
    int pmax = 0;
    double lambda = 1.0;
    std::string anchor = "ols";
    bool gls_refine = false;
    bool select_lambda = false;
    std::string band = "mc";
    int reps = 5000;
    double level = 0.99;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool identity_cov = false;
    bool serial = false;
    double cond_cap = 1e10;
    std::string output = "zeta.csv";
    std::string format = "csv";
    std::string plot;
    double plot_cap = std::numeric_limits<double>::infinity();
};

int run_efficiency(const EfficiencyOpts& o) {
    const ReturnsPanel panel = load_input(o.common);
    int pmax_used = 0;
    const int p = resolve_p(o.p, o.pmax, panel, &pmax_used);

    // Seed is always materialized so the sidecar suffices to reproduce.
    std::uint64_t seed = o.seed;
    if (!o.seed_given) {
        seed = std::random_device{}();
    }

    tvvar::TvVarOptions opts = make_tvvar_options(o.lambda, o.anchor, o.gls_refine);
    if (o.select_lambda) {
        opts.lambda = tvvar::select_lambda(panel, p, opts);
    }
    const tvvar::TvVarEstimate est = tvvar::fit_tvvar(panel, p, opts);
    efficiency::ZetaSeries series = efficiency::efficiency_degree(est, o.cond_cap);

    // Replications reuse the lambda that actually produced the fit.
    tvvar::TvVarOptions rep_opts = opts;
    rep_opts.lambda = est.lambda;
    rep_opts.gls_refine = false;

    efficiency::BandOptions band_opts;
    band_opts.replications = o.reps;
    band_opts.level = o.level;
    band_opts.seed = seed;
    band_opts.identity_covariance = o.identity_cov;
    band_opts.exec = o.serial ? efficiency::ExecutionMode::serial : efficiency::ExecutionMode::parallel;
    band_opts.cond_cap = o.cond_cap;

    efficiency::Band band;
    if (o.band == "bootstrap") {
        const Eigen::VectorXd mean = panel.returns.colwise().mean().transpose();
        band = efficiency::bootstrap_band(est, mean, rep_opts, band_opts);
    } else {
        band = efficiency::mc_band(est.T_eff, est.k, p, efficiency::sample_moments(panel), rep_opts,
                                   band_opts);
    }
    efficiency::BandMeta meta;
    meta.method = o.band;
    meta.replications = o.reps;
    meta.level = o.level;
    meta.seed = seed;
    efficiency::attach_band(series, band, meta);

    std::string body;
    if (o.format == "json") {
        json rows = json::array();
        for (Eigen::Index t = 0; t < series.T(); ++t) {
            rows.push_back(json{{"date", series.dates[static_cast<std::size_t>(t)].str()},
                                {"zeta", series.zeta(t)},
                                {"band_lo", series.band_lo(t)},
                                {"band_hi", series.band_hi(t)},
                                {"inefficient", series.inefficient[static_cast<std::size_t>(t)] != 0}});
        }
        body = rows.dump(2) + "\n";
    } else {
        std::ostringstream csv;
        csv << "date,zeta,band_lo,band_hi,inefficient\n";
        for (Eigen::Index t = 0; t < series.T(); ++t) {
            csv << series.dates[static_cast<std::size_t>(t)].str() << ',' << g6(series.zeta(t)) << ','
                << g6(series.band_lo(t)) << ',' << g6(series.band_hi(t)) << ','
                << int(series.inefficient[static_cast<std::size_t>(t)]) << '\n';
        }
        body = csv.str();
    }
    write_text(o.output, body);

    if (!o.plot.empty()) {
        svg::PlotOptions popts;
        popts.display_cap = o.plot_cap;
        popts.title = "Degree of market efficiency";
        svg::write_zeta_plot(series, o.plot, popts);
    }

    json cfg = common_config("efficiency", o.common, panel);
    cfg["p"] = p;
    cfg["p_mode"] = o.p;
    if (pmax_used > 0) cfg["pmax"] = pmax_used;
    cfg["lambda"] = est.lambda;
    cfg["lambda_requested"] = o.lambda;
    cfg["select_lambda"] = o.select_lambda;
    cfg["anchor"] = o.anchor;
    cfg["gls_refine"] = o.gls_refine;
    cfg["band"] = o.band;
    cfg["replications"] = o.reps;
    cfg["level"] = o.level;
    cfg["seed"] = seed;
    cfg["identity_covariance"] = o.identity_cov;
    cfg["serial"] = o.serial;
    cfg["condition_cap"] = o.cond_cap;
    cfg["output"] = o.output;
    cfg["format"] = o.format;
    if (!o.plot.empty()) cfg["plot"] = o.plot;
    write_text(sidecar_path(o.output, "tvme_efficiency.run.json"), cfg.dump(2) + "\n");
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
#ifdef _OPENMP
    if (const char* env = std::getenv("TVME_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif

    CLI::App app{"time-varying market efficiency toolkit"};
    app.require_subcommand(1);

    DescribeOpts d;
    CLI::App* describe = app.add_subcommand("describe", "descriptive statistics of log returns");
    add_common(describe, d.common);
    describe->add_option("--output", d.output, "output path, - for stdout")->capture_default_str();
    describe->add_option("--format", d.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    UnitrootOpts u;
    CLI::App* unit = app.add_subcommand("unitroot", "ADF-GLS unit-root pretest per market");
    add_common(unit, u.common);
    unit->add_option("--model", u.model, "detrending model")
        ->check(CLI::IsMember({"trend", "constant"}))
        ->capture_default_str();
    unit->add_option("--kmax", u.kmax, "max augmentation lag, or auto")->capture_default_str();
    unit->add_option("--cbar", u.cbar, "quasi-difference constant (default per model)");
    unit->add_option("--cv", u.cv, "override the 1% critical value");
    unit->add_option("--output", u.output, "output path, - for stdout")->capture_default_str();
    unit->add_option("--format", u.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    VarOpts v;
    CLI::App* varcmd = app.add_subcommand("var", "time-invariant VAR with robust errors and constancy test");
    add_common(varcmd, v.common);
    varcmd->add_option("--p", v.p, "lag order, or auto for BIC selection")->capture_default_str();
    varcmd->add_option("--pmax", v.pmax, "BIC search bound (0 = default rule)")->capture_default_str();
    varcmd->add_option("--bandwidth", v.bandwidth, "Newey-West bandwidth (-1 = automatic)")
        ->capture_default_str();
    varcmd->add_option("--lc-sim-reps", v.lc_sim_reps,
                       "simulate the constancy-test critical value with this many replications");
    varcmd->add_option("--lc-level", v.lc_level, "critical-value level")->capture_default_str();
    varcmd->add_option("--seed", v.seed, "seed for the critical-value simulation")
        ->capture_default_str();
    varcmd->add_option("--output", v.output, "JSON output path, - for stdout")->capture_default_str();
    varcmd->add_option("--csv", v.csv, "also write flattened coefficients to this CSV");

    TvvarOpts t;
    CLI::App* tv = app.add_subcommand("tvvar", "time-varying VAR coefficient paths");
    add_common(tv, t.common);
    tv->add_option("--p", t.p, "lag order, or auto")->capture_default_str();
    tv->add_option("--pmax", t.pmax, "BIC search bound (0 = default rule)")->capture_default_str();
    tv->add_option("--lambda", t.lambda, "smoothing ratio")->capture_default_str();
    tv->add_option("--anchor", t.anchor, "anchoring of the initial coefficients")
        ->check(CLI::IsMember({"ols", "diffuse"}))
        ->capture_default_str();
    tv->add_flag("--gls-refine", t.gls_refine, "one feasible-GLS reweighting pass");
    tv->add_flag("--select-lambda", t.select_lambda, "pick lambda by profile-likelihood grid");
    tv->add_option("--output", t.output, "coefficient CSV path, - for stdout")->capture_default_str();
    tv->add_option("--meta", t.meta, "metadata JSON path (default derives from --output)");

    EfficiencyOpts e;
    CLI::App* eff = app.add_subcommand("efficiency", "degree-of-efficiency series with null bands");
    add_common(eff, e.common);
    eff->add_option("--p", e.p, "lag order, or auto")->capture_default_str();
    eff->add_option("--pmax", e.pmax, "BIC search bound (0 = default rule)")->capture_default_str();
    eff->add_option("--lambda", e.lambda, "smoothing ratio")->capture_default_str();
    eff->add_option("--anchor", e.anchor, "anchoring of the initial coefficients")
        ->check(CLI::IsMember({"ols", "diffuse"}))
        ->capture_default_str();
    eff->add_flag("--gls-refine", e.gls_refine, "one feasible-GLS reweighting pass");
    eff->add_flag("--select-lambda", e.select_lambda, "pick lambda by profile-likelihood grid");
    eff->add_option("--band", e.band, "null band construction")
        ->check(CLI::IsMember({"mc", "bootstrap"}))
        ->capture_default_str();
    eff->add_option("--reps", e.reps, "band replications")->capture_default_str();
    eff->add_option("--level", e.level, "band level")->capture_default_str();
    CLI::Option* seed_opt = eff->add_option("--seed", e.seed, "band RNG seed (default: drawn and logged)");
    eff->add_flag("--identity-cov", e.identity_cov, "null draws from N(0, I) instead of sample moments");
    eff->add_flag("--serial", e.serial, "run band replications on one thread");
    eff->add_option("--cond-cap", e.cond_cap, "condition-number cap for the long-run multiplier")
        ->capture_default_str();
    eff->add_option("--output", e.output, "zeta CSV path, - for stdout")->capture_default_str();
    eff->add_option("--format", e.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    eff->add_option("--plot", e.plot, "write an SVG plot to this path");
    eff->add_option("--plot-cap", e.plot_cap, "display ceiling for exploding zeta values (plot only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& h) {
        return app.exit(h);
    } catch (const CLI::CallForAllHelp& h) {
        return app.exit(h);
    } catch (const CLI::ParseError& pe) {
        app.exit(pe);  // prints the message
        return 2;
    }

    try {
        if (app.got_subcommand(describe)) return run_describe(d);
        if (app.got_subcommand(unit)) return run_unitroot(u);
        if (app.got_subcommand(varcmd)) return run_var(v);
        if (app.got_subcommand(tv)) return run_tvvar(t);
        e.seed_given = seed_opt->count() > 0;
        return run_efficiency(e);
    } catch (const Error& err) {
        std::cerr << "error [" << err.stage() << "]: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("tvme");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) argv.push_back(s.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tvme::cli

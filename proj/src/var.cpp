#include "tvme/var.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tvme/errors.hpp"
#include "tvme/rng.hpp"

namespace tvme::var {

namespace {

// Lagged design on rows first_obs..T-1: intercept column, then lag 1 markets,
// lag 2 markets, ...
Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& y, int p, Eigen::Index first_obs) {
    const Eigen::Index k = y.cols();
    const Eigen::Index n = y.rows() - first_obs;
    Eigen::MatrixXd X(n, k * p + 1);
    X.col(0).setOnes();
    for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index t = first_obs + r;
        for (int i = 1; i <= p; ++i) {
            X.block(r, 1 + (i - 1) * k, 1, k) = y.row(t - i);
        }
    }
    return X;
}

std::string column_label(Eigen::Index col, const std::vector<std::string>& markets) {
    if (col == 0) return "intercept";
    const Eigen::Index k = static_cast<Eigen::Index>(markets.size());
    const Eigen::Index lag = (col - 1) / k + 1;
    const Eigen::Index j = (col - 1) % k;
    return "lag " + std::to_string(lag) + " of " + markets[static_cast<std::size_t>(j)];
}

double log_det_spd(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double quantile_type7(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

}  // namespace

Eigen::VectorXd VarEstimate::equation_coefs(Eigen::Index i) const {
    const Eigen::Index m = k * p + 1;
    Eigen::VectorXd b(m);
    b(0) = nu(i);
    for (int lag = 1; lag <= p; ++lag) {
        b.segment(1 + (lag - 1) * k, k) = A[static_cast<std::size_t>(lag - 1)].row(i).transpose();
    }
    return b;
}

int default_pmax(Eigen::Index T, Eigen::Index k) {
    // Largest p <= 8 that keeps the per-equation regression overdetermined.
    int p = 8;
    while (p > 1 && T - p <= k * p + 1) --p;
    return p;
}

VarEstimate fit_var(const ReturnsPanel& returns, int p) {
    const Eigen::Index T = returns.T();
    const Eigen::Index k = returns.k();
    if (p < 1) {
        throw DomainError("var", "lag order must be at least 1");
    }
    if (T - p <= k * p + 1) {
        throw InsufficientDataError("var", "sample too short for VAR(" + std::to_string(p) + ") with " +
                                               std::to_string(k) + " markets");
    }
    const Eigen::Index T_eff = T - p;
    const Eigen::MatrixXd X = lagged_design(returns.returns, p, p);
    const Eigen::MatrixXd Y = returns.returns.bottomRows(T_eff);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        // The columns permuted past the numerical rank are the redundant ones.
        const auto perm = qr.colsPermutation().indices();
        const Eigen::Index offending = perm(qr.rank());
        throw NumericalError("var", "rank-deficient regressors: " + column_label(offending, returns.markets) +
                                        " is collinear with the others");
    }
    const Eigen::MatrixXd B = qr.solve(Y);  // (kp+1) x k, one column per equation

    VarEstimate est;
    est.p = p;
    est.k = k;
    est.T_eff = T_eff;
    est.markets = returns.markets;
    est.dates.assign(returns.dates.begin() + p, returns.dates.end());
    est.nu = B.row(0).transpose();
    est.A.reserve(static_cast<std::size_t>(p));
    for (int i = 1; i <= p; ++i) {
        est.A.push_back(B.middleRows(1 + (i - 1) * k, k).transpose());
    }
    est.design = X;
    est.residuals = Y - X * B;
    est.sigma_u = est.residuals.transpose() * est.residuals / static_cast<double>(T_eff);

    est.adj_r2.resize(k);
    const Eigen::Index m = k * p + 1;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double ssr = est.residuals.col(i).squaredNorm();
        const Eigen::VectorXd yc = Y.col(i).array() - Y.col(i).mean();
        const double sst = yc.squaredNorm();
        est.adj_r2(i) = 1.0 - (ssr / static_cast<double>(T_eff - m)) / (sst / static_cast<double>(T_eff - 1));
    }
    return est;
}

int select_var_lag_bic(const ReturnsPanel& returns, int pmax) {
    const Eigen::Index T = returns.T();
    const Eigen::Index k = returns.k();
    if (pmax < 1) {
        throw DomainError("var", "pmax must be at least 1");
    }
    if (T - pmax <= k * pmax + 1) {
        throw InsufficientDataError("var", "sample too short for lag search up to " + std::to_string(pmax));
    }
    // All candidates scored on the common sample t = pmax+1..T.
    const Eigen::Index T_eff = T - pmax;
    const Eigen::MatrixXd Y = returns.returns.bottomRows(T_eff);
    const Eigen::MatrixXd X_full = lagged_design(returns.returns, pmax, pmax);

    int best_p = 1;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= pmax; ++p) {
        const Eigen::MatrixXd X = X_full.leftCols(1 + k * p);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < X.cols()) continue;  // skip degenerate candidates
        const Eigen::MatrixXd E = Y - X * qr.solve(Y);
        const Eigen::MatrixXd sigma = E.transpose() * E / static_cast<double>(T_eff);
        const double bic = log_det_spd(sigma) + std::log(static_cast<double>(T_eff)) /
                                                    static_cast<double>(T_eff) * p * k * k;
        if (bic < best_bic) {  // strict: ties stay with the smaller p
            best_bic = bic;
            best_p = p;
        }
    }
    return best_p;
}

int default_nw_bandwidth(Eigen::Index T_eff) {
    return static_cast<int>(4.0 * std::pow(static_cast<double>(T_eff) / 100.0, 2.0 / 9.0));
}

std::vector<Eigen::MatrixXd> newey_west_cov(const VarEstimate& est, int bandwidth) {
    const Eigen::Index T = est.T_eff;
    const Eigen::Index m = est.design.cols();
    const int L = bandwidth >= 0 ? bandwidth : default_nw_bandwidth(T);

    const Eigen::MatrixXd xtx = est.design.transpose() * est.design;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(est.k));
    for (Eigen::Index i = 0; i < est.k; ++i) {
        const Eigen::VectorXd u = est.residuals.col(i);
        // Score rows g_t = x_t u_t.
        const Eigen::MatrixXd G = est.design.array().colwise() * u.array();
        Eigen::MatrixXd omega = G.transpose() * G;
        for (int j = 1; j <= L; ++j) {
            const double w = 1.0 - static_cast<double>(j) / static_cast<double>(L + 1);
            const Eigen::MatrixXd lam =
                G.bottomRows(T - j).transpose() * G.topRows(T - j);
            omega += w * (lam + lam.transpose());
        }
        const Eigen::MatrixXd bread = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
        out.push_back(bread * omega * bread);
    }
    return out;
}

ConstancyResult hansen_lc(const VarEstimate& est) {
    const Eigen::Index T = est.T_eff;
    const Eigen::Index k = est.k;
    const Eigen::Index m = est.design.cols();  // regressors per equation
    const Eigen::Index n = k * (m + 1);        // + one variance score per equation

    Eigen::VectorXd sigma2(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        sigma2(i) = est.residuals.col(i).squaredNorm() / static_cast<double>(T);
    }

    // f_t stacks, per equation, the coefficient scores x_t e_it and the
    // centered squared residual.
    Eigen::MatrixXd F(T, n);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::VectorXd e = est.residuals.col(i);
        F.middleCols(i * (m + 1), m) = est.design.array().colwise() * e.array();
        F.col(i * (m + 1) + m) = e.array().square() - sigma2(i);
    }

    const Eigen::MatrixXd V = F.transpose() * F;
    Eigen::LDLT<Eigen::MatrixXd> vldlt(V);
    if (vldlt.info() != Eigen::Success || !vldlt.isPositive()) {
        throw NumericalError("var", "singular score outer-product in the constancy test (redundant regressors?)");
    }

    // Running cumulative scores; lc = tr(V^{-1} sum_t S_t S_t') / T.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd S = Eigen::VectorXd::Zero(n);
    for (Eigen::Index t = 0; t < T; ++t) {
        S += F.row(t).transpose();
        M.selfadjointView<Eigen::Lower>().rankUpdate(S);
    }
    M = M.selfadjointView<Eigen::Lower>();

    ConstancyResult res;
    res.lc = vldlt.solve(M).trace() / static_cast<double>(T);
    res.n_params = static_cast<int>(n);
    res.critical_value = std::numeric_limits<double>::quiet_NaN();

    res.lc_per_equation.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index off = i * (m + 1);
        const Eigen::Index len = m + 1;
        const Eigen::MatrixXd Vi = V.block(off, off, len, len);
        const Eigen::MatrixXd Mi = M.block(off, off, len, len);
        Eigen::LDLT<Eigen::MatrixXd> vi(Vi);
        res.lc_per_equation(i) = vi.solve(Mi).trace() / static_cast<double>(T);
    }
    return res;
}

double simulate_lc_critical_value(Eigen::Index k, int p, Eigen::Index T, double level,
                                  int replications, std::uint64_t seed) {
    if (replications < 100) {
        throw DomainError("var", "need at least 100 replications for a critical value");
    }
    std::vector<double> stats(static_cast<std::size_t>(replications),
                              std::numeric_limits<double>::quiet_NaN());
    bool failed = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int r = 0; r < replications; ++r) {
        try {
            auto gen = rng::make_generator(seed, static_cast<std::uint64_t>(r));
            std::normal_distribution<double> normal(0.0, 1.0);
            Eigen::MatrixXd y(T, k);
            for (Eigen::Index t = 0; t < T; ++t) {
                for (Eigen::Index j = 0; j < k; ++j) y(t, j) = normal(gen);
            }
            const VarEstimate est = fit_var(synthetic_returns_panel(y), p);
            stats[static_cast<std::size_t>(r)] = hansen_lc(est).lc;
        } catch (const Error&) {
            failed = true;
        }
    }
    if (failed) {
        throw NumericalError("var", "constancy-test null simulation failed on some replications");
    }
    return quantile_type7(stats, level);
}

}  // namespace tvme::var

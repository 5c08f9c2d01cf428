#include "tvme/tvvar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tvme/errors.hpp"

namespace tvme::tvvar {

namespace {

// X_t V for X_t = z_t' (x) I_k: rows i of the result sum z_a * V(a*k+i, :).
Eigen::MatrixXd apply_design(const Eigen::RowVectorXd& z, const Eigen::MatrixXd& V,
                             Eigen::Index k) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, V.cols());
    for (Eigen::Index a = 0; a < z.size(); ++a) {
        out.noalias() += z(a) * V.middleRows(a * k, k);
    }
    return out;
}

// Everything downstream consumers need from one banded solve.
struct CoreResult {
    TvVarEstimate est;
    double logdet_states = 0.0;  // sum of log det of the eliminated state blocks
    double logdet_m = 0.0;       // intercept Schur complement
    double ssr_u = 0.0;
    double ssr_v = 0.0;
};

CoreResult run_solver(const StackedSystem& sys, double lambda, bool noise_scales) {
    const Eigen::Index N = sys.T_eff;
    const Eigen::Index k = sys.k;
    const Eigen::Index kp = sys.z.cols();
    const Eigen::Index m = kp * k;
    const bool anchored = sys.mode == AnchorMode::ols;
    const double l2 = lambda * lambda;
    const double l4 = l2 * l2;

    // Forward block elimination of the state-path normal equations. The
    // diagonal block at t is (z_t z_t') (x) I_k + c_t lambda^2 I, off-diagonal
    // blocks are -lambda^2 I. Right-hand sides carried jointly: the data
    // column X_t' y_t (+ anchor at t=0) and the k intercept-coupling columns
    // B_t = z_t (x) I_k.
    std::vector<Eigen::MatrixXd> hinv(static_cast<std::size_t>(N));
    std::vector<Eigen::MatrixXd> rhat(static_cast<std::size_t>(N));
    double logdet_states = 0.0;
    Eigen::MatrixXd hhat(m, m);
    for (Eigen::Index t = 0; t < N; ++t) {
        const Eigen::RowVectorXd z = sys.z.row(t);
        const double diag_mult = (t == N - 1) ? 1.0 : 2.0;
        const double c_t = (t == 0 && !anchored) ? (N == 1 ? 0.0 : 1.0) : diag_mult;
        hhat.setZero();
        for (Eigen::Index a = 0; a < kp; ++a) {
            for (Eigen::Index b = 0; b < kp; ++b) {
                const double w = z(a) * z(b);
                for (Eigen::Index i = 0; i < k; ++i) hhat(a * k + i, b * k + i) = w;
            }
        }
        hhat.diagonal().array() += c_t * l2;
        if (t > 0) {
            hhat.noalias() -= l4 * hinv[static_cast<std::size_t>(t - 1)];
        }

        Eigen::MatrixXd r(m, k + 1);
        r.setZero();
        const Eigen::RowVectorXd y = sys.y.row(t);
        for (Eigen::Index a = 0; a < kp; ++a) {
            r.block(a * k, 0, k, 1) = z(a) * y.transpose();
            r.block(a * k, 1, k, k) = z(a) * Eigen::MatrixXd::Identity(k, k);
        }
        if (t == 0 && anchored) {
            r.col(0) += l2 * sys.anchor;
        }
        if (t > 0) {
            r.noalias() += l2 * (hinv[static_cast<std::size_t>(t - 1)] * rhat[static_cast<std::size_t>(t - 1)]);
        }
        rhat[static_cast<std::size_t>(t)] = std::move(r);

        Eigen::LLT<Eigen::MatrixXd> llt(hhat);
        if (llt.info() != Eigen::Success) {
            throw SingularityError("tvvar",
                                   "state normal equations lost positive definiteness at step " +
                                       std::to_string(t) +
                                       " (extreme lambda exhausts double precision in diffuse mode; "
                                       "the anchored mode stays well conditioned)");
        }
        logdet_states += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        hinv[static_cast<std::size_t>(t)] = llt.solve(Eigen::MatrixXd::Identity(m, m));
    }

    // Backward substitution; column 0 is the data solve w_t, the rest the
    // intercept coupling U_t = (H^{-1} B)_t.
    std::vector<Eigen::MatrixXd> xu(static_cast<std::size_t>(N));
    xu[static_cast<std::size_t>(N - 1)] =
        hinv[static_cast<std::size_t>(N - 1)] * rhat[static_cast<std::size_t>(N - 1)];
    for (Eigen::Index t = N - 2; t >= 0; --t) {
        xu[static_cast<std::size_t>(t)] =
            hinv[static_cast<std::size_t>(t)] *
            (rhat[static_cast<std::size_t>(t)] + l2 * xu[static_cast<std::size_t>(t + 1)]);
    }

    // Intercept via the Schur complement M = N I_k - B' H^{-1} B.
    Eigen::MatrixXd M = static_cast<double>(N) * Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd rhs_nu = sys.y.colwise().sum().transpose();
    for (Eigen::Index t = 0; t < N; ++t) {
        const Eigen::MatrixXd xw = apply_design(sys.z.row(t), xu[static_cast<std::size_t>(t)], k);
        M.noalias() -= xw.rightCols(k);
        rhs_nu -= xw.col(0);
    }
    // LDLT with a pivot floor: when constant regressors are confounded with
    // the coefficient path, M is singular up to roundoff and a plain Cholesky
    // can pass by luck and emit a garbage intercept.
    Eigen::LDLT<Eigen::MatrixXd> mldlt(M);
    if (mldlt.info() != Eigen::Success ||
        mldlt.vectorD().minCoeff() <= 1e-10 * static_cast<double>(N)) {
        throw SingularityError(
            "tvvar", "intercept not identified (constant regressors confounded with the coefficient path); "
                     "anchored mode avoids this");
    }
    const double logdet_m = mldlt.vectorD().array().log().sum();
    const Eigen::VectorXd nu = mldlt.solve(rhs_nu);

    CoreResult core;
    TvVarEstimate& est = core.est;
    est.nu = nu;
    est.z = sys.z;
    est.lambda = lambda;
    est.anchor_mode = sys.mode;
    est.k = k;
    est.p = sys.p;
    est.T_eff = N;
    est.dates = sys.dates;
    est.markets = sys.markets;
    est.log_det_normal = logdet_states + logdet_m;
    est.A_path.resize(static_cast<std::size_t>(N));
    est.residuals_u.resize(N, k);
    est.innovations_v.resize(N, m);

    Eigen::VectorXd prev = anchored ? sys.anchor : Eigen::VectorXd();
    for (Eigen::Index t = 0; t < N; ++t) {
        const Eigen::VectorXd s =
            xu[static_cast<std::size_t>(t)].col(0) - xu[static_cast<std::size_t>(t)].rightCols(k) * nu;
        est.A_path[static_cast<std::size_t>(t)] =
            Eigen::Map<const Eigen::MatrixXd>(s.data(), k, kp);
        est.residuals_u.row(t) =
            sys.y.row(t) - nu.transpose() -
            (est.A_path[static_cast<std::size_t>(t)] * sys.z.row(t).transpose()).transpose();
        if (t == 0 && !anchored) {
            est.innovations_v.row(0).setZero();
        } else {
            est.innovations_v.row(t) = (s - prev).transpose();
        }
        prev = s;
    }
    core.ssr_u = est.residuals_u.squaredNorm();
    core.ssr_v = est.innovations_v.squaredNorm();
    core.logdet_states = logdet_states;
    core.logdet_m = logdet_m;

    est.sigma_u = std::numeric_limits<double>::quiet_NaN();
    est.sigma_v = std::numeric_limits<double>::quiet_NaN();
    est.edf = std::numeric_limits<double>::quiet_NaN();
    if (noise_scales) {
        // Effective parameter count: trace of the hat matrix, built from the
        // diagonal blocks of the full normal-equation inverse. The state-only
        // diagonal comes from the Takahashi backward recursion, the intercept
        // coupling from U_t M^{-1} U_t'.
        const Eigen::MatrixXd minv = mldlt.solve(Eigen::MatrixXd::Identity(k, k));
        double edf = static_cast<double>(N) * minv.trace();
        Eigen::MatrixXd sigma_next;
        for (Eigen::Index t = N - 1; t >= 0; --t) {
            const Eigen::MatrixXd& hi = hinv[static_cast<std::size_t>(t)];
            Eigen::MatrixXd sigma_tt = hi;
            if (t < N - 1) {
                sigma_tt.noalias() += l4 * (hi * sigma_next * hi);
            }
            const Eigen::MatrixXd U = xu[static_cast<std::size_t>(t)].rightCols(k);
            const Eigen::MatrixXd P = sigma_tt + U * minv * U.transpose();
            const Eigen::RowVectorXd z = sys.z.row(t);
            // tr(X_t P X_t') via the per-block partial traces of P.
            Eigen::MatrixXd blocktr(kp, kp);
            for (Eigen::Index a = 0; a < kp; ++a) {
                for (Eigen::Index b = 0; b < kp; ++b) {
                    double s = 0.0;
                    for (Eigen::Index i = 0; i < k; ++i) s += P(a * k + i, b * k + i);
                    blocktr(a, b) = s;
                }
            }
            edf += z * blocktr * z.transpose();
            edf -= 2.0 * (apply_design(z, U, k) * minv).trace();
            sigma_next = std::move(sigma_tt);
        }
        est.edf = edf;
        const double dof_u = static_cast<double>(N * k) - edf;
        const double dof_v = edf - static_cast<double>(k) - (anchored ? 0.0 : static_cast<double>(m));
        if (dof_u > 1e-9) est.sigma_u = std::sqrt(core.ssr_u / dof_u);
        if (dof_v > 1e-9) est.sigma_v = std::sqrt(core.ssr_v / dof_v);
    }
    return core;
}

Eigen::MatrixXd lagged_rows(const Eigen::MatrixXd& y, int p) {
    const Eigen::Index k = y.cols();
    const Eigen::Index N = y.rows() - p;
    Eigen::MatrixXd z(N, k * p);
    for (Eigen::Index t = 0; t < N; ++t) {
        for (int i = 1; i <= p; ++i) {
            z.block(t, (i - 1) * k, 1, k) = y.row(p + t - i);
        }
    }
    return z;
}

}  // namespace

Eigen::MatrixXd TvVarEstimate::lag_block(Eigen::Index t, int i) const {
    return A_path[static_cast<std::size_t>(t)].middleCols((i - 1) * k, k);
}

Eigen::MatrixXd TvVarEstimate::lag_sum(Eigen::Index t) const {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i <= p; ++i) s += lag_block(t, i);
    return s;
}

Eigen::VectorXd TvVarEstimate::fitted(Eigen::Index t) const {
    return nu + A_path[static_cast<std::size_t>(t)] * z.row(t).transpose();
}

StackedSystem build_stacked_system(const ReturnsPanel& returns, int p, const TvVarOptions& opts) {
    const Eigen::Index T = returns.T();
    const Eigen::Index k = returns.k();
    if (p < 1) {
        throw DomainError("tvvar", "lag order must be at least 1");
    }
    if (T <= p || T - p < 2) {
        throw InsufficientDataError("tvvar", "need at least p+2 observations for the stacked system");
    }
    if (!(opts.lambda > 0.0)) {
        throw DomainError("tvvar", "lambda must be positive");
    }

    StackedSystem sys;
    sys.k = k;
    sys.p = p;
    sys.T_eff = T - p;
    sys.lambda = opts.lambda;
    sys.mode = opts.anchor;
    sys.z = lagged_rows(returns.returns, p);
    sys.y = returns.returns.bottomRows(sys.T_eff);
    sys.dates.assign(returns.dates.begin() + p, returns.dates.end());
    sys.markets = returns.markets;

    if (opts.anchor == AnchorMode::ols) {
        // Full-sample time-invariant fit, rank-tolerant so degenerate
        // resampled panels still anchor (minimum-norm solution).
        Eigen::MatrixXd X(sys.T_eff, k * p + 1);
        X.col(0).setOnes();
        X.rightCols(k * p) = sys.z;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
        const Eigen::MatrixXd B = cod.solve(sys.y);
        const Eigen::MatrixXd A0 = B.bottomRows(k * p).transpose();  // k x kp
        sys.anchor = Eigen::Map<const Eigen::VectorXd>(A0.data(), A0.size());
    }
    return sys;
}

TvVarEstimate solve_stacked(const StackedSystem& system, bool noise_scales) {
    return run_solver(system, system.lambda, noise_scales).est;
}

TvVarEstimate fit_tvvar(const ReturnsPanel& returns, int p, const TvVarOptions& opts) {
    StackedSystem sys = build_stacked_system(returns, p, opts);
    if (!opts.gls_refine) {
        return solve_stacked(sys, opts.noise_scales);
    }
    const CoreResult first = run_solver(sys, sys.lambda, true);
    const double su = first.est.sigma_u;
    const double sv = first.est.sigma_v;
    if (!std::isfinite(su) || !std::isfinite(sv) || sv <= 0.0) {
        return first.est;  // ratio not estimable, keep the first pass
    }
    const double refined = std::clamp(su / sv, 1e-4, 1e8);
    sys.lambda = refined;
    return solve_stacked(sys, opts.noise_scales);
}

double neg2_profile_loglik(const StackedSystem& system, double lambda) {
    if (system.mode != AnchorMode::ols) {
        throw DomainError("tvvar", "profile likelihood needs the anchored system (the diffuse path level is free)");
    }
    if (!(lambda > 0.0)) {
        throw DomainError("tvvar", "lambda must be positive");
    }
    const CoreResult core = run_solver(system, lambda, false);
    const double N = static_cast<double>(system.T_eff);
    const double k = static_cast<double>(system.k);
    const double m = static_cast<double>(system.z.cols() * system.k);
    const double q = core.ssr_u + lambda * lambda * core.ssr_v;
    // Gaussian marginal over the coefficient path, intercept and sigma_u
    // profiled out; constants independent of lambda dropped.
    return N * k * std::log(q / (N * k)) + core.logdet_states - 2.0 * N * m * std::log(lambda);
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(26);
    for (int i = 0; i <= 25; ++i) {
        grid.push_back(std::pow(10.0, -2.0 + 0.2 * static_cast<double>(i)));
    }
    return grid;
}

double select_lambda(const ReturnsPanel& returns, int p, const TvVarOptions& opts,
                     const std::vector<double>& grid) {
    if (opts.anchor != AnchorMode::ols) {
        throw DomainError("tvvar", "lambda selection requires anchor mode 'ols'");
    }
    const StackedSystem sys = build_stacked_system(returns, p, opts);
    const std::vector<double>& lambdas = grid.empty() ? default_lambda_grid() : grid;
    double best = lambdas.front();
    double best_val = std::numeric_limits<double>::infinity();
    for (const double l : lambdas) {
        const double val = neg2_profile_loglik(sys, l);
        if (val < best_val) {
            best_val = val;
            best = l;
        }
    }
    return best;
}

}  // namespace tvme::tvvar

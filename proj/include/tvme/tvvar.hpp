#pragma once

#include <Eigen/Dense>

#include <vector>

#include "tvme/dataio.hpp"

namespace tvme::tvvar {

// How the level of the coefficient path is pinned down. "ols" anchors the
// first state at the full-sample time-invariant fit; "diffuse" leaves the
// level free. The diffuse elimination carries data-scale information on top
// of lambda^2-scale intermediates, so it is only reliable for lambda up to
// around the default grid ceiling (1e3); the anchored mode is well
// conditioned for arbitrarily large lambda.
enum class AnchorMode { ols, diffuse };

struct TvVarOptions {
    double lambda = 1.0;               // smoothing ratio, observation vs state precision
    AnchorMode anchor = AnchorMode::ols;
    bool gls_refine = false;           // one feasible-GLS pass: refit at sigma_u/sigma_v
    bool noise_scales = true;          // dof-adjusted sigma estimates (costs an extra O(T) sweep)
};

// Stacked regression form of the random-walk TV-VAR. Stored compactly: the
// observation design row for time t is z.row(t) (the kp lagged values), the
// full matrices with Kronecker structure are only assembled by test oracles.
struct StackedSystem {
    Eigen::MatrixXd y;        // T_eff x k targets
    Eigen::MatrixXd z;        // T_eff x k*p, row t = (y'_{t-1}, ..., y'_{t-p})
    Eigen::VectorXd anchor;   // vec(A_0), size k^2*p; empty in diffuse mode
    double lambda = 1.0;
    AnchorMode mode = AnchorMode::ols;
    Eigen::Index k = 0;
    int p = 0;
    Eigen::Index T_eff = 0;
    std::vector<Date> dates;  // effective dates, length T_eff
    std::vector<std::string> markets;
};

struct TvVarEstimate {
    std::vector<Eigen::MatrixXd> A_path;  // T_eff entries, each k x (k*p): [A_1,t ... A_p,t]
    Eigen::VectorXd nu;                   // time-invariant intercept
    Eigen::MatrixXd z;                    // T_eff x k*p lagged design rows
    Eigen::MatrixXd residuals_u;          // T_eff x k observation residuals
    Eigen::MatrixXd innovations_v;        // T_eff x k^2*p rows of vec(A_t) - vec(A_{t-1});
                                          // row 0 is vec(A_1) - anchor (zero row when diffuse)
    double sigma_u = 0.0;                 // observation noise scale
    double sigma_v = 0.0;                 // state increment scale
    double edf = 0.0;                     // effective parameter count of the fit
    double log_det_normal = 0.0;          // log-determinant of the normal-equation matrix
    double lambda = 1.0;
    AnchorMode anchor_mode = AnchorMode::ols;
    Eigen::Index k = 0;
    int p = 0;
    Eigen::Index T_eff = 0;
    std::vector<Date> dates;
    std::vector<std::string> markets;

    // Lag block A_{i,t}, i in 1..p.
    Eigen::MatrixXd lag_block(Eigen::Index t, int i) const;
    // Sum over lags A_{1,t} + ... + A_{p,t}.
    Eigen::MatrixXd lag_sum(Eigen::Index t) const;
    // Fitted value nu + A_t Z_{t-1}.
    Eigen::VectorXd fitted(Eigen::Index t) const;
};

StackedSystem build_stacked_system(const ReturnsPanel& returns, int p, const TvVarOptions& opts = {});

// Minimizes ||y_t - nu - A_t Z_{t-1}||^2 summed over t, plus
// lambda^2 ||vec(A_t) - vec(A_{t-1})||^2 (with the anchor acting as A_0 when
// anchored). Block-tridiagonal normal equations, O(T_eff) in time.
TvVarEstimate solve_stacked(const StackedSystem& system, bool noise_scales = true);

TvVarEstimate fit_tvvar(const ReturnsPanel& returns, int p, const TvVarOptions& opts = {});

// -2 x profile Gaussian log-likelihood of lambda (sigma_u profiled out,
// states and intercept maximized). Anchored systems only.
double neg2_profile_loglik(const StackedSystem& system, double lambda);

// Grid minimizer of neg2_profile_loglik. Empty grid uses default_lambda_grid.
double select_lambda(const ReturnsPanel& returns, int p, const TvVarOptions& opts,
                     const std::vector<double>& grid = {});

std::vector<double> default_lambda_grid();

}  // namespace tvme::tvvar

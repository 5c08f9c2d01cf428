#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "tvme/dataio.hpp"

namespace tvme::var {

// Time-invariant VAR(p) fitted by per-equation OLS on the common regressor
// set (1, y_{t-1}, ..., y_{t-p}). Coefficient order within an equation is
// intercept first, then lag 1 markets, then lag 2, and so on.
struct VarEstimate {
    int p = 0;
    Eigen::VectorXd nu;                 // k intercepts
    std::vector<Eigen::MatrixXd> A;     // p matrices, each k x k
    Eigen::MatrixXd residuals;          // T_eff x k
    Eigen::MatrixXd design;             // T_eff x (k*p + 1), intercept column first
    Eigen::MatrixXd sigma_u;            // residual covariance, MLE divisor
    Eigen::VectorXd adj_r2;             // per equation
    std::vector<Eigen::MatrixXd> coef_cov_nw;  // per equation, set by newey_west_cov
    Eigen::Index T_eff = 0;
    Eigen::Index k = 0;
    std::vector<std::string> markets;
    std::vector<Date> dates;            // effective sample dates

    // Per-equation coefficient vector in design order.
    Eigen::VectorXd equation_coefs(Eigen::Index i) const;
};

// System BIC over p in {1..pmax}, every candidate scored on the common
// sample t = pmax+1..T. Ties go to the smaller p.
int select_var_lag_bic(const ReturnsPanel& returns, int pmax);

int default_pmax(Eigen::Index T, Eigen::Index k);

VarEstimate fit_var(const ReturnsPanel& returns, int p);

// Bartlett-kernel HAC covariance per equation; bandwidth < 0 selects
// floor(4 * (T_eff/100)^(2/9)). Bandwidth 0 is the White covariance.
std::vector<Eigen::MatrixXd> newey_west_cov(const VarEstimate& estimate, int bandwidth = -1);

int default_nw_bandwidth(Eigen::Index T_eff);

struct ConstancyResult {
    double lc = 0.0;
    int n_params = 0;            // k*(k*p+1) + k score components
    Eigen::VectorXd lc_per_equation;
    double critical_value = 0.0;  // NaN until simulated
    bool reject_hint = false;
};

// Hansen's joint constancy statistic against random-walk parameter drift.
// Scores per equation: regressor * residual for each regressor, plus the
// centered squared residual.
ConstancyResult hansen_lc(const VarEstimate& estimate);

// Null distribution of L_C for i.i.d. Gaussian data of the given shape,
// simulated with independent per-replication generators. Returns the
// `level` quantile (e.g. 0.99).
double simulate_lc_critical_value(Eigen::Index k, int p, Eigen::Index T, double level,
                                  int replications, std::uint64_t seed);

}  // namespace tvme::var

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "tvme/dataio.hpp"

namespace tvme::unitroot {

enum class DetrendModel { constant, constant_trend };

// Local-to-unity constant for the quasi-difference: alpha_bar = 1 + cbar/T.
double default_cbar(DetrendModel model);  // -7.0 constant, -13.5 constant+trend

// Schwert-style augmentation cap: floor(12 * (T/100)^(1/4)).
int default_kmax(Eigen::Index T);

struct GlsDetrendResult {
    Eigen::VectorXd detrended;
    Eigen::VectorXd phi_hat;  // length 1 (constant) or 2 (constant, trend slope)
};

// Quasi-differences y and the deterministic regressors at alpha_bar, fits the
// detrending coefficients by least squares on the transformed data, and
// returns y_t - phi_hat . z_t on the original scale.
GlsDetrendResult gls_detrend(const Eigen::VectorXd& series, DetrendModel model, double cbar);

// Augmentation order by BIC over k in {0..kmax}, all candidates scored with
// the MLE residual variance on the common sample t = kmax+2..T. Ties go to
// the smaller k.
int select_adf_lag_mbic(const Eigen::VectorXd& detrended, int kmax);

struct UnitRootResult {
    double statistic = 0.0;            // t-ratio on the lagged level
    int lag = 0;                       // selected augmentation order
    Eigen::VectorXd phi_hat;           // GLS detrending coefficients
    double critical_value_1pct = 0.0;  // NaN when no built-in threshold applies
    bool reject_at_1pct = false;
    DetrendModel detrend_model = DetrendModel::constant_trend;
};

struct AdfGlsOptions {
    DetrendModel model = DetrendModel::constant_trend;
    int kmax = -1;     // -1: default_kmax(T)
    double cbar = 0.0;  // 0: default_cbar(model)
    // Built-in 1% threshold exists only for the constant+trend model (-3.42).
    // NaN for the constant model unless the caller overrides.
    double critical_value_1pct = 0.0;  // 0: model default
};

UnitRootResult adf_gls_test(const Eigen::VectorXd& series, const AdfGlsOptions& opts = {});

// One test per market column.
std::vector<UnitRootResult> test_panel(const ReturnsPanel& returns, const AdfGlsOptions& opts = {});

}  // namespace tvme::unitroot

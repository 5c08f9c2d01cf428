#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "tvme/dataio.hpp"
#include "tvme/tvvar.hpp"

namespace tvme::efficiency {

struct BandMeta {
    std::string method;  // "mc" or "bootstrap", empty while bands unset
    int replications = 0;
    double level = 0.0;
    std::uint64_t seed = 0;
    bool pointwise = true;  // quantiles are per-t, not uniform over t
};

// Degree-of-efficiency series: zeta[t] is the spectral distance of the
// long-run multiplier from the identity, NaN where the multiplier is
// undefined (near-singular I - sum A_i).
struct ZetaSeries {
    std::vector<Date> dates;
    Eigen::VectorXd zeta;
    Eigen::VectorXd band_lo;   // empty until a band is attached
    Eigen::VectorXd band_hi;
    std::vector<char> inefficient;  // zeta[t] > band_hi[t]
    BandMeta band_meta;

    Eigen::Index T() const { return zeta.size(); }
    bool has_bands() const { return band_hi.size() == zeta.size() && band_hi.size() > 0; }
};

// (I - A_1 - ... - A_p)^{-1}. Throws SingularityError when the condition
// number exceeds cond_cap; callers mapping a path record that t as missing.
Eigen::MatrixXd long_run_multiplier(const std::vector<Eigen::MatrixXd>& A_blocks,
                                    double cond_cap = 1e10);

// Largest singular value of (phi - I). Returns exactly 0 for phi == I.
double spectral_distance(const Eigen::MatrixXd& phi);

ZetaSeries efficiency_degree(const tvvar::TvVarEstimate& estimate, double cond_cap = 1e10);

enum class ExecutionMode { serial, parallel };

struct BandOptions {
    int replications = 5000;
    double level = 0.99;
    std::uint64_t seed = 0;
    bool identity_covariance = false;  // mc only: N(0, I) nulls instead of sample moments
    ExecutionMode exec = ExecutionMode::parallel;
    double cond_cap = 1e10;
};

struct Band {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    int replications = 0;
};

struct NullMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

NullMoments sample_moments(const ReturnsPanel& returns);

// Null band from i.i.d. Gaussian panels with the given moments, each pushed
// through the same fit (p, lambda, anchor) and zeta pipeline. Panels have
// T_eff + p rows so the fitted path has length T_eff. Deterministic given
// seed, independent of thread scheduling.
Band mc_band(Eigen::Index T_eff, Eigen::Index k, int p, const NullMoments& moments,
             const tvvar::TvVarOptions& fit_opts, const BandOptions& opts);

// Same pipeline with null panels built as mean + resampled centered
// observation residuals of the fitted model.
Band bootstrap_band(const tvvar::TvVarEstimate& estimate, const Eigen::VectorXd& mean,
                    const tvvar::TvVarOptions& fit_opts, const BandOptions& opts);

// Copies the band into the series and recomputes the inefficiency flags.
void attach_band(ZetaSeries& series, const Band& band, const BandMeta& meta);

}  // namespace tvme::efficiency

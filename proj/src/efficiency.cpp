#include "tvme/efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tvme/errors.hpp"
#include "tvme/rng.hpp"

namespace tvme::efficiency {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double quantile_type7(std::vector<double>& sorted, double q) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

// Square-root factor of a covariance matrix, tolerant of semi-definite
// input (degenerate resampled panels).
Eigen::MatrixXd cov_factor(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("efficiency", "covariance eigendecomposition failed");
    }
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * clipped.cwiseSqrt().asDiagonal();
}

// One null replication: build a panel by `fill_row`, refit, map to zeta.
// Returns a T_eff vector, NaN where the multiplier is undefined.
template <typename FillRow>
Eigen::VectorXd replicate_zeta(Eigen::Index T_raw, Eigen::Index k, int p,
                               const tvvar::TvVarOptions& fit_opts, double cond_cap, FillRow&& fill_row,
                               std::mt19937_64& gen) {
    Eigen::MatrixXd panel(T_raw, k);
    for (Eigen::Index t = 0; t < T_raw; ++t) {
        fill_row(panel, t, gen);
    }
    tvvar::TvVarOptions opts = fit_opts;
    opts.noise_scales = false;  // bands never need the dof bookkeeping
    opts.gls_refine = false;
    const tvvar::TvVarEstimate est = fit_tvvar(synthetic_returns_panel(panel), p, opts);
    return efficiency_degree(est, cond_cap).zeta;
}

template <typename MakeFillRow>
Band run_replications(Eigen::Index T_eff, Eigen::Index k, int p, const tvvar::TvVarOptions& fit_opts,
                      const BandOptions& opts, MakeFillRow&& make_fill_row) {
    if (opts.replications < 100) {
        throw DomainError("efficiency", "need at least 100 band replications");
    }
    if (!(opts.level > 0.0 && opts.level < 1.0)) {
        throw DomainError("efficiency", "band level must lie in (0,1)");
    }
    const Eigen::Index T_raw = T_eff + p;
    const int R = opts.replications;
    Eigen::MatrixXd zetas(R, T_eff);

    // Each replication draws its generator from (seed, index), so the result
    // is identical whichever thread runs it.
    bool parallel = opts.exec == ExecutionMode::parallel;
#ifndef _OPENMP
    parallel = false;
#endif
    int failures = 0;
    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(+ : failures)
        for (int r = 0; r < R; ++r) {
            try {
                auto gen = rng::make_generator(opts.seed, static_cast<std::uint64_t>(r));
                auto fill = make_fill_row();
                zetas.row(r) =
                    replicate_zeta(T_raw, k, p, fit_opts, opts.cond_cap, fill, gen).transpose();
            } catch (const Error&) {
                zetas.row(r).setConstant(kNaN);
                failures += 1;
            }
        }
#endif
    } else {
        for (int r = 0; r < R; ++r) {
            try {
                auto gen = rng::make_generator(opts.seed, static_cast<std::uint64_t>(r));
                auto fill = make_fill_row();
                zetas.row(r) =
                    replicate_zeta(T_raw, k, p, fit_opts, opts.cond_cap, fill, gen).transpose();
            } catch (const Error&) {
                zetas.row(r).setConstant(kNaN);
                failures += 1;
            }
        }
    }
    if (failures * 10 > R) {
        throw NumericalError("efficiency", "more than 10% of band replications failed to fit");
    }

    Band band;
    band.lo.resize(T_eff);
    band.hi.resize(T_eff);
    band.replications = R - failures;
    const double q_lo = (1.0 - opts.level) / 2.0;
    const double q_hi = 1.0 - q_lo;
    std::vector<double> column;
    column.reserve(static_cast<std::size_t>(R));
    for (Eigen::Index t = 0; t < T_eff; ++t) {
        column.clear();
        for (int r = 0; r < R; ++r) {
            const double v = zetas(r, t);
            if (std::isfinite(v)) column.push_back(v);
        }
        if (column.size() < 2) {
            throw NumericalError("efficiency", "too few defined replications at one time point");
        }
        std::sort(column.begin(), column.end());
        band.lo(t) = quantile_type7(column, q_lo);
        band.hi(t) = quantile_type7(column, q_hi);
    }
    return band;
}

}  // namespace

Eigen::MatrixXd long_run_multiplier(const std::vector<Eigen::MatrixXd>& A_blocks, double cond_cap) {
    if (A_blocks.empty()) {
        throw DomainError("efficiency", "need at least one coefficient block");
    }
    const Eigen::Index k = A_blocks.front().rows();
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(k, k);
    for (const Eigen::MatrixXd& A : A_blocks) {
        if (A.rows() != k || A.cols() != k) {
            throw DomainError("efficiency", "coefficient blocks must all be k x k");
        }
        B -= A;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(k - 1);
    if (!(smin > 0.0) || smax / smin > cond_cap) {
        throw SingularityError("efficiency", "I - sum(A) is singular or near-singular");
    }
    return svd.solve(Eigen::MatrixXd::Identity(k, k));
}

double spectral_distance(const Eigen::MatrixXd& phi) {
    if (phi.rows() != phi.cols()) {
        throw DomainError("efficiency", "long-run multiplier must be square");
    }
    if (!phi.allFinite()) {
        throw DomainError("efficiency", "non-finite entries in the long-run multiplier");
    }
    const Eigen::MatrixXd diff = phi - Eigen::MatrixXd::Identity(phi.rows(), phi.cols());
    if (diff.isZero(0.0)) {
        return 0.0;  // exact by contract, no SVD noise
    }
    return diff.jacobiSvd().singularValues()(0);
}

ZetaSeries efficiency_degree(const tvvar::TvVarEstimate& estimate, double cond_cap) {
    ZetaSeries out;
    out.dates = estimate.dates;
    out.zeta.resize(estimate.T_eff);
    for (Eigen::Index t = 0; t < estimate.T_eff; ++t) {
        std::vector<Eigen::MatrixXd> blocks;
        blocks.reserve(static_cast<std::size_t>(estimate.p));
        for (int i = 1; i <= estimate.p; ++i) {
            blocks.push_back(estimate.lag_block(t, i));
        }
        try {
            out.zeta(t) = spectral_distance(long_run_multiplier(blocks, cond_cap));
        } catch (const SingularityError&) {
            out.zeta(t) = kNaN;  // undefined at this t, never fabricated
        }
    }
    return out;
}

NullMoments sample_moments(const ReturnsPanel& returns) {
    NullMoments m;
    m.mean = returns.returns.colwise().mean().transpose();
    const Eigen::MatrixXd centered = returns.returns.rowwise() - m.mean.transpose();
    m.cov = centered.transpose() * centered / static_cast<double>(returns.T() - 1);
    return m;
}

Band mc_band(Eigen::Index T_eff, Eigen::Index k, int p, const NullMoments& moments,
             const tvvar::TvVarOptions& fit_opts, const BandOptions& opts) {
    Eigen::VectorXd mean = moments.mean;
    Eigen::MatrixXd factor;
    if (opts.identity_covariance) {
        mean = Eigen::VectorXd::Zero(k);
        factor = Eigen::MatrixXd::Identity(k, k);
    } else {
        if (moments.mean.size() != k || moments.cov.rows() != k || moments.cov.cols() != k) {
            throw DomainError("efficiency", "null moments have the wrong dimension");
        }
        factor = cov_factor(moments.cov);
    }
    const auto make_fill_row = [&] {
        return [mean, factor, k](Eigen::MatrixXd& panel, Eigen::Index t, std::mt19937_64& gen) {
            std::normal_distribution<double> normal(0.0, 1.0);
            Eigen::VectorXd n(k);
            for (Eigen::Index j = 0; j < k; ++j) n(j) = normal(gen);
            panel.row(t) = (mean + factor * n).transpose();
        };
    };
    return run_replications(T_eff, k, p, fit_opts, opts, make_fill_row);
}

Band bootstrap_band(const tvvar::TvVarEstimate& estimate, const Eigen::VectorXd& mean,
                    const tvvar::TvVarOptions& fit_opts, const BandOptions& opts) {
    const Eigen::Index k = estimate.k;
    if (mean.size() != k) {
        throw DomainError("efficiency", "mean vector has the wrong dimension");
    }
    if (estimate.residuals_u.rows() < 2) {
        throw InsufficientDataError("efficiency", "too few residuals to resample");
    }
    // Centered observation residuals, resampled rows i.i.d. with replacement.
    Eigen::MatrixXd pool = estimate.residuals_u;
    pool.rowwise() -= estimate.residuals_u.colwise().mean();
    const std::size_t n_pool = static_cast<std::size_t>(pool.rows());
    const auto make_fill_row = [&] {
        return [mean, &pool, n_pool](Eigen::MatrixXd& panel, Eigen::Index t, std::mt19937_64& gen) {
            std::uniform_int_distribution<std::size_t> pick(0, n_pool - 1);
            panel.row(t) = (mean + pool.row(static_cast<Eigen::Index>(pick(gen))).transpose()).transpose();
        };
    };
    return run_replications(estimate.T_eff, k, estimate.p, fit_opts, opts, make_fill_row);
}

void attach_band(ZetaSeries& series, const Band& band, const BandMeta& meta) {
    if (band.lo.size() != series.T() || band.hi.size() != series.T()) {
        throw DomainError("efficiency", "band length does not match the series");
    }
    series.band_lo = band.lo;
    series.band_hi = band.hi;
    series.band_meta = meta;
    series.inefficient.assign(static_cast<std::size_t>(series.T()), 0);
    for (Eigen::Index t = 0; t < series.T(); ++t) {
        // Missing zeta never raises the flag.
        series.inefficient[static_cast<std::size_t>(t)] =
            std::isfinite(series.zeta(t)) && series.zeta(t) > series.band_hi(t) ? 1 : 0;
    }
}

}  // namespace tvme::efficiency

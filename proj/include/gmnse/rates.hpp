#pragma once

#include <cmath>
#include <vector>

#include "gmnse/integrator.hpp"

namespace gmnse {

struct RateFit {
    real slope = 0.0;
    real intercept = 0.0;
    real window_lo = 0.0, window_hi = 0.0;
    int n_points = 0;
};

namespace detail {
inline RateFit loglog_fit(const std::vector<real>& t, const std::vector<real>& v,
                          real lo, real hi) {
    RateFit fit;
    fit.window_lo = lo;
    fit.window_hi = hi;
    real sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi || v[i] <= 0.0) continue;
        real x = std::log(t[i]), y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 10) throw Error("rate fit: fewer than 10 samples in the window");
    fit.n_points = n;
    real denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}
}  // namespace detail

/// Least-squares slope of log ||u(t)||_{H_theta} against log t over the
/// early-time window. The abstract smoothing bound reads t^{-theta} in the
/// scale offset X^{1+s} = H_s adopted here, so for rough data the fitted
/// slope must stay above -theta (minus fitting margin); smooth data fits a
/// slope near zero.
inline RateFit smoothing_rate_fit(const Trajectory& traj, real theta, real window_lo = 1e-3,
                                  real window_hi = 1e-1) {
    if (theta <= 0.0 || theta >= 0.5)
        throw Error("smoothing_rate_fit: theta must lie in (0, 1/2)");
    std::vector<real> t, v;
    if (theta == 0.375) {
        for (const auto& row : traj.diag) {
            t.push_back(row.t);
            v.push_back(row.norm_h38);
        }
    } else {
        for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
            t.push_back(traj.times[j]);
            v.push_back(fractional_norm(traj.snapshots[j], theta));
        }
    }
    return detail::loglog_fit(t, v, window_lo, window_hi);
}

struct DerivativeRateReport {
    RateFit fit;                  // slope of log ||du/dt||_{H_{-3/8}} vs log t
    real lp_norm = 0.0;           // discrete L^p(0,T; H_{-3/8}) norm of du/dt
    real p = 1.5;
    std::vector<real> t, value;   // the central-difference series
};

/// ||du/dt(t_j)||_{H_{-3/8}} by central differences of the stored snapshots.
inline std::pair<std::vector<real>, std::vector<real>> derivative_series(
    const Trajectory& traj) {
    if (traj.snapshots.size() < 3)
        throw Error("derivative_series: need at least 3 snapshots");
    real delta = traj.params.dt * traj.stride;
    std::vector<real> t, v;
    for (std::size_t j = 1; j + 1 < traj.snapshots.size(); ++j) {
        SpectralField du = traj.snapshots[j + 1];
        du.add_scaled(-1.0, traj.snapshots[j - 1]);
        du.scale(1.0 / (2.0 * delta));
        t.push_back(traj.times[j]);
        v.push_back(fractional_norm(du, -0.375));
    }
    return {t, v};
}

/// Log-log slope of the derivative series over the window plus the discrete
/// L^p norm over the whole span (p = 1.5 < 8/5 by default).
inline DerivativeRateReport derivative_rate_fit(const Trajectory& traj,
                                                real window_lo = 1e-3,
                                                real window_hi = 1e-1, real p = 1.5) {
    if (traj.snapshots.size() < 12)
        throw Error("derivative_rate_fit: need at least 12 snapshots");
    DerivativeRateReport rep;
    rep.p = p;
    std::tie(rep.t, rep.value) = derivative_series(traj);
    rep.fit = detail::loglog_fit(rep.t, rep.value, window_lo, window_hi);
    real delta = traj.params.dt * traj.stride;
    real acc = 0.0;
    for (real v : rep.value) acc += std::pow(v, p) * delta;
    rep.lp_norm = std::pow(acc, 1.0 / p);
    return rep;
}

}  // namespace gmnse

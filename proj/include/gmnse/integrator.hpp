#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gmnse/rhs.hpp"

namespace gmnse {

struct CflError : Error {
    real max_speed, dt, limit;
    CflError(real ms, real dt_, real lim)
        : Error("CFL violation: max |u| = " + std::to_string(ms) + ", dt = " +
                std::to_string(dt_) + " > " + std::to_string(lim)),
          max_speed(ms),
          dt(dt_),
          limit(lim) {}
};

/// Per-step scalar diagnostics. `work` is <u, f>, kept for the energy
/// accounting; the CSV emitter writes the six standard columns.
struct DiagRow {
    real t = 0.0;
    real norm_h = 0.0;
    real norm_v = 0.0;
    real norm_l4 = 0.0;
    real norm_h38 = 0.0;
    real fn = 1.0;
    real work = 0.0;
};

/// Time-stamped orbit of the semigroup: strided snapshots plus dense scalar
/// diagnostics (one row per step, including both endpoints).
struct Trajectory {
    SimParams params;
    int stride = 1;  // snapshot stride in steps; 0 = diagnostics only
    std::vector<real> times;
    std::vector<SpectralField> snapshots;
    std::vector<DiagRow> diag;
    SpectralField final_state;

    real t_end() const { return diag.empty() ? 0.0 : diag.back().t; }
};

/// One integrating-factor RK4 stepper bound to a parameter set. The stiff
/// Stokes part is applied exactly through e^{-nu |k|^2 dt} multipliers; the
/// tapered convection plus forcing advance by classical RK4 in the
/// integrating-factor variables. Single shear modes therefore decay by
/// exactly e^{-nu dt} per step, which the oracle tests pin.
class Stepper {
  public:
    explicit Stepper(const SimParams& p) : p_(p), ws_(p.grid) {
        const Grid& g = *p.grid;
        e_half_.resize(g.nspec);
        e_full_.resize(g.nspec);
        for (std::size_t i = 0; i < g.nspec; ++i) {
            e_half_[i] = std::exp(-p.nu * g.ksq[i] * (p.dt / 2.0));
            e_full_[i] = e_half_[i] * e_half_[i];
        }
    }

    const SimParams& params() const { return p_; }

    /// Advances one step of size dt. info0, if given, receives the stage-1
    /// diagnostics (norms of the *input* state).
    SpectralField step(const SpectralField& u, RhsInfo* info0 = nullptr) {
        const real h = p_.dt;
        RhsInfo info;
        SpectralField a1 = eval_nonstiff(u, p_, ws_, &info);
        if (info0) *info0 = info;
        if (info.max_speed > 0.0) {
            real limit = p_.cfl * p_.grid->dx() / info.max_speed;
            if (h > limit) throw CflError(info.max_speed, h, limit);
        }

        SpectralField u2 = u;
        u2.add_scaled(h / 2.0, a1);
        u2.apply_multiplier(e_half_);
        SpectralField a2 = eval_nonstiff(u2, p_, ws_);

        SpectralField u3 = u;
        u3.apply_multiplier(e_half_);
        u3.add_scaled(h / 2.0, a2);
        SpectralField a3 = eval_nonstiff(u3, p_, ws_);

        SpectralField u4 = u;
        u4.apply_multiplier(e_full_);
        SpectralField ea3 = a3;
        ea3.apply_multiplier(e_half_);
        u4.add_scaled(h, ea3);
        SpectralField a4 = eval_nonstiff(u4, p_, ws_);

        SpectralField out = u;
        out.apply_multiplier(e_full_);
        a1.apply_multiplier(e_full_);
        out.add_scaled(h / 6.0, a1);
        a2.add(a3);
        a2.apply_multiplier(e_half_);
        out.add_scaled(h / 3.0, a2);
        out.add_scaled(h / 6.0, a4);

        out.apply_dealias();
        out = leray_project(out);
        return out;
    }

    FftWorkspace& workspace() { return ws_; }

  private:
    SimParams p_;
    FftWorkspace ws_;
    std::vector<real> e_half_;
    std::vector<real> e_full_;
};

namespace detail {
inline DiagRow make_diag_row(const SpectralField& u, const SimParams& p, real t,
                             real l4, real fn) {
    DiagRow r;
    r.t = t;
    r.norm_h = norm_h(u);
    r.norm_v = norm_v(u);
    r.norm_l4 = l4;
    r.norm_h38 = fractional_norm(u, 0.375);
    r.fn = fn;
    r.work = p.has_forcing() ? inner_product(u, p.forcing) : 0.0;
    return r;
}
}  // namespace detail

/// Integrates u0 forward by t_end (which must sit on the step grid).
/// Deterministic: identical inputs produce bit-identical trajectories, and
/// restarting from an aligned split point reproduces the long run exactly.
inline Trajectory integrate(const SpectralField& u0, const SimParams& p, real t_end,
                            int stride = 1) {
    if (t_end <= 0.0) throw Error("integrate: t_end must be positive");
    if (stride < 0) throw Error("integrate: stride must be >= 0");
    auto nsteps = static_cast<long long>(std::llround(t_end / p.dt));
    if (nsteps < 1 || std::abs(nsteps * p.dt - t_end) > 1e-9 * std::max(real(1.0), t_end))
        throw Error("integrate: t_end is not a multiple of dt");

    Trajectory traj;
    traj.params = p;
    traj.stride = stride;
    traj.diag.reserve(nsteps + 1);

    Stepper stepper(p);
    SpectralField u = u0;
    FftWorkspace& ws = stepper.workspace();
    for (long long j = 0; j < nsteps; ++j) {
        real t = j * p.dt;
        if (stride > 0 && j % stride == 0) {
            traj.times.push_back(t);
            traj.snapshots.push_back(u);
        }
        RhsInfo info;
        SpectralField next = stepper.step(u, &info);
        traj.diag.push_back(detail::make_diag_row(u, p, t, info.l4, info.fn));
        u = std::move(next);
    }
    real l4 = l4_norm(u, ws);
    traj.diag.push_back(detail::make_diag_row(u, p, nsteps * p.dt, l4,
                                              taper(l4, p.taper_N)));
    if (stride > 0 && nsteps % stride == 0) {
        traj.times.push_back(nsteps * p.dt);
        traj.snapshots.push_back(u);
    }
    traj.final_state = std::move(u);
    return traj;
}

}  // namespace gmnse

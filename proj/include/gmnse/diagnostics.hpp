#pragma once

#include <optional>
#include <sstream>
#include <vector>

#include "gmnse/integrator.hpp"

namespace gmnse {

/// Per-interval residual of the discrete energy balance
///   1/2 d/dt ||u||_H^2 + nu ||u||_V^2 = <u, f>
/// with trapezoid quadrature on the dense diagnostic grid. Along an exact
/// orbit the residual is pure quadrature error, second order in dt.
inline std::vector<real> energy_budget(const Trajectory& traj) {
    if (traj.stride != 1) throw Error("energy_budget: trajectory must have stride 1");
    const auto& d = traj.diag;
    if (d.size() < 2) throw Error("energy_budget: need at least two samples");
    real dt = traj.params.dt;
    real nu = traj.params.nu;
    std::vector<real> res;
    res.reserve(d.size() - 1);
    for (std::size_t j = 0; j + 1 < d.size(); ++j) {
        real dE = 0.5 * (d[j + 1].norm_h * d[j + 1].norm_h - d[j].norm_h * d[j].norm_h);
        real diss = nu * 0.5 * dt *
                    (d[j + 1].norm_v * d[j + 1].norm_v + d[j].norm_v * d[j].norm_v);
        real work = 0.5 * dt * (d[j + 1].work + d[j].work);
        res.push_back(dE + diss - work);
    }
    return res;
}

struct EnergyInequalityReport {
    std::vector<real> t;
    std::vector<real> v;   // V(u(t)) on the diagnostic grid
    real max_rise = 0.0;   // max over s <= t of V(t) - V(s)
    real max_span = 0.0;   // max V - min V (equality drift)
    real tol = 0.0;
    bool monotone_ok = false;
    bool equality_ok = false;
};

/// V(u(t)) = 1/2 ||u||_H^2 + nu int_0^t ||u||_V^2 - int_0^t <u,f>, trapezoid
/// on the diagnostic grid. For the exact flow V is constant; the report
/// asserts V nonincreasing within tol and tracks the total drift.
inline EnergyInequalityReport energy_inequality_check(const Trajectory& traj, real tol) {
    const auto& d = traj.diag;
    if (d.size() < 2) throw Error("energy_inequality_check: need dense diagnostics");
    real dt = traj.params.dt;
    real nu = traj.params.nu;
    EnergyInequalityReport rep;
    rep.tol = tol;
    real cum_diss = 0.0, cum_work = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j > 0) {
            cum_diss += 0.5 * dt *
                        (d[j].norm_v * d[j].norm_v + d[j - 1].norm_v * d[j - 1].norm_v);
            cum_work += 0.5 * dt * (d[j].work + d[j - 1].work);
        }
        rep.t.push_back(d[j].t);
        rep.v.push_back(0.5 * d[j].norm_h * d[j].norm_h + nu * cum_diss - cum_work);
    }
    real running_min = rep.v.front();
    real vmin = rep.v.front(), vmax = rep.v.front();
    for (real v : rep.v) {
        rep.max_rise = std::max(rep.max_rise, v - running_min);
        running_min = std::min(running_min, v);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    rep.max_span = vmax - vmin;
    rep.monotone_ok = rep.max_rise <= tol;
    rep.equality_ok = rep.max_span <= tol;
    return rep;
}

/// Residual of the very weak formulation tested against a fixed
/// divergence-free phi:
///   d/dt (u, phi) - (u, A phi) - F_N(u) <u x u, grad phi> - (f, phi),
/// with a central difference in time at the interior snapshots. All
/// derivatives sit on phi; the convective pairing is collocation
/// quadrature, independent of the solver's own convective path.
inline std::vector<std::pair<real, real>> very_weak_residual(const Trajectory& traj,
                                                             const SpectralField& phi,
                                                             const SimParams& p) {
    if (traj.snapshots.size() < 3)
        throw Error("very_weak_residual: need at least 3 snapshots");
    if (phi.grid != p.grid)
        throw GridMismatchError("very_weak_residual: phi on wrong grid");
    if (max_divergence(phi) > 1e-12 * std::max(norm_h(phi), real(1e-300)))
        throw ContractError("very_weak_residual: phi not divergence-free");

    const Grid& g = *p.grid;
    FftWorkspace ws(p.grid);
    real delta = p.dt * traj.stride;
    std::size_t m = traj.snapshots.size();

    std::vector<real> pairing(m), stokes(m), convect(m);
    for (std::size_t j = 0; j < m; ++j) {
        const SpectralField& u = traj.snapshots[j];
        pairing[j] = inner_product(u, phi);
        // nu (u, A phi) = -nu (2 pi)^3 sum |k|^2 Re(uhat . conj(phihat))
        real s = 0.0;
        for (int dcomp = 0; dcomp < 3; ++dcomp) {
            const auto& a = u.comp[dcomp];
            const auto& b = phi.comp[dcomp];
            for_each_mode(g, [&](std::size_t idx, int, int, int i3) {
                s += g.mult(i3) * g.ksq[idx] *
                     (a[idx].real() * b[idx].real() + a[idx].imag() * b[idx].imag());
            });
        }
        stokes[j] = -p.nu * Grid::volume() * s;
        real fn = taper(l4_norm(u, ws), p.taper_N);
        convect[j] = fn * tensor_grad_inner(u, phi, ws);
    }
    real force = p.has_forcing() ? inner_product(p.forcing, phi) : 0.0;

    std::vector<std::pair<real, real>> out;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        real dmdt = (pairing[j + 1] - pairing[j - 1]) / (2.0 * delta);
        out.emplace_back(traj.times[j], dmdt - stokes[j] - convect[j] - force);
    }
    return out;
}

struct SweepReport {
    long long count = 0;
    long long violations = 0;
    real worst_margin = 0.0;  // most positive lhs - rhs seen
    real max_ratio = 0.0;     // max lhs / rhs over nondegenerate draws
    std::string first_violation;
    bool pass() const { return violations == 0; }
};

/// Random sweep of the taper Lipschitz bound
///   |f_N(s) - f_N(t)| <= |s - t| / max{s, t}
/// and of f_N(r) r <= N, with 1e-12 slack.
inline SweepReport lipschitz_check_taper(long long samples, std::uint64_t seed) {
    if (samples < 1) throw Error("lipschitz_check_taper: samples must be >= 1");
    Rng rng(seed);
    SweepReport rep;
    auto draw = [&](real lo, real hi) {  // log-uniform
        return std::exp(rng.uniform(std::log(lo), std::log(hi)));
    };
    for (long long i = 0; i < samples; ++i) {
        real s = rng.uniform() < 0.1 ? 0.0 : draw(1e-6, 1e3);
        real t = rng.uniform() < 0.05 ? s : draw(1e-6, 1e3);
        real N = rng.uniform() < 0.1 ? 0.0 : draw(1e-3, 1e2);
        if (s + t <= 0.0) continue;
        ++rep.count;
        real lhs = std::abs(taper(s, N) - taper(t, N));
        real rhs = std::abs(s - t) / std::max(s, t);
        real margin = lhs - rhs - 1e-12;
        rep.worst_margin = std::max(rep.worst_margin, lhs - rhs);
        if (rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
        real bound_margin = taper(std::max(s, t), N) * std::max(s, t) - N - 1e-12;
        if (margin > 0.0 || bound_margin > 0.0) {
            ++rep.violations;
            if (rep.first_violation.empty()) {
                std::ostringstream os;
                os << "s=" << s << " t=" << t << " N=" << N;
                rep.first_violation = os.str();
            }
        }
    }
    return rep;
}

/// Random sweep of the tapered tensor bounds
///   ||F_N(u) uxu - F_N(v) vxv||_{L2} <= 3N ||u - v||_{L4}
///   ||F_N(u) uxu||_{L2}             <=  N ||u||_{L4}
/// with both sides evaluated by collocation quadrature, 1e-10 relative slack.
inline SweepReport tensor_lipschitz_check(int pairs, std::shared_ptr<const Grid> g,
                                          std::uint64_t seed) {
    if (pairs < 1) throw Error("tensor_lipschitz_check: pairs must be >= 1");
    FftWorkspace ws(g);
    Rng rng(seed);
    SweepReport rep;
    const real dx3 = g->dx() * g->dx() * g->dx();
    for (int it = 0; it < pairs; ++it) {
        std::uint64_t pair_seed = rng.next_u64();
        Rng prng(pair_seed);
        SpectralField u = random_field(g, prng, std::exp(prng.uniform(-1.0, 2.0)));
        SpectralField v = random_field(g, prng, std::exp(prng.uniform(-1.0, 2.0)));
        auto up = to_physical_copy(u, ws);
        real l4u = physical_stats(ws).l4;
        auto vp = to_physical_copy(v, ws);
        real l4v = physical_stats(ws).l4;
        real N = std::exp(prng.uniform(std::log(0.25), std::log(4.0))) *
                 std::max({l4u, l4v, real(1e-6)});
        real fu = taper(l4u, N), fv = taper(l4v, N);

        real diff2 = 0.0, norm2 = 0.0, dl4 = 0.0;
        std::vector<real> d2(g->nphys, 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (std::size_t x = 0; x < g->nphys; ++x) {
                    real tu = fu * up[i][x] * up[j][x];
                    real tv = fv * vp[i][x] * vp[j][x];
                    diff2 += (tu - tv) * (tu - tv);
                    norm2 += tu * tu;
                }
        for (std::size_t x = 0; x < g->nphys; ++x) {
            real s2 = 0.0;
            for (int i = 0; i < 3; ++i) {
                real d = up[i][x] - vp[i][x];
                s2 += d * d;
            }
            d2[x] = s2;
        }
        for (std::size_t x = 0; x < g->nphys; ++x) dl4 += d2[x] * d2[x];
        real lhs1 = std::sqrt(diff2 * dx3);
        real rhs1 = 3.0 * N * std::pow(dl4 * dx3, 0.25);
        real lhs2 = std::sqrt(norm2 * dx3);
        real rhs2 = N * l4u;
        ++rep.count;
        real m1 = lhs1 - rhs1 * (1.0 + 1e-10);
        real m2 = lhs2 - rhs2 * (1.0 + 1e-10);
        rep.worst_margin = std::max({rep.worst_margin, lhs1 - rhs1, lhs2 - rhs2});
        if (rhs1 > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs1 / rhs1);
        if (m1 > 0.0 || m2 > 0.0) {
            ++rep.violations;
            if (rep.first_violation.empty())
                rep.first_violation = "pair_seed=" + std::to_string(pair_seed);
        }
    }
    return rep;
}

}  // namespace gmnse

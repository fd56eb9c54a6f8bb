#pragma once

#include "gmnse/params.hpp"
#include "gmnse/spectral_ops.hpp"

namespace gmnse {

/// The scalar taper f_N(r) = min{1, N/r}, with f_N(0) = 1. Satisfies
/// |f_N(s) - f_N(t)| <= |s - t| / max{s, t} and f_N(r) r <= N.
inline real taper(real r, real N) {
    if (r < 0.0 || N < 0.0) throw Error("taper: negative argument");
    if (r == 0.0) return 1.0;
    return std::min(real(1.0), N / r);
}

/// F_N(u) = f_N(||u||_{L4}).
inline real modification_factor(const SpectralField& u, real N, FftWorkspace& ws) {
    return taper(l4_norm(u, ws), N);
}

inline real modification_factor(const SpectralField& u, real N) {
    FftWorkspace ws(u.grid);
    return modification_factor(u, N, ws);
}

struct RhsInfo {
    real l4 = 0.0;
    real fn = 1.0;
    real max_speed = 0.0;
};

/// Convection-plus-forcing part of the right-hand side:
///   -F_N(u) P div(u x u) + P f.
/// This is the stage function of the integrating-factor scheme (the stiff
/// Stokes term is applied exactly through exponentials there). One physical
/// transform pass serves the L4 norm, the CFL speed and the convective
/// products. The F_N factor multiplies the convective term on a single
/// arithmetic path for every N (including 0 and +infinity), so orbits whose
/// taper saturates at the same value agree bit for bit.
inline SpectralField eval_nonstiff(const SpectralField& u, const SimParams& p,
                                   FftWorkspace& ws, RhsInfo* info = nullptr) {
    const Grid& g = *p.grid;
    ws.to_physical(u);
    PhysicalStats stats = physical_stats(ws);
    real fn = taper(stats.l4, p.taper_N);

    SpectralField rhs(p.grid);
    detail::tensor_divergence_from_physical(ws, rhs);
    rhs.scale(-fn);

    for (int d = 0; d < 3; ++d) {
        const auto& fc = p.forcing.comp[d];
        auto& rc = rhs.comp[d];
        for (std::size_t i = 0; i < g.nspec; ++i) rc[i] += fc[i];
    }
    if (info) *info = {stats.l4, fn, stats.max_speed};
    return rhs;
}

/// Full right-hand side of the very weak formulation:
///   nu A u - F_N(u) P div(u x u) + P f,   A = -|k|^2 diagonal.
inline SpectralField eval_rhs(const SpectralField& u, const SimParams& p,
                              FftWorkspace& ws, RhsInfo* info = nullptr) {
    const Grid& g = *p.grid;
    SpectralField rhs = eval_nonstiff(u, p, ws, info);
    for (int d = 0; d < 3; ++d) {
        const auto& uc = u.comp[d];
        auto& rc = rhs.comp[d];
        for (std::size_t i = 0; i < g.nspec; ++i) rc[i] -= p.nu * g.ksq[i] * uc[i];
    }
    return rhs;
}

inline SpectralField gmnse_rhs(const SpectralField& u, const SimParams& p) {
    real div = max_divergence(u);
    if (div > 1e-12 * std::max(norm_h(u), real(1e-300)))
        throw ContractError("gmnse_rhs: input not divergence-free");
    FftWorkspace ws(p.grid);
    return eval_rhs(u, p, ws);
}

}  // namespace gmnse

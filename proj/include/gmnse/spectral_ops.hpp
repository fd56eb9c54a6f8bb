#pragma once

#include <algorithm>
#include <vector>

#include "gmnse/fft.hpp"
#include "gmnse/field.hpp"

namespace gmnse {

struct PhysicalStats {
    real l4 = 0.0;        // L4 norm by collocation quadrature
    real max_speed = 0.0;  // max_x |u(x)|
};

/// Quadrature stats from the workspace's current physical buffers.
inline PhysicalStats physical_stats(const FftWorkspace& ws) {
    const Grid& g = *ws.grid();
    const real* u1 = ws.physical(0);
    const real* u2 = ws.physical(1);
    const real* u3 = ws.physical(2);
    real sum4 = 0.0, max2 = 0.0;
    for (std::size_t i = 0; i < g.nphys; ++i) {
        real s2 = u1[i] * u1[i] + u2[i] * u2[i] + u3[i] * u3[i];
        sum4 += s2 * s2;
        max2 = std::max(max2, s2);
    }
    real dx3 = g.dx() * g.dx() * g.dx();
    return {std::pow(sum4 * dx3, 0.25), std::sqrt(max2)};
}

/// ||u||_{L4} = ( sum_x |u(x)|^4 dx^3 )^{1/4} on the n^3 collocation grid.
inline real l4_norm(const SpectralField& u, FftWorkspace& ws) {
    ws.to_physical(u);
    return physical_stats(ws).l4;
}

inline real l4_norm(const SpectralField& u) {
    FftWorkspace ws(u.grid);
    return l4_norm(u, ws);
}

namespace detail {

/// P div(u x u) from physical component buffers already loaded in ws.
/// Forms the six distinct products pointwise, transforms, contracts with
/// i k_j, then dealiases, projects and re-symmetrizes the result.
inline void tensor_divergence_from_physical(FftWorkspace& ws, SpectralField& out) {
    const Grid& g = *ws.grid();
    out.set_zero();
    static constexpr int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
    for (const auto& pr : pairs) {
        int a = pr[0], b = pr[1];
        const real* ua = ws.physical(a);
        const real* ub = ws.physical(b);
        real* p = ws.product_buffer();
        for (std::size_t i = 0; i < g.nphys; ++i) p[i] = ua[i] * ub[i];
        const complex* t = ws.forward_product();
        // (div T)_a += i k_b T_ab, and symmetrically for a != b
        for_each_mode(g, [&](std::size_t idx, int k1, int k2, int k3) {
            const int k[3] = {k1, k2, k3};
            complex v = t[idx];
            out.comp[a][idx] += complex(-real(k[b]) * v.imag(), real(k[b]) * v.real());
            if (a != b)
                out.comp[b][idx] += complex(-real(k[a]) * v.imag(), real(k[a]) * v.real());
        });
    }
    out.apply_dealias();
    out = leray_project(out);
    detail::symmetrize_planes(out);
}

}  // namespace detail

/// Galerkin convective term P div(u x u) (equal to P (u.grad)u for
/// divergence-free u). Dealiased with the strict two-thirds mask, so
/// <tensor_divergence(u), u> vanishes to roundoff.
inline SpectralField tensor_divergence(const SpectralField& u, FftWorkspace& ws) {
    real div = max_divergence(u);
    real h = norm_h(u);
    if (div > 1e-12 * std::max(h, real(1e-300)))
        throw ContractError("tensor_divergence: input not divergence-free");
    ws.to_physical(u);
    SpectralField out(u.grid);
    detail::tensor_divergence_from_physical(ws, out);
    return out;
}

inline SpectralField tensor_divergence(const SpectralField& u) {
    FftWorkspace ws(u.grid);
    return tensor_divergence(u, ws);
}

/// Physical values of an arbitrary spectral scalar (test/oracle path).
inline std::vector<real> scalar_to_physical(const std::vector<complex>& c,
                                            FftWorkspace& ws) {
    return ws.scalar_to_physical(c);
}

/// Physical copies of the three velocity components (test/oracle path).
inline std::array<std::vector<real>, 3> to_physical_copy(const SpectralField& u,
                                                         FftWorkspace& ws) {
    ws.to_physical(u);
    std::array<std::vector<real>, 3> out;
    const Grid& g = *ws.grid();
    for (int d = 0; d < 3; ++d)
        out[d].assign(ws.physical(d), ws.physical(d) + g.nphys);
    return out;
}

/// Spectral derivative d(comp)/dx_j as a scalar coefficient array.
inline std::vector<complex> spectral_derivative(const SpectralField& u, int comp, int j) {
    const Grid& g = *u.grid;
    std::vector<complex> out(g.nspec);
    for_each_mode(g, [&](std::size_t idx, int k1, int k2, int k3) {
        const int k[3] = {k1, k2, k3};
        complex v = u.comp[comp][idx];
        out[idx] = complex(-real(k[j]) * v.imag(), real(k[j]) * v.real());
    });
    return out;
}

/// <u x u, grad phi> by collocation quadrature: sum_x sum_ij u_i u_j d_i phi_j dx^3.
/// Independent of the tensor_divergence code path (derivatives stay on phi).
inline real tensor_grad_inner(const SpectralField& u, const SpectralField& phi,
                              FftWorkspace& ws) {
    const Grid& g = *u.grid;
    auto up = to_physical_copy(u, ws);
    real sum = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            auto dphi = scalar_to_physical(spectral_derivative(phi, j, i), ws);
            for (std::size_t x = 0; x < g.nphys; ++x)
                sum += up[i][x] * up[j][x] * dphi[x];
        }
    real dx3 = g.dx() * g.dx() * g.dx();
    return sum * dx3;
}

/// <(u.grad)u, phi> with the derivative on u (advective form); the other
/// side of the strong-to-weak identity.
inline real advective_inner(const SpectralField& u, const SpectralField& phi,
                            FftWorkspace& ws) {
    const Grid& g = *u.grid;
    auto up = to_physical_copy(u, ws);
    auto php = to_physical_copy(phi, ws);
    real sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        std::vector<real> adv(g.nphys, 0.0);
        for (int j = 0; j < 3; ++j) {
            auto du = scalar_to_physical(spectral_derivative(u, i, j), ws);
            for (std::size_t x = 0; x < g.nphys; ++x) adv[x] += up[j][x] * du[x];
        }
        for (std::size_t x = 0; x < g.nphys; ++x) sum += adv[x] * php[i][x];
    }
    real dx3 = g.dx() * g.dx() * g.dx();
    return sum * dx3;
}

/// Empirical constant of the embedding H_{3/8} into L4 on this grid:
/// max over random divergence-free fields of ||u||_{L4} / ||u||_{H_{3/8}}.
inline real measure_embedding_constant(std::shared_ptr<const Grid> g, int samples,
                                       std::uint64_t seed) {
    FftWorkspace ws(g);
    Rng rng(seed);
    real worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        SpectralField u = random_field(g, rng, 1.0);
        real denom = fractional_norm(u, 0.375);
        if (denom == 0.0) continue;
        worst = std::max(worst, l4_norm(u, ws) / denom);
    }
    return worst;
}

}  // namespace gmnse

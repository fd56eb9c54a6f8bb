#pragma once

#include <array>
#include <complex>
#include <cstring>
#include <memory>
#include <vector>

#include "gmnse/grid.hpp"
#include "gmnse/random.hpp"

namespace gmnse {

using complex = std::complex<real>;

/// Divergence-free velocity field in truncated Fourier coefficients.
///
/// u(x) = sum_k uhat(k) e^{i k.x}, with uhat(-k) = conj(uhat(k)) implied by
/// the half-spectrum storage (see Grid). With that convention the L2 inner
/// product is (u,v) = (2*pi)^3 sum_k uhat(k).conj(vhat(k)), which fixes the
/// normalization used by every norm in the library.
struct SpectralField {
    std::shared_ptr<const Grid> grid;
    std::array<std::vector<complex>, 3> comp;

    SpectralField() = default;
    explicit SpectralField(std::shared_ptr<const Grid> g) : grid(std::move(g)) {
        for (auto& c : comp) c.assign(grid->nspec, complex(0.0, 0.0));
    }

    void set_zero() {
        for (auto& c : comp) std::fill(c.begin(), c.end(), complex(0.0, 0.0));
    }

    void scale(real a) {
        for (auto& c : comp)
            for (auto& z : c) z *= a;
    }

    /// this += a * other
    void add_scaled(real a, const SpectralField& other) {
        for (int d = 0; d < 3; ++d) {
            const auto& src = other.comp[d];
            auto& dst = comp[d];
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
        }
    }

    void add(const SpectralField& other) { add_scaled(1.0, other); }

    /// Componentwise multiply by a real k-diagonal multiplier.
    void apply_multiplier(const std::vector<real>& m) {
        for (auto& c : comp)
            for (std::size_t i = 0; i < c.size(); ++i) c[i] *= m[i];
    }

    void apply_dealias() {
        const auto& mask = grid->dealias;
        for (auto& c : comp)
            for (std::size_t i = 0; i < c.size(); ++i)
                if (!mask[i]) c[i] = complex(0.0, 0.0);
    }

    bool bitwise_equal(const SpectralField& other) const {
        for (int d = 0; d < 3; ++d)
            if (std::memcmp(comp[d].data(), other.comp[d].data(),
                            comp[d].size() * sizeof(complex)) != 0)
                return false;
        return true;
    }
};

namespace detail {

/// Restore exact conjugate symmetry on the self-paired k3 planes (k3 = 0 and
/// k3 = n/2). The representative of each (k, -k) pair is the smaller linear
/// index; its mirror is overwritten with the conjugate. Self-paired modes get
/// a real coefficient. Interior k3 planes are symmetric by construction.
inline void symmetrize_planes(SpectralField& u) {
    const Grid& g = *u.grid;
    int n = g.n;
    for (int i3 : {0, n / 2}) {
        for (int i1 = 0; i1 < n; ++i1) {
            int j1 = (n - i1) % n;
            for (int i2 = 0; i2 < n; ++i2) {
                int j2 = (n - i2) % n;
                std::size_t a = g.index(i1, i2, i3);
                std::size_t b = g.index(j1, j2, i3);
                for (int d = 0; d < 3; ++d) {
                    if (a == b)
                        u.comp[d][a] = complex(u.comp[d][a].real(), 0.0);
                    else if (a < b)
                        u.comp[d][b] = std::conj(u.comp[d][a]);
                }
            }
        }
    }
}

}  // namespace detail

/// Projects uhat(k) onto the divergence-free subspace: uhat - k (k.uhat)/|k|^2.
/// The k = 0 coefficient is zeroed (zero-mean fields); gradients are the kernel.
/// Idempotent and self-adjoint.
inline SpectralField leray_project(const SpectralField& v) {
    SpectralField u = v;
    const Grid& g = *u.grid;
    for_each_mode(g, [&](std::size_t idx, int k1, int k2, int k3) {
        real k2sum = g.ksq[idx];
        if (k2sum == 0.0) {
            for (int d = 0; d < 3; ++d) u.comp[d][idx] = complex(0.0, 0.0);
            return;
        }
        complex kdot = real(k1) * u.comp[0][idx] + real(k2) * u.comp[1][idx] +
                       real(k3) * u.comp[2][idx];
        complex s = kdot / k2sum;
        u.comp[0][idx] -= real(k1) * s;
        u.comp[1][idx] -= real(k2) * s;
        u.comp[2][idx] -= real(k3) * s;
    });
    return u;
}

/// max_k |k . uhat(k)|, the residual divergence in spectral form.
inline real max_divergence(const SpectralField& u) {
    const Grid& g = *u.grid;
    real worst = 0.0;
    for_each_mode(g, [&](std::size_t idx, int k1, int k2, int k3) {
        complex kdot = real(k1) * u.comp[0][idx] + real(k2) * u.comp[1][idx] +
                       real(k3) * u.comp[2][idx];
        worst = std::max(worst, std::abs(kdot));
    });
    return worst;
}

/// L2 inner product via Parseval; see the normalization note on SpectralField.
inline real inner_product(const SpectralField& u, const SpectralField& v) {
    if (u.grid != v.grid)
        throw GridMismatchError("inner_product: fields live on different grids");
    const Grid& g = *u.grid;
    real sum = 0.0;
    for (int d = 0; d < 3; ++d) {
        const auto& a = u.comp[d];
        const auto& b = v.comp[d];
        for_each_mode(g, [&](std::size_t idx, int, int, int i3) {
            sum += g.mult(i3) *
                   (a[idx].real() * b[idx].real() + a[idx].imag() * b[idx].imag());
        });
    }
    return Grid::volume() * sum;
}

/// Norm of the fractional power space H_alpha, alpha in [-1, 1]:
/// ( sum_k |k|^{4 alpha} |uhat(k)|^2 (2 pi)^3 )^{1/2}. alpha = 0 is the H
/// norm, 1/2 the V norm, -1/2 the V* proxy. The k = 0 mode is skipped
/// (fields are zero-mean; negative powers would be singular there).
inline real fractional_norm(const SpectralField& u, real alpha) {
    const Grid& g = *u.grid;
    real sum = 0.0;
    for_each_mode(g, [&](std::size_t idx, int, int, int i3) {
        real k2sum = g.ksq[idx];
        if (k2sum == 0.0) return;
        real w = alpha == 0.0 ? 1.0 : std::pow(k2sum, 2.0 * alpha);
        real a2 = 0.0;
        for (int d = 0; d < 3; ++d) a2 += std::norm(u.comp[d][idx]);
        sum += g.mult(i3) * w * a2;
    });
    return std::sqrt(Grid::volume() * sum);
}

inline real norm_h(const SpectralField& u) { return fractional_norm(u, 0.0); }
inline real norm_v(const SpectralField& u) { return fractional_norm(u, 0.5); }

/// Adds the conjugate mode pair +-k with amplitude amp at +k. For k3 > 0 the
/// mirror is implicit in the storage; on the k3 = 0 plane it is written
/// explicitly. k must be nonzero with |k_i| < n/2.
inline void add_mode_pair(SpectralField& u, int k1, int k2, int k3,
                          const std::array<complex, 3>& amp) {
    const Grid& g = *u.grid;
    if (k1 == 0 && k2 == 0 && k3 == 0) throw Error("add_mode_pair: k = 0");
    if (k3 < 0) {
        add_mode_pair(u, -k1, -k2, -k3, {std::conj(amp[0]), std::conj(amp[1]),
                                         std::conj(amp[2])});
        return;
    }
    for (int d = 0; d < 3; ++d) u.comp[d][g.index_of(k1, k2, k3)] += amp[d];
    if (k3 == 0)
        for (int d = 0; d < 3; ++d)
            u.comp[d][g.index_of(-k1, -k2, 0)] += std::conj(amp[d]);
}

/// u = (amp sin(k.x), 0, 0)-style single shear mode: velocity along axis,
/// varying along wave_axis. Exact Stokes decay oracle for the integrator.
inline SpectralField shear_mode(std::shared_ptr<const Grid> g, int axis, int wave_axis,
                                real amp = 1.0) {
    SpectralField u(std::move(g));
    int k[3] = {0, 0, 0};
    k[wave_axis] = 1;
    std::array<complex, 3> a = {complex(0, 0), complex(0, 0), complex(0, 0)};
    a[axis] = complex(0.0, -0.5 * amp);  // sin(x) = (e^{ix} - e^{-ix}) / 2i
    add_mode_pair(u, k[0], k[1], k[2], a);
    return u;
}

/// Random divergence-free field on the dealiased set, gaussian coefficients,
/// rescaled to the requested H norm (0 stays 0).
inline SpectralField random_field(std::shared_ptr<const Grid> g, Rng& rng,
                                  real norm = 1.0) {
    SpectralField u(std::move(g));
    const Grid& grid = *u.grid;
    for (int d = 0; d < 3; ++d)
        for_each_mode(grid, [&](std::size_t idx, int, int, int) {
            if (!grid.dealias[idx]) return;
            u.comp[d][idx] = complex(rng.gaussian(), rng.gaussian());
        });
    detail::symmetrize_planes(u);
    u = leray_project(u);
    u.apply_dealias();
    real h = norm_h(u);
    if (h > 0.0) u.scale(norm / h);
    return u;
}

/// Rough initial data: |k|^{-1} magnitudes with random phases, projected and
/// normalized to the requested H norm. In H, but with an H_{3/8} norm near
/// the resolution limit, so the smoothing-rate bounds are active.
inline SpectralField rough_field(std::shared_ptr<const Grid> g, Rng& rng, real norm = 1.0) {
    SpectralField u(std::move(g));
    const Grid& grid = *u.grid;
    for (int d = 0; d < 3; ++d)
        for_each_mode(grid, [&](std::size_t idx, int, int, int) {
            if (!grid.dealias[idx] || grid.ksq[idx] == 0.0) return;
            real mag = 1.0 / std::sqrt(grid.ksq[idx]);
            real phase = rng.uniform(0.0, 2.0 * M_PI);
            u.comp[d][idx] = mag * complex(std::cos(phase), std::sin(phase));
        });
    detail::symmetrize_planes(u);
    u = leray_project(u);
    u.apply_dealias();
    real h = norm_h(u);
    if (h > 0.0) u.scale(norm / h);
    return u;
}

}  // namespace gmnse

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace gmnse {

using real = double;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GridError : Error {
    using Error::Error;
};
struct GridMismatchError : Error {
    using Error::Error;
};
struct ContractError : Error {
    using Error::Error;
};

/// Truncated Fourier lattice on the 2*pi-periodic 3-torus.
///
/// Wavevectors k = (k1,k2,k3) have integer components in [-n/2, n/2).
/// Coefficient storage uses the real-to-complex half spectrum: k1, k2 run
/// over the full signed range (FFTW index order), k3 over [0, n/2]. The
/// missing half is implied by conjugate symmetry, which is what keeps
/// velocity fields exactly real. Linear index:
///     idx = (i1*n + i2)*(n/2+1) + i3,  k1 = signed(i1), k2 = signed(i2), k3 = i3.
///
/// Dealiasing follows the two-thirds rule in the strict form 3*|k_i| < n.
/// For n divisible by 3 this also drops the |k_i| = n/3 shell; keeping it
/// would let products of two boundary modes alias back onto the retained
/// set and energy neutrality of the convective term would only hold to
/// O(boundary amplitude), not roundoff.
struct Grid {
    int n = 0;
    int nk3 = 0;                        // n/2 + 1
    std::size_t nphys = 0;              // n^3 collocation points
    std::size_t nspec = 0;              // n*n*nk3 stored modes
    std::vector<std::uint8_t> dealias;  // 1 = retained, per stored mode
    std::vector<real> ksq;              // |k|^2 per stored mode
    real lambda1 = 1.0;                 // smallest nonzero |k|^2

    int signed_k(int i) const { return i < n / 2 ? i : i - n; }
    std::size_t index(int i1, int i2, int i3) const {
        return (static_cast<std::size_t>(i1) * n + i2) * nk3 + i3;
    }
    /// Stored index of wavevector (k1,k2,k3) with k3 >= 0.
    std::size_t index_of(int k1, int k2, int k3) const {
        int i1 = k1 >= 0 ? k1 : k1 + n;
        int i2 = k2 >= 0 ? k2 : k2 + n;
        return index(i1, i2, k3);
    }
    /// Full-lattice multiplicity of a stored mode: interior k3 planes stand
    /// for a conjugate pair, the k3 = 0 and k3 = n/2 planes for themselves.
    real mult(int i3) const { return (i3 == 0 || 2 * i3 == n) ? 1.0 : 2.0; }

    bool retained(int k1, int k2, int k3) const {
        return 3 * std::abs(k1) < n && 3 * std::abs(k2) < n && 3 * std::abs(k3) < n;
    }

    real dx() const { return 2.0 * M_PI / n; }
    static constexpr real volume() { return 8.0 * M_PI * M_PI * M_PI; }  // (2*pi)^3
};

inline std::shared_ptr<const Grid> make_grid(int n) {
    if (n < 4 || n % 2 != 0)
        throw GridError("make_grid: n must be even and >= 4, got " + std::to_string(n));
    auto g = std::make_shared<Grid>();
    g->n = n;
    g->nk3 = n / 2 + 1;
    g->nphys = static_cast<std::size_t>(n) * n * n;
    g->nspec = static_cast<std::size_t>(n) * n * g->nk3;
    g->dealias.resize(g->nspec);
    g->ksq.resize(g->nspec);
    for (int i1 = 0; i1 < n; ++i1) {
        int k1 = g->signed_k(i1);
        for (int i2 = 0; i2 < n; ++i2) {
            int k2 = g->signed_k(i2);
            for (int i3 = 0; i3 < g->nk3; ++i3) {
                int k3 = i3;
                std::size_t idx = g->index(i1, i2, i3);
                g->dealias[idx] = g->retained(k1, k2, k3) ? 1 : 0;
                g->ksq[idx] = real(k1) * k1 + real(k2) * k2 + real(k3) * k3;
            }
        }
    }
    g->lambda1 = 1.0;
    return g;
}

/// Visit every stored mode: fn(idx, k1, k2, k3).
template <typename Fn>
inline void for_each_mode(const Grid& g, Fn&& fn) {
    for (int i1 = 0; i1 < g.n; ++i1) {
        int k1 = g.signed_k(i1);
        for (int i2 = 0; i2 < g.n; ++i2) {
            int k2 = g.signed_k(i2);
            std::size_t base = (static_cast<std::size_t>(i1) * g.n + i2) * g.nk3;
            for (int i3 = 0; i3 < g.nk3; ++i3) fn(base + i3, k1, k2, i3);
        }
    }
}

}  // namespace gmnse

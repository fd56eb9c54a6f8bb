#pragma once

#include <array>
#include <limits>
#include <memory>
#include <vector>

#include "gmnse/field.hpp"
#include "gmnse/spectral_ops.hpp"

namespace gmnse {

/// One forcing mode: wavevector plus a complex 3-vector amplitude.
struct ForcingMode {
    std::array<int, 3> k{};
    std::array<complex, 3> amp{};
};

/// Builds the forcing field from its sparse mode list: symmetrizes (the
/// conjugate partner of every listed mode is added automatically), projects
/// onto divergence-free fields and dealiases. The result is a trigonometric
/// polynomial, so the standing assumption that the forcing lies in H_{-1/2}
/// holds with an exactly computable norm.
inline SpectralField build_forcing(std::shared_ptr<const Grid> g,
                                   const std::vector<ForcingMode>& modes) {
    SpectralField f(std::move(g));
    const Grid& grid = *f.grid;
    for (const auto& m : modes) {
        int half = grid.n / 2;
        for (int d = 0; d < 3; ++d)
            if (m.k[d] < -half || m.k[d] >= half)
                throw GridError("forcing mode outside the wavevector range");
        if (m.k == std::array<int, 3>{0, 0, 0})
            throw GridError("forcing mode k = 0 violates the zero-mean convention");
        add_mode_pair(f, m.k[0], m.k[1], m.k[2], m.amp);
    }
    f = leray_project(f);
    f.apply_dealias();
    return f;
}

/// Simulation parameters. taper_N = +infinity switches the modification
/// factor off (plain Galerkin NSE); taper_N = 0 is the Stokes limit.
struct SimParams {
    std::shared_ptr<const Grid> grid;
    real nu = 1.0;
    real taper_N = std::numeric_limits<real>::infinity();
    real dt = 0.01;
    real cfl = 0.5;
    SpectralField forcing;
    real forcing_norm_m12 = 0.0;  // ||f||_{H_{-1/2}}, cached

    bool has_forcing() const { return forcing_norm_m12 > 0.0; }
};

inline SimParams make_params(std::shared_ptr<const Grid> g, real nu, real taper_N,
                             real dt, const std::vector<ForcingMode>& modes = {},
                             real cfl = 0.5) {
    if (nu <= 0.0) throw Error("make_params: nu must be positive");
    if (dt <= 0.0) throw Error("make_params: dt must be positive");
    if (taper_N < 0.0) throw Error("make_params: taper_N must be nonnegative");
    if (cfl <= 0.0) throw Error("make_params: cfl must be positive");
    SimParams p;
    p.grid = g;
    p.nu = nu;
    p.taper_N = taper_N;
    p.dt = dt;
    p.cfl = cfl;
    p.forcing = build_forcing(std::move(g), modes);
    p.forcing_norm_m12 = fractional_norm(p.forcing, -0.5);
    return p;
}

}  // namespace gmnse

#include <gtest/gtest.h>

#include "gmnse/diagnostics.hpp"

using namespace gmnse;

namespace {
const real kInf = std::numeric_limits<real>::infinity();

std::vector<ForcingMode> small_forcing() {
    return {{{0, 1, 1}, {complex(0.15, -0.05), complex(0, 0), complex(0, 0.1)}}};
}

/// Stationary Stokes state: u = (nu A)^{-1} P f, i.e. uhat = fhat / (nu |k|^2).
SpectralField stokes_fixed_point(const SimParams& p) {
    SpectralField u = p.forcing;
    for (int d = 0; d < 3; ++d)
        for_each_mode(*p.grid, [&](std::size_t idx, int, int, int) {
            u.comp[d][idx] = p.grid->ksq[idx] == 0.0
                                 ? complex(0, 0)
                                 : u.comp[d][idx] / (p.nu * p.grid->ksq[idx]);
        });
    return u;
}
}  // namespace

TEST(VeryWeakResidual, StationaryStokesBalances) {
    auto g = make_grid(16);
    SimParams p = make_params(g, 1.0, 0.0, 0.005, small_forcing());
    SpectralField ustar = stokes_fixed_point(p);
    Trajectory traj = integrate(ustar, p, 0.1, 1);
    Rng rng(5);
    SpectralField phi = random_field(g, rng, 1.0);
    for (auto [t, r] : very_weak_residual(traj, phi, p))
        EXPECT_LE(std::abs(r), 1e-10);
}

TEST(VeryWeakResidual, ZeroTrajectoryZeroResidual) {
    auto g = make_grid(8);
    SimParams p = make_params(g, 1.0, kInf, 0.01);
    Trajectory traj = integrate(SpectralField(g), p, 0.1, 1);
    Rng rng(5);
    SpectralField phi = random_field(g, rng, 1.0);
    for (auto [t, r] : very_weak_residual(traj, phi, p)) EXPECT_EQ(r, 0.0);
}

TEST(VeryWeakResidual, SecondOrderInTime) {
    // fixed comparison window away from t = 0, where rough data would put a
    // boundary layer into the third time derivative of (u, phi)
    auto g = make_grid(16);
    Rng rng(9);
    SpectralField u0 = random_field(g, rng, 1.5);
    SpectralField phi = random_field(g, rng, 1.0);
    auto max_res = [&](real dt) {
        SimParams p = make_params(g, 0.7, 1.0, dt, small_forcing());
        Trajectory traj = integrate(u0, p, 0.4, 1);
        real m = 0.0;
        for (auto [t, r] : very_weak_residual(traj, phi, p))
            if (t >= 0.05) m = std::max(m, std::abs(r));
        return m;
    };
    EXPECT_GE(max_res(0.01) / max_res(0.005), 3.5);
}

TEST(VeryWeakResidual, InputValidation) {
    auto g = make_grid(8);
    SimParams p = make_params(g, 1.0, kInf, 0.01);
    Trajectory tiny = integrate(shear_mode(g, 0, 1, 1.0), p, 0.02, 1);  // 3 snapshots
    Rng rng(5);
    SpectralField phi = random_field(g, rng, 1.0);
    EXPECT_NO_THROW(very_weak_residual(tiny, phi, p));
    Trajectory too_small = integrate(shear_mode(g, 0, 1, 1.0), p, 0.01, 1);
    EXPECT_THROW(very_weak_residual(too_small, phi, p), Error);
    SpectralField bad(g);
    add_mode_pair(bad, 1, 0, 0, {complex(1, 0), complex(0, 0), complex(0, 0)});
    EXPECT_THROW(very_weak_residual(tiny, bad, p), ContractError);
}

TEST(EnergyInequality, ConservativeWithoutForcing) {
    // f = 0: V(t) = 1/2 ||u||^2 + nu int ||u||_V^2 is constant on the exact
    // orbit; the discrete drift is trapezoid error only, second order in dt
    auto g = make_grid(16);
    Rng rng(21);
    SpectralField u0 = random_field(g, rng, 2.0);
    auto drift = [&](real dt) {
        SimParams p = make_params(g, 1.0, 1.0, dt);
        return energy_inequality_check(integrate(u0, p, 1.0, 0), kInf).max_span;
    };
    real coarse = drift(0.005), fine = drift(0.0025);
    EXPECT_GE(coarse / fine, 3.5);
    SimParams p = make_params(g, 1.0, 1.0, 0.005);
    Trajectory traj = integrate(u0, p, 1.0, 0);
    real tol = 2.0 * coarse;
    EnergyInequalityReport rep = energy_inequality_check(traj, tol);
    EXPECT_TRUE(rep.monotone_ok);
    EXPECT_TRUE(rep.equality_ok);
}

TEST(EnergyInequality, StokesDriftIsSecondOrder) {
    auto g = make_grid(8);
    auto drift = [&](real dt) {
        SimParams p = make_params(g, 1.0, kInf, dt);
        Trajectory traj = integrate(shear_mode(g, 0, 1, 1.0), p, 0.5, 0);
        return energy_inequality_check(traj, 1.0).max_span;
    };
    EXPECT_GE(drift(0.02) / drift(0.01), 3.5);
}

TEST(EnergyInequality, ForcedRunMonotoneWithCalibratedTolerance) {
    auto g = make_grid(16);
    Rng rng(33);
    SpectralField u0 = random_field(g, rng, 1.0);
    auto fm = small_forcing();
    auto run = [&](real dt) {
        SimParams p = make_params(g, 1.0, 1.0, dt, fm);
        return energy_inequality_check(integrate(u0, p, 1.0, 0), 1.0);
    };
    EnergyInequalityReport coarse = run(0.01), fine = run(0.005);
    real ratio = coarse.max_span / std::max(fine.max_span, 1e-300);
    EXPECT_GE(ratio, 3.5);
    real c_cal = 2.0 * std::max(coarse.max_span / (0.01 * 0.01),
                                fine.max_span / (0.005 * 0.005));
    EXPECT_LE(coarse.max_rise, c_cal * 0.01 * 0.01);
    EXPECT_LE(fine.max_rise, c_cal * 0.005 * 0.005);
}

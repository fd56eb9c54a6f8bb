#include <gtest/gtest.h>

#include "gmnse/diagnostics.hpp"
#include "gmnse/experiments.hpp"
#include "gmnse/gronwall.hpp"
#include "gmnse/integrator.hpp"

using namespace gmnse;

namespace {
const real kInf = std::numeric_limits<real>::infinity();

std::vector<ForcingMode> moderate_forcing() {
    return {{{0, 1, 0}, {complex(0, -0.4), complex(0, 0), complex(0.2, 0)}},
            {{1, 0, 1}, {complex(0.1, 0.2), complex(0.3, 0), complex(0, 0)}}};
}
}  // namespace

TEST(Step, ExactStokesDecayPerStep) {
    auto g = make_grid(8);
    SimParams p = make_params(g, 1.3, kInf, 0.02);
    Stepper st(p);
    SpectralField u = shear_mode(g, 0, 1, 1.0);
    real h0 = norm_h(u);
    real factor = std::exp(-1.3 * 0.02);
    real expect = h0;
    for (int i = 0; i < 50; ++i) {
        u = st.step(u);
        expect *= factor;
        ASSERT_NEAR(norm_h(u), expect, 1e-13 * expect);
    }
}

TEST(Step, ForcedLinearOracle) {
    CheckResult r = check_forced_linear_oracle(8);
    EXPECT_TRUE(r.pass) << r.stats.dump(2);
}

TEST(Step, FourthOrderOnSmoothTaperBranch) {
    auto g = make_grid(16);
    Rng rng(3);
    SpectralField u0 = random_field(g, rng, 4.0);
    auto fm = moderate_forcing();
    auto run = [&](real dt) {
        SimParams p = make_params(g, 0.5, 0.25, dt, fm);  // N below the orbit's L4 range
        return integrate(u0, p, 0.4, 0).final_state;
    };
    SpectralField ua = run(0.02), ub = run(0.01), uref = run(0.0025);
    ua.add_scaled(-1.0, uref);
    ub.add_scaled(-1.0, uref);
    real ratio = norm_h(ua) / norm_h(ub);
    EXPECT_GE(ratio, 12.0);
    EXPECT_LE(ratio, 20.0);
}

TEST(Step, CflViolationRaises) {
    auto g = make_grid(8);
    SimParams p = make_params(g, 1.0, kInf, 10.0);
    Rng rng(5);
    SpectralField u = random_field(g, rng, 5.0);
    try {
        Stepper(p).step(u);
        FAIL() << "expected CflError";
    } catch (const CflError& e) {
        EXPECT_GT(e.max_speed, 0.0);
        EXPECT_GT(e.dt, e.limit);
    }
}

TEST(Integrate, SemigroupRestartBitExact) {
    auto g = make_grid(16);
    Rng rng(3);
    SpectralField u0 = random_field(g, rng, 2.0);
    SimParams p = make_params(g, 1.0, 2.0, 0.01, moderate_forcing());
    SpectralField full = integrate(u0, p, 1.0, 0).final_state;
    SpectralField mid = integrate(u0, p, 0.6, 0).final_state;
    SpectralField rest = integrate(mid, p, 0.4, 0).final_state;
    EXPECT_TRUE(full.bitwise_equal(rest));
}

TEST(Integrate, DeterministicRepetition) {
    auto g = make_grid(8);
    Rng rng(7);
    SpectralField u0 = random_field(g, rng, 1.0);
    SimParams p = make_params(g, 1.0, 1.0, 0.01, moderate_forcing());
    Trajectory a = integrate(u0, p, 0.3, 5);
    Trajectory b = integrate(u0, p, 0.3, 5);
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    for (std::size_t i = 0; i < a.snapshots.size(); ++i)
        EXPECT_TRUE(a.snapshots[i].bitwise_equal(b.snapshots[i]));
}

TEST(Integrate, PureDecayBoundWithLambda1) {
    // nu = 1, f = 0: ||u(t)|| <= ||u0|| e^{-t} at every sample
    auto g = make_grid(16);
    Rng rng(11);
    SpectralField u0 = random_field(g, rng, 3.0);
    SimParams p = make_params(g, 1.0, kInf, 0.01);
    Trajectory traj = integrate(u0, p, 2.0, 0);
    real h0 = traj.diag.front().norm_h;
    for (const auto& row : traj.diag)
        EXPECT_LE(row.norm_h, h0 * std::exp(-row.t) + 1e-10);
}

TEST(Integrate, LargeTaperMatchesUntaperedBitwise) {
    auto g = make_grid(16);
    Rng rng(13);
    SpectralField u0 = random_field(g, rng, 1.5);
    auto fm = moderate_forcing();
    SimParams pinf = make_params(g, 1.0, kInf, 0.01, fm);
    Trajectory ref = integrate(u0, pinf, 0.5, 10);
    real sup_l4 = 0.0;
    for (const auto& row : ref.diag) sup_l4 = std::max(sup_l4, row.norm_l4);
    SimParams pbig = make_params(g, 1.0, 2.0 * sup_l4, 0.01, fm);
    Trajectory big = integrate(u0, pbig, 0.5, 10);
    ASSERT_EQ(ref.snapshots.size(), big.snapshots.size());
    for (std::size_t i = 0; i < ref.snapshots.size(); ++i)
        EXPECT_TRUE(ref.snapshots[i].bitwise_equal(big.snapshots[i]));
}

TEST(Integrate, MonotoneEnergyWithoutForcing) {
    auto g = make_grid(16);
    Rng rng(17);
    SpectralField u0 = random_field(g, rng, 2.0);
    for (real n : {0.5, kInf}) {
        SimParams p = make_params(g, 0.8, n, 0.01);
        Trajectory traj = integrate(u0, p, 1.0, 0);
        for (std::size_t j = 1; j < traj.diag.size(); ++j)
            EXPECT_LE(traj.diag[j].norm_h, traj.diag[j - 1].norm_h + 1e-10);
    }
}

TEST(Integrate, StatePreservesInvariantsEveryStep) {
    auto g = make_grid(16);
    Rng rng(19);
    SpectralField u0 = random_field(g, rng, 2.0);
    SimParams p = make_params(g, 0.5, 1.0, 0.01, moderate_forcing());
    Trajectory traj = integrate(u0, p, 0.5, 5);
    int n = g->n;
    for (const auto& snap : traj.snapshots) {
        EXPECT_LE(max_divergence(snap), 1e-12 * std::max(norm_h(snap), 1e-300));
        for (int d = 0; d < 3; ++d) EXPECT_EQ(snap.comp[d][g->index_of(0, 0, 0)], complex(0, 0));
        // reality: conjugate symmetry of the self-paired planes is bitwise
        for (int i3 : {0, n / 2})
            for (int i1 = 0; i1 < n; ++i1)
                for (int i2 = 0; i2 < n; ++i2) {
                    std::size_t a = g->index(i1, i2, i3);
                    std::size_t b = g->index((n - i1) % n, (n - i2) % n, i3);
                    for (int d = 0; d < 3; ++d)
                        ASSERT_EQ(snap.comp[d][a], std::conj(snap.comp[d][b]));
                }
        // snapshots stay on the dealiased set
        for_each_mode(*g, [&](std::size_t idx, int, int, int) {
            if (!g->dealias[idx])
                for (int d = 0; d < 3; ++d) ASSERT_EQ(snap.comp[d][idx], complex(0, 0));
        });
    }
    for (std::size_t j = 1; j < traj.times.size(); ++j)
        EXPECT_NEAR(traj.times[j] - traj.times[j - 1], p.dt * traj.stride, 1e-12);
}

TEST(Integrate, MisalignedHorizonRejected) {
    auto g = make_grid(8);
    SimParams p = make_params(g, 1.0, kInf, 0.01);
    EXPECT_THROW(integrate(SpectralField(g), p, 0.0151, 0), Error);
    EXPECT_THROW(integrate(SpectralField(g), p, -1.0, 0), Error);
}

TEST(EnergyBudget, RequiresDenseStride) {
    auto g = make_grid(8);
    SimParams p = make_params(g, 1.0, kInf, 0.01);
    Trajectory traj = integrate(shear_mode(g, 0, 1, 1.0), p, 0.1, 5);
    EXPECT_THROW(energy_budget(traj), Error);
}

TEST(EnergyBudget, ZeroTrajectoryZeroResidual) {
    auto g = make_grid(8);
    SimParams p = make_params(g, 1.0, kInf, 0.01);
    Trajectory traj = integrate(SpectralField(g), p, 0.1, 1);
    for (real r : energy_budget(traj)) EXPECT_EQ(r, 0.0);
}

TEST(EnergyBudget, StokesDecayTrapezoidOrder) {
    // exact orbit: residual is pure trapezoid error of e^{-2 nu t}, order 2
    auto g = make_grid(8);
    auto max_res = [&](real dt) {
        SimParams p = make_params(g, 1.0, kInf, dt);
        Trajectory traj = integrate(shear_mode(g, 0, 1, 1.0), p, 0.5, 1);
        real m = 0.0;
        for (real r : energy_budget(traj)) m = std::max(m, std::abs(r));
        return m;
    };
    real e1 = max_res(0.02), e2 = max_res(0.01);
    EXPECT_GE(e1 / e2, 3.5);
    // against the closed form: |residual_0| matches the trapezoid error of
    // the dissipation integral to leading order
    SimParams p = make_params(g, 1.0, kInf, 0.02);
    Trajectory traj = integrate(shear_mode(g, 0, 1, 1.0), p, 0.02, 1);
    real h0 = traj.diag.front().norm_h;
    real exact = 0.5 * h0 * h0 * (std::exp(-2 * 0.02) - 1.0);
    real trap = 1.0 * 0.02 * 0.5 * (traj.diag[0].norm_v * traj.diag[0].norm_v +
                                    traj.diag[1].norm_v * traj.diag[1].norm_v);
    real res = energy_budget(traj)[0];
    real diss_exact = 0.5 * h0 * h0 * (1.0 - std::exp(-2 * 0.02));
    EXPECT_NEAR(res, trap - diss_exact, 1e-10 * h0 * h0);
}

TEST(Integrate, NoBlowupBelowGronwallEnvelope) {
    // a-priori bound for the H_{3/8} norm: with a = M ||u0||_H, b = 8 M ||f||,
    // c = M N k (k the empirical H_{3/8} -> L4 constant, M = 1 on this grid)
    // the singular-Gronwall envelope with exponents (3/8, -1/8, 7/8) dominates
    // the orbit. The horizon is short because the envelope's growth rate
    // (c Gamma(1/8))^8 pushes longer horizons out of double range.
    auto g = make_grid(16);
    Rng rng(23);
    SpectralField u0 = rough_field(g, rng, 1.0);
    const real n_taper = 1.0;
    SimParams p = make_params(g, 1.0, n_taper, 1e-4);
    const real t_end = 0.05;
    Trajectory traj = integrate(u0, p, t_end, 0);

    real k_emb = measure_embedding_constant(g, 200, 31);
    for (const auto& row : traj.diag)
        if (row.norm_h38 > 0.0) k_emb = std::max(k_emb, row.norm_l4 / row.norm_h38);
    real a = norm_h(u0);
    real b = 0.0;  // f = 0
    real c = n_taper * 1.2 * k_emb;
    GronwallSolver solver(0.375, -0.125, 0.875, t_end);
    GronwallEnvelope env = solver.solve(a, b, c);
    ASSERT_TRUE(env.converged);

    auto envelope_at = [&](real t) {
        auto it = std::upper_bound(env.t.begin(), env.t.end(), t);
        std::size_t hi = std::min<std::size_t>(it - env.t.begin(), env.t.size() - 1);
        std::size_t lo = hi == 0 ? 0 : hi - 1;
        if (hi == lo) return env.u[lo];
        real w = (t - env.t[lo]) / (env.t[hi] - env.t[lo]);
        return env.u[lo] * (1 - w) + env.u[hi] * w;
    };
    for (const auto& row : traj.diag) {
        if (row.t < env.t.front()) continue;
        EXPECT_LE(row.norm_h38, envelope_at(row.t)) << "t = " << row.t;
    }
}

TEST(EnergyBudget, RefinementRatioOnForcedRun) {
    auto g = make_grid(16);
    Rng rng(3);
    SpectralField u0 = random_field(g, rng, 1.0);
    auto fm = moderate_forcing();
    auto max_res = [&](real dt) {
        SimParams p = make_params(g, 1.0, 1.0, dt, fm);
        Trajectory traj = integrate(u0, p, 0.5, 1);
        real m = 0.0;
        for (real r : energy_budget(traj)) m = std::max(m, std::abs(r));
        return m;
    };
    EXPECT_GE(max_res(0.01) / max_res(0.005), 3.5);
}

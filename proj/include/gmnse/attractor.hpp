#pragma once

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "gmnse/integrator.hpp"

namespace gmnse {

struct ProtocolError : Error {
    using Error::Error;
};

/// Radius of the N-independent absorbing ball B0:
///   ||u||_H^2 <= 1 + ||f||_{H_{-1/2}}^2 / (lambda1 nu^2).
inline real absorbing_radius(const SimParams& p) {
    real f2 = p.forcing_norm_m12 * p.forcing_norm_m12;
    return std::sqrt(1.0 + f2 / (p.grid->lambda1 * p.nu * p.nu));
}

/// Analytic entry time into B0 for initial data of H norm <= R: the
/// transient term R^2 e^{-nu lambda1 t} has dropped below 1 by
///   T_B = max(0, log(R^2) / (nu lambda1)).
inline real entry_time(const SimParams& p, real radius0) {
    real r2 = radius0 * radius0;
    if (r2 <= 1.0) return 0.0;
    return std::log(r2) / (p.nu * p.grid->lambda1);
}

struct AbsorbingReport {
    long long samples = 0;
    long long violations = 0;
    real worst_margin = 0.0;  // most positive lhs - rhs
    real first_entry = -1.0;  // first diagnostic time inside B0
    real first_violation_t = -1.0;
    bool pass() const { return violations == 0; }
};

/// Checks ||u(t)||^2 <= ||u0||^2 e^{-nu lambda1 t} + ||f||^2/(lambda1 nu^2)
/// at every diagnostic sample, with absolute slack.
inline AbsorbingReport absorbing_bound_check(const Trajectory& traj, real slack = 1e-8) {
    const auto& d = traj.diag;
    if (d.empty()) throw Error("absorbing_bound_check: no diagnostics");
    const SimParams& p = traj.params;
    real lam = p.grid->lambda1;
    real h0sq = d.front().norm_h * d.front().norm_h;
    real fterm = p.forcing_norm_m12 * p.forcing_norm_m12 / (lam * p.nu * p.nu);
    real r2 = absorbing_radius(p) * absorbing_radius(p);
    AbsorbingReport rep;
    rep.worst_margin = -std::numeric_limits<real>::infinity();
    for (const auto& row : d) {
        ++rep.samples;
        real lhs = row.norm_h * row.norm_h;
        real rhs = h0sq * std::exp(-p.nu * lam * row.t) + fterm;
        rep.worst_margin = std::max(rep.worst_margin, lhs - rhs);
        if (lhs > rhs + slack) {
            ++rep.violations;
            if (rep.first_violation_t < 0.0) rep.first_violation_t = row.t;
        }
        if (rep.first_entry < 0.0 && lhs <= r2 + slack) rep.first_entry = row.t;
    }
    return rep;
}

/// Metric for the weak topology of H on B0, realized as the H_{-1/2} norm of
/// the difference. On H-bounded sets weak convergence is equivalent to
/// convergence in any negative-order norm, and H_{-1/2} is the dual norm the
/// forcing assumption already uses.
inline real weak_metric(const SpectralField& u, const SpectralField& v) {
    if (u.grid != v.grid) throw GridMismatchError("weak_metric: grid mismatch");
    SpectralField d = u;
    d.add_scaled(-1.0, v);
    return fractional_norm(d, -0.5);
}

/// Finite sample set standing in for an attractor.
struct CloudSample {
    SpectralField state;
    real taper_n = 0.0;
    real time = 0.0;
    std::uint64_t seed = 0;
    real norm = 0.0;  // H norm, for the manifest
};

struct AttractorCloud {
    std::string label;
    std::vector<CloudSample> samples;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
};

/// dist_w(A, B) = max over a in A of min over b in B of rho_w(a, b):
/// the Hausdorff semidistance between the finite clouds under weak_metric.
inline real hausdorff_semidistance(const AttractorCloud& a, const AttractorCloud& b) {
    if (a.empty() || b.empty())
        throw Error("hausdorff_semidistance: empty cloud");
    real worst = 0.0;
    for (const auto& sa : a.samples) {
        real best = std::numeric_limits<real>::infinity();
        for (const auto& sb : b.samples)
            best = std::min(best, weak_metric(sa.state, sb.state));
        worst = std::max(worst, best);
    }
    return worst;
}

struct EnsembleSpec {
    int count = 1;
    std::uint64_t seed = 1;
    real init_norm_factor = 3.0;  // initial data drawn on the sphere of radius factor * |B0|
    int threads = 1;
};

/// Integrates an ensemble past the transient and collects snapshots on the
/// given absolute schedule (each entry > t_transient, aligned to dt).
/// Every collected sample must land inside B0 (with slack), otherwise the
/// transient was too short and a ProtocolError is raised. Members run
/// concurrently when threads > 1; assembly order is by (member, time), so
/// the cloud does not depend on the thread count.
inline AttractorCloud sample_attractor(const SimParams& base, real taper_n,
                                       const EnsembleSpec& ens, real t_transient,
                                       const std::vector<real>& schedule,
                                       real slack = 1e-8) {
    if (schedule.empty()) throw Error("sample_attractor: empty schedule");
    SimParams p = base;
    p.taper_N = taper_n;
    real r0 = ens.init_norm_factor * absorbing_radius(p);
    real tb = entry_time(p, r0);
    if (t_transient < tb)
        throw ProtocolError("sample_attractor: t_transient " + std::to_string(t_transient) +
                            " below analytic entry time " + std::to_string(tb));
    for (real t : schedule)
        if (t < t_transient) throw Error("sample_attractor: schedule before transient");

    // snap sample times onto the step grid (never earlier than requested)
    std::vector<long long> steps;
    for (real t : schedule) {
        long long s = static_cast<long long>(std::ceil(t / p.dt - 1e-9));
        if (!steps.empty() && s <= steps.back()) s = steps.back() + 1;
        steps.push_back(s);
    }

    std::vector<std::vector<CloudSample>> member_samples(ens.count);
    auto run_member = [&](int m) {
        std::uint64_t seed = ens.seed + static_cast<std::uint64_t>(m);
        Rng rng(seed);
        SpectralField u = random_field(p.grid, rng, r0);
        long long step_now = 0;
        for (long long target : steps) {
            long long span = target - step_now;
            if (span > 0) u = integrate(u, p, span * p.dt, 0).final_state;
            step_now = target;
            real ts = target * p.dt;
            CloudSample s;
            s.state = u;
            s.taper_n = taper_n;
            s.time = ts;
            s.seed = seed;
            s.norm = norm_h(u);
            member_samples[m].push_back(std::move(s));
        }
    };
    if (ens.threads <= 1) {
        for (int m = 0; m < ens.count; ++m) run_member(m);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < ens.threads; ++t)
            pool.emplace_back([&] {
                for (int m = next.fetch_add(1); m < ens.count; m = next.fetch_add(1))
                    run_member(m);
            });
        for (auto& th : pool) th.join();
    }

    AttractorCloud cloud;
    cloud.label = std::isinf(taper_n) ? "A_inf" : "A_N=" + std::to_string(taper_n);
    real r2 = absorbing_radius(p) * absorbing_radius(p);
    for (auto& ms : member_samples)
        for (auto& s : ms) {
            if (s.norm * s.norm > r2 + slack)
                throw ProtocolError("sample_attractor: sample outside B0 (transient too short)");
            cloud.samples.push_back(std::move(s));
        }
    return cloud;
}

/// Union cloud over pairs (N_j, t_j), approximating the weak attractor's
/// defining limit set. Lists of equal length are zipped; a singleton t_list
/// broadcasts.
inline AttractorCloud build_a_union(const SimParams& base, std::vector<real> n_list,
                                    std::vector<real> t_list, const EnsembleSpec& ens,
                                    const std::vector<real>& sample_offsets,
                                    real slack = 1e-8) {
    if (n_list.empty() || t_list.empty())
        throw Error("build_a_union: empty N or t list");
    if (t_list.size() == 1) t_list.assign(n_list.size(), t_list.front());
    if (t_list.size() != n_list.size())
        throw Error("build_a_union: N and t lists must have equal length");
    AttractorCloud cloud;
    cloud.label = "A_union";
    for (std::size_t j = 0; j < n_list.size(); ++j) {
        std::vector<real> schedule;
        for (real off : sample_offsets) schedule.push_back(t_list[j] + off);
        AttractorCloud c =
            sample_attractor(base, n_list[j], ens, t_list[j], schedule, slack);
        for (auto& s : c.samples) cloud.samples.push_back(std::move(s));
    }
    return cloud;
}

struct SemicontinuityResult {
    std::vector<real> n_values;
    std::vector<real> dist;
    real monotone_fraction = 0.0;  // fraction of successive nonincreases (10% tolerance)
};

/// dist_w(A_N, reference) over the N list, with the monotone-trend statistic.
inline SemicontinuityResult semicontinuity_experiment(
    const SimParams& base, const std::vector<real>& n_list, const AttractorCloud& reference,
    const EnsembleSpec& ens, real t_transient, const std::vector<real>& schedule,
    real slack = 1e-8) {
    if (reference.empty()) throw Error("semicontinuity_experiment: empty reference");
    SemicontinuityResult res;
    for (real n : n_list) {
        AttractorCloud c = sample_attractor(base, n, ens, t_transient, schedule, slack);
        res.n_values.push_back(n);
        res.dist.push_back(hausdorff_semidistance(c, reference));
    }
    int ok = 0, total = 0;
    for (std::size_t j = 1; j < res.dist.size(); ++j) {
        ++total;
        if (res.dist[j] <= res.dist[j - 1] * 1.10 + slack) ++ok;
    }
    res.monotone_fraction = total == 0 ? 1.0 : real(ok) / total;
    return res;
}

struct AgreementResult {
    real threshold = std::numeric_limits<real>::infinity();
    real sup_l4 = 0.0;  // sup_t ||u_inf(t)||_L4 along the reference orbit
    std::vector<real> n_values;
    std::vector<real> l2h_distance;  // L2(0,T;H) distance to the N = inf run
    std::vector<bool> bit_identical;
};

/// Least grid N whose trajectory is bit-identical to the N = +infinity run,
/// plus the L2(0,T;H) distance table for all grid values. F_N evaluates to
/// exactly 1 once N dominates the L4 norm at every stage state, so agreement
/// is genuinely bitwise, not approximate.
inline AgreementResult nse_agreement_threshold(const SpectralField& u0,
                                               const SimParams& base,
                                               std::vector<real> n_grid, real t_end,
                                               int stride = 10) {
    std::sort(n_grid.begin(), n_grid.end());
    SimParams pinf = base;
    pinf.taper_N = std::numeric_limits<real>::infinity();
    Trajectory ref = integrate(u0, pinf, t_end, stride);
    AgreementResult res;
    for (const auto& row : ref.diag) res.sup_l4 = std::max(res.sup_l4, row.norm_l4);
    if (n_grid.empty()) throw Error("nse_agreement_threshold: empty N grid");

    real delta = base.dt * stride;
    for (real n : n_grid) {
        SimParams p = base;
        p.taper_N = n;
        Trajectory tr = integrate(u0, p, t_end, stride);
        bool identical = tr.snapshots.size() == ref.snapshots.size();
        real acc = 0.0;
        for (std::size_t j = 0; j < tr.snapshots.size(); ++j) {
            if (identical && !tr.snapshots[j].bitwise_equal(ref.snapshots[j]))
                identical = false;
            SpectralField d = tr.snapshots[j];
            d.add_scaled(-1.0, ref.snapshots[j]);
            real w = (j == 0 || j + 1 == tr.snapshots.size()) ? 0.5 : 1.0;
            real nh = norm_h(d);
            acc += w * nh * nh * delta;
        }
        res.n_values.push_back(n);
        res.l2h_distance.push_back(std::sqrt(acc));
        res.bit_identical.push_back(identical);
        if (identical && std::isinf(res.threshold)) res.threshold = n;
    }
    return res;
}

}  // namespace gmnse

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmnse/params.hpp"

namespace gmnse {

using json = nlohmann::json;

struct ConfigError : Error {
    using Error::Error;
};

enum class ExperimentKind { Simulate, Verify, Attractor, Semicontinuity, Gronwall, Rates };

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "simulate") return ExperimentKind::Simulate;
    if (s == "verify") return ExperimentKind::Verify;
    if (s == "attractor") return ExperimentKind::Attractor;
    if (s == "semicontinuity") return ExperimentKind::Semicontinuity;
    if (s == "gronwall") return ExperimentKind::Gronwall;
    if (s == "rates") return ExperimentKind::Rates;
    throw ConfigError("unknown experiment kind: " + s);
}

struct InitialSpec {
    std::string kind = "zero";  // zero | random | rough | shear
    real norm = 1.0;
};

struct ScheduleSpec {
    real t_end = 1.0;
    int stride = 1;
    std::vector<real> n_list;
    std::vector<real> t_list;
    real t_transient = 0.0;
    int n_samples = 1;
    real sample_dt = 1.0;
};

struct EnsembleConfig {
    int count = 1;
    real init_factor = 3.0;
};

struct GronwallConfig {
    real a = 1.0, b = 0.7, c = 0.5;
    real alpha = 0.375, beta = 0.375, gamma = 0.25;
    real T = 2.0;
    std::vector<real> factors = {0.25, 0.5, 1.0, 2.0, 4.0};
};

struct RatesConfig {
    real norm = 1.0;
    real window_lo = 1e-3, window_hi = 1e-1;
    real snapshot_dt = 1e-3;
};

struct VerifyConfig {
    long long taper_samples = 100000;
    int tensor_pairs = 100;
    int tensor_n = 16;
    int spectral_pairs = 30;
    int spectral_n = 32;
};

struct ParamsConfig {
    int n = 16;
    real nu = 1.0;
    real dt = 0.01;
    real taper_n = std::numeric_limits<real>::infinity();
    real cfl = 0.5;
    std::vector<ForcingMode> forcing;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    ParamsConfig params;
    InitialSpec initial;
    ScheduleSpec schedule;
    EnsembleConfig ensemble;
    GronwallConfig gronwall;
    RatesConfig rates;
    VerifyConfig verify;
    std::map<std::string, real> tolerances;
};

namespace detail {

inline void require_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key `" + (where.empty() ? it.key() : where + "." + it.key()) +
                              "`");
}

inline real positive(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("`" + key + "` must be a number");
    real x = v.get<real>();
    if (!(x > 0.0)) throw ConfigError("`" + key + "` must be positive");
    return x;
}

inline real taper_value(const json& v) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return std::numeric_limits<real>::infinity();
        throw ConfigError("`params.taper_N` must be a nonnegative number or \"inf\"");
    }
    if (!v.is_number()) throw ConfigError("`params.taper_N` must be a number or \"inf\"");
    real x = v.get<real>();
    if (x < 0.0) throw ConfigError("`params.taper_N` must be nonnegative");
    return x;
}

inline std::vector<real> real_list(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("`" + key + "` must be an array");
    std::vector<real> out;
    for (const auto& e : v) {
        if (!e.is_number() && !(e.is_string() && e.get<std::string>() == "inf"))
            throw ConfigError("`" + key + "` entries must be numbers");
        out.push_back(e.is_string() ? std::numeric_limits<real>::infinity() : e.get<real>());
    }
    return out;
}

}  // namespace detail

/// Strict parser: unknown keys anywhere are rejected; randomized experiments
/// must carry a seed.
inline ExperimentConfig parse_config(const json& j) {
    using detail::require_keys;
    ExperimentConfig cfg;
    require_keys(j, "", {"experiment", "seed", "threads", "params", "initial", "schedule",
                         "ensemble", "gronwall", "rates", "verify", "tolerances"});
    if (!j.contains("experiment") || !j["experiment"].is_string())
        throw ConfigError("`experiment` (string) is required");
    cfg.kind = experiment_kind_from_string(j["experiment"].get<std::string>());

    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() ||
            (j["seed"].is_number_integer() && !j["seed"].is_number_unsigned() &&
             j["seed"].get<long long>() < 0))
            throw ConfigError("`seed` must be a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("threads")) {
        if (!j["threads"].is_number_integer() || j["threads"].get<int>() < 1)
            throw ConfigError("`threads` must be a positive integer");
        cfg.threads = j["threads"].get<int>();
    }

    if (j.contains("params")) {
        const json& p = j["params"];
        require_keys(p, "params", {"n", "nu", "dt", "taper_N", "cfl", "forcing"});
        if (p.contains("n")) {
            if (!p["n"].is_number_integer()) throw ConfigError("`params.n` must be an integer");
            cfg.params.n = p["n"].get<int>();
            if (cfg.params.n < 4 || cfg.params.n % 2 != 0)
                throw ConfigError("`params.n` must be even and >= 4");
        }
        if (p.contains("nu")) cfg.params.nu = detail::positive(p["nu"], "params.nu");
        if (p.contains("dt")) cfg.params.dt = detail::positive(p["dt"], "params.dt");
        if (p.contains("cfl")) cfg.params.cfl = detail::positive(p["cfl"], "params.cfl");
        if (p.contains("taper_N")) cfg.params.taper_n = detail::taper_value(p["taper_N"]);
        if (p.contains("forcing")) {
            if (!p["forcing"].is_array())
                throw ConfigError("`params.forcing` must be an array");
            for (const auto& m : p["forcing"]) {
                require_keys(m, "params.forcing[]", {"k", "re", "im"});
                if (!m.contains("k") || !m.contains("re") || !m.contains("im"))
                    throw ConfigError("forcing entries need `k`, `re`, `im`");
                auto k = m["k"], re = m["re"], im = m["im"];
                if (!k.is_array() || k.size() != 3 || !re.is_array() || re.size() != 3 ||
                    !im.is_array() || im.size() != 3)
                    throw ConfigError("forcing `k`, `re`, `im` must have 3 entries");
                ForcingMode fm;
                for (int d = 0; d < 3; ++d) {
                    fm.k[d] = k[d].get<int>();
                    fm.amp[d] = complex(re[d].get<real>(), im[d].get<real>());
                }
                cfg.params.forcing.push_back(fm);
            }
        }
    }

    if (j.contains("initial")) {
        const json& p = j["initial"];
        require_keys(p, "initial", {"kind", "norm"});
        if (p.contains("kind")) {
            cfg.initial.kind = p["kind"].get<std::string>();
            if (cfg.initial.kind != "zero" && cfg.initial.kind != "random" &&
                cfg.initial.kind != "rough" && cfg.initial.kind != "shear")
                throw ConfigError("`initial.kind` must be zero|random|rough|shear");
        }
        if (p.contains("norm")) cfg.initial.norm = detail::positive(p["norm"], "initial.norm");
    }

    if (j.contains("schedule")) {
        const json& p = j["schedule"];
        require_keys(p, "schedule",
                     {"t_end", "stride", "N_list", "t_list", "t_transient", "n_samples",
                      "sample_dt"});
        if (p.contains("t_end")) cfg.schedule.t_end = detail::positive(p["t_end"], "schedule.t_end");
        if (p.contains("stride")) {
            if (!p["stride"].is_number_integer() || p["stride"].get<int>() < 0)
                throw ConfigError("`schedule.stride` must be a nonnegative integer");
            cfg.schedule.stride = p["stride"].get<int>();
        }
        if (p.contains("N_list")) cfg.schedule.n_list = detail::real_list(p["N_list"], "schedule.N_list");
        if (p.contains("t_list")) cfg.schedule.t_list = detail::real_list(p["t_list"], "schedule.t_list");
        if (p.contains("t_transient"))
            cfg.schedule.t_transient = detail::positive(p["t_transient"], "schedule.t_transient");
        if (p.contains("n_samples")) {
            if (!p["n_samples"].is_number_integer() || p["n_samples"].get<int>() < 1)
                throw ConfigError("`schedule.n_samples` must be a positive integer");
            cfg.schedule.n_samples = p["n_samples"].get<int>();
        }
        if (p.contains("sample_dt"))
            cfg.schedule.sample_dt = detail::positive(p["sample_dt"], "schedule.sample_dt");
    }

    if (j.contains("ensemble")) {
        const json& p = j["ensemble"];
        require_keys(p, "ensemble", {"count", "init_factor"});
        if (p.contains("count")) {
            if (!p["count"].is_number_integer() || p["count"].get<int>() < 1)
                throw ConfigError("`ensemble.count` must be a positive integer");
            cfg.ensemble.count = p["count"].get<int>();
        }
        if (p.contains("init_factor"))
            cfg.ensemble.init_factor = detail::positive(p["init_factor"], "ensemble.init_factor");
    }

    if (j.contains("gronwall")) {
        const json& p = j["gronwall"];
        require_keys(p, "gronwall", {"a", "b", "c", "alpha", "beta", "gamma", "T", "factors"});
        auto num = [&](const char* key, real& dst, bool nonneg) {
            if (!p.contains(key)) return;
            if (!p[key].is_number())
                throw ConfigError(std::string("`gronwall.") + key + "` must be a number");
            dst = p[key].get<real>();
            if (nonneg && dst < 0.0)
                throw ConfigError(std::string("`gronwall.") + key + "` must be nonnegative");
        };
        num("a", cfg.gronwall.a, true);
        num("b", cfg.gronwall.b, true);
        num("c", cfg.gronwall.c, true);
        num("alpha", cfg.gronwall.alpha, false);
        num("beta", cfg.gronwall.beta, false);
        num("gamma", cfg.gronwall.gamma, true);
        if (p.contains("T")) cfg.gronwall.T = detail::positive(p["T"], "gronwall.T");
        if (p.contains("factors"))
            cfg.gronwall.factors = detail::real_list(p["factors"], "gronwall.factors");
    }

    if (j.contains("rates")) {
        const json& p = j["rates"];
        require_keys(p, "rates", {"norm", "window", "snapshot_dt"});
        if (p.contains("norm")) cfg.rates.norm = detail::positive(p["norm"], "rates.norm");
        if (p.contains("window")) {
            auto w = detail::real_list(p["window"], "rates.window");
            if (w.size() != 2 || w[0] <= 0 || w[1] <= w[0])
                throw ConfigError("`rates.window` must be [lo, hi] with 0 < lo < hi");
            cfg.rates.window_lo = w[0];
            cfg.rates.window_hi = w[1];
        }
        if (p.contains("snapshot_dt"))
            cfg.rates.snapshot_dt = detail::positive(p["snapshot_dt"], "rates.snapshot_dt");
    }

    if (j.contains("verify")) {
        const json& p = j["verify"];
        require_keys(p, "verify",
                     {"taper_samples", "tensor_pairs", "tensor_n", "spectral_pairs",
                      "spectral_n"});
        auto geti = [&](const char* key, auto& dst) {
            if (!p.contains(key)) return;
            if (!p[key].is_number_integer() || p[key].get<long long>() < 1)
                throw ConfigError(std::string("`verify.") + key + "` must be a positive integer");
            dst = p[key].get<std::decay_t<decltype(dst)>>();
        };
        geti("taper_samples", cfg.verify.taper_samples);
        geti("tensor_pairs", cfg.verify.tensor_pairs);
        geti("tensor_n", cfg.verify.tensor_n);
        geti("spectral_pairs", cfg.verify.spectral_pairs);
        geti("spectral_n", cfg.verify.spectral_n);
    }

    if (j.contains("tolerances")) {
        const json& p = j["tolerances"];
        static const std::set<std::string> known = {"absorb_slack", "cloud_eps",
                                                    "weak_dist_noise"};
        require_keys(p, "tolerances", known);
        for (auto it = p.begin(); it != p.end(); ++it)
            cfg.tolerances[it.key()] = detail::positive(it.value(), "tolerances." + it.key());
    }

    // randomized experiments must be reproducible
    bool randomized = cfg.kind == ExperimentKind::Verify ||
                      cfg.kind == ExperimentKind::Attractor ||
                      cfg.kind == ExperimentKind::Semicontinuity ||
                      cfg.kind == ExperimentKind::Rates ||
                      (cfg.kind == ExperimentKind::Simulate &&
                       (cfg.initial.kind == "random" || cfg.initial.kind == "rough"));
    if (randomized && !cfg.seed)
        throw ConfigError("`seed` is required for randomized experiments");
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path.string());
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_config(j);
}

}  // namespace gmnse

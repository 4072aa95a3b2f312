#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace relcalc {

/// Grid geometry for the CLI runs. `grid_sizes` is the sweep list: single-grid
/// subcommands use the first entry, the composition check uses the largest, and
/// norm/pairing sweeps use the whole list.
struct GeometryConfig {
    int n = 2;
    int d = 1;
    std::vector<int> grid_sizes = {16, 24};
};

/// Multi-orders for the norm-bound sweep; kappa overrides the default excess
/// constant (the codimension) when set.
struct OrdersConfig {
    double m_g = -0.75;
    double k_g = 1.0;
    double k_c = 1.0;
    double k_b = 1.0;
    std::optional<double> kappa;
};

struct TolerancesConfig {
    double round_trip = 1e-10;
    double slice_exact = 1e-12;
    double compose_rel_sup = 0.10;
    double decay_margin = 0.15;
    double associativity = 1e-10;
    double adjoint = 1e-12;
    double l2_ratio = 1.10;
    double genpair_identity = 1e-8;
    double genpair_adjoint = 1e-12;
    double groupoid = 1e-12;
    double blowup_round_trip = 1e-12;
    double blowup_pattern = 0.05;
    double weight_equiv = 1e-9;
    double relation_tol = 1e-9;
    double estimate_constant = 10.0;
};

/// `trials` drives groupoid axiom sampling; `count` drives relation/point sampling.
struct SamplingConfig {
    std::uint64_t seed = 7;
    int trials = 10000;
    int count = 1000;
};

struct OutputConfig {
    std::string dir = "reports";
    std::vector<std::string> formats = {"json", "csv"};
};

struct Config {
    GeometryConfig geometry;
    OrdersConfig orders;
    TolerancesConfig tolerances;
    SamplingConfig sampling;
    OutputConfig output;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const char* section,
                                std::initializer_list<const char*> known)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw std::invalid_argument(std::string("config: unknown key \"") + it.key() +
                                        "\" in " + section);
    }
}

template <typename T>
inline void load_if(const nlohmann::json& obj, const char* key, T& dst)
{
    if (obj.contains(key)) dst = obj.at(key).get<T>();
}

} // namespace detail

/// Parses the config JSON, filling defaults for every absent key and rejecting
/// unknown keys at every level. Throws std::invalid_argument on any problem.
inline Config parse_config(const nlohmann::json& j)
{
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    detail::reject_unknown_keys(j, "top level",
                                {"geometry", "orders", "tolerances", "sampling", "output"});
    Config cfg;

    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        if (!g.is_object()) throw std::invalid_argument("config: geometry must be an object");
        detail::reject_unknown_keys(g, "geometry", {"n", "d", "N"});
        detail::load_if(g, "n", cfg.geometry.n);
        detail::load_if(g, "d", cfg.geometry.d);
        if (g.contains("N")) {
            const auto& Nval = g.at("N");
            if (Nval.is_number_integer())
                cfg.geometry.grid_sizes = {Nval.get<int>()};
            else
                cfg.geometry.grid_sizes = Nval.get<std::vector<int>>();
        }
    }
    if (j.contains("orders")) {
        const auto& o = j.at("orders");
        if (!o.is_object()) throw std::invalid_argument("config: orders must be an object");
        detail::reject_unknown_keys(o, "orders", {"m_g", "k_g", "k_c", "k_b", "kappa"});
        detail::load_if(o, "m_g", cfg.orders.m_g);
        detail::load_if(o, "k_g", cfg.orders.k_g);
        detail::load_if(o, "k_c", cfg.orders.k_c);
        detail::load_if(o, "k_b", cfg.orders.k_b);
        if (o.contains("kappa")) cfg.orders.kappa = o.at("kappa").get<double>();
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        if (!t.is_object()) throw std::invalid_argument("config: tolerances must be an object");
        detail::reject_unknown_keys(
            t, "tolerances",
            {"round_trip", "slice_exact", "compose_rel_sup", "decay_margin", "associativity",
             "adjoint", "l2_ratio", "genpair_identity", "genpair_adjoint", "groupoid",
             "blowup_round_trip", "blowup_pattern", "weight_equiv", "relation_tol",
             "estimate_constant"});
        auto& T = cfg.tolerances;
        detail::load_if(t, "round_trip", T.round_trip);
        detail::load_if(t, "slice_exact", T.slice_exact);
        detail::load_if(t, "compose_rel_sup", T.compose_rel_sup);
        detail::load_if(t, "decay_margin", T.decay_margin);
        detail::load_if(t, "associativity", T.associativity);
        detail::load_if(t, "adjoint", T.adjoint);
        detail::load_if(t, "l2_ratio", T.l2_ratio);
        detail::load_if(t, "genpair_identity", T.genpair_identity);
        detail::load_if(t, "genpair_adjoint", T.genpair_adjoint);
        detail::load_if(t, "groupoid", T.groupoid);
        detail::load_if(t, "blowup_round_trip", T.blowup_round_trip);
        detail::load_if(t, "blowup_pattern", T.blowup_pattern);
        detail::load_if(t, "weight_equiv", T.weight_equiv);
        detail::load_if(t, "relation_tol", T.relation_tol);
        detail::load_if(t, "estimate_constant", T.estimate_constant);
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        if (!s.is_object()) throw std::invalid_argument("config: sampling must be an object");
        detail::reject_unknown_keys(s, "sampling", {"seed", "trials", "count"});
        detail::load_if(s, "seed", cfg.sampling.seed);
        detail::load_if(s, "trials", cfg.sampling.trials);
        detail::load_if(s, "count", cfg.sampling.count);
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        if (!o.is_object()) throw std::invalid_argument("config: output must be an object");
        detail::reject_unknown_keys(o, "output", {"dir", "formats"});
        detail::load_if(o, "dir", cfg.output.dir);
        detail::load_if(o, "formats", cfg.output.formats);
    }

    // validation
    if (!(cfg.geometry.d >= 1 && cfg.geometry.d < cfg.geometry.n))
        throw std::invalid_argument("config: need 1 <= d < n");
    if (cfg.geometry.grid_sizes.empty())
        throw std::invalid_argument("config: geometry.N must be a nonempty list");
    for (int N : cfg.geometry.grid_sizes)
        if (N < 8 || N % 2 != 0)
            throw std::invalid_argument("config: each grid size must be even and >= 8");
    if (cfg.sampling.trials < 1) throw std::invalid_argument("config: sampling.trials >= 1");
    if (cfg.sampling.count < 16) throw std::invalid_argument("config: sampling.count >= 16");
    if (cfg.output.formats.empty())
        throw std::invalid_argument("config: output.formats must be nonempty");
    for (const auto& f : cfg.output.formats)
        if (f != "json" && f != "csv")
            throw std::invalid_argument("config: unknown output format \"" + f + "\"");
    return cfg;
}

inline Config load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

} // namespace relcalc

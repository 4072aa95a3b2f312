#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "relcalc/geometry.hpp"
#include "relcalc/symbols.hpp"

namespace relcalc {

/// Which cotangent bundle a relation slot lives in.
enum class CotSpace { M, Y };

struct CotangentPoint {
    Eigen::VectorXd x;
    Eigen::VectorXd xi;
};

/// One sampled point of a canonical relation, written (source, target); composition
/// matches the left factor's target against the right factor's source.
struct RelationPoint {
    CotangentPoint source;
    CotangentPoint target;
};

/// A canonical relation as a point cloud. label == nullopt means Unknown.
struct RelationSample {
    std::optional<LagrangianClass> label;
    CotSpace source_space = CotSpace::M;
    CotSpace target_space = CotSpace::M;
    std::vector<RelationPoint> points;
    double tolerance = 1e-8;
};

inline CotSpace relation_source_space(LagrangianClass c)
{
    switch (c) {
        case LagrangianClass::Psi:
        case LagrangianClass::G:
        case LagrangianClass::C: return CotSpace::M;
        default: return CotSpace::Y;
    }
}

inline CotSpace relation_target_space(LagrangianClass c)
{
    switch (c) {
        case LagrangianClass::Psi:
        case LagrangianClass::G:
        case LagrangianClass::B: return CotSpace::M;
        default: return CotSpace::Y;
    }
}

namespace detail {

/// Splittable deterministic stream: child generator for (seed, index).
inline std::mt19937_64 split_rng(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return std::mt19937_64(z);
}

inline Eigen::VectorXd lattice_base(std::mt19937_64& rng, int dim, int N)
{
    std::uniform_int_distribution<int> pick(0, N - 1);
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = two_pi * pick(rng) / N;
    return x;
}

/// Conic fiber draw: log-uniform magnitude over [1, N/2], uniform direction.
inline Eigen::VectorXd conic_fiber(std::mt19937_64& rng, int dim, int N)
{
    std::uniform_real_distribution<double> logr(0.0, std::log(N / 2.0));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd v(dim);
    double nrm = 0.0;
    do {
        for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
        nrm = v.norm();
    } while (nrm < 1e-12);
    return v * (std::exp(logr(rng)) / nrm);
}

inline double torus_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return wrap_displacement(a - b).norm();
}

inline double point_distance(const CotangentPoint& a, const CotangentPoint& b)
{
    if (a.x.size() != b.x.size() || a.xi.size() != b.xi.size())
        return std::numeric_limits<double>::infinity();
    return std::hypot(torus_distance(a.x, b.x), (a.xi - b.xi).norm());
}

} // namespace detail

/// Draws `count` points of the canonical relation `label` over the embedding:
/// base points on the spatial lattice, fiber components conic (log-uniform magnitude
/// in [1, N/2], uniform direction).
inline RelationSample sample_relation(LagrangianClass label, const TorusEmbedding& geom, int count,
                                      std::uint64_t seed)
{
    if (count < 1) throw std::invalid_argument("sample_relation: count >= 1 required");
    RelationSample R;
    R.label = label;
    R.source_space = relation_source_space(label);
    R.target_space = relation_target_space(label);
    const int d = geom.d, n = geom.n, nu = geom.nu(), N = geom.N;

    for (int i = 0; i < count; ++i) {
        auto rng = detail::split_rng(seed, i);
        RelationPoint p;
        switch (label) {
            case LagrangianClass::Psi: {
                const Eigen::VectorXd x = detail::lattice_base(rng, n, N);
                const Eigen::VectorXd xi = detail::conic_fiber(rng, n, N);
                p.source = {x, xi};
                p.target = {x, xi};
                break;
            }
            case LagrangianClass::Partial: {
                const Eigen::VectorXd x = detail::lattice_base(rng, d, N);
                const Eigen::VectorXd xi = detail::conic_fiber(rng, d, N);
                p.source = {x, xi};
                p.target = {x, xi};
                break;
            }
            case LagrangianClass::B: {
                const Eigen::VectorXd xp = detail::lattice_base(rng, d, N);
                const Eigen::VectorXd xip = detail::conic_fiber(rng, d, N);
                const Eigen::VectorXd eta = detail::conic_fiber(rng, nu, N);
                Eigen::VectorXd xM = Eigen::VectorXd::Zero(n);
                xM.head(d) = xp;
                Eigen::VectorXd xiM(n);
                xiM << xip, eta;
                p.source = {xp, xip};
                p.target = {xM, xiM};
                break;
            }
            case LagrangianClass::C: {
                const Eigen::VectorXd xp = detail::lattice_base(rng, d, N);
                const Eigen::VectorXd xip = detail::conic_fiber(rng, d, N);
                const Eigen::VectorXd xi2 = detail::conic_fiber(rng, nu, N);
                Eigen::VectorXd xM = Eigen::VectorXd::Zero(n);
                xM.head(d) = xp;
                Eigen::VectorXd xiM(n);
                xiM << xip, xi2;
                p.source = {xM, xiM};
                p.target = {xp, xip};
                break;
            }
            case LagrangianClass::G: {
                const Eigen::VectorXd xp = detail::lattice_base(rng, d, N);
                const Eigen::VectorXd xip = detail::conic_fiber(rng, d, N);
                const Eigen::VectorXd xi2 = detail::conic_fiber(rng, nu, N);
                const Eigen::VectorXd eta = detail::conic_fiber(rng, nu, N);
                Eigen::VectorXd xM = Eigen::VectorXd::Zero(n);
                xM.head(d) = xp;
                Eigen::VectorXd xiS(n), xiT(n);
                xiS << xip, xi2;
                xiT << xip, eta;
                p.source = {xM, xiS};
                p.target = {xM, xiT};
                break;
            }
        }
        R.points.push_back(std::move(p));
    }
    return R;
}

namespace detail {

/// Membership of a single point in the canonical form of `label`, to tolerance.
inline bool point_on_relation(LagrangianClass label, const TorusEmbedding& geom,
                              const RelationPoint& p, double tol)
{
    const int d = geom.d, n = geom.n;
    auto is_M = [&](const CotangentPoint& q) { return q.x.size() == n && q.xi.size() == n; };
    auto is_Y = [&](const CotangentPoint& q) { return q.x.size() == d && q.xi.size() == d; };
    auto conormal_base = [&](const CotangentPoint& q) {
        return wrap_displacement(q.x.tail(n - d)).norm() <= tol; // x'' = 0
    };
    switch (label) {
        case LagrangianClass::Psi:
            return is_M(p.source) && is_M(p.target) && point_distance(p.source, p.target) <= tol;
        case LagrangianClass::Partial:
            return is_Y(p.source) && is_Y(p.target) && point_distance(p.source, p.target) <= tol;
        case LagrangianClass::B:
            return is_Y(p.source) && is_M(p.target) && conormal_base(p.target) &&
                   torus_distance(p.source.x, p.target.x.head(d)) <= tol &&
                   (p.source.xi - p.target.xi.head(d)).norm() <= tol;
        case LagrangianClass::C:
            return is_M(p.source) && is_Y(p.target) && conormal_base(p.source) &&
                   torus_distance(p.target.x, p.source.x.head(d)) <= tol &&
                   (p.target.xi - p.source.xi.head(d)).norm() <= tol;
        case LagrangianClass::G:
            return is_M(p.source) && is_M(p.target) && conormal_base(p.source) &&
                   conormal_base(p.target) &&
                   torus_distance(p.source.x.head(d), p.target.x.head(d)) <= tol &&
                   (p.source.xi.head(d) - p.target.xi.head(d)).norm() <= tol;
    }
    return false;
}

} // namespace detail

/// Tests every point against each of the five canonical forms; returns the unique
/// matching label, or nullopt (Unknown) if none or several match.
inline std::optional<LagrangianClass> classify_relation(const RelationSample& R,
                                                        const TorusEmbedding& geom,
                                                        double tol = 1e-8)
{
    if (R.points.empty()) throw std::invalid_argument("classify_relation: empty sample");
    std::vector<LagrangianClass> matches;
    for (LagrangianClass c : {LagrangianClass::Psi, LagrangianClass::Partial, LagrangianClass::B,
                              LagrangianClass::C, LagrangianClass::G}) {
        bool all = true;
        for (const auto& p : R.points) {
            if (!detail::point_on_relation(c, geom, p, tol)) {
                all = false;
                break;
            }
        }
        if (all) matches.push_back(c);
    }
    if (matches.size() == 1) return matches.front();
    return std::nullopt;
}

struct ComposeRelationsResult {
    bool spaces_chain = false;
    bool empty_warning = false; // spaces chain but no middle points matched
    RelationSample sample;
};

/// Set composition: emit (p.source, q.target) whenever |p.target - q.source| < tol.
/// The output label is Unknown until classified.
inline ComposeRelationsResult compose_relations(const RelationSample& R1, const RelationSample& R2,
                                                double tol = 1e-9)
{
    ComposeRelationsResult out;
    out.sample.label = std::nullopt;
    out.sample.source_space = R1.source_space;
    out.sample.target_space = R2.target_space;
    out.sample.tolerance = tol;
    if (R1.target_space != R2.source_space) return out;
    out.spaces_chain = true;
    for (const auto& p : R1.points)
        for (const auto& q : R2.points)
            if (detail::point_distance(p.target, q.source) < tol)
                out.sample.points.push_back({p.source, q.target});
    out.empty_warning = out.sample.points.empty();
    return out;
}

/// Swaps source and target of every point; label maps B <-> C, the others are fixed.
inline RelationSample transpose_relation(const RelationSample& R)
{
    RelationSample T;
    T.source_space = R.target_space;
    T.target_space = R.source_space;
    T.tolerance = R.tolerance;
    if (R.label) {
        switch (*R.label) {
            case LagrangianClass::B: T.label = LagrangianClass::C; break;
            case LagrangianClass::C: T.label = LagrangianClass::B; break;
            default: T.label = R.label; break;
        }
    }
    for (const auto& p : R.points) T.points.push_back({p.target, p.source});
    return T;
}

struct AdmissibilityReport {
    bool admissible = false;
    double min_source_covector = 0.0;
    double min_target_covector = 0.0;
};

/// A sampled relation is admissible when no point has a vanishing covector on either
/// factor (the coordinate criterion for avoiding the kernels of the structural maps).
inline AdmissibilityReport check_admissibility(const RelationSample& R, double eps = 1e-8)
{
    AdmissibilityReport rep;
    rep.min_source_covector = std::numeric_limits<double>::infinity();
    rep.min_target_covector = std::numeric_limits<double>::infinity();
    for (const auto& p : R.points) {
        rep.min_source_covector = std::min(rep.min_source_covector, p.source.xi.norm());
        rep.min_target_covector = std::min(rep.min_target_covector, p.target.xi.norm());
    }
    rep.admissible = !R.points.empty() && rep.min_source_covector >= eps &&
                     rep.min_target_covector >= eps;
    return rep;
}

/// Draws a pair (R1, R2) sharing exact middle points (R1 targets coincide with R2
/// sources pointwise), so that set composition has one match per index. Conditioning
/// happens on a jointly sampled middle point in the intersection of the target
/// support of `l1` and the source support of `l2`. Returns nullopt when the spaces
/// do not chain.
inline std::optional<std::pair<RelationSample, RelationSample>> sample_matched_pair(
    LagrangianClass l1, LagrangianClass l2, const TorusEmbedding& geom, int count,
    std::uint64_t seed)
{
    if (relation_target_space(l1) != relation_source_space(l2)) return std::nullopt;
    const CotSpace middle_space = relation_target_space(l1);
    const int d = geom.d, n = geom.n, nu = geom.nu(), N = geom.N;

    auto requires_conormal = [&](LagrangianClass c, bool as_target) {
        if (middle_space == CotSpace::Y) return false;
        if (as_target) return c == LagrangianClass::B || c == LagrangianClass::G;
        return c == LagrangianClass::C || c == LagrangianClass::G;
    };

    RelationSample R1, R2;
    R1.label = l1;
    R1.source_space = relation_source_space(l1);
    R1.target_space = relation_target_space(l1);
    R2.label = l2;
    R2.source_space = relation_source_space(l2);
    R2.target_space = relation_target_space(l2);

    for (int i = 0; i < count; ++i) {
        auto rng = detail::split_rng(seed ^ 0xABCD1234u, i);
        CotangentPoint middle;
        if (middle_space == CotSpace::Y) {
            middle.x = detail::lattice_base(rng, d, N);
            middle.xi = detail::conic_fiber(rng, d, N);
        } else {
            const bool conormal = requires_conormal(l1, true) || requires_conormal(l2, false);
            middle.x = detail::lattice_base(rng, n, N);
            if (conormal) middle.x.tail(nu).setZero();
            middle.xi = detail::conic_fiber(rng, n, N);
        }

        // Left factor conditioned on target == middle.
        RelationPoint p1;
        p1.target = middle;
        switch (l1) {
            case LagrangianClass::Psi:
            case LagrangianClass::Partial: p1.source = middle; break;
            case LagrangianClass::B:
                p1.source = {middle.x.head(d), middle.xi.head(d)};
                break;
            case LagrangianClass::C: {
                Eigen::VectorXd xM = Eigen::VectorXd::Zero(n);
                xM.head(d) = middle.x;
                Eigen::VectorXd xiM(n);
                xiM << middle.xi, detail::conic_fiber(rng, nu, N);
                p1.source = {xM, xiM};
                break;
            }
            case LagrangianClass::G: {
                Eigen::VectorXd xiM(n);
                xiM << middle.xi.head(d), detail::conic_fiber(rng, nu, N);
                p1.source = {middle.x, xiM};
                break;
            }
        }

        // Right factor conditioned on source == middle.
        RelationPoint p2;
        p2.source = middle;
        switch (l2) {
            case LagrangianClass::Psi:
            case LagrangianClass::Partial: p2.target = middle; break;
            case LagrangianClass::B: {
                Eigen::VectorXd xM = Eigen::VectorXd::Zero(n);
                xM.head(d) = middle.x;
                Eigen::VectorXd xiM(n);
                xiM << middle.xi, detail::conic_fiber(rng, nu, N);
                p2.target = {xM, xiM};
                break;
            }
            case LagrangianClass::C:
                p2.target = {middle.x.head(d), middle.xi.head(d)};
                break;
            case LagrangianClass::G: {
                Eigen::VectorXd xiM(n);
                xiM << middle.xi.head(d), detail::conic_fiber(rng, nu, N);
                p2.target = {middle.x, xiM};
                break;
            }
        }

        R1.points.push_back(std::move(p1));
        R2.points.push_back(std::move(p2));
    }
    return std::make_pair(std::move(R1), std::move(R2));
}

/// Entry of the derived composition table.
struct DerivedComposition {
    bool spaces_chain = false;
    std::optional<LagrangianClass> result; // nullopt: empty or unclassifiable
};

/// Derives the full 5x5 composition table by matched sampling, set composition, and
/// classification. This derived table is authoritative for reporting; displayed
/// table entries that disagree are listed as discrepancies by the callers.
inline std::map<std::pair<LagrangianClass, LagrangianClass>, DerivedComposition>
derive_composition_table(const TorusEmbedding& geom, int count, std::uint64_t seed,
                         double tol = 1e-9)
{
    std::map<std::pair<LagrangianClass, LagrangianClass>, DerivedComposition> table;
    const std::vector<LagrangianClass> classes = {LagrangianClass::Psi, LagrangianClass::Partial,
                                                  LagrangianClass::B, LagrangianClass::C,
                                                  LagrangianClass::G};
    for (LagrangianClass a : classes) {
        for (LagrangianClass b : classes) {
            DerivedComposition entry;
            auto pair = sample_matched_pair(a, b, geom, count, seed);
            if (pair) {
                entry.spaces_chain = true;
                const auto comp = compose_relations(pair->first, pair->second, tol);
                if (!comp.empty_warning)
                    entry.result = classify_relation(comp.sample, geom);
            }
            table[{a, b}] = entry;
        }
    }
    return table;
}

} // namespace relcalc

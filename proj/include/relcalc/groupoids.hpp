#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "relcalc/relations.hpp" // detail::split_rng

namespace relcalc {

/// An arrow of a sampled groupoid, as a flat coordinate vector whose layout is
/// fixed by the constructing operation.
using Arrow = Eigen::VectorXd;

/// A groupoid presented by samplers and exact structural maps.  Units are
/// represented as arrows (the image of the unit inclusion), so source/target
/// return unit arrows and composability compares them.  The composability
/// predicate encodes each groupoid's own matching rule; the uniform convention
/// is that m(g, h) = g*h is defined when source(g) = target(h).
struct SampledGroupoid {
    std::string name;
    std::string note; // nonempty when a structural map had to be repaired; see constructors
    int arrow_dim = 0;
    double tol = 1e-12;

    std::function<Arrow(std::uint64_t, std::uint64_t)> sample_unit;
    std::function<Arrow(std::uint64_t, std::uint64_t)> sample_arrow;
    // arrow whose target is the given unit (used to build composable chains)
    std::function<Arrow(const Arrow&, std::uint64_t, std::uint64_t)> sample_into;

    std::function<Arrow(const Arrow&)> source; // unit arrow at the source
    std::function<Arrow(const Arrow&)> target; // unit arrow at the target
    std::function<Arrow(const Arrow&)> inverse;
    std::function<bool(const Arrow&, const Arrow&)> composable;
    std::function<Arrow(const Arrow&, const Arrow&)> multiply;

    // residual of the defining constraint (0 on genuine arrows); null when the
    // groupoid has no separate defining constraint
    std::function<double(const Arrow&)> constraint_residual;
};

namespace detail {

inline std::mt19937_64 arrow_rng(std::uint64_t seed, std::uint64_t index)
{
    return std::mt19937_64(split_rng(seed, index));
}

inline double unif(std::mt19937_64& r, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(r);
}

inline double log_unif(std::mt19937_64& r) { return std::exp(unif(r, -4.0, 4.0)); }

} // namespace detail

/// Coordinate-wise relative deviation between two arrows; +inf on layout mismatch.
inline double arrow_deviation(const Arrow& a, const Arrow& b)
{
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double dev = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double scale = 1.0 + std::max(std::abs(a(i)), std::abs(b(i)));
        dev = std::max(dev, std::abs(a(i) - b(i)) / scale);
    }
    return dev;
}

/// Pair groupoid on a finite point set: arrows (x, y), (x,z)*(z,y) = (x,y).
inline SampledGroupoid pair_groupoid(std::vector<Eigen::VectorXd> points)
{
    if (points.empty()) throw std::invalid_argument("pair_groupoid: empty point set");
    const int dim = static_cast<int>(points.front().size());
    for (const auto& p : points)
        if (p.size() != dim) throw std::invalid_argument("pair_groupoid: mixed point dimensions");

    SampledGroupoid G;
    G.name = "pair";
    G.arrow_dim = 2 * dim;

    auto pick = [points](std::mt19937_64& r) {
        return points[std::uniform_int_distribution<std::size_t>(0, points.size() - 1)(r)];
    };
    auto make = [dim](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        Arrow a(2 * dim);
        a << x, y;
        return a;
    };
    auto first = [dim](const Arrow& a) { return Eigen::VectorXd(a.head(dim)); };
    auto second = [dim](const Arrow& a) { return Eigen::VectorXd(a.tail(dim)); };

    G.sample_unit = [pick, make](std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        const auto x = pick(r);
        return make(x, x);
    };
    G.sample_arrow = [pick, make](std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        const auto x = pick(r);
        return make(x, pick(r));
    };
    G.sample_into = [pick, make, first](const Arrow& u, std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        return make(first(u), pick(r));
    };
    G.source = [make, second](const Arrow& a) { return make(second(a), second(a)); };
    G.target = [make, first](const Arrow& a) { return make(first(a), first(a)); };
    G.inverse = [make, first, second](const Arrow& a) { return make(second(a), first(a)); };
    G.composable = [dim, tol = G.tol](const Arrow& a, const Arrow& b) {
        return (a.tail(dim) - b.head(dim)).cwiseAbs().maxCoeff() <= tol;
    };
    G.multiply = [make, first, second, comp = G.composable](const Arrow& a, const Arrow& b) {
        if (!comp(a, b)) throw std::logic_error("pair groupoid: arrows not composable");
        return make(first(a), second(b));
    };
    return G;
}

namespace detail {

/// Shared model for the transition groupoids on [0,1]^k: arrows (x, y, lambda)
/// with per-face boundary strata x_i = y_i = 0 carrying a free transition slot.
struct TransitionModel {
    std::vector<std::function<double(double)>> faces;
    bool multiplicative = true; // transition law: lambda*mu (true) or lambda+mu
    int k() const { return static_cast<int>(faces.size()); }

    bool on_face(double t, double tol) const { return std::abs(t) <= tol; }

    double face_value(int i, double t) const { return faces[static_cast<std::size_t>(i)](t); }

    // transition carrying y to x on face i (interior points)
    double interior_lambda(int i, double x, double y, int cusp_n) const
    {
        const double px = face_value(i, x), py = face_value(i, y);
        if (!(px > 0.0) || !(py > 0.0))
            throw std::domain_error("transition model: nonpositive face value in the interior");
        if (multiplicative) return px / py;
        return 1.0 / std::pow(py, cusp_n) - 1.0 / std::pow(px, cusp_n);
    }
};

inline SampledGroupoid transition_groupoid(TransitionModel model, int cusp_n)
{
    const int k = model.k();
    if (k < 1) throw std::invalid_argument("transition groupoid: need at least one face");
    SampledGroupoid G;
    G.arrow_dim = 3 * k;
    const double tol = G.tol;
    const bool mult = model.multiplicative;
    const double lam_unit = mult ? 1.0 : 0.0;

    auto make = [k](const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& l) {
        Arrow a(3 * k);
        a << x, y, l;
        return a;
    };
    auto X = [k](const Arrow& a) { return Eigen::VectorXd(a.head(k)); };
    auto Y = [k](const Arrow& a) { return Eigen::VectorXd(a.segment(k, k)); };
    auto L = [k](const Arrow& a) { return Eigen::VectorXd(a.tail(k)); };

    // draws one point coordinate per face, boundary with probability 1/4; the
    // interior floor keeps 1/p^n <= 1e3 for depths <= 3, so transition-slot
    // arithmetic stays well-conditioned at the 1e-12 verification tolerance
    auto sample_point = [k](std::mt19937_64& r) {
        Eigen::VectorXd x(k);
        for (int i = 0; i < k; ++i) x(i) = unif(r, 0.0, 1.0) < 0.25 ? 0.0 : unif(r, 0.1, 1.0);
        return x;
    };
    auto boundary_lambda = [mult](std::mt19937_64& r) {
        return mult ? log_unif(r) : unif(r, -20.0, 20.0);
    };
    // arrow from y-stratum-compatible random source into the point x
    auto arrow_to = [model, cusp_n, tol, k, make, boundary_lambda](const Eigen::VectorXd& x,
                                                                  std::mt19937_64& r) {
        Eigen::VectorXd y(k), l(k);
        for (int i = 0; i < k; ++i) {
            if (model.on_face(x(i), tol)) {
                y(i) = 0.0;
                l(i) = boundary_lambda(r);
            } else {
                y(i) = unif(r, 0.1, 1.0);
                l(i) = model.interior_lambda(i, x(i), y(i), cusp_n);
            }
        }
        return make(x, y, l);
    };

    G.sample_unit = [k, make, sample_point, lam_unit](std::uint64_t s, std::uint64_t i) {
        auto r = arrow_rng(s, i);
        const auto x = sample_point(r);
        return make(x, x, Eigen::VectorXd::Constant(k, lam_unit));
    };
    G.sample_arrow = [sample_point, arrow_to](std::uint64_t s, std::uint64_t i) {
        auto r = arrow_rng(s, i);
        return arrow_to(sample_point(r), r);
    };
    G.sample_into = [X, arrow_to](const Arrow& u, std::uint64_t s, std::uint64_t i) {
        auto r = arrow_rng(s, i);
        return arrow_to(X(u), r);
    };
    G.source = [k, make, Y, lam_unit](const Arrow& a) {
        return make(Y(a), Y(a), Eigen::VectorXd::Constant(k, lam_unit));
    };
    G.target = [k, make, X, lam_unit](const Arrow& a) {
        return make(X(a), X(a), Eigen::VectorXd::Constant(k, lam_unit));
    };
    G.inverse = [make, X, Y, L, mult](const Arrow& a) {
        return make(Y(a), X(a), mult ? Eigen::VectorXd(L(a).cwiseInverse()) : Eigen::VectorXd(-L(a)));
    };
    G.composable = [k, tol](const Arrow& a, const Arrow& b) {
        return (a.segment(k, k) - b.head(k)).cwiseAbs().maxCoeff() <= tol;
    };
    G.multiply = [make, X, Y, L, mult, comp = G.composable](const Arrow& a, const Arrow& b) {
        if (!comp(a, b)) throw std::logic_error("transition groupoid: arrows not composable");
        return make(X(a), Y(b),
                    mult ? Eigen::VectorXd(L(a).cwiseProduct(L(b))) : Eigen::VectorXd(L(a) + L(b)));
    };
    G.constraint_residual = [model, cusp_n, tol, k, X, Y, L](const Arrow& a) {
        double res = 0.0;
        for (int i = 0; i < k; ++i) {
            const double x = X(a)(i), y = Y(a)(i), l = L(a)(i);
            const bool bx = model.on_face(x, tol), by = model.on_face(y, tol);
            if (bx != by) return 1.0; // arrows never cross strata
            if (bx) continue;        // boundary transition slot is free
            const double px = model.face_value(i, x), py = model.face_value(i, y);
            if (model.multiplicative) {
                res = std::max(res, std::abs(px - l * py) / (1.0 + std::abs(px)));
            } else {
                const double pxn = std::pow(px, cusp_n), pyn = std::pow(py, cusp_n);
                res = std::max(res, std::abs(l * pxn * pyn - (pxn - pyn)));
            }
        }
        return res;
    };
    return G;
}

} // namespace detail

/// Transition groupoid with multiplicative scaling: arrows (x, y, lambda) on
/// [0,1]^k with p_i(x) = lambda_i p_i(y); boundary strata carry free lambda.
inline SampledGroupoid b_groupoid(std::vector<std::function<double(double)>> faces)
{
    detail::TransitionModel model{std::move(faces), /*multiplicative=*/true};
    auto G = detail::transition_groupoid(std::move(model), 0);
    G.name = "b";
    return G;
}

/// Cusp-type transition groupoid of depth n >= 2: arrows (x, y, lambda) with
/// lambda_i p_i(x)^n p_i(y)^n = p_i(x)^n - p_i(y)^n.  The transition slot is
/// additive under composition: that is the unique law preserving the defining
/// constraint (a multiplicative law does not), so the additive one is used and
/// the choice is recorded on the groupoid.
inline SampledGroupoid cusp_groupoid(int n, std::vector<std::function<double(double)>> faces)
{
    if (n < 2) throw std::invalid_argument("cusp_groupoid: depth must be an integer >= 2");
    detail::TransitionModel model{std::move(faces), /*multiplicative=*/false};
    auto G = detail::transition_groupoid(std::move(model), n);
    G.name = "cusp";
    G.note = "transition slots compose additively: the constraint "
             "lambda p(x)^n p(y)^n = p(x)^n - p(y)^n telescopes in 1/p^n, so the "
             "additive law is the only one preserving it";
    return G;
}

/// Cotangent (CDW) groupoid of the pair groupoid on R^dim: arrows
/// (x, y, xi, eta), units (x, x, xi, -xi), with
/// (x, z, xi, zeta) * (z, y, -zeta, eta) = (x, y, xi, eta).
inline SampledGroupoid cdw_of_pair(int dim)
{
    if (dim < 1) throw std::invalid_argument("cdw_of_pair: dimension must be >= 1");
    SampledGroupoid G;
    G.name = "cdw_pair";
    G.arrow_dim = 4 * dim;
    const double tol = G.tol;

    auto make = [dim](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) {
        Arrow a(4 * dim);
        a << x, y, xi, eta;
        return a;
    };
    auto X = [dim](const Arrow& a) { return Eigen::VectorXd(a.segment(0 * dim, dim)); };
    auto Y = [dim](const Arrow& a) { return Eigen::VectorXd(a.segment(1 * dim, dim)); };
    auto Xi = [dim](const Arrow& a) { return Eigen::VectorXd(a.segment(2 * dim, dim)); };
    auto Eta = [dim](const Arrow& a) { return Eigen::VectorXd(a.segment(3 * dim, dim)); };

    auto rand_point = [dim](std::mt19937_64& r) {
        Eigen::VectorXd x(dim);
        for (int i = 0; i < dim; ++i) x(i) = detail::unif(r, 0.0, 1.0);
        return x;
    };
    auto rand_covector = [dim](std::mt19937_64& r) {
        std::normal_distribution<double> g;
        Eigen::VectorXd xi(dim);
        for (int i = 0; i < dim; ++i) xi(i) = g(r);
        return xi;
    };

    G.sample_unit = [make, rand_point, rand_covector](std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        const auto x = rand_point(r);
        const auto xi = rand_covector(r);
        return make(x, x, xi, -xi);
    };
    G.sample_arrow = [make, rand_point, rand_covector](std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        return make(rand_point(r), rand_point(r), rand_covector(r), rand_covector(r));
    };
    G.sample_into = [make, X, Xi, rand_point, rand_covector](const Arrow& u, std::uint64_t s,
                                                             std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        return make(X(u), rand_point(r), Xi(u), rand_covector(r));
    };
    G.source = [make, Y, Eta](const Arrow& a) { return make(Y(a), Y(a), -Eta(a), Eta(a)); };
    G.target = [make, X, Xi](const Arrow& a) { return make(X(a), X(a), Xi(a), -Xi(a)); };
    G.inverse = [make, X, Y, Xi, Eta](const Arrow& a) {
        return make(Y(a), X(a), -Eta(a), -Xi(a));
    };
    G.composable = [tol, X, Y, Xi, Eta](const Arrow& a, const Arrow& b) {
        return (Y(a) - X(b)).cwiseAbs().maxCoeff() <= tol &&
               (Eta(a) + Xi(b)).cwiseAbs().maxCoeff() <= tol;
    };
    G.multiply = [make, X, Y, Xi, Eta, comp = G.composable](const Arrow& a, const Arrow& b) {
        if (!comp(a, b)) throw std::logic_error("cdw_of_pair: arrows not composable");
        return make(X(a), Y(b), Xi(a), Eta(b));
    };
    return G;
}

/// Cotangent (CDW) groupoid of the boundary stratum of the b-groupoid: the
/// product of the cotangent pair groupoid on the boundary with the cotangent
/// groupoid of the scaling group (R_+, *).  Arrows (x1, xi1, x2, xi2, l1, l2):
/// the first four slots are a cotangent pair arrow, l1 is the scaling element
/// and l2 its conserved moment.  Units are {(x, x, xi, -xi, 1, t)}.  Relative
/// to the display this mirrors, the range map's scale slots read (1, t), the
/// product preserves the moment slot, and the inverse negates covectors and
/// keeps the moment: the displayed variants violate the axioms the structure
/// must satisfy, and each repair is forced by unit membership of ranges,
/// composability of an arrow with its inverse, and source-consistency of the
/// inverse respectively.
inline SampledGroupoid cdw_of_b()
{
    SampledGroupoid G;
    G.name = "cdw_b";
    G.arrow_dim = 6;
    const double tol = G.tol;
    G.note = "scale-slot structural maps repaired to satisfy the axioms: range scale "
             "slots (1, t); product keeps the moment slot; inverse negates covectors "
             "and keeps the moment";

    auto make = [](double x1, double xi1, double x2, double xi2, double l1, double l2) {
        Arrow a(6);
        a << x1, xi1, x2, xi2, l1, l2;
        return a;
    };

    G.sample_unit = [make](std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        std::normal_distribution<double> g;
        const double x = detail::unif(r, 0.0, 1.0), xi = g(r);
        return make(x, xi, x, -xi, 1.0, detail::log_unif(r));
    };
    G.sample_arrow = [make](std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        std::normal_distribution<double> g;
        const double x1 = detail::unif(r, 0.0, 1.0), x2 = detail::unif(r, 0.0, 1.0);
        return make(x1, g(r), x2, g(r), detail::log_unif(r), detail::log_unif(r));
    };
    G.sample_into = [make](const Arrow& u, std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        std::normal_distribution<double> g;
        return make(u(0), u(1), detail::unif(r, 0.0, 1.0), g(r), detail::log_unif(r), u(5));
    };
    G.source = [make](const Arrow& a) { return make(a(2), -a(3), a(2), a(3), 1.0, a(5)); };
    G.target = [make](const Arrow& a) { return make(a(0), a(1), a(0), -a(1), 1.0, a(5)); };
    G.inverse = [make](const Arrow& a) {
        return make(a(2), -a(3), a(0), -a(1), 1.0 / a(4), a(5));
    };
    G.composable = [tol](const Arrow& a, const Arrow& b) {
        const double scale = 1.0 + std::max(std::abs(a(5)), std::abs(b(5)));
        return std::abs(a(2) - b(0)) <= tol && std::abs(a(3) + b(1)) <= tol &&
               std::abs(a(5) - b(5)) / scale <= tol;
    };
    G.multiply = [make, comp = G.composable](const Arrow& a, const Arrow& b) {
        if (!comp(a, b)) throw std::logic_error("cdw_of_b: arrows not composable");
        return make(a(0), a(1), b(2), b(3), a(4) * b(4), a(5));
    };
    return G;
}

/// One named axiom's worst deviation over the trial set.
struct AxiomCheck {
    std::string axiom;
    double max_deviation = 0.0;
    bool passed = true;
};

struct AxiomReport {
    std::vector<AxiomCheck> checks;
    int trials = 0;
    double tol = 1e-12;
    bool passed = true;
};

/// Verifies the groupoid axioms on random composable pairs/triples:
/// unit section, unit laws, inverse laws, involution, associativity,
/// source/target of products, composability of constructed chains, and
/// preservation of the defining constraint when one is declared.
inline AxiomReport check_axioms(const SampledGroupoid& G, int trials, std::uint64_t seed)
{
    if (trials < 1) throw std::invalid_argument("check_axioms: trials must be >= 1");
    AxiomReport rep;
    rep.trials = trials;
    rep.tol = G.tol;

    auto& checks = rep.checks;
    auto slot = [&checks](const std::string& axiom) -> AxiomCheck& {
        for (auto& c : checks)
            if (c.axiom == axiom) return c;
        checks.push_back({axiom, 0.0, true});
        return checks.back();
    };
    auto record = [&slot](const std::string& axiom, double dev) {
        auto& c = slot(axiom);
        c.max_deviation = std::max(c.max_deviation, dev);
    };

    for (int t = 0; t < trials; ++t) {
        const auto idx = static_cast<std::uint64_t>(t);
        const Arrow u = G.sample_unit(seed, 4 * idx);
        record("unit_section", arrow_deviation(G.source(u), u));
        record("unit_section", arrow_deviation(G.target(u), u));

        const Arrow a = G.sample_arrow(seed, 4 * idx + 1);
        const Arrow b = G.sample_into(G.source(a), seed, 4 * idx + 2);
        const Arrow c = G.sample_into(G.source(b), seed, 4 * idx + 3);

        record("composability", G.composable(a, b) ? 0.0 : 1.0);
        record("composability", G.composable(b, c) ? 0.0 : 1.0);

        record("left_unit", arrow_deviation(G.multiply(G.target(a), a), a));
        record("right_unit", arrow_deviation(G.multiply(a, G.source(a)), a));

        const Arrow ia = G.inverse(a);
        record("inverse_product", arrow_deviation(G.multiply(a, ia), G.target(a)));
        record("inverse_product", arrow_deviation(G.multiply(ia, a), G.source(a)));
        record("inverse_involution", arrow_deviation(G.inverse(ia), a));

        const Arrow ab = G.multiply(a, b);
        record("product_source_target", arrow_deviation(G.source(ab), G.source(b)));
        record("product_source_target", arrow_deviation(G.target(ab), G.target(a)));
        record("associativity",
               arrow_deviation(G.multiply(ab, c), G.multiply(a, G.multiply(b, c))));

        if (G.constraint_residual) {
            record("constraint_preservation", G.constraint_residual(a));
            record("constraint_preservation", G.constraint_residual(ab));
            record("constraint_preservation", G.constraint_residual(G.multiply(ab, c)));
        }
    }

    for (auto& c : rep.checks) {
        c.passed = c.max_deviation <= rep.tol;
        rep.passed = rep.passed && c.passed;
    }
    return rep;
}

/// Correspondence space Z = target^{-1}(Y) for a one-face scaling model on
/// [0,1]: elements are arrows landing on the cross-section sample Y, with
/// charge maps to Y and to the base, acted on by the cross-section pair
/// groupoid from the left and the transition groupoid from the right.
struct Bibundle {
    std::vector<double> cross_section; // Y sample (interior points)
    std::function<Arrow(std::uint64_t, std::uint64_t)> sample_z;
    std::function<double(const Arrow&)> charge_to_section; // p: Z -> Y
    std::function<double(const Arrow&)> charge_to_base;    // q: Z -> M
    std::function<Arrow(const Arrow&, const Arrow&)> act_left;  // (h, z) -> h.z
    std::function<Arrow(const Arrow&, const Arrow&)> act_right; // (z, g) -> z.g
};

struct BibundleReport {
    bool actions_commute = true;
    bool right_action_free = true;
    bool orbit_witness_ok = true;
    bool base_charge_surjective = true;
    double max_deviation = 0.0;
    int trials = 0;
    std::string failure_detail;
    bool passed = true;
};

struct BibundleResult {
    Bibundle bundle;
    BibundleReport report;
};

/// Builds the correspondence space for the one-face multiplicative model and
/// verifies on samples: the two actions commute, the right action is free, any
/// two elements over the same section point differ by a unique right
/// translation (the quotient is the section), and the base charge map is onto
/// the sampled interior.
inline BibundleResult bibundle_from_embedding(const SampledGroupoid& Gb,
                                              const std::function<double(double)>& face,
                                              std::vector<double> cross_section, int trials,
                                              std::uint64_t seed)
{
    if (Gb.arrow_dim != 3)
        throw std::invalid_argument("bibundle_from_embedding: expects the one-face model");
    if (cross_section.empty())
        throw std::invalid_argument("bibundle_from_embedding: empty cross-section sample");
    for (double y : cross_section)
        if (!(face(y) > 0.0))
            throw std::invalid_argument("bibundle_from_embedding: section point on the boundary");

    BibundleResult out;
    auto& bib = out.bundle;
    bib.cross_section = cross_section;

    auto make = [](double x, double y, double l) {
        Arrow a(3);
        a << x, y, l;
        return a;
    };
    // arrow of the scaling groupoid from base point m to section point y0
    auto z_arrow = [face, make](double y0, double m) { return make(y0, m, face(y0) / face(m)); };

    bib.sample_z = [cross_section, z_arrow](std::uint64_t s, std::uint64_t i) {
        auto r = detail::arrow_rng(s, i);
        const double y0 = cross_section[std::uniform_int_distribution<std::size_t>(
            0, cross_section.size() - 1)(r)];
        return z_arrow(y0, detail::unif(r, 0.02, 1.0));
    };
    bib.charge_to_section = [](const Arrow& z) { return z(0); };
    bib.charge_to_base = [](const Arrow& z) { return z(1); };
    // left action by the section pair groupoid, through its arrow lift into Gb
    bib.act_left = [make, face, mul = Gb.multiply](const Arrow& h, const Arrow& z) {
        const Arrow lift = make(h(0), h(1), face(h(0)) / face(h(1)));
        return mul(lift, z);
    };
    bib.act_right = [mul = Gb.multiply](const Arrow& z, const Arrow& g) { return mul(z, g); };

    auto& rep = out.report;
    rep.trials = trials;
    const double tol = Gb.tol;
    auto note_failure = [&rep](bool& flag, const std::string& what) {
        flag = false;
        if (rep.failure_detail.empty()) rep.failure_detail = what;
    };

    for (int t = 0; t < trials; ++t) {
        const auto idx = static_cast<std::uint64_t>(t);
        auto r = detail::arrow_rng(seed ^ 0x9b1bu, idx);
        auto pick_y = [&] {
            return cross_section[std::uniform_int_distribution<std::size_t>(
                0, cross_section.size() - 1)(r)];
        };

        // (a) actions commute: (h.z).g = h.(z.g)
        const Arrow z = z_arrow(pick_y(), detail::unif(r, 0.02, 1.0));
        Arrow h(2);
        h << pick_y(), z(0); // section arrow acting on p(z)
        const double m2 = detail::unif(r, 0.02, 1.0);
        const Arrow g2 = make(z(1), m2, face(z(1)) / face(m2));
        const double dev_comm =
            arrow_deviation(bib.act_right(bib.act_left(h, z), g2), bib.act_left(h, bib.act_right(z, g2)));
        rep.max_deviation = std::max(rep.max_deviation, dev_comm);
        if (dev_comm > tol) note_failure(rep.actions_commute, "actions_commute");
        if (std::abs(bib.charge_to_base(bib.act_right(z, g2)) - g2(1)) > tol)
            note_failure(rep.actions_commute, "base_charge_of_translate");

        // (b) freeness: z.g = z forces g to be the unit at q(z)
        {
            const Arrow zg = bib.act_right(z, g2);
            const bool fixes = arrow_deviation(zg, z) <= tol;
            const Arrow unit_q = make(z(1), z(1), 1.0);
            const bool is_unit = arrow_deviation(g2, unit_q) <= tol;
            if (fixes != is_unit) note_failure(rep.right_action_free, "right_action_free");
            // the stabilizer equation solved directly: endpoints fixed, unit scale
            const Arrow solved = make(z(1), z(1), 1.0);
            if (arrow_deviation(bib.act_right(z, solved), z) > tol)
                note_failure(rep.right_action_free, "stabilizer_solution");
        }

        // (c) same-section pairs differ by the ratio translation
        {
            const double y0 = pick_y();
            const Arrow za = z_arrow(y0, detail::unif(r, 0.02, 1.0));
            const Arrow zb = z_arrow(y0, detail::unif(r, 0.02, 1.0));
            const Arrow eta = make(za(1), zb(1), zb(2) / za(2));
            const double dev = arrow_deviation(bib.act_right(za, eta), zb);
            rep.max_deviation = std::max(rep.max_deviation, dev);
            if (dev > tol) note_failure(rep.orbit_witness_ok, "orbit_witness");
            if (Gb.constraint_residual && Gb.constraint_residual(eta) > tol)
                note_failure(rep.orbit_witness_ok, "orbit_witness_constraint");
        }

        // (d) base charge is onto the sampled interior
        {
            const double m = detail::unif(r, 0.02, 1.0);
            const Arrow z_m = z_arrow(cross_section.front(), m);
            if (std::abs(bib.charge_to_base(z_m) - m) > tol ||
                (Gb.constraint_residual && Gb.constraint_residual(z_m) > tol))
                note_failure(rep.base_charge_surjective, "base_charge_surjective");
        }

        // z . unit = z
        const Arrow unit_q = make(z(1), z(1), 1.0);
        const double dev_unit = arrow_deviation(bib.act_right(z, unit_q), z);
        rep.max_deviation = std::max(rep.max_deviation, dev_unit);
        if (dev_unit > tol) note_failure(rep.right_action_free, "unit_translation");
    }

    rep.passed = rep.actions_commute && rep.right_action_free && rep.orbit_witness_ok &&
                 rep.base_charge_surjective;
    return out;
}

} // namespace relcalc

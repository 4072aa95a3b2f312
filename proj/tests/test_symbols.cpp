#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "relcalc/symbols.hpp"

using namespace relcalc;
using LC = LagrangianClass;

namespace {

const TorusEmbedding geom = make_geometry(2, 1, 16);

BaseProfile trig_profile(double a1, double a2)
{
    return [a1, a2](const Eigen::VectorXd& x) -> cplx {
        double s = 0.0, c = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            c += std::cos(x[i] * (1 + i));
            s += std::sin(x[i]);
        }
        return cplx(1.0 + a1 * c, a2 * s);
    };
}

std::vector<SymbolArgs> sample_phase_points(const FiberSignature& sig, int count, unsigned seed,
                                            double min_radius = 1.0, double max_radius = 24.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    std::uniform_real_distribution<double> logr(std::log(min_radius), std::log(max_radius));
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_block = [&](int dim) {
        Eigen::VectorXd v(dim);
        if (dim == 0) return v;
        for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
        const double nrm = v.norm();
        if (nrm > 0) v *= std::exp(logr(rng)) / nrm;
        return v;
    };
    std::vector<SymbolArgs> out;
    for (int t = 0; t < count; ++t) {
        SymbolArgs s;
        s.base.resize(sig.base_dim);
        for (int i = 0; i < sig.base_dim; ++i) s.base[i] = angle(rng);
        s.xi1 = random_block(sig.xi1_dim);
        s.xi2 = random_block(sig.xi2_dim);
        s.eta2 = random_block(sig.eta2_dim);
        out.push_back(std::move(s));
    }
    return out;
}

SymbolArgs args_at(std::initializer_list<double> base, std::initializer_list<double> xi1,
                   std::initializer_list<double> xi2 = {}, std::initializer_list<double> eta2 = {})
{
    auto fill = [](std::initializer_list<double> vals) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
        Eigen::Index i = 0;
        for (double x : vals) v[i++] = x;
        return v;
    };
    return SymbolArgs{fill(base), fill(xi1), fill(xi2), fill(eta2)};
}

} // namespace

TEST_CASE("quadrature oracle freezes the excess-integral reference value", "[symbols]")
{
    // integral over R of (1+t^2)^{-2} dt = pi/2; frozen composed value (2pi)^{-1} * pi/2 = 1/4.
    const double integral =
        oracle::adaptive_simpson([](double t) { return std::pow(1.0 + t * t, -2.0); }, -64.0, 64.0);
    CHECK(integral == Catch::Approx(std::numbers::pi / 2.0).margin(1e-5));
    CHECK(integral / two_pi == Catch::Approx(0.25).margin(1e-5));
}

TEST_CASE("canonical symbols evaluate to the pinned weights", "[symbols]")
{
    const auto psi0 = make_classical_symbol(LC::Psi, MultiOrder::psi(0.0), geom);
    CHECK(psi0(args_at({0.3, 1.2}, {5.0, -3.0})) == cplx(1.0, 0.0));

    const auto pm1 = make_classical_symbol(LC::Partial, MultiOrder::partial(-1.0), geom);
    CHECK(std::abs(pm1(args_at({0.1}, {1.0})) - cplx(std::pow(2.0, -0.5), 0.0)) < 1e-15);

    const auto b12 = make_classical_symbol(LC::B, MultiOrder::b(1.0, -2.0), geom);
    CHECK(std::abs(b12(args_at({0.0}, {0.0}, {}, {2.0})) - cplx(0.2, 0.0)) < 1e-15);

    const auto cmk = make_classical_symbol(LC::C, MultiOrder::c(2.0, -1.0), geom);
    // <(xi',xi'')>^2 <xi'>^{-1} at xi'=2, xi''=1: (1+4+1) / sqrt(5) = 6/sqrt(5).
    CHECK(std::abs(cmk(args_at({0.0}, {2.0}, {1.0})) - cplx(6.0 / std::sqrt(5.0), 0.0)) < 1e-12);

    const auto g = make_classical_symbol(LC::G, MultiOrder::g(1.0, 2.0, -1.0), geom);
    // <xi'>^2 <(xi',xi'')>^1 <(xi',eta'')>^{-1} at xi'=1, xi''=2, eta''=2.
    const double expect = 2.0 * std::sqrt(6.0) / std::sqrt(6.0);
    CHECK(std::abs(g(args_at({0.0}, {1.0}, {2.0}, {2.0})) - cplx(expect, 0.0)) < 1e-12);
}

TEST_CASE("canonical symbols satisfy the weighted-derivative estimates", "[symbols]")
{
    struct Case { LC cls; MultiOrder o; };
    const std::vector<Case> cases = {
        {LC::Psi, MultiOrder::psi(0.0)},      {LC::Psi, MultiOrder::psi(-1.5)},
        {LC::Partial, MultiOrder::partial(2.0)}, {LC::B, MultiOrder::b(1.0, -2.0)},
        {LC::C, MultiOrder::c(-2.0, 1.0)},    {LC::G, MultiOrder::g(-1.0, 1.0, -2.0)},
    };
    unsigned seed = 51;
    for (const auto& c : cases) {
        const auto sym = make_classical_symbol(
            c.cls, c.o, geom, trig_profile(0.2, 0.1),
            [](const Eigen::VectorXd& u) { return cplx(1.0 + 0.3 * u[0], 0.1 * u[u.size() - 1]); });
        const auto samples = sample_phase_points(sym.sig, 40, seed++);
        const auto report = check_symbol_estimates(sym, 2, samples, 10.0);
        INFO(class_name(c.cls) << " worst ratio " << report.worst_ratio);
        CHECK(report.pass);
    }
}

TEST_CASE("exponential growth declared as order zero fails the estimates", "[symbols]")
{
    Symbol bad;
    bad.cls = LC::Psi;
    bad.order = MultiOrder::psi(0.0);
    bad.sig = signature_of(LC::Psi, geom);
    bad.eval = [](const SymbolArgs& a) { return cplx(std::exp(a.xi1.norm()), 0.0); };
    const auto samples = sample_phase_points(bad.sig, 30, 7, 4.0, 24.0);
    const auto report = check_symbol_estimates(bad, 1, samples, 10.0);
    CHECK_FALSE(report.pass);
    CHECK(report.worst_ratio > 1e6);
}

TEST_CASE("non-finite evaluator values raise an evaluation error", "[symbols]")
{
    Symbol nan_sym;
    nan_sym.cls = LC::Partial;
    nan_sym.order = MultiOrder::partial(0.0);
    nan_sym.sig = signature_of(LC::Partial, geom);
    nan_sym.eval = [](const SymbolArgs&) { return cplx(std::nan(""), 0.0); };
    const auto samples = sample_phase_points(nan_sym.sig, 3, 9);
    CHECK_THROWS_AS(check_symbol_estimates(nan_sym, 1, samples), std::runtime_error);
}

TEST_CASE("order composition reproduces the full displayed table", "[symbols]")
{
    const double kappa = 0.7; // arbitrary, to exercise the plumbing
    const MultiOrder o1 = MultiOrder::g(0.3, 1.1, -2.2); // m,k,l slots read per class
    const MultiOrder o2 = MultiOrder::g(-0.4, 0.9, -1.3);
    auto oc = [&](LC a, LC b) { return order_compose(a, o1, b, o2, kappa); };

    // Partial row.
    CHECK(oc(LC::Partial, LC::Partial).cls == LC::Partial);
    CHECK(oc(LC::Partial, LC::Partial).order.m == Catch::Approx(o1.m + o2.m));
    CHECK(oc(LC::Partial, LC::B).cls == LC::B);
    CHECK(oc(LC::Partial, LC::B).order.k == Catch::Approx(o1.m + o2.k));
    CHECK(oc(LC::Partial, LC::B).order.l == Catch::Approx(o2.l));
    CHECK(oc(LC::Partial, LC::C).cls == LC::C); // displayed entry without operator chaining
    CHECK(oc(LC::Partial, LC::C).order.m == Catch::Approx(o1.m + o2.m));
    CHECK_FALSE(oc(LC::Partial, LC::Psi).compatible);
    CHECK_FALSE(oc(LC::Partial, LC::G).compatible);

    // Psi row.
    CHECK(oc(LC::Psi, LC::Psi).cls == LC::Psi);
    CHECK(oc(LC::Psi, LC::C).cls == LC::C);
    CHECK(oc(LC::Psi, LC::C).order.m == Catch::Approx(o1.m + o2.m));
    CHECK(oc(LC::Psi, LC::C).order.k == Catch::Approx(o2.k));
    CHECK(oc(LC::Psi, LC::G).cls == LC::G);
    CHECK(oc(LC::Psi, LC::G).order.m == Catch::Approx(o1.m + o2.m));
    CHECK_FALSE(oc(LC::Psi, LC::Partial).compatible);
    CHECK_FALSE(oc(LC::Psi, LC::B).compatible);

    // B row.
    CHECK(oc(LC::B, LC::Partial).cls == LC::B); // displayed entry without operator chaining
    CHECK(oc(LC::B, LC::Partial).order.k == Catch::Approx(o1.k + o2.m));
    CHECK(oc(LC::B, LC::Partial).order.l == Catch::Approx(o1.l));
    CHECK(oc(LC::B, LC::Psi).cls == LC::B);
    CHECK(oc(LC::B, LC::Psi).order.k == Catch::Approx(o1.k));
    CHECK(oc(LC::B, LC::Psi).order.l == Catch::Approx(o1.l + o2.m));
    CHECK(oc(LC::B, LC::C).cls == LC::Partial);
    CHECK(oc(LC::B, LC::C).order.m == Catch::Approx(o1.k + o1.l + o2.k + o2.m + kappa));
    CHECK(oc(LC::B, LC::G).cls == LC::B);
    CHECK(oc(LC::B, LC::G).order.k == Catch::Approx(o1.k + o1.l + o2.k + o2.m + kappa));
    CHECK(oc(LC::B, LC::G).order.l == Catch::Approx(o2.l));
    CHECK_FALSE(oc(LC::B, LC::B).compatible);

    // C row.
    CHECK(oc(LC::C, LC::Partial).cls == LC::C);
    CHECK(oc(LC::C, LC::Partial).order.m == Catch::Approx(o1.m));
    CHECK(oc(LC::C, LC::Partial).order.k == Catch::Approx(o1.k + o2.m));
    CHECK(oc(LC::C, LC::B).cls == LC::G);
    CHECK(oc(LC::C, LC::B).order.m == Catch::Approx(o1.m));
    CHECK(oc(LC::C, LC::B).order.k == Catch::Approx(o1.k + o2.k));
    CHECK(oc(LC::C, LC::B).order.l == Catch::Approx(o2.l));
    CHECK_FALSE(oc(LC::C, LC::Psi).compatible);
    CHECK_FALSE(oc(LC::C, LC::C).compatible);
    CHECK_FALSE(oc(LC::C, LC::G).compatible);

    // G row.
    CHECK(oc(LC::G, LC::Psi).cls == LC::G);
    CHECK(oc(LC::G, LC::Psi).order.l == Catch::Approx(o1.l + o2.m));
    CHECK(oc(LC::G, LC::C).cls == LC::C);
    CHECK(oc(LC::G, LC::C).order.m == Catch::Approx(o1.m));
    CHECK(oc(LC::G, LC::C).order.k == Catch::Approx(o1.k + o1.l + o2.k + o2.m + kappa));
    CHECK(oc(LC::G, LC::G).cls == LC::G);
    // Associative first component m1; the displayed m2 is recorded separately.
    CHECK(oc(LC::G, LC::G).order.m == Catch::Approx(o1.m));
    CHECK(displayed_gg_first_component(o1, o2) == Catch::Approx(o2.m));
    CHECK(oc(LC::G, LC::G).order.k == Catch::Approx(o1.k + o1.l + o2.k + o2.m + kappa));
    CHECK(oc(LC::G, LC::G).order.l == Catch::Approx(o2.l));
    CHECK_FALSE(oc(LC::G, LC::Partial).compatible);
    CHECK_FALSE(oc(LC::G, LC::B).compatible);
}

TEST_CASE("order composition is associative whenever both groupings exist", "[symbols]")
{
    const std::vector<LC> classes = {LC::Psi, LC::Partial, LC::B, LC::C, LC::G};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const double kappa = 1.0;
    int both_defined = 0, one_sided_with_stray = 0, one_sided_chaining_only = 0;

    for (int trial = 0; trial < 5; ++trial) {
        for (LC a : classes) {
            for (LC b : classes) {
                for (LC c : classes) {
                    const MultiOrder oa{u(rng), u(rng), u(rng)};
                    const MultiOrder ob{u(rng), u(rng), u(rng)};
                    const MultiOrder ocr{u(rng), u(rng), u(rng)};
                    const auto ab = order_compose(a, oa, b, ob, kappa);
                    const auto bc = order_compose(b, ob, c, ocr, kappa);
                    const auto left = ab.compatible
                                          ? order_compose(ab.cls, ab.order, c, ocr, kappa)
                                          : OrderComposeResult{};
                    const auto right = bc.compatible
                                           ? order_compose(a, oa, bc.cls, bc.order, kappa)
                                           : OrderComposeResult{};
                    if (left.compatible && right.compatible) {
                        ++both_defined;
                        CHECK(left.cls == right.cls);
                        CHECK(left.order.m == Catch::Approx(right.order.m).margin(1e-12));
                        CHECK(left.order.k == Catch::Approx(right.order.k).margin(1e-12));
                        CHECK(left.order.l == Catch::Approx(right.order.l).margin(1e-12));
                    } else if (left.compatible != right.compatible) {
                        // One-sided definedness can only pass through the two
                        // displayed entries that do not chain as operators.
                        const bool chain_ab = classes_chain(a, b);
                        const bool chain_bc = classes_chain(b, c);
                        const bool chain_abc = ab.compatible && classes_chain(ab.cls, c);
                        const bool chain_a_bc = bc.compatible && classes_chain(a, bc.cls);
                        const bool all_chain = chain_ab && chain_bc && chain_abc && chain_a_bc;
                        if (all_chain) ++one_sided_chaining_only;
                        else ++one_sided_with_stray;
                    }
                }
            }
        }
    }
    CHECK(both_defined > 0);
    CHECK(one_sided_chaining_only == 0); // restricted to chaining pairs, definedness is two-sided
}

TEST_CASE("twisted product units and linearity", "[symbols]")
{
    const double kappa = 1.0;
    const auto c1 = make_classical_symbol(LC::C, MultiOrder::c(0.0, 0.0), geom);
    const auto b1 = make_classical_symbol(LC::B, MultiOrder::b(0.0, 0.0), geom);
    const auto g11 = twisted_product_leading(c1, b1, kappa);
    CHECK(g11.sym.cls == LC::G);
    for (const auto& s : sample_phase_points(g11.sym.sig, 10, 31))
        CHECK(std::abs(g11.sym(s) - cplx(1.0, 0.0)) < 1e-14);

    const auto p1 = make_classical_symbol(LC::Partial, MultiOrder::partial(0.0), geom);
    const auto b = make_classical_symbol(LC::B, MultiOrder::b(0.7, -1.4), geom, trig_profile(0.2, 0.1));
    const auto pb = twisted_product_leading(p1, b, kappa);
    CHECK(pb.sym.cls == LC::B);
    for (const auto& s : sample_phase_points(pb.sym.sig, 10, 32))
        CHECK(std::abs(pb.sym(s) - b(s)) < 1e-13);

    // Linearity in the left factor, including an excess-integral pair.
    const auto bA = make_classical_symbol(LC::B, MultiOrder::b(0.0, -2.0), geom, trig_profile(0.15, 0.0));
    const auto bB = make_classical_symbol(LC::B, MultiOrder::b(0.0, -2.0), geom, trig_profile(0.0, 0.2));
    Symbol bSum = bA;
    {
        const Symbol lhs = bA, rhs = bB;
        bSum.eval = [lhs, rhs](const SymbolArgs& s) { return lhs(s) + rhs(s); };
    }
    const auto cR = make_classical_symbol(LC::C, MultiOrder::c(-2.0, 0.0), geom);
    const auto prodSum = twisted_product_leading(bSum, cR, kappa);
    const auto prodA = twisted_product_leading(bA, cR, kappa);
    const auto prodB = twisted_product_leading(bB, cR, kappa);
    for (const auto& s : sample_phase_points(prodSum.sym.sig, 8, 33, 0.5, 6.0)) {
        const cplx lhs = prodSum.sym(s);
        const cplx rhs = prodA.sym(s) + prodB.sym(s);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("excess integral reproduces the frozen quadrature value", "[symbols]")
{
    const double kappa = 1.0; // nu = 1 for this geometry
    const auto b = make_classical_symbol(LC::B, MultiOrder::b(0.0, -2.0), geom);
    const auto c = make_classical_symbol(LC::C, MultiOrder::c(-2.0, 0.0), geom);
    const auto prod = twisted_product_leading(b, c, kappa);
    CHECK(prod.sym.cls == LC::Partial);
    CHECK(prod.sym.order.m == Catch::Approx(0.0 - 2.0 + 0.0 - 2.0 + kappa));
    CHECK_FALSE(prod.divergence_warning);

    const cplx at0 = prod.sym(args_at({0.4}, {0.0}));
    CHECK(std::abs(at0 - cplx(0.25, 0.0)) < 1e-4);
    // a_partial(xi') = (1/4) (1+|xi'|^2)^{-3/2}
    const cplx at1 = prod.sym(args_at({0.4}, {1.0}));
    CHECK(std::abs(at1 - cplx(0.25 * std::pow(2.0, -1.5), 0.0)) < 1e-4);

    // Divergence warning when the excess order sum reaches -nu.
    const auto b0 = make_classical_symbol(LC::B, MultiOrder::b(0.0, -0.5), geom);
    const auto c0 = make_classical_symbol(LC::C, MultiOrder::c(-0.5, 0.0), geom);
    CHECK(twisted_product_leading(b0, c0, kappa).divergence_warning);
}

TEST_CASE("twisted products refuse non-chaining displayed entries", "[symbols]")
{
    const auto p = make_classical_symbol(LC::Partial, MultiOrder::partial(0.0), geom);
    const auto c = make_classical_symbol(LC::C, MultiOrder::c(-1.0, 0.0), geom);
    const auto b = make_classical_symbol(LC::B, MultiOrder::b(0.0, -1.0), geom);
    const auto psi = make_classical_symbol(LC::Psi, MultiOrder::psi(0.0), geom);
    CHECK_THROWS_AS(twisted_product_leading(p, c, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(twisted_product_leading(b, p, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(twisted_product_leading(psi, b, 1.0), std::invalid_argument);
}

TEST_CASE("twisted product decay exponents track the composed orders", "[symbols]")
{
    const double kappa = 1.0;
    const std::vector<double> radii = {4.0, 5.66, 8.0, 11.31, 16.0};
    const std::vector<Eigen::VectorXd> bases = {Eigen::VectorXd::Constant(1, 0.7)};
    std::vector<Eigen::VectorXd> dirs1 = {Eigen::VectorXd::Constant(1, 1.0),
                                          Eigen::VectorXd::Constant(1, -1.0)};

    // Transversal pair C*B -> G.
    const auto c = make_classical_symbol(LC::C, MultiOrder::c(-1.0, 0.5), geom);
    const auto b = make_classical_symbol(LC::B, MultiOrder::b(0.5, -2.0), geom);
    const auto g = twisted_product_leading(c, b, kappa);
    REQUIRE(g.sym.cls == LC::G);
    const MultiOrder og = g.sym.order;
    CHECK(measure_fiber_decay(g.sym, FiberBlock::Xi2, bases, dirs1, radii) ==
          Catch::Approx(og.m).margin(0.15));
    CHECK(measure_fiber_decay(g.sym, FiberBlock::Eta2, bases, dirs1, radii) ==
          Catch::Approx(og.l).margin(0.15));
    CHECK(measure_fiber_decay(g.sym, FiberBlock::Xi1, bases, dirs1, radii) ==
          Catch::Approx(og.k + og.m + og.l).margin(0.15));

    // Excess pair B*C -> Partial.
    const auto b2 = make_classical_symbol(LC::B, MultiOrder::b(0.0, -2.0), geom);
    const auto c2 = make_classical_symbol(LC::C, MultiOrder::c(-2.0, 0.0), geom);
    const auto pr = twisted_product_leading(b2, c2, kappa);
    REQUIRE(pr.sym.cls == LC::Partial);
    CHECK(measure_fiber_decay(pr.sym, FiberBlock::Xi1, bases, dirs1, radii) ==
          Catch::Approx(pr.sym.order.m).margin(0.15));
}

TEST_CASE("fiber decay measurement recovers canonical exponents", "[symbols]")
{
    const auto b = make_classical_symbol(LC::B, MultiOrder::b(1.0, -2.0), geom);
    const std::vector<double> radii = {4.0, 8.0, 16.0, 32.0};
    const std::vector<Eigen::VectorXd> bases = {Eigen::VectorXd::Zero(1)};
    const std::vector<Eigen::VectorXd> dirs = {Eigen::VectorXd::Constant(1, 1.0)};
    CHECK(measure_fiber_decay(b, FiberBlock::Xi1, bases, dirs, radii) ==
          Catch::Approx(-1.0).margin(0.1)); // k + l
    CHECK(measure_fiber_decay(b, FiberBlock::Eta2, bases, dirs, radii) ==
          Catch::Approx(-2.0).margin(0.1)); // l
}

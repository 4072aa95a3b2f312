#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "relcalc/compactify.hpp"
#include "relcalc/geometry.hpp"
#include "relcalc/symbols.hpp"

using namespace relcalc;

namespace {

Eigen::VectorXd random_vector(std::mt19937_64& rng, int dim, double radius_lo, double radius_hi)
{
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(radius_lo, radius_hi);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
    if (v.norm() < 1e-12) v.setOnes();
    return Eigen::VectorXd(v * (unif(rng) / v.norm()));
}

} // namespace

TEST_CASE("radial compactification charts and round trip", "[compactify]")
{
    SECTION("origin maps to the interior origin with rho bounded below")
    {
        const auto p = radial_compactify(Eigen::VectorXd::Zero(3));
        CHECK_FALSE(p.boundary_chart);
        CHECK(p.eta.norm() == 0.0);
        CHECK(p.rho == 2.0);
        CHECK(radial_decompactify(p).norm() == 0.0);
    }

    SECTION("|xi| = 3 lands in the boundary chart with rho = 1/3")
    {
        Eigen::VectorXd xi(2);
        xi << 3.0, 0.0;
        const auto p = radial_compactify(xi);
        CHECK(p.boundary_chart);
        CHECK(p.rho == 1.0 / 3.0);
        CHECK(p.phi(0) == 1.0);
        CHECK((radial_decompactify(p) - xi).norm() == 0.0);
    }

    SECTION("round trip at 1e4 random points is the identity to 1e-12")
    {
        std::mt19937_64 rng(2024);
        double worst = 0.0;
        for (int trial = 0; trial < 10000; ++trial) {
            const int dim = 1 + trial % 4;
            const auto xi = random_vector(rng, dim, 0.0, 50.0);
            const auto back = radial_decompactify(radial_compactify(xi));
            worst = std::max(worst, (back - xi).norm());
        }
        CHECK(worst < 1e-12);
    }

    SECTION("interior and boundary charts agree where both are valid")
    {
        std::mt19937_64 rng(55);
        double worst = 0.0;
        for (int trial = 0; trial < 2000; ++trial) {
            const auto xi = random_vector(rng, 2 + trial % 2, 1.0, 200.0);
            const auto p = radial_compactify(xi);
            REQUIRE(p.boundary_chart);
            const Eigen::VectorXd from_interior = p.eta / (1.0 - p.eta.norm());
            const Eigen::VectorXd from_boundary = p.phi / p.rho;
            worst = std::max(worst, (from_interior - from_boundary).norm() / xi.norm());
        }
        CHECK(worst < 1e-12);
    }

    SECTION("the splice keeps rho positive and the interior chart in range")
    {
        for (double r : {0.1, 0.45, 0.5, 0.6, 0.75, 0.9, 0.99}) {
            Eigen::VectorXd xi(2);
            xi << r, 0.0;
            const auto p = radial_compactify(xi);
            CHECK(p.rho > 1.0);
            CHECK_FALSE(p.boundary_chart);
            CHECK(p.eta.norm() < 0.5);
            CHECK((radial_decompactify(p) - xi).norm() < 1e-14);
        }
    }

    SECTION("invalid chart data is rejected")
    {
        CompactifiedPoint p;
        p.rho = 0.0;
        CHECK_THROWS_AS(radial_decompactify(p), std::invalid_argument);
    }
}

TEST_CASE("weight equivalence constants for rho^m vs (1+|xi|)^-m", "[compactify]")
{
    std::mt19937_64 rng(99);
    std::vector<Eigen::VectorXd> samples;
    Eigen::VectorXd unit(2);
    unit << 1.0, 0.0;
    samples.push_back(unit); // pins the extreme ratio at |xi| = 1
    for (int i = 0; i < 500; ++i) samples.push_back(random_vector(rng, 2, 1.0, 100.0));

    SECTION("m = 2 brackets inside [1, 4]")
    {
        const auto w = check_weight_equivalence(2.0, samples);
        CHECK(w.c1 >= 1.0);
        CHECK(w.c2 <= 4.0 + 1e-12);
        CHECK(w.c2 == 4.0); // the |xi| = 1 sample attains the bound
        CHECK(w.passed);
    }

    SECTION("m = 0 collapses to c1 = c2 = 1")
    {
        const auto w = check_weight_equivalence(0.0, samples);
        CHECK(w.c1 == 1.0);
        CHECK(w.c2 == 1.0);
        CHECK(w.passed);
    }

    SECTION("m = -1 brackets inside [1/2, 1)")
    {
        const auto w = check_weight_equivalence(-1.0, samples);
        CHECK(w.c1 == 0.5);
        CHECK(w.c2 < 1.0);
        CHECK(w.passed);
    }

    SECTION("m in {-2,...,2} passes the 2^|m| bracket test")
    {
        for (double m : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            const auto w = check_weight_equivalence(m, samples);
            INFO("m = " << m << " c1 = " << w.c1 << " c2 = " << w.c2);
            CHECK(w.passed);
            CHECK(w.c2 / w.c1 <= std::pow(2.0, std::abs(m)) + 1e-9);
        }
    }

    SECTION("constants are invariant under rotation")
    {
        std::vector<Eigen::VectorXd> rotated;
        const Eigen::Matrix2d rot = Eigen::Rotation2Dd(0.7345).toRotationMatrix();
        for (const auto& xi : samples) rotated.push_back(Eigen::VectorXd(rot * xi));
        const auto w = check_weight_equivalence(2.0, samples);
        const auto wr = check_weight_equivalence(2.0, rotated);
        CHECK(w.c1 == Catch::Approx(wr.c1).epsilon(1e-12));
        CHECK(w.c2 == Catch::Approx(wr.c2).epsilon(1e-12));
    }

    SECTION("samples below the chart radius are rejected")
    {
        auto bad = samples;
        bad.push_back(Eigen::VectorXd(0.5 * unit));
        CHECK_THROWS_AS(check_weight_equivalence(1.0, bad), std::invalid_argument);
        CHECK_THROWS_AS(check_weight_equivalence(1.0, std::vector<Eigen::VectorXd>{}),
                        std::invalid_argument);
    }
}

TEST_CASE("scaling and angular derivative bounds in the boundary chart", "[compactify]")
{
    const auto geom = make_geometry(2, 1, 8);

    SECTION("canonical symbols stay bounded by 4 for |m| <= 2")
    {
        for (double m : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            const auto sym = make_classical_symbol(LagrangianClass::Psi, MultiOrder{m, 0, 0}, geom);
            const auto rep = b_derivative_check(sym, m);
            INFO("m = " << m << " overall sup = " << rep.overall_sup);
            CHECK(rep.bounded);
            CHECK(rep.overall_sup <= 4.0);
            for (const auto& e : rep.entries)
                if (e.d_angular > 0) CHECK(e.sup < 1e-8); // radial symbol, fp noise only
        }
    }

    SECTION("constants do not grow from radius 10 to 10^3")
    {
        for (double m : {-2.0, -1.0, 1.0, 2.0}) {
            const auto sym = make_classical_symbol(LagrangianClass::Psi, MultiOrder{m, 0, 0}, geom);
            const double wide = b_derivative_check(sym, m, 4.0, 1e-3).overall_sup;
            const double narrow = b_derivative_check(sym, m, 4.0, 1e-1).overall_sup;
            INFO("m = " << m << " wide = " << wide << " narrow = " << narrow);
            CHECK(wide <= 1.1 * narrow);
        }
    }

    SECTION("an oscillation at unit wavelength declared order 0 is unbounded")
    {
        Symbol osc;
        osc.cls = LagrangianClass::Psi;
        osc.order = MultiOrder{0, 0, 0};
        osc.sig = signature_of(LagrangianClass::Psi, geom);
        osc.classical = false;
        osc.eval = [](const SymbolArgs& a) { return cplx(std::sin(a.xi1.norm()), 0.0); };
        const auto rep = b_derivative_check(osc, 0.0);
        CHECK_FALSE(rep.bounded);
        CHECK(rep.overall_sup > 100.0);
    }

    SECTION("a constant symbol has vanishing derivatives")
    {
        Symbol cst;
        cst.cls = LagrangianClass::Partial;
        cst.order = MultiOrder{0, 0, 0};
        cst.sig = signature_of(LagrangianClass::Partial, geom);
        cst.classical = false;
        cst.eval = [](const SymbolArgs&) { return cplx(1.0, 0.0); };
        const auto rep = b_derivative_check(cst, 0.0);
        CHECK(rep.bounded);
        for (const auto& e : rep.entries) {
            if (e.d_scaling + e.d_angular == 0)
                CHECK(e.sup == 1.0);
            else
                CHECK(e.sup == 0.0);
        }
    }

    SECTION("only single-covector-block classes are accepted")
    {
        const auto sym = make_classical_symbol(LagrangianClass::B, MultiOrder{0, 0, 0}, geom);
        CHECK_THROWS_AS(b_derivative_check(sym, 0.0), std::invalid_argument);
        const auto ok = make_classical_symbol(LagrangianClass::Psi, MultiOrder{0, 0, 0}, geom);
        CHECK_THROWS_AS(b_derivative_check(ok, 0.0, 4.0, 1.5), std::invalid_argument);
    }
}

TEST_CASE("blow-up weight exponent fits", "[compactify]")
{
    const auto mags = make_blowup_samples(600, 42);

    SECTION("(k,l) = (0,0) fits exponents (0,0) with residual 0")
    {
        const auto rep = fit_blowup_weights(0.0, 0.0, mags);
        CHECK(rep.best_residual < 1e-12);
        for (const auto& f : rep.fits) {
            CHECK(std::abs(f.a) < 1e-9);
            CHECK(std::abs(f.b) < 1e-9);
            CHECK(f.residual < 1e-12);
            CHECK(f.pattern_attained);
        }
    }

    SECTION("(k,l) = (1,-2): corrected front face matches the (l-k, -l) pattern")
    {
        const auto rep = fit_blowup_weights(1.0, -2.0, mags);
        REQUIRE(rep.fits.size() == 5);
        const auto& corrected = rep.fits.back();
        CHECK_FALSE(corrected.in_family);
        CHECK(corrected.a == Catch::Approx(-3.0).margin(1e-9)); // l - k
        CHECK(corrected.b == Catch::Approx(2.0).margin(1e-9));  // -l
        CHECK(corrected.residual < 1e-10);
        CHECK(corrected.pattern_residual < 1e-10);
        CHECK(corrected.pattern_attained);
        CHECK(rep.best_residual < 1e-10);
        CHECK(rep.pattern_attained_any);

        // the displayed power misses the pattern by far more than 0.5
        CHECK(rep.literal_pattern_residual > 0.5);
        CHECK(rep.fits.front().candidate == "rho^-1*(|p|^2+|t|^2)^-2");
        CHECK(rep.fits.front().pattern_residual > 0.5);

        // among the displayed-formula variants the sum form fits best, but
        // none of them attains the pattern at l != 0
        CHECK(rep.best_family_candidate == "(|p|+|t|)^-1");
        for (const auto& f : rep.fits)
            if (f.in_family) CHECK_FALSE(f.pattern_attained);
    }

    SECTION("best-candidate residual is <= 0.05 across the order grid")
    {
        for (double k = -2.0; k <= 1.0; k += 1.0)
            for (double l = -2.0; l <= 1.0; l += 1.0) {
                const auto rep = fit_blowup_weights(k, l, mags);
                INFO("k = " << k << " l = " << l << " best = " << rep.best_residual << " via "
                            << rep.best_candidate);
                CHECK(rep.best_residual <= 0.05);
                CHECK(rep.pattern_attained_any);
                // family candidates reproduce the pattern exactly when l = 0
                bool family_attains = false;
                for (const auto& f : rep.fits)
                    if (f.in_family && f.pattern_attained) family_attains = true;
                CHECK(family_attains == (l == 0.0));
                if (l != 0.0) CHECK(rep.literal_pattern_residual > 0.5);
            }
    }

    SECTION("the fitted exponents follow the weight algebra")
    {
        // the corrected candidate solves a = -(rho exponent), b = -l exactly:
        // log W = k log(1+p) + l log(1+p+t), log rho_ff = -log(1+p) - log(1+p+t)
        const auto rep = fit_blowup_weights(-2.0, 1.0, mags);
        const auto& corrected = rep.fits.back();
        CHECK(corrected.a == Catch::Approx(3.0).margin(1e-9));
        CHECK(corrected.b == Catch::Approx(-1.0).margin(1e-9));
    }

    SECTION("class-level wrapper: restriction class gives one fit, corner class two")
    {
        const auto b_reports = blowup_weight_fit(LagrangianClass::B, MultiOrder{0.0, 1.0, -2.0}, 300, 7);
        REQUIRE(b_reports.size() == 1);
        CHECK(b_reports[0].k == 1.0);
        CHECK(b_reports[0].l == -2.0);

        const auto g_reports =
            blowup_weight_fit(LagrangianClass::G, MultiOrder{-1.0, 1.0, -2.0}, 300, 7);
        REQUIRE(g_reports.size() == 2);
        CHECK(g_reports[0].k == 1.0);
        CHECK(g_reports[0].l == -1.0); // joint weight with the first fiber block
        CHECK(g_reports[1].k == 0.0);
        CHECK(g_reports[1].l == -2.0); // joint weight with the second fiber block
        for (const auto& rep : g_reports) {
            CHECK(rep.best_residual <= 0.05);
            CHECK(rep.pattern_attained_any);
        }

        CHECK_THROWS_AS(blowup_weight_fit(LagrangianClass::Psi, MultiOrder{0, 0, 0}, 300, 7),
                        std::invalid_argument);
    }

    SECTION("degenerate sampling is reported as a fit error")
    {
        std::vector<std::pair<double, double>> flat(64, {5.0, 5.0});
        CHECK_THROWS_AS(fit_blowup_weights(1.0, 1.0, flat), std::runtime_error);
        CHECK_THROWS_AS(fit_blowup_weights(1.0, 1.0, {{3.0, 4.0}}), std::invalid_argument);
        std::vector<std::pair<double, double>> tiny(64, {0.1, 0.1});
        CHECK_THROWS_AS(fit_blowup_weights(1.0, 1.0, tiny), std::invalid_argument);
    }

    SECTION("fits are deterministic in the seed")
    {
        const auto r1 = blowup_weight_fit(LagrangianClass::B, MultiOrder{0.0, 1.0, -1.0}, 200, 11);
        const auto r2 = blowup_weight_fit(LagrangianClass::B, MultiOrder{0.0, 1.0, -1.0}, 200, 11);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1[0].fits.size(); ++i) {
            CHECK(r1[0].fits[i].a == r2[0].fits[i].a);
            CHECK(r1[0].fits[i].b == r2[0].fits[i].b);
            CHECK(r1[0].fits[i].residual == r2[0].fits[i].residual);
        }
    }
}

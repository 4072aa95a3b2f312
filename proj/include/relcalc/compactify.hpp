#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "relcalc/geometry.hpp"
#include "relcalc/groupoids.hpp" // detail::arrow_rng / unif
#include "relcalc/symbols.hpp"

namespace relcalc {

/// A point of the radially compactified covector space: interior ball chart
/// eta = xi/(1+|xi|) everywhere, boundary chart (rho, phi) with rho = 1/|xi|
/// exactly once |xi| >= 1 and a smooth positive splice below.
struct CompactifiedPoint {
    Eigen::VectorXd eta; // open-ball coordinates, |eta| < 1
    double rho = 1.0;    // radial boundary function, > 0 at finite points
    Eigen::VectorXd phi; // unit direction
    bool boundary_chart = false; // rho <= 1, i.e. |xi| >= 1
};

namespace detail {

/// Smooth positive splice m(t): equals 1/2 for t <= 1/2, equals t for t >= 1.
inline double radial_splice(double t)
{
    const double w = smooth_step((t - 0.5) / 0.5);
    return (1.0 - w) * 0.5 + w * t;
}

} // namespace detail

inline CompactifiedPoint radial_compactify(const Eigen::VectorXd& xi)
{
    CompactifiedPoint p;
    const double r = xi.norm();
    p.eta = xi / (1.0 + r);
    p.rho = 1.0 / detail::radial_splice(r);
    if (r > 0.0) {
        p.phi = xi / r;
    } else {
        p.phi = Eigen::VectorXd::Zero(xi.size());
        if (xi.size() > 0) p.phi(0) = 1.0;
    }
    p.boundary_chart = p.rho <= 1.0;
    return p;
}

inline Eigen::VectorXd radial_decompactify(const CompactifiedPoint& p)
{
    if (!(p.rho > 0.0)) throw std::invalid_argument("radial_decompactify: rho must be positive");
    if (p.rho <= 1.0) return Eigen::VectorXd(p.phi / p.rho); // chart is exact for |xi| >= 1
    const double e = p.eta.norm();
    if (e >= 1.0) throw std::invalid_argument("radial_decompactify: interior chart out of range");
    return Eigen::VectorXd(p.eta / (1.0 - e));
}

/// Empirical constants for rho^m ~ (1+|xi|)^{-m}: c1 <= rho^m (1+|xi|)^m <= c2.
struct WeightEquivalence {
    double c1 = 0.0;
    double c2 = 0.0;
    double ratio_bound = 0.0; // 2^{|m|} + tolerance
    bool passed = false;
};

inline WeightEquivalence check_weight_equivalence(double m,
                                                  const std::vector<Eigen::VectorXd>& samples,
                                                  double tol = 1e-9)
{
    if (samples.empty()) throw std::invalid_argument("check_weight_equivalence: no samples");
    WeightEquivalence out;
    out.c1 = std::numeric_limits<double>::infinity();
    out.c2 = 0.0;
    for (const auto& xi : samples) {
        const double r = xi.norm();
        if (r < 1.0)
            throw std::invalid_argument("check_weight_equivalence: samples need |xi| >= 1");
        const double ratio = std::pow(radial_compactify(xi).rho * (1.0 + r), m);
        out.c1 = std::min(out.c1, ratio);
        out.c2 = std::max(out.c2, ratio);
    }
    out.ratio_bound = std::pow(2.0, std::abs(m)) + tol;
    out.passed = out.c1 > 0.0 && std::isfinite(out.c2) && out.c2 / out.c1 <= out.ratio_bound;
    return out;
}

/// Supremum of one mixed scaling/angular derivative of rho^m a(xi(rho,phi)).
struct BDerivativeEntry {
    int d_scaling = 0; // power of rho d/d_rho
    int d_angular = 0; // power of the angular derivative
    double sup = 0.0;
};

struct BDerivativeReport {
    std::vector<BDerivativeEntry> entries;
    double overall_sup = 0.0;
    double bound = 0.0;
    bool bounded = false;
};

/// Finite-difference check that scaling and angular vector fields preserve
/// rho^{-m}-weighted smoothness: differences F(u, theta) = rho^m a(phi/rho) in
/// u = log rho and in rotation angle theta, orders a+b <= 2, over radii
/// |xi| in [1, 1/rho_min].
inline BDerivativeReport b_derivative_check(const Symbol& sym, double m, double bound = 4.0,
                                            double rho_min = 1e-3, int radial_samples = 40,
                                            int directions = 8)
{
    if (sym.cls != LagrangianClass::Psi && sym.cls != LagrangianClass::Partial)
        throw std::invalid_argument("b_derivative_check: symbol must act on a single covector block");
    const int dim = sym.sig.xi1_dim;
    if (dim < 1) throw std::invalid_argument("b_derivative_check: empty covector block");
    if (!(rho_min > 0.0 && rho_min < 1.0))
        throw std::invalid_argument("b_derivative_check: rho_min must lie in (0,1)");

    const double h = std::pow(2.0, -6);
    SymbolArgs args;
    args.base = Eigen::VectorXd::Zero(sym.sig.base_dim);
    args.xi2 = Eigen::VectorXd::Zero(0);
    args.eta2 = Eigen::VectorXd::Zero(0);

    // deterministic direction set with per-direction rotation planes
    std::mt19937_64 rng(777);
    std::normal_distribution<double> gauss;
    std::vector<Eigen::VectorXd> dirs, tangents;
    for (int k = 0; k < directions; ++k) {
        Eigen::VectorXd v(dim), w(dim);
        for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
        for (int i = 0; i < dim; ++i) w(i) = gauss(rng);
        if (v.norm() < 1e-8) v = Eigen::VectorXd::Unit(dim, 0);
        v.normalize();
        if (dim >= 2) {
            w -= w.dot(v) * v;
            if (w.norm() < 1e-8) w = Eigen::VectorXd::Unit(dim, 1 % dim);
            w.normalize();
        } else {
            w.setZero();
        }
        dirs.push_back(v);
        tangents.push_back(w);
    }

    // F evaluated at log-radius u and rotation angle theta in the (v,w) plane
    auto F = [&](double u, double theta, int k) {
        const double rho = std::exp(u);
        const Eigen::VectorXd phi = dim >= 2
            ? Eigen::VectorXd(std::cos(theta) * dirs[k] + std::sin(theta) * tangents[k])
            : dirs[k];
        args.xi1 = phi / rho;
        return std::pow(rho, m) * sym.eval(args);
    };

    BDerivativeReport rep;
    rep.bound = bound;
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; a + b <= 2; ++b) rep.entries.push_back({a, b, 0.0});

    const double u_lo = std::log(rho_min), u_hi = 0.0;
    for (int j = 0; j < radial_samples; ++j) {
        const double u = u_lo + (u_hi - u_lo) * (j + 0.5) / radial_samples;
        for (int k = 0; k < static_cast<int>(dirs.size()); ++k) {
            const cplx f00 = F(u, 0.0, k);
            const cplx fu1 = F(u + h, 0.0, k), fu_1 = F(u - h, 0.0, k);
            const bool ang = dim >= 2;
            const cplx ft1 = ang ? F(u, h, k) : f00, ft_1 = ang ? F(u, -h, k) : f00;
            const cplx fpp = ang ? F(u + h, h, k) : fu1, fpm = ang ? F(u + h, -h, k) : fu1;
            const cplx fmp = ang ? F(u - h, h, k) : fu_1, fmm = ang ? F(u - h, -h, k) : fu_1;

            auto put = [&rep](int a, int b, double v) {
                for (auto& e : rep.entries)
                    if (e.d_scaling == a && e.d_angular == b) e.sup = std::max(e.sup, v);
            };
            put(0, 0, std::abs(f00));
            put(1, 0, std::abs((fu1 - fu_1) / (2.0 * h)));
            put(2, 0, std::abs((fu1 - 2.0 * f00 + fu_1) / (h * h)));
            if (ang) {
                put(0, 1, std::abs((ft1 - ft_1) / (2.0 * h)));
                put(0, 2, std::abs((ft1 - 2.0 * f00 + ft_1) / (h * h)));
                put(1, 1, std::abs((fpp - fpm - fmp + fmm) / (4.0 * h * h)));
            }
        }
    }

    for (const auto& e : rep.entries) rep.overall_sup = std::max(rep.overall_sup, e.sup);
    rep.bounded = rep.overall_sup <= bound;
    return rep;
}

/// One candidate front-face weight fitted against a two-factor class weight.
struct BlowupFitEntry {
    std::string candidate;
    bool in_family = true; // false for the diagnostic corrected candidate
    double a = 0.0, b = 0.0, intercept = 0.0;
    double residual = 0.0;         // centered RMS log-misfit, asymptotic subset
    double pattern_residual = 0.0; // same with (a,b) pinned to (l-k, -l)
    bool pattern_attained = false;
};

struct BlowupFitReport {
    double k = 0.0, l = 0.0; // weight exponents (1+|p|)^k (1+|p|+|t|)^l
    std::vector<BlowupFitEntry> fits;
    double best_residual = 0.0; // over every candidate, corrected included
    std::string best_candidate;
    double best_family_residual = 0.0; // over the displayed-formula variants only
    std::string best_family_candidate;
    bool pattern_attained_any = false;     // some candidate matches (l-k, -l)
    double literal_pattern_residual = 0.0; // the displayed power's pattern misfit
};

/// Fiber magnitude pairs (|p|, |t|) with log-uniform radius in [1, 1e3];
/// every third sample pinned near each regime boundary so both |p| >> |t|
/// and |t| >> |p| are covered.
inline std::vector<std::pair<double, double>> make_blowup_samples(int count, std::uint64_t seed)
{
    if (count < 1) throw std::invalid_argument("make_blowup_samples: count must be positive");
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        auto r = detail::arrow_rng(seed, static_cast<std::uint64_t>(i));
        const double rad = std::exp(detail::unif(r, 0.0, std::log(1e3)));
        double theta = 0.0;
        switch (i % 3) {
            case 0: theta = detail::unif(r, 0.0, std::numbers::pi / 12.0); break;
            case 1:
                theta = detail::unif(r, 5.0 * std::numbers::pi / 12.0, std::numbers::pi / 2.0);
                break;
            default: theta = detail::unif(r, 0.0, std::numbers::pi / 2.0); break;
        }
        out[static_cast<std::size_t>(i)] = {rad * std::cos(theta), rad * std::sin(theta)};
    }
    return out;
}

/// Least-squares fit of log W ~ a log rho + b log rho_ff + c over magnitude
/// pairs (|p|, |t|).  The additive constant is principled: the
/// characterization identifies weights only up to bounded smooth factors,
/// and residuals are judged on the asymptotic subset for the same reason.
inline BlowupFitReport fit_blowup_weights(double k, double l,
                                          const std::vector<std::pair<double, double>>& mags,
                                          double pattern_tol = 0.05)
{
    const int samples = static_cast<int>(mags.size());
    if (samples < 16) throw std::invalid_argument("fit_blowup_weights: need at least 16 samples");
    BlowupFitReport rep;
    rep.k = k;
    rep.l = l;

    std::vector<double> P(mags.size()), T(mags.size()), R(mags.size());
    for (std::size_t i = 0; i < mags.size(); ++i) {
        P[i] = mags[i].first;
        T[i] = mags[i].second;
        R[i] = std::hypot(P[i], T[i]);
        if (!(P[i] >= 0.0) || !(T[i] >= 0.0) || R[i] < 1.0)
            throw std::invalid_argument(
                "fit_blowup_weights: magnitudes must be nonnegative with radius >= 1");
    }

    // structural boundary function: 1/|p| in the outer regime, smooth at p = 0
    auto log_rho = [](double p) { return -std::log1p(p); };
    // canonical two-factor class weight (1+|p|)^k (1+|p|+|t|)^l
    auto log_w = [k, l](double p, double t) { return k * std::log1p(p) + l * std::log1p(p + t); };

    struct Candidate {
        std::string name;
        double (*log_ff)(double lr, double p, double t);
        bool in_family;
        bool literal; // the displayed front-face power
    };
    // the family spans the displayed front-face formula and its exponent
    // variants; the final entry corrects the rho power from -1 to +1, which
    // is the unique choice making the (l-k, -l) pattern exact for every (k,l)
    const std::vector<Candidate> candidates = {
        {"rho^-1*(|p|^2+|t|^2)^-2",
         [](double lr, double p, double t) { return -lr - 2.0 * std::log(p * p + t * t); }, true,
         true},
        {"rho^-1*(|p|^2+|t|^2)^-1",
         [](double lr, double p, double t) { return -lr - std::log(p * p + t * t); }, true, false},
        {"rho^-1*(|p|^2+|t|^2)^-1/2",
         [](double lr, double p, double t) { return -lr - 0.5 * std::log(p * p + t * t); }, true,
         false},
        {"(|p|+|t|)^-1", [](double, double p, double t) { return -std::log(p + t); }, true, false},
        {"rho*(1+|p|+|t|)^-1 [corrected]",
         [](double lr, double p, double t) { return lr - std::log1p(p + t); }, false, false},
    };

    rep.best_residual = std::numeric_limits<double>::infinity();
    rep.best_family_residual = std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
        Eigen::MatrixXd A(samples, 3);
        Eigen::VectorXd y(samples);
        for (int i = 0; i < samples; ++i) {
            const double lr = log_rho(P[i]);
            A(i, 0) = lr;
            A(i, 1) = cand.log_ff(lr, P[i], T[i]);
            A(i, 2) = 1.0;
            y(i) = log_w(P[i], T[i]);
        }

        // degenerate sampling (single regime) makes the regressors collinear
        const Eigen::MatrixXd gram = A.transpose() * A;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        if (eig.eigenvalues().minCoeff() <= 1e-9 * eig.eigenvalues().maxCoeff())
            throw std::runtime_error("fit_blowup_weights: degenerate fit (collinear log-weights)");

        const Eigen::VectorXd coef = gram.ldlt().solve(A.transpose() * y);

        // the characterization identifies weights up to bounded smooth
        // factors, so misfits are centered and judged on the asymptotic
        // subset of samples
        auto asymptotic_rms = [&](double a, double b) {
            constexpr double r_min = 30.0;
            double mean = 0.0;
            int count = 0;
            for (int i = 0; i < samples; ++i)
                if (R[i] >= r_min) {
                    mean += y(i) - a * A(i, 0) - b * A(i, 1);
                    ++count;
                }
            mean /= std::max(count, 1);
            double ss = 0.0;
            for (int i = 0; i < samples; ++i)
                if (R[i] >= r_min) {
                    const double d = y(i) - a * A(i, 0) - b * A(i, 1) - mean;
                    ss += d * d;
                }
            return std::sqrt(ss / std::max(count, 1));
        };

        BlowupFitEntry entry;
        entry.candidate = cand.name;
        entry.in_family = cand.in_family;
        entry.a = coef(0);
        entry.b = coef(1);
        entry.intercept = coef(2);
        entry.residual = asymptotic_rms(coef(0), coef(1));
        entry.pattern_residual = asymptotic_rms(l - k, -l);
        entry.pattern_attained = entry.pattern_residual <= pattern_tol;
        rep.fits.push_back(entry);

        rep.pattern_attained_any = rep.pattern_attained_any || entry.pattern_attained;
        if (entry.residual < rep.best_residual) {
            rep.best_residual = entry.residual;
            rep.best_candidate = cand.name;
        }
        if (cand.in_family && entry.residual < rep.best_family_residual) {
            rep.best_family_residual = entry.residual;
            rep.best_family_candidate = cand.name;
        }
        if (cand.literal) rep.literal_pattern_residual = entry.pattern_residual;
    }
    return rep;
}

/// Fits boundary/front-face exponents against the canonical two-factor class
/// weights.  One report for the restriction-type class; the full-corner class
/// factors as two independent fits, one per compactified fiber block.
inline std::vector<BlowupFitReport> blowup_weight_fit(LagrangianClass cls, const MultiOrder& o,
                                                      int samples, std::uint64_t seed,
                                                      double pattern_tol = 0.05)
{
    switch (cls) {
        case LagrangianClass::B:
            return {fit_blowup_weights(o.k, o.l, make_blowup_samples(samples, seed), pattern_tol)};
        case LagrangianClass::G:
            return {fit_blowup_weights(o.k, o.m, make_blowup_samples(samples, seed), pattern_tol),
                    fit_blowup_weights(0.0, o.l, make_blowup_samples(samples, seed ^ 0x5151u),
                                       pattern_tol)};
        default:
            throw std::invalid_argument(
                "blowup_weight_fit: only the two-factor fiber classes have blow-up weights");
    }
}

} // namespace relcalc

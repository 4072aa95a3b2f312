#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relcalc/geometry.hpp"

namespace relcalc {

/// The five adapted classes, one per Lagrangian: interior (Psi), boundary (Partial),
/// restriction-type (B), coboundary-type (C), and residual interior-to-interior (G).
enum class LagrangianClass { Psi, Partial, B, C, G };

inline const char* class_name(LagrangianClass c)
{
    switch (c) {
        case LagrangianClass::Psi: return "Psi";
        case LagrangianClass::Partial: return "Partial";
        case LagrangianClass::B: return "B";
        case LagrangianClass::C: return "C";
        case LagrangianClass::G: return "G";
    }
    return "?";
}

/// Componentwise multi-order; arity depends on the class:
/// Psi(m), Partial(m), B(k,l), C(m,k), G(m,k,l). Inactive slots are zero.
struct MultiOrder {
    double m = 0.0;
    double k = 0.0;
    double l = 0.0;

    static MultiOrder psi(double m) { return {m, 0.0, 0.0}; }
    static MultiOrder partial(double m) { return {m, 0.0, 0.0}; }
    static MultiOrder b(double k, double l) { return {0.0, k, l}; }
    static MultiOrder c(double m, double k) { return {m, k, 0.0}; }
    static MultiOrder g(double m, double k, double l) { return {m, k, l}; }
};

/// Phase-variable signature of a class instance over a fixed geometry.
struct FiberSignature {
    int base_dim = 0; // x (Psi) or x' (all others)
    int xi1_dim = 0;  // xi (Psi) or xi'
    int xi2_dim = 0;  // xi'' (C, G)
    int eta2_dim = 0; // eta'' (B, G)
};

inline FiberSignature signature_of(LagrangianClass cls, const TorusEmbedding& g)
{
    switch (cls) {
        case LagrangianClass::Psi: return {g.n, g.n, 0, 0};
        case LagrangianClass::Partial: return {g.d, g.d, 0, 0};
        case LagrangianClass::B: return {g.d, g.d, 0, g.nu()};
        case LagrangianClass::C: return {g.d, g.d, g.nu(), 0};
        case LagrangianClass::G: return {g.d, g.d, g.nu(), g.nu()};
    }
    return {};
}

/// Evaluation point; only the blocks named by the signature are read.
struct SymbolArgs {
    Eigen::VectorXd base; // x or x'
    Eigen::VectorXd xi1;  // xi or xi'
    Eigen::VectorXd xi2;  // xi''
    Eigen::VectorXd eta2; // eta''
};

/// An adapted symbol: immutable after construction; the evaluator must be pure.
struct Symbol {
    LagrangianClass cls = LagrangianClass::Psi;
    MultiOrder order{};
    FiberSignature sig{};
    bool classical = true;
    std::function<cplx(const SymbolArgs&)> eval;

    cplx operator()(const SymbolArgs& a) const { return eval(a); }
};

namespace detail {

inline double bracket(double sq_norm) { return std::sqrt(1.0 + sq_norm); }

/// <xi'> = (1 + |xi'|^2)^{1/2} and joint brackets used by the canonical weights.
inline double w1(const SymbolArgs& a) { return bracket(a.xi1.squaredNorm()); }
inline double w12(const SymbolArgs& a) { return bracket(a.xi1.squaredNorm() + a.xi2.squaredNorm()); }
inline double w1e(const SymbolArgs& a) { return bracket(a.xi1.squaredNorm() + a.eta2.squaredNorm()); }

} // namespace detail

/// Canonical weight of a class/order at a phase point:
/// Psi: <xi>^m; Partial: <xi'>^m; B: <xi'>^k <(xi',eta'')>^l;
/// C: <(xi',xi'')>^m <xi'>^k; G: <xi'>^k <(xi',xi'')>^m <(xi',eta'')>^l.
inline double canonical_weight(LagrangianClass cls, const MultiOrder& o, const SymbolArgs& a)
{
    using namespace detail;
    switch (cls) {
        case LagrangianClass::Psi:
        case LagrangianClass::Partial: return std::pow(w1(a), o.m);
        case LagrangianClass::B: return std::pow(w1(a), o.k) * std::pow(w1e(a), o.l);
        case LagrangianClass::C: return std::pow(w12(a), o.m) * std::pow(w1(a), o.k);
        case LagrangianClass::G:
            return std::pow(w1(a), o.k) * std::pow(w12(a), o.m) * std::pow(w1e(a), o.l);
    }
    return 1.0;
}

/// Weight with derivative shifts: each fiber block's derivative count lowers the
/// exponent of its own factor (xi' lowers k; xi'' lowers m; eta'' lowers l; for
/// Psi/Partial the single factor carries m).
inline double shifted_weight(LagrangianClass cls, const MultiOrder& o, const SymbolArgs& a,
                             int xi1_count, int xi2_count, int eta2_count)
{
    MultiOrder s = o;
    switch (cls) {
        case LagrangianClass::Psi:
        case LagrangianClass::Partial: s.m -= xi1_count; break;
        case LagrangianClass::B:
            s.k -= xi1_count;
            s.l -= eta2_count;
            break;
        case LagrangianClass::C:
            s.k -= xi1_count;
            s.m -= xi2_count;
            break;
        case LagrangianClass::G:
            s.k -= xi1_count;
            s.m -= xi2_count;
            s.l -= eta2_count;
            break;
    }
    return canonical_weight(cls, s, a);
}

using BaseProfile = std::function<cplx(const Eigen::VectorXd&)>;
using PhaseProfile = std::function<cplx(const Eigen::VectorXd&)>;

/// Canonical classical representative: base_profile(x) times the canonical weight,
/// optionally modulated by phase_profile evaluated at the bounded fiber coordinate
/// v / sqrt(1+|v|^2) (smooth at v = 0, asymptotically the fiber direction).
inline Symbol make_classical_symbol(LagrangianClass cls, const MultiOrder& order,
                                    const TorusEmbedding& geom, BaseProfile base_profile = nullptr,
                                    PhaseProfile phase_profile = nullptr)
{
    Symbol s;
    s.cls = cls;
    s.order = order;
    s.sig = signature_of(cls, geom);
    s.classical = true;
    s.eval = [cls, order, base_profile, phase_profile](const SymbolArgs& a) -> cplx {
        cplx v(canonical_weight(cls, order, a), 0.0);
        if (base_profile) v *= base_profile(a.base);
        if (phase_profile) {
            Eigen::VectorXd fiber(a.xi1.size() + a.xi2.size() + a.eta2.size());
            fiber << a.xi1, a.xi2, a.eta2;
            const double b = detail::bracket(fiber.squaredNorm());
            v *= phase_profile(fiber / b);
        }
        return v;
    };
    return s;
}

/// A single weighted-derivative bound measurement.
struct EstimateEntry {
    std::string multi_index; // e.g. "base:(1,0) xi1:(0,1)"
    double sup_ratio = 0.0;  // sup over samples of |difference-quotient| / shifted weight
};

struct EstimateReport {
    bool pass = false;
    double worst_ratio = 0.0;
    std::vector<EstimateEntry> entries;
};

namespace detail {

/// Central difference quotient for the multi-index `counts` over the stacked
/// coordinate list; steps are 2^{-6} relative to the owning block's magnitude.
struct CoordRef {
    int block = 0; // 0=base, 1=xi1, 2=xi2, 3=eta2
    int index = 0;
};

inline Eigen::VectorXd& block_of(SymbolArgs& a, int block)
{
    switch (block) {
        case 0: return a.base;
        case 1: return a.xi1;
        case 2: return a.xi2;
        default: return a.eta2;
    }
}

inline cplx difference_quotient(const Symbol& sym, const SymbolArgs& at,
                                const std::vector<CoordRef>& coords, std::size_t pos)
{
    if (pos == coords.size()) {
        const cplx v = sym(at);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::runtime_error("check_symbol_estimates: evaluator returned non-finite value");
        return v;
    }
    SymbolArgs plus = at;
    SymbolArgs minus = at;
    const CoordRef c = coords[pos];
    SymbolArgs probe = at;
    const double scale = c.block == 0 ? 1.0 : bracket(block_of(probe, c.block).squaredNorm());
    const double h = std::ldexp(scale, -6);
    block_of(plus, c.block)[c.index] += h;
    block_of(minus, c.block)[c.index] -= h;
    return (difference_quotient(sym, plus, coords, pos + 1) -
            difference_quotient(sym, minus, coords, pos + 1)) /
           (2.0 * h);
}

inline void enumerate_multi_indices(int total_coords, std::vector<int>& current, int start,
                                    int remaining,
                                    const std::function<void(const std::vector<int>&)>& emit)
{
    emit(current);
    if (remaining == 0) return;
    for (int i = start; i < total_coords; ++i) {
        current.push_back(i);
        enumerate_multi_indices(total_coords, current, i, remaining - 1, emit);
        current.pop_back();
    }
}

} // namespace detail

/// Verifies the defining weighted-derivative estimates by central finite differences
/// up to total order J over the supplied phase samples.
inline EstimateReport check_symbol_estimates(const Symbol& sym, int J,
                                             const std::vector<SymbolArgs>& samples,
                                             double constant = 10.0)
{
    if (J < 0 || J > 3) throw std::invalid_argument("check_symbol_estimates: need 0 <= J <= 3");
    const FiberSignature& sig = sym.sig;

    std::vector<detail::CoordRef> coords;
    for (int i = 0; i < sig.base_dim; ++i) coords.push_back({0, i});
    for (int i = 0; i < sig.xi1_dim; ++i) coords.push_back({1, i});
    for (int i = 0; i < sig.xi2_dim; ++i) coords.push_back({2, i});
    for (int i = 0; i < sig.eta2_dim; ++i) coords.push_back({3, i});

    EstimateReport report;
    std::vector<int> current;
    detail::enumerate_multi_indices(static_cast<int>(coords.size()), current, 0, J,
        [&](const std::vector<int>& mi) {
            std::vector<detail::CoordRef> dcoords;
            int cnt[4] = {0, 0, 0, 0};
            for (int ci : mi) {
                dcoords.push_back(coords[ci]);
                ++cnt[coords[ci].block];
            }
            double sup = 0.0;
            for (const auto& s : samples) {
                const cplx q = detail::difference_quotient(sym, s, dcoords, 0);
                const double w = shifted_weight(sym.cls, sym.order, s, cnt[1], cnt[2], cnt[3]);
                sup = std::max(sup, std::abs(q) / w);
            }
            std::string label = "d^" + std::to_string(mi.size()) +
                                " [base:" + std::to_string(cnt[0]) + " xi1:" + std::to_string(cnt[1]) +
                                " xi2:" + std::to_string(cnt[2]) + " eta2:" + std::to_string(cnt[3]) + "]";
            report.entries.push_back({label, sup});
            report.worst_ratio = std::max(report.worst_ratio, sup);
        });
    report.pass = std::isfinite(report.worst_ratio) && report.worst_ratio <= constant;
    return report;
}

/// Result of multi-order composition arithmetic.
struct OrderComposeResult {
    bool compatible = false;
    LagrangianClass cls = LagrangianClass::Psi;
    MultiOrder order{};
};

/// Order arithmetic of the displayed composition table. The unidentified additive
/// constant is `kappa` (default: the codimension nu, fixed by the excess-integration
/// count). The G*G first component uses the associative value m1; the displayed m2
/// breaks associativity and is recorded separately by the reporting layer.
inline OrderComposeResult order_compose(LagrangianClass c1, const MultiOrder& o1,
                                        LagrangianClass c2, const MultiOrder& o2, double kappa)
{
    using LC = LagrangianClass;
    auto ok = [](LC c, MultiOrder o) { return OrderComposeResult{true, c, o}; };
    const OrderComposeResult incompatible{};

    switch (c1) {
        case LC::Partial:
            switch (c2) {
                case LC::Partial: return ok(LC::Partial, MultiOrder::partial(o1.m + o2.m));
                case LC::B: return ok(LC::B, MultiOrder::b(o1.m + o2.k, o2.l));
                case LC::C: return ok(LC::C, MultiOrder::c(o1.m + o2.m, o2.k)); // displayed entry; does not chain as operators
                default: return incompatible;
            }
        case LC::Psi:
            switch (c2) {
                case LC::Psi: return ok(LC::Psi, MultiOrder::psi(o1.m + o2.m));
                case LC::C: return ok(LC::C, MultiOrder::c(o1.m + o2.m, o2.k));
                case LC::G: return ok(LC::G, MultiOrder::g(o1.m + o2.m, o2.k, o2.l));
                default: return incompatible;
            }
        case LC::B:
            switch (c2) {
                case LC::Partial: return ok(LC::B, MultiOrder::b(o1.k + o2.m, o1.l)); // displayed entry; does not chain as operators
                case LC::Psi: return ok(LC::B, MultiOrder::b(o1.k, o1.l + o2.m));
                case LC::C: return ok(LC::Partial, MultiOrder::partial(o1.k + o1.l + o2.k + o2.m + kappa));
                case LC::G: return ok(LC::B, MultiOrder::b(o1.k + o1.l + o2.k + o2.m + kappa, o2.l));
                default: return incompatible;
            }
        case LC::C:
            switch (c2) {
                case LC::Partial: return ok(LC::C, MultiOrder::c(o1.m, o1.k + o2.m));
                case LC::B: return ok(LC::G, MultiOrder::g(o1.m, o1.k + o2.k, o2.l));
                default: return incompatible;
            }
        case LC::G:
            switch (c2) {
                case LC::Psi: return ok(LC::G, MultiOrder::g(o1.m, o1.k, o1.l + o2.m));
                case LC::C: return ok(LC::C, MultiOrder::c(o1.m, o1.k + o1.l + o2.k + o2.m + kappa));
                case LC::G: return ok(LC::G, MultiOrder::g(o1.m, o1.k + o1.l + o2.k + o2.m + kappa, o2.l));
                default: return incompatible;
            }
    }
    return incompatible;
}

/// First component of the displayed G*G table entry (m2); kept for report comparisons.
inline double displayed_gg_first_component(const MultiOrder& /*o1*/, const MultiOrder& o2)
{
    return o2.m;
}

/// True iff the pair chains as operators (output space of the right factor equals
/// the input space of the left factor); exactly the 13 pairs with twisted products.
inline bool classes_chain(LagrangianClass c1, LagrangianClass c2)
{
    using LC = LagrangianClass;
    auto in_space_is_M = [](LC c) { return c == LC::Psi || c == LC::G || c == LC::B; };
    auto out_space_is_M = [](LC c) { return c == LC::Psi || c == LC::G || c == LC::C; };
    const bool chains = in_space_is_M(c1) == out_space_is_M(c2);
    return chains && order_compose(c1, MultiOrder{}, c2, MultiOrder{}, 0.0).compatible;
}

/// Options for the excess-fiber integration in twisted products.
struct TwistedOptions {
    double truncation_radius = 32.0; // integrate / sum over |eta''| <= R
    bool lattice_mode = false;       // false: continuum quadrature; true: unit dual lattice sum
    int panels_per_axis = 256;       // composite-Simpson panels per axis in quadrature mode
};

struct TwistedResult {
    Symbol sym;
    bool divergence_warning = false; // order sum >= -nu: excess integral not absolutely convergent
};

namespace detail {

/// Composite Simpson over [-R, R]^dim of a complex integrand (dim <= 2 in practice).
inline cplx simpson_box(const std::function<cplx(const Eigen::VectorXd&)>& f, int dim, double R,
                        int panels)
{
    const int n = 2 * panels; // even subdivision count per axis
    const double h = 2.0 * R / n;
    auto weight1 = [&](int i) -> double {
        if (i == 0 || i == n) return 1.0;
        return (i % 2 == 1) ? 4.0 : 2.0;
    };
    if (dim == 0) return f(Eigen::VectorXd());
    if (dim == 1) {
        cplx acc(0.0, 0.0);
        Eigen::VectorXd t(1);
        for (int i = 0; i <= n; ++i) {
            t[0] = -R + i * h;
            acc += weight1(i) * f(t);
        }
        return acc * (h / 3.0);
    }
    cplx acc(0.0, 0.0);
    Eigen::VectorXd t(dim);
    std::vector<int> idx(dim, 0);
    bool done = false;
    while (!done) {
        double w = 1.0;
        for (int a = 0; a < dim; ++a) {
            t[a] = -R + idx[a] * h;
            w *= weight1(idx[a]);
        }
        acc += w * f(t);
        int a = dim - 1;
        while (a >= 0 && ++idx[a] > n) {
            idx[a] = 0;
            --a;
        }
        done = a < 0;
    }
    return acc * std::pow(h / 3.0, dim);
}

/// Sum of f over integer lattice points t in Z^dim with |t_i| <= R.
inline cplx lattice_sum_box(const std::function<cplx(const Eigen::VectorXd&)>& f, int dim, double R)
{
    const int B = static_cast<int>(std::floor(R));
    Eigen::VectorXd t(dim);
    std::vector<int> idx(dim, -B);
    cplx acc(0.0, 0.0);
    bool done = false;
    while (!done) {
        for (int a = 0; a < dim; ++a) t[a] = idx[a];
        acc += f(t);
        int a = dim - 1;
        while (a >= 0 && ++idx[a] > B) {
            idx[a] = -B;
            --a;
        }
        done = a < 0;
    }
    return acc;
}

} // namespace detail

/// Leading-order twisted product of two adapted symbols. Transversal pairs multiply
/// pointwise on matched variables; clean pairs integrate the excess fiber:
///   B*C -> Partial:  (2pi)^{-nu} int a_b(x',xi',t) a_c(x',xi',t) dt
///   B*G -> B:        (2pi)^{-nu} int a_b(x',xi',t) a_g(x',xi',t,eta'') dt
///   G*C -> C:        (2pi)^{-nu} int a_g(x',xi',xi'',t) a_c(x',xi',t) dt
///   G*G -> G:        (2pi)^{-nu} int a_g1(x',xi',xi'',t) a_g2(x',xi',t,eta'') dt
/// The result order follows order_compose.
inline TwistedResult twisted_product_leading(const Symbol& a, const Symbol& b, double kappa,
                                             const TwistedOptions& opt = {})
{
    using LC = LagrangianClass;
    const OrderComposeResult oc = order_compose(a.cls, a.order, b.cls, b.order, kappa);
    if (!oc.compatible)
        throw std::invalid_argument("twisted_product_leading: incompatible classes");
    if (!classes_chain(a.cls, b.cls))
        throw std::invalid_argument(
            "twisted_product_leading: classes have an order-table entry but do not chain as "
            "operators (input/output space mismatch)");

    // Common dimensions: all five signatures agree on d; the conormal dimension nu
    // comes from whichever factor carries a second fiber block.
    const int nu = std::max(std::max(a.sig.xi2_dim, a.sig.eta2_dim),
                            std::max(b.sig.xi2_dim, b.sig.eta2_dim));

    TwistedResult result;
    result.sym.cls = oc.cls;
    result.sym.order = oc.order;
    result.sym.classical = a.classical && b.classical;

    // Signature of the output over the shared geometry.
    FiberSignature osig;
    const int d = (a.cls == LC::Psi) ? b.sig.base_dim : a.sig.base_dim;
    switch (oc.cls) {
        case LC::Psi: osig = {d + nu, d + nu, 0, 0}; break;
        case LC::Partial: osig = {d, d, 0, 0}; break;
        case LC::B: osig = {d, d, 0, nu}; break;
        case LC::C: osig = {d, d, nu, 0}; break;
        case LC::G: osig = {d, d, nu, nu}; break;
    }
    result.sym.sig = osig;

    // Helper: evaluate a Psi factor on the interior leg ((x',0),(xi',zeta'')).
    auto eval_psi_on_leg = [](const Symbol& psi, const Eigen::VectorXd& xp,
                              const Eigen::VectorXd& xi1, const Eigen::VectorXd& zeta) -> cplx {
        SymbolArgs pa;
        pa.base = Eigen::VectorXd::Zero(psi.sig.base_dim);
        pa.base.head(xp.size()) = xp;
        pa.xi1.resize(psi.sig.xi1_dim);
        pa.xi1 << xi1, zeta;
        return psi(pa);
    };

    const auto ae = a; // captured copies; Symbol is immutable
    const auto be = b;

    auto make_excess = [&](std::function<cplx(const SymbolArgs&, const Eigen::VectorXd&)> integrand) {
        const double prefactor = std::pow(two_pi, -nu);
        const TwistedOptions o = opt;
        return [integrand, prefactor, nu, o](const SymbolArgs& out) -> cplx {
            auto f = [&](const Eigen::VectorXd& t) { return integrand(out, t); };
            const cplx val = o.lattice_mode
                                 ? detail::lattice_sum_box(f, nu, o.truncation_radius)
                                 : detail::simpson_box(f, nu, o.truncation_radius, o.panels_per_axis);
            return prefactor * val;
        };
    };

    auto args_b = [](const Eigen::VectorXd& base, const Eigen::VectorXd& xi1,
                     const Eigen::VectorXd& eta2) {
        SymbolArgs s;
        s.base = base;
        s.xi1 = xi1;
        s.eta2 = eta2;
        return s;
    };
    auto args_c = [](const Eigen::VectorXd& base, const Eigen::VectorXd& xi1,
                     const Eigen::VectorXd& xi2) {
        SymbolArgs s;
        s.base = base;
        s.xi1 = xi1;
        s.xi2 = xi2;
        return s;
    };
    auto args_g = [](const Eigen::VectorXd& base, const Eigen::VectorXd& xi1,
                     const Eigen::VectorXd& xi2, const Eigen::VectorXd& eta2) {
        SymbolArgs s;
        s.base = base;
        s.xi1 = xi1;
        s.xi2 = xi2;
        s.eta2 = eta2;
        return s;
    };

    const LC p = a.cls, q = b.cls;
    double excess_order_sum = 0.0;
    bool has_excess = false;

    if (p == LC::Partial && q == LC::Partial) {
        result.sym.eval = [ae, be](const SymbolArgs& s) { return ae(s) * be(s); };
    } else if (p == LC::Partial && q == LC::B) {
        result.sym.eval = [ae, be, args_b](const SymbolArgs& s) {
            SymbolArgs pa;
            pa.base = s.base;
            pa.xi1 = s.xi1;
            return ae(pa) * be(args_b(s.base, s.xi1, s.eta2));
        };
    } else if (p == LC::Psi && q == LC::Psi) {
        result.sym.eval = [ae, be](const SymbolArgs& s) { return ae(s) * be(s); };
    } else if (p == LC::Psi && q == LC::C) {
        result.sym.eval = [ae, be, eval_psi_on_leg, args_c](const SymbolArgs& s) {
            return eval_psi_on_leg(ae, s.base, s.xi1, s.xi2) * be(args_c(s.base, s.xi1, s.xi2));
        };
    } else if (p == LC::Psi && q == LC::G) {
        result.sym.eval = [ae, be, eval_psi_on_leg, args_g](const SymbolArgs& s) {
            return eval_psi_on_leg(ae, s.base, s.xi1, s.xi2) *
                   be(args_g(s.base, s.xi1, s.xi2, s.eta2));
        };
    } else if (p == LC::B && q == LC::Psi) {
        result.sym.eval = [ae, be, eval_psi_on_leg, args_b](const SymbolArgs& s) {
            return ae(args_b(s.base, s.xi1, s.eta2)) * eval_psi_on_leg(be, s.base, s.xi1, s.eta2);
        };
    } else if (p == LC::B && q == LC::C) {
        has_excess = true;
        excess_order_sum = a.order.l + b.order.m;
        result.sym.eval = make_excess([ae, be, args_b, args_c](const SymbolArgs& s,
                                                               const Eigen::VectorXd& t) {
            return ae(args_b(s.base, s.xi1, t)) * be(args_c(s.base, s.xi1, t));
        });
    } else if (p == LC::B && q == LC::G) {
        has_excess = true;
        excess_order_sum = a.order.l + b.order.m;
        result.sym.eval = make_excess([ae, be, args_b, args_g](const SymbolArgs& s,
                                                               const Eigen::VectorXd& t) {
            return ae(args_b(s.base, s.xi1, t)) * be(args_g(s.base, s.xi1, t, s.eta2));
        });
    } else if (p == LC::C && q == LC::Partial) {
        result.sym.eval = [ae, be, args_c](const SymbolArgs& s) {
            SymbolArgs pb;
            pb.base = s.base;
            pb.xi1 = s.xi1;
            return ae(args_c(s.base, s.xi1, s.xi2)) * be(pb);
        };
    } else if (p == LC::C && q == LC::B) {
        result.sym.eval = [ae, be, args_c, args_b](const SymbolArgs& s) {
            return ae(args_c(s.base, s.xi1, s.xi2)) * be(args_b(s.base, s.xi1, s.eta2));
        };
    } else if (p == LC::G && q == LC::Psi) {
        result.sym.eval = [ae, be, eval_psi_on_leg, args_g](const SymbolArgs& s) {
            return ae(args_g(s.base, s.xi1, s.xi2, s.eta2)) *
                   eval_psi_on_leg(be, s.base, s.xi1, s.eta2);
        };
    } else if (p == LC::G && q == LC::C) {
        has_excess = true;
        excess_order_sum = a.order.l + b.order.m;
        result.sym.eval = make_excess([ae, be, args_g, args_c](const SymbolArgs& s,
                                                               const Eigen::VectorXd& t) {
            return ae(args_g(s.base, s.xi1, s.xi2, t)) * be(args_c(s.base, s.xi1, t));
        });
    } else if (p == LC::G && q == LC::G) {
        has_excess = true;
        excess_order_sum = a.order.l + b.order.m;
        result.sym.eval = make_excess([ae, be, args_g](const SymbolArgs& s,
                                                       const Eigen::VectorXd& t) {
            return ae(args_g(s.base, s.xi1, s.xi2, t)) * be(args_g(s.base, s.xi1, t, s.eta2));
        });
    } else {
        throw std::logic_error("twisted_product_leading: unhandled chaining pair");
    }

    result.divergence_warning = has_excess && excess_order_sum >= -static_cast<double>(nu);
    return result;
}

/// Which fiber block to scan when measuring a decay exponent.
enum class FiberBlock { Xi1, Xi2, Eta2 };

/// Fits the log-log slope of mean |a| against radius over the given radii, scanning
/// one fiber block along fixed unit directions with the other fiber blocks zero.
inline double measure_fiber_decay(const Symbol& sym, FiberBlock block,
                                  const std::vector<Eigen::VectorXd>& base_points,
                                  const std::vector<Eigen::VectorXd>& directions,
                                  const std::vector<double>& radii)
{
    const FiberSignature& sig = sym.sig;
    std::vector<double> logr, logv;
    for (double r : radii) {
        double mean = 0.0;
        int cnt = 0;
        for (const auto& bp : base_points) {
            for (const auto& dir : directions) {
                SymbolArgs s;
                s.base = bp;
                s.xi1 = Eigen::VectorXd::Zero(sig.xi1_dim);
                s.xi2 = Eigen::VectorXd::Zero(sig.xi2_dim);
                s.eta2 = Eigen::VectorXd::Zero(sig.eta2_dim);
                switch (block) {
                    case FiberBlock::Xi1: s.xi1 = r * dir; break;
                    case FiberBlock::Xi2: s.xi2 = r * dir; break;
                    case FiberBlock::Eta2: s.eta2 = r * dir; break;
                }
                mean += std::abs(sym(s));
                ++cnt;
            }
        }
        mean /= cnt;
        if (mean <= 0.0) throw std::runtime_error("measure_fiber_decay: vanishing symbol");
        logr.push_back(std::log(r));
        logv.push_back(std::log(mean));
    }
    // Least-squares slope.
    const std::size_t n = logr.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += logr[i];
        sy += logv[i];
        sxx += logr[i] * logr[i];
        sxy += logr[i] * logv[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-14) throw std::runtime_error("measure_fiber_decay: degenerate radii");
    return (n * sxy - sx * sy) / denom;
}

} // namespace relcalc

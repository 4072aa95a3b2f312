#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "relcalc/geometry.hpp"
#include "relcalc/quantizer.hpp"
#include "relcalc/symbols.hpp"

namespace relcalc {

namespace detail {

inline bool same_grid(const TorusEmbedding& a, const TorusEmbedding& b)
{
    return a.n == b.n && a.d == b.d && a.N == b.N;
}

/// Order of a sum of two graded parts: componentwise maximum.
inline void join_order(std::optional<MultiOrder>& dst, const MultiOrder& o)
{
    if (!dst) {
        dst = o;
        return;
    }
    dst->m = std::max(dst->m, o.m);
    dst->k = std::max(dst->k, o.k);
    dst->l = std::max(dst->l, o.l);
}

inline void combine_meta(std::optional<MultiOrder>& dst, LagrangianClass c1,
                         const std::optional<MultiOrder>& o1, LagrangianClass c2,
                         const std::optional<MultiOrder>& o2, double kappa,
                         std::vector<std::string>* warnings, double a_norm, double b_norm,
                         double product_norm)
{
    if (!o1 || !o2) return;
    const auto r = order_compose(c1, *o1, c2, *o2, kappa);
    if (!r.compatible) {
        // unreachable for well-formed block positions; kept as the declared guard
        if (warnings && product_norm > 1e-8 * a_norm * b_norm)
            warnings->push_back(std::string("non-negligible incompatible product ") +
                                class_name(c1) + "*" + class_name(c2));
        return;
    }
    join_order(dst, r.order);
}

inline Eigen::MatrixXcd times(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B)
{
    if (A.size() == 0 || B.size() == 0) return {};
    return A * B;
}

inline void accumulate(Eigen::MatrixXcd& dst, Eigen::MatrixXcd part)
{
    if (part.size() == 0) return;
    if (dst.size() == 0) dst = std::move(part);
    else dst += part;
}

} // namespace detail

/// Standard 2x2 block product; declared orders combine per the composition table
/// (sums of graded parts carry the componentwise maximum order).
inline BlockOperator compose_blocks(const BlockOperator& A, const BlockOperator& B,
                                    std::vector<std::string>* warnings = nullptr,
                                    std::optional<double> kappa = std::nullopt)
{
    if (!detail::same_grid(A.geom, B.geom))
        throw std::invalid_argument("compose_blocks: grid mismatch");
    if (!A.shapes_valid() || !B.shapes_valid())
        throw std::invalid_argument("compose_blocks: malformed block shapes");
    const double kap = kappa.value_or(double(A.geom.nu()));

    BlockOperator R;
    R.geom = A.geom;
    detail::accumulate(R.MM, detail::times(A.MM, B.MM));
    detail::accumulate(R.MM, detail::times(A.MY, B.YM));
    detail::accumulate(R.MY, detail::times(A.MM, B.MY));
    detail::accumulate(R.MY, detail::times(A.MY, B.YY));
    detail::accumulate(R.YM, detail::times(A.YM, B.MM));
    detail::accumulate(R.YM, detail::times(A.YY, B.YM));
    detail::accumulate(R.YY, detail::times(A.YM, B.MY));
    detail::accumulate(R.YY, detail::times(A.YY, B.YY));

    using LC = LagrangianClass;
    const double na = std::max({A.MM.norm(), A.MY.norm(), A.YM.norm(), A.YY.norm(), 0.0});
    const double nb = std::max({B.MM.norm(), B.MY.norm(), B.YM.norm(), B.YY.norm(), 0.0});
    auto meta = [&](std::optional<MultiOrder>& dst, LC c1, const std::optional<MultiOrder>& o1,
                    LC c2, const std::optional<MultiOrder>& o2, const Eigen::MatrixXcd& prod) {
        detail::combine_meta(dst, c1, o1, c2, o2, kap, warnings, na, nb, prod.norm());
    };
    meta(R.order_psi, LC::Psi, A.order_psi, LC::Psi, B.order_psi, R.MM);
    meta(R.order_g, LC::Psi, A.order_psi, LC::G, B.order_g, R.MM);
    meta(R.order_g, LC::G, A.order_g, LC::Psi, B.order_psi, R.MM);
    meta(R.order_g, LC::G, A.order_g, LC::G, B.order_g, R.MM);
    meta(R.order_g, LC::C, A.order_c, LC::B, B.order_b, R.MM);
    meta(R.order_c, LC::Psi, A.order_psi, LC::C, B.order_c, R.MY);
    meta(R.order_c, LC::G, A.order_g, LC::C, B.order_c, R.MY);
    meta(R.order_c, LC::C, A.order_c, LC::Partial, B.order_partial, R.MY);
    meta(R.order_b, LC::B, A.order_b, LC::Psi, B.order_psi, R.YM);
    meta(R.order_b, LC::B, A.order_b, LC::G, B.order_g, R.YM);
    meta(R.order_b, LC::Partial, A.order_partial, LC::B, B.order_b, R.YM);
    meta(R.order_partial, LC::Partial, A.order_partial, LC::Partial, B.order_partial, R.YY);
    meta(R.order_partial, LC::B, A.order_b, LC::C, B.order_c, R.YY);
    return R;
}

/// L^2 adjoint: conjugate-transposed blocks with the M/Y volume ratio folded into
/// the swapped off-diagonal slots; declared classes map B <-> C with the order
/// components exchanged through the shared weight brackets.
inline BlockOperator adjoint(const BlockOperator& A)
{
    const double ratio = std::pow(two_pi / A.geom.N, A.geom.d - A.geom.n); // w_Y / w_M

    BlockOperator R;
    R.geom = A.geom;
    if (A.MM.size()) R.MM = A.MM.adjoint();
    if (A.YY.size()) R.YY = A.YY.adjoint();
    if (A.YM.size()) R.MY = ratio * A.YM.adjoint();
    if (A.MY.size()) R.YM = (1.0 / ratio) * A.MY.adjoint();

    R.order_psi = A.order_psi;
    R.order_partial = A.order_partial;
    if (A.order_g) R.order_g = MultiOrder::g(A.order_g->l, A.order_g->k, A.order_g->m);
    if (A.order_b) R.order_c = MultiOrder::c(A.order_b->l, A.order_b->k);
    if (A.order_c) R.order_b = MultiOrder::b(A.order_c->k, A.order_c->m);
    return R;
}

struct NormResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

namespace detail {

/// Power iteration for the largest singular value of T between spaces whose inner
/// products carry constant quadrature weights w_in / w_out.
inline NormResult power_norm(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& fwd,
                             const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& adj,
                             std::int64_t dim_in, int max_iter, double tol, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(dim_in);
    for (std::int64_t i = 0; i < dim_in; ++i) v[i] = cplx(gauss(rng), gauss(rng));
    v /= v.norm();

    NormResult res;
    double prev = -1.0;
    for (int it = 1; it <= max_iter; ++it) {
        Eigen::VectorXcd w = adj(fwd(v)); // (T* T) v in the weighted geometry
        const double lambda = std::real(v.dot(w));
        res.value = std::sqrt(std::max(0.0, lambda));
        res.iterations = it;
        const double nw = w.norm();
        if (nw < 1e-300) {
            res.value = 0.0;
            res.converged = true;
            return res;
        }
        v = w / nw;
        if (prev >= 0.0 && std::abs(res.value - prev) <= tol * std::max(res.value, 1e-30)) {
            res.converged = true;
            return res;
        }
        prev = res.value;
    }
    return res;
}

} // namespace detail

/// Largest singular value of one block in the weighted L^2 geometry.
inline NormResult operator_norm(const Eigen::MatrixXcd& T, double w_in, double w_out,
                                int max_iter = 1000, double tol = 1e-12,
                                std::uint64_t seed = 0x5eedULL)
{
    if (T.size() == 0) return {0.0, true, 0};
    const double ratio = w_out / w_in;
    return detail::power_norm([&](const Eigen::VectorXcd& x) { return (T * x).eval(); },
                              [&](const Eigen::VectorXcd& y) { return (ratio * (T.adjoint() * y)).eval(); },
                              T.cols(), max_iter, tol, seed);
}

/// Largest singular value of the full 2x2 system on L^2(M) + L^2(Y).
inline NormResult operator_norm(const BlockOperator& A, int max_iter = 1000, double tol = 1e-12,
                                std::uint64_t seed = 0x5eedULL)
{
    if (!A.shapes_valid()) throw std::invalid_argument("operator_norm: malformed block shapes");
    const std::int64_t nm = A.m_size(), ny = A.y_size();
    const double wM = A.geom.cell_weight(A.geom.n), wY = A.geom.cell_weight(A.geom.d);

    auto apply = [&](const Eigen::MatrixXcd& T, const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
        if (T.size() == 0) return Eigen::VectorXcd();
        return T * x;
    };
    auto add = [](Eigen::VectorXcd& dst, const Eigen::VectorXcd& part, std::int64_t dim) {
        if (dst.size() == 0) dst = Eigen::VectorXcd::Zero(dim);
        if (part.size()) dst += part;
    };

    auto fwd = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
        const Eigen::VectorXcd xm = x.head(nm), xy = x.tail(ny);
        Eigen::VectorXcd om, oy;
        add(om, apply(A.MM, xm), nm);
        add(om, apply(A.MY, xy), nm);
        add(oy, apply(A.YM, xm), ny);
        add(oy, apply(A.YY, xy), ny);
        Eigen::VectorXcd out(nm + ny);
        out << om, oy;
        return out;
    };
    // weighted adjoint: [[MM^H, (wY/wM) YM^H], [(wM/wY) MY^H, YY^H]]
    auto adj = [&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd {
        const Eigen::VectorXcd ym = y.head(nm), yy = y.tail(ny);
        Eigen::VectorXcd om, oy;
        if (A.MM.size()) add(om, (A.MM.adjoint() * ym).eval(), nm);
        if (A.YM.size()) add(om, ((wY / wM) * (A.YM.adjoint() * yy)).eval(), nm);
        add(om, Eigen::VectorXcd(), nm);
        if (A.MY.size()) add(oy, ((wM / wY) * (A.MY.adjoint() * ym)).eval(), ny);
        if (A.YY.size()) add(oy, (A.YY.adjoint() * yy).eval(), ny);
        add(oy, Eigen::VectorXcd(), ny);
        Eigen::VectorXcd out(nm + ny);
        out << om, oy;
        return out;
    };
    return detail::power_norm(fwd, adj, nm + ny, max_iter, tol, seed);
}

/// Log-log decay slope of a tabulated symbol along one fiber block: mean |a| over
/// base points and +/- axis directions at lattice radius r, with the other fiber
/// blocks frozen at zero, regressed against log <r> (the weight's own abscissa,
/// exact for bracket-power symbols at small radii).
inline double measure_sampled_decay(const SampledSymbol& tab, FiberBlock block,
                                    const std::vector<int>& radii = {2, 3, 4, 6})
{
    const int N = tab.N;
    const int fdim = tab.fiber_dim();
    int from = 0, len = 0;
    switch (block) {
        case FiberBlock::Xi1: from = 0; len = tab.sig.xi1_dim; break;
        case FiberBlock::Xi2: from = tab.sig.xi1_dim; len = tab.sig.xi2_dim; break;
        case FiberBlock::Eta2: from = tab.sig.xi1_dim + tab.sig.xi2_dim; len = tab.sig.eta2_dim; break;
    }
    if (len == 0) throw std::invalid_argument("measure_sampled_decay: empty fiber block");

    GridIndexer gf{fdim, N};
    std::vector<double> xs, ys;
    for (int r : radii) {
        if (r >= N / 2) throw std::invalid_argument("measure_sampled_decay: radius beyond lattice");
        double acc = 0.0;
        int cnt = 0;
        std::vector<int> slot(fdim, N / 2); // all frequencies zero
        for (int axis = 0; axis < len; ++axis) {
            for (int s : {-1, +1}) {
                slot[from + axis] = slot_of_freq(s * r, N);
                const std::int64_t f = gf.flatten(slot);
                for (std::int64_t b = 0; b < tab.values.rows(); ++b) {
                    acc += std::abs(tab.values(b, f));
                    ++cnt;
                }
                slot[from + axis] = N / 2;
            }
        }
        const double mean = acc / cnt;
        if (mean <= 0.0) throw std::runtime_error("measure_sampled_decay: vanishing symbol");
        xs.push_back(0.5 * std::log1p(double(r) * r)); // log <r>
        ys.push_back(std::log(mean));
    }

    const int P = int(xs.size());
    double mx = 0, my = 0;
    for (int i = 0; i < P; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= P;
    my /= P;
    double num = 0, den = 0;
    for (int i = 0; i < P; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    if (std::abs(den) < 1e-14) throw std::runtime_error("measure_sampled_decay: degenerate radii");
    return num / den;
}

struct L2Orders {
    double m_g = 0.0;
    double k_g = 0.0;
    double k_c = 0.0;
    double k_b = 0.0;
};

struct L2Report {
    std::vector<int> grid_sizes;
    std::vector<double> norms;
    double ratio = 0.0;
    bool bounded = false;
    double kappa = 0.0;
    double l_g = 0.0, l_b = 0.0, m_c = 0.0; // derived companion orders
};

/// Assembles the full 2x2 operator from canonical classical symbols at the given
/// orders (boundary calculus at order 0 on the diagonal) for each grid size and
/// measures its L^2 norm; bounded iff max/min <= ratio_tol across the sweep.
inline L2Report verify_l2_bound(int n, int d, const L2Orders& o, const std::vector<int>& grid_sizes,
                                std::optional<double> kappa_opt = std::nullopt, bool force = false,
                                double ratio_tol = 1.10)
{
    if (grid_sizes.empty()) throw std::invalid_argument("verify_l2_bound: no grid sizes");
    const int nu = n - d;
    const double kappa = kappa_opt.value_or(double(nu));

    const bool ok = o.k_g > 0.0 && o.k_c > 0.0 && o.k_b > 0.0 && o.m_g < -0.5 * nu &&
                    o.m_g + o.k_g > -0.5 * nu;
    if (!ok && !force)
        throw std::invalid_argument("verify_l2_bound: order constraints violated (use force)");

    L2Report rep;
    rep.kappa = kappa;
    rep.l_g = -o.m_g - o.k_g - kappa;
    rep.l_b = -o.k_b - 0.5 * nu;
    rep.m_c = -o.k_c - 0.5 * nu;

    for (int N : grid_sizes) {
        const auto g = make_geometry(n, d, N);
        auto A = quantize(make_classical_symbol(LagrangianClass::Psi, MultiOrder::psi(0.0), g), g);
        {
            auto qg = quantize(
                make_classical_symbol(LagrangianClass::G, MultiOrder::g(o.m_g, o.k_g, rep.l_g), g),
                g);
            A.MM += qg.MM;
            A.order_g = qg.order_g;
        }
        {
            auto qc = quantize(
                make_classical_symbol(LagrangianClass::C, MultiOrder::c(rep.m_c, o.k_c), g), g);
            A.MY = std::move(qc.MY);
            A.order_c = qc.order_c;
        }
        {
            auto qb = quantize(
                make_classical_symbol(LagrangianClass::B, MultiOrder::b(o.k_b, rep.l_b), g), g);
            A.YM = std::move(qb.YM);
            A.order_b = qb.order_b;
        }
        {
            auto qp =
                quantize(make_classical_symbol(LagrangianClass::Partial, MultiOrder::partial(0.0), g), g);
            A.YY = std::move(qp.YY);
            A.order_partial = qp.order_partial;
        }
        rep.grid_sizes.push_back(N);
        rep.norms.push_back(operator_norm(A).value);
    }

    const double hi = *std::max_element(rep.norms.begin(), rep.norms.end());
    const double lo = *std::min_element(rep.norms.begin(), rep.norms.end());
    if (hi < 1e-14) {
        rep.ratio = 1.0;
        rep.bounded = true;
    } else {
        rep.ratio = hi / std::max(lo, 1e-300);
        rep.bounded = rep.ratio <= ratio_tol;
    }
    return rep;
}

} // namespace relcalc

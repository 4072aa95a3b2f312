#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "relcalc/fft.hpp"
#include "relcalc/geometry.hpp"
#include "relcalc/symbols.hpp"

namespace relcalc {

/// The four operator blocks acting between the M-grid (N^n points) and the
/// Y-grid (N^d points). Matrices include the input-side quadrature weight
/// (2*pi/N)^dim, so matrix products realize operator composition in L^2.
/// Unused blocks stay 0x0. The MM slot can carry both a Psi and a G part.
struct BlockOperator {
    TorusEmbedding geom;
    Eigen::MatrixXcd MM, MY, YM, YY;
    std::optional<MultiOrder> order_psi, order_g, order_b, order_c, order_partial;

    std::int64_t m_size() const { return GridIndexer{geom.n, geom.N}.size(); }
    std::int64_t y_size() const { return GridIndexer{geom.d, geom.N}.size(); }

    /// Checks that every nonempty block has the dimensions of its slot.
    bool shapes_valid() const
    {
        auto ok = [](const Eigen::MatrixXcd& A, std::int64_t r, std::int64_t c) {
            return A.size() == 0 || (A.rows() == r && A.cols() == c);
        };
        return ok(MM, m_size(), m_size()) && ok(MY, m_size(), y_size()) &&
               ok(YM, y_size(), m_size()) && ok(YY, y_size(), y_size());
    }
};

/// Block slot addressed by an operator class.
inline Eigen::MatrixXcd& block_of(BlockOperator& op, LagrangianClass cls)
{
    switch (cls) {
        case LagrangianClass::Psi:
        case LagrangianClass::G: return op.MM;
        case LagrangianClass::C: return op.MY;
        case LagrangianClass::B: return op.YM;
        default: return op.YY;
    }
}

inline const Eigen::MatrixXcd& block_of(const BlockOperator& op, LagrangianClass cls)
{
    return block_of(const_cast<BlockOperator&>(op), cls);
}

struct QuantizeOptions {
    bool cutoff = true; // multiply the kernel by the diagonal cutoff in the difference variable
};

/// A symbol tabulated on the base grid times the centered fiber lattice.
/// values(base_flat, fiber_flat); fiber slot s on each axis holds frequency s - N/2,
/// axes ordered (xi1 | xi2 | eta2) per the class signature.
struct SampledSymbol {
    LagrangianClass cls = LagrangianClass::Psi;
    FiberSignature sig{};
    int N = 0;
    Eigen::MatrixXcd values;

    int fiber_dim() const { return sig.xi1_dim + sig.xi2_dim + sig.eta2_dim; }
};

namespace detail {

inline Eigen::VectorXd grid_vector(const std::vector<int>& idx, int from, int len, int N)
{
    Eigen::VectorXd x(len);
    for (int i = 0; i < len; ++i) x[i] = two_pi * idx[from + i] / N;
    return x;
}

inline Eigen::VectorXd freq_vector(const std::vector<int>& idx, int from, int len, int N)
{
    Eigen::VectorXd f(len);
    for (int i = 0; i < len; ++i) f[i] = freq_of_slot(idx[from + i], N);
    return f;
}

/// Per-class fiber transform layout: sign per fiber axis and the arg splitter.
inline std::vector<int> fiber_signs(LagrangianClass cls, const TorusEmbedding& g)
{
    const auto sig = signature_of(cls, g);
    std::vector<int> s;
    s.insert(s.end(), sig.xi1_dim, +1);
    s.insert(s.end(), sig.xi2_dim, +1);
    s.insert(s.end(), sig.eta2_dim, -1); // phases carry -i eta'' y''
    return s;
}

inline SymbolArgs fiber_args(const FiberSignature& sig, const Eigen::VectorXd& base,
                             const std::vector<int>& slot, int N)
{
    SymbolArgs a;
    a.base = base;
    a.xi1 = freq_vector(slot, 0, sig.xi1_dim, N);
    a.xi2 = freq_vector(slot, sig.xi1_dim, sig.xi2_dim, N);
    a.eta2 = freq_vector(slot, sig.xi1_dim + sig.xi2_dim, sig.eta2_dim, N);
    return a;
}

/// Evaluates the fiber sum T = sum_freqs a(base, freqs) e^{i sum sign_ax freq_ax u_ax}
/// on the full evaluation grid for one base point.
inline std::vector<cplx> fiber_transform(const Symbol& sym, const TorusEmbedding& g,
                                         const Eigen::VectorXd& base)
{
    const auto sig = signature_of(sym.cls, g);
    const int fdim = sig.xi1_dim + sig.xi2_dim + sig.eta2_dim;
    GridIndexer fg{fdim, g.N};
    std::vector<cplx> spec(static_cast<std::size_t>(fg.size()));
    std::vector<int> slot(fdim, 0);
    std::int64_t f = 0;
    do {
        spec[f++] = sym(fiber_args(sig, base, slot, g.N));
    } while (fg.next(slot));
    return eval_from_centered_spectrum(std::move(spec), fdim, g.N, fiber_signs(sym.cls, g));
}

/// Cutoff table over a dim-dimensional difference grid (1.0 when disabled).
inline std::vector<double> chi_table(const TorusEmbedding& g, int dim, bool enabled)
{
    GridIndexer gi{dim, g.N};
    std::vector<double> chi(static_cast<std::size_t>(gi.size()), 1.0);
    if (!enabled) return chi;
    std::vector<int> idx(dim, 0);
    std::int64_t f = 0;
    do {
        chi[f++] = cutoff_chi(grid_vector(idx, 0, dim, g.N));
    } while (gi.next(idx));
    return chi;
}

} // namespace detail

/// Assembles the dense matrix of the operator with the given adapted symbol, by the
/// class kernel formula: fiber integrals become sums over the centered dual lattice,
/// and the input-grid quadrature weight is folded in, leaving the prefactors below.
inline BlockOperator quantize(const Symbol& sym, const TorusEmbedding& geom,
                              const QuantizeOptions& opt = {})
{
    const int n = geom.n, d = geom.d, nu = geom.nu(), N = geom.N;

    // Resolution guard: the canonical weight must stay representable at |xi| = N/2.
    const double top = std::sqrt(1.0 + 0.25 * double(N) * double(N));
    const double total_order =
        std::abs(sym.order.m) + std::abs(sym.order.k) + std::abs(sym.order.l);
    if (total_order * std::log(top) > 600.0)
        throw std::overflow_error("quantize: order too high for this grid resolution");

    BlockOperator op;
    op.geom = geom;
    GridIndexer gm{n, N}, gy{d, N};
    const std::int64_t Mn = gm.size(), Md = gy.size();

    switch (sym.cls) {
        case LagrangianClass::Psi: {
            op.order_psi = sym.order;
            op.MM.setZero(Mn, Mn);
            const double pref = std::pow(double(N), -n);
            const auto chi = detail::chi_table(geom, n, opt.cutoff);
            std::vector<int> jx(n, 0), jy(n);
            std::int64_t rx = 0;
            do {
                const auto T = detail::fiber_transform(sym, geom, detail::grid_vector(jx, 0, n, N));
                std::vector<int> ju(n, 0);
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < n; ++i) jy[i] = (jx[i] - ju[i] + N) % N;
                    op.MM(rx, gm.flatten(jy)) = pref * T[fu] * chi[fu];
                    ++fu;
                } while (gm.next(ju));
                ++rx;
            } while (gm.next(jx));
            break;
        }
        case LagrangianClass::Partial: {
            op.order_partial = sym.order;
            op.YY.setZero(Md, Md);
            const double pref = std::pow(double(N), -d);
            const auto chi = detail::chi_table(geom, d, opt.cutoff);
            std::vector<int> jx(d, 0), jy(d);
            std::int64_t rx = 0;
            do {
                const auto T = detail::fiber_transform(sym, geom, detail::grid_vector(jx, 0, d, N));
                std::vector<int> ju(d, 0);
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) jy[i] = (jx[i] - ju[i] + N) % N;
                    op.YY(rx, gy.flatten(jy)) = pref * T[fu] * chi[fu];
                    ++fu;
                } while (gy.next(ju));
                ++rx;
            } while (gy.next(jx));
            break;
        }
        case LagrangianClass::B: {
            // K(x', (y',y'')) = N^{-n} sum a(x',xi',eta'') e^{i xi'(x'-y') - i eta'' y''} chi_d
            op.order_b = sym.order;
            op.YM.setZero(Md, Mn);
            const double pref = std::pow(double(N), -n);
            const auto chi = detail::chi_table(geom, d, opt.cutoff);
            std::vector<int> jx(d, 0), col(n);
            std::int64_t rx = 0;
            do {
                const auto T = detail::fiber_transform(sym, geom, detail::grid_vector(jx, 0, d, N));
                std::vector<int> ju(n, 0); // (u' | y'')
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) col[i] = (jx[i] - ju[i] + N) % N;
                    for (int i = d; i < n; ++i) col[i] = ju[i];
                    const std::int64_t cu = fu / (Mn / Md); // flat index of u' alone
                    op.YM(rx, gm.flatten(col)) = pref * T[fu] * chi[cu];
                    ++fu;
                } while (gm.next(ju));
                ++rx;
            } while (gy.next(jx));
            break;
        }
        case LagrangianClass::C: {
            // K((x',x''), y') = (2 pi)^{-nu} N^{-d} sum a(x',xi',xi'') e^{i xi'(x'-y') + i xi'' x''} chi_d
            op.order_c = sym.order;
            op.MY.setZero(Mn, Md);
            const double pref = std::pow(two_pi, -nu) * std::pow(double(N), -d);
            const auto chi = detail::chi_table(geom, d, opt.cutoff);
            std::vector<int> jx(d, 0), row(n), jy(d);
            do {
                const auto T = detail::fiber_transform(sym, geom, detail::grid_vector(jx, 0, d, N));
                std::vector<int> ju(n, 0); // (u' | x'')
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) {
                        jy[i] = (jx[i] - ju[i] + N) % N;
                        row[i] = jx[i];
                    }
                    for (int i = d; i < n; ++i) row[i] = ju[i];
                    const std::int64_t cu = fu / (Mn / Md);
                    op.MY(gm.flatten(row), gy.flatten(jy)) = pref * T[fu] * chi[cu];
                    ++fu;
                } while (gm.next(ju));
            } while (gy.next(jx));
            break;
        }
        case LagrangianClass::G: {
            // K((x',x''),(y',y'')) = (2 pi)^{-d} N^{-n} sum a(x',xi',xi'',eta'')
            //                        e^{i xi'(x'-y') + i xi'' x'' - i eta'' y''} chi_n(x-y)
            op.order_g = sym.order;
            op.MM.setZero(Mn, Mn);
            const double pref = std::pow(two_pi, -d) * std::pow(double(N), -n);
            const auto chi = detail::chi_table(geom, n, opt.cutoff);
            GridIndexer gev{d + 2 * nu, N}, gchi{n, N};
            std::vector<int> jx(d, 0), row(n), col(n), jw(n);
            do {
                const auto T = detail::fiber_transform(sym, geom, detail::grid_vector(jx, 0, d, N));
                std::vector<int> ju(d + 2 * nu, 0); // (u' | x'' | y'')
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) {
                        row[i] = jx[i];
                        col[i] = (jx[i] - ju[i] + N) % N;
                        jw[i] = ju[i];
                    }
                    for (int i = 0; i < nu; ++i) {
                        row[d + i] = ju[d + i];
                        col[d + i] = ju[d + nu + i];
                        jw[d + i] = (ju[d + i] - ju[d + nu + i] + N) % N;
                    }
                    op.MM(gm.flatten(row), gm.flatten(col)) = pref * T[fu] * chi[gchi.flatten(jw)];
                    ++fu;
                } while (gev.next(ju));
            } while (gy.next(jx));
            break;
        }
    }
    return op;
}

/// Tabulates a symbol on the base grid times the centered fiber lattice.
inline SampledSymbol sample_symbol(const Symbol& sym, const TorusEmbedding& geom)
{
    SampledSymbol out;
    out.cls = sym.cls;
    out.sig = signature_of(sym.cls, geom);
    out.N = geom.N;
    const int fdim = out.fiber_dim();
    GridIndexer gb{out.sig.base_dim, geom.N}, gf{fdim, geom.N};
    out.values.resize(gb.size(), gf.size());
    std::vector<int> jb(out.sig.base_dim, 0);
    std::int64_t rb = 0;
    do {
        const auto base = detail::grid_vector(jb, 0, out.sig.base_dim, geom.N);
        std::vector<int> slot(fdim, 0);
        std::int64_t f = 0;
        do {
            out.values(rb, f++) = sym(detail::fiber_args(out.sig, base, slot, geom.N));
        } while (gf.next(slot));
        ++rb;
    } while (gb.next(jb));
    return out;
}

/// Inverts the class kernel formula on a block assembled with the cutoff disabled:
/// discrete Fourier transform of the kernel in the difference/boundary variables,
/// returning leading-symbol samples. Exact inverse of quantize when chi == 1.
inline SampledSymbol extract_symbol(const Eigen::MatrixXcd& block, LagrangianClass cls,
                                    const TorusEmbedding& geom)
{
    const int n = geom.n, d = geom.d, nu = geom.nu(), N = geom.N;
    GridIndexer gm{n, N}, gy{d, N};
    const std::int64_t Mn = gm.size(), Md = gy.size();

    const std::int64_t want_rows = (cls == LagrangianClass::Psi || cls == LagrangianClass::C ||
                                    cls == LagrangianClass::G)
                                       ? Mn
                                       : Md;
    const std::int64_t want_cols = (cls == LagrangianClass::Psi || cls == LagrangianClass::B ||
                                    cls == LagrangianClass::G)
                                       ? Mn
                                       : Md;
    if (block.rows() != want_rows || block.cols() != want_cols)
        throw std::invalid_argument("extract_symbol: block shape does not match class");

    SampledSymbol out;
    out.cls = cls;
    out.sig = signature_of(cls, geom);
    out.N = N;
    const int fdim = out.sig.xi1_dim + out.sig.xi2_dim + out.sig.eta2_dim;
    GridIndexer gf{fdim, N};
    out.values.resize(GridIndexer{out.sig.base_dim, N}.size(), gf.size());

    auto signs = detail::fiber_signs(cls, geom);
    for (auto& s : signs) s = -s;
    const double inv_scale = 1.0 / std::pow(double(N), fdim);

    switch (cls) {
        case LagrangianClass::Psi: {
            const double pre = std::pow(double(N), n);
            std::vector<int> jx(n, 0), jy(n);
            std::int64_t rx = 0;
            do {
                std::vector<cplx> v(static_cast<std::size_t>(Mn));
                std::vector<int> ju(n, 0);
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < n; ++i) jy[i] = (jx[i] - ju[i] + N) % N;
                    v[fu++] = pre * block(rx, gm.flatten(jy));
                } while (gm.next(ju));
                const auto spec = centered_spectrum_from_values(std::move(v), n, N, signs);
                for (std::int64_t f = 0; f < Mn; ++f) out.values(rx, f) = spec[f] * inv_scale;
                ++rx;
            } while (gm.next(jx));
            break;
        }
        case LagrangianClass::Partial: {
            const double pre = std::pow(double(N), d);
            std::vector<int> jx(d, 0), jy(d);
            std::int64_t rx = 0;
            do {
                std::vector<cplx> v(static_cast<std::size_t>(Md));
                std::vector<int> ju(d, 0);
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) jy[i] = (jx[i] - ju[i] + N) % N;
                    v[fu++] = pre * block(rx, gy.flatten(jy));
                } while (gy.next(ju));
                const auto spec = centered_spectrum_from_values(std::move(v), d, N, signs);
                for (std::int64_t f = 0; f < Md; ++f) out.values(rx, f) = spec[f] * inv_scale;
                ++rx;
            } while (gy.next(jx));
            break;
        }
        case LagrangianClass::B: {
            const double pre = std::pow(double(N), n);
            std::vector<int> jx(d, 0), col(n);
            std::int64_t rx = 0;
            do {
                std::vector<cplx> v(static_cast<std::size_t>(Mn));
                std::vector<int> ju(n, 0); // (u' | y'')
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) col[i] = (jx[i] - ju[i] + N) % N;
                    for (int i = d; i < n; ++i) col[i] = ju[i];
                    v[fu++] = pre * block(rx, gm.flatten(col));
                } while (gm.next(ju));
                const auto spec = centered_spectrum_from_values(std::move(v), n, N, signs);
                for (std::int64_t f = 0; f < Mn; ++f) out.values(rx, f) = spec[f] * inv_scale;
                ++rx;
            } while (gy.next(jx));
            break;
        }
        case LagrangianClass::C: {
            const double pre = std::pow(two_pi, nu) * std::pow(double(N), d);
            std::vector<int> jx(d, 0), row(n), jy(d);
            std::int64_t rx = 0;
            do {
                std::vector<cplx> v(static_cast<std::size_t>(Mn));
                std::vector<int> ju(n, 0); // (u' | x'')
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) {
                        jy[i] = (jx[i] - ju[i] + N) % N;
                        row[i] = jx[i];
                    }
                    for (int i = d; i < n; ++i) row[i] = ju[i];
                    v[fu++] = pre * block(gm.flatten(row), gy.flatten(jy));
                } while (gm.next(ju));
                const auto spec = centered_spectrum_from_values(std::move(v), n, N, signs);
                for (std::int64_t f = 0; f < Mn; ++f) out.values(rx, f) = spec[f] * inv_scale;
                ++rx;
            } while (gy.next(jx));
            break;
        }
        case LagrangianClass::G: {
            const double pre = std::pow(two_pi, d) * std::pow(double(N), n);
            GridIndexer gev{d + 2 * nu, N};
            std::vector<int> jx(d, 0), row(n), col(n);
            std::int64_t rx = 0;
            do {
                std::vector<cplx> v(static_cast<std::size_t>(gev.size()));
                std::vector<int> ju(d + 2 * nu, 0); // (u' | x'' | y'')
                std::int64_t fu = 0;
                do {
                    for (int i = 0; i < d; ++i) {
                        row[i] = jx[i];
                        col[i] = (jx[i] - ju[i] + N) % N;
                    }
                    for (int i = 0; i < nu; ++i) {
                        row[d + i] = ju[d + i];
                        col[d + i] = ju[d + nu + i];
                    }
                    v[fu++] = pre * block(gm.flatten(row), gm.flatten(col));
                } while (gev.next(ju));
                const auto spec =
                    centered_spectrum_from_values(std::move(v), d + 2 * nu, N, signs);
                for (std::int64_t f = 0; f < gf.size(); ++f) out.values(rx, f) = spec[f] * inv_scale;
                ++rx;
            } while (gy.next(jx));
            break;
        }
    }
    return out;
}

} // namespace relcalc

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "relcalc/calculus.hpp"
#include "relcalc/geometry.hpp"
#include "relcalc/quantizer.hpp"

namespace relcalc {

enum class SpaceTag { M, Y };

namespace detail {

inline Symbol multiplier_symbol(LagrangianClass cls, const TorusEmbedding& g,
                                std::function<double(const Eigen::VectorXd&)> f)
{
    Symbol s;
    s.cls = cls;
    s.sig = signature_of(cls, g);
    s.order = MultiOrder{0.0, 0.0, 0.0};
    s.eval = [f = std::move(f)](const SymbolArgs& a) { return cplx(f(a.xi1), 0.0); };
    return s;
}

} // namespace detail

/// Dense matrix of the flat Laplacian on the M-grid: Fourier multiplier |xi|^2.
inline Eigen::MatrixXcd laplacian(const TorusEmbedding& geom)
{
    auto sym = detail::multiplier_symbol(LagrangianClass::Psi, geom,
                                         [](const Eigen::VectorXd& xi) { return xi.squaredNorm(); });
    return quantize(sym, geom, {.cutoff = false}).MM;
}

/// Invertible order reduction <xi>^s = (1+|xi|^2)^{s/2} on the tagged grid.
inline Eigen::MatrixXcd order_reduction(const TorusEmbedding& geom, SpaceTag tag, double s)
{
    const auto cls = tag == SpaceTag::M ? LagrangianClass::Psi : LagrangianClass::Partial;
    auto sym = detail::multiplier_symbol(cls, geom, [s](const Eigen::VectorXd& xi) {
        return std::pow(1.0 + xi.squaredNorm(), 0.5 * s);
    });
    const auto op = quantize(sym, geom, {.cutoff = false});
    return tag == SpaceTag::M ? op.MM : op.YY;
}

/// Microlocalized restriction/extension pair built by order reduction around the
/// naive slice restriction; jstar maps the M-grid to the Y-grid, jlower back.
struct GeneratingPair {
    TorusEmbedding geom;
    Eigen::MatrixXcd jstar;  // Y <- M
    Eigen::MatrixXcd jlower; // M <- Y
    Eigen::MatrixXcd B;      // order-reduced restriction, Y <- M
    Eigen::MatrixXcd C;      // minimal-norm right inverse of B, M <- Y
    Eigen::MatrixXcd S;      // (C* C)^{-1/2} on the Y-grid
    double sv_min_C = 0.0;   // smallest weighted singular value of C
    double norm_B = 0.0;     // weighted operator norm of B
};

/// Builds the pair: B = lambda_Y^{2-nu/2} r lambda_M^{-2}, C its weighted
/// Moore-Penrose right inverse, S = (C*C)^{-1/2}, jstar = S C*, jlower = C S.
inline GeneratingPair build_generating_pair(const TorusEmbedding& geom)
{
    const int n = geom.n, d = geom.d, nu = geom.nu(), N = geom.N;
    GridIndexer gm{n, N}, gy{d, N};
    const std::int64_t Mn = gm.size(), Md = gy.size();
    const double wM = geom.cell_weight(n), wY = geom.cell_weight(d);
    const double rho = wY / wM; // adjoint weight ratio for M -> Y maps

    GeneratingPair P;
    P.geom = geom;

    // naive slice restriction (r f)(x') = f(x', 0)
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(Md, Mn);
    {
        std::vector<int> col(n, 0);
        for (std::int64_t row = 0; row < Md; ++row) {
            const auto jy = gy.unflatten(row);
            for (int i = 0; i < d; ++i) col[i] = jy[i];
            for (int i = d; i < n; ++i) col[i] = 0;
            r(row, gm.flatten(col)) = 1.0;
        }
    }

    const Eigen::MatrixXcd lam_m = order_reduction(geom, SpaceTag::M, -2.0);
    const Eigen::MatrixXcd lam_y = order_reduction(geom, SpaceTag::Y, 2.0 - 0.5 * nu);
    P.B = lam_y * r * lam_m;

    // full row rank via the Hermitian Gram matrix (weight factors are positive
    // scalars and do not affect the rank test)
    const Eigen::MatrixXcd gram = P.B * P.B.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> gram_eig(gram);
    if (gram_eig.info() != Eigen::Success)
        throw std::runtime_error("build_generating_pair: Gram eigendecomposition failed");
    const double gmax = gram_eig.eigenvalues().maxCoeff();
    if (gram_eig.eigenvalues().minCoeff() <= 1e-12 * gmax)
        throw std::runtime_error("build_generating_pair: order-reduced restriction is rank-deficient");

    // minimal-norm right inverse; the constant space weights cancel in B*(B B*)^{-1}
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("build_generating_pair: Gram factorization failed");
    P.C = P.B.adjoint() * llt.solve(Eigen::MatrixXcd::Identity(Md, Md));

    // S = (C* C)^{-1/2} with the weighted adjoint C* = (wM/wY) C^H
    const Eigen::MatrixXcd cstar_c = (1.0 / rho) * (P.C.adjoint() * P.C);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cstar_c);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("build_generating_pair: C*C eigendecomposition failed");
    const Eigen::VectorXd ev = eig.eigenvalues();
    if (ev.minCoeff() <= 1e-12 * ev.maxCoeff())
        throw std::runtime_error("build_generating_pair: C*C has a non-positive-definite eigenvalue");
    P.S = eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
          eig.eigenvectors().adjoint();

    // closed form: jstar = rho^{-1/2} (B B^H)^{-1/2} B, a tangential renormalization of B
    P.jstar = P.S * ((1.0 / rho) * P.C.adjoint());
    P.jlower = P.C * P.S;
    P.sv_min_C = std::sqrt(ev.minCoeff());
    P.norm_B = operator_norm(P.B, wM, wY).value;
    return P;
}

} // namespace relcalc

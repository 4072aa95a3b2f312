#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "relcalc/fft.hpp"

namespace relcalc {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Flat model pair: the full torus M = T^n with the embedded subtorus
/// X = T^d x {0} of codimension nu = n - d, discretized on the uniform
/// grid (2*pi/N)Z^n with even N. Coordinates split as x = (x', x'') with
/// x' along X and x'' conormal.
struct TorusEmbedding {
    int n = 2;
    int d = 1;
    int N = 16;

    int nu() const { return n - d; }

    GridIndexer full_grid() const { return GridIndexer{n, N}; }
    GridIndexer base_grid() const { return GridIndexer{d, N}; }

    /// Quadrature weight of one grid cell in T^dim.
    double cell_weight(int dim) const { return std::pow(two_pi / N, dim); }
};

inline TorusEmbedding make_geometry(int n, int d, int N)
{
    if (d < 1 || d >= n) throw std::invalid_argument("geometry: need 1 <= d < n");
    if (N < 4 || (N % 2) != 0) throw std::invalid_argument("geometry: need even N >= 4");
    return TorusEmbedding{n, d, N};
}

/// Wraps an angle to the fundamental domain [0, 2*pi).
inline double wrap_angle(double t)
{
    double r = std::fmod(t, two_pi);
    if (r < 0.0) r += two_pi;
    // fmod can land exactly on 2*pi after the correction when t is a tiny negative.
    if (r >= two_pi) r -= two_pi;
    return r;
}

/// Wraps a displacement to the symmetric domain [-pi, pi).
inline double wrap_displacement(double t)
{
    double r = wrap_angle(t);
    if (r >= std::numbers::pi) r -= two_pi;
    return r;
}

inline Eigen::VectorXd wrap_angle(const Eigen::VectorXd& v)
{
    Eigen::VectorXd r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) r[i] = wrap_angle(v[i]);
    return r;
}

inline Eigen::VectorXd wrap_displacement(const Eigen::VectorXd& v)
{
    Eigen::VectorXd r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) r[i] = wrap_displacement(v[i]);
    return r;
}

/// Exponential-splice smooth step: 0 for t <= 0, 1 for t >= 1, C^inf monotone between.
inline double smooth_step(double t)
{
    auto f = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    const double a = f(t);
    const double b = f(1.0 - t);
    return a / (a + b);
}

inline constexpr double chi_inner_radius = std::numbers::pi / 4.0;
inline constexpr double chi_outer_radius = std::numbers::pi / 2.0;

/// Radial cutoff profile: 1 on r <= pi/4, 0 on r >= pi/2, smooth monotone between.
inline double chi_profile(double r)
{
    return 1.0 - smooth_step((r - chi_inner_radius) / (chi_outer_radius - chi_inner_radius));
}

/// Cutoff on torus displacements: components wrapped to [-pi, pi), then the radial profile.
/// Identically 1 near the diagonal, identically 0 beyond half the injectivity radius.
inline double cutoff_chi(const Eigen::VectorXd& displacement)
{
    return chi_profile(wrap_displacement(displacement).norm());
}

/// Riemann-Weyl fibration of the flat torus: (x, xi) -> (x, exp_x(-xi)) = (x, x - xi mod 2*pi).
inline Eigen::VectorXd riemann_weyl_second(const Eigen::VectorXd& x, const Eigen::VectorXd& xi)
{
    if (x.size() != xi.size()) throw std::invalid_argument("riemann_weyl: dimension mismatch");
    return wrap_angle(x - xi);
}

/// Fiberwise inverse Fourier transform at lattice level:
/// F(u_j) = (2*pi)^{-dim} * sum_{f in {-N/2..N/2-1}^dim} phi[f] exp(i f . u_j),
/// with u_j the grid points of T^dim and phi stored on centered slots.
inline std::vector<cplx> fiber_fourier_inverse(const std::vector<cplx>& phi, int dim, int N)
{
    std::vector<int> signs(dim, +1);
    std::vector<cplx> out = eval_from_centered_spectrum(phi, dim, N, signs);
    const double scale = std::pow(two_pi, -dim);
    for (auto& z : out) z *= scale;
    return out;
}

/// Grid point of T^dim at multi-index j.
inline Eigen::VectorXd grid_point(const std::vector<int>& j, int N)
{
    Eigen::VectorXd x(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) x[static_cast<Eigen::Index>(i)] = two_pi * j[i] / N;
    return x;
}

/// Centered dual-lattice frequency vector at slot multi-index s.
inline Eigen::VectorXd freq_point(const std::vector<int>& s, int N)
{
    Eigen::VectorXd f(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i)
        f[static_cast<Eigen::Index>(i)] = freq_of_slot(s[i], N);
    return f;
}

} // namespace relcalc

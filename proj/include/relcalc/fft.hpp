#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace relcalc {

using cplx = std::complex<double>;

namespace fft_detail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place iterative radix-2 transform: a[m] <- sum_k a[k] exp(sign*2*pi*i*m*k/N).
/// No normalization is applied in either direction.
inline void radix2(std::vector<cplx>& a, int sign)
{
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

/// O(N^2) fallback for even non-power-of-two sizes; same convention as radix2.
inline void naive_dft(std::vector<cplx>& a, int sign)
{
    const std::size_t n = a.size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t k = 0; k < n; ++k) {
            const double ang = sign * 2.0 * std::numbers::pi *
                               static_cast<double>(m * k % n) / static_cast<double>(n);
            out[m] += a[k] * cplx(std::cos(ang), std::sin(ang));
        }
    }
    a.swap(out);
}

} // namespace fft_detail

/// Un-normalized 1-D transform, sign in {+1,-1}: a[m] <- sum_k a[k] exp(sign*2*pi*i*m*k/N).
inline void fft_1d(std::vector<cplx>& a, int sign)
{
    if (sign != 1 && sign != -1) throw std::invalid_argument("fft_1d: sign must be +1 or -1");
    if (fft_detail::is_pow2(static_cast<int>(a.size()))) fft_detail::radix2(a, sign);
    else fft_detail::naive_dft(a, sign);
}

/// Row-major flat indexing for a hypercube grid {0..N-1}^dim (axis 0 slowest).
struct GridIndexer {
    int dim = 0;
    int N = 0;

    std::int64_t size() const
    {
        std::int64_t s = 1;
        for (int i = 0; i < dim; ++i) s *= N;
        return s;
    }

    std::int64_t flatten(const std::vector<int>& idx) const
    {
        std::int64_t f = 0;
        for (int i = 0; i < dim; ++i) f = f * N + idx[i];
        return f;
    }

    std::vector<int> unflatten(std::int64_t f) const
    {
        std::vector<int> idx(dim, 0);
        for (int i = dim - 1; i >= 0; --i) {
            idx[i] = static_cast<int>(f % N);
            f /= N;
        }
        return idx;
    }

    /// Advances idx lexicographically; returns false after the last index.
    bool next(std::vector<int>& idx) const
    {
        for (int i = dim - 1; i >= 0; --i) {
            if (++idx[i] < N) return true;
            idx[i] = 0;
        }
        return false;
    }
};

/// Applies the un-normalized 1-D transform along every axis, with a per-axis sign.
inline void fft_nd(std::vector<cplx>& data, int dim, int N, const std::vector<int>& signs)
{
    if (static_cast<int>(signs.size()) != dim)
        throw std::invalid_argument("fft_nd: one sign per axis required");
    GridIndexer g{dim, N};
    if (static_cast<std::int64_t>(data.size()) != g.size())
        throw std::invalid_argument("fft_nd: data size mismatch");

    std::vector<cplx> line(N);
    for (int axis = 0; axis < dim; ++axis) {
        std::int64_t stride = 1;
        for (int i = axis + 1; i < dim; ++i) stride *= N;
        const std::int64_t lines = g.size() / N;
        for (std::int64_t l = 0; l < lines; ++l) {
            // Base offset of the l-th line along `axis`.
            const std::int64_t block = stride * N;
            const std::int64_t base = (l / stride) * block + (l % stride);
            for (int k = 0; k < N; ++k) line[k] = data[base + k * stride];
            fft_1d(line, signs[axis]);
            for (int k = 0; k < N; ++k) data[base + k * stride] = line[k];
        }
    }
}

/// Centered dual lattice: storage slot s on each axis holds frequency s - N/2.
inline int freq_of_slot(int s, int N) { return s - N / 2; }
inline int slot_of_freq(int f, int N) { return f + N / 2; }

/// Evaluates T[j] = sum_f A[f] exp(sign_ax * i * f_ax * x_ax) at grid points x = 2*pi*j/N,
/// from a centered spectrum A (slot s <-> frequency s - N/2 per axis). Un-normalized.
inline std::vector<cplx> eval_from_centered_spectrum(std::vector<cplx> spec, int dim, int N,
                                                     const std::vector<int>& signs)
{
    GridIndexer g{dim, N};
    // exp(i*(s - N/2)*2*pi*j/N) = (-1)^j * exp(i*s*2*pi*j/N): fold the shift into parities.
    fft_nd(spec, dim, N, signs);
    std::vector<int> idx(dim, 0);
    std::int64_t f = 0;
    do {
        int parity = 0;
        for (int i = 0; i < dim; ++i) parity += idx[i];
        if (parity & 1) spec[f] = -spec[f];
        ++f;
    } while (g.next(idx));
    return spec;
}

/// Evaluates S[f] = sum_j v[j] exp(sign_ax * i * f_ax * x_ax), x = 2*pi*j/N, centered slots.
inline std::vector<cplx> centered_spectrum_from_values(std::vector<cplx> v, int dim, int N,
                                                       const std::vector<int>& signs)
{
    GridIndexer g{dim, N};
    std::vector<int> idx(dim, 0);
    std::int64_t f = 0;
    do {
        int parity = 0;
        for (int i = 0; i < dim; ++i) parity += idx[i];
        if (parity & 1) v[f] = -v[f];
        ++f;
    } while (g.next(idx));
    fft_nd(v, dim, N, signs);
    return v;
}

} // namespace relcalc

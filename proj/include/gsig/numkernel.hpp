#pragma once

#include "gsig/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace gsig {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

/// xoshiro256** seeded through splitmix64.
///
/// Streams are fully specified so that other implementations can reproduce
/// them bit for bit:
///  - state[i] = splitmix64 outputs 1..4 starting from `seed`
///  - uniform01() = (next() >> 11) * 2^-53, in [0, 1)
///  - normal()    = sqrt(-2 ln(1 - u1)) * cos(2 pi u2), two uniforms per draw
///  - below(n)    = rejection sampling on next() with threshold 2^64 mod n
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next();
    double uniform01();
    double normal();
    std::uint64_t below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }

    /// Independent sub-stream for (seed, stream) pairs, e.g. one per sample.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a, used to derive seeds from names.
std::uint64_t fnv1a(const std::string& text);

Matrix matmul(const Matrix& a, const Matrix& b);

Matrix sample_gaussian(Rng& rng, Index rows, Index cols, double mean, double variance);
Matrix sample_uniform(Rng& rng, Index rows, Index cols, double lo, double hi);

/// Uniformly random permutation of 0..n-1 (Fisher-Yates, back to front).
std::vector<Index> random_permutation(Rng& rng, Index n);

template <typename Scalar>
struct SymmetricEigen {
    VectorX<Scalar> values;   // descending
    MatrixX<Scalar> vectors;  // column i pairs with values(i)
    int sweeps = 0;
};

namespace detail {

template <typename Scalar>
Scalar off_diagonal_norm(const MatrixX<Scalar>& a) {
    Scalar sum = 0;
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
}

} // namespace detail

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps over all (p, q) pairs until the off-diagonal Frobenius norm drops
/// to n * eps * ||s||_F, at most `max_sweeps` times. Eigenvalues come back in
/// decreasing order; each eigenvector has its largest-magnitude component
/// made non-negative. Equal eigenvalues keep a deterministic order: ties are
/// broken by comparing the eigenvectors lexicographically, larger first.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> symmetric_eig(const Eigen::MatrixBase<Derived>& s,
                                                       typename Derived::Scalar tol,
                                                       int max_sweeps = 100) {
    using Scalar = typename Derived::Scalar;
    const Index n = s.rows();
    if (s.rows() != s.cols()) throw ValidationError("symmetric_eig: matrix is not square");
    if (!s.allFinite()) throw ValidationError("symmetric_eig: matrix has non-finite entries");
    const Scalar asym = n == 0 ? Scalar(0) : (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol) throw ValidationError("symmetric_eig: matrix is not symmetric within tolerance");

    MatrixX<Scalar> a = (s + s.transpose()) / Scalar(2);
    MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
    const Scalar norm = a.norm();
    const Scalar threshold = Scalar(std::max<Index>(n, 1)) * std::numeric_limits<Scalar>::epsilon() * norm;

    int sweep = 0;
    while (detail::off_diagonal_norm(a) > threshold) {
        if (sweep == max_sweeps)
            throw NumericError("symmetric_eig: no convergence after " + std::to_string(max_sweeps) + " sweeps");
        ++sweep;
        for (Index p = 0; p < n - 1; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const Scalar apq = a(p, q);
                if (apq == Scalar(0)) continue;
                const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
                const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                                 (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
                const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
                const Scalar sn = t * c;
                for (Index r = 0; r < n; ++r) {
                    const Scalar arp = a(r, p);
                    const Scalar arq = a(r, q);
                    a(r, p) = c * arp - sn * arq;
                    a(r, q) = sn * arp + c * arq;
                }
                for (Index r = 0; r < n; ++r) {
                    const Scalar apr = a(p, r);
                    const Scalar aqr = a(q, r);
                    a(p, r) = c * apr - sn * aqr;
                    a(q, r) = sn * apr + c * aqr;
                }
                a(p, q) = Scalar(0);
                a(q, p) = Scalar(0);
                for (Index r = 0; r < n; ++r) {
                    const Scalar vrp = v(r, p);
                    const Scalar vrq = v(r, q);
                    v(r, p) = c * vrp - sn * vrq;
                    v(r, q) = sn * vrp + c * vrq;
                }
            }
        }
    }

    for (Index j = 0; j < n; ++j) {
        Index arg = 0;
        for (Index i = 1; i < n; ++i)
            if (std::abs(v(i, j)) > std::abs(v(arg, j))) arg = i;
        if (v(arg, j) < 0) v.col(j) = -v.col(j);
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
        if (a(x, x) != a(y, y)) return a(x, x) > a(y, y);
        for (Index i = 0; i < n; ++i)
            if (v(i, x) != v(i, y)) return v(i, x) > v(i, y);
        return false;
    });

    SymmetricEigen<Scalar> out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index j = 0; j < n; ++j) {
        out.values(j) = a(order[j], order[j]);
        out.vectors.col(j) = v.col(order[j]);
    }
    out.sweeps = sweep;
    return out;
}

} // namespace gsig

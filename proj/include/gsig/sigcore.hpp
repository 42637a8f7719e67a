#pragma once

#include "gsig/numkernel.hpp"

#include <span>
#include <string>
#include <vector>

namespace gsig {

/// A matrix read as a path: row t is the sample at time t, column i is the
/// i-th coordinate path. Between samples the path is linearly interpolated.
class SampledPath {
public:
    SampledPath() = default;
    explicit SampledPath(Matrix values);

    Index steps() const { return values_.rows(); }
    Index coords() const { return values_.cols(); }
    const Matrix& values() const { return values_; }

    /// Row-wise increments, (steps - 1) x coords.
    Matrix increments() const;

private:
    Matrix values_;
};

/// Number of terms of the depth-m signature of a d-dimensional path,
/// including the leading 1.
std::size_t signature_term_count(std::size_t d, std::size_t m);

/// Truncated signature stored level by level. Level l holds d^l terms with
/// the multi-index (i_1, ..., i_l) at flat position sum_j i_j d^(l-j), so
/// each level is in lexicographic order. Indices are zero-based.
template <typename Scalar>
class TruncatedSignature {
public:
    TruncatedSignature(Index dim, int depth) : dim_(dim), depth_(depth), levels_(depth + 1) {
        Index size = 1;
        for (int l = 0; l <= depth; ++l) {
            levels_[l] = VectorX<Scalar>::Zero(size);
            size *= dim;
        }
        levels_[0](0) = Scalar(1);
    }

    Index dim() const { return dim_; }
    int depth() const { return depth_; }

    const VectorX<Scalar>& level(int l) const { return levels_.at(l); }
    VectorX<Scalar>& level(int l) { return levels_.at(l); }

    Scalar at(std::span<const int> multi_index) const {
        if (static_cast<int>(multi_index.size()) > depth_)
            throw ValidationError("TruncatedSignature::at: multi-index longer than depth");
        Index flat = 0;
        for (int i : multi_index) {
            if (i < 0 || i >= dim_) throw ValidationError("TruncatedSignature::at: index out of range");
            flat = flat * dim_ + i;
        }
        return levels_[multi_index.size()](flat);
    }

    Scalar at(std::initializer_list<int> multi_index) const {
        return at(std::span<const int>(multi_index.begin(), multi_index.size()));
    }

    std::size_t term_count() const {
        std::size_t n = 0;
        for (const auto& l : levels_) n += static_cast<std::size_t>(l.size());
        return n;
    }

    /// All terms, level 0 first.
    VectorX<Scalar> flatten() const {
        VectorX<Scalar> out(static_cast<Index>(term_count()));
        Index pos = 0;
        for (const auto& l : levels_) {
            out.segment(pos, l.size()) = l;
            pos += l.size();
        }
        return out;
    }

private:
    Index dim_;
    int depth_;
    std::vector<VectorX<Scalar>> levels_;
};

using Signature = TruncatedSignature<double>;

/// Signature of a single linear segment: the truncated tensor exponential
/// of the increment, level l = increment^{(x) l} / l!.
template <typename Scalar>
TruncatedSignature<Scalar> segment_signature(const VectorX<Scalar>& increment, int depth) {
    TruncatedSignature<Scalar> sig(increment.size(), depth);
    for (int l = 1; l <= depth; ++l) {
        const auto& prev = sig.level(l - 1);
        auto& cur = sig.level(l);
        const Index d = increment.size();
        for (Index i = 0; i < prev.size(); ++i)
            for (Index j = 0; j < d; ++j) cur(i * d + j) = prev(i) * increment(j) / Scalar(l);
    }
    return sig;
}

/// Tensor (Chen) product truncated at the common depth: the signature of
/// the concatenation of the path of `a` followed by the path of `b`.
template <typename Scalar>
TruncatedSignature<Scalar> chen_product(const TruncatedSignature<Scalar>& a, const TruncatedSignature<Scalar>& b) {
    if (a.dim() != b.dim() || a.depth() != b.depth())
        throw ValidationError("chen_product: signatures differ in dimension or depth");
    TruncatedSignature<Scalar> out(a.dim(), a.depth());
    for (int l = 1; l <= a.depth(); ++l) {
        auto& dst = out.level(l);
        for (int i = 0; i <= l; ++i) {
            const auto& left = a.level(i);
            const auto& right = b.level(l - i);
            for (Index x = 0; x < left.size(); ++x) {
                if (left(x) == Scalar(0)) continue;
                dst.segment(x * right.size(), right.size()) += left(x) * right;
            }
        }
    }
    return out;
}

/// Exact signature of the piecewise-linear interpolant of `path`, up to
/// level `depth`, built by chaining segment exponentials.
Signature truncated_signature(const SampledPath& path, int depth);

/// `second` translated to start where `first` ends, appended without
/// repeating the joint sample.
SampledPath concatenate(const SampledPath& first, const SampledPath& second);

/// Cumulative lead-lag path of a scalar dataset. Column 0 is the lead
/// component, column 1 the lag component. With C_k the running sums
/// (C_0 = 0) the path visits (C_0, C_0), (C_1, C_0), (C_1, C_1), ...
/// so the lead moves first on every step.
SampledPath lead_lag_embed(std::span<const double> samples);

struct Moments {
    double mean = 0;
    double variance = 0;
};

/// Mean and population variance read off the depth-2 signature of the
/// lead-lag path:
///   mean     = S^lead / N
///   variance = (N - 1) / N^2 * S^{lead,lag} - (N + 1) / N^2 * S^{lag,lead}
Moments moments_from_signature(std::span<const double> samples);

/// Human readable statement of the index convention used above.
std::string lead_lag_convention();

struct ReservoirResult {
    Vector final_state;  // z_T
    Matrix states;       // steps x k, row t = z_t, row 0 = z_0
};

/// Classical randomized signature: fixed dense A_i, b_i ~ N(0, 1), z_0 ~ N(0, 1),
/// z_t = z_{t-1} + sum_i tanh(A_i z_{t-1} + b_i) (X_t^i - X_{t-1}^i).
ReservoirResult randomized_signature_reference(const SampledPath& path, Index k, Rng& rng);

} // namespace gsig

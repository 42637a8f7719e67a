#pragma once

#include "gsig/numkernel.hpp"
#include "gsig/tensor_view.hpp"

#include <string>
#include <vector>

namespace gsig {

enum class Activation { ScaledIdentity, Identity, Sigmoid, Tanh };

Activation parse_activation(const std::string& text);
std::string to_string(Activation a);

/// The three learning adjustments plus trainability.
struct LayerOptions {
    bool sparse = true;        // one trainable non-zero per row of each A_i
    bool scaled_init = true;   // A_i, b_i, z0 ~ N(0, 1/k) instead of N(0, 1)
    Activation activation = Activation::ScaledIdentity;
    bool trainable = true;     // false keeps A_i and b_i fixed
};

/// Parameters of one learnable randomized-signature layer.
///
/// A_i (kp x k, kp = k * heads) is stored column-wise: column i of `a`
/// holds the row_nnz values of every row of A_i, row-major; `a_cols` holds
/// the matching column indices in the same order. The pattern is fixed at
/// init. b_i is column i of `b`.
struct LayerParams {
    Index n_coords = 0;
    Index k = 0;
    Index heads = 0;
    Index row_nnz = 0;
    Activation activation = Activation::ScaledIdentity;
    double scale = 1.0;
    bool trainable = true;

    std::vector<int> a_cols;
    Matrix a;       // (kp * row_nnz) x n_coords
    Matrix b;       // kp x n_coords
    Matrix w_fwd;   // k x kp
    Matrix w_bwd;   // k x kp
    Vector o_fwd;   // k
    Vector o_bwd;   // k
    Vector z0;      // k
    Matrix proj;    // n_coords x 2k

    Index kp() const { return k * heads; }
    int col_of(Index coord, Index row, Index e) const {
        return a_cols[static_cast<std::size_t>((coord * kp() + row) * row_nnz + e)];
    }

    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        f("a", self.a, self.trainable);
        f("b", self.b, self.trainable);
        f("w_fwd", self.w_fwd, true);
        f("w_bwd", self.w_bwd, true);
        f("o_fwd", self.o_fwd, true);
        f("o_bwd", self.o_bwd, true);
        f("z0", self.z0, true);
        f("proj", self.proj, true);
    }

    std::vector<TensorView> tensors();
    std::vector<ConstTensorView> tensors() const;

    /// Trainable scalars (A_i values count only pattern entries).
    Index trainable_count() const;
    /// Scalars of all A_i together, trainable or not.
    Index a_parameter_count() const { return a.size(); }
};

/// Gradient buffers shaped like LayerParams.
struct LayerGrads {
    Matrix a, b, w_fwd, w_bwd;
    Vector o_fwd, o_bwd, z0;
    Matrix proj;

    static LayerGrads zeros_like(const LayerParams& p);

    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        f("a", self.a, true);
        f("b", self.b, true);
        f("w_fwd", self.w_fwd, true);
        f("w_bwd", self.w_bwd, true);
        f("o_fwd", self.o_fwd, true);
        f("o_bwd", self.o_bwd, true);
        f("z0", self.z0, true);
        f("proj", self.proj, true);
    }

    std::vector<TensorView> tensors();
    std::vector<ConstTensorView> tensors() const;
    LayerGrads& operator+=(const LayerGrads& other);
};

enum class Direction { Forward, Backward };

struct SigPass {
    Matrix z_rows;  // h1 x k, original row order; row r = state after consuming row r
    Matrix states;  // (h1 + 1) x k in processing order, row 0 = z0
};

struct LayerCache {
    const LayerParams* owner = nullptr;
    Matrix x;
    SigPass fwd;
    SigPass bwd;
    Matrix z;  // h1 x 2k = [fwd | bwd]
    bool valid = false;
};

struct LayerBackward {
    Matrix d_x;
    LayerGrads grads;
};

/// Draws a layer in a fixed order: pattern, A values, b, z0, w_fwd, o_fwd,
/// w_bwd, o_bwd, proj. Gaussian entries use variance 1/k (scaled_init) or
/// 1; W and o use U(-1/sqrt(kp), 1/sqrt(kp)); proj uses U(-1/sqrt(2k), 1/sqrt(2k)).
LayerParams init_layer(Index n_coords, Index k, Index heads, Rng& rng, const LayerOptions& options);

/// One directional pass of
///   dz_j = W (sum_i sigma(A_i z_{j-1} + b_i) x_j^i) + o,   z_j = z_{j-1} + dz_j
/// over the rows of x (reversed for Direction::Backward, which uses
/// w_bwd / o_bwd). Throws NumericError with the 1-based step on a
/// non-finite state.
SigPass sig_forward(const LayerParams& params, const Matrix& x, Direction dir);

/// Same recurrence without the finiteness check; used for instrumentation.
SigPass sig_forward_unchecked(const LayerParams& params, const Matrix& x, Direction dir);

/// x + [Z_fwd | Z_bwd] proj^T.
Matrix layer_forward(const LayerParams& params, const Matrix& x, LayerCache& cache);

LayerBackward layer_backward(const LayerParams& params, const LayerCache& cache, const Matrix& d_next);

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;  // every trainable tensor plus "x"
    double max_rel_error = 0;
};

/// Relative error used by all gradient checks:
/// |analytic - numeric| / max(|analytic|, |numeric|, floor), floor = 1e-6.
double gradient_rel_error(double analytic, double numeric);

/// Five-point central difference; `at(offset)` evaluates the loss with the
/// probed entry shifted by `offset`.
template <typename F>
double stencil_derivative(F&& at, double eps) {
    return (8 * (at(eps) - at(-eps)) - (at(2 * eps) - at(-2 * eps))) / (12 * eps);
}

/// Finite differences of sum(layer_forward(x)^2) against layer_backward.
GradCheckReport grad_check_report(const LayerParams& params, const Matrix& x, double eps);
double grad_check(const LayerParams& params, const Matrix& x, double eps);

struct MavTrace {
    Vector mav;         // h1, mean_i |z_j[i]|
    Matrix per_k;       // h1 x k, |z_j[i]|
};

/// Forward-direction state magnitudes per step (unchecked recurrence).
MavTrace mav_trace(const LayerParams& params, const Matrix& x);

} // namespace gsig

#pragma once

#include "gsig/numkernel.hpp"

#include <limits>
#include <optional>
#include <string>

namespace gsig {

/// Adjacency entry for "no edge".
inline constexpr double kNoEdge = std::numeric_limits<double>::infinity();

struct Graph {
    Matrix adjacency;      // n x n, symmetric, zero diagonal, kNoEdge where absent
    Matrix node_features;  // d x n, may have zero rows

    Index nodes() const { return adjacency.rows(); }
    Index feature_dims() const { return node_features.rows(); }

    /// Throws ValidationError if the invariants above do not hold.
    void validate() const;
};

struct EdgeEmbedding {
    Matrix coords;          // n x m, column j = sqrt(lambda_j) v_j
    Vector eigvals_used;    // m leading eigenvalues after any shift, descending
    double shift_applied = 0;  // lambda_min used for the off-diagonal shift, 0 if none
};

enum class InputMode { NodesOnly, EdgesOnly, Both };

InputMode parse_input_mode(const std::string& text);
std::string to_string(InputMode mode);

/// Q = I - (1/n) 1 1^T.
template <typename Scalar = double>
MatrixX<Scalar> centering_matrix(Index n) {
    if (n < 1) throw ValidationError("centering_matrix: n must be >= 1");
    return MatrixX<Scalar>::Identity(n, n) - MatrixX<Scalar>::Constant(n, n, Scalar(1) / Scalar(n));
}

/// Centered scoring matrix -1/2 Q D Q.
Matrix scoring_matrix(const Matrix& dissimilarity);

/// D - 2 lambda_min (1 1^T - I): shifts every off-diagonal entry, which
/// shifts the spectrum of the centered scoring matrix by -lambda_min.
Matrix diagonal_shift(const Matrix& dissimilarity, double lambda_min);

/// Classical-MDS embedding of a dissimilarity matrix into m dimensions.
///
/// When the scoring matrix has an eigenvalue below -tol the dissimilarity
/// is shifted first. The default tol is 1e-10 * ||S||_F. Remaining tiny
/// negative eigenvalues are clamped to zero before the square root.
EdgeEmbedding edge_embedding(const Matrix& dissimilarity, Index m, std::optional<double> tol = std::nullopt);

/// Rows: node features first, then embedding coordinates. Columns follow
/// the graph's node order.
Matrix stack_inputs(const Graph& g, const EdgeEmbedding* embedding, InputMode mode);

/// Replace kNoEdge entries by `cap`.
Matrix sanitize_adjacency(const Graph& g, double cap);

/// n times the largest finite edge weight (1 for a graph without edges).
double default_cap(const Graph& g);

} // namespace gsig

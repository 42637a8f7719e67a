#include "gsig/graphconv.hpp"

#include <cmath>

namespace gsig {

namespace {

void require_symmetric(const Matrix& d, const char* who) {
    if (d.rows() != d.cols()) throw ValidationError(std::string(who) + ": matrix is not square");
    for (Index i = 0; i < d.rows(); ++i)
        for (Index j = i + 1; j < d.cols(); ++j) {
            const double x = d(i, j);
            const double y = d(j, i);
            if (x == y) continue;
            const double scale = std::max({1.0, std::abs(x), std::abs(y)});
            if (!(std::abs(x - y) <= 1e-12 * scale))
                throw ValidationError(std::string(who) + ": matrix is not symmetric");
        }
}

} // namespace

void Graph::validate() const {
    const Index n = adjacency.rows();
    if (n < 1) throw ValidationError("Graph: needs at least one node");
    if (adjacency.cols() != n) throw ValidationError("Graph: adjacency is not square");
    if (node_features.size() > 0 && node_features.cols() != n)
        throw ValidationError("Graph: node feature columns do not match node count");
    for (Index i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0) throw ValidationError("Graph: non-zero diagonal");
        for (Index j = 0; j < n; ++j) {
            const double w = adjacency(i, j);
            if (std::isnan(w) || w == -kNoEdge) throw ValidationError("Graph: invalid adjacency entry");
            if (w != adjacency(j, i)) throw ValidationError("Graph: adjacency is not symmetric");
        }
    }
    if (!node_features.allFinite()) throw ValidationError("Graph: non-finite node feature");
}

InputMode parse_input_mode(const std::string& text) {
    if (text == "nodes-only") return InputMode::NodesOnly;
    if (text == "edges-only") return InputMode::EdgesOnly;
    if (text == "both") return InputMode::Both;
    throw ValidationError("unknown input mode '" + text + "'");
}

std::string to_string(InputMode mode) {
    switch (mode) {
    case InputMode::NodesOnly: return "nodes-only";
    case InputMode::EdgesOnly: return "edges-only";
    case InputMode::Both: return "both";
    }
    return "?";
}

Matrix scoring_matrix(const Matrix& dissimilarity) {
    const Matrix q = centering_matrix(dissimilarity.rows());
    Matrix s = -0.5 * (q * dissimilarity * q);
    // exact symmetry so the eigensolver sees a symmetric input
    return 0.5 * (s + s.transpose());
}

Matrix diagonal_shift(const Matrix& dissimilarity, double lambda_min) {
    require_symmetric(dissimilarity, "diagonal_shift");
    const Index n = dissimilarity.rows();
    Matrix off = Matrix::Ones(n, n) - Matrix::Identity(n, n);
    return dissimilarity - 2.0 * lambda_min * off;
}

EdgeEmbedding edge_embedding(const Matrix& dissimilarity, Index m, std::optional<double> tol) {
    require_symmetric(dissimilarity, "edge_embedding");
    const Index n = dissimilarity.rows();
    if (m <= 0 || m >= n) throw ValidationError("edge_embedding: need 0 < m < n");
    if (!dissimilarity.allFinite()) throw ValidationError("edge_embedding: non-finite dissimilarity");

    Matrix s = scoring_matrix(dissimilarity);
    const double threshold = tol.value_or(1e-10 * s.norm());
    const double sym_tol = 1e-12 * std::max(1.0, s.norm());
    auto eig = symmetric_eig(s, sym_tol);

    EdgeEmbedding out;
    const double lambda_min = eig.values(n - 1);
    if (lambda_min < -threshold) {
        s = scoring_matrix(diagonal_shift(dissimilarity, lambda_min));
        eig = symmetric_eig(s, sym_tol);
        out.shift_applied = lambda_min;
    }

    out.eigvals_used = eig.values.head(m);
    const Vector root = out.eigvals_used.cwiseMax(0.0).cwiseSqrt();
    out.coords = eig.vectors.leftCols(m) * root.asDiagonal();
    return out;
}

Matrix stack_inputs(const Graph& g, const EdgeEmbedding* embedding, InputMode mode) {
    const Index n = g.nodes();
    const bool use_nodes = mode != InputMode::EdgesOnly;
    const bool use_edges = mode != InputMode::NodesOnly;
    if (use_nodes && g.feature_dims() == 0) throw ValidationError("stack_inputs: graph has no node features");
    if (use_edges && embedding == nullptr) throw ValidationError("stack_inputs: edge embedding required");
    if (use_edges && embedding->coords.rows() != n)
        throw ValidationError("stack_inputs: embedding does not match node count");
    if (use_nodes && !g.node_features.allFinite()) throw ValidationError("stack_inputs: non-finite node features");

    const Index d = use_nodes ? g.feature_dims() : 0;
    const Index m = use_edges ? embedding->coords.cols() : 0;
    Matrix out(d + m, n);
    if (use_nodes) out.topRows(d) = g.node_features;
    if (use_edges) out.bottomRows(m) = embedding->coords.transpose();
    return out;
}

Matrix sanitize_adjacency(const Graph& g, double cap) {
    g.validate();
    double max_weight = 0;
    for (Index i = 0; i < g.adjacency.size(); ++i) {
        const double w = g.adjacency.data()[i];
        if (w != kNoEdge) max_weight = std::max(max_weight, w);
    }
    if (!(cap > max_weight) || !std::isfinite(cap))
        throw ValidationError("sanitize_adjacency: cap must be finite and exceed the largest edge weight");
    Matrix out = g.adjacency;
    for (Index i = 0; i < out.size(); ++i)
        if (out.data()[i] == kNoEdge) out.data()[i] = cap;
    return out;
}

double default_cap(const Graph& g) {
    double max_weight = 0;
    for (Index i = 0; i < g.adjacency.size(); ++i) {
        const double w = g.adjacency.data()[i];
        if (w != kNoEdge) max_weight = std::max(max_weight, w);
    }
    if (max_weight == 0) max_weight = 1;
    return static_cast<double>(g.nodes()) * max_weight;
}

} // namespace gsig

#include "oracles.hpp"

#include "gsig/graphconv.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace gsig;

namespace {

Matrix random_symmetric_dissimilarity(Rng& rng, Index n) {
    Matrix d = sample_uniform(rng, n, n, 0.1, 2.0);
    d = 0.5 * (d + d.transpose()).eval();
    d.diagonal().setZero();
    return d;
}

// Rank-m truncation of the centered scoring matrix, shifted to PSD first
// when needed, computed with Eigen's own solver.
Matrix reference_gram(const Matrix& dissim, Index m) {
    const Index n = dissim.rows();
    Matrix q = Matrix::Identity(n, n);
    q.array() -= 1.0 / static_cast<double>(n);
    Matrix s = -0.5 * q * dissim * q;
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    const double lmin = es.eigenvalues()(0);
    if (lmin < -1e-10 * s.norm()) {
        Matrix shifted = dissim;
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (i != j) shifted(i, j) -= 2.0 * lmin;
        s = -0.5 * q * shifted * q;
        es.compute(s);
    }
    Matrix g = Matrix::Zero(n, n);
    for (Index j = n - m; j < n; ++j) {
        const double lam = std::max(0.0, es.eigenvalues()(j));
        g += lam * es.eigenvectors().col(j) * es.eigenvectors().col(j).transpose();
    }
    return g;
}

} // namespace

TEST_CASE("centering matrix annihilates constants") {
    const Matrix q = centering_matrix(5);
    CHECK((q * Vector::Ones(5)).norm() < 1e-15);
    CHECK((q * q - q).norm() < 1e-14);
    CHECK_THROWS_AS(centering_matrix(0), ValidationError);
}

TEST_CASE("collinear points embed exactly in one dimension") {
    const std::vector<double> xs{0.0, 1.0, 3.0, 7.5};
    Matrix d(4, 4);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) d(i, j) = (xs[i] - xs[j]) * (xs[i] - xs[j]);
    const EdgeEmbedding e = edge_embedding(d, 1);
    CHECK(e.shift_applied == 0.0);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j)
            CHECK(std::abs(std::abs(e.coords(i, 0) - e.coords(j, 0)) - std::abs(xs[i] - xs[j])) < 1e-8);
}

TEST_CASE("euclidean point sets are recovered up to rigid motion") {
    Rng rng(21);
    const Matrix pts = sample_gaussian(rng, 12, 3, 0, 1);
    Matrix d(12, 12);
    for (Index i = 0; i < 12; ++i)
        for (Index j = 0; j < 12; ++j) d(i, j) = (pts.row(i) - pts.row(j)).squaredNorm();
    const EdgeEmbedding e = edge_embedding(d, 3);
    for (Index i = 0; i < 12; ++i)
        for (Index j = 0; j < 12; ++j)
            CHECK(std::abs((e.coords.row(i) - e.coords.row(j)).squaredNorm() - d(i, j)) < 1e-9);
}

TEST_CASE("gram matrix equals the rank-m eigentruncation") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix d = random_symmetric_dissimilarity(rng, 10);
        for (Index m : {1, 3, 5}) {
            const EdgeEmbedding e = edge_embedding(d, m);
            CHECK((e.coords * e.coords.transpose() - reference_gram(d, m)).norm() < 1e-9);
            CHECK(e.eigvals_used.size() == m);
        }
    }
}

TEST_CASE("indefinite scores trigger the diagonal shift and become PSD") {
    Rng rng(23);
    const Matrix d = random_symmetric_dissimilarity(rng, 10);
    Eigen::SelfAdjointEigenSolver<Matrix> before(scoring_matrix(d));
    REQUIRE(before.eigenvalues()(0) < 0);
    const EdgeEmbedding e = edge_embedding(d, 3);
    CHECK(e.shift_applied == doctest::Approx(before.eigenvalues()(0)).epsilon(1e-9));
    Eigen::SelfAdjointEigenSolver<Matrix> after(scoring_matrix(diagonal_shift(d, e.shift_applied)));
    CHECK(after.eigenvalues()(0) > -1e-9);
    // Shifting every off-diagonal entry moves the non-null spectrum by -lambda_min.
    CHECK(after.eigenvalues()(9) == doctest::Approx(before.eigenvalues()(9) - e.shift_applied).epsilon(1e-9));
}

TEST_CASE("gram matrix is permutation equivariant") {
    Rng rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix d = random_symmetric_dissimilarity(rng, 10);
        const auto perm = random_permutation(rng, 10);
        Matrix p = Matrix::Zero(10, 10);
        for (Index i = 0; i < 10; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1;
        const Matrix dp = p * d * p.transpose();
        const EdgeEmbedding e = edge_embedding(d, 3);
        const EdgeEmbedding ep = edge_embedding(dp, 3);
        const Matrix g = e.coords * e.coords.transpose();
        const Matrix gp = ep.coords * ep.coords.transpose();
        CHECK((gp - p * g * p.transpose()).norm() < 1e-9);
    }
}

TEST_CASE("edge embedding rejects bad input") {
    Matrix asym = Matrix::Zero(3, 3);
    asym(0, 1) = 1;
    CHECK_THROWS_AS(edge_embedding(asym, 1), ValidationError);
    CHECK_THROWS_AS(edge_embedding(Matrix::Zero(3, 3), 3), ValidationError);
    CHECK_THROWS_AS(edge_embedding(Matrix::Zero(3, 3), 0), ValidationError);
    Matrix inf = Matrix::Zero(3, 3);
    inf(0, 1) = inf(1, 0) = kNoEdge;
    CHECK_THROWS_AS(edge_embedding(inf, 1), ValidationError);
}

TEST_CASE("stack_inputs orders node features before coordinates") {
    Graph g{Matrix::Zero(3, 3), Matrix::Constant(2, 3, 7.0)};
    EdgeEmbedding e;
    e.coords = Matrix::Constant(3, 1, -1.0);
    const Matrix both = stack_inputs(g, &e, InputMode::Both);
    CHECK(both.rows() == 3);
    CHECK(both.row(0).isConstant(7.0));
    CHECK(both.row(2).isConstant(-1.0));
    CHECK(stack_inputs(g, nullptr, InputMode::NodesOnly).rows() == 2);
    CHECK(stack_inputs(g, &e, InputMode::EdgesOnly).rows() == 1);
    CHECK_THROWS_AS(stack_inputs(g, nullptr, InputMode::Both), ValidationError);
    Graph bare{Matrix::Zero(3, 3), Matrix(0, 3)};
    CHECK_THROWS_AS(stack_inputs(bare, &e, InputMode::NodesOnly), ValidationError);
    CHECK(parse_input_mode(to_string(InputMode::Both)) == InputMode::Both);
    CHECK_THROWS_AS(parse_input_mode("all"), ValidationError);
}

TEST_CASE("sanitize replaces missing edges by the cap") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 1) = a(1, 0) = 0.5;
    a(0, 2) = a(2, 0) = a(1, 2) = a(2, 1) = kNoEdge;
    const Graph g{a, Matrix(0, 3)};
    CHECK(default_cap(g) == doctest::Approx(1.5));
    const Matrix s = sanitize_adjacency(g, default_cap(g));
    CHECK(s(0, 2) == doctest::Approx(1.5));
    CHECK(s(0, 1) == 0.5);
    CHECK_THROWS_AS(sanitize_adjacency(g, 0.4), ValidationError);
    CHECK_THROWS_AS(sanitize_adjacency(g, kNoEdge), ValidationError);
}

TEST_CASE("graph validation") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = 1;
    CHECK_THROWS_AS((Graph{a, Matrix(0, 2)}.validate()), ValidationError);
    a(1, 0) = 1;
    CHECK_NOTHROW((Graph{a, Matrix(0, 2)}.validate()));
    a(0, 0) = 1;
    CHECK_THROWS_AS((Graph{a, Matrix(0, 2)}.validate()), ValidationError);
    CHECK_THROWS_AS((Graph{Matrix::Zero(2, 2), Matrix::Zero(1, 3)}.validate()), ValidationError);
}

TEST_CASE("small centering matrices and the two-node shift") {
    CHECK(centering_matrix<double>(1) == Matrix::Zero(1, 1));
    Matrix two(2, 2);
    two << 0.5, -0.5, -0.5, 0.5;
    CHECK(centering_matrix<double>(2) == two);

    Matrix d(2, 2);
    d << 0, 1, 1, 0;
    CHECK(diagonal_shift(d, 0.0) == d);
    Matrix shifted(2, 2);
    shifted << 0, 3, 3, 0;
    CHECK(diagonal_shift(d, -1.0) == shifted);
}

TEST_CASE("zero dissimilarity embeds every node at the origin") {
    const EdgeEmbedding e = edge_embedding(Matrix::Zero(6, 6), 2);
    CHECK(e.coords.rows() == 6);
    CHECK(e.coords.cols() == 2);
    CHECK(e.coords.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("500 points in three dimensions give a 3 x 500 edge input") {
    Rng rng(51);
    const Matrix pts = sample_gaussian(rng, 500, 3, 0, 1);
    Matrix d(500, 500);
    for (Index i = 0; i < 500; ++i)
        for (Index j = 0; j < 500; ++j) d(i, j) = (pts.row(i) - pts.row(j)).squaredNorm();
    const EdgeEmbedding e = edge_embedding(d, 3);
    const Graph g{Matrix::Zero(500, 500), Matrix(0, 500)};
    const Matrix in = stack_inputs(g, &e, InputMode::EdgesOnly);
    CHECK(in.rows() == 3);
    CHECK(in.cols() == 500);
    CHECK(e.shift_applied == 0.0);
    Matrix recovered(500, 500);
    for (Index i = 0; i < 500; ++i)
        for (Index j = 0; j < 500; ++j) recovered(i, j) = (e.coords.row(i) - e.coords.row(j)).squaredNorm();
    CHECK((recovered - d).cwiseAbs().maxCoeff() < 1e-8 * d.maxCoeff());
}

TEST_CASE("sanitized sparse graphs feed the edge embedding") {
    Rng rng(52);
    const Index n = 50;
    Matrix a = Matrix::Constant(n, n, kNoEdge);
    a.diagonal().setZero();
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (rng.uniform01() < 0.1) a(i, j) = a(j, i) = 0.5 + rng.uniform01();
    const Graph g{a, Matrix(0, n)};
    const Matrix s = sanitize_adjacency(g, default_cap(g));
    CHECK(s.allFinite());
    const EdgeEmbedding e = edge_embedding(s, 3);
    CHECK(e.coords.allFinite());
    CHECK(e.coords.rows() == n);

    Matrix full = Matrix::Ones(4, 4);
    full.diagonal().setZero();
    const Graph complete{full, Matrix(0, 4)};
    CHECK(sanitize_adjacency(complete, default_cap(complete)) == full);

    Matrix one_gap = full;
    one_gap(0, 3) = one_gap(3, 0) = kNoEdge;
    const Matrix capped = sanitize_adjacency(Graph{one_gap, Matrix(0, 4)}, 100.0);
    CHECK(capped(0, 3) == 100.0);
    CHECK(capped(3, 0) == 100.0);
}

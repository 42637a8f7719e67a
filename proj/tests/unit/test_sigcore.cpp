#include "oracles.hpp"

#include "gsig/sigcore.hpp"

#include <doctest.h>

using namespace gsig;

TEST_CASE("term counts follow the geometric series") {
    CHECK(signature_term_count(2, 2) == 7);
    CHECK(signature_term_count(3, 3) == 40);
    CHECK(signature_term_count(1, 4) == 5);
    CHECK(signature_term_count(5, 0) == 1);
    for (std::size_t d = 2; d <= 5; ++d)
        for (std::size_t m = 0; m <= 5; ++m) {
            std::size_t pow = 1;
            for (std::size_t i = 0; i <= m; ++i) pow *= d;
            CHECK(signature_term_count(d, m) == (pow - 1) / (d - 1));
            CHECK(Signature(static_cast<Index>(d), static_cast<int>(m)).term_count() == signature_term_count(d, m));
        }
}

TEST_CASE("one-dimensional path has the exponential closed form") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix values = sample_gaussian(rng, 2 + static_cast<Index>(rng.below(20)), 1, 0, 1);
        const double delta = values(values.rows() - 1, 0) - values(0, 0);
        const Signature sig = truncated_signature(SampledPath(values), 5);
        double expected = 1;
        CHECK(sig.level(0)(0) == 1.0);
        for (int l = 1; l <= 5; ++l) {
            expected *= delta / l;
            CHECK(std::abs(sig.level(l)(0) - expected) < 1e-10 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("level two matches the discrete iterated-sum formula and quadrature") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix values = sample_gaussian(rng, 2 + static_cast<Index>(rng.below(12)), 3, 0, 1);
        const Signature sig = truncated_signature(SampledPath(values), 3);
        const Matrix ref = oracle::level2(values);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                CHECK(std::abs(sig.at({i, j}) - ref(i, j)) < 1e-12);
                // Riemann sums with midpoint correction are exact on linear pieces.
                CHECK(std::abs(sig.at({i, j}) - oracle::level2_quadrature(values, i, j, 7)) < 1e-10);
            }
        // Level one is the total increment.
        for (int i = 0; i < 3; ++i) CHECK(std::abs(sig.at({i}) - (values(values.rows() - 1, i) - values(0, i))) < 1e-12);
    }
}

TEST_CASE("shuffle identity: S^{ij} + S^{ji} = S^i S^j") {
    Rng rng(13);
    const Matrix values = sample_gaussian(rng, 9, 2, 0, 1);
    const Signature sig = truncated_signature(SampledPath(values), 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(sig.at({i, j}) + sig.at({j, i}) == doctest::Approx(sig.at({i}) * sig.at({j})).epsilon(1e-12));
}

TEST_CASE("chen identity on random pairs") {
    Rng rng(14);
    for (int trial = 0; trial < 100; ++trial) {
        const SampledPath a(sample_gaussian(rng, 2 + static_cast<Index>(rng.below(8)), 2, 0, 1));
        const SampledPath b(sample_gaussian(rng, 2 + static_cast<Index>(rng.below(8)), 2, 0, 1));
        const Vector joined = truncated_signature(concatenate(a, b), 3).flatten();
        const Vector product = chen_product(truncated_signature(a, 3), truncated_signature(b, 3)).flatten();
        CHECK((joined - product).norm() / product.norm() < 1e-9);
    }
}

TEST_CASE("signature is invariant under refinement and translation") {
    Rng rng(15);
    const Matrix values = sample_gaussian(rng, 6, 2, 0, 1);
    Matrix refined(11, 2);
    for (Index t = 0; t < 5; ++t) {
        refined.row(2 * t) = values.row(t);
        refined.row(2 * t + 1) = 0.5 * (values.row(t) + values.row(t + 1));
    }
    refined.row(10) = values.row(5);
    Matrix shifted = values;
    shifted.rowwise() += Eigen::RowVector2d(3.0, -1.0);
    const Vector base = truncated_signature(SampledPath(values), 4).flatten();
    CHECK((truncated_signature(SampledPath(refined), 4).flatten() - base).norm() < 1e-12);
    CHECK((truncated_signature(SampledPath(shifted), 4).flatten() - base).norm() < 1e-12);
}

TEST_CASE("multi-index layout is lexicographic") {
    Vector inc(2);
    inc << 2.0, 3.0;
    const Signature sig = segment_signature(inc, 2);
    CHECK(sig.level(2)(1) == doctest::Approx(2.0 * 3.0 / 2.0));
    CHECK(sig.at({0, 1}) == doctest::Approx(3.0));
    CHECK_THROWS_AS(sig.at({0, 2}), ValidationError);
    CHECK_THROWS_AS(sig.at({0, 0, 0}), ValidationError);
}

TEST_CASE("paths need two samples and finite values") {
    CHECK_THROWS_AS(SampledPath(Matrix::Zero(1, 3)), ValidationError);
    Matrix bad = Matrix::Zero(3, 1);
    bad(1, 0) = std::nan("");
    CHECK_THROWS_AS(SampledPath{bad}, ValidationError);
    CHECK_THROWS_AS(truncated_signature(SampledPath(Matrix::Zero(2, 1)), 0), ValidationError);
}

TEST_CASE("lead-lag path visits lead first") {
    const std::vector<double> xs{1.0, 2.0, 4.0};
    const SampledPath p = lead_lag_embed(xs);
    Matrix expected(7, 2);
    expected << 0, 0, 1, 0, 1, 1, 3, 1, 3, 3, 7, 3, 7, 7;
    CHECK(p.values() == expected);
    CHECK(!lead_lag_convention().empty());
}

TEST_CASE("lead-lag signature recovers mean and population variance") {
    Rng rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.below(24));
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (double& x : xs) x = 5.0 * rng.normal() - 2.0;
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(n);
        double var = 0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(n);
        const Moments m = moments_from_signature(xs);
        CHECK(std::abs(m.mean - mean) < 1e-9);
        CHECK(std::abs(m.variance - var) < 1e-9);
    }
    CHECK_THROWS_AS(moments_from_signature(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("reservoir is reproducible and starts from z0") {
    Rng data(17);
    const SampledPath path(sample_gaussian(data, 12, 2, 0, 1));
    Rng r1(5), r2(5);
    const ReservoirResult a = randomized_signature_reference(path, 8, r1);
    const ReservoirResult b = randomized_signature_reference(path, 8, r2);
    CHECK(a.final_state == b.final_state);
    CHECK(a.states.rows() == 12);
    CHECK(a.states.row(11).transpose() == a.final_state);
    // A constant path leaves the state at z0.
    Rng r3(5);
    const ReservoirResult flat = randomized_signature_reference(SampledPath(Matrix::Ones(5, 2)), 8, r3);
    CHECK(flat.final_state == flat.states.row(0).transpose());
}

namespace {

// Level-3 terms from the piecewise-linear iterated integrals, accumulated
// segment by segment with running level-1 and level-2 sums.
Vector level3_running(const Matrix& values) {
    const Index d = values.cols();
    Vector p1 = Vector::Zero(d);
    Matrix p2 = Matrix::Zero(d, d);
    Vector out = Vector::Zero(d * d * d);
    for (Index t = 1; t < values.rows(); ++t) {
        const Vector dx = (values.row(t) - values.row(t - 1)).transpose();
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j)
                for (Index k = 0; k < d; ++k)
                    out((i * d + j) * d + k) +=
                        p2(i, j) * dx(k) + 0.5 * p1(i) * dx(j) * dx(k) + dx(i) * dx(j) * dx(k) / 6.0;
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) p2(i, j) += p1(i) * dx(j) + 0.5 * dx(i) * dx(j);
        p1 += dx;
    }
    return out;
}

} // namespace

TEST_CASE("hand-worked signatures") {
    CHECK(signature_term_count(1, 5) == 6);

    Matrix diag(2, 2);
    diag << 0, 0, 1, 1;
    const Signature s = truncated_signature(SampledPath(diag), 2);
    CHECK(s.level(1)(0) == doctest::Approx(1.0));
    CHECK(s.level(1)(1) == doctest::Approx(1.0));
    for (Index i = 0; i < 4; ++i) CHECK(s.level(2)(i) == doctest::Approx(0.5));

    Matrix line(2, 1);
    line << 0, 2;
    const Signature one = truncated_signature(SampledPath(line), 3);
    CHECK(one.level(0)(0) == 1.0);
    CHECK(one.level(1)(0) == doctest::Approx(2.0));
    CHECK(one.level(2)(0) == doctest::Approx(2.0));
    CHECK(one.level(3)(0) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("level three of a 50-step path matches the running-sum integrals") {
    Rng rng(18);
    Matrix v = Matrix::Zero(51, 2);
    for (Index t = 1; t <= 50; ++t) v.row(t) = v.row(t - 1) + 0.3 * sample_gaussian(rng, 1, 2, 0, 1);
    const Signature s = truncated_signature(SampledPath(v), 3);
    const Vector ref = level3_running(v);
    const double rel = (s.level(3) - ref).norm() / ref.norm();
    CHECK(rel < 1e-8);
}

TEST_CASE("lead-lag worked examples") {
    const Signature single = truncated_signature(lead_lag_embed(std::vector<double>{5.0}), 1);
    CHECK(single.level(1)(0) == doctest::Approx(5.0));
    CHECK(single.level(1)(1) == doctest::Approx(5.0));

    const std::vector<double> xs{1.0, 2.0, 3.0};
    const Signature s = truncated_signature(lead_lag_embed(xs), 2);
    CHECK(s.level(1)(0) == doctest::Approx(6.0));
    CHECK(s.level(1)(1) == doctest::Approx(6.0));
    CHECK(s.level(2)(0) == doctest::Approx(18.0));
    CHECK(std::abs(s.level(2)(1) - s.level(2)(2)) == doctest::Approx(14.0));
    const Moments m = moments_from_signature(xs);
    CHECK(m.mean == doctest::Approx(2.0));
    CHECK(m.variance == doctest::Approx(2.0 / 3.0));

    const Moments c = moments_from_signature(std::vector<double>{4.5, 4.5, 4.5});
    CHECK(c.mean == doctest::Approx(4.5));
    CHECK(std::abs(c.variance) < 1e-12);

    Rng rng(19);
    std::vector<double> normal(1000);
    for (double& x : normal) x = rng.normal();
    const Moments n = moments_from_signature(normal);
    CHECK(std::abs(n.mean) < 0.1);
    CHECK(std::abs(n.variance - 1.0) < 0.15);
}

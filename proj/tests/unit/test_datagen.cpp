#include "oracles.hpp"

#include "gsig/datagen.hpp"

#include <doctest.h>

#include <functional>
#include <numbers>
#include <numeric>
#include <set>

using namespace gsig;

namespace {

Matrix random_small_graph(Rng& rng, Index n, double density, bool integer_weights) {
    Matrix a = Matrix::Constant(n, n, kNoEdge);
    a.diagonal().setZero();
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (rng.uniform01() < density)
                a(i, j) = a(j, i) = integer_weights ? static_cast<double>(1 + rng.below(20)) : rng.uniform01();
    return a;
}

bool connected(const Matrix& a) {
    const Index n = a.rows();
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::function<void(Index)> visit = [&](Index v) {
        seen[static_cast<std::size_t>(v)] = true;
        for (Index w = 0; w < n; ++w)
            if (!seen[static_cast<std::size_t>(w)] && w != v && std::isfinite(a(v, w))) visit(w);
    };
    visit(0);
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

Index edge_count(const Matrix& a) {
    Index e = 0;
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = i + 1; j < a.cols(); ++j) e += std::isfinite(a(i, j)) ? 1 : 0;
    return e;
}

} // namespace

TEST_CASE("floyd-warshall agrees with exhaustive simple paths") {
    Rng rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 1 + static_cast<Index>(rng.below(8));
        const bool integer = trial % 2 == 0;
        const Matrix a = random_small_graph(rng, n, 0.2 + 0.6 * rng.uniform01(), integer);
        const Matrix fw = floyd_warshall(a);
        const Matrix ref = oracle::all_simple_paths_min(a);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) {
                if (integer || !std::isfinite(ref(i, j)))
                    CHECK(fw(i, j) == ref(i, j));
                else
                    CHECK(std::abs(fw(i, j) - ref(i, j)) < 1e-12);
            }
    }
}

TEST_CASE("shortest paths satisfy the triangle inequality on 50 nodes") {
    Rng rng(52);
    for (int trial = 0; trial < 3; ++trial) {
        const Graph g = gen_eta_graph(50, 120, rng);
        const Matrix d = floyd_warshall(g.adjacency);
        CHECK(d.allFinite());
        for (Index i = 0; i < 50; ++i) {
            CHECK(d(i, i) == 0.0);
            for (Index j = 0; j < 50; ++j) {
                CHECK(d(i, j) == d(j, i));
                CHECK(d(i, j) <= g.adjacency(i, j));
                for (Index k = 0; k < 50; ++k) CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-12);
            }
        }
    }
}

TEST_CASE("floyd-warshall rejects negative weights") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = a(1, 0) = -1;
    CHECK_THROWS_AS(floyd_warshall(a), ValidationError);
}

TEST_CASE("eta graphs are connected with the requested edge count") {
    Rng rng(53);
    for (Index edges : {49, 120, 300}) {
        const Graph g = gen_eta_graph(50, edges, rng);
        CHECK_NOTHROW(g.validate());
        CHECK(edge_count(g.adjacency) == edges);
        CHECK(connected(g.adjacency));
        for (Index i = 0; i < g.adjacency.size(); ++i) {
            const double w = g.adjacency.data()[i];
            CHECK((w == kNoEdge || (w >= 0 && w <= 1)));
        }
    }
    CHECK_THROWS_AS(gen_eta_graph(50, 48, rng), ValidationError);
    CHECK_THROWS_AS(gen_eta_graph(5, 11, rng), ValidationError);
}

TEST_CASE("eta generation is deterministic and resampling keeps the topology") {
    Rng a(54), b(54);
    const Graph ga = gen_eta_graph(20, 40, a);
    const Graph gb = gen_eta_graph(20, 40, b);
    CHECK(ga.adjacency == gb.adjacency);
    const Graph r = resample_weights(ga, a);
    for (Index i = 0; i < 20; ++i)
        for (Index j = 0; j < 20; ++j) CHECK(std::isfinite(r.adjacency(i, j)) == std::isfinite(ga.adjacency(i, j)));
    CHECK(r.adjacency != ga.adjacency);
}

TEST_CASE("relabelling nodes permutes distances consistently") {
    Rng rng(55);
    const Graph g = gen_eta_graph(12, 20, rng);
    const Matrix d = floyd_warshall(g.adjacency);
    const auto perm = random_permutation(rng, 12);
    const PermutedSample p = permute_graph(g, perm, d);
    CHECK((floyd_warshall(p.graph.adjacency) - *p.target).norm() < 1e-12);
    for (Index i = 0; i < 12; ++i)
        for (Index j = 0; j < 12; ++j)
            CHECK(p.graph.adjacency(i, j) == g.adjacency(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
    const auto inv = invert_permutation(perm);
    const PermutedSample back = permute_graph(p.graph, inv, p.target);
    CHECK(back.graph.adjacency == g.adjacency);
    CHECK_THROWS_AS(invert_permutation({0, 0, 1}), ValidationError);
}

TEST_CASE("kpz single mode decays at the diffusive rate") {
    KpzParams p;
    p.lambda = 0;
    p.noise_std = 0;
    p.n_out_steps = 2;
    const double wave = 2 * std::numbers::pi / p.domain_length;
    Vector u0(p.n_x);
    for (Index j = 0; j < p.n_x; ++j) u0(j) = std::cos(wave * p.dx() * static_cast<double>(j));
    Rng rng(56);
    const KpzTrajectory t = integrate_kpz(u0, p, rng);
    double amp = 0;
    for (Index j = 0; j < p.n_x; ++j) amp += 2.0 / p.n_x * t.u(1, j) * u0(j);
    const double expected = std::exp(-p.nu * wave * wave * p.dt_out);
    CHECK(std::abs(amp / expected - 1) < 0.02);
}

TEST_CASE("kpz without nonlinearity or noise conserves the mean per step") {
    KpzParams p;
    p.lambda = 0;
    p.noise_std = 0;
    p.dt_out = p.dt_solver;
    p.n_out_steps = 200;
    Rng rng(57);
    const KpzTrajectory t = gen_kpz_trajectory(p, rng);
    for (Index s = 1; s < t.u.rows(); ++s) CHECK(std::abs(t.u.row(s).mean() - t.u.row(s - 1).mean()) < 1e-12);
}

TEST_CASE("kpz generation is deterministic and noise changes the result") {
    KpzParams p;
    p.n_out_steps = 5;
    Rng a(58), b(58);
    CHECK(gen_kpz_trajectory(p, a).u == gen_kpz_trajectory(p, b).u);
    KpzParams noisy = p;
    noisy.noise_std = kKpzNoiseHigh;
    Rng c(58), d(58);
    CHECK(gen_kpz_trajectory(noisy, c).u != gen_kpz_trajectory(p, d).u);
}

TEST_CASE("kpz parameter validation") {
    KpzParams p;
    p.dt_solver = 0.1;  // nu dt / dx^2 = 0.8
    p.dt_out = 0.2;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = KpzParams{};
    p.dt_out = 0.0015;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = KpzParams{};
    p.n_x = 4;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("kpz blow-up is reported as a numeric error with the substep") {
    KpzParams p;
    p.lambda = 1e6;
    p.n_out_steps = 50;
    Rng rng(59);
    long step = -1;
    try {
        gen_kpz_trajectory(p, rng);
    } catch (const NumericError& e) {
        step = e.step();
    }
    CHECK(step >= 1);
}

TEST_CASE("windows slide one row at a time") {
    KpzTrajectory t;
    t.u = Matrix(25, 8);
    for (Index r = 0; r < 25; ++r) t.u.row(r).setConstant(static_cast<double>(r));
    const auto w = window_samples(t, 10, 10);
    CHECK(w.size() == 6);
    CHECK(w[2].input(0, 0) == 2.0);
    CHECK(w[2].target(0, 0) == 12.0);
    CHECK(w[5].target(9, 0) == 24.0);
    CHECK_THROWS_AS(window_samples(t, 20, 10), ValidationError);
}

TEST_CASE("point clouds carry balanced labels and squared distances") {
    Rng rng(60);
    const auto clouds = gen_pointcloud_classes(16, 3, 5, rng);
    CHECK(clouds.size() == 15);
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        const auto& c = clouds[i];
        CHECK(c.label == static_cast<int>(i / 5));
        CHECK(c.graph.node_features.rows() == 3);
        CHECK(c.graph.node_features.cols() == 16);
        for (Index a = 0; a < 16; ++a)
            for (Index b = 0; b < 16; ++b)
                CHECK(c.graph.adjacency(a, b) ==
                      doctest::Approx((c.graph.node_features.col(a) - c.graph.node_features.col(b)).squaredNorm()));
    }
    CHECK_THROWS_AS(gen_pointcloud_classes(16, 1, 5, rng), ValidationError);
}

TEST_CASE("splits are disjoint and sized as requested") {
    Rng rng(61);
    const SplitIndices s = split_indices(20, {10, 5, 3}, rng);
    CHECK(s.seed == 61);
    std::set<Index> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(part->begin(), part->end());
    CHECK(all.size() == 18);
    CHECK(s.train.size() == 10);
    CHECK_THROWS_AS(split_indices(5, {3, 2, 1}, rng), ValidationError);
}

TEST_CASE("hand-worked shortest paths") {
    Matrix a = Matrix::Constant(3, 3, kNoEdge);
    a.diagonal().setZero();
    a(0, 1) = a(1, 0) = 1;
    a(1, 2) = a(2, 1) = 2;
    a(0, 2) = a(2, 0) = 5;
    CHECK(floyd_warshall(a)(0, 2) == 3.0);

    Matrix unit = Matrix::Ones(6, 6);
    unit.diagonal().setZero();
    CHECK(floyd_warshall(unit) == unit);
}

TEST_CASE("eta graph sizes at the extremes") {
    Rng rng(62);
    const Graph complete = gen_eta_graph(10, 45, rng);
    CHECK(edge_count(complete.adjacency) == 45);
    const Graph big = gen_eta_graph(500, 25000, rng);
    CHECK(edge_count(big.adjacency) == 25000);
    CHECK(connected(big.adjacency));
}

TEST_CASE("identity relabelling changes nothing") {
    Rng rng(63);
    const Graph g = gen_eta_graph(9, 15, rng);
    const Matrix d = floyd_warshall(g.adjacency);
    std::vector<Index> id(9);
    std::iota(id.begin(), id.end(), Index(0));
    const PermutedSample p = permute_graph(g, id, d);
    CHECK(p.graph.adjacency == g.adjacency);
    CHECK(*p.target == d);
}

TEST_CASE("constant kpz initial condition stays constant") {
    KpzParams params;
    params.n_x = 32;
    params.n_out_steps = 20;
    Rng rng(64);
    const KpzTrajectory t = integrate_kpz(Vector::Constant(32, 0.7), params, rng);
    CHECK((t.u.array() - 0.7).abs().maxCoeff() < 1e-12);
}

TEST_CASE("window counts for short trajectories") {
    KpzTrajectory t;
    t.u = Matrix::Zero(20, 4);
    CHECK(window_samples(t, 10, 10).size() == 1);
    t.u = Matrix::Zero(30, 4);
    CHECK(window_samples(t, 10, 10).size() == 11);
}

TEST_CASE("noise-free point clouds of one class share their distance spectrum") {
    Rng rng(65);
    const auto clouds = gen_pointcloud_classes(24, 2, 2, rng, 0.0);
    auto sorted = [](const Matrix& m) {
        std::vector<double> v(m.data(), m.data() + m.size());
        std::sort(v.begin(), v.end());
        return v;
    };
    const auto a = sorted(clouds[0].graph.adjacency);
    const auto b = sorted(clouds[1].graph.adjacency);
    const auto other = sorted(clouds[2].graph.adjacency);
    double same = 0, diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = std::max(same, std::abs(a[i] - b[i]));
        diff = std::max(diff, std::abs(a[i] - other[i]));
    }
    CHECK(same < 1e-10);
    CHECK(diff > 1e-2);
}

TEST_CASE("768 samples split 512 / 128 / 128 cover everything once") {
    Rng rng(66);
    const SplitIndices s = split_indices(768, {512, 128, 128}, rng);
    std::set<Index> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(part->begin(), part->end());
    CHECK(all.size() == 768);
    CHECK(s.val.size() == 128);
    CHECK(s.test.size() == 128);
}

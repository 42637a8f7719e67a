#include "gsig/datagen.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace gsig {

Graph gen_eta_graph(Index n, Index num_edges, Rng& rng) {
    if (n < 1) throw ValidationError("gen_eta_graph: need at least one node");
    const Index max_edges = n * (n - 1) / 2;
    if (num_edges < n - 1 || num_edges > max_edges)
        throw ValidationError("gen_eta_graph: edge count " + std::to_string(num_edges) + " outside [" +
                              std::to_string(n - 1) + ", " + std::to_string(max_edges) + "]");

    Graph g;
    g.adjacency = Matrix::Constant(n, n, kNoEdge);
    g.adjacency.diagonal().setZero();
    g.node_features.resize(0, n);
    auto connect = [&](Index i, Index j) {
        const double w = 1.0 - rng.uniform01();
        g.adjacency(i, j) = w;
        g.adjacency(j, i) = w;
    };

    const std::vector<Index> order = random_permutation(rng, n);
    for (Index t = 1; t < n; ++t) {
        const auto parent = static_cast<Index>(rng.below(static_cast<std::uint64_t>(t)));
        connect(order[t], order[parent]);
    }

    std::vector<std::pair<Index, Index>> free_pairs;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (g.adjacency(i, j) == kNoEdge) free_pairs.emplace_back(i, j);
    const Index extra = num_edges - (n - 1);
    // partial Fisher-Yates: the first `extra` slots become a uniform sample
    for (Index t = 0; t < extra; ++t) {
        const auto remaining = static_cast<std::uint64_t>(free_pairs.size() - t);
        const auto pick = t + static_cast<Index>(rng.below(remaining));
        std::swap(free_pairs[t], free_pairs[pick]);
        connect(free_pairs[t].first, free_pairs[t].second);
    }
    return g;
}

Graph resample_weights(const Graph& g, Rng& rng) {
    Graph out = g;
    const Index n = g.nodes();
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (g.adjacency(i, j) != kNoEdge) {
                const double w = 1.0 - rng.uniform01();
                out.adjacency(i, j) = w;
                out.adjacency(j, i) = w;
            }
    return out;
}

Matrix floyd_warshall(const Matrix& adjacency) {
    const Index n = adjacency.rows();
    if (adjacency.cols() != n) throw ValidationError("floyd_warshall: adjacency is not square");
    for (Index i = 0; i < adjacency.size(); ++i) {
        const double w = adjacency.data()[i];
        if (std::isnan(w) || w < 0) throw ValidationError("floyd_warshall: negative or NaN weight");
    }
    Matrix dist = adjacency;
    for (Index i = 0; i < n; ++i) dist(i, i) = std::min(dist(i, i), 0.0);
    for (Index via = 0; via < n; ++via)
        for (Index j = 0; j < n; ++j) {
            const double vj = dist(via, j);
            if (vj == kNoEdge) continue;
            for (Index i = 0; i < n; ++i) {
                const double cand = dist(i, via) + vj;
                if (cand < dist(i, j)) dist(i, j) = cand;
            }
        }
    return dist;
}

std::vector<Index> invert_permutation(const std::vector<Index>& perm) {
    const auto n = static_cast<Index>(perm.size());
    std::vector<Index> inv(perm.size(), -1);
    for (Index i = 0; i < n; ++i) {
        const Index p = perm[static_cast<std::size_t>(i)];
        if (p < 0 || p >= n || inv[static_cast<std::size_t>(p)] != -1)
            throw ValidationError("permutation is not a bijection");
        inv[static_cast<std::size_t>(p)] = i;
    }
    return inv;
}

PermutedSample permute_graph(const Graph& g, const std::vector<Index>& perm, const std::optional<Matrix>& target) {
    const Index n = g.nodes();
    if (static_cast<Index>(perm.size()) != n) throw ValidationError("permute_graph: permutation size mismatch");
    invert_permutation(perm);  // validates bijection
    if (target && (target->rows() != n || target->cols() != n))
        throw ValidationError("permute_graph: target shape mismatch");

    PermutedSample out;
    out.graph.adjacency.resize(n, n);
    out.graph.node_features.resize(g.node_features.rows(), n);
    if (target) out.target = Matrix(n, n);
    for (Index j = 0; j < n; ++j) {
        const Index pj = perm[static_cast<std::size_t>(j)];
        out.graph.node_features.col(j) = g.node_features.col(pj);
        for (Index i = 0; i < n; ++i) {
            const Index pi = perm[static_cast<std::size_t>(i)];
            out.graph.adjacency(i, j) = g.adjacency(pi, pj);
            if (target) (*out.target)(i, j) = (*target)(pi, pj);
        }
    }
    return out;
}

void KpzParams::validate() const {
    if (n_x < 8) throw ValidationError("kpz: n_x must be >= 8");
    if (!(nu >= 0) || !(noise_std >= 0)) throw ValidationError("kpz: nu and noise_std must be non-negative");
    if (!(dt_solver > 0) || !(dt_out >= dt_solver)) throw ValidationError("kpz: need 0 < dt_solver <= dt_out");
    const double ratio = dt_out / dt_solver;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw ValidationError("kpz: dt_out must be an integer multiple of dt_solver");
    if (n_out_steps < 1) throw ValidationError("kpz: n_out_steps must be >= 1");
    if (!(domain_length > 0)) throw ValidationError("kpz: domain_length must be positive");
    const double courant = nu * dt_solver / (dx() * dx());
    if (courant > 0.25)
        throw ValidationError("kpz: nu dt / dx^2 = " + std::to_string(courant) + " exceeds the stability bound 0.25");
}

Vector kpz_initial_condition(const KpzParams& params, Rng& rng) {
    params.validate();
    Vector u = Vector::Zero(params.n_x);
    for (int m = 1; m <= params.ic_modes; ++m) {
        const double a = rng.normal();
        const double b = rng.normal();
        for (Index i = 0; i < params.n_x; ++i) {
            const double phase = 2.0 * std::numbers::pi * m * static_cast<double>(i) / static_cast<double>(params.n_x);
            u(i) += params.ic_amplitude * (a * std::cos(phase) + b * std::sin(phase)) / m;
        }
    }
    return u;
}

KpzTrajectory integrate_kpz(const Vector& u0, const KpzParams& params, Rng& rng) {
    params.validate();
    if (u0.size() != params.n_x) throw ValidationError("integrate_kpz: initial condition size mismatch");
    const Index n = params.n_x;
    const double dx = params.dx();
    const double dt = params.dt_solver;
    const auto substeps = static_cast<Index>(std::llround(params.dt_out / dt));
    const double diff = params.nu / (dx * dx);
    const double adv = 0.5 * params.lambda / (4.0 * dx * dx);
    const double noise = std::sqrt(dt) * params.noise_std;

    KpzTrajectory traj;
    traj.nu = params.nu;
    traj.lambda = params.lambda;
    traj.noise_std = params.noise_std;
    traj.dt_out = params.dt_out;
    traj.u.resize(params.n_out_steps, n);
    traj.u.row(0) = u0.transpose();

    Vector u = u0;
    Vector next(n);
    for (Index row = 1; row < params.n_out_steps; ++row) {
        for (Index s = 0; s < substeps; ++s) {
            for (Index i = 0; i < n; ++i) {
                const double left = u((i + n - 1) % n);
                const double right = u((i + 1) % n);
                const double grad = right - left;
                next(i) = u(i) + dt * (diff * (right - 2.0 * u(i) + left) + adv * grad * grad);
            }
            if (noise > 0)
                for (Index i = 0; i < n; ++i) next(i) += noise * rng.normal();
            u.swap(next);
            const double peak = u.cwiseAbs().maxCoeff();
            if (!std::isfinite(peak) || peak > 1e6)
                throw NumericError("kpz integration blew up at substep " +
                                       std::to_string((row - 1) * substeps + s + 1),
                                   static_cast<long>((row - 1) * substeps + s + 1));
        }
        traj.u.row(row) = u.transpose();
    }
    return traj;
}

KpzTrajectory gen_kpz_trajectory(const KpzParams& params, Rng& rng) {
    const Vector u0 = kpz_initial_condition(params, rng);
    return integrate_kpz(u0, params, rng);
}

std::vector<Window> window_samples(const KpzTrajectory& traj, Index in_steps, Index out_steps) {
    if (in_steps < 1 || out_steps < 1) throw ValidationError("window_samples: window sizes must be >= 1");
    const Index len = traj.u.rows();
    if (len < in_steps + out_steps)
        throw ValidationError("window_samples: trajectory has " + std::to_string(len) + " rows, need " +
                              std::to_string(in_steps + out_steps));
    std::vector<Window> out;
    for (Index s = 0; s + in_steps + out_steps <= len; ++s)
        out.push_back(Window{traj.u.middleRows(s, in_steps), traj.u.middleRows(s + in_steps, out_steps)});
    return out;
}

std::vector<LabeledGraph> gen_pointcloud_classes(Index n_points, int n_classes, Index samples_per_class, Rng& rng,
                                                 double jitter) {
    if (n_classes < 2) throw ValidationError("gen_pointcloud_classes: need at least 2 classes");
    if (n_points < 2) throw ValidationError("gen_pointcloud_classes: need at least 2 points");

    Matrix sphere(3, n_points);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (Index i = 0; i < n_points; ++i) {
        const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n_points);
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double phi = golden * static_cast<double>(i);
        sphere.col(i) << r * std::cos(phi), y, r * std::sin(phi);
    }

    std::vector<LabeledGraph> out;
    for (int c = 0; c < n_classes; ++c) {
        const Eigen::Vector3d axes(1.0, 1.0 + 0.35 * c, 1.0 / (1.0 + 0.25 * c));
        for (Index s = 0; s < samples_per_class; ++s) {
            Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
            q.normalize();
            Matrix pts = q.toRotationMatrix() * (axes.asDiagonal() * sphere);
            if (jitter > 0) pts += sample_gaussian(rng, 3, n_points, 0.0, jitter * jitter);

            LabeledGraph lg;
            lg.label = c;
            lg.graph.node_features = pts;
            lg.graph.adjacency.resize(n_points, n_points);
            for (Index i = 0; i < n_points; ++i)
                for (Index j = 0; j < n_points; ++j)
                    lg.graph.adjacency(i, j) = (pts.col(i) - pts.col(j)).squaredNorm();
            out.push_back(std::move(lg));
        }
    }
    return out;
}

SplitIndices split_indices(Index count, const SplitSizes& sizes, Rng& rng) {
    if (sizes.train < 0 || sizes.val < 0 || sizes.test < 0) throw ValidationError("split: negative size");
    if (sizes.train + sizes.val + sizes.test > count)
        throw ValidationError("split: requested " + std::to_string(sizes.train + sizes.val + sizes.test) +
                              " samples, only " + std::to_string(count) + " available");
    SplitIndices out;
    out.seed = rng.seed();
    const std::vector<Index> perm = random_permutation(rng, count);
    auto take = [&](Index from, Index n) { return std::vector<Index>(perm.begin() + from, perm.begin() + from + n); };
    out.train = take(0, sizes.train);
    out.val = take(sizes.train, sizes.val);
    out.test = take(sizes.train + sizes.val, sizes.test);
    return out;
}

} // namespace gsig

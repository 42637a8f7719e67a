#pragma once

#include "gsig/graphconv.hpp"
#include "gsig/numkernel.hpp"

#include <optional>
#include <vector>

namespace gsig {

// ---------------------------------------------------------------- ETA

struct EtaSample {
    Graph graph;
    Matrix target;  // shortest travel times
};

/// Connected undirected graph: a random recursive spanning tree over a
/// shuffled node order, then uniformly chosen extra edges until
/// `num_edges` edges exist. Weights are i.i.d. uniform on (0, 1].
Graph gen_eta_graph(Index n, Index num_edges, Rng& rng);

/// Same topology as `g` with every edge weight redrawn from (0, 1].
Graph resample_weights(const Graph& g, Rng& rng);

/// All-pairs shortest paths; kNoEdge is +inf and stays +inf for
/// unreachable pairs.
Matrix floyd_warshall(const Matrix& adjacency);

struct PermutedSample {
    Graph graph;
    std::optional<Matrix> target;
};

/// Relabel nodes so that new node i is old node perm[i]:
/// A'(i, j) = A(perm[i], perm[j]), features and target likewise.
PermutedSample permute_graph(const Graph& g, const std::vector<Index>& perm, const std::optional<Matrix>& target);

std::vector<Index> invert_permutation(const std::vector<Index>& perm);

// ---------------------------------------------------------------- KPZ

struct KpzParams {
    Index n_x = 64;
    double nu = 0.5;
    double lambda = 1.0;
    double noise_std = 0.0;
    double dt_solver = 1e-3;
    double dt_out = 0.2;
    Index n_out_steps = 120;  // recorded rows, initial condition included
    double domain_length = 16.0;
    int ic_modes = 4;         // Fourier modes in the random initial condition
    double ic_amplitude = 1.0;

    double dx() const { return domain_length / static_cast<double>(n_x); }
    void validate() const;
};

/// Noise presets (standard deviation of the forcing).
inline constexpr double kKpzNoiseHigh = 5e-3;
inline constexpr double kKpzNoiseLow = 1e-3;
inline constexpr double kKpzNoiseZero = 0.0;

struct KpzTrajectory {
    Matrix u;  // n_out_steps x n_x, row 0 = initial condition
    double nu = 0;
    double lambda = 0;
    double noise_std = 0;
    double dt_out = 0;
};

/// Smooth random initial condition:
/// u0(x) = amp * sum_{m=1..M} (a_m cos(2 pi m x / L) + b_m sin(2 pi m x / L)) / m,
/// with a_m, b_m ~ N(0, 1).
Vector kpz_initial_condition(const KpzParams& params, Rng& rng);

/// Explicit Euler-Maruyama for u_t = nu u_xx + lambda/2 u_x^2 + eta on a
/// periodic grid with central differences. The forcing adds
/// sqrt(dt) * noise_std * N(0, 1) per grid point and substep.
KpzTrajectory integrate_kpz(const Vector& u0, const KpzParams& params, Rng& rng);

KpzTrajectory gen_kpz_trajectory(const KpzParams& params, Rng& rng);

struct Window {
    Matrix input;   // in_steps x n_x
    Matrix target;  // out_steps x n_x
};

/// Every start index s gives rows s..s+in-1 as input and s+in..s+in+out-1
/// as target.
std::vector<Window> window_samples(const KpzTrajectory& traj, Index in_steps = 10, Index out_steps = 10);

// -------------------------------------------------------- point clouds

struct LabeledGraph {
    Graph graph;  // adjacency = squared distances, node_features = 3 x n positions
    int label = 0;
};

/// Class c is an ellipsoid with semi-axes (1, 1 + 0.35 c, 1 / (1 + 0.25 c)),
/// sampled at n_points Fibonacci-sphere positions, randomly rotated, with
/// Gaussian jitter of standard deviation `jitter`. Samples are ordered by
/// class, `samples_per_class` each.
std::vector<LabeledGraph> gen_pointcloud_classes(Index n_points, int n_classes, Index samples_per_class, Rng& rng,
                                                 double jitter = 0.02);

// -------------------------------------------------------------- splits

struct SplitSizes {
    Index train = 0;
    Index val = 0;
    Index test = 0;
};

struct SplitIndices {
    std::vector<Index> train, val, test;
    std::uint64_t seed = 0;
};

/// Shuffle 0..count-1 and take consecutive blocks.
SplitIndices split_indices(Index count, const SplitSizes& sizes, Rng& rng);

template <typename T>
struct DatasetSplit {
    std::vector<T> train, val, test;
    std::uint64_t seed = 0;
};

template <typename T>
DatasetSplit<T> split_dataset(const std::vector<T>& samples, const SplitSizes& sizes, Rng& rng) {
    const SplitIndices idx = split_indices(static_cast<Index>(samples.size()), sizes, rng);
    DatasetSplit<T> out;
    out.seed = idx.seed;
    for (Index i : idx.train) out.train.push_back(samples[static_cast<std::size_t>(i)]);
    for (Index i : idx.val) out.val.push_back(samples[static_cast<std::size_t>(i)]);
    for (Index i : idx.test) out.test.push_back(samples[static_cast<std::size_t>(i)]);
    return out;
}

} // namespace gsig

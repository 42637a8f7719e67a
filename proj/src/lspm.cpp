#include "gsig/lspm.hpp"

#include <cmath>

namespace gsig {

Activation parse_activation(const std::string& text) {
    if (text == "scaled-identity") return Activation::ScaledIdentity;
    if (text == "identity") return Activation::Identity;
    if (text == "sigmoid") return Activation::Sigmoid;
    if (text == "tanh") return Activation::Tanh;
    throw ValidationError("unknown activation '" + text + "'");
}

std::string to_string(Activation a) {
    switch (a) {
    case Activation::ScaledIdentity: return "scaled-identity";
    case Activation::Identity: return "identity";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    }
    return "?";
}

namespace {

template <typename T, typename Self>
std::vector<BasicTensorView<T>> collect_views(Self& self) {
    std::vector<BasicTensorView<T>> out;
    std::remove_const_t<Self>::visit(self, [&](const char* name, auto& m, bool trainable) {
        out.push_back(make_view<T>(name, m, trainable));
    });
    return out;
}

// u = A z + b for every coordinate, kp x n_coords.
void preactivation(const LayerParams& p, const Vector& z, Matrix& u) {
    u = p.b;
    const Index kp = p.kp();
    for (Index i = 0; i < p.n_coords; ++i) {
        const double* vals = p.a.col(i).data();
        const int* cols = p.a_cols.data() + i * kp * p.row_nnz;
        double* ucol = u.col(i).data();
        for (Index r = 0; r < kp; ++r) {
            double acc = 0;
            for (Index e = 0; e < p.row_nnz; ++e) acc += vals[r * p.row_nnz + e] * z(cols[r * p.row_nnz + e]);
            ucol[r] += acc;
        }
    }
}

void activate(Activation act, double scale, const Matrix& u, Matrix& s) {
    switch (act) {
    case Activation::ScaledIdentity: s = scale * u; break;
    case Activation::Identity: s = u; break;
    case Activation::Sigmoid: s = (1.0 / (1.0 + (-u.array()).exp())).matrix(); break;
    case Activation::Tanh: s = u.array().tanh().matrix(); break;
    }
}

// derivative of the activation, given u and s = sigma(u)
void activation_slope(Activation act, double scale, const Matrix& s, Matrix& g) {
    switch (act) {
    case Activation::ScaledIdentity: g.setConstant(s.rows(), s.cols(), scale); break;
    case Activation::Identity: g.setConstant(s.rows(), s.cols(), 1.0); break;
    case Activation::Sigmoid: g = (s.array() * (1.0 - s.array())).matrix(); break;
    case Activation::Tanh: g = (1.0 - s.array().square()).matrix(); break;
    }
}

Index source_row(Index t, Index h1, Direction dir) { return dir == Direction::Forward ? t : h1 - 1 - t; }

SigPass run_recurrence(const LayerParams& p, const Matrix& x, Direction dir, bool check) {
    if (x.cols() != p.n_coords)
        throw ValidationError("sig_forward: input has " + std::to_string(x.cols()) + " coordinates, layer expects " +
                              std::to_string(p.n_coords));
    const Index h1 = x.rows();
    const Matrix& w = dir == Direction::Forward ? p.w_fwd : p.w_bwd;
    const Vector& o = dir == Direction::Forward ? p.o_fwd : p.o_bwd;

    SigPass out;
    out.states.resize(h1 + 1, p.k);
    out.z_rows.resize(h1, p.k);
    Vector z = p.z0;
    out.states.row(0) = z.transpose();
    Matrix u, s;
    for (Index t = 0; t < h1; ++t) {
        const Index r = source_row(t, h1, dir);
        preactivation(p, z, u);
        activate(p.activation, p.scale, u, s);
        const Vector mixed = s * x.row(r).transpose();
        z += w * mixed + o;
        if (check && !z.allFinite())
            throw NumericError("signature recurrence produced a non-finite state at step " + std::to_string(t + 1),
                               static_cast<long>(t + 1));
        out.states.row(t + 1) = z.transpose();
        out.z_rows.row(r) = z.transpose();
    }
    return out;
}

// Reverse pass through one direction. d_rows is dL/dz_rows (original row
// order). Accumulates into grads and d_x.
void backprop_pass(const LayerParams& p, const Matrix& x, const SigPass& pass, Direction dir, const Matrix& d_rows,
                   LayerGrads& grads, Matrix& d_x) {
    const Index h1 = x.rows();
    const Index kp = p.kp();
    const Matrix& w = dir == Direction::Forward ? p.w_fwd : p.w_bwd;
    Matrix& dw = dir == Direction::Forward ? grads.w_fwd : grads.w_bwd;
    Vector& dob = dir == Direction::Forward ? grads.o_fwd : grads.o_bwd;

    Vector gz = Vector::Zero(p.k);
    Matrix u, s, slope;
    for (Index t = h1 - 1; t >= 0; --t) {
        const Index r = source_row(t, h1, dir);
        gz += d_rows.row(r).transpose();
        const Vector zprev = pass.states.row(t).transpose();
        preactivation(p, zprev, u);
        activate(p.activation, p.scale, u, s);
        const Vector xr = x.row(r).transpose();
        const Vector mixed = s * xr;

        dw.noalias() += gz * mixed.transpose();
        dob += gz;
        const Vector ds = w.transpose() * gz;
        d_x.row(r) += (s.transpose() * ds).transpose();

        activation_slope(p.activation, p.scale, s, slope);
        // dU = (ds x^T) .* slope
        Matrix du = (ds * xr.transpose()).cwiseProduct(slope);
        grads.b += du;

        Vector gprev = gz;
        for (Index i = 0; i < p.n_coords; ++i) {
            const double* vals = p.a.col(i).data();
            double* dvals = grads.a.col(i).data();
            const int* cols = p.a_cols.data() + i * kp * p.row_nnz;
            for (Index row = 0; row < kp; ++row) {
                const double g = du(row, i);
                if (g == 0.0) continue;
                for (Index e = 0; e < p.row_nnz; ++e) {
                    const Index idx = row * p.row_nnz + e;
                    dvals[idx] += g * zprev(cols[idx]);
                    gprev(cols[idx]) += vals[idx] * g;
                }
            }
        }
        gz = gprev;
    }
    grads.z0 += gz;
}

} // namespace

std::vector<TensorView> LayerParams::tensors() { return collect_views<double>(*this); }
std::vector<ConstTensorView> LayerParams::tensors() const { return collect_views<const double>(*this); }

Index LayerParams::trainable_count() const {
    Index n = 0;
    visit(*this, [&](const char*, const auto& m, bool trainable) {
        if (trainable) n += m.size();
    });
    return n;
}

LayerGrads LayerGrads::zeros_like(const LayerParams& p) {
    LayerGrads g;
    g.a = Matrix::Zero(p.a.rows(), p.a.cols());
    g.b = Matrix::Zero(p.b.rows(), p.b.cols());
    g.w_fwd = Matrix::Zero(p.w_fwd.rows(), p.w_fwd.cols());
    g.w_bwd = Matrix::Zero(p.w_bwd.rows(), p.w_bwd.cols());
    g.o_fwd = Vector::Zero(p.o_fwd.size());
    g.o_bwd = Vector::Zero(p.o_bwd.size());
    g.z0 = Vector::Zero(p.z0.size());
    g.proj = Matrix::Zero(p.proj.rows(), p.proj.cols());
    return g;
}

std::vector<TensorView> LayerGrads::tensors() { return collect_views<double>(*this); }
std::vector<ConstTensorView> LayerGrads::tensors() const { return collect_views<const double>(*this); }

LayerGrads& LayerGrads::operator+=(const LayerGrads& other) {
    a += other.a;
    b += other.b;
    w_fwd += other.w_fwd;
    w_bwd += other.w_bwd;
    o_fwd += other.o_fwd;
    o_bwd += other.o_bwd;
    z0 += other.z0;
    proj += other.proj;
    return *this;
}

LayerParams init_layer(Index n_coords, Index k, Index heads, Rng& rng, const LayerOptions& options) {
    if (n_coords < 1 || k < 1 || heads < 1) throw ValidationError("init_layer: sizes must be >= 1");
    LayerParams p;
    p.n_coords = n_coords;
    p.k = k;
    p.heads = heads;
    p.row_nnz = options.sparse ? 1 : k;
    p.activation = options.activation;
    p.scale = options.activation == Activation::ScaledIdentity ? 1.0 / static_cast<double>(n_coords) : 1.0;
    p.trainable = options.trainable;

    const Index kp = k * heads;
    p.a_cols.resize(static_cast<std::size_t>(n_coords * kp * p.row_nnz));
    for (Index i = 0; i < n_coords; ++i)
        for (Index r = 0; r < kp; ++r)
            for (Index e = 0; e < p.row_nnz; ++e) {
                const auto idx = static_cast<std::size_t>((i * kp + r) * p.row_nnz + e);
                p.a_cols[idx] = options.sparse ? static_cast<int>(rng.below(static_cast<std::uint64_t>(k)))
                                               : static_cast<int>(e);
            }

    const double var = options.scaled_init ? 1.0 / static_cast<double>(k) : 1.0;
    p.a = sample_gaussian(rng, n_coords, kp * p.row_nnz, 0.0, var).transpose();
    p.b = sample_gaussian(rng, n_coords, kp, 0.0, var).transpose();
    p.z0 = sample_gaussian(rng, k, 1, 0.0, var);

    const double wb = 1.0 / std::sqrt(static_cast<double>(kp));
    p.w_fwd = sample_uniform(rng, k, kp, -wb, wb);
    p.o_fwd = sample_uniform(rng, k, 1, -wb, wb);
    p.w_bwd = sample_uniform(rng, k, kp, -wb, wb);
    p.o_bwd = sample_uniform(rng, k, 1, -wb, wb);

    const double pb = 1.0 / std::sqrt(static_cast<double>(2 * k));
    p.proj = sample_uniform(rng, n_coords, 2 * k, -pb, pb);
    return p;
}

SigPass sig_forward(const LayerParams& params, const Matrix& x, Direction dir) {
    return run_recurrence(params, x, dir, true);
}

SigPass sig_forward_unchecked(const LayerParams& params, const Matrix& x, Direction dir) {
    return run_recurrence(params, x, dir, false);
}

Matrix layer_forward(const LayerParams& params, const Matrix& x, LayerCache& cache) {
    cache.valid = false;
    cache.x = x;
    cache.fwd = sig_forward(params, x, Direction::Forward);
    cache.bwd = sig_forward(params, x, Direction::Backward);
    cache.z.resize(x.rows(), 2 * params.k);
    cache.z << cache.fwd.z_rows, cache.bwd.z_rows;
    cache.owner = &params;
    cache.valid = true;
    return x + cache.z * params.proj.transpose();
}

LayerBackward layer_backward(const LayerParams& params, const LayerCache& cache, const Matrix& d_next) {
    if (!cache.valid || cache.owner != &params) throw ValidationError("layer_backward: missing or stale cache");
    if (d_next.rows() != cache.x.rows() || d_next.cols() != cache.x.cols())
        throw ValidationError("layer_backward: upstream gradient shape mismatch");

    LayerBackward out;
    out.grads = LayerGrads::zeros_like(params);
    out.d_x = d_next;
    out.grads.proj = d_next.transpose() * cache.z;
    const Matrix dz = d_next * params.proj;
    const Index k = params.k;
    backprop_pass(params, cache.x, cache.fwd, Direction::Forward, dz.leftCols(k), out.grads, out.d_x);
    backprop_pass(params, cache.x, cache.bwd, Direction::Backward, dz.rightCols(k), out.grads, out.d_x);
    if (!params.trainable) {
        out.grads.a.setZero();
        out.grads.b.setZero();
    }
    return out;
}

double gradient_rel_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check_report(const LayerParams& params, const Matrix& x, double eps) {
    LayerParams probe = params;
    Matrix xp = x;
    auto loss = [&]() {
        LayerCache c;
        return layer_forward(probe, xp, c).squaredNorm();
    };

    LayerCache cache;
    const Matrix out = layer_forward(probe, xp, cache);
    const LayerBackward back = layer_backward(probe, cache, 2.0 * out);

    GradCheckReport report;
    auto check = [&](const std::string& name, std::span<double> values, std::span<const double> analytic) {
        GradCheckEntry entry{name, 0.0};
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            const double numeric = stencil_derivative(
                [&](double offset) {
                    values[i] = saved + offset;
                    return loss();
                },
                eps);
            values[i] = saved;
            entry.max_rel_error = std::max(entry.max_rel_error, gradient_rel_error(analytic[i], numeric));
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(entry);
    };

    auto param_views = probe.tensors();
    const auto grad_views = back.grads.tensors();
    for (std::size_t t = 0; t < param_views.size(); ++t) {
        if (!param_views[t].trainable) continue;
        check(param_views[t].name, param_views[t].values, grad_views[t].values);
    }
    check("x", std::span<double>(xp.data(), static_cast<std::size_t>(xp.size())),
          std::span<const double>(back.d_x.data(), static_cast<std::size_t>(back.d_x.size())));
    return report;
}

double grad_check(const LayerParams& params, const Matrix& x, double eps) {
    if (!(eps > 0)) throw ValidationError("grad_check: eps must be positive");
    return grad_check_report(params, x, eps).max_rel_error;
}

MavTrace mav_trace(const LayerParams& params, const Matrix& x) {
    const SigPass pass = sig_forward_unchecked(params, x, Direction::Forward);
    MavTrace out;
    out.per_k = pass.z_rows.cwiseAbs();
    out.mav = out.per_k.rowwise().mean();
    return out;
}

} // namespace gsig

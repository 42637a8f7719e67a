#include "gsig/sigcore.hpp"

namespace gsig {

SampledPath::SampledPath(Matrix values) : values_(std::move(values)) {
    if (values_.rows() < 2) throw ValidationError("SampledPath: need at least 2 samples");
    if (values_.cols() < 1) throw ValidationError("SampledPath: need at least 1 coordinate");
    if (!values_.allFinite()) throw ValidationError("SampledPath: non-finite sample");
}

Matrix SampledPath::increments() const {
    return values_.bottomRows(values_.rows() - 1) - values_.topRows(values_.rows() - 1);
}

std::size_t signature_term_count(std::size_t d, std::size_t m) {
    if (d == 0) throw ValidationError("signature_term_count: d must be >= 1");
    if (d == 1) return m + 1;
    std::size_t power = 1;
    for (std::size_t i = 0; i <= m; ++i) power *= d;
    return (power - 1) / (d - 1);
}

Signature truncated_signature(const SampledPath& path, int depth) {
    if (depth < 1) throw ValidationError("truncated_signature: depth must be >= 1");
    if (path.steps() < 2) throw ValidationError("truncated_signature: need at least 2 samples");
    const Matrix inc = path.increments();
    Signature sig(path.coords(), depth);
    for (Index t = 0; t < inc.rows(); ++t) {
        const Vector step = inc.row(t).transpose();
        sig = chen_product(sig, segment_signature(step, depth));
    }
    return sig;
}

SampledPath concatenate(const SampledPath& first, const SampledPath& second) {
    if (first.coords() != second.coords()) throw ValidationError("concatenate: coordinate counts differ");
    const Index n1 = first.steps();
    const Index n2 = second.steps();
    Matrix joined(n1 + n2 - 1, first.coords());
    joined.topRows(n1) = first.values();
    const Eigen::RowVectorXd shift = first.values().row(n1 - 1) - second.values().row(0);
    joined.bottomRows(n2 - 1) = second.values().bottomRows(n2 - 1).rowwise() + shift;
    return SampledPath(std::move(joined));
}

SampledPath lead_lag_embed(std::span<const double> samples) {
    if (samples.empty()) throw ValidationError("lead_lag_embed: no samples");
    const auto n = static_cast<Index>(samples.size());
    Matrix pts(2 * n + 1, 2);
    double prev = 0;
    pts.row(0) << 0.0, 0.0;
    for (Index i = 0; i < n; ++i) {
        const double cur = prev + samples[static_cast<std::size_t>(i)];
        pts.row(2 * i + 1) << cur, prev;
        pts.row(2 * i + 2) << cur, cur;
        prev = cur;
    }
    return SampledPath(std::move(pts));
}

Moments moments_from_signature(std::span<const double> samples) {
    if (samples.size() < 2) throw ValidationError("moments_from_signature: need at least 2 samples");
    const double n = static_cast<double>(samples.size());
    const Signature sig = truncated_signature(lead_lag_embed(samples), 2);
    const double lead = sig.at({0});
    const double lead_lag = sig.at({0, 1});
    const double lag_lead = sig.at({1, 0});
    Moments m;
    m.mean = lead / n;
    m.variance = (n - 1) / (n * n) * lead_lag - (n + 1) / (n * n) * lag_lead;
    return m;
}

std::string lead_lag_convention() {
    return "coordinate 0 = lead, 1 = lag; S^{lead,lag} = ((sum x)^2 + sum x^2)/2, "
           "S^{lag,lead} = ((sum x)^2 - sum x^2)/2; "
           "var = (N-1)/N^2 S^{lead,lag} - (N+1)/N^2 S^{lag,lead}";
}

ReservoirResult randomized_signature_reference(const SampledPath& path, Index k, Rng& rng) {
    if (k < 1) throw ValidationError("randomized_signature_reference: k must be >= 1");
    const Index d = path.coords();
    std::vector<Matrix> a;
    std::vector<Vector> b;
    a.reserve(static_cast<std::size_t>(d));
    b.reserve(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) {
        a.push_back(sample_gaussian(rng, k, k, 0.0, 1.0));
        b.push_back(sample_gaussian(rng, k, 1, 0.0, 1.0));
    }
    const Vector z0 = sample_gaussian(rng, k, 1, 0.0, 1.0);

    const Matrix inc = path.increments();
    ReservoirResult out;
    out.states.resize(path.steps(), k);
    Vector z = z0;
    out.states.row(0) = z.transpose();
    for (Index t = 0; t < inc.rows(); ++t) {
        Vector dz = Vector::Zero(k);
        for (Index i = 0; i < d; ++i) {
            if (inc(t, i) == 0.0) continue;
            dz += (a[i] * z + b[i]).array().tanh().matrix() * inc(t, i);
        }
        z += dz;
        out.states.row(t + 1) = z.transpose();
    }
    out.final_state = z;
    return out;
}

} // namespace gsig

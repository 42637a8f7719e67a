#include "gsig/checks.hpp"

#include "gsig/sigcore.hpp"

#include <cmath>
#include <cstdio>

namespace gsig {

GradCheckReport model_grad_check(const GSignatureModel& model, const Sample& sample, double eps, double corrupt) {
    if (!(eps > 0)) throw ValidationError("model_grad_check: eps must be positive");
    GSignatureModel probe = model;
    auto loss = [&]() { return sample_loss(probe, model_forward(probe, sample.input), sample).loss; };

    ForwardCache cache;
    const Matrix pred = model_forward(probe, sample.input, cache);
    GradientRecord grads = model_backward(probe, cache, sample_loss(probe, pred, sample).grad);

    auto params = probe.tensors();
    auto analytic = grads.tensors();
    if (corrupt != 0.0 && !analytic.empty() && !analytic.front().values.empty()) analytic.front().values[0] += corrupt;

    GradCheckReport report;
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!params[t].trainable) continue;
        GradCheckEntry entry{params[t].name, 0.0};
        auto values = params[t].values;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            const double numeric = stencil_derivative(
                [&](double offset) {
                    values[i] = saved + offset;
                    return loss();
                },
                eps);
            values[i] = saved;
            entry.max_rel_error = std::max(entry.max_rel_error, gradient_rel_error(analytic[t].values[i], numeric));
        }
        report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
        report.entries.push_back(entry);
    }
    return report;
}

std::vector<GradCheckCase> default_grad_check_cases(std::uint64_t seed) {
    const Index nodes = 5;
    std::vector<GradCheckCase> out;
    for (HeadKind head : {HeadKind::NodeRegression, HeadKind::PairwiseRegression, HeadKind::Classification}) {
        for (Activation act : {Activation::ScaledIdentity, Activation::Identity, Activation::Sigmoid, Activation::Tanh}) {
            ModelConfig mc;
            mc.nodes = nodes;
            mc.input_rows = head == HeadKind::NodeRegression ? 4 : 3;
            mc.h1 = 6;
            mc.h2 = 6;
            mc.k = 5;
            mc.heads = 2;
            mc.layers = 2;
            mc.head = head;
            mc.out_rows = 3;
            mc.classes = 3;
            mc.layer.activation = act;
            const std::string label = to_string(head) + "/" + to_string(act);
            Rng rng = Rng::derive(seed, fnv1a(label));
            GradCheckCase c{label, make_model(mc, rng), {}};
            c.sample.input = sample_gaussian(rng, mc.input_rows, nodes, 0.0, 1.0);
            if (head == HeadKind::Classification)
                c.sample.label = static_cast<int>(rng.below(static_cast<std::uint64_t>(mc.classes)));
            else
                c.sample.target = sample_gaussian(rng, mc.output_rows(), mc.output_cols(), 0.0, 1.0);
            out.push_back(std::move(c));
        }
    }
    return out;
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

CheckLine term_count_check() {
    CheckLine line{"term-count", true, ""};
    const bool known_counts = signature_term_count(2, 2) == 7 && signature_term_count(3, 3) == 40 &&
                              signature_term_count(1, 5) == 6;
    bool storage = true;
    for (Index d = 1; d <= 4; ++d)
        for (int m = 0; m <= 4; ++m)
            storage = storage && Signature(d, m).term_count() ==
                                     signature_term_count(static_cast<std::size_t>(d), static_cast<std::size_t>(m));
    line.passed = known_counts && storage;
    line.detail = "(d=2,M=2)->" + std::to_string(signature_term_count(2, 2)) +
                  " (d=3,M=3)->" + std::to_string(signature_term_count(3, 3));
    return line;
}

CheckLine closed_form_check(Rng& rng) {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index steps = 2 + static_cast<Index>(rng.below(29));
        const Matrix values = sample_gaussian(rng, steps, 1, 0.0, 1.0);
        const Signature sig = truncated_signature(SampledPath(values), 5);
        const double delta = values(steps - 1, 0) - values(0, 0);
        double expected = 1;
        for (int l = 1; l <= 5; ++l) {
            expected *= delta / l;
            worst = std::max(worst, std::abs(sig.level(l)(0) - expected) / std::max(1.0, std::abs(expected)));
        }
    }
    return {"closed-form-1d", worst < 1e-10, fmt("max error %.3g", worst)};
}

CheckLine chen_check(Rng& rng) {
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index d = 2 + static_cast<Index>(rng.below(2));
        const SampledPath a(sample_gaussian(rng, 2 + static_cast<Index>(rng.below(10)), d, 0.0, 1.0));
        const SampledPath b(sample_gaussian(rng, 2 + static_cast<Index>(rng.below(10)), d, 0.0, 1.0));
        const Vector joined = truncated_signature(concatenate(a, b), 3).flatten();
        const Vector product = chen_product(truncated_signature(a, 3), truncated_signature(b, 3)).flatten();
        worst = std::max(worst, (joined - product).norm() / product.norm());
    }
    return {"chen", worst < 1e-9, fmt("max relative error %.3g over 100 pairs", worst)};
}

CheckLine moment_check(Rng& rng) {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.below(19));
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (double& x : xs) x = rng.normal() * 3.0 + 1.0;
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(n);
        double var = 0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(n);
        const Moments m = moments_from_signature(xs);
        worst = std::max({worst, std::abs(m.mean - mean), std::abs(m.variance - var)});
    }
    return {"lead-lag-moments", worst < 1e-9, fmt("max error %.3g; ", worst) + lead_lag_convention()};
}

CheckLine reservoir_check(Rng& rng) {
    const Index paths = 200;
    const Index k = 64;
    const std::uint64_t reservoir_seed = rng.next();
    Matrix features(paths, k + 1);
    Vector target(paths);
    for (Index p = 0; p < paths; ++p) {
        Matrix values = sample_gaussian(rng, 20, 1, 0.0, 0.01);
        for (Index t = 1; t < values.rows(); ++t) values(t, 0) += values(t - 1, 0);
        Rng reservoir(reservoir_seed);
        const ReservoirResult r = randomized_signature_reference(SampledPath(values), k, reservoir);
        features.row(p) << r.final_state.transpose(), 1.0;
        target(p) = values(values.rows() - 1, 0) - values(0, 0);
    }
    const Vector coef = features.colPivHouseholderQr().solve(target);
    const double ss_res = (features * coef - target).squaredNorm();
    const double ss_tot = (target.array() - target.mean()).matrix().squaredNorm();
    const double r2 = 1.0 - ss_res / ss_tot;
    return {"reservoir-readout", r2 > 0.99, fmt("R^2 %.6f (k=64, 200 paths)", r2)};
}

} // namespace

std::vector<CheckLine> signature_checks(std::uint64_t seed) {
    Rng rng = Rng::derive(seed, fnv1a("sigcheck"));
    std::vector<CheckLine> out;
    out.push_back(term_count_check());
    out.push_back(closed_form_check(rng));
    out.push_back(chen_check(rng));
    out.push_back(moment_check(rng));
    out.push_back(reservoir_check(rng));
    return out;
}

} // namespace gsig

#include "gsig/commands.hpp"

#include "gsig/checks.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <numeric>

namespace gsig {

using nlohmann::json;
namespace fs = std::filesystem;

RunConfig resolve_config(const CommandOptions& opts, bool config_required) {
    if (!opts.config && config_required) throw ValidationError("this command needs --config <path>");
    RunConfig cfg;
    if (opts.config) {
        if (!fs::exists(*opts.config)) throw IoError("config file " + opts.config->string() + " does not exist");
        cfg = RunConfig::load(*opts.config);
    }
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.out = *opts.out;
    return cfg;
}

namespace {

const char* const kSplitNames[] = {"train", "val", "test"};

template <typename T>
const std::vector<T>& split_part(const DatasetSplit<T>& s, int i) {
    return i == 0 ? s.train : (i == 1 ? s.val : s.test);
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

Index total(const SplitSizes& s) { return s.train + s.val + s.test; }

GeneratedDataset gen_eta(const RunConfig& cfg) {
    const auto& d = cfg.eta;
    const std::uint64_t data_seed = cfg.derived_seed("data");
    Rng topo_rng = Rng::derive(data_seed, fnv1a("topology"));
    const Graph base = gen_eta_graph(d.nodes, d.edges, topo_rng);

    std::vector<Index> ids(static_cast<std::size_t>(total(d.split)));
    std::iota(ids.begin(), ids.end(), Index{0});
    Rng split_rng(cfg.derived_seed("split"));
    const auto split = split_dataset(ids, d.split, split_rng);

    GeneratedDataset out;
    for (int part = 0; part < 3; ++part) {
        std::vector<Matrix> adjacency, targets;
        for (Index id : split_part(split, part)) {
            Rng rng = Rng::derive(data_seed, static_cast<std::uint64_t>(id));
            const Graph g = d.shared_topology ? resample_weights(base, rng) : gen_eta_graph(d.nodes, d.edges, rng);
            adjacency.push_back(g.adjacency);
            targets.push_back(floyd_warshall(g.adjacency));
        }
        out.files.emplace_back(std::string(kSplitNames[part]) + "_adjacency.gsig", stack_tensor(adjacency));
        out.files.emplace_back(std::string(kSplitNames[part]) + "_targets.gsig", stack_tensor(targets));
    }
    out.meta["density"] = static_cast<double>(d.edges) / static_cast<double>(d.nodes * (d.nodes - 1) / 2);
    return out;
}

GeneratedDataset gen_kpz(const RunConfig& cfg) {
    const auto& d = cfg.kpz;
    const std::uint64_t data_seed = cfg.derived_seed("data");
    std::vector<Index> ids(static_cast<std::size_t>(total(d.split)));
    std::iota(ids.begin(), ids.end(), Index{0});
    Rng split_rng(cfg.derived_seed("split"));
    const auto split = split_dataset(ids, d.split, split_rng);

    GeneratedDataset out;
    for (int part = 0; part < 3; ++part) {
        std::vector<Matrix> trajs;
        for (Index id : split_part(split, part)) {
            Rng rng = Rng::derive(data_seed, static_cast<std::uint64_t>(id));
            trajs.push_back(gen_kpz_trajectory(d.params, rng).u);
        }
        out.files.emplace_back(std::string(kSplitNames[part]) + "_trajectories.gsig", stack_tensor(trajs));
    }
    return out;
}

GeneratedDataset gen_pointcloud(const RunConfig& cfg) {
    const auto& d = cfg.pointcloud;
    Rng rng(cfg.derived_seed("data"));
    const auto clouds = gen_pointcloud_classes(d.points, d.classes, d.per_class, rng, d.jitter);
    Rng split_rng(cfg.derived_seed("split"));
    const auto split = split_dataset(clouds, d.split, split_rng);

    GeneratedDataset out;
    for (int part = 0; part < 3; ++part) {
        std::vector<Matrix> points;
        Matrix labels(static_cast<Index>(split_part(split, part).size()), 1);
        Index row = 0;
        for (const auto& c : split_part(split, part)) {
            points.push_back(c.graph.node_features);
            labels(row++, 0) = c.label;
        }
        out.files.emplace_back(std::string(kSplitNames[part]) + "_points.gsig", stack_tensor(points));
        out.files.emplace_back(std::string(kSplitNames[part]) + "_labels.gsig", to_tensor(labels));
    }
    return out;
}

const Tensor& find_file(const GeneratedDataset& data, const std::string& name) {
    for (const auto& [file, tensor] : data.files)
        if (file == name) return tensor;
    throw IoError("dataset file " + name + " is missing");
}

Matrix squared_distances(const Matrix& points) {
    const Index n = points.cols();
    Matrix d(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) d(i, j) = (points.col(i) - points.col(j)).squaredNorm();
    return d;
}

std::vector<std::string> dataset_files(TaskKind task) {
    std::vector<std::string> out;
    for (const char* part : kSplitNames) {
        switch (task) {
        case TaskKind::Eta:
            out.push_back(std::string(part) + "_adjacency.gsig");
            out.push_back(std::string(part) + "_targets.gsig");
            break;
        case TaskKind::Kpz: out.push_back(std::string(part) + "_trajectories.gsig"); break;
        case TaskKind::PointCloud:
            out.push_back(std::string(part) + "_points.gsig");
            out.push_back(std::string(part) + "_labels.gsig");
            break;
        }
    }
    return out;
}

} // namespace

GeneratedDataset generate_dataset(const RunConfig& cfg) {
    GeneratedDataset data;
    switch (cfg.task) {
    case TaskKind::Eta: data = gen_eta(cfg); break;
    case TaskKind::Kpz: data = gen_kpz(cfg); break;
    case TaskKind::PointCloud: data = gen_pointcloud(cfg); break;
    }
    const json full = cfg.to_json();
    data.meta["generator"] = "gsig";
    data.meta["generator_version"] = kGeneratorVersion;
    data.meta["task"] = to_string(cfg.task);
    data.meta["seed"] = cfg.seed;
    data.meta["data_seed"] = cfg.derived_seed("data");
    data.meta["split_seed"] = cfg.derived_seed("split");
    data.meta["parameters"] = full["data"];
    json files = json::array();
    for (const auto& [name, tensor] : data.files) files.push_back({{"name", name}, {"dims", tensor.dims}});
    data.meta["files"] = files;
    return data;
}

DatasetSplit<Sample> samples_from_dataset(const RunConfig& cfg, const GeneratedDataset& data) {
    DatasetSplit<Sample> out;
    out.seed = cfg.derived_seed("split");
    const InputMode mode = cfg.input_mode();
    for (int part = 0; part < 3; ++part) {
        auto& dst = part == 0 ? out.train : (part == 1 ? out.val : out.test);
        const std::string prefix = kSplitNames[part];
        switch (cfg.task) {
        case TaskKind::Eta: {
            const auto adjacency = unstack_tensor(find_file(data, prefix + "_adjacency.gsig"));
            const auto targets = unstack_tensor(find_file(data, prefix + "_targets.gsig"));
            if (adjacency.size() != targets.size()) throw IoError("ETA adjacency and target counts differ");
            for (std::size_t i = 0; i < adjacency.size(); ++i) {
                Graph g{adjacency[i], Matrix(0, adjacency[i].cols())};
                const auto emb =
                    edge_embedding(sanitize_adjacency(g, cfg.eta.cap_factor * default_cap(g)), cfg.eta.m);
                dst.push_back(Sample{stack_inputs(g, &emb, mode), targets[i], -1});
            }
            break;
        }
        case TaskKind::Kpz: {
            if (mode != InputMode::NodesOnly) throw ValidationError("kpz inputs are node features only");
            for (const Matrix& u : unstack_tensor(find_file(data, prefix + "_trajectories.gsig"))) {
                KpzTrajectory traj;
                traj.u = u;
                for (auto& w : window_samples(traj, cfg.kpz.in_steps, cfg.kpz.out_steps))
                    dst.push_back(Sample{std::move(w.input), std::move(w.target), -1});
            }
            break;
        }
        case TaskKind::PointCloud: {
            const auto points = unstack_tensor(find_file(data, prefix + "_points.gsig"));
            const Matrix labels = to_matrix(find_file(data, prefix + "_labels.gsig"));
            if (static_cast<Index>(points.size()) != labels.rows()) throw IoError("point and label counts differ");
            for (std::size_t i = 0; i < points.size(); ++i) {
                Graph g{squared_distances(points[i]), points[i]};
                const auto emb = edge_embedding(g.adjacency, cfg.pointcloud.m);
                dst.push_back(Sample{stack_inputs(g, &emb, mode), Matrix(), static_cast<int>(labels(static_cast<Index>(i), 0))});
            }
            break;
        }
        }
    }
    return out;
}

DatasetSplit<Sample> load_samples(const RunConfig& cfg) {
    const fs::path dir = cfg.data_path();
    if (!fs::exists(dir / "meta.json"))
        throw IoError("no dataset in " + dir.string() + " (run `gsig gen` with the same config first)");
    const json meta = json::parse(read_file(dir / "meta.json"));
    if (meta.value("task", "") != to_string(cfg.task))
        throw ValidationError("dataset in " + dir.string() + " was generated for task '" + meta.value("task", "") + "'");
    GeneratedDataset data;
    for (const auto& name : dataset_files(cfg.task)) data.files.emplace_back(name, read_tensor(dir / name));
    return samples_from_dataset(cfg, data);
}

ModelConfig model_config_for(const RunConfig& cfg, const DatasetSplit<Sample>& data) {
    if (data.train.empty()) throw ValidationError("dataset has no training samples");
    const Sample& first = data.train.front();
    ModelConfig mc;
    mc.input_rows = first.input.rows();
    mc.nodes = first.input.cols();
    mc.h1 = cfg.model.h1;
    mc.h2 = cfg.model.h2;
    mc.k = cfg.model.k;
    mc.heads = cfg.model.heads;
    mc.layers = cfg.model.layers;
    mc.layer = cfg.model.layer;
    switch (cfg.task) {
    case TaskKind::Eta: mc.head = HeadKind::PairwiseRegression; break;
    case TaskKind::Kpz:
        mc.head = HeadKind::NodeRegression;
        mc.out_rows = first.target.rows();
        break;
    case TaskKind::PointCloud:
        mc.head = HeadKind::Classification;
        mc.classes = cfg.pointcloud.classes;
        break;
    }
    mc.validate();
    return mc;
}

// ---------------------------------------------------------- checkpoints

namespace {

json model_config_json(const ModelConfig& c) {
    return {{"input_rows", c.input_rows},
            {"nodes", c.nodes},
            {"h1", c.h1},
            {"h2", c.h2},
            {"k", c.k},
            {"heads", c.heads},
            {"layers", c.layers},
            {"head", to_string(c.head)},
            {"out_rows", c.out_rows},
            {"classes", c.classes},
            {"sparse", c.layer.sparse},
            {"scaled_init", c.layer.scaled_init},
            {"activation", to_string(c.layer.activation)},
            {"trainable", c.layer.trainable}};
}

ModelConfig model_config_from_json(const json& j) {
    try {
        ModelConfig c;
        c.input_rows = j.at("input_rows").get<Index>();
        c.nodes = j.at("nodes").get<Index>();
        c.h1 = j.at("h1").get<Index>();
        c.h2 = j.at("h2").get<Index>();
        c.k = j.at("k").get<Index>();
        c.heads = j.at("heads").get<Index>();
        c.layers = j.at("layers").get<Index>();
        c.head = parse_head(j.at("head").get<std::string>());
        c.out_rows = j.at("out_rows").get<Index>();
        c.classes = j.at("classes").get<Index>();
        c.layer.sparse = j.at("sparse").get<bool>();
        c.layer.scaled_init = j.at("scaled_init").get<bool>();
        c.layer.activation = parse_activation(j.at("activation").get<std::string>());
        c.layer.trainable = j.at("trainable").get<bool>();
        return c;
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed checkpoint model.json: ") + e.what());
    }
}

Tensor view_tensor(const ConstTensorView& v) {
    return to_tensor(Eigen::Map<const Matrix>(v.values.data(), v.rows, v.cols));
}

Tensor pattern_tensor(const std::vector<int>& cols) {
    Tensor t;
    t.dims = {1, cols.size()};
    for (int c : cols) t.values.push_back(static_cast<float>(c));
    return t;
}

void round_matrix(Matrix& m) { m = m.cast<float>().cast<double>(); }

void round_to_storage(Checkpoint& ckpt) {
    for (auto& v : ckpt.model.tensors())
        for (double& x : v.values) x = static_cast<double>(static_cast<float>(x));
    round_matrix(ckpt.normalizer.input_mean);
    round_matrix(ckpt.normalizer.input_scale);
    round_matrix(ckpt.normalizer.target_mean);
}

} // namespace

void add_checkpoint_files(AtomicBatch& batch, const fs::path& dir, const Checkpoint& ckpt) {
    json doc;
    doc["format"] = "gsig-checkpoint";
    doc["version"] = 1;
    doc["config"] = model_config_json(ckpt.model.config);
    json names = json::array();
    for (const auto& v : ckpt.model.tensors()) {
        names.push_back(v.name);
        batch.add(dir / (v.name + ".gsig"), encode_tensor(view_tensor(v)));
    }
    doc["tensors"] = names;
    for (std::size_t l = 0; l < ckpt.model.layers.size(); ++l)
        batch.add(dir / ("layer" + std::to_string(l) + ".a_cols.gsig"),
                  encode_tensor(pattern_tensor(ckpt.model.layers[l].a_cols)));
    const auto& n = ckpt.normalizer;
    doc["normalizer"] = {{"inputs", n.input_mean.size() > 0}, {"targets", n.target_mean.size() > 0}};
    if (n.input_mean.size() > 0) {
        batch.add(dir / "norm_input_mean.gsig", encode_tensor(to_tensor(n.input_mean)));
        batch.add(dir / "norm_input_scale.gsig", encode_tensor(to_tensor(n.input_scale)));
    }
    if (n.target_mean.size() > 0) batch.add(dir / "norm_target_mean.gsig", encode_tensor(to_tensor(n.target_mean)));
    batch.add(dir / "model.json", doc.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& dir) {
    if (!fs::exists(dir / "model.json")) throw IoError("no checkpoint in " + dir.string() + " (run `gsig train` first)");
    const json doc = json::parse(read_file(dir / "model.json"));
    Checkpoint ckpt;
    Rng scratch(0);
    ckpt.model = make_model(model_config_from_json(doc.at("config")), scratch);
    for (std::size_t l = 0; l < ckpt.model.layers.size(); ++l) {
        const Tensor t = read_tensor(dir / ("layer" + std::to_string(l) + ".a_cols.gsig"));
        auto& cols = ckpt.model.layers[l].a_cols;
        if (t.values.size() != cols.size()) throw IoError("sparsity pattern of layer " + std::to_string(l) + " has the wrong size");
        for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = static_cast<int>(t.values[i]);
    }
    for (auto& v : ckpt.model.tensors()) {
        const Matrix m = to_matrix(read_tensor(dir / (v.name + ".gsig")));
        if (m.rows() != v.rows || m.cols() != v.cols) throw IoError("tensor " + v.name + " has the wrong shape");
        Eigen::Map<Matrix>(v.values.data(), v.rows, v.cols) = m;
    }
    const auto& norm = doc.at("normalizer");
    if (norm.at("inputs").get<bool>()) {
        ckpt.normalizer.input_mean = to_matrix(read_tensor(dir / "norm_input_mean.gsig"));
        ckpt.normalizer.input_scale = to_matrix(read_tensor(dir / "norm_input_scale.gsig"));
    }
    if (norm.at("targets").get<bool>())
        ckpt.normalizer.target_mean = to_matrix(read_tensor(dir / "norm_target_mean.gsig"));
    return ckpt;
}

// ------------------------------------------------------------- commands

namespace {

double raw_metric(const Checkpoint& ckpt, const std::vector<Sample>& samples) {
    const bool classify = ckpt.model.config.head == HeadKind::Classification;
    double total = 0;
    for (const auto& s : samples) {
        const Matrix pred = ckpt.normalizer.restore(model_forward(ckpt.model, ckpt.normalizer.apply_input(s.input)));
        if (classify) {
            Index arg = 0;
            pred.col(0).maxCoeff(&arg);
            total += arg == s.label ? 1.0 : 0.0;
        } else {
            total += mse_loss(pred, s.target).loss;
        }
    }
    return total / static_cast<double>(samples.size());
}

json baselines(const RunConfig& cfg, const DatasetSplit<Sample>& data) {
    json out;
    switch (cfg.task) {
    case TaskKind::Eta:
        out["target-mean"] = baseline_predict(BaselineKind::TargetMean, data.train, data.test);
        break;
    case TaskKind::Kpz:
        out["persistence"] = baseline_predict(BaselineKind::Persistence, data.train, data.test);
        out["target-mean"] = baseline_predict(BaselineKind::TargetMean, data.train, data.test);
        break;
    case TaskKind::PointCloud: {
        std::map<int, int> counts;
        for (const auto& s : data.train) ++counts[s.label];
        int best = 0;
        int best_count = -1;
        for (const auto& [label, count] : counts)
            if (count > best_count) best = label, best_count = count;
        double hits = 0;
        for (const auto& s : data.test) hits += s.label == best ? 1.0 : 0.0;
        out["majority"] = hits / static_cast<double>(data.test.size());
        break;
    }
    }
    return out;
}

json timing(const GSignatureModel& model, const std::vector<Sample>& samples) {
    using clock = std::chrono::steady_clock;
    const std::size_t n = std::min<std::size_t>(samples.size(), 32);
    auto t0 = clock::now();
    for (std::size_t i = 0; i < n; ++i) model_forward(model, samples[i].input);
    auto t1 = clock::now();
    for (std::size_t i = 0; i < n; ++i) {
        ForwardCache cache;
        const Matrix pred = model_forward(model, samples[i].input, cache);
        model_backward(model, cache, sample_loss(model, pred, samples[i]).grad);
    }
    auto t2 = clock::now();
    const double count = static_cast<double>(std::max<std::size_t>(n, 1));
    return {{"forward_s_per_sample", std::chrono::duration<double>(t1 - t0).count() / count},
            {"forward_backward_s_per_sample", std::chrono::duration<double>(t2 - t1).count() / count}};
}

} // namespace

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
    const GeneratedDataset data = generate_dataset(cfg);
    const fs::path dir = cfg.data_path();
    AtomicBatch batch;
    for (const auto& [name, tensor] : data.files) batch.add(dir / name, encode_tensor(tensor));
    batch.add(dir / "meta.json", data.meta.dump(2) + "\n");
    batch.commit();
    out << "wrote " << data.files.size() << " tensor files and meta.json to " << dir.string() << "\n";
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
    const DatasetSplit<Sample> raw = load_samples(cfg);
    const ModelConfig mc = model_config_for(cfg, raw);
    const bool regression = mc.head != HeadKind::Classification;
    Checkpoint ckpt;
    ckpt.normalizer = Normalizer::fit(raw.train, cfg.train.normalize_inputs, cfg.train.center_targets && regression);
    const DatasetSplit<Sample> data = ckpt.normalizer.apply(raw);

    Rng model_rng(cfg.derived_seed("model"));
    const GSignatureModel model = make_model(mc, model_rng);
    TrainConfig tc = cfg.train.cfg;
    tc.seed = cfg.derived_seed("train");

    const auto start = std::chrono::steady_clock::now();
    TrainResult result = train(model, data, tc, [&out](const EpochRecord& e) {
        if (e.epoch % 10 == 0)
            out << "epoch " << e.epoch << " train " << fmt("%.6g", e.train_loss) << " val " << fmt("%.6g", e.val_loss)
                << " lr " << fmt("%.3g", e.lr) << "\n";
    });
    const double train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ckpt.model = std::move(result.model);
    round_to_storage(ckpt);  // metrics then match what `eval` sees after reloading

    const std::string metric = regression ? "mse" : "accuracy";
    json metrics;
    metrics["task"] = to_string(cfg.task);
    metrics["metric"] = metric;
    metrics["test"] = raw_metric(ckpt, raw.test);
    metrics["val"] = raw_metric(ckpt, raw.val);
    metrics["baselines"] = baselines(cfg, raw);
    metrics["parameters"] = count_parameters(ckpt.model);
    metrics["best_epoch"] = result.history.best_epoch;
    metrics["epochs_run"] = result.history.epochs.size();
    metrics["samples"] = {{"train", raw.train.size()}, {"val", raw.val.size()}, {"test", raw.test.size()}};
    metrics["timing"] = timing(ckpt.model, data.test);
    metrics["timing"]["train_s"] = train_seconds;

    const fs::path dir(cfg.out);
    AtomicBatch batch;
    add_checkpoint_files(batch, dir / "checkpoint", ckpt);
    batch.add(dir / "history.csv", result.history.to_csv());
    batch.add(dir / "metrics.json", metrics.dump(2) + "\n");
    batch.add(dir / "config.json", cfg.to_json().dump(2) + "\n");
    batch.commit();

    out << "test " << metric << " " << fmt("%.6g", metrics["test"].get<double>());
    for (const auto& [name, value] : metrics["baselines"].items())
        out << ", " << name << " " << fmt("%.6g", value.get<double>());
    out << "\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
    const DatasetSplit<Sample> raw = load_samples(cfg);
    const fs::path dir(cfg.out);
    const Checkpoint ckpt = load_checkpoint(dir / "checkpoint");
    const ModelConfig expected = model_config_for(cfg, raw);
    if (expected.input_rows != ckpt.model.config.input_rows || expected.nodes != ckpt.model.config.nodes)
        throw ValidationError("checkpoint does not match the dataset shape");
    json report;
    report["metric"] = ckpt.model.config.head == HeadKind::Classification ? "accuracy" : "mse";
    report["test"] = raw_metric(ckpt, raw.test);
    report["val"] = raw_metric(ckpt, raw.val);
    report["baselines"] = baselines(cfg, raw);
    write_file_atomic(dir / "eval.json", report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return kExitOk;
}

int cmd_gradcheck(const RunConfig& cfg, bool corrupt, std::ostream& out) {
    const double tol = cfg.gradcheck.tolerance;
    double worst = 0;
    for (const auto& c : default_grad_check_cases(cfg.seed)) {
        const GradCheckReport report = model_grad_check(c.model, c.sample, cfg.gradcheck.eps, corrupt ? 1.0 : 0.0);
        for (const auto& e : report.entries)
            out << c.label << " " << e.name << " " << fmt("%.3e", e.max_rel_error)
                << (e.max_rel_error < tol ? "" : "  FAIL") << "\n";
        worst = std::max(worst, report.max_rel_error);
    }
    out << "max relative error " << fmt("%.3e", worst) << " (tolerance " << fmt("%.0e", tol) << ")\n";
    return worst < tol ? kExitOk : kExitGradcheck;
}

int cmd_sigcheck(const RunConfig& cfg, std::ostream& out) {
    bool ok = true;
    for (const auto& line : signature_checks(cfg.seed)) {
        out << (line.passed ? "PASS " : "FAIL ") << line.name << ": " << line.detail << "\n";
        ok = ok && line.passed;
    }
    return ok ? kExitOk : kExitSigcheck;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& out) {
    std::vector<AblationConfig> combos;
    if (cfg.ablate.combos.empty())
        combos = standard_combos();
    else
        for (const auto& name : cfg.ablate.combos) combos.push_back(combo_by_name(name));

    const fs::path dir(cfg.out);
    AtomicBatch batch;
    if (cfg.ablate.mav) {
        std::string csv = "combo,k,step,mean,min,max,blowup\n";
        for (const auto& combo : combos) {
            const MavAnalysis a = run_mav_analysis(combo, cfg.ablate.h2, cfg.ablate.k_list, cfg.ablate.steps,
                                                   cfg.ablate.samples, cfg.derived_seed("mav"));
            const std::string body = mav_csv(a);
            std::size_t pos = body.find('\n') + 1;
            while (pos < body.size()) {
                const std::size_t end = body.find('\n', pos);
                csv += combo.name + "," + body.substr(pos, end - pos + 1);
                pos = end + 1;
            }
            out << "mav " << combo.name;
            for (Index k : cfg.ablate.k_list)
                out << "  k=" << k << (a.blew_up(k) ? " blow-up" : " peak " + fmt("%.3g", a.peak(k)));
            out << "\n";
        }
        batch.add(dir / "mav_analysis.csv", csv);
    }
    if (cfg.ablate.grid) {
        const DatasetSplit<Sample> raw = load_samples(cfg);
        GridTask task;
        task.model = model_config_for(cfg, raw);
        const bool regression = task.model.head != HeadKind::Classification;
        const Normalizer norm =
            Normalizer::fit(raw.train, cfg.train.normalize_inputs, cfg.train.center_targets && regression);
        task.train = cfg.train.cfg;
        task.train.max_epochs = cfg.ablate.grid_epochs;
        task.train.patience = cfg.ablate.grid_epochs;
        task.train.seed = cfg.derived_seed("train");
        task.model_seed = cfg.derived_seed("model");
        const auto rows = ablation_grid(task, combos, norm.apply(raw));
        for (const auto& r : rows)
            out << "grid " << r.combo.name << " val " << fmt("%.6g", r.val_mse) << " params " << r.params
                << (r.blowup ? " blow-up" : "") << "\n";
        batch.add(dir / "ablation_grid.csv", grid_csv(rows));
    }
    batch.commit();
    return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        if (name == "gen") return cmd_gen(resolve_config(opts, true), out);
        if (name == "train") return cmd_train(resolve_config(opts, true), out);
        if (name == "eval") return cmd_eval(resolve_config(opts, true), out);
        if (name == "ablate") return cmd_ablate(resolve_config(opts, true), out);
        if (name == "gradcheck") return cmd_gradcheck(resolve_config(opts, false), opts.corrupt_gradient, out);
        if (name == "sigcheck") return cmd_sigcheck(resolve_config(opts, false), out);
        err << "unknown command '" << name << "'\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what();
        if (e.step() >= 0) err << " (step " << e.step() << ")";
        err << "\n";
        return kExitNumeric;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

} // namespace gsig

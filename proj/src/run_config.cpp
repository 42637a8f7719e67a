#include "gsig/run_config.hpp"

#include "gsig/tensor_io.hpp"

#include <set>

namespace gsig {

using nlohmann::json;

TaskKind parse_task(const std::string& text) {
    if (text == "eta") return TaskKind::Eta;
    if (text == "kpz") return TaskKind::Kpz;
    if (text == "pointcloud") return TaskKind::PointCloud;
    throw ValidationError("unknown task '" + text + "' (expected eta, kpz or pointcloud)");
}

std::string to_string(TaskKind task) {
    switch (task) {
    case TaskKind::Eta: return "eta";
    case TaskKind::Kpz: return "kpz";
    case TaskKind::PointCloud: return "pointcloud";
    }
    return "?";
}

namespace {

// Object reader that remembers which keys were consumed.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ValidationError(where() + " must be a JSON object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!node_.contains(key)) return;
        seen_.insert(key);
        try {
            out = node_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ValidationError(where(key) + " has the wrong type");
        }
    }

    template <typename Parse, typename T>
    void get_enum(const std::string& key, T& out, Parse parse) {
        std::string text;
        if (!node_.contains(key)) return;
        get(key, text);
        try {
            out = parse(text);
        } catch (const ValidationError& e) {
            throw ValidationError(where(key) + ": " + e.what());
        }
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        return Section(node_.at(key), where(key));
    }

    void finish() const {
        for (const auto& [key, _] : node_.items())
            if (!seen_.count(key)) throw ValidationError("unknown config key '" + where(key) + "'");
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_split(Section& s, SplitSizes& split) {
    s.get("train", split.train);
    s.get("val", split.val);
    s.get("test", split.test);
    if (split.train < 1 || split.val < 1 || split.test < 1)
        throw ValidationError(s.where() + ": train, val and test sizes must be >= 1");
}

json split_json(const SplitSizes& s) { return {{"train", s.train}, {"val", s.val}, {"test", s.test}}; }

double noise_preset(const std::string& name) {
    if (name == "high") return kKpzNoiseHigh;
    if (name == "low") return kKpzNoiseLow;
    if (name == "zero") return kKpzNoiseZero;
    throw ValidationError("unknown noise preset '" + name + "' (expected high, low or zero)");
}

void read_data(Section& s, RunConfig& cfg) {
    switch (cfg.task) {
    case TaskKind::Eta: {
        auto& d = cfg.eta;
        s.get("nodes", d.nodes);
        s.get("edges", d.edges);
        std::string topology = d.shared_topology ? "shared" : "independent";
        s.get("topology", topology);
        if (topology != "shared" && topology != "independent")
            throw ValidationError(s.where("topology") + " must be shared or independent");
        d.shared_topology = topology == "shared";
        s.get("cap_factor", d.cap_factor);
        s.get("m", d.m);
        read_split(s, d.split);
        if (d.nodes < 2) throw ValidationError(s.where("nodes") + " must be >= 2");
        if (!(d.cap_factor > 0)) throw ValidationError(s.where("cap_factor") + " must be positive");
        if (d.m < 1 || d.m >= d.nodes) throw ValidationError(s.where("m") + " must satisfy 0 < m < nodes");
        break;
    }
    case TaskKind::Kpz: {
        auto& d = cfg.kpz;
        auto& p = d.params;
        s.get("n_x", p.n_x);
        s.get("nu", p.nu);
        s.get("lambda", p.lambda);
        if (s.has("noise") && s.has("noise_std"))
            throw ValidationError(s.where() + ": give either noise or noise_std, not both");
        std::string preset;
        s.get("noise", preset);
        if (!preset.empty()) p.noise_std = noise_preset(preset);
        s.get("noise_std", p.noise_std);
        s.get("dt_solver", p.dt_solver);
        s.get("dt_out", p.dt_out);
        s.get("steps", p.n_out_steps);
        s.get("domain_length", p.domain_length);
        s.get("ic_modes", p.ic_modes);
        s.get("ic_amplitude", p.ic_amplitude);
        s.get("in_steps", d.in_steps);
        s.get("out_steps", d.out_steps);
        read_split(s, d.split);
        p.validate();
        if (d.in_steps < 1 || d.out_steps < 1) throw ValidationError(s.where() + ": window sizes must be >= 1");
        if (p.n_out_steps < d.in_steps + d.out_steps)
            throw ValidationError(s.where("steps") + " must be at least in_steps + out_steps");
        break;
    }
    case TaskKind::PointCloud: {
        auto& d = cfg.pointcloud;
        s.get("points", d.points);
        s.get("classes", d.classes);
        s.get("per_class", d.per_class);
        s.get("jitter", d.jitter);
        s.get("m", d.m);
        read_split(s, d.split);
        if (d.classes < 2) throw ValidationError(s.where("classes") + " must be >= 2");
        if (d.points < 2) throw ValidationError(s.where("points") + " must be >= 2");
        if (!(d.jitter >= 0)) throw ValidationError(s.where("jitter") + " must be >= 0");
        if (d.m < 1 || d.m >= d.points) throw ValidationError(s.where("m") + " must satisfy 0 < m < points");
        if (d.split.train + d.split.val + d.split.test > d.per_class * d.classes)
            throw ValidationError(s.where() + ": split sizes exceed classes * per_class");
        break;
    }
    }
    s.finish();
}

void read_model(Section& s, ModelSection& m) {
    s.get("h1", m.h1);
    s.get("h2", m.h2);
    s.get("k", m.k);
    s.get("heads", m.heads);
    s.get("layers", m.layers);
    s.get("sparse", m.layer.sparse);
    s.get("scaled_init", m.layer.scaled_init);
    s.get_enum("activation", m.layer.activation, parse_activation);
    s.get("trainable", m.layer.trainable);
    if (s.has("input_mode")) {
        InputMode mode{};
        s.get_enum("input_mode", mode, parse_input_mode);
        m.input_mode = mode;
    }
    s.finish();
    if (m.h1 < 1 || m.h2 < 1 || m.k < 1 || m.heads < 1 || m.layers < 1)
        throw ValidationError(s.where() + ": h1, h2, k, heads and layers must be >= 1");
}

void read_train(Section& s, TrainSection& t) {
    auto& c = t.cfg;
    s.get("max_epochs", c.max_epochs);
    s.get("patience", c.patience);
    s.get("batch_size", c.batch_size);
    s.get("lr", c.lr);
    s.get("lr_min", c.lr_min);
    s.get("weight_decay", c.weight_decay);
    s.get_enum("optimizer", c.optimizer, parse_optimizer);
    s.get("cosine_schedule", c.cosine_schedule);
    s.get("augmentation", c.augmentation);
    s.get("normalize_inputs", t.normalize_inputs);
    s.get("center_targets", t.center_targets);
    s.finish();
    try {
        c.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(s.where() + ": " + e.what());
    }
}

void read_ablate(Section& s, AblateSection& a) {
    std::string mode;
    s.get("mode", mode);
    if (!mode.empty()) {
        if (mode != "mav" && mode != "grid" && mode != "both")
            throw ValidationError(s.where("mode") + " must be mav, grid or both");
        a.mav = mode != "grid";
        a.grid = mode != "mav";
    }
    s.get("h2", a.h2);
    s.get("k_list", a.k_list);
    s.get("steps", a.steps);
    s.get("samples", a.samples);
    s.get("combos", a.combos);
    s.get("grid_epochs", a.grid_epochs);
    s.finish();
    if (a.k_list.empty()) throw ValidationError(s.where("k_list") + " must not be empty");
    for (Index k : a.k_list)
        if (k < 1) throw ValidationError(s.where("k_list") + " entries must be >= 1");
    if (a.h2 < 1 || a.steps < 1 || a.samples < 1 || a.grid_epochs < 1)
        throw ValidationError(s.where() + ": sizes must be >= 1");
    for (const auto& name : a.combos) combo_by_name(name);
}

void read_gradcheck(Section& s, GradcheckSection& g) {
    s.get("eps", g.eps);
    s.get("tolerance", g.tolerance);
    s.finish();
    if (!(g.eps > 0) || !(g.tolerance > 0)) throw ValidationError(s.where() + ": eps and tolerance must be positive");
}

} // namespace

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    Section root(doc, "");
    if (!root.has("task")) throw ValidationError("config needs a task");
    root.get_enum("task", cfg.task, parse_task);
    root.get("seed", cfg.seed);
    root.get("out", cfg.out);
    std::string dir;
    root.get("data_dir", dir);
    if (!dir.empty()) cfg.data_dir = dir;
    if (root.has("data")) {
        Section s = root.sub("data");
        read_data(s, cfg);
    } else {
        const json empty = json::object();
        Section s(empty, "data");
        read_data(s, cfg);
    }
    if (root.has("model")) {
        Section s = root.sub("model");
        read_model(s, cfg.model);
    }
    if (root.has("train")) {
        Section s = root.sub("train");
        read_train(s, cfg.train);
    }
    if (root.has("ablate")) {
        Section s = root.sub("ablate");
        read_ablate(s, cfg.ablate);
    }
    if (root.has("gradcheck")) {
        Section s = root.sub("gradcheck");
        read_gradcheck(s, cfg.gradcheck);
    }
    root.finish();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return from_json(doc);
}

json RunConfig::to_json() const {
    json doc;
    doc["task"] = to_string(task);
    doc["seed"] = seed;
    doc["out"] = out;
    if (data_dir) doc["data_dir"] = *data_dir;
    switch (task) {
    case TaskKind::Eta:
        doc["data"] = {{"nodes", eta.nodes},
                       {"edges", eta.edges},
                       {"topology", eta.shared_topology ? "shared" : "independent"},
                       {"cap_factor", eta.cap_factor},
                       {"m", eta.m}};
        doc["data"].update(split_json(eta.split));
        break;
    case TaskKind::Kpz: {
        const auto& p = kpz.params;
        doc["data"] = {{"n_x", p.n_x},
                       {"nu", p.nu},
                       {"lambda", p.lambda},
                       {"noise_std", p.noise_std},
                       {"dt_solver", p.dt_solver},
                       {"dt_out", p.dt_out},
                       {"steps", p.n_out_steps},
                       {"domain_length", p.domain_length},
                       {"ic_modes", p.ic_modes},
                       {"ic_amplitude", p.ic_amplitude},
                       {"in_steps", kpz.in_steps},
                       {"out_steps", kpz.out_steps}};
        doc["data"].update(split_json(kpz.split));
        break;
    }
    case TaskKind::PointCloud:
        doc["data"] = {{"points", pointcloud.points},
                       {"classes", pointcloud.classes},
                       {"per_class", pointcloud.per_class},
                       {"jitter", pointcloud.jitter},
                       {"m", pointcloud.m}};
        doc["data"].update(split_json(pointcloud.split));
        break;
    }
    doc["model"] = {{"h1", model.h1},
                    {"h2", model.h2},
                    {"k", model.k},
                    {"heads", model.heads},
                    {"layers", model.layers},
                    {"sparse", model.layer.sparse},
                    {"scaled_init", model.layer.scaled_init},
                    {"activation", to_string(model.layer.activation)},
                    {"trainable", model.layer.trainable},
                    {"input_mode", to_string(input_mode())}};
    const auto& t = train.cfg;
    doc["train"] = {{"max_epochs", t.max_epochs},
                    {"patience", t.patience},
                    {"batch_size", t.batch_size},
                    {"lr", t.lr},
                    {"lr_min", t.lr_min},
                    {"weight_decay", t.weight_decay},
                    {"optimizer", to_string(t.optimizer)},
                    {"cosine_schedule", t.cosine_schedule},
                    {"augmentation", t.augmentation},
                    {"normalize_inputs", train.normalize_inputs},
                    {"center_targets", train.center_targets}};
    doc["ablate"] = {{"mode", ablate.mav && ablate.grid ? "both" : (ablate.grid ? "grid" : "mav")},
                     {"h2", ablate.h2},
                     {"k_list", ablate.k_list},
                     {"steps", ablate.steps},
                     {"samples", ablate.samples},
                     {"combos", ablate.combos},
                     {"grid_epochs", ablate.grid_epochs}};
    doc["gradcheck"] = {{"eps", gradcheck.eps}, {"tolerance", gradcheck.tolerance}};
    return doc;
}

std::filesystem::path RunConfig::data_path() const {
    return data_dir ? std::filesystem::path(*data_dir) : std::filesystem::path(out) / "data";
}

InputMode RunConfig::input_mode() const {
    if (model.input_mode) return *model.input_mode;
    return task == TaskKind::Kpz ? InputMode::NodesOnly : InputMode::EdgesOnly;
}

std::uint64_t RunConfig::derived_seed(const std::string& purpose) const {
    return Rng::derive(seed, fnv1a(purpose)).next();
}

} // namespace gsig

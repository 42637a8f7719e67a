#include "gsig/ablation.hpp"

#include <doctest.h>

#include <set>

using namespace gsig;

TEST_CASE("the standard grid has eleven distinct combos") {
    const auto combos = standard_combos();
    CHECK(combos.size() == 11);
    std::set<std::string> names;
    for (const auto& c : combos) names.insert(c.name);
    CHECK(names.size() == 11);
    CHECK(combos.front().name == "none");
    for (const char* n : {"none", "trainability", "all", "sparsity", "initialization", "activation",
                          "sparsity+initialization", "sparsity+activation", "initialization+activation", "sigmoid",
                          "tanh"})
        CHECK(names.count(n) == 1);
    CHECK_THROWS_AS(combo_by_name("everything"), ValidationError);
}

TEST_CASE("combo flags map onto layer options") {
    const LayerOptions ours = combo_by_name("none").layer_options();
    CHECK(ours.sparse);
    CHECK(ours.scaled_init);
    CHECK(ours.activation == Activation::ScaledIdentity);
    CHECK(ours.trainable);

    const LayerOptions original = combo_by_name("all").layer_options();
    CHECK_FALSE(original.sparse);
    CHECK_FALSE(original.scaled_init);
    CHECK(original.activation == Activation::Identity);

    CHECK_FALSE(combo_by_name("trainability").layer_options().trainable);
    CHECK(combo_by_name("sigmoid").layer_options().activation == Activation::Sigmoid);
    CHECK(combo_by_name("tanh").layer_options().activation == Activation::Tanh);
    CHECK(combo_by_name("sigmoid").layer_options().sparse);
}

TEST_CASE("ablated layer equals init_layer with the mapped options") {
    Rng a(81), b(81);
    const AblationConfig cfg = combo_by_name("sparsity+initialization");
    const LayerParams p = build_ablated_layer(6, 4, 2, cfg, a);
    const LayerParams q = init_layer(6, 4, 2, b, cfg.layer_options());
    CHECK(p.a == q.a);
    CHECK(p.row_nnz == 4);
}

TEST_CASE("freezing removes A and b from the parameter count") {
    Rng a(82), b(82);
    ModelConfig c;
    c.input_rows = 3;
    c.nodes = 5;
    c.h1 = 4;
    c.h2 = 6;
    c.k = 3;
    c.out_rows = 1;
    c.layer = combo_by_name("none").layer_options();
    const Index full = count_parameters(make_model(c, a));
    c.layer = combo_by_name("trainability").layer_options();
    const GSignatureModel frozen = make_model(c, b);
    const LayerParams& l = frozen.layers.front();
    CHECK(full - count_parameters(frozen) == l.a.size() + l.b.size());
}

TEST_CASE("mav analysis: adjusted stays bounded, original blows up") {
    const MavAnalysis ours = run_mav_analysis(combo_by_name("none"), 64, {16, 64}, 100, 2, 3);
    const MavAnalysis orig = run_mav_analysis(combo_by_name("all"), 64, {16, 64}, 100, 2, 3);
    CHECK(ours.rows.size() == 200);
    for (Index k : {16, 64}) {
        CHECK_FALSE(ours.blew_up(k));
        CHECK(ours.peak(k) < 1e3);
        CHECK((orig.blew_up(k) || orig.peak(k) >= 1e3 * ours.peak(k)));
    }
}

TEST_CASE("mav blow-up flags never clear") {
    const MavAnalysis orig = run_mav_analysis(combo_by_name("all"), 32, {32}, 60, 1, 4);
    bool seen = false;
    for (const auto& r : orig.rows) {
        if (seen) CHECK(r.blowup);
        seen = seen || r.blowup;
    }
    CHECK(seen);
}

TEST_CASE("mav analysis is reproducible and its csv has the documented header") {
    const MavAnalysis a = run_mav_analysis(combo_by_name("none"), 8, {4}, 5, 1, 9);
    const MavAnalysis b = run_mav_analysis(combo_by_name("none"), 8, {4}, 5, 1, 9);
    CHECK(mav_csv(a) == mav_csv(b));
    CHECK(mav_csv(a).rfind("k,step,mean,min,max,blowup\n", 0) == 0);
    CHECK(a.rows.front().step == 1);
    CHECK_THROWS_AS(run_mav_analysis(combo_by_name("none"), 8, {}, 5, 1, 9), ValidationError);
}

TEST_CASE("grid rows do not depend on combo order") {
    Rng rng(83);
    DatasetSplit<Sample> data;
    for (int i = 0; i < 12; ++i) {
        Sample s;
        s.input = sample_gaussian(rng, 2, 4, 0, 1);
        s.target = s.input.colwise().sum();
        (i < 8 ? data.train : data.val).push_back(s);
    }
    GridTask task;
    task.model.input_rows = 2;
    task.model.nodes = 4;
    task.model.h1 = 3;
    task.model.h2 = 4;
    task.model.k = 3;
    task.model.out_rows = 1;
    task.train.max_epochs = 2;
    task.model_seed = 7;
    const std::vector<AblationConfig> fwd{combo_by_name("none"), combo_by_name("tanh"), combo_by_name("all")};
    const std::vector<AblationConfig> rev{fwd[2], fwd[1], fwd[0]};
    const auto a = ablation_grid(task, fwd, data);
    const auto b = ablation_grid(task, rev, data);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a[i].val_mse == b[2 - i].val_mse);
        CHECK(a[i].params == b[2 - i].params);
    }
    CHECK(grid_csv(a).rfind("combo,omit_sparsity,omit_init,omit_activation,freeze_weights,activation_override,"
                            "val_mse,params,blowup\n",
                            0) == 0);
    CHECK_THROWS_AS(ablation_grid(task, {}, data), ValidationError);
}

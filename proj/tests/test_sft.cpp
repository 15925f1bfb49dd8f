#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scenelab/errors.hpp"
#include "scenelab/sft.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <limits>

using namespace scenelab;
using namespace scenelab::testing;

namespace {

DatasetBundle forged_sft_bundle(std::size_t n, std::uint64_t seed) {
    ForgeConfig cfg;
    cfg.n_total = n * 2;
    cfg.split_ratio = 0.5;
    cfg.seed = seed;
    const ForgedDataset data = forge_dataset(cfg);
    std::vector<McqSample> sft(data.samples.begin(), data.samples.begin() + static_cast<std::ptrdiff_t>(n));
    return make_bundle(data.scenes, std::move(sft));
}

PolicyDims dims_for(const ForgeConfig& cfg, const AtomVocab& vocab) {
    PolicyDims dims;
    dims.vocab_size = vocab.size();
    dims.max_options = cfg.k_options;
    dims.count_max = cfg.gen.count_max;
    return dims;
}

} // namespace

TEST_CASE("nll: uniform policy on an empty gold trace") {
    const TinyInstance t = make_tiny_instance(6, 4);
    McqSample q = t.question;
    q.gold_trace.clear(); // STOP-only target
    const PolicyParams params = PolicyParams::zeros(t.dims);
    const double expected = std::log(t.vocab.size() + 1.0) + std::log(4.0);
    CHECK(nll(params, t.vocab, t.scene, q) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("nll: saturated constructed logits drive the loss to zero") {
    const TinyInstance t = make_tiny_instance(6, 4);
    // gold trace = [DOMINANT_COLOR(red)], concluding the gold option "red"
    PolicyParams params = PolicyParams::zeros(t.dims);
    const int atom_idx = t.vocab.index_of(atom_dominant_color(Color::red));
    REQUIRE(atom_idx >= 0);
    params.trace_head.at(atom_idx, 44) = 40.0; // fires on the empty-trace flag
    const int pred_col = 37 + static_cast<int>(Predicate::dominant_color);
    params.trace_head.at(t.dims.stop_index(), pred_col) = 40.0; // STOP once the conclusion is down
    params.answer_content_weights[0] = 40.0;                    // follow the conclusion match

    CHECK(nll(params, t.vocab, t.scene, t.question) <= 1e-3);
}

TEST_CASE("nll is nonnegative") {
    const TinyInstance t = make_tiny_instance(4, 3);
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const PolicyParams params = PolicyParams::random_init(t.dims, seed, 0.8);
        CHECK(nll(params, t.vocab, t.scene, t.question) >= 0.0);
    }
}

TEST_CASE("train_sft: zero learning rate is a no-op with a flat curve") {
    ForgeConfig fc;
    const DatasetBundle data = forged_sft_bundle(16, 3);
    const AtomVocab vocab = AtomVocab::build(fc.gen.count_max);
    const PolicyParams init = PolicyParams::random_init(dims_for(fc, vocab), 1);

    SftConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    const SftResult result = train_sft(init, vocab, data, cfg);
    CHECK(params_equal(result.params, init));
    REQUIRE(result.loss_curve.size() == 4);
    for (double loss : result.loss_curve) CHECK(loss == result.loss_curve.front());
}

TEST_CASE("train_sft: single-sample loss decreases monotonically") {
    ForgeConfig fc;
    DatasetBundle data = forged_sft_bundle(8, 5);
    data.samples.resize(1);
    const AtomVocab vocab = AtomVocab::build(fc.gen.count_max);
    const PolicyParams init = PolicyParams::random_init(dims_for(fc, vocab), 2);

    SftConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 40;
    cfg.batch_size = 1;
    const SftResult result = train_sft(init, vocab, data, cfg);
    for (std::size_t i = 1; i < result.loss_curve.size(); ++i)
        CHECK(result.loss_curve[i] <= result.loss_curve[i - 1] + 1e-12);
    CHECK(result.loss_curve.back() < result.loss_curve.front());
}

TEST_CASE("train_sft: loss decreases on a real subset and params feed the reference") {
    ForgeConfig fc;
    const DatasetBundle data = forged_sft_bundle(64, 11);
    const AtomVocab vocab = AtomVocab::build(fc.gen.count_max);
    const PolicyParams init = PolicyParams::random_init(dims_for(fc, vocab), 3);

    SftConfig cfg;
    cfg.epochs = 8;
    cfg.seed = 21;
    const SftResult result = train_sft(init, vocab, data, cfg);
    CHECK(result.loss_curve.back() < result.loss_curve.front());
    CHECK(result.params.version > init.version);
}

TEST_CASE("train_sft: deterministic and schedule independent") {
    ForgeConfig fc;
    const DatasetBundle data = forged_sft_bundle(32, 7);
    const AtomVocab vocab = AtomVocab::build(fc.gen.count_max);
    const PolicyParams init = PolicyParams::random_init(dims_for(fc, vocab), 4);

    SftConfig cfg;
    cfg.epochs = 4;
    cfg.seed = 9;
    const SftResult a = train_sft(init, vocab, data, cfg, ExecMode::openmp);
    const SftResult b = train_sft(init, vocab, data, cfg, ExecMode::openmp);
    const SftResult c = train_sft(init, vocab, data, cfg, ExecMode::serial);
    CHECK(params_equal(a.params, b.params));
    CHECK(params_equal(a.params, c.params));
    CHECK(a.loss_curve == b.loss_curve);
    CHECK(a.loss_curve == c.loss_curve);
}

TEST_CASE("train_sft: rejects empty datasets and bad configs") {
    ForgeConfig fc;
    const AtomVocab vocab = AtomVocab::build(fc.gen.count_max);
    const PolicyParams init = PolicyParams::zeros(dims_for(fc, vocab));
    DatasetBundle empty;
    SftConfig cfg;
    CHECK_THROWS_AS(train_sft(init, vocab, empty, cfg), ConfigError);

    SftConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.epochs = 1;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("train_sft: non-finite loss aborts with a diagnostic") {
    ForgeConfig fc;
    const DatasetBundle data = forged_sft_bundle(4, 2);
    const AtomVocab vocab = AtomVocab::build(fc.gen.count_max);
    PolicyParams poisoned = PolicyParams::zeros(dims_for(fc, vocab));
    poisoned.trace_head.at(0, 0) = std::numeric_limits<double>::infinity();
    SftConfig cfg;
    cfg.epochs = 1;
    CHECK_THROWS_AS(train_sft(poisoned, vocab, data, cfg), ConfigError);
}

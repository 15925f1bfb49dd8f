#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scenelab/dataset_io.hpp"
#include "scenelab/errors.hpp"
#include "scenelab/scene_forge.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace scenelab;
using namespace scenelab::testing;

namespace {

std::vector<Vec2> lattice_3x3() {
    std::vector<Vec2> pts;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) pts.push_back({0.1 + 0.4 * c, 0.1 + 0.4 * r});
    }
    return pts;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("morphostats: two points at unit distance") {
    const Scene s = make_scene({make_object(0.0, 0.0), make_object(0.0, 1.0)});
    const MorphoStats st = compute_morphostats(s);
    CHECK(st.count == 2);
    CHECK(st.mean_nn_spacing == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("morphostats: density is count over area") {
    const Scene s = make_scene({make_object(0.1, 0.1), make_object(0.2, 0.2), make_object(0.3, 0.3)}, 2.0);
    CHECK(compute_morphostats(s).density == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("morphostats: empty scene") {
    const Scene s = make_scene({}, 1.0, 5);
    const MorphoStats st = compute_morphostats(s);
    CHECK(st.count == 0);
    CHECK(st.density == 0.0);
    CHECK(st.mean_nn_spacing == 0.0);
    CHECK(st.occupancy_ratio == 0.0);
    CHECK(st.clustering_label == Clustering::scattered);
}

TEST_CASE("morphostats ground-truth exactness on random scenes") {
    const GenParams gen;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const Scene s = generate_scene(gen, seed);
        const MorphoStats st = compute_morphostats(s);
        CHECK(std::abs(st.density * s.area - st.count) < 1e-12);
        CHECK(std::abs(st.occupancy_ratio * s.capacity - st.count) < 1e-12);
        CHECK(st.occupancy_ratio >= 0.0);
        CHECK(st.occupancy_ratio <= 1.0);
    }
}

TEST_CASE("clustering: exact 3x3 lattice is grid") {
    CHECK(classify_clustering(lattice_3x3()) == Clustering::grid);
}

TEST_CASE("clustering: collinear points are linear") {
    std::vector<Vec2> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({0.15 + 0.14 * i, 0.15 + 0.14 * i});
    CHECK(classify_clustering(pts) == Clustering::linear);

    std::vector<Vec2> horizontal;
    for (int i = 0; i < 6; ++i) horizontal.push_back({0.1 + 0.15 * i, 0.4});
    CHECK(classify_clustering(horizontal) == Clustering::linear);
}

TEST_CASE("clustering: fewer than 3 points is scattered") {
    CHECK(classify_clustering({}) == Clustering::scattered);
    CHECK(classify_clustering({{0.5, 0.5}}) == Clustering::scattered);
    CHECK(classify_clustering({{0.2, 0.2}, {0.8, 0.8}}) == Clustering::scattered);
}

TEST_CASE("clustering: a tight clump is not a line") {
    std::vector<Vec2> clump = {{0.5, 0.5}, {0.505, 0.502}, {0.498, 0.497}, {0.503, 0.5}};
    CHECK(classify_clustering(clump) == Clustering::scattered);
}

TEST_CASE("clustering is permutation and translation invariant") {
    const GenParams gen;
    Rng rng(99);
    int translated = 0;
    for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
        const Scene s = generate_scene(gen, seed);
        std::vector<Vec2> centers;
        for (const SceneObject& o : s.objects) centers.push_back(o.center);
        const Clustering label = classify_clustering(centers);

        std::vector<Vec2> shuffled = centers;
        rng.shuffle(shuffled);
        CHECK(classify_clustering(shuffled) == label);

        // shift by exactly representable offsets, staying inside the square
        bool fits = true;
        for (const Vec2& p : centers) fits = fits && p.x + 0.0625 <= 1.0 && p.y - 0.03125 >= 0.0;
        if (fits) {
            std::vector<Vec2> shifted;
            for (const Vec2& p : centers) shifted.push_back({p.x + 0.0625, p.y - 0.03125});
            CHECK(classify_clustering(shifted) == label);
            ++translated;
        }
    }
    CHECK(translated > 20);
}

TEST_CASE("generate_scene: zero-jitter 3x3 lattice lands on exact lattice points") {
    GenParams gen;
    gen.grid_jitter = 0.0;
    gen.margin = 0.1;
    for (auto& region : gen.regions) {
        region.w_grid = 1.0;
        region.w_line = 0.0;
        region.w_scatter = 0.0;
        region.count_lo = region.count_hi = 9;
        region.cap_lo = region.cap_hi = 16;
    }
    const Scene s = generate_scene(gen, 7);
    REQUIRE(s.objects.size() == 9);
    std::set<std::pair<double, double>> expected;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) expected.insert({0.1 + c * 0.4, 0.1 + r * 0.4});
    }
    std::set<std::pair<double, double>> got;
    for (const SceneObject& o : s.objects) got.insert({o.center.x, o.center.y});
    CHECK(got == expected);
    CHECK(compute_morphostats(s).clustering_label == Clustering::grid);
}

TEST_CASE("generate_scene: determinism and invariants") {
    const GenParams gen;
    const Scene a = generate_scene(gen, 42);
    const Scene b = generate_scene(gen, 42);
    CHECK(scenes_equal(a, b));

    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const Scene s = generate_scene(gen, seed);
        CHECK(static_cast<int>(s.objects.size()) <= s.capacity);
        CHECK(s.capacity > 0);
        CHECK(s.area > 0.0);
        for (const SceneObject& o : s.objects) {
            CHECK(o.center.x >= 0.0);
            CHECK(o.center.x <= 1.0);
            CHECK(o.center.y >= 0.0);
            CHECK(o.center.y <= 1.0);
            CHECK(o.size.x > 0.0);
            CHECK(o.size.y > 0.0);
            CHECK(o.orientation >= 0.0);
            CHECK(o.orientation < 3.14159265358979323846);
        }
    }
}

TEST_CASE("generate_scene: full scatter occupancy hits 1.0") {
    GenParams gen;
    gen.count_max = 40;
    for (auto& region : gen.regions) {
        region.w_grid = 0.0;
        region.w_line = 0.0;
        region.w_scatter = 1.0;
        region.count_lo = region.count_hi = 40;
        region.cap_lo = region.cap_hi = 40;
    }
    const Scene s = generate_scene(gen, 3);
    CHECK(compute_morphostats(s).occupancy_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generate_scene rejects bad parameters") {
    GenParams gen;
    gen.regions[0].cap_lo = 0;
    CHECK_THROWS_AS(generate_scene(gen, 1), ConfigError);

    GenParams jittery;
    jittery.margin = 0.1;
    jittery.grid_jitter = 0.2; // exceeds the margin, objects could leave the square
    CHECK_THROWS_AS(generate_scene(jittery, 1), ConfigError);
}

TEST_CASE("synthesize_mcq: count question over three vehicles") {
    const Scene s = make_scene({make_object(0.2, 0.2), make_object(0.5, 0.5), make_object(0.8, 0.8)}, 1.0, 6);
    const GenParams gen;
    const McqSample q = synthesize_mcq(s, Category::count, 4, 1, gen);
    CHECK(q.gold_content == "3");
    CHECK(q.options.size() == 4);
    CHECK(q.gold_slot() >= 0);
    std::set<std::string> uniq(q.options.begin(), q.options.end());
    CHECK(uniq.size() == 4);
    REQUIRE(!q.gold_trace.empty());
    CHECK(q.gold_trace.back() == atom_count_eq(ObjectClass::vehicle, 3));
    CHECK(verify_trace(s, q.gold_trace, gen.count_max).sound);
}

TEST_CASE("synthesize_mcq: sparse occupancy grounds the 'sparsely used' option") {
    // occupancy 2/20 = 0.1, the sparse band
    const Scene s = make_scene({make_object(0.2, 0.2), make_object(0.7, 0.7)}, 1.0, 20);
    const GenParams gen;
    bool saw_utilization = false;
    for (std::uint64_t seed = 0; seed < 16 && !saw_utilization; ++seed) {
        const McqSample q = synthesize_mcq(s, Category::reason, 4, seed, gen);
        if (q.stem.find("utilized") == std::string::npos) continue;
        saw_utilization = true;
        CHECK(q.gold_content == "sparsely used");
        CHECK(q.gold_trace.back() == atom_occupancy_band(OccupancyBand::sparse));
    }
    CHECK(saw_utilization);
}

TEST_CASE("synthesize_mcq: determinism and unsupported categories") {
    const Scene s = make_scene({make_object(0.2, 0.2, ObjectClass::ship, Color::blue, ShapeTag::linear)}, 1.0, 8);
    const GenParams gen;
    const McqSample a = synthesize_mcq(s, Category::color, 4, 5, gen);
    const McqSample b = synthesize_mcq(s, Category::color, 4, 5, gen);
    CHECK(samples_equal(a, b));
    CHECK(a.gold_content == "blue");

    const Scene empty = make_scene({}, 1.0, 8);
    CHECK_THROWS_AS(synthesize_mcq(empty, Category::color, 4, 1, gen), UnsupportedCategory);
    CHECK_THROWS_AS(synthesize_mcq(empty, Category::count, 4, 1, gen), UnsupportedCategory);
}

TEST_CASE("synthesize_mcq: scene category separates rural from urban") {
    const GenParams gen;
    int rural_seen = 0, urban_seen = 0;
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        const Scene s = generate_scene(gen, seed);
        const McqSample q = synthesize_mcq(s, Category::scene, 4, seed, gen);
        CHECK(q.options.size() == 2); // the rural/urban domain only has two values
        const bool is_rural = s.region_type == RegionType::rural_field;
        CHECK(q.gold_content == (is_rural ? "rural" : "urban"));
        (is_rural ? rural_seen : urban_seen)++;
    }
    CHECK(rural_seen > 0);
    CHECK(urban_seen > 0);
}

TEST_CASE("verify_trace: exact per-atom truth") {
    const Scene s = make_scene({make_object(0.2, 0.2), make_object(0.5, 0.5), make_object(0.8, 0.8)}, 1.0, 6);

    const TraceVerdict good = verify_trace(s, {atom_count_eq(ObjectClass::vehicle, 3)}, 24);
    CHECK(good.atom_truth == std::vector<bool>{true});
    CHECK(good.sound);

    const TraceVerdict bad = verify_trace(s, {atom_count_eq(ObjectClass::vehicle, 5)}, 24);
    CHECK(bad.atom_truth == std::vector<bool>{false});
    CHECK(!bad.sound);

    const TraceVerdict mixed =
        verify_trace(s, {atom_count_eq(ObjectClass::vehicle, 3), atom_dominant_color(Color::red)}, 24);
    CHECK(mixed.atom_truth == std::vector<bool>{true, false});
    CHECK(!mixed.sound);

    CHECK(!verify_trace(s, {}, 24).sound); // no evidence, no soundness
}

TEST_CASE("verify_trace: near-saturation claim on a sparse scene is unsound") {
    const Scene s = make_scene({make_object(0.2, 0.2), make_object(0.7, 0.7)}, 1.0, 20); // occupancy 0.1
    const TraceVerdict v = verify_trace(s, {atom_occupancy_band(OccupancyBand::near_saturation)}, 24);
    CHECK(!v.sound);
}

TEST_CASE("verify_trace: malformed atoms throw") {
    const Scene s = make_scene({make_object(0.2, 0.2)});
    CHECK_THROWS_AS(verify_trace(s, {atom_count_eq(ObjectClass::vehicle, -1)}, 24), MalformedAtom);
    CHECK_THROWS_AS(verify_trace(s, {atom_count_eq(ObjectClass::vehicle, 25)}, 24), MalformedAtom);
    CHECK_THROWS_AS(verify_trace(s, {atom_count_in_range(ObjectClass::vehicle, 5, 2)}, 24), MalformedAtom);
}

TEST_CASE("gate rejects samples whose trace contradicts the scene") {
    const Scene s = make_scene({make_object(0.2, 0.2), make_object(0.5, 0.5), make_object(0.8, 0.8)}, 1.0, 6);
    const GenParams gen;
    McqSample q = synthesize_mcq(s, Category::count, 4, 1, gen);
    CHECK(passes_gate(s, q, gen));

    McqSample false_atom = q;
    false_atom.gold_trace.insert(false_atom.gold_trace.begin(), atom_dominant_color(Color::green));
    CHECK(!passes_gate(s, false_atom, gen));

    McqSample wrong_conclusion = q;
    wrong_conclusion.gold_trace.push_back(atom_cluster_is(compute_morphostats(s).clustering_label));
    CHECK(!passes_gate(s, wrong_conclusion, gen)); // final atom no longer concludes gold

    McqSample dup = q;
    dup.options[static_cast<std::size_t>((q.gold_slot() + 1) % 4)] = q.gold_content;
    CHECK(!passes_gate(s, dup, gen));
}

TEST_CASE("forge_dataset: default-scale split 4000 -> 1000 SFT + 3000 RL") {
    ForgeConfig cfg;
    cfg.n_total = 4000;
    cfg.split_ratio = 0.25;
    cfg.seed = 9;
    const ForgedDataset data = forge_dataset(cfg);
    REQUIRE(data.samples.size() == 4000);
    std::size_t n_sft = 0, n_rl = 0;
    for (const McqSample& q : data.samples) (q.subset == Subset::sft ? n_sft : n_rl)++;
    CHECK(n_sft == 1000);
    CHECK(n_rl == 3000);
    CHECK(data.scenes.size() == 4000);
}

TEST_CASE("forge_dataset: every emitted sample passes the gate") {
    ForgeConfig cfg;
    cfg.n_total = 1000;
    cfg.seed = 4;
    cfg.gold_slot_bias = 0.6;
    const ForgedDataset data = forge_dataset(cfg);
    DatasetBundle bundle = make_bundle(data.scenes, data.samples);
    for (const McqSample& q : bundle.samples) {
        const Scene& s = bundle.scene_of(q);
        CHECK(passes_gate(s, q, cfg.gen));
        CHECK(verify_trace(s, q.gold_trace, cfg.gen.count_max).sound);
        CHECK(q.gold_slot() >= 0);
        std::set<std::string> uniq(q.options.begin(), q.options.end());
        CHECK(uniq.size() == q.options.size());
    }
}

TEST_CASE("forge_dataset: deterministic and schedule independent") {
    ForgeConfig cfg;
    cfg.n_total = 48;
    cfg.n_eval = 16;
    cfg.seed = 77;
    const ForgedDataset a = forge_dataset(cfg, ExecMode::openmp);
    const ForgedDataset b = forge_dataset(cfg, ExecMode::openmp);
    const ForgedDataset c = forge_dataset(cfg, ExecMode::serial);
    REQUIRE(a.samples.size() == b.samples.size());
    REQUIRE(a.samples.size() == c.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(samples_equal(a.samples[i], b.samples[i]));
        CHECK(samples_equal(a.samples[i], c.samples[i]));
        CHECK(scenes_equal(a.scenes[i], b.scenes[i]));
        CHECK(scenes_equal(a.scenes[i], c.scenes[i]));
    }
    REQUIRE(a.eval_samples.size() == c.eval_samples.size());
    for (std::size_t i = 0; i < a.eval_samples.size(); ++i)
        CHECK(samples_equal(a.eval_samples[i], c.eval_samples[i]));
}

TEST_CASE("forge config validation") {
    ForgeConfig cfg;
    cfg.split_ratio = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.split_ratio = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.split_ratio = 0.25;
    cfg.n_total = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("dataset JSONL round-trip is exact") {
    ForgeConfig cfg;
    cfg.n_total = 24;
    cfg.seed = 5;
    const ForgedDataset data = forge_dataset(cfg);

    const std::string dir = (std::filesystem::temp_directory_path() / "scenelab_io_test").string();
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_scenes_jsonl(data.scenes, dir + "/scenes.jsonl");
    write_samples_jsonl(data.samples, dir + "/samples.jsonl");

    const std::vector<Scene> scenes = read_scenes_jsonl(dir + "/scenes.jsonl");
    const std::vector<McqSample> samples = read_samples_jsonl(dir + "/samples.jsonl");
    REQUIRE(scenes.size() == data.scenes.size());
    REQUIRE(samples.size() == data.samples.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) CHECK(scenes_equal(scenes[i], data.scenes[i]));
    for (std::size_t i = 0; i < samples.size(); ++i) CHECK(samples_equal(samples[i], data.samples[i]));

    // re-serialization is byte-identical
    write_scenes_jsonl(scenes, dir + "/scenes2.jsonl");
    write_samples_jsonl(samples, dir + "/samples2.jsonl");
    CHECK(file_bytes(dir + "/scenes.jsonl") == file_bytes(dir + "/scenes2.jsonl"));
    CHECK(file_bytes(dir + "/samples.jsonl") == file_bytes(dir + "/samples2.jsonl"));

    std::ifstream in(dir + "/scenes.jsonl");
    std::string header;
    std::getline(in, header);
    CHECK(header == R"({"schema":"scenes","version":1})");
}

TEST_CASE("forged files on disk are deterministic") {
    ForgeConfig cfg;
    cfg.n_total = 8;
    cfg.seed = 31;
    const auto dir_a = (std::filesystem::temp_directory_path() / "scenelab_forge_a").string();
    const auto dir_b = (std::filesystem::temp_directory_path() / "scenelab_forge_b").string();
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    write_forged_dataset(forge_dataset(cfg), cfg, dir_a);
    write_forged_dataset(forge_dataset(cfg), cfg, dir_b);
    for (const char* name : {"/scenes.jsonl", "/samples_sft.jsonl", "/samples_rl.jsonl", "/forge_meta.json"})
        CHECK(file_bytes(dir_a + name) == file_bytes(dir_b + name));
}

TEST_CASE("atom vocabulary: size, lookup, validation") {
    const AtomVocab vocab = AtomVocab::build(24);
    // 5*25 count_eq + 5*5 ranges + 6 colors + 4 shapes + 4 occupancy + 3 cluster + 3 density
    CHECK(vocab.size() == 125 + 25 + 6 + 4 + 4 + 3 + 3);
    for (int i = 0; i < vocab.size(); ++i) {
        CHECK(vocab.index_of(vocab.at(i)) == i);
        CHECK_NOTHROW(validate_atom(vocab.at(i), 24));
    }
    CHECK(vocab.index_of(atom_count_eq(ObjectClass::vehicle, 99)) == -1);
}

#include "scenelab/scene_forge.hpp"
#include "scenelab/errors.hpp"
#include "scenelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace scenelab {

const char* name_of(Subset s) { return s == Subset::sft ? "SFT" : "RL"; }

Subset subset_from(const std::string& s) {
    if (s == "SFT") return Subset::sft;
    if (s == "RL") return Subset::rl;
    throw ConfigError("unknown subset '" + s + "'");
}

int McqSample::gold_slot() const {
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (options[i] == gold_content) return static_cast<int>(i);
    }
    return -1;
}

// ----------------------------- generation parameters -----------------------------

namespace {

// per-class appearance tables; order matches the enums
constexpr double kColorWeights[n_object_classes][n_colors] = {
    {1.5, 2.0, 2.5, 1.5, 1.0, 3.0}, // vehicle
    {1.0, 2.5, 3.0, 1.0, 1.5, 2.0}, // building
    {0.5, 3.0, 2.5, 1.0, 0.5, 1.5}, // storage-tank
    {1.5, 1.5, 2.0, 2.5, 1.0, 2.5}, // ship
    {0.5, 3.5, 2.5, 1.0, 0.5, 1.0}, // plane
};

constexpr double kShapeWeights[n_object_classes][n_shape_tags] = {
    {4.0, 0.2, 1.0, 0.3}, // vehicle
    {3.0, 0.3, 0.5, 1.5}, // building
    {0.3, 4.0, 0.1, 0.1}, // storage-tank
    {1.5, 0.2, 3.0, 0.3}, // ship
    {1.0, 0.5, 1.5, 2.0}, // plane
};

constexpr double kBaseSize[n_object_classes][2] = {
    {0.020, 0.045}, // vehicle
    {0.060, 0.060}, // building
    {0.040, 0.040}, // storage-tank
    {0.025, 0.090}, // ship
    {0.050, 0.050}, // plane
};

const char* kClassPlural[n_object_classes] = {"vehicles", "buildings", "storage tanks", "ships", "planes"};

} // namespace

GenParams::GenParams() {
    // Region defaults keep rural-field density strictly below the low/mid
    // threshold (4 per unit area) and everything else above it, so the
    // rural/urban label derived from a DENSITY_BAND conclusion agrees with the
    // region by construction.
    RegionParams parking;
    parking.cap_lo = 12; parking.cap_hi = 28;
    parking.count_lo = 6; parking.count_hi = 24;
    parking.area_lo = 0.8; parking.area_hi = 1.2;
    parking.w_grid = 0.7; parking.w_line = 0.1; parking.w_scatter = 0.2;
    parking.class_weights = {8.0, 0.5, 0.2, 0.0, 0.3};

    RegionParams residential;
    residential.cap_lo = 10; residential.cap_hi = 24;
    residential.count_lo = 8; residential.count_hi = 20;
    residential.area_lo = 0.8; residential.area_hi = 1.2;
    residential.w_grid = 0.75; residential.w_line = 0.05; residential.w_scatter = 0.2;
    residential.class_weights = {2.0, 6.0, 0.2, 0.0, 0.0};

    RegionParams logistics;
    logistics.cap_lo = 8; logistics.cap_hi = 20;
    logistics.count_lo = 6; logistics.count_hi = 16;
    logistics.area_lo = 0.9; logistics.area_hi = 1.3;
    logistics.w_grid = 0.1; logistics.w_line = 0.7; logistics.w_scatter = 0.2;
    logistics.class_weights = {3.0, 3.0, 2.0, 0.0, 0.2};

    RegionParams port;
    port.cap_lo = 8; port.cap_hi = 18;
    port.count_lo = 6; port.count_hi = 14;
    port.area_lo = 0.9; port.area_hi = 1.4;
    port.w_grid = 0.1; port.w_line = 0.5; port.w_scatter = 0.4;
    port.class_weights = {1.0, 1.0, 2.0, 4.0, 0.0};

    RegionParams rural;
    rural.cap_lo = 6; rural.cap_hi = 12;
    rural.count_lo = 1; rural.count_hi = 5;
    rural.area_lo = 1.3; rural.area_hi = 2.0;
    rural.w_grid = 0.0; rural.w_line = 0.1; rural.w_scatter = 0.9;
    rural.class_weights = {2.0, 2.0, 0.5, 0.0, 0.5};

    regions = {parking, residential, logistics, port, rural};
}

void GenParams::validate() const {
    for (int r = 0; r < n_region_types; ++r) {
        const RegionParams& rp = regions[static_cast<std::size_t>(r)];
        if (rp.cap_lo <= 0 || rp.cap_hi < rp.cap_lo)
            throw ConfigError(std::string("region ") + name_of(static_cast<RegionType>(r)) + ": capacity range invalid");
        if (rp.count_lo < 0 || rp.count_hi < rp.count_lo)
            throw ConfigError(std::string("region ") + name_of(static_cast<RegionType>(r)) + ": count range invalid");
        if (rp.area_lo <= 0.0 || rp.area_hi < rp.area_lo)
            throw ConfigError(std::string("region ") + name_of(static_cast<RegionType>(r)) + ": area range invalid");
        if (rp.w_grid < 0 || rp.w_line < 0 || rp.w_scatter < 0 || rp.w_grid + rp.w_line + rp.w_scatter <= 0)
            throw ConfigError("clustering regime weights must be nonnegative with a positive sum");
        if (rp.count_hi > count_max) throw ConfigError("count_hi exceeds count_max");
    }
    if (margin <= 0.0 || margin >= 0.5) throw ConfigError("margin must lie in (0, 0.5)");
    if (grid_jitter < 0.0 || grid_jitter > margin)
        throw ConfigError("grid jitter would push objects outside the unit square");
    if (line_jitter < 0.0 || line_jitter > margin)
        throw ConfigError("line jitter would push objects outside the unit square");
    if (count_max < 1) throw ConfigError("count_max must be positive");
}

// ----------------------------- scene generation -----------------------------

namespace {

enum class Regime { grid, line, scatter };

std::vector<Vec2> grid_centers(int n, double margin, double jitter, Rng& rng) {
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = (n + cols - 1) / cols;
    std::vector<Vec2> centers;
    centers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int r = i / cols;
        const int c = i % cols;
        const double x = cols > 1 ? margin + c * (1.0 - 2.0 * margin) / (cols - 1) : 0.5;
        const double y = rows > 1 ? margin + r * (1.0 - 2.0 * margin) / (rows - 1) : 0.5;
        Vec2 p{x, y};
        if (jitter > 0.0) {
            p.x += rng.next_uniform(-jitter, jitter);
            p.y += rng.next_uniform(-jitter, jitter);
        }
        centers.push_back(p);
    }
    return centers;
}

std::vector<Vec2> line_centers(int n, double margin, double jitter, Rng& rng) {
    const double phi = rng.next_uniform(0.0, 3.14159265358979323846);
    const Vec2 dir{std::cos(phi), std::sin(phi)};
    const Vec2 anchor{rng.next_uniform(0.35, 0.65), rng.next_uniform(0.35, 0.65)};

    // largest extent along +-dir that keeps anchors inside [margin, 1-margin]^2
    double t_ext = 1e9;
    const auto limit = [&](double c, double d) {
        if (std::abs(d) < 1e-12) return;
        const double t1 = (1.0 - margin - c) / d;
        const double t2 = (margin - c) / d;
        t_ext = std::min(t_ext, std::max(t1, t2));
        t_ext = std::min(t_ext, -std::min(t1, t2));
    };
    limit(anchor.x, dir.x);
    limit(anchor.y, dir.y);
    const double span = t_ext * rng.next_uniform(0.6, 1.0);

    const Vec2 perp{-dir.y, dir.x};
    std::vector<Vec2> centers;
    centers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = n > 1 ? -span + 2.0 * span * i / (n - 1) : 0.0;
        const double off = jitter > 0.0 ? rng.next_uniform(-jitter, jitter) : 0.0;
        centers.push_back({anchor.x + t * dir.x + off * perp.x, anchor.y + t * dir.y + off * perp.y});
    }
    return centers;
}

std::vector<Vec2> scatter_centers(int n, double margin, Rng& rng) {
    std::vector<Vec2> centers;
    centers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        centers.push_back({rng.next_uniform(margin, 1.0 - margin), rng.next_uniform(margin, 1.0 - margin)});
    return centers;
}

} // namespace

Scene generate_scene(const GenParams& params, std::uint64_t seed) {
    params.validate();
    Rng rng(mix_seed(seed, {hash_tag("scene-gen")}));

    Scene scene;
    scene.seed = seed;
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "scene-%016llx", static_cast<unsigned long long>(seed));
        scene.id = buf;
    }
    scene.region_type = static_cast<RegionType>(rng.pick_weighted(params.region_weights.data(), n_region_types));
    const RegionParams& rp = params.regions[static_cast<std::size_t>(scene.region_type)];
    scene.capacity = rng.next_int(rp.cap_lo, rp.cap_hi);
    scene.area = rng.next_uniform(rp.area_lo, rp.area_hi);
    const int count = std::min(rng.next_int(rp.count_lo, rp.count_hi), scene.capacity);

    const double regime_weights[3] = {rp.w_grid, rp.w_line, rp.w_scatter};
    const Regime regime = static_cast<Regime>(rng.pick_weighted(regime_weights, 3));

    std::vector<Vec2> centers;
    switch (regime) {
        case Regime::grid: centers = grid_centers(count, params.margin, params.grid_jitter, rng); break;
        case Regime::line: centers = line_centers(count, params.margin, params.line_jitter, rng); break;
        case Regime::scatter: centers = scatter_centers(count, params.margin, rng); break;
    }

    scene.objects.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        SceneObject obj;
        obj.center = centers[static_cast<std::size_t>(i)];
        obj.class_label = static_cast<ObjectClass>(rng.pick_weighted(rp.class_weights.data(), n_object_classes));
        const int ci = static_cast<int>(obj.class_label);
        obj.color = static_cast<Color>(rng.pick_weighted(kColorWeights[ci], n_colors));
        obj.shape_tag = static_cast<ShapeTag>(rng.pick_weighted(kShapeWeights[ci], n_shape_tags));
        const double size_scale = rng.next_uniform(0.8, 1.25);
        obj.size = {kBaseSize[ci][0] * size_scale, kBaseSize[ci][1] * size_scale};
        obj.orientation = rng.next_double() * 3.14159265358979323846;
        scene.objects.push_back(obj);
    }
    return scene;
}

// ----------------------------- MCQ synthesis -----------------------------

namespace {

std::pair<int, int> bucket_of(int n, int count_max) {
    for (auto [lo, hi] : count_range_buckets(count_max)) {
        if (lo <= n && n <= hi) return {lo, hi};
    }
    throw MalformedAtom("count " + std::to_string(n) + " outside every bucket");
}

// draws k distinct entries from domain (gold already excluded)
std::vector<std::string> draw_distractors(std::vector<std::string> domain, std::size_t k, Rng& rng) {
    rng.shuffle(domain);
    domain.resize(k);
    return domain;
}

struct QuestionDraft {
    std::string stem;
    std::string gold;
    std::vector<std::string> domain; // distractor value domain, gold excluded
    std::vector<EvidenceAtom> trace;
};

QuestionDraft draft_question(const Scene& scene, Category category, const GenParams& params, Rng& rng) {
    const MorphoStats stats = compute_morphostats(scene);
    const auto counts = class_counts(scene);
    const auto dom_cls = dominant_class(scene);
    QuestionDraft d;

    switch (category) {
        case Category::count: {
            if (!dom_cls) throw UnsupportedCategory("count question needs at least one object");
            const int n = counts[static_cast<int>(*dom_cls)];
            const auto [lo, hi] = bucket_of(n, params.count_max);
            d.stem = std::string("How many ") + kClassPlural[static_cast<int>(*dom_cls)] +
                     " are present in the scene?";
            d.gold = std::to_string(n);
            for (int v = 0; v <= params.count_max; ++v) {
                if (v != n) d.domain.push_back(std::to_string(v));
            }
            d.trace = {atom_cluster_is(stats.clustering_label), atom_count_in_range(*dom_cls, lo, hi),
                       atom_count_eq(*dom_cls, n)};
            break;
        }
        case Category::color: {
            const auto dc = dominant_color(scene);
            if (!dc || !dom_cls) throw UnsupportedCategory("color question needs at least one object");
            const int n = counts[static_cast<int>(*dom_cls)];
            const auto [lo, hi] = bucket_of(n, params.count_max);
            d.stem = "What is the dominant color of the objects in the scene?";
            d.gold = name_of(*dc);
            for (int c = 0; c < n_colors; ++c) {
                if (static_cast<Color>(c) != *dc) d.domain.push_back(name_of(static_cast<Color>(c)));
            }
            d.trace = {atom_count_in_range(*dom_cls, lo, hi), atom_dominant_color(*dc)};
            break;
        }
        case Category::shape: {
            const auto ds = dominant_shape(scene);
            if (!ds || !dom_cls) throw UnsupportedCategory("shape question needs at least one object");
            const int n = counts[static_cast<int>(*dom_cls)];
            const auto [lo, hi] = bucket_of(n, params.count_max);
            d.stem = "What is the dominant shape type among the objects?";
            d.gold = name_of(*ds);
            for (int s = 0; s < n_shape_tags; ++s) {
                if (static_cast<ShapeTag>(s) != *ds) d.domain.push_back(name_of(static_cast<ShapeTag>(s)));
            }
            d.trace = {atom_count_in_range(*dom_cls, lo, hi), atom_dominant_shape(*ds)};
            break;
        }
        case Category::scene: {
            const DensityBand band = density_band_of(stats.density);
            d.stem = "Is the depicted area best described as rural or urban?";
            d.gold = scene_label_of(band);
            d.domain = {d.gold == std::string("rural") ? "urban" : "rural"};
            d.trace = {atom_cluster_is(stats.clustering_label),
                       atom_occupancy_band(occupancy_band_of(stats.occupancy_ratio)), atom_density_band(band)};
            break;
        }
        case Category::reason: {
            const OccupancyBand occ = occupancy_band_of(stats.occupancy_ratio);
            const DensityBand dens = density_band_of(stats.density);
            switch (rng.next_below(3)) {
                case 0: { // utilization
                    d.stem = std::string("How utilized is the ") + name_of(scene.region_type) + " area?";
                    d.gold = occupancy_phrase(occ);
                    for (int b = 0; b < n_occupancy_bands; ++b) {
                        if (static_cast<OccupancyBand>(b) != occ)
                            d.domain.push_back(occupancy_phrase(static_cast<OccupancyBand>(b)));
                    }
                    if (dom_cls) {
                        const int n = counts[static_cast<int>(*dom_cls)];
                        const auto [lo, hi] = bucket_of(n, params.count_max);
                        d.trace = {atom_count_in_range(*dom_cls, lo, hi), atom_density_band(dens),
                                   atom_occupancy_band(occ)};
                    } else {
                        d.trace = {atom_density_band(dens), atom_occupancy_band(occ)};
                    }
                    break;
                }
                case 1: { // functional zoning, answered by the clustering label
                    d.stem = "Which layout pattern best describes the arrangement of objects?";
                    d.gold = zoning_phrase(stats.clustering_label);
                    for (int c = 0; c < n_clusterings; ++c) {
                        if (static_cast<Clustering>(c) != stats.clustering_label)
                            d.domain.push_back(zoning_phrase(static_cast<Clustering>(c)));
                    }
                    d.trace = {atom_density_band(dens), atom_cluster_is(stats.clustering_label)};
                    break;
                }
                default: { // capacity estimation, phrased as spare capacity
                    d.stem = std::string("How much spare capacity does the ") + name_of(scene.region_type) +
                             " area retain?";
                    d.gold = spare_capacity_phrase(occ);
                    for (int b = 0; b < n_occupancy_bands; ++b) {
                        if (static_cast<OccupancyBand>(b) != occ)
                            d.domain.push_back(spare_capacity_phrase(static_cast<OccupancyBand>(b)));
                    }
                    if (dom_cls) {
                        const int n = counts[static_cast<int>(*dom_cls)];
                        const auto [lo, hi] = bucket_of(n, params.count_max);
                        d.trace = {atom_count_in_range(*dom_cls, lo, hi), atom_occupancy_band(occ)};
                    } else {
                        d.trace = {atom_occupancy_band(occ)};
                    }
                    break;
                }
            }
            break;
        }
    }
    return d;
}

} // namespace

McqSample synthesize_mcq(const Scene& scene, Category category, int k_options, std::uint64_t seed,
                         const GenParams& params, double gold_slot_bias) {
    if (k_options < 2) throw ConfigError("k_options must be at least 2");
    if (gold_slot_bias < 0.0 || gold_slot_bias > 1.0) throw ConfigError("gold_slot_bias must lie in [0, 1]");
    Rng rng(mix_seed(seed, {hash_tag("mcq")}));

    QuestionDraft d = draft_question(scene, category, params, rng);
    const int k = std::min<int>(k_options, static_cast<int>(d.domain.size()) + 1);

    std::vector<std::string> distractors = draw_distractors(std::move(d.domain), static_cast<std::size_t>(k - 1), rng);

    // extra gold mass on slot 0 models the positional shortcut the consistency
    // reward is meant to break; bias 0 keeps the placement uniform
    const double p0 = 1.0 / k + gold_slot_bias * (1.0 - 1.0 / k);
    const int gold_slot = rng.next_double() < p0 ? 0 : 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(k - 1)));

    McqSample sample;
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "mcq-%016llx", static_cast<unsigned long long>(seed));
        sample.id = buf;
    }
    sample.scene_id = scene.id;
    sample.category = category;
    sample.stem = std::move(d.stem);
    sample.gold_content = d.gold;
    sample.gold_trace = std::move(d.trace);
    sample.subset = Subset::rl;
    sample.options.resize(static_cast<std::size_t>(k));
    std::size_t next = 0;
    for (int j = 0; j < k; ++j) {
        if (j == gold_slot) sample.options[static_cast<std::size_t>(j)] = d.gold;
        else sample.options[static_cast<std::size_t>(j)] = distractors[next++];
    }
    return sample;
}

// ----------------------------- verification & gate -----------------------------

TraceVerdict verify_trace(const Scene& scene, const std::vector<EvidenceAtom>& trace, int count_max) {
    TraceVerdict v;
    v.atom_truth.reserve(trace.size());
    for (const EvidenceAtom& atom : trace) {
        validate_atom(atom, count_max);
        v.atom_truth.push_back(atom_true(atom, scene));
    }
    v.sound = !trace.empty();
    for (bool t : v.atom_truth) v.sound = v.sound && t;
    return v;
}

bool passes_gate(const Scene& scene, const McqSample& sample, const GenParams& params) {
    if (sample.option_count() < 2) return false;
    for (std::size_t i = 0; i < sample.options.size(); ++i) {
        for (std::size_t j = i + 1; j < sample.options.size(); ++j) {
            if (sample.options[i] == sample.options[j]) return false;
        }
    }
    if (sample.gold_slot() < 0) return false;

    TraceVerdict verdict;
    try {
        verdict = verify_trace(scene, sample.gold_trace, params.count_max);
    } catch (const MalformedAtom&) {
        return false;
    }
    if (!verdict.sound) return false;

    // final atom must actually conclude the gold content
    const auto texts = atom_answer_texts(sample.category, sample.gold_trace.back());
    return std::find(texts.begin(), texts.end(), sample.gold_content) != texts.end();
}

// ----------------------------- dataset forging -----------------------------

void ForgeConfig::validate() const {
    if (n_total == 0) throw ConfigError("n_total must be positive");
    if (split_ratio <= 0.0 || split_ratio >= 1.0) throw ConfigError("split_ratio must lie in (0, 1)");
    if (k_options < 2) throw ConfigError("k_options must be at least 2");
    if (gold_slot_bias < 0.0 || gold_slot_bias > 1.0) throw ConfigError("gold_slot_bias must lie in [0, 1]");
    double total = 0.0;
    for (double w : category_weights) {
        if (w < 0.0) throw ConfigError("category weights must be nonnegative");
        total += w;
    }
    if (total <= 0.0) throw ConfigError("category weights must have a positive sum");
    gen.validate();
}

std::size_t sft_count(const ForgeConfig& cfg) {
    return static_cast<std::size_t>(static_cast<double>(cfg.n_total) * cfg.split_ratio);
}

ForgedDataset forge_dataset(const ForgeConfig& cfg, ExecMode mode) {
    cfg.validate();
    const std::size_t n_train = static_cast<std::size_t>(cfg.n_total);
    const std::size_t n_sft = sft_count(cfg);
    const std::size_t total = n_train + static_cast<std::size_t>(cfg.n_eval);

    std::vector<Scene> scenes(total);
    std::vector<McqSample> samples(total);

    parallel_for(total, mode, [&](std::size_t i) {
        const bool is_eval = i >= n_train;
        constexpr int max_attempts = 64;
        for (int attempt = 0;; ++attempt) {
            if (attempt == max_attempts)
                throw ConfigError("forge: sample " + std::to_string(i) + " failed the quality gate " +
                                  std::to_string(max_attempts) + " times");
            const std::uint64_t item_seed = mix_seed(cfg.seed, {hash_tag("forge-item"), i, static_cast<std::uint64_t>(attempt)});
            Scene scene = generate_scene(cfg.gen, item_seed);
            {
                char buf[32];
                const std::size_t ordinal = is_eval ? i - n_train : i;
                std::snprintf(buf, sizeof(buf), is_eval ? "scene-eval-%06zu" : "scene-%06zu", ordinal);
                scene.id = buf;
            }
            Rng cat_rng(mix_seed(cfg.seed, {hash_tag("forge-cat"), i, static_cast<std::uint64_t>(attempt)}));
            const Category category =
                static_cast<Category>(cat_rng.pick_weighted(cfg.category_weights.data(), n_categories));

            // the positional shortcut is an RL-stage temptation: the SFT subset
            // keeps uniform gold placement, the RL and eval subsets carry the bias
            const bool is_sft = !is_eval && i < n_sft;
            McqSample sample;
            try {
                sample = synthesize_mcq(scene, category, cfg.k_options,
                                        mix_seed(cfg.seed, {hash_tag("forge-mcq"), i, static_cast<std::uint64_t>(attempt)}),
                                        cfg.gen, is_sft ? 0.0 : cfg.gold_slot_bias);
            } catch (const UnsupportedCategory&) {
                continue; // regenerate with a fresh scene
            }
            {
                char buf[32];
                const std::size_t ordinal = is_eval ? i - n_train : i;
                std::snprintf(buf, sizeof(buf), is_eval ? "mcq-eval-%06zu" : "mcq-%06zu", ordinal);
                sample.id = buf;
            }
            sample.scene_id = scene.id;
            sample.subset = is_sft ? Subset::sft : Subset::rl;

            if (!passes_gate(scene, sample, cfg.gen)) continue;
            scenes[i] = std::move(scene);
            samples[i] = std::move(sample);
            break;
        }
    });

    ForgedDataset out;
    out.scenes.assign(scenes.begin(), scenes.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.samples.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.eval_scenes.assign(scenes.begin() + static_cast<std::ptrdiff_t>(n_train), scenes.end());
    out.eval_samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());
    return out;
}

} // namespace scenelab

#pragma once

#include "scenelab/atoms.hpp"
#include "scenelab/parallel.hpp"
#include "scenelab/scene.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace scenelab {

enum class Subset { sft, rl };
const char* name_of(Subset s);
Subset subset_from(const std::string& s);

struct McqSample {
    std::string id;
    std::string scene_id;
    Category category = Category::count;
    std::string stem;
    std::vector<std::string> options; // pairwise distinct, contains gold exactly once
    std::string gold_content;
    std::vector<EvidenceAtom> gold_trace; // every atom true, last atom concludes gold
    Subset subset = Subset::rl;

    int option_count() const { return static_cast<int>(options.size()); }
    // slot holding gold_content; -1 when absent
    int gold_slot() const;
};

// ----------------------------- generation parameters -----------------------------

struct RegionParams {
    int cap_lo = 8, cap_hi = 20;
    int count_lo = 4, count_hi = 16; // clamped to drawn capacity
    double area_lo = 0.8, area_hi = 1.2;
    double w_grid = 0.3, w_line = 0.3, w_scatter = 0.4;
    std::array<double, n_object_classes> class_weights{1, 1, 1, 1, 1};
};

struct GenParams {
    std::array<double, n_region_types> region_weights{1, 1, 1, 1, 1};
    std::array<RegionParams, n_region_types> regions;
    double grid_jitter = 0.01; // per-axis, scene units
    double line_jitter = 0.01; // perpendicular to the fitted line
    double margin = 0.08;      // inset of lattice/line anchors from the square border
    int count_max = 24;        // bounds COUNT_* atoms and count-question options

    GenParams(); // region defaults below
    void validate() const; // throws ConfigError (capacity <= 0, jitter > margin, ...)
};

Scene generate_scene(const GenParams& params, std::uint64_t seed);

// gold-first MCQ synthesis from scene ground truth; bias adds extra gold
// probability on slot 0 (0 = uniform, 1 = always slot 0)
McqSample synthesize_mcq(const Scene& scene, Category category, int k_options, std::uint64_t seed,
                         const GenParams& params, double gold_slot_bias = 0.0);

// ----------------------------- trace verification -----------------------------

struct TraceVerdict {
    std::vector<bool> atom_truth;
    bool sound = false; // all atoms true and the trace is nonempty
};

TraceVerdict verify_trace(const Scene& scene, const std::vector<EvidenceAtom>& trace, int count_max);

// the forge quality gate: trace sound, options well-formed, and the trace's
// final atom actually concludes the gold content
bool passes_gate(const Scene& scene, const McqSample& sample, const GenParams& params);

// ----------------------------- dataset forging -----------------------------

struct ForgeConfig {
    std::uint64_t n_total = 4000;  // training samples (split into SFT/RL)
    double split_ratio = 0.25;     // fraction of n_total assigned to the SFT subset
    std::uint64_t n_eval = 0;      // held-out evaluation samples
    std::uint64_t seed = 1;
    int k_options = 4;
    double gold_slot_bias = 0.0;
    std::array<double, n_categories> category_weights{1, 1, 1, 1, 1};
    GenParams gen;

    void validate() const; // ConfigError on ratio outside (0,1), zero sizes, bad bias
};

struct ForgedDataset {
    std::vector<Scene> scenes;      // training scenes, aligned with samples
    std::vector<McqSample> samples; // SFT subset first, then RL
    std::vector<Scene> eval_scenes;
    std::vector<McqSample> eval_samples;
};

// Generates until every sample passes the gate (per-sample retry with a
// derived stream, so results do not depend on the parallel schedule).
ForgedDataset forge_dataset(const ForgeConfig& cfg, ExecMode mode = ExecMode::openmp);

std::size_t sft_count(const ForgeConfig& cfg); // floor(n_total * split_ratio)

} // namespace scenelab

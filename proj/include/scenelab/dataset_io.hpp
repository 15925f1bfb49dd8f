#pragma once

#include "scenelab/scene_forge.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace scenelab {

// JSONL files carry a version header line: {"schema":"scenes"|"samples","version":1}.
constexpr int dataset_schema_version = 1;

void write_scenes_jsonl(std::span<const Scene> scenes, const std::string& path);
std::vector<Scene> read_scenes_jsonl(const std::string& path);

void write_samples_jsonl(std::span<const McqSample> samples, const std::string& path);
std::vector<McqSample> read_samples_jsonl(const std::string& path);

// samples plus the scenes they reference
struct DatasetBundle {
    std::vector<Scene> scenes;
    std::vector<McqSample> samples;
    std::unordered_map<std::string, std::size_t> scene_index;

    void build_index();
    const Scene& scene_of(const McqSample& sample) const; // throws IoError on a dangling reference
};

DatasetBundle load_bundle(const std::string& scenes_path, const std::string& samples_path);
DatasetBundle make_bundle(std::vector<Scene> scenes, std::vector<McqSample> samples);

// forge_meta.json records what later stages need to rebuild the policy shape
struct ForgeMeta {
    int count_max = 24;
    int k_options = 4;
    std::uint64_t n_total = 0;
    std::uint64_t n_sft = 0;
    std::uint64_t n_eval = 0;
    std::uint64_t seed = 0;
    double gold_slot_bias = 0.0;
};

void write_forge_meta(const ForgeMeta& meta, const std::string& path);
ForgeMeta read_forge_meta(const std::string& path);

// standard file names inside a forged dataset directory
struct DatasetPaths {
    std::string scenes, samples_sft, samples_rl, scenes_eval, samples_eval, meta;
    static DatasetPaths in_dir(const std::string& dir);
};

// forge + persist in one step; returns every file written
std::vector<std::string> write_forged_dataset(const ForgedDataset& data, const ForgeConfig& cfg,
                                              const std::string& dir);

} // namespace scenelab

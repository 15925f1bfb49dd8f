#pragma once

#include "scenelab/grpo.hpp"
#include "scenelab/scene_forge.hpp"
#include "scenelab/sft.hpp"

#include <cstdint>
#include <string>

namespace scenelab {

struct EvalConfig {
    int n_perms = 3;
};

// One key-value file with [forge]/[sft]/[grpo]/[eval] sections drives a full
// run. Parsing is strict: unknown keys and sections are errors. Stage seeds
// are derived from master_seed by a tagged hash split at run time.
struct RunConfig {
    std::string run_id = "run";
    std::uint64_t master_seed = 1;
    ForgeConfig forge;
    SftConfig sft;
    GrpoConfig grpo;
    EvalConfig eval;

    void validate() const;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig parse_run_config(const std::string& path);

std::uint64_t stage_seed(std::uint64_t master_seed, const char* stage);

} // namespace scenelab

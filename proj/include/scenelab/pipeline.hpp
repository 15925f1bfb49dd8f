#pragma once

#include "scenelab/config.hpp"
#include "scenelab/eval.hpp"
#include "scenelab/parallel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scenelab {

struct ManifestEntry {
    std::string path; // relative to the run directory
    std::uint64_t bytes = 0;
    std::string sha256;
};

struct Manifest {
    std::string run_id;
    std::uint64_t master_seed = 0;
    std::vector<ManifestEntry> files; // sorted by path

    std::string to_json() const;
};

struct PipelineResult {
    Manifest manifest;
    EvalReport report;
};

// forge -> sft -> grpo -> eval, all artifacts under out_dir, manifest written
// last with a checksum per file
PipelineResult run_pipeline(const RunConfig& cfg, const std::string& out_dir, ExecMode mode = ExecMode::openmp);

// ----------------------------- ablation -----------------------------

struct AblationRow {
    std::string label;
    bool use_sft = false;
    bool use_grpo = false;
    bool lcr_enabled = false;
};

struct AblationPlan {
    std::vector<AblationRow> rows;
    std::vector<std::uint64_t> seeds;

    // Base / +SFT / +GRPO (standard) / +GRPO (consistency)
    static AblationPlan default_plan(std::vector<std::uint64_t> seeds);
    void validate() const;
};

struct AblationCell {
    std::string label;
    std::uint64_t seed = 0;
    EvalReport report;
};

struct AblationRowSummary {
    std::string label;
    double median_oa = 0.0;
    double median_aa = 0.0;
    double median_reason_acc = 0.0;
    double median_drift_rate = 0.0;
    double median_wr_ca = 0.0;
};

struct AblationSummary {
    std::vector<AblationCell> cells;         // one per (row, seed)
    std::vector<AblationRowSummary> summary; // one per row, plan order
};

// Rows share the forged dataset and the SFT checkpoint within a seed; the
// Base row evaluates seeded random-init parameters. Writes ablation.csv
// (per-seed rows then median summary rows) under out_dir.
AblationSummary run_ablation(const AblationPlan& plan, const RunConfig& cfg, const std::string& out_dir,
                             ExecMode mode = ExecMode::openmp);

double median(std::vector<double> values);

} // namespace scenelab

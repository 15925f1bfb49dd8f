#pragma once

#include "scenelab/dataset_io.hpp"
#include "scenelab/parallel.hpp"
#include "scenelab/policy.hpp"
#include "scenelab/reward.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace scenelab {

struct EvalReport {
    std::array<double, n_categories> per_category{}; // indexed by Category
    double oa = 0.0;
    double aa = 0.0;
    double drift_rate = 0.0;
    std::array<int, n_alignment_cells> alignment_counts{}; // indexed by AlignmentCell
    int n_samples = 0;
};

// per-sample result of argmax decoding; report assembly is pure arithmetic on these
struct SampleOutcome {
    Category category = Category::count;
    bool correct = false;
    bool sound = false;
    int drift_trials = 0;
    int drift_hits = 0;
};

// throws EmptyCategory when any of the five categories has no samples
EvalReport assemble_report(const std::vector<SampleOutcome>& outcomes);

// Argmax decoding throughout: one trajectory per sample, correctness by
// content match, soundness by the rule verifier, and n_perms permutation
// trials per sample for the drift rate.
EvalReport evaluate(const PolicyParams& params, const AtomVocab& vocab, const DatasetBundle& eval_set, int n_perms,
                    std::uint64_t seed, ExecMode mode = ExecMode::openmp);

// fraction of (sample, permutation) trials whose frozen second pass changes
// the answer content, argmax mode both passes
double drift_rate(const PolicyParams& params, const AtomVocab& vocab, const DatasetBundle& eval_set, int n_perms,
                  std::uint64_t seed, ExecMode mode = ExecMode::openmp);

void write_report_json(const EvalReport& report, const std::string& path);
EvalReport read_report_json(const std::string& path);

std::string report_csv_header();
std::string report_csv_row(const EvalReport& report, const std::string& label);
// appends a row, writing the header first when the file is new or empty
void append_report_csv(const EvalReport& report, const std::string& label, const std::string& path);

} // namespace scenelab

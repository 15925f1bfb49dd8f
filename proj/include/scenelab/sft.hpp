#pragma once

#include "scenelab/dataset_io.hpp"
#include "scenelab/parallel.hpp"
#include "scenelab/policy.hpp"

#include <cstdint>
#include <vector>

namespace scenelab {

struct SftConfig {
    double learning_rate = 0.05;
    int epochs = 30;
    int batch_size = 32;
    std::uint64_t seed = 1;

    void validate() const;
};

// the supervised target: gold trace, STOP, gold answer slot
Trajectory gold_trajectory(const McqSample& question);

// negative log-likelihood of the gold (trace, answer) sequence
double nll(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene, const McqSample& question);

double mean_nll(const PolicyParams& params, const AtomVocab& vocab, const DatasetBundle& data, ExecMode mode);

struct SftResult {
    PolicyParams params;
    std::vector<double> loss_curve; // [0] = initial mean NLL, then one entry per epoch
};

// one {"epoch":e,"mean_nll":x} line per curve entry; epoch 0 is pre-training
void write_sft_metrics_jsonl(const std::vector<double>& loss_curve, const std::string& path);

// plain mini-batch gradient descent on mean NLL, deterministically shuffled
// per epoch from the config seed
SftResult train_sft(const PolicyParams& init, const AtomVocab& vocab, const DatasetBundle& data,
                    const SftConfig& cfg, ExecMode mode = ExecMode::openmp);

} // namespace scenelab

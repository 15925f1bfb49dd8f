#pragma once

#include "scenelab/dataset_io.hpp"
#include "scenelab/parallel.hpp"
#include "scenelab/policy.hpp"
#include "scenelab/reward.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace scenelab {

struct GrpoConfig {
    int group_size = 8;        // G
    double clip_epsilon = 0.2; // epsilon
    double kl_beta = 0.04;     // beta
    double learning_rate = 0.02;
    int steps = 600;
    int inner_epochs = 1;
    RewardConfig reward;
    bool lcr_enabled = true;
    std::uint64_t seed = 1;

    void validate() const;
};

struct GroupRollout {
    const McqSample* question = nullptr;
    const Scene* scene = nullptr;
    std::vector<Trajectory> trajectories;
    std::vector<PermutationRecord> records;
    std::vector<RewardBreakdown> rewards;
    std::vector<double> advantages;  // A_i, group-normalized
    std::vector<double> weights;     // w_i; exactly 1 at rollout time
    std::vector<double> logprob_old; // log pi_theta_old(o_i | q)
    std::vector<bool> trace_sound;   // rule-verified, for audit records
};

// (R_i - mean) / population std; all zero when the population std < 1e-12
std::vector<double> normalize_advantages(const std::vector<double>& totals);

// min(w*A, clip(w, 1-eps, 1+eps)*A)
double clipped_loss(double w, double advantage, double eps);

// Samples G trajectories, draws one permutation and one frozen second pass
// per member, composes rewards (r_lcr forced to 0 when lcr_enabled is off),
// and fills advantages and unit weights. Member streams derive from
// (rollout_seed, member), so the parallel schedule cannot change the result.
GroupRollout rollout_group(const PolicyParams& params, const McqSample& question, const Scene& scene,
                           const AtomVocab& vocab, const GrpoConfig& cfg, std::uint64_t rollout_seed,
                           ExecMode mode = ExecMode::openmp);

// every prefix state of every trajectory in the group
std::vector<ProbeState> probes_from_group(const GroupRollout& group);

// mean over groups of (1/G) sum_i L_i, minus beta * KL(pi_theta || pi_ref)
double objective(const PolicyParams& params, const PolicyParams& ref_params, const AtomVocab& vocab,
                 std::span<const GroupRollout> batch, std::span<const ProbeState> probes, const GrpoConfig& cfg);

struct StepMetrics {
    int step = 0;
    double mean_reward = 0.0;
    double mean_r_lcr = 0.0;
    double drift_rate = 0.0;
    double kl = 0.0;
    double objective = 0.0;
};

std::string step_metrics_json(const StepMetrics& m);

struct GrpoResult {
    PolicyParams params;
    std::vector<StepMetrics> metrics;
};

using MetricsSink = std::function<void(const StepMetrics&)>;
using AuditSink = std::function<void(const std::string&)>; // one JSONL line per trajectory

// One question per step, one rollout group, inner_epochs ascent updates on
// the clipped surrogate with the exact KL penalty. The reference policy is
// the init checkpoint, fixed for the whole stage.
GrpoResult train_grpo(const PolicyParams& init, const AtomVocab& vocab, const DatasetBundle& data,
                      const GrpoConfig& cfg, ExecMode mode = ExecMode::openmp, const MetricsSink& metrics_sink = {},
                      const AuditSink& audit_sink = {});

} // namespace scenelab

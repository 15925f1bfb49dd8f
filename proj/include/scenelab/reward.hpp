#pragma once

#include "scenelab/policy.hpp"
#include "scenelab/rng.hpp"
#include "scenelab/scene_forge.hpp"

#include <string>
#include <utility>
#include <vector>

namespace scenelab {

struct RewardConfig {
    double alpha = 0.5;     // consistency bonus
    double eta = 0.5;       // drift penalty
    double acc_value = 1.0; // outcome accuracy reward
    double fmt_value = 0.5; // format compliance reward

    void validate() const; // all strictly positive and finite
};

struct PermutationRecord {
    std::vector<int> mapping; // new slot <- old slot, a bijection
    int a_slot = -1;
    std::string a_content;
    int a_tilde_slot = -1;
    std::string a_tilde_content;
    bool drift = false; // a_content != a_tilde_content

    bool complete() const { return a_slot >= 0 && a_tilde_slot >= 0; }
};

struct RewardBreakdown {
    double r_acc = 0.0;
    double r_fmt = 0.0;
    double r_lcr = 0.0;
    double total = 0.0;
};

// uniformly random non-identity permutation of the option contents; gold
// content and stem are untouched
std::pair<McqSample, PermutationRecord> permute_options(const McqSample& question, Rng& rng);

double accuracy_reward(const std::string& a_content, const std::string& gold_content, const RewardConfig& cfg);

// well-formedness recheck used by the format reward: valid atoms terminated by
// STOP within l_max (encoded as trace shorter than l_max), slot in range,
// content matching the slot's option
bool trajectory_well_formed(const Trajectory& trajectory, const McqSample& question, int l_max, int count_max);

double format_reward(const Trajectory& trajectory, const McqSample& question, const RewardConfig& cfg, int l_max,
                     int count_max);

// ln(e + L_t) * Phi(a, a~) - Omega(a, a~); Phi pays alpha only when both
// answers equal gold, Omega charges eta only when the answers contradict
double lcr(int trace_len, const PermutationRecord& record, const std::string& gold_content, const RewardConfig& cfg);

RewardBreakdown compose_reward(const Trajectory& trajectory, const McqSample& question,
                               const PermutationRecord& record, const RewardConfig& cfg, int l_max, int count_max);

enum class AlignmentCell { cr_ca, cr_wa, wr_ca, wr_wa };
constexpr int n_alignment_cells = 4;
const char* name_of(AlignmentCell c);

AlignmentCell classify_alignment(bool trace_sound, bool answer_correct);

// one JSONL audit line per trajectory (reward audit log schema)
std::string audit_record_json(const std::string& sample_id, int trace_len, const PermutationRecord& record,
                              const RewardBreakdown& reward, AlignmentCell cell);

} // namespace scenelab

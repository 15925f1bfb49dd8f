#include "scenelab/reward.hpp"
#include "scenelab/errors.hpp"

#include <cmath>
#include <json.hpp>

namespace scenelab {

void RewardConfig::validate() const {
    const auto check = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be strictly positive and finite");
    };
    check(alpha, "alpha");
    check(eta, "eta");
    check(acc_value, "acc_value");
    check(fmt_value, "fmt_value");
}

std::pair<McqSample, PermutationRecord> permute_options(const McqSample& question, Rng& rng) {
    const int k = question.option_count();
    if (k < 2) throw PermutationMismatch("cannot permute fewer than 2 options");

    std::vector<int> mapping(static_cast<std::size_t>(k));
    bool identity = true;
    do {
        for (int i = 0; i < k; ++i) mapping[static_cast<std::size_t>(i)] = i;
        rng.shuffle(mapping);
        identity = true;
        for (int i = 0; i < k; ++i) identity = identity && mapping[static_cast<std::size_t>(i)] == i;
    } while (identity); // identity permutations cannot expose positional shortcuts

    McqSample permuted = question;
    for (int j = 0; j < k; ++j)
        permuted.options[static_cast<std::size_t>(j)] = question.options[static_cast<std::size_t>(mapping[static_cast<std::size_t>(j)])];

    PermutationRecord record;
    record.mapping = std::move(mapping);
    return {std::move(permuted), std::move(record)};
}

double accuracy_reward(const std::string& a_content, const std::string& gold_content, const RewardConfig& cfg) {
    return a_content == gold_content ? cfg.acc_value : 0.0;
}

bool trajectory_well_formed(const Trajectory& trajectory, const McqSample& question, int l_max, int count_max) {
    // a trace of l_max atoms was truncated without STOP; longer ones are invalid outright
    if (static_cast<int>(trajectory.trace.size()) >= l_max) return false;
    for (const EvidenceAtom& atom : trajectory.trace) {
        try {
            validate_atom(atom, count_max);
        } catch (const MalformedAtom&) {
            return false;
        }
    }
    if (trajectory.answer_slot < 0 || trajectory.answer_slot >= question.option_count()) return false;
    return trajectory.answer_content == question.options[static_cast<std::size_t>(trajectory.answer_slot)];
}

double format_reward(const Trajectory& trajectory, const McqSample& question, const RewardConfig& cfg, int l_max,
                     int count_max) {
    return trajectory_well_formed(trajectory, question, l_max, count_max) ? cfg.fmt_value : 0.0;
}

double lcr(int trace_len, const PermutationRecord& record, const std::string& gold_content, const RewardConfig& cfg) {
    if (!record.complete()) throw PermutationMismatch("LCR needs both the primary and the secondary answer");
    const bool a_correct = record.a_content == gold_content;
    const bool tilde_correct = record.a_tilde_content == gold_content;
    const bool contradictory = record.a_content != record.a_tilde_content;
    const double phi = (a_correct && tilde_correct) ? cfg.alpha : 0.0;
    const double omega = contradictory ? cfg.eta : 0.0;
    return std::log(std::exp(1.0) + static_cast<double>(trace_len)) * phi - omega;
}

RewardBreakdown compose_reward(const Trajectory& trajectory, const McqSample& question,
                               const PermutationRecord& record, const RewardConfig& cfg, int l_max, int count_max) {
    RewardBreakdown r;
    r.r_acc = accuracy_reward(trajectory.answer_content, question.gold_content, cfg);
    r.r_fmt = format_reward(trajectory, question, cfg, l_max, count_max);
    r.r_lcr = lcr(static_cast<int>(trajectory.trace.size()), record, question.gold_content, cfg);
    r.total = r.r_acc + r.r_fmt + r.r_lcr;
    return r;
}

const char* name_of(AlignmentCell c) {
    switch (c) {
        case AlignmentCell::cr_ca: return "CR-CA";
        case AlignmentCell::cr_wa: return "CR-WA";
        case AlignmentCell::wr_ca: return "WR-CA";
        case AlignmentCell::wr_wa: return "WR-WA";
    }
    return "?";
}

AlignmentCell classify_alignment(bool trace_sound, bool answer_correct) {
    if (trace_sound) return answer_correct ? AlignmentCell::cr_ca : AlignmentCell::cr_wa;
    return answer_correct ? AlignmentCell::wr_ca : AlignmentCell::wr_wa;
}

std::string audit_record_json(const std::string& sample_id, int trace_len, const PermutationRecord& record,
                              const RewardBreakdown& reward, AlignmentCell cell) {
    nlohmann::ordered_json j;
    j["sample_id"] = sample_id;
    j["L_t"] = trace_len;
    j["permutation"] = record.mapping;
    j["a"] = record.a_content;
    j["a_tilde"] = record.a_tilde_content;
    j["r_acc"] = reward.r_acc;
    j["r_fmt"] = reward.r_fmt;
    j["r_lcr"] = reward.r_lcr;
    j["total"] = reward.total;
    j["alignment_cell"] = name_of(cell);
    return j.dump();
}

} // namespace scenelab

#include "scenelab/grpo.hpp"
#include "scenelab/errors.hpp"

#include <cmath>
#include <json.hpp>

namespace scenelab {

void GrpoConfig::validate() const {
    if (group_size < 2) throw ConfigError("grpo group_size must be at least 2");
    // epsilon >= 1 is allowed: it disables clipping entirely (the REINFORCE
    // equivalence check runs that way)
    if (!(clip_epsilon > 0.0) || !std::isfinite(clip_epsilon))
        throw ConfigError("grpo clip_epsilon must be positive");
    if (kl_beta < 0.0 || !std::isfinite(kl_beta)) throw ConfigError("grpo kl_beta must be >= 0");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("grpo learning_rate must be finite and >= 0");
    if (steps < 0) throw ConfigError("grpo steps must be >= 0");
    if (inner_epochs <= 0) throw ConfigError("grpo inner_epochs must be positive");
    reward.validate();
}

std::vector<double> normalize_advantages(const std::vector<double>& totals) {
    const std::size_t g = totals.size();
    std::vector<double> adv(g, 0.0);
    if (g < 2) return adv;
    double mean = 0.0;
    for (double r : totals) mean += r;
    mean /= static_cast<double>(g);
    double var = 0.0;
    for (double r : totals) var += (r - mean) * (r - mean);
    var /= static_cast<double>(g); // population convention keeps G=2 symmetric
    const double std_dev = std::sqrt(var);
    if (std_dev < 1e-12) return adv;
    for (std::size_t i = 0; i < g; ++i) adv[i] = (totals[i] - mean) / std_dev;
    return adv;
}

double clipped_loss(double w, double advantage, double eps) {
    const double clipped_w = std::min(std::max(w, 1.0 - eps), 1.0 + eps);
    return std::min(w * advantage, clipped_w * advantage);
}

GroupRollout rollout_group(const PolicyParams& params, const McqSample& question, const Scene& scene,
                           const AtomVocab& vocab, const GrpoConfig& cfg, std::uint64_t rollout_seed,
                           ExecMode mode) {
    const std::size_t g = static_cast<std::size_t>(cfg.group_size);
    GroupRollout group;
    group.question = &question;
    group.scene = &scene;
    group.trajectories.resize(g);
    group.records.resize(g);
    group.rewards.resize(g);
    group.weights.assign(g, 1.0);
    group.logprob_old.resize(g);
    group.trace_sound.assign(g, false);

    std::vector<char> sound(g, 0);
    parallel_for(g, mode, [&](std::size_t i) {
        Rng rng(mix_seed(rollout_seed, {hash_tag("member"), i}));
        Trajectory traj = sample_trajectory(params, vocab, scene, question, rng);

        // the second pass always runs so drift stays observable in the
        // ablation's standard arm; only the reward term is gated
        auto [permuted, record] = permute_options(question, rng);
        const SecondaryAnswer tilde = frozen_second_pass(params, scene, question, traj, permuted, rng);
        record.a_slot = traj.answer_slot;
        record.a_content = traj.answer_content;
        record.a_tilde_slot = tilde.slot;
        record.a_tilde_content = tilde.content;
        record.drift = record.a_content != record.a_tilde_content;

        RewardBreakdown reward =
            compose_reward(traj, question, record, cfg.reward, params.dims.l_max, params.dims.count_max);
        if (!cfg.lcr_enabled) {
            reward.r_lcr = 0.0;
            reward.total = reward.r_acc + reward.r_fmt;
        }

        sound[i] = verify_trace(scene, traj.trace, params.dims.count_max).sound ? 1 : 0;
        group.logprob_old[i] = traj.total_logprob;
        group.trajectories[i] = std::move(traj);
        group.records[i] = std::move(record);
        group.rewards[i] = reward;
    });
    for (std::size_t i = 0; i < g; ++i) group.trace_sound[i] = sound[i] != 0;

    std::vector<double> totals(g);
    for (std::size_t i = 0; i < g; ++i) totals[i] = group.rewards[i].total;
    group.advantages = normalize_advantages(totals);
    return group;
}

std::vector<ProbeState> probes_from_group(const GroupRollout& group) {
    std::vector<ProbeState> probes;
    for (const Trajectory& traj : group.trajectories) {
        for (std::size_t len = 0; len <= traj.trace.size(); ++len) {
            ProbeState p;
            p.scene = group.scene;
            p.question = group.question;
            p.prefix.assign(traj.trace.begin(), traj.trace.begin() + static_cast<std::ptrdiff_t>(len));
            probes.push_back(std::move(p));
        }
    }
    return probes;
}

double objective(const PolicyParams& params, const PolicyParams& ref_params, const AtomVocab& vocab,
                 std::span<const GroupRollout> batch, std::span<const ProbeState> probes, const GrpoConfig& cfg) {
    if (batch.empty()) throw ConfigError("grpo objective: empty batch");
    double surrogate = 0.0;
    for (const GroupRollout& group : batch) {
        double group_term = 0.0;
        for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
            const double lp = logprob(params, vocab, *group.scene, *group.question, group.trajectories[i]);
            const double w = std::exp(lp - group.logprob_old[i]);
            group_term += clipped_loss(w, group.advantages[i], cfg.clip_epsilon);
        }
        surrogate += group_term / static_cast<double>(group.trajectories.size());
    }
    surrogate /= static_cast<double>(batch.size());
    const double kl = kl_divergence(params, ref_params, vocab, probes);
    const double value = surrogate - cfg.kl_beta * kl;
    if (!std::isfinite(value)) throw ConfigError("grpo objective is non-finite");
    return value;
}

std::string step_metrics_json(const StepMetrics& m) {
    nlohmann::ordered_json j;
    j["step"] = m.step;
    j["mean_reward"] = m.mean_reward;
    j["mean_r_lcr"] = m.mean_r_lcr;
    j["drift_rate"] = m.drift_rate;
    j["kl"] = m.kl;
    j["objective"] = m.objective;
    return j.dump();
}

GrpoResult train_grpo(const PolicyParams& init, const AtomVocab& vocab, const DatasetBundle& data,
                      const GrpoConfig& cfg, ExecMode mode, const MetricsSink& metrics_sink,
                      const AuditSink& audit_sink) {
    cfg.validate();
    if (data.samples.empty()) throw ConfigError("grpo: dataset is empty");
    if (!init.finite()) throw ConfigError("grpo: init parameters are non-finite");

    const PolicyParams ref = init; // pi_ref stays the SFT checkpoint for the whole stage
    GrpoResult result;
    result.params = init;
    const std::size_t g = static_cast<std::size_t>(cfg.group_size);

    std::vector<ParamDelta> member_grads(g);
    std::vector<double> member_lp(g);

    for (int step = 0; step < cfg.steps; ++step) {
        Rng pick_rng(mix_seed(cfg.seed, {hash_tag("grpo-pick"), static_cast<std::uint64_t>(step)}));
        const std::size_t qi = static_cast<std::size_t>(pick_rng.next_below(data.samples.size()));
        const McqSample& question = data.samples[qi];
        const Scene& scene = data.scene_of(question);

        const std::uint64_t rollout_seed = mix_seed(cfg.seed, {hash_tag("grpo-roll"), static_cast<std::uint64_t>(step)});
        const GroupRollout group = rollout_group(result.params, question, scene, vocab, cfg, rollout_seed, mode);
        const std::vector<ProbeState> probes = probes_from_group(group);

        for (int epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
            parallel_for(g, mode, [&](std::size_t i) {
                member_lp[i] = logprob(result.params, vocab, scene, question, group.trajectories[i]);
                member_grads[i] = grad_logprob(result.params, vocab, scene, question, group.trajectories[i]);
            });

            // score-function gradient of the clipped surrogate; advantages are
            // constants and the clipped branch of the min has zero gradient
            ParamDelta update = ParamDelta::zeros(result.params.dims);
            for (std::size_t i = 0; i < g; ++i) {
                const double w = std::exp(member_lp[i] - group.logprob_old[i]);
                const double a = group.advantages[i];
                const double clipped_w = std::min(std::max(w, 1.0 - cfg.clip_epsilon), 1.0 + cfg.clip_epsilon);
                const bool unclipped_active = w * a <= clipped_w * a;
                if (unclipped_active) update.add_scaled(member_grads[i], w * a / static_cast<double>(g));
            }
            if (cfg.kl_beta > 0.0) {
                const ParamDelta kl_grad = grad_kl(result.params, ref, vocab, probes);
                update.add_scaled(kl_grad, -cfg.kl_beta);
            }
            apply_update(result.params, update, cfg.learning_rate);
            result.params.version++;
            if (!result.params.finite())
                throw ConfigError("grpo: parameters became non-finite at step " + std::to_string(step));
        }

        StepMetrics m;
        m.step = step;
        for (std::size_t i = 0; i < g; ++i) {
            m.mean_reward += group.rewards[i].total;
            m.mean_r_lcr += group.rewards[i].r_lcr;
            m.drift_rate += group.records[i].drift ? 1.0 : 0.0;
        }
        m.mean_reward /= static_cast<double>(g);
        m.mean_r_lcr /= static_cast<double>(g);
        m.drift_rate /= static_cast<double>(g);
        m.kl = kl_divergence(result.params, ref, vocab, probes);
        m.objective = objective(result.params, ref, vocab, std::span(&group, 1), probes, cfg);
        result.metrics.push_back(m);
        if (metrics_sink) metrics_sink(m);
        if (audit_sink) {
            for (std::size_t i = 0; i < g; ++i) {
                const AlignmentCell cell = classify_alignment(
                    group.trace_sound[i], group.trajectories[i].answer_content == question.gold_content);
                audit_sink(audit_record_json(question.id, static_cast<int>(group.trajectories[i].trace.size()),
                                             group.records[i], group.rewards[i], cell));
            }
        }
    }
    return result;
}

} // namespace scenelab

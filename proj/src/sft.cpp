#include "scenelab/sft.hpp"
#include "scenelab/errors.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>

namespace scenelab {

void write_sft_metrics_jsonl(const std::vector<double>& loss_curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t e = 0; e < loss_curve.size(); ++e) {
        nlohmann::ordered_json j;
        j["epoch"] = e;
        j["mean_nll"] = loss_curve[e];
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

void SftConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("sft learning_rate must be finite and >= 0");
    if (epochs <= 0) throw ConfigError("sft epochs must be positive");
    if (batch_size <= 0) throw ConfigError("sft batch_size must be positive");
}

Trajectory gold_trajectory(const McqSample& question) {
    Trajectory t;
    t.trace = question.gold_trace;
    t.answer_slot = question.gold_slot();
    if (t.answer_slot < 0) throw InvalidTrajectory("gold content missing from options of " + question.id);
    t.answer_content = question.gold_content;
    t.well_formed = true;
    return t;
}

double nll(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene, const McqSample& question) {
    return -logprob(params, vocab, scene, question, gold_trajectory(question));
}

double mean_nll(const PolicyParams& params, const AtomVocab& vocab, const DatasetBundle& data, ExecMode mode) {
    const std::size_t n = data.samples.size();
    std::vector<double> losses(n, 0.0);
    parallel_for(n, mode, [&](std::size_t i) {
        const McqSample& q = data.samples[i];
        losses[i] = nll(params, vocab, data.scene_of(q), q);
    });
    double total = 0.0;
    for (double x : losses) total += x; // fixed-order reduction
    return total / static_cast<double>(n);
}

SftResult train_sft(const PolicyParams& init, const AtomVocab& vocab, const DatasetBundle& data,
                    const SftConfig& cfg, ExecMode mode) {
    cfg.validate();
    if (data.samples.empty()) throw ConfigError("sft: dataset is empty");

    SftResult result;
    result.params = init;
    result.loss_curve.push_back(mean_nll(result.params, vocab, data, mode));
    if (!std::isfinite(result.loss_curve.front())) throw ConfigError("sft: non-finite loss at initialization");

    const std::size_t n = data.samples.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<ParamDelta> grads(static_cast<std::size_t>(cfg.batch_size));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(cfg.seed, {hash_tag("sft-epoch"), static_cast<std::uint64_t>(epoch)}));
        shuffle_rng.shuffle(order);

        for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, begin + static_cast<std::size_t>(cfg.batch_size));
            const std::size_t batch = end - begin;

            parallel_for(batch, mode, [&](std::size_t b) {
                const McqSample& q = data.samples[order[begin + b]];
                grads[b] = grad_logprob(result.params, vocab, data.scene_of(q), q, gold_trajectory(q));
            });

            // descent on NLL = ascent on logprob; mean over the batch, serial fixed order
            ParamDelta step = ParamDelta::zeros(result.params.dims);
            for (std::size_t b = 0; b < batch; ++b) step.add_scaled(grads[b], 1.0 / static_cast<double>(batch));
            apply_update(result.params, step, cfg.learning_rate);
            result.params.version++;
        }

        const double loss = mean_nll(result.params, vocab, data, mode);
        if (!std::isfinite(loss))
            throw ConfigError("sft: non-finite loss at epoch " + std::to_string(epoch + 1));
        result.loss_curve.push_back(loss);
    }
    if (!result.params.finite()) throw ConfigError("sft: parameters became non-finite");
    return result;
}

} // namespace scenelab

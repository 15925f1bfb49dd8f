#include "scenelab/policy.hpp"
#include "scenelab/errors.hpp"
#include "scenelab/sha256.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace scenelab {

// ----------------------------- params -----------------------------

PolicyParams PolicyParams::zeros(const PolicyDims& dims) {
    PolicyParams p;
    p.dims = dims;
    p.trace_head = Mat(dims.vocab_size + 1, dims.feature_dim());
    p.answer_content_weights.assign(PolicyDims::content_features, 0.0);
    p.answer_position_weights.assign(static_cast<std::size_t>(dims.max_options), 0.0);
    return p;
}

PolicyParams PolicyParams::random_init(const PolicyDims& dims, std::uint64_t seed, double scale) {
    PolicyParams p = zeros(dims);
    Rng rng(mix_seed(seed, {hash_tag("policy-init")}));
    for (double& x : p.trace_head.data) x = scale * rng.next_gaussian();
    for (double& x : p.answer_content_weights) x = scale * rng.next_gaussian();
    for (double& x : p.answer_position_weights) x = scale * rng.next_gaussian();
    return p;
}

bool PolicyParams::finite() const {
    const auto ok = [](const std::vector<double>& v) {
        for (double x : v) {
            if (!std::isfinite(x)) return false;
        }
        return true;
    };
    return ok(trace_head.data) && ok(answer_content_weights) && ok(answer_position_weights);
}

ParamDelta ParamDelta::zeros(const PolicyDims& dims) {
    ParamDelta d;
    d.trace_head = Mat(dims.vocab_size + 1, dims.feature_dim());
    d.answer_content_weights.assign(PolicyDims::content_features, 0.0);
    d.answer_position_weights.assign(static_cast<std::size_t>(dims.max_options), 0.0);
    return d;
}

void ParamDelta::add_scaled(const ParamDelta& other, double s) {
    for (std::size_t i = 0; i < trace_head.data.size(); ++i) trace_head.data[i] += s * other.trace_head.data[i];
    for (std::size_t i = 0; i < answer_content_weights.size(); ++i)
        answer_content_weights[i] += s * other.answer_content_weights[i];
    for (std::size_t i = 0; i < answer_position_weights.size(); ++i)
        answer_position_weights[i] += s * other.answer_position_weights[i];
}

void ParamDelta::scale(double s) {
    for (double& x : trace_head.data) x *= s;
    for (double& x : answer_content_weights) x *= s;
    for (double& x : answer_position_weights) x *= s;
}

double ParamDelta::max_abs() const {
    double m = 0.0;
    for (double x : trace_head.data) m = std::max(m, std::abs(x));
    for (double x : answer_content_weights) m = std::max(m, std::abs(x));
    for (double x : answer_position_weights) m = std::max(m, std::abs(x));
    return m;
}

void apply_update(PolicyParams& params, const ParamDelta& delta, double step) {
    for (std::size_t i = 0; i < params.trace_head.data.size(); ++i)
        params.trace_head.data[i] += step * delta.trace_head.data[i];
    for (std::size_t i = 0; i < params.answer_content_weights.size(); ++i)
        params.answer_content_weights[i] += step * delta.answer_content_weights[i];
    for (std::size_t i = 0; i < params.answer_position_weights.size(); ++i)
        params.answer_position_weights[i] += step * delta.answer_position_weights[i];
}

// ----------------------------- featurization -----------------------------

QuestionContext make_context(const Scene& scene, const McqSample& question, std::vector<int> option_order) {
    QuestionContext ctx;
    ctx.scene = &scene;
    ctx.question = &question;
    const int k = question.option_count();
    if (option_order.empty()) {
        option_order.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) option_order[static_cast<std::size_t>(i)] = i;
    }
    if (static_cast<int>(option_order.size()) != k) throw InvalidTrajectory("option order has wrong arity");
    ctx.option_order = std::move(option_order);
    ctx.slot_contents.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const int orig = ctx.option_order[static_cast<std::size_t>(j)];
        if (orig < 0 || orig >= k) throw InvalidTrajectory("option order entry out of range");
        ctx.slot_contents.push_back(question.options[static_cast<std::size_t>(orig)]);
    }
    ctx.stats = compute_morphostats(scene);
    ctx.counts = class_counts(scene);
    ctx.dom_color = dominant_color(scene);
    ctx.dom_shape = dominant_shape(scene);
    return ctx;
}

std::vector<double> featurize(const PolicyDims& dims, const QuestionContext& ctx,
                              std::span<const EvidenceAtom> trace) {
    std::vector<double> f(static_cast<std::size_t>(dims.feature_dim()), 0.0);
    const double cm = static_cast<double>(dims.count_max);

    // scene block
    f[0] = 1.0; // bias
    f[1] = static_cast<double>(ctx.stats.count) / cm;
    for (int c = 0; c < n_object_classes; ++c) f[static_cast<std::size_t>(2 + c)] = ctx.counts[c] / cm;
    f[7] = ctx.stats.density / 24.0;
    f[8] = ctx.stats.occupancy_ratio;
    f[static_cast<std::size_t>(9 + static_cast<int>(occupancy_band_of(ctx.stats.occupancy_ratio)))] = 1.0;
    f[static_cast<std::size_t>(13 + static_cast<int>(ctx.stats.clustering_label))] = 1.0;
    if (ctx.dom_color) f[static_cast<std::size_t>(16 + static_cast<int>(*ctx.dom_color))] = 1.0;
    if (ctx.dom_shape) f[static_cast<std::size_t>(22 + static_cast<int>(*ctx.dom_shape))] = 1.0;
    f[static_cast<std::size_t>(26 + static_cast<int>(ctx.scene->region_type))] = 1.0;
    f[static_cast<std::size_t>(31 + static_cast<int>(ctx.question->category))] = 1.0;

    // trace block
    f[36] = static_cast<double>(trace.size()) / static_cast<double>(dims.l_max);
    std::vector<std::string> final_texts;
    if (trace.empty()) {
        f[44] = 1.0;
    } else {
        const EvidenceAtom& last = trace.back();
        f[static_cast<std::size_t>(37 + static_cast<int>(last.pred))] = 1.0;
        final_texts = atom_answer_texts(ctx.question->category, last);
        if (!final_texts.empty()) f[45] = 1.0;
    }

    // option block: content-match features follow the content, position
    // features stay glued to the slot index
    const int k = ctx.option_count();
    for (int j = 0; j < k && j < dims.max_options; ++j) {
        const std::string& content = ctx.slot_contents[static_cast<std::size_t>(j)];
        const std::size_t base = static_cast<std::size_t>(dims.slot_offset(j));
        for (const std::string& t : final_texts) {
            if (t == content) {
                f[base] = 1.0;
                break;
            }
        }
        for (const EvidenceAtom& atom : trace) {
            bool hit = false;
            for (const std::string& t : atom_answer_texts(ctx.question->category, atom)) {
                if (t == content) {
                    hit = true;
                    break;
                }
            }
            if (hit) {
                f[base + 1] = 1.0;
                break;
            }
        }
        f[base + 2 + static_cast<std::size_t>(j)] = 1.0;
    }
    return f;
}

std::vector<double> featurize(const PolicyDims& dims, const Scene& scene, const McqSample& question,
                              std::span<const EvidenceAtom> trace, std::vector<int> option_order) {
    return featurize(dims, make_context(scene, question, std::move(option_order)), trace);
}

// ----------------------------- decisions -----------------------------

std::vector<double> atom_logits(const PolicyParams& params, std::span<const double> features) {
    const int rows = params.trace_head.rows;
    const int cols = params.trace_head.cols;
    std::vector<double> logits(static_cast<std::size_t>(rows), 0.0);
    for (int r = 0; r < rows; ++r) {
        const double* w = params.trace_head.row(r);
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += w[c] * features[static_cast<std::size_t>(c)];
        logits[static_cast<std::size_t>(r)] = acc;
    }
    return logits;
}

std::vector<double> answer_logits(const PolicyParams& params, const QuestionContext& ctx,
                                  std::span<const double> features) {
    const int k = ctx.option_count();
    std::vector<double> logits(static_cast<std::size_t>(k), 0.0);
    for (int j = 0; j < k; ++j) {
        const std::size_t base = static_cast<std::size_t>(params.dims.slot_offset(j));
        double acc = params.answer_position_weights[static_cast<std::size_t>(j)];
        for (int c = 0; c < PolicyDims::content_features; ++c)
            acc += params.answer_content_weights[static_cast<std::size_t>(c)] * features[base + static_cast<std::size_t>(c)];
        logits[static_cast<std::size_t>(j)] = acc;
    }
    return logits;
}

std::vector<double> softmax(std::span<const double> logits) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : logits) m = std::max(m, x);
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

double log_softmax_at(std::span<const double> logits, int index) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : logits) m = std::max(m, x);
    double z = 0.0;
    for (double x : logits) z += std::exp(x - m);
    return logits[static_cast<std::size_t>(index)] - m - std::log(z);
}

int sample_index(std::span<const double> probs, Rng& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

int argmax_slot(std::span<const double> logits, std::span<const std::string> contents) {
    int best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j) {
        if (logits[j] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    }
    int chosen = best;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        if (logits[j] == logits[static_cast<std::size_t>(best)] && contents[j] < contents[static_cast<std::size_t>(chosen)])
            chosen = static_cast<int>(j);
    }
    return chosen;
}

namespace {

int argmax_index(std::span<const double> v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

} // namespace

// ----------------------------- trajectory ops -----------------------------

Trajectory sample_trajectory(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene,
                             const McqSample& question, Rng& rng, Decode mode) {
    if (vocab.size() != params.dims.vocab_size) throw InvalidTrajectory("vocabulary size mismatch");
    const QuestionContext ctx = make_context(scene, question);
    Trajectory traj;
    bool stopped = false;
    for (int step = 0; step < params.dims.l_max; ++step) {
        const std::vector<double> f = featurize(params.dims, ctx, traj.trace);
        const std::vector<double> logits = atom_logits(params, f);
        int idx;
        if (mode == Decode::argmax) {
            idx = argmax_index(logits);
        } else {
            const std::vector<double> p = softmax(logits);
            idx = sample_index(p, rng);
        }
        traj.step_logprobs.push_back(log_softmax_at(logits, idx));
        if (idx == params.dims.stop_index()) {
            stopped = true;
            break;
        }
        traj.trace.push_back(vocab.at(idx));
    }
    const std::vector<double> f_ans = featurize(params.dims, ctx, traj.trace);
    const std::vector<double> a_logits = answer_logits(params, ctx, f_ans);
    int slot;
    if (mode == Decode::argmax) {
        slot = argmax_slot(a_logits, ctx.slot_contents);
    } else {
        const std::vector<double> p = softmax(a_logits);
        slot = sample_index(p, rng);
    }
    traj.step_logprobs.push_back(log_softmax_at(a_logits, slot));
    traj.answer_slot = slot;
    traj.answer_content = ctx.slot_contents[static_cast<std::size_t>(slot)];
    traj.well_formed = stopped;
    double total = 0.0;
    for (double lp : traj.step_logprobs) total += lp;
    traj.total_logprob = total;
    return traj;
}

double logprob(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene,
               const McqSample& question, const Trajectory& trajectory) {
    if (static_cast<int>(trajectory.trace.size()) > params.dims.l_max)
        throw InvalidTrajectory("trace longer than l_max");
    const QuestionContext ctx = make_context(scene, question);
    double lp = 0.0;
    std::vector<EvidenceAtom> prefix;
    prefix.reserve(trajectory.trace.size());
    for (const EvidenceAtom& atom : trajectory.trace) {
        const int idx = vocab.index_of(atom);
        if (idx < 0) throw InvalidTrajectory("atom not in vocabulary: " + atom_to_string(atom));
        const std::vector<double> f = featurize(params.dims, ctx, prefix);
        lp += log_softmax_at(atom_logits(params, f), idx);
        prefix.push_back(atom);
    }
    if (static_cast<int>(trajectory.trace.size()) < params.dims.l_max) {
        const std::vector<double> f = featurize(params.dims, ctx, prefix);
        lp += log_softmax_at(atom_logits(params, f), params.dims.stop_index());
    }
    if (trajectory.answer_slot < 0 || trajectory.answer_slot >= ctx.option_count())
        throw InvalidTrajectory("answer slot out of range");
    const std::vector<double> f = featurize(params.dims, ctx, prefix);
    lp += log_softmax_at(answer_logits(params, ctx, f), trajectory.answer_slot);
    return lp;
}

ParamDelta grad_logprob(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene,
                        const McqSample& question, const Trajectory& trajectory) {
    if (static_cast<int>(trajectory.trace.size()) > params.dims.l_max)
        throw InvalidTrajectory("trace longer than l_max");
    const QuestionContext ctx = make_context(scene, question);
    ParamDelta g = ParamDelta::zeros(params.dims);
    const int rows = params.trace_head.rows;
    const int cols = params.trace_head.cols;

    // score-function form at every softmax decision: observed minus expected features
    const auto accumulate_atom_decision = [&](std::span<const double> f, int chosen) {
        const std::vector<double> p = softmax(atom_logits(params, f));
        for (int r = 0; r < rows; ++r) {
            const double coef = (r == chosen ? 1.0 : 0.0) - p[static_cast<std::size_t>(r)];
            double* out = g.trace_head.row(r);
            for (int c = 0; c < cols; ++c) out[c] += coef * f[static_cast<std::size_t>(c)];
        }
    };

    std::vector<EvidenceAtom> prefix;
    prefix.reserve(trajectory.trace.size());
    for (const EvidenceAtom& atom : trajectory.trace) {
        const int idx = vocab.index_of(atom);
        if (idx < 0) throw InvalidTrajectory("atom not in vocabulary: " + atom_to_string(atom));
        const std::vector<double> f = featurize(params.dims, ctx, prefix);
        accumulate_atom_decision(f, idx);
        prefix.push_back(atom);
    }
    if (static_cast<int>(trajectory.trace.size()) < params.dims.l_max) {
        const std::vector<double> f = featurize(params.dims, ctx, prefix);
        accumulate_atom_decision(f, params.dims.stop_index());
    }

    if (trajectory.answer_slot < 0 || trajectory.answer_slot >= ctx.option_count())
        throw InvalidTrajectory("answer slot out of range");
    const std::vector<double> f = featurize(params.dims, ctx, prefix);
    const std::vector<double> q = softmax(answer_logits(params, ctx, f));
    for (int j = 0; j < ctx.option_count(); ++j) {
        const double coef = (j == trajectory.answer_slot ? 1.0 : 0.0) - q[static_cast<std::size_t>(j)];
        const std::size_t base = static_cast<std::size_t>(params.dims.slot_offset(j));
        for (int c = 0; c < PolicyDims::content_features; ++c)
            g.answer_content_weights[static_cast<std::size_t>(c)] += coef * f[base + static_cast<std::size_t>(c)];
        g.answer_position_weights[static_cast<std::size_t>(j)] += coef;
    }
    return g;
}

SecondaryAnswer frozen_second_pass(const PolicyParams& params, const Scene& scene, const McqSample& question,
                                   const Trajectory& trajectory, const McqSample& permuted_question, Rng& rng,
                                   Decode mode) {
    std::vector<std::string> a = question.options;
    std::vector<std::string> b = permuted_question.options;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw PermutationMismatch("option contents differ between question and permuted question");

    const QuestionContext ctx = make_context(scene, permuted_question);
    const std::vector<double> f = featurize(params.dims, ctx, trajectory.trace);
    const std::vector<double> logits = answer_logits(params, ctx, f);
    SecondaryAnswer ans;
    if (mode == Decode::argmax) {
        ans.slot = argmax_slot(logits, ctx.slot_contents);
    } else {
        const std::vector<double> p = softmax(logits);
        ans.slot = sample_index(p, rng);
    }
    ans.content = ctx.slot_contents[static_cast<std::size_t>(ans.slot)];
    return ans;
}

// ----------------------------- divergence -----------------------------

double categorical_kl(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) kl += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    return kl;
}

double kl_divergence(const PolicyParams& params, const PolicyParams& ref_params, const AtomVocab& vocab,
                     std::span<const ProbeState> probes) {
    if (!(params.dims == ref_params.dims)) throw InvalidTrajectory("policy/reference dimension mismatch");
    (void)vocab;
    double total = 0.0;
    for (const ProbeState& probe : probes) {
        const QuestionContext ctx = make_context(*probe.scene, *probe.question);
        const std::vector<double> f = featurize(params.dims, ctx, probe.prefix);
        total += categorical_kl(softmax(atom_logits(params, f)), softmax(atom_logits(ref_params, f)));
        total += categorical_kl(softmax(answer_logits(params, ctx, f)), softmax(answer_logits(ref_params, ctx, f)));
    }
    return probes.empty() ? 0.0 : total / static_cast<double>(probes.size());
}

ParamDelta grad_kl(const PolicyParams& params, const PolicyParams& ref_params, const AtomVocab& vocab,
                   std::span<const ProbeState> probes) {
    if (!(params.dims == ref_params.dims)) throw InvalidTrajectory("policy/reference dimension mismatch");
    (void)vocab;
    ParamDelta g = ParamDelta::zeros(params.dims);
    if (probes.empty()) return g;
    const int rows = params.trace_head.rows;
    const int cols = params.trace_head.cols;

    for (const ProbeState& probe : probes) {
        const QuestionContext ctx = make_context(*probe.scene, *probe.question);
        const std::vector<double> f = featurize(params.dims, ctx, probe.prefix);

        // dKL/dlogit_u = p_u * ((log p_u - log q_u) - KL)
        {
            const std::vector<double> p = softmax(atom_logits(params, f));
            const std::vector<double> q = softmax(atom_logits(ref_params, f));
            const double kl = categorical_kl(p, q);
            for (int r = 0; r < rows; ++r) {
                const std::size_t u = static_cast<std::size_t>(r);
                const double coef = p[u] * ((std::log(p[u]) - std::log(q[u])) - kl);
                double* out = g.trace_head.row(r);
                for (int c = 0; c < cols; ++c) out[c] += coef * f[static_cast<std::size_t>(c)];
            }
        }
        {
            const std::vector<double> p = softmax(answer_logits(params, ctx, f));
            const std::vector<double> q = softmax(answer_logits(ref_params, ctx, f));
            const double kl = categorical_kl(p, q);
            for (int j = 0; j < ctx.option_count(); ++j) {
                const std::size_t u = static_cast<std::size_t>(j);
                const double coef = p[u] * ((std::log(p[u]) - std::log(q[u])) - kl);
                const std::size_t base = static_cast<std::size_t>(params.dims.slot_offset(j));
                for (int c = 0; c < PolicyDims::content_features; ++c)
                    g.answer_content_weights[static_cast<std::size_t>(c)] += coef * f[base + static_cast<std::size_t>(c)];
                g.answer_position_weights[u] += coef;
            }
        }
    }
    g.scale(1.0 / static_cast<double>(probes.size()));
    return g;
}

// ----------------------------- checkpoints -----------------------------

namespace {

std::string double_to_hex(double v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(v)));
    return std::string(buf, 16);
}

double hex_to_double(const std::string& s) {
    if (s.size() != 16) throw IoError("bad hex double in checkpoint");
    std::uint64_t bits = 0;
    for (char c : s) {
        bits <<= 4;
        if (c >= '0' && c <= '9') bits |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') bits |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw IoError("bad hex digit in checkpoint");
    }
    return std::bit_cast<double>(bits);
}

void append_vector(std::string& out, const char* label, const std::vector<double>& v) {
    out += label;
    for (double x : v) {
        out += ' ';
        out += double_to_hex(x);
    }
    out += '\n';
}

std::vector<double> parse_vector(const std::string& line, const char* label, std::size_t expected) {
    std::istringstream in(line);
    std::string head;
    in >> head;
    if (head != label) throw IoError(std::string("checkpoint: expected '") + label + "', got '" + head + "'");
    std::vector<double> v;
    std::string tok;
    while (in >> tok) v.push_back(hex_to_double(tok));
    if (v.size() != expected) throw IoError(std::string("checkpoint: wrong arity for ") + label);
    return v;
}

} // namespace

void save_checkpoint(const PolicyParams& params, const std::string& path) {
    std::string payload;
    payload += "scenelab-checkpoint 1\n";
    payload += "vocab_size " + std::to_string(params.dims.vocab_size) + "\n";
    payload += "max_options " + std::to_string(params.dims.max_options) + "\n";
    payload += "l_max " + std::to_string(params.dims.l_max) + "\n";
    payload += "count_max " + std::to_string(params.dims.count_max) + "\n";
    payload += "version " + std::to_string(params.version) + "\n";
    for (int r = 0; r < params.trace_head.rows; ++r) {
        std::vector<double> row(params.trace_head.row(r), params.trace_head.row(r) + params.trace_head.cols);
        append_vector(payload, "row", row);
    }
    append_vector(payload, "acw", params.answer_content_weights);
    append_vector(payload, "apw", params.answer_position_weights);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out << payload << "sha256 " << sha256_hex(payload) << "\n";
    if (!out) throw IoError("failed writing checkpoint " + path);
}

PolicyParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (lines.size() < 9) throw IoError("checkpoint truncated: " + path);
    if (lines[0] != "scenelab-checkpoint 1") throw IoError("unsupported checkpoint format: " + path);

    const auto parse_int_line = [&](std::size_t i, const char* label) -> long long {
        std::istringstream s(lines[i]);
        std::string head;
        long long value = 0;
        s >> head >> value;
        if (head != label) throw IoError(std::string("checkpoint: expected '") + label + "'");
        return value;
    };
    PolicyDims dims;
    dims.vocab_size = static_cast<int>(parse_int_line(1, "vocab_size"));
    dims.max_options = static_cast<int>(parse_int_line(2, "max_options"));
    dims.l_max = static_cast<int>(parse_int_line(3, "l_max"));
    dims.count_max = static_cast<int>(parse_int_line(4, "count_max"));
    const long long version = parse_int_line(5, "version");

    const std::size_t n_rows = static_cast<std::size_t>(dims.vocab_size) + 1;
    const std::size_t expect_lines = 6 + n_rows + 2 + 1;
    if (lines.size() != expect_lines) throw IoError("checkpoint has wrong line count: " + path);

    // verify the trailing checksum over everything before it
    std::string payload;
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
        payload += lines[i];
        payload += '\n';
    }
    {
        std::istringstream s(lines.back());
        std::string head, digest;
        s >> head >> digest;
        if (head != "sha256" || digest != sha256_hex(payload)) throw IoError("checkpoint checksum mismatch: " + path);
    }

    PolicyParams params = PolicyParams::zeros(dims);
    params.version = version;
    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::vector<double> row =
            parse_vector(lines[6 + r], "row", static_cast<std::size_t>(dims.feature_dim()));
        std::memcpy(params.trace_head.row(static_cast<int>(r)), row.data(), row.size() * sizeof(double));
    }
    params.answer_content_weights =
        parse_vector(lines[6 + n_rows], "acw", static_cast<std::size_t>(PolicyDims::content_features));
    params.answer_position_weights =
        parse_vector(lines[6 + n_rows + 1], "apw", static_cast<std::size_t>(dims.max_options));
    return params;
}

} // namespace scenelab

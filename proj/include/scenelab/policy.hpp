#pragma once

#include "scenelab/atoms.hpp"
#include "scenelab/rng.hpp"
#include "scenelab/scene.hpp"
#include "scenelab/scene_forge.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scenelab {

constexpr int default_l_max = 6;

// ----------------------------- parameter shapes -----------------------------

struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> data; // row-major

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    bool operator==(const Mat&) const = default;
};

struct PolicyDims {
    int vocab_size = 0;  // V; STOP is the extra row at index V
    int max_options = 4; // K
    int l_max = default_l_max;
    int count_max = 24;  // feature normalization bound, matches the vocabulary

    static constexpr int content_features = 2; // per-slot: conclusion match, support match

    int stop_index() const { return vocab_size; }
    int feature_dim() const { return fixed_features() + max_options * (content_features + max_options); }

    // layout of the flat feature vector
    static constexpr int fixed_features() { return 46; } // scene block (36) + trace block (10)
    int slot_offset(int slot) const { return fixed_features() + slot * (content_features + max_options); }

    bool operator==(const PolicyDims&) const = default;
};

struct PolicyParams {
    PolicyDims dims;
    Mat trace_head;                              // (V+1) x D
    std::vector<double> answer_content_weights;  // content_features
    std::vector<double> answer_position_weights; // K
    std::int64_t version = 0;

    static PolicyParams zeros(const PolicyDims& dims);
    static PolicyParams random_init(const PolicyDims& dims, std::uint64_t seed, double scale = 0.01);

    bool finite() const;
};

// gradient (or update direction) shaped like PolicyParams
struct ParamDelta {
    Mat trace_head;
    std::vector<double> answer_content_weights;
    std::vector<double> answer_position_weights;

    static ParamDelta zeros(const PolicyDims& dims);
    void add_scaled(const ParamDelta& other, double scale);
    void scale(double s);
    double max_abs() const;
};

void apply_update(PolicyParams& params, const ParamDelta& delta, double step); // params += step * delta

// ----------------------------- featurization -----------------------------

// Precomputed view of one (scene, question, option order) triple. slot j holds
// options[option_order[j]]; the identity order is the posed question.
struct QuestionContext {
    const Scene* scene = nullptr;
    const McqSample* question = nullptr;
    std::vector<int> option_order;
    std::vector<std::string> slot_contents;
    MorphoStats stats;
    std::array<int, n_object_classes> counts{};
    std::optional<Color> dom_color;
    std::optional<ShapeTag> dom_shape;

    int option_count() const { return static_cast<int>(slot_contents.size()); }
};

QuestionContext make_context(const Scene& scene, const McqSample& question, std::vector<int> option_order = {});

std::vector<double> featurize(const PolicyDims& dims, const QuestionContext& ctx,
                              std::span<const EvidenceAtom> trace);
// convenience form matching the public operation signature
std::vector<double> featurize(const PolicyDims& dims, const Scene& scene, const McqSample& question,
                              std::span<const EvidenceAtom> trace, std::vector<int> option_order = {});

// ----------------------------- trajectories -----------------------------

// A trace shorter than l_max always carries an implicit terminating STOP
// decision; a trace of exactly l_max atoms was truncated without STOP and is
// not well-formed.
struct Trajectory {
    std::vector<EvidenceAtom> trace;
    int answer_slot = -1;
    std::string answer_content;
    std::vector<double> step_logprobs; // one per decision: atoms, STOP if taken, answer
    double total_logprob = 0.0;
    bool well_formed = false;
};

enum class Decode { sample, argmax };

Trajectory sample_trajectory(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene,
                             const McqSample& question, Rng& rng, Decode mode = Decode::sample);

double logprob(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene,
               const McqSample& question, const Trajectory& trajectory);

ParamDelta grad_logprob(const PolicyParams& params, const AtomVocab& vocab, const Scene& scene,
                        const McqSample& question, const Trajectory& trajectory);

struct SecondaryAnswer {
    int slot = -1;
    std::string content;
};

// Re-runs only the answer head on the permuted question with the trace held
// fixed. Throws PermutationMismatch when option contents differ as multisets.
SecondaryAnswer frozen_second_pass(const PolicyParams& params, const Scene& scene, const McqSample& question,
                                   const Trajectory& trajectory, const McqSample& permuted_question, Rng& rng,
                                   Decode mode = Decode::sample);

// ----------------------------- divergence -----------------------------

struct ProbeState {
    const Scene* scene = nullptr;
    const McqSample* question = nullptr;
    std::vector<EvidenceAtom> prefix;
};

double categorical_kl(std::span<const double> p, std::span<const double> q);

// Exact KL between the two policies' categorical decisions, averaged over
// probe states; each probe contributes its atom decision plus the answer
// decision conditioned on the same prefix.
double kl_divergence(const PolicyParams& params, const PolicyParams& ref_params, const AtomVocab& vocab,
                     std::span<const ProbeState> probes);

ParamDelta grad_kl(const PolicyParams& params, const PolicyParams& ref_params, const AtomVocab& vocab,
                   std::span<const ProbeState> probes);

// ----------------------------- decision internals (shared with tests) -----------------------------

std::vector<double> atom_logits(const PolicyParams& params, std::span<const double> features);
std::vector<double> answer_logits(const PolicyParams& params, const QuestionContext& ctx,
                                  std::span<const double> features);
std::vector<double> softmax(std::span<const double> logits);
double log_softmax_at(std::span<const double> logits, int index);
int sample_index(std::span<const double> probs, Rng& rng);
// argmax with ties broken by the lexicographically smallest content, so a
// content-only policy decodes permutation-invariantly
int argmax_slot(std::span<const double> logits, std::span<const std::string> contents);

// ----------------------------- checkpoints -----------------------------

// Versioned text format with hex-encoded IEEE-754 payload and a trailing
// sha256 line; save(load(path)) is byte-identical.
void save_checkpoint(const PolicyParams& params, const std::string& path);
PolicyParams load_checkpoint(const std::string& path);

} // namespace scenelab

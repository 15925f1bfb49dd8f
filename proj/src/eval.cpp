#include "scenelab/eval.hpp"
#include "scenelab/errors.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace scenelab {

using nlohmann::json;
using nlohmann::ordered_json;

EvalReport assemble_report(const std::vector<SampleOutcome>& outcomes) {
    EvalReport report;
    report.n_samples = static_cast<int>(outcomes.size());

    std::array<int, n_categories> per_cat_total{};
    std::array<int, n_categories> per_cat_correct{};
    int correct_total = 0;
    long long drift_trials = 0, drift_hits = 0;
    for (const SampleOutcome& o : outcomes) {
        per_cat_total[static_cast<int>(o.category)]++;
        if (o.correct) {
            per_cat_correct[static_cast<int>(o.category)]++;
            correct_total++;
        }
        report.alignment_counts[static_cast<int>(classify_alignment(o.sound, o.correct))]++;
        drift_trials += o.drift_trials;
        drift_hits += o.drift_hits;
    }
    for (int c = 0; c < n_categories; ++c) {
        if (per_cat_total[c] == 0)
            throw EmptyCategory(std::string(name_of(static_cast<Category>(c))) + " has no samples, AA is undefined");
        report.per_category[static_cast<std::size_t>(c)] =
            static_cast<double>(per_cat_correct[c]) / static_cast<double>(per_cat_total[c]);
    }
    report.oa = outcomes.empty() ? 0.0 : static_cast<double>(correct_total) / static_cast<double>(outcomes.size());
    double aa = 0.0;
    for (double a : report.per_category) aa += a;
    report.aa = aa / static_cast<double>(n_categories);
    report.drift_rate = drift_trials == 0 ? 0.0 : static_cast<double>(drift_hits) / static_cast<double>(drift_trials);
    return report;
}

namespace {

std::vector<SampleOutcome> decode_outcomes(const PolicyParams& params, const AtomVocab& vocab,
                                           const DatasetBundle& eval_set, int n_perms, std::uint64_t seed,
                                           ExecMode mode) {
    if (n_perms < 1) throw ConfigError("eval n_perms must be at least 1");
    const std::size_t n = eval_set.samples.size();
    std::vector<SampleOutcome> outcomes(n);
    parallel_for(n, mode, [&](std::size_t i) {
        const McqSample& question = eval_set.samples[i];
        const Scene& scene = eval_set.scene_of(question);

        Rng decode_rng(mix_seed(seed, {hash_tag("eval-decode"), i})); // argmax draws nothing from it
        const Trajectory traj = sample_trajectory(params, vocab, scene, question, decode_rng, Decode::argmax);

        SampleOutcome out;
        out.category = question.category;
        out.correct = traj.answer_content == question.gold_content;
        out.sound = verify_trace(scene, traj.trace, params.dims.count_max).sound;
        out.drift_trials = n_perms;
        for (int t = 0; t < n_perms; ++t) {
            Rng perm_rng(mix_seed(seed, {hash_tag("eval-perm"), i, static_cast<std::uint64_t>(t)}));
            auto [permuted, record] = permute_options(question, perm_rng);
            const SecondaryAnswer tilde =
                frozen_second_pass(params, scene, question, traj, permuted, perm_rng, Decode::argmax);
            if (tilde.content != traj.answer_content) out.drift_hits++;
        }
        outcomes[i] = std::move(out);
    });
    return outcomes;
}

} // namespace

EvalReport evaluate(const PolicyParams& params, const AtomVocab& vocab, const DatasetBundle& eval_set, int n_perms,
                    std::uint64_t seed, ExecMode mode) {
    return assemble_report(decode_outcomes(params, vocab, eval_set, n_perms, seed, mode));
}

double drift_rate(const PolicyParams& params, const AtomVocab& vocab, const DatasetBundle& eval_set, int n_perms,
                  std::uint64_t seed, ExecMode mode) {
    const std::vector<SampleOutcome> outcomes = decode_outcomes(params, vocab, eval_set, n_perms, seed, mode);
    long long trials = 0, hits = 0;
    for (const SampleOutcome& o : outcomes) {
        trials += o.drift_trials;
        hits += o.drift_hits;
    }
    return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
}

void write_report_json(const EvalReport& report, const std::string& path) {
    ordered_json j;
    j["schema"] = "eval_report";
    j["version"] = 1;
    j["n_samples"] = report.n_samples;
    j["oa"] = report.oa;
    j["aa"] = report.aa;
    j["drift_rate"] = report.drift_rate;
    ordered_json per_cat;
    for (int c = 0; c < n_categories; ++c)
        per_cat[name_of(static_cast<Category>(c))] = report.per_category[static_cast<std::size_t>(c)];
    j["per_category"] = std::move(per_cat);
    ordered_json cells;
    for (int a = 0; a < n_alignment_cells; ++a)
        cells[name_of(static_cast<AlignmentCell>(a))] = report.alignment_counts[static_cast<std::size_t>(a)];
    j["alignment_counts"] = std::move(cells);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write report " + path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing report " + path);
}

EvalReport read_report_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open report " + path);
    json j;
    in >> j;
    if (j.at("schema").get<std::string>() != "eval_report") throw IoError(path + ": not an eval report");
    EvalReport r;
    r.n_samples = j.at("n_samples").get<int>();
    r.oa = j.at("oa").get<double>();
    r.aa = j.at("aa").get<double>();
    r.drift_rate = j.at("drift_rate").get<double>();
    for (int c = 0; c < n_categories; ++c)
        r.per_category[static_cast<std::size_t>(c)] = j.at("per_category").at(name_of(static_cast<Category>(c))).get<double>();
    for (int a = 0; a < n_alignment_cells; ++a)
        r.alignment_counts[static_cast<std::size_t>(a)] =
            j.at("alignment_counts").at(name_of(static_cast<AlignmentCell>(a))).get<int>();
    return r;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string report_csv_header() {
    return "label,n_samples,oa,aa,acc_count,acc_color,acc_shape,acc_scene,acc_reason,drift_rate,"
           "n_cr_ca,n_cr_wa,n_wr_ca,n_wr_wa";
}

std::string report_csv_row(const EvalReport& r, const std::string& label) {
    std::string row = label;
    row += "," + std::to_string(r.n_samples);
    row += "," + fmt_double(r.oa);
    row += "," + fmt_double(r.aa);
    for (int c = 0; c < n_categories; ++c) row += "," + fmt_double(r.per_category[static_cast<std::size_t>(c)]);
    row += "," + fmt_double(r.drift_rate);
    for (int a = 0; a < n_alignment_cells; ++a) row += "," + std::to_string(r.alignment_counts[static_cast<std::size_t>(a)]);
    return row;
}

void append_report_csv(const EvalReport& report, const std::string& label, const std::string& path) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot write csv " + path);
    if (fresh) out << report_csv_header() << "\n";
    out << report_csv_row(report, label) << "\n";
    if (!out) throw IoError("failed writing csv " + path);
}

} // namespace scenelab

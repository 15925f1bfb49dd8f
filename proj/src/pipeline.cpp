#include "scenelab/pipeline.hpp"
#include "scenelab/errors.hpp"
#include "scenelab/sha256.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <json.hpp>

namespace scenelab {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string Manifest::to_json() const {
    ordered_json j;
    j["schema"] = "run_manifest";
    j["version"] = 1;
    j["run_id"] = run_id;
    j["master_seed"] = master_seed;
    ordered_json files_json = ordered_json::array();
    for (const ManifestEntry& e : files) {
        ordered_json fe;
        fe["path"] = e.path;
        fe["bytes"] = e.bytes;
        fe["sha256"] = e.sha256;
        files_json.push_back(std::move(fe));
    }
    j["files"] = std::move(files_json);
    return j.dump(2);
}

namespace {

struct ArtifactLog {
    std::string root;
    std::vector<std::string> paths;

    void add(const std::string& absolute) { paths.push_back(absolute); }
    void add_all(const std::vector<std::string>& absolute) {
        for (const std::string& p : absolute) paths.push_back(p);
    }
};

Manifest build_manifest(const RunConfig& cfg, const ArtifactLog& log) {
    Manifest m;
    m.run_id = cfg.run_id;
    m.master_seed = cfg.master_seed;
    for (const std::string& p : log.paths) {
        ManifestEntry e;
        e.path = fs::relative(p, log.root).generic_string();
        e.bytes = static_cast<std::uint64_t>(fs::file_size(p));
        e.sha256 = sha256_file_hex(p);
        m.files.push_back(std::move(e));
    }
    std::sort(m.files.begin(), m.files.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    return m;
}

ForgeConfig forge_config_for_run(const RunConfig& cfg) {
    ForgeConfig fc = cfg.forge;
    fc.seed = stage_seed(cfg.master_seed, "forge");
    return fc;
}

struct StageData {
    DatasetBundle sft_set;
    DatasetBundle rl_set;
    DatasetBundle eval_set;
    AtomVocab vocab;
    PolicyDims dims;
};

StageData stages_from_forged(const ForgedDataset& forged, const ForgeConfig& fc) {
    StageData s;
    const std::size_t n_sft = sft_count(fc);
    std::vector<McqSample> sft_samples(forged.samples.begin(),
                                       forged.samples.begin() + static_cast<std::ptrdiff_t>(n_sft));
    std::vector<McqSample> rl_samples(forged.samples.begin() + static_cast<std::ptrdiff_t>(n_sft),
                                      forged.samples.end());
    s.sft_set = make_bundle(forged.scenes, std::move(sft_samples));
    s.rl_set = make_bundle(forged.scenes, std::move(rl_samples));
    s.eval_set = make_bundle(forged.eval_scenes, forged.eval_samples);
    s.vocab = AtomVocab::build(fc.gen.count_max);
    s.dims.vocab_size = s.vocab.size();
    s.dims.max_options = fc.k_options;
    s.dims.l_max = default_l_max;
    s.dims.count_max = fc.gen.count_max;
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

PipelineResult run_pipeline(const RunConfig& cfg, const std::string& out_dir, ExecMode mode) {
    cfg.validate();
    if (cfg.forge.n_eval == 0) throw ConfigError("run_pipeline needs forge eval_n > 0 for the eval stage");
    fs::create_directories(out_dir);
    ArtifactLog log;
    log.root = out_dir;

    // forge
    const ForgeConfig fc = forge_config_for_run(cfg);
    const ForgedDataset forged = forge_dataset(fc, mode);
    log.add_all(write_forged_dataset(forged, fc, out_dir + "/dataset"));
    StageData stages = stages_from_forged(forged, fc);

    // sft
    SftConfig sft_cfg = cfg.sft;
    sft_cfg.seed = stage_seed(cfg.master_seed, "sft");
    const PolicyParams init = PolicyParams::random_init(stages.dims, stage_seed(cfg.master_seed, "init"));
    const SftResult sft = train_sft(init, stages.vocab, stages.sft_set, sft_cfg, mode);
    const std::string sft_ckpt = out_dir + "/sft.ckpt";
    save_checkpoint(sft.params, sft_ckpt);
    log.add(sft_ckpt);
    const std::string sft_metrics = out_dir + "/sft_metrics.jsonl";
    write_sft_metrics_jsonl(sft.loss_curve, sft_metrics);
    log.add(sft_metrics);

    // grpo
    GrpoConfig grpo_cfg = cfg.grpo;
    grpo_cfg.seed = stage_seed(cfg.master_seed, "grpo");
    const std::string grpo_metrics_path = out_dir + "/grpo_metrics.jsonl";
    GrpoResult grpo;
    {
        std::ofstream metrics_out = open_out(grpo_metrics_path);
        grpo = train_grpo(sft.params, stages.vocab, stages.rl_set, grpo_cfg, mode,
                          [&](const StepMetrics& m) { metrics_out << step_metrics_json(m) << "\n"; });
        if (!metrics_out) throw IoError("failed writing " + grpo_metrics_path);
    }
    const std::string grpo_ckpt = out_dir + "/grpo.ckpt";
    save_checkpoint(grpo.params, grpo_ckpt);
    log.add(grpo_ckpt);
    log.add(grpo_metrics_path);

    // eval
    const EvalReport report = evaluate(grpo.params, stages.vocab, stages.eval_set, cfg.eval.n_perms,
                                       stage_seed(cfg.master_seed, "eval"), mode);
    const std::string report_path = out_dir + "/report.json";
    write_report_json(report, report_path);
    log.add(report_path);
    const std::string csv_path = out_dir + "/report.csv";
    append_report_csv(report, cfg.run_id, csv_path);
    log.add(csv_path);

    PipelineResult result;
    result.report = report;
    result.manifest = build_manifest(cfg, log);
    std::ofstream manifest_out = open_out(out_dir + "/manifest.json");
    manifest_out << result.manifest.to_json() << "\n";
    if (!manifest_out) throw IoError("failed writing manifest");
    return result;
}

// ----------------------------- ablation -----------------------------

AblationPlan AblationPlan::default_plan(std::vector<std::uint64_t> seeds) {
    AblationPlan plan;
    plan.rows = {
        {"Base", false, false, false},
        {"+SFT", true, false, false},
        {"+GRPO", true, true, false},
        {"+GRPO(LCR)", true, true, true},
    };
    plan.seeds = std::move(seeds);
    return plan;
}

void AblationPlan::validate() const {
    if (rows.empty()) throw ConfigError("ablation plan has no rows");
    if (seeds.empty()) throw ConfigError("ablation plan has no seeds");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].label.empty()) throw ConfigError("ablation row label must be nonempty");
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            if (rows[i].label == rows[j].label) throw ConfigError("duplicate ablation label " + rows[i].label);
        }
    }
}

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AblationSummary run_ablation(const AblationPlan& plan, const RunConfig& cfg, const std::string& out_dir,
                             ExecMode mode) {
    plan.validate();
    cfg.validate();
    if (cfg.forge.n_eval == 0) throw ConfigError("ablation needs forge eval_n > 0");
    fs::create_directories(out_dir);

    AblationSummary result;
    for (const std::uint64_t seed : plan.seeds) {
        ForgeConfig fc = cfg.forge;
        fc.seed = stage_seed(seed, "forge");
        const ForgedDataset forged = forge_dataset(fc, mode);
        const StageData stages = stages_from_forged(forged, fc);
        const std::uint64_t eval_seed = stage_seed(seed, "eval");

        const PolicyParams base = PolicyParams::random_init(stages.dims, stage_seed(seed, "init"));

        // stages are cumulative, so SFT runs once per seed and is reused
        PolicyParams sft_params = base;
        bool have_sft = false;
        for (const AblationRow& row : plan.rows) {
            PolicyParams current = base;
            if (row.use_sft) {
                if (!have_sft) {
                    SftConfig sft_cfg = cfg.sft;
                    sft_cfg.seed = stage_seed(seed, "sft");
                    sft_params = train_sft(base, stages.vocab, stages.sft_set, sft_cfg, mode).params;
                    have_sft = true;
                }
                current = sft_params;
            }
            if (row.use_grpo) {
                GrpoConfig grpo_cfg = cfg.grpo;
                grpo_cfg.seed = stage_seed(seed, "grpo");
                grpo_cfg.lcr_enabled = row.lcr_enabled;
                current = train_grpo(current, stages.vocab, stages.rl_set, grpo_cfg, mode).params;
            }
            AblationCell cell;
            cell.label = row.label;
            cell.seed = seed;
            cell.report = evaluate(current, stages.vocab, stages.eval_set, cfg.eval.n_perms, eval_seed, mode);
            result.cells.push_back(std::move(cell));
        }
    }

    for (const AblationRow& row : plan.rows) {
        std::vector<double> oa, aa, reason, drift, wrca;
        for (const AblationCell& cell : result.cells) {
            if (cell.label != row.label) continue;
            oa.push_back(cell.report.oa);
            aa.push_back(cell.report.aa);
            reason.push_back(cell.report.per_category[static_cast<int>(Category::reason)]);
            drift.push_back(cell.report.drift_rate);
            wrca.push_back(static_cast<double>(cell.report.alignment_counts[static_cast<int>(AlignmentCell::wr_ca)]));
        }
        AblationRowSummary s;
        s.label = row.label;
        s.median_oa = median(oa);
        s.median_aa = median(aa);
        s.median_reason_acc = median(reason);
        s.median_drift_rate = median(drift);
        s.median_wr_ca = median(wrca);
        result.summary.push_back(std::move(s));
    }

    const std::string csv_path = out_dir + "/ablation.csv";
    std::ofstream out = open_out(csv_path);
    out << "row,seed,oa,aa,acc_reason,drift_rate,n_wr_ca\n";
    for (const AblationCell& cell : result.cells) {
        out << cell.label << "," << cell.seed << "," << fmt_double(cell.report.oa) << ","
            << fmt_double(cell.report.aa) << ","
            << fmt_double(cell.report.per_category[static_cast<int>(Category::reason)]) << ","
            << fmt_double(cell.report.drift_rate) << ","
            << cell.report.alignment_counts[static_cast<int>(AlignmentCell::wr_ca)] << "\n";
    }
    for (const AblationRowSummary& s : result.summary) {
        out << s.label << ",median," << fmt_double(s.median_oa) << "," << fmt_double(s.median_aa) << ","
            << fmt_double(s.median_reason_acc) << "," << fmt_double(s.median_drift_rate) << ","
            << fmt_double(s.median_wr_ca) << "\n";
    }
    if (!out) throw IoError("failed writing " + csv_path);
    return result;
}

} // namespace scenelab

// scenelab command line: forge / sft / grpo / eval / run / ablate.

#include "scenelab/config.hpp"
#include "scenelab/dataset_io.hpp"
#include "scenelab/errors.hpp"
#include "scenelab/eval.hpp"
#include "scenelab/grpo.hpp"
#include "scenelab/pipeline.hpp"
#include "scenelab/sft.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace {

using namespace scenelab;

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("SCENELAB_LOG");
    if (!env) return LogLevel::info;
    const std::string v(env);
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << msg << "\n";
}

struct CommonArgs {
    std::string config_path;
    bool serial = false;
    int threads = 0;

    ExecMode mode() const { return serial ? ExecMode::serial : ExecMode::openmp; }
    RunConfig load_config() const {
        return config_path.empty() ? RunConfig{} : parse_run_config(config_path);
    }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw ConfigError("seed list is empty");
    return seeds;
}

// vocab and dims for a forged dataset directory
struct LoadedMeta {
    ForgeMeta meta;
    AtomVocab vocab;
    PolicyDims dims;
};

LoadedMeta load_meta(const std::string& dataset_dir) {
    LoadedMeta out;
    out.meta = read_forge_meta(DatasetPaths::in_dir(dataset_dir).meta);
    out.vocab = AtomVocab::build(out.meta.count_max);
    out.dims.vocab_size = out.vocab.size();
    out.dims.max_options = out.meta.k_options;
    out.dims.l_max = default_l_max;
    out.dims.count_max = out.meta.count_max;
    return out;
}

std::ofstream open_out_file(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale consistency-aware policy training on forged spatial MCQ scenes"};
    app.require_subcommand(1);

    CommonArgs common;
    app.add_flag("--serial", common.serial, "run kernels on the serial reference path");
    app.add_option("--threads", common.threads, "OpenMP thread count (0 = runtime default)");

    // forge
    auto* forge_cmd = app.add_subcommand("forge", "generate a verified scene/MCQ dataset");
    std::string forge_out = "dataset";
    std::uint64_t forge_n = 4000, forge_eval_n = 0;
    double forge_ratio = 0.25, forge_bias = -1.0;
    int forge_k = 0;
    std::uint64_t forge_seed = 0;
    bool forge_seed_set = false;
    std::string forge_weights;
    forge_cmd->add_option("--config", common.config_path, "run config file supplying [forge] defaults");
    forge_cmd->add_option("--out", forge_out, "output directory")->required();
    forge_cmd->add_option("--n", forge_n, "training samples (split into SFT and RL subsets)");
    forge_cmd->add_option("--split-ratio", forge_ratio, "SFT fraction of the training samples");
    forge_cmd->add_option("--eval-n", forge_eval_n, "held-out evaluation samples");
    forge_cmd->add_option("--seed", forge_seed, "forge seed")->each([&](const std::string&) { forge_seed_set = true; });
    forge_cmd->add_option("--weights", forge_weights, "category weights, e.g. count:1,color:1,shape:1,scene:1,reason:2");
    forge_cmd->add_option("--gold-slot-bias", forge_bias, "extra gold probability on slot 0, in [0,1]");
    forge_cmd->add_option("--k", forge_k, "options per question");

    // sft
    auto* sft_cmd = app.add_subcommand("sft", "stage 1: supervised initialization on gold traces");
    std::string sft_dataset, sft_out = "sft.ckpt", sft_metrics_path, sft_init;
    std::uint64_t sft_seed = 0;
    bool sft_seed_set = false;
    sft_cmd->add_option("--config", common.config_path, "run config file supplying [sft] values");
    sft_cmd->add_option("--dataset", sft_dataset, "forged dataset directory")->required();
    sft_cmd->add_option("--out", sft_out, "output checkpoint path");
    sft_cmd->add_option("--metrics", sft_metrics_path, "per-epoch loss JSONL path");
    sft_cmd->add_option("--init", sft_init, "initial checkpoint (default: seeded random init)");
    sft_cmd->add_option("--seed", sft_seed, "training seed")->each([&](const std::string&) { sft_seed_set = true; });

    // grpo
    auto* grpo_cmd = app.add_subcommand("grpo", "stage 2: consistency-aware group-relative RL");
    std::string grpo_dataset, grpo_init, grpo_out = "grpo.ckpt", grpo_metrics_path, grpo_audit_path;
    std::uint64_t grpo_seed = 0;
    bool grpo_seed_set = false, no_lcr = false;
    grpo_cmd->add_option("--config", common.config_path, "run config file supplying [grpo] values");
    grpo_cmd->add_option("--dataset", grpo_dataset, "forged dataset directory")->required();
    grpo_cmd->add_option("--init", grpo_init, "SFT checkpoint to start from")->required();
    grpo_cmd->add_option("--out", grpo_out, "output checkpoint path");
    grpo_cmd->add_option("--metrics", grpo_metrics_path, "per-step metrics JSONL path");
    grpo_cmd->add_option("--audit", grpo_audit_path, "reward audit JSONL path");
    grpo_cmd->add_flag("--no-lcr", no_lcr, "ablation switch: drop the logical consistency reward");
    grpo_cmd->add_option("--seed", grpo_seed, "training seed")->each([&](const std::string&) { grpo_seed_set = true; });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "argmax evaluation with drift diagnostics");
    std::string eval_dataset, eval_ckpt, eval_report = "report.json", eval_csv, eval_label = "eval", eval_split = "eval";
    int eval_n_perms = 0;
    std::uint64_t eval_seed = 1;
    eval_cmd->add_option("--config", common.config_path, "run config file supplying [eval] values");
    eval_cmd->add_option("--dataset", eval_dataset, "forged dataset directory")->required();
    eval_cmd->add_option("--checkpoint", eval_ckpt, "policy checkpoint")->required();
    eval_cmd->add_option("--report", eval_report, "output report JSON path");
    eval_cmd->add_option("--csv", eval_csv, "append a flat CSV row here");
    eval_cmd->add_option("--label", eval_label, "CSV row label");
    eval_cmd->add_option("--split", eval_split, "which samples to score: eval, rl or sft");
    eval_cmd->add_option("--n-perms", eval_n_perms, "permutations per sample for the drift rate");
    eval_cmd->add_option("--seed", eval_seed, "permutation seed");

    // run
    auto* run_cmd = app.add_subcommand("run", "full pipeline: forge -> sft -> grpo -> eval");
    std::string run_out = "run";
    std::uint64_t run_seed = 0;
    bool run_seed_set = false;
    run_cmd->add_option("--config", common.config_path, "run config file")->required();
    run_cmd->add_option("--out", run_out, "run directory");
    run_cmd->add_option("--seed", run_seed, "override master_seed")->each([&](const std::string&) { run_seed_set = true; });

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "Base / +SFT / +GRPO / +GRPO(LCR) over several seeds");
    std::string ablate_out = "ablation", ablate_seeds = "1,2,3,4,5";
    ablate_cmd->add_option("--config", common.config_path, "run config file")->required();
    ablate_cmd->add_option("--out", ablate_out, "output directory");
    ablate_cmd->add_option("--seeds", ablate_seeds, "comma-separated master seeds");

    CLI11_PARSE(app, argc, argv);

#if defined(_OPENMP)
    if (common.threads > 0) omp_set_num_threads(common.threads);
#endif
    const ExecMode mode = common.mode();
    const auto* active = app.get_subcommands().front();
    const std::string stage = active->get_name();

    try {
        if (active == forge_cmd) {
            RunConfig cfg = common.load_config();
            ForgeConfig fc = cfg.forge;
            if (forge_cmd->count("--n")) fc.n_total = forge_n;
            if (forge_cmd->count("--split-ratio")) fc.split_ratio = forge_ratio;
            if (forge_cmd->count("--eval-n")) fc.n_eval = forge_eval_n;
            if (forge_seed_set) fc.seed = forge_seed;
            if (!forge_weights.empty()) {
                // reuse the strict config-file parser for the weight list
                RunConfig tmp = parse_run_config_text("[forge]\ncategory_weights = " + forge_weights + "\n");
                fc.category_weights = tmp.forge.category_weights;
            }
            if (forge_bias >= 0.0) fc.gold_slot_bias = forge_bias;
            if (forge_k > 0) fc.k_options = forge_k;
            fc.validate();
            const ForgedDataset data = forge_dataset(fc, mode);
            write_forged_dataset(data, fc, forge_out);
            log_info("[forge] wrote " + std::to_string(data.samples.size()) + " train + " +
                     std::to_string(data.eval_samples.size()) + " eval samples to " + forge_out);
        } else if (active == sft_cmd) {
            RunConfig cfg = common.load_config();
            SftConfig sc = cfg.sft;
            if (sft_seed_set) sc.seed = sft_seed;
            const LoadedMeta meta = load_meta(sft_dataset);
            const DatasetPaths paths = DatasetPaths::in_dir(sft_dataset);
            const DatasetBundle data = load_bundle(paths.scenes, paths.samples_sft);
            const PolicyParams init = sft_init.empty()
                                          ? PolicyParams::random_init(meta.dims, mix_seed(sc.seed, {hash_tag("init")}))
                                          : load_checkpoint(sft_init);
            const SftResult result = train_sft(init, meta.vocab, data, sc, mode);
            save_checkpoint(result.params, sft_out);
            if (!sft_metrics_path.empty()) write_sft_metrics_jsonl(result.loss_curve, sft_metrics_path);
            log_info("[sft] mean NLL " + std::to_string(result.loss_curve.front()) + " -> " +
                     std::to_string(result.loss_curve.back()) + ", checkpoint " + sft_out);
        } else if (active == grpo_cmd) {
            RunConfig cfg = common.load_config();
            GrpoConfig gc = cfg.grpo;
            if (grpo_seed_set) gc.seed = grpo_seed;
            if (no_lcr) gc.lcr_enabled = false;
            const LoadedMeta meta = load_meta(grpo_dataset);
            const DatasetPaths paths = DatasetPaths::in_dir(grpo_dataset);
            const DatasetBundle data = load_bundle(paths.scenes, paths.samples_rl);
            const PolicyParams init = load_checkpoint(grpo_init);

            std::ofstream metrics_out, audit_out;
            MetricsSink metrics_sink;
            AuditSink audit_sink;
            if (!grpo_metrics_path.empty()) {
                metrics_out = open_out_file(grpo_metrics_path);
                metrics_sink = [&](const StepMetrics& m) { metrics_out << step_metrics_json(m) << "\n"; };
            }
            if (!grpo_audit_path.empty()) {
                audit_out = open_out_file(grpo_audit_path);
                audit_sink = [&](const std::string& line) { audit_out << line << "\n"; };
            }
            const GrpoResult result = train_grpo(init, meta.vocab, data, gc, mode, metrics_sink, audit_sink);
            save_checkpoint(result.params, grpo_out);
            log_info("[grpo] " + std::to_string(result.metrics.size()) + " steps, checkpoint " + grpo_out);
        } else if (active == eval_cmd) {
            RunConfig cfg = common.load_config();
            int n_perms = cfg.eval.n_perms;
            if (eval_n_perms > 0) n_perms = eval_n_perms;
            const LoadedMeta meta = load_meta(eval_dataset);
            const DatasetPaths paths = DatasetPaths::in_dir(eval_dataset);
            std::string scenes_path = paths.scenes_eval, samples_path = paths.samples_eval;
            if (eval_split == "rl") {
                scenes_path = paths.scenes;
                samples_path = paths.samples_rl;
            } else if (eval_split == "sft") {
                scenes_path = paths.scenes;
                samples_path = paths.samples_sft;
            } else if (eval_split != "eval") {
                throw ConfigError("--split must be eval, rl or sft");
            }
            const DatasetBundle data = load_bundle(scenes_path, samples_path);
            const PolicyParams params = load_checkpoint(eval_ckpt);
            const EvalReport report = evaluate(params, meta.vocab, data, n_perms, eval_seed, mode);
            write_report_json(report, eval_report);
            if (!eval_csv.empty()) append_report_csv(report, eval_label, eval_csv);
            log_info("[eval] OA " + std::to_string(report.oa) + " AA " + std::to_string(report.aa) + " drift " +
                     std::to_string(report.drift_rate));
        } else if (active == run_cmd) {
            RunConfig cfg = parse_run_config(common.config_path);
            if (run_seed_set) cfg.master_seed = run_seed;
            const PipelineResult result = run_pipeline(cfg, run_out, mode);
            log_info("[run] OA " + std::to_string(result.report.oa) + " AA " + std::to_string(result.report.aa) +
                     ", manifest " + run_out + "/manifest.json");
        } else if (active == ablate_cmd) {
            const RunConfig cfg = parse_run_config(common.config_path);
            const AblationPlan plan = AblationPlan::default_plan(parse_seed_list(ablate_seeds));
            const AblationSummary summary = run_ablation(plan, cfg, ablate_out, mode);
            for (const AblationRowSummary& row : summary.summary) {
                log_info("[ablate] " + row.label + ": median AA " + std::to_string(row.median_aa) + ", reason " +
                         std::to_string(row.median_reason_acc) + ", drift " + std::to_string(row.median_drift_rate));
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "[" << stage << "] error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

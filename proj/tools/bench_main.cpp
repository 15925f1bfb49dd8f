// Times the four hot kernels on the serial reference path and the OpenMP
// path, and checks that both produce identical results.

#include "scenelab/eval.hpp"
#include "scenelab/grpo.hpp"
#include "scenelab/pipeline.hpp"
#include "scenelab/sft.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace scenelab;

namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void print_row(const char* name, double serial_ms, double omp_ms, bool identical) {
    std::printf("%-28s %10.1f ms %10.1f ms %7.2fx   %s\n", name, serial_ms, omp_ms,
                omp_ms > 0.0 ? serial_ms / omp_ms : 0.0, identical ? "identical" : "MISMATCH");
}

} // namespace

int main() {
#if defined(_OPENMP)
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp; both columns run serially\n");
#endif
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    ForgeConfig fc;
    fc.n_total = 768;
    fc.n_eval = 256;
    fc.seed = 11;
    fc.gold_slot_bias = 0.5;

    ForgedDataset forged_serial, forged_omp;
    const double forge_serial_ms = time_ms([&] { forged_serial = forge_dataset(fc, ExecMode::serial); });
    const double forge_omp_ms = time_ms([&] { forged_omp = forge_dataset(fc, ExecMode::openmp); });
    const bool forge_same = forged_serial.samples.size() == forged_omp.samples.size() &&
                            forged_serial.scenes.size() == forged_omp.scenes.size() &&
                            [&] {
                                for (std::size_t i = 0; i < forged_serial.samples.size(); ++i) {
                                    if (forged_serial.samples[i].stem != forged_omp.samples[i].stem ||
                                        forged_serial.samples[i].options != forged_omp.samples[i].options)
                                        return false;
                                }
                                return true;
                            }();
    print_row("forge_dataset", forge_serial_ms, forge_omp_ms, forge_same);

    const std::size_t n_sft = sft_count(fc);
    DatasetBundle sft_set = make_bundle(
        forged_serial.scenes,
        {forged_serial.samples.begin(), forged_serial.samples.begin() + static_cast<std::ptrdiff_t>(n_sft)});
    DatasetBundle rl_set = make_bundle(
        forged_serial.scenes,
        {forged_serial.samples.begin() + static_cast<std::ptrdiff_t>(n_sft), forged_serial.samples.end()});
    DatasetBundle eval_set = make_bundle(forged_serial.eval_scenes, forged_serial.eval_samples);

    const AtomVocab vocab = AtomVocab::build(fc.gen.count_max);
    PolicyDims dims;
    dims.vocab_size = vocab.size();
    dims.max_options = fc.k_options;
    dims.count_max = fc.gen.count_max;
    const PolicyParams init = PolicyParams::random_init(dims, 5);

    SftConfig sc;
    sc.epochs = 4;
    sc.seed = 7;
    SftResult sft_serial, sft_omp;
    const double sft_serial_ms = time_ms([&] { sft_serial = train_sft(init, vocab, sft_set, sc, ExecMode::serial); });
    const double sft_omp_ms = time_ms([&] { sft_omp = train_sft(init, vocab, sft_set, sc, ExecMode::openmp); });
    print_row("train_sft (4 epochs)", sft_serial_ms, sft_omp_ms,
              sft_serial.params.trace_head == sft_omp.params.trace_head &&
                  sft_serial.loss_curve == sft_omp.loss_curve);

    GrpoConfig gc;
    gc.steps = 40;
    gc.seed = 7;
    GrpoResult grpo_serial, grpo_omp;
    const double grpo_serial_ms =
        time_ms([&] { grpo_serial = train_grpo(sft_serial.params, vocab, rl_set, gc, ExecMode::serial); });
    const double grpo_omp_ms =
        time_ms([&] { grpo_omp = train_grpo(sft_serial.params, vocab, rl_set, gc, ExecMode::openmp); });
    print_row("train_grpo (40 steps)", grpo_serial_ms, grpo_omp_ms,
              grpo_serial.params.trace_head == grpo_omp.params.trace_head);

    EvalReport eval_serial, eval_omp;
    const double eval_serial_ms =
        time_ms([&] { eval_serial = evaluate(grpo_serial.params, vocab, eval_set, 3, 13, ExecMode::serial); });
    const double eval_omp_ms =
        time_ms([&] { eval_omp = evaluate(grpo_serial.params, vocab, eval_set, 3, 13, ExecMode::openmp); });
    print_row("evaluate (256 x 3 perms)", eval_serial_ms, eval_omp_ms,
              eval_serial.oa == eval_omp.oa && eval_serial.drift_rate == eval_omp.drift_rate &&
                  eval_serial.alignment_counts == eval_omp.alignment_counts);
    return 0;
}

// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include "hydroptic/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = hydroptic::cli;

namespace {

void add_pipeline_flags(CLI::App* cmd, cli::PipelineFlags& flags, bool with_restore_params) {
    cmd->add_option("--site", flags.site_path, "Site metadata JSON (attenuation + sensor responses)");
    cmd->add_option("--p", flags.p_triple, "Channel attenuation triple r,g,b in 1/m (bypasses --site)");
    cmd->add_option("--distance", flags.distance, "Camera-object distance in m (else per-image sidecar)");
    cmd->add_option("--depth", flags.depth, "Dive depth in m (else per-image sidecar)");
    cmd->add_option("--threads", flags.threads,
                    "Worker threads (default: HYDROPTIC_THREADS or hardware)");
    if (with_restore_params) {
        cmd->add_option("--t0", flags.t0, "Transmission lower bound")->capture_default_str();
        cmd->add_option("--keep-range", flags.keep_range,
                        "Trusted 8-bit input range lo:hi for the inversion")
            ->capture_default_str();
        cmd->add_flag("--no-rescale", flags.no_rescale,
                      "Skip the per-channel min-max contrast stretch");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hydroptic: physics-based underwater image restoration toolkit"};
    app.require_subcommand(1);
    app.get_formatter()->column_width(38);
    app.footer("Built-in defaults: t0=0.1, keep-range 13:255, tau=0.07, objective weights\n"
               "lambda_gan=1 lambda_nce=1 lambda_idt=10, spectral band 400:750 nm.\n"
               "HYDROPTIC_THREADS sets the default worker count.");

    // restore
    cli::PipelineFlags restore_flags;
    std::string restore_input, restore_output;
    bool restore_panel = false;
    auto* restore = app.add_subcommand(
        "restore", "Invert the underwater formation model over a file or directory");
    restore->add_option("--input", restore_input, "Input PNG or directory")->required();
    restore->add_option("--output", restore_output, "Output directory")->required();
    restore->add_flag("--panel", restore_panel, "Also write input|restored comparison strips");
    add_pipeline_flags(restore, restore_flags, true);

    // synthesize
    cli::PipelineFlags synth_flags;
    std::string synth_input, synth_output;
    auto* synthesize = app.add_subcommand(
        "synthesize", "Apply the forward degradation model (fixture construction)");
    synthesize->add_option("--input", synth_input, "Input PNG or directory")->required();
    synthesize->add_option("--output", synth_output, "Output directory")->required();
    add_pipeline_flags(synthesize, synth_flags, false);

    // evaluate
    std::string eval_restored, eval_reference, eval_csv, eval_json;
    bool eval_ssim_gray = false;
    int eval_threads = 0;
    auto* evaluate = app.add_subcommand(
        "evaluate", "MSE/PSNR/SSIM/UIQM over directories paired by filename");
    evaluate->add_option("--restored", eval_restored, "Candidate directory")->required();
    evaluate->add_option("--reference", eval_reference, "Reference directory")->required();
    evaluate->add_option("--csv", eval_csv, "Per-image CSV output path")->required();
    evaluate->add_option("--json", eval_json, "JSON summary output path");
    evaluate->add_flag("--ssim-gray", eval_ssim_gray,
                       "SSIM on Rec.601 luma instead of the RGB-channel average");
    evaluate->add_option("--threads", eval_threads,
                         "Worker threads (default: HYDROPTIC_THREADS or hardware)");

    // losscheck
    bool loss_random = false;
    std::uint64_t loss_seed = 0;
    int loss_trials = 100;
    double loss_tau = 0.07;
    std::string loss_fx, loss_fgx;
    auto* losscheck = app.add_subcommand(
        "losscheck", "Verify the contrastive loss kernels against oracle routes");
    losscheck->add_flag("--random", loss_random, "Generate random feature stacks");
    losscheck->add_option("--seed", loss_seed, "Random stack seed")->capture_default_str();
    losscheck->add_option("--trials", loss_trials, "Random trials per check")
        ->capture_default_str();
    losscheck->add_option("--tau", loss_tau, "Contrastive temperature")->capture_default_str();
    losscheck->add_option("--features-x", loss_fx, "Source-domain feature stack JSON");
    losscheck->add_option("--features-gx", loss_fgx, "Translated-domain feature stack JSON");

    // dataset
    cli::DatasetFlags ds_flags;
    auto* dataset = app.add_subcommand(
        "dataset", "Label, restore, and split a collection rooted at --root");
    dataset->add_option("--root", ds_flags.root, "Dataset root directory")->required();
    dataset->add_option("--seed", ds_flags.seed, "Split shuffle seed")->capture_default_str();
    dataset->add_option("--test-count", ds_flags.test_count, "Held-out pair count")
        ->capture_default_str();
    dataset->add_option("--depth-jitter-max", ds_flags.depth_jitter_max,
                        "Largest depth jump (m) still labeled good-quality")
        ->capture_default_str();
    dataset->add_option("--expect-size", ds_flags.expect_size,
                        "Warn when frames deviate from WxH (e.g. 1842x980)");
    add_pipeline_flags(dataset, ds_flags.pipeline, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitParse;
    }

    try {
        if (restore->parsed())
            return cli::cmd_restore(restore_flags, restore_input, restore_output, restore_panel);
        if (synthesize->parsed())
            return cli::cmd_synthesize(synth_flags, synth_input, synth_output);
        if (evaluate->parsed())
            return cli::cmd_evaluate(eval_restored, eval_reference, eval_csv, eval_json,
                                     eval_ssim_gray, eval_threads);
        if (losscheck->parsed())
            return cli::cmd_losscheck(loss_random, loss_seed, loss_trials, loss_tau, loss_fx,
                                      loss_fgx);
        if (dataset->parsed()) return cli::cmd_dataset(ds_flags);
    } catch (const hydroptic::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitIo;
    }
    return cli::kExitOk;
}

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectraldip/harness.hpp"

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SPECTRALDIP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring non-numeric SPECTRALDIP_SEED\n";
    }
  }
  return 0;
}

void add_config_file(CLI::App* cmd) {
  cmd->set_config("--config", "", "key=value config file; flags override");
  cmd->allow_config_extras(false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep-image-prior denoising with upsampler spectral analysis"};
  app.require_subcommand(1);
  const std::uint64_t env_seed = default_seed();

  spectraldip::AnalyzeConfig analyze;
  auto* cmd_an = app.add_subcommand("analyze",
                                    "Texture features, width class and a "
                                    "recommended architecture for an image");
  cmd_an->add_option("--input", analyze.input, "input image")->required();
  cmd_an->add_option("--family", analyze.family,
                     "hourglass|conv_decoder|mlp_decoder");
  cmd_an->add_option("--classifier", analyze.classifier_path,
                     "width classifier model JSON (default: rule based)");
  cmd_an->add_option("--arch-out", analyze.arch_out, "write the ArchSpec JSON here");
  cmd_an->add_option("--out", analyze.report_out, "report destination (default stdout)");
  cmd_an->add_option("--output-channels", analyze.output_channels);
  add_config_file(cmd_an);

  spectraldip::DenoiseConfig denoise;
  denoise.seed = env_seed;
  auto* cmd_dn = app.add_subcommand("denoise", "Run DIP denoising on one image");
  cmd_dn->add_option("--input", denoise.input, "input image")->required();
  cmd_dn->add_option("--clean", denoise.clean, "clean reference (optional)");
  cmd_dn->add_option("--arch", denoise.arch, "arch spec JSON or 'auto'");
  cmd_dn->add_option("--noise", denoise.noise, "gaussian:<sigma>|poisson:<zeta>|none");
  cmd_dn->add_option("--family", denoise.family, "family for --arch auto");
  cmd_dn->add_option("--classifier", denoise.classifier_path,
                     "width classifier for --arch auto");
  cmd_dn->add_option("--iters", denoise.iterations, "iterations");
  cmd_dn->add_option("--lr", denoise.learning_rate, "Adam learning rate");
  cmd_dn->add_option("--seed", denoise.seed, "seed (default $SPECTRALDIP_SEED)");
  cmd_dn->add_option("--log-every", denoise.log_every);
  cmd_dn->add_option("--resize", denoise.resize,
                     "center-crop + resize input to N x N (0 = keep)");
  cmd_dn->add_option("--log", denoise.log_csv, "trajectory CSV path");
  cmd_dn->add_option("--out", denoise.out_image, "output image path");
  cmd_dn->add_option("--report", denoise.report, "final|best");
  add_config_file(cmd_dn);

  spectraldip::SpectrumConfig spectrum;
  spectrum.seed = env_seed;
  auto* cmd_sp = app.add_subcommand(
      "spectrum", "Export LPF kernels, frequency responses and zero-insertion "
                  "replication residuals as CSV");
  cmd_sp->add_option("--bank", spectrum.bank, "upsampler names");
  cmd_sp->add_option("--points", spectrum.points, "response samples per curve");
  cmd_sp->add_option("--out-dir", spectrum.out_dir);
  cmd_sp->add_option("--seed", spectrum.seed);
  cmd_sp->add_option("--max-n", spectrum.replication_max_n,
                     "largest replication test length");
  add_config_file(cmd_sp);

  spectraldip::SweepConfig sweep;
  auto* cmd_sw = app.add_subcommand("sweep",
                                    "Architecture/upsampler grids over a "
                                    "manifest of clean images");
  cmd_sw->add_option("--experiment", sweep.experiment,
                     "upsamplers|width|depth|ablation");
  cmd_sw->add_option("--manifest", sweep.manifest, "dataset manifest CSV");
  cmd_sw->add_option("--image", sweep.image,
                     "single clean image (or exemplar:coarse / exemplar:fine)");
  cmd_sw->add_option("--noise", sweep.noise);
  cmd_sw->add_option("--upsamplers", sweep.upsamplers);
  cmd_sw->add_option("--widths", sweep.widths);
  cmd_sw->add_option("--depths", sweep.depths);
  cmd_sw->add_option("--family", sweep.family);
  cmd_sw->add_option("--base-width", sweep.base_width);
  cmd_sw->add_option("--base-depth", sweep.base_depth);
  cmd_sw->add_option("--num-conv-layers", sweep.num_conv_layers);
  cmd_sw->add_option("--seeds", sweep.seeds);
  cmd_sw->add_option("--iters", sweep.iterations);
  cmd_sw->add_option("--log-every", sweep.log_every);
  cmd_sw->add_option("--resize", sweep.resize);
  cmd_sw->add_option("--jobs", sweep.jobs, "concurrent runs");
  cmd_sw->add_option("--out-dir", sweep.out_dir);
  add_config_file(cmd_sw);

  spectraldip::TrainClassifierConfig train;
  train.seed = env_seed;
  auto* cmd_tr = app.add_subcommand(
      "train-classifier", "Fit the width classifier from a labeled manifest");
  cmd_tr->add_option("--manifest", train.manifest, "manifest with width labels")
      ->required();
  cmd_tr->add_option("--model-out", train.model_out, "model JSON destination");
  cmd_tr->add_option("--seed", train.seed);
  cmd_tr->add_option("--out", train.report_out, "report destination (default stdout)");
  add_config_file(cmd_tr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_an->parsed()) return spectraldip::cmd_analyze(analyze, std::cout, std::cerr);
  if (cmd_dn->parsed()) return spectraldip::cmd_denoise(denoise, std::cout, std::cerr);
  if (cmd_sp->parsed()) return spectraldip::cmd_spectrum(spectrum, std::cout, std::cerr);
  if (cmd_sw->parsed()) return spectraldip::cmd_sweep(sweep, std::cout, std::cerr);
  if (cmd_tr->parsed())
    return spectraldip::cmd_train_classifier(train, std::cout, std::cerr);
  return 2;
}

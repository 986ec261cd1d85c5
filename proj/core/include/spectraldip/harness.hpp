#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace spectraldip {

// Command parameter records. The CLI fills these from flags and an optional
// key=value config file; every command is deterministic given its record,
// and reruns produce byte-identical CSV/JSON outputs.

struct AnalyzeConfig {
  std::string input;
  std::string family = "hourglass";
  std::string classifier_path;  // empty: rule-based classification
  std::string arch_out;         // optional ArchSpec JSON destination
  std::string report_out;       // empty: stdout
  int output_channels = 1;
};

struct DenoiseConfig {
  std::string input;
  std::string clean;            // optional reference
  std::string arch = "auto";    // "auto" or a spec JSON path
  std::string noise = "none";   // gaussian:<sigma>|poisson:<zeta>|none
  std::string family = "hourglass";
  std::string classifier_path;
  int iterations = 3000;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  int log_every = 25;
  int resize = 0;               // 0: keep input size
  std::string log_csv;
  std::string out_image;
  std::string report = "final";  // final|best
};

struct SpectrumConfig {
  std::vector<std::string> bank = {"nn",       "bilinear", "kaiser14",
                                   "kaiser15", "kaiser60", "kaiser100"};
  int points = 1024;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int replication_min_n = 2;
  int replication_max_n = 128;
};

struct SweepConfig {
  std::string experiment = "upsamplers";  // upsamplers|width|depth|ablation
  std::string manifest;                   // entries used as clean images
  std::string image;                      // alternative: a single clean image
  std::string noise = "gaussian:25";
  std::vector<std::string> upsamplers = {"nn", "bilinear"};
  std::vector<int> widths = {32, 64, 128};
  std::vector<int> depths = {1, 2, 4};
  std::string family = "hourglass";
  int base_width = 64;
  int base_depth = 2;
  int num_conv_layers = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  int iterations = 1500;
  int log_every = 25;
  int resize = 128;
  int jobs = 1;
  std::string out_dir = ".";
};

struct TrainClassifierConfig {
  std::string manifest;
  std::string model_out;
  std::uint64_t seed = 0;
  std::string report_out;  // empty: stdout
};

// Exit codes: 0 success, 1 partial experiment failure, 2 usage/input error.
int cmd_analyze(const AnalyzeConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_denoise(const DenoiseConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_spectrum(const SpectrumConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_train_classifier(const TrainClassifierConfig& cfg, std::ostream& out,
                         std::ostream& err);

}  // namespace spectraldip

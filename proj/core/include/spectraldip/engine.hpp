#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spectraldip/arch.hpp"
#include "spectraldip/image.hpp"
#include "spectraldip/noise.hpp"
#include "spectraldip/optim.hpp"

namespace spectraldip {

struct TrajectoryRecord {
  int iteration = 0;
  double loss = 0.0;
  std::optional<double> psnr;
  std::optional<double> ssim;
};

struct TrainTrajectory {
  std::vector<TrajectoryRecord> records;
  int best_psnr_iteration = 0;
  Image final_output;
  Image best_output;

  std::string to_csv() const;  // iteration, loss, psnr, ssim
};

struct RunOptions {
  int iterations = 3000;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  double input_noise_scale = 0.1;
  int log_every = 25;
};

/// The DIP loop: a fixed uniform-noise input tensor is pushed through the
/// network and the parameters are fitted to the noisy target by Adam on the
/// MSE loss. Metrics against `clean` (when given) are recorded every
/// log_every iterations. Deterministic given (images, spec, opts).
TrainTrajectory run_dip(const Image& noisy, const Image* clean,
                        const ArchSpec& spec, const RunOptions& opts);

/// Iteration of maximum recorded PSNR; earliest on ties. Throws when the
/// trajectory has no PSNR records.
int peak_iteration(const TrainTrajectory& trajectory);

struct SweepRow {
  std::string upsampler;
  std::uint64_t seed = 0;
  bool aggregate = false;  // median-over-seeds row
  double peak_psnr = 0.0;
  double final_psnr = 0.0;
  double peak_ssim = 0.0;
  double final_ssim = 0.0;
  int peak_iter = 0;
  std::string status = "ok";
};

/// Runs base_spec with each upsampler x seed on (clean + noise), collecting
/// peak/final metrics per run plus one median-aggregated row per upsampler.
/// `jobs` bounds concurrent runs; rows are ordered by grid index regardless
/// of scheduling.
std::vector<SweepRow> sweep_upsamplers(const Image& clean,
                                       const NoiseSpec& noise,
                                       const ArchSpec& base_spec,
                                       const std::vector<UpsamplerSpec>& bank,
                                       const std::vector<std::uint64_t>& seeds,
                                       const RunOptions& opts, int jobs = 1);

double median(std::vector<double> v);

}  // namespace spectraldip

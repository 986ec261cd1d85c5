#include "spectraldip/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>

#include "spectraldip/metrics.hpp"

namespace spectraldip {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string TrainTrajectory::to_csv() const {
  std::string out = "# spectraldip-trajectory v1\niteration,loss,psnr,ssim\n";
  for (const auto& r : records) {
    out += std::to_string(r.iteration);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    if (r.psnr) out += format_double(*r.psnr);
    out += ',';
    if (r.ssim) out += format_double(*r.ssim);
    out += '\n';
  }
  return out;
}

TrainTrajectory run_dip(const Image& noisy, const Image* clean,
                        const ArchSpec& spec, const RunOptions& opts) {
  if (opts.iterations < 1)
    throw std::invalid_argument("run_dip: iterations must be >= 1");
  if (clean && !clean->same_shape(noisy))
    throw std::invalid_argument("run_dip: clean/noisy shape mismatch");

  ArchSpec s = spec;
  s.output_channels = noisy.channels;
  Network net = build_network(s, opts.seed);

  const auto [in_h, in_w] = net.input_spatial(noisy.height, noisy.width);

  // The fixed white-noise input tensor; a separate stream from the
  // parameter initialisation.
  std::mt19937_64 rng(opts.seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> zdata(static_cast<std::size_t>(net.input_channels()) *
                            in_h * in_w);
  for (double& v : zdata) v = uni(rng) * opts.input_noise_scale;
  const Tensor z = Tensor::from_data({net.input_channels(), in_h, in_w},
                                     std::move(zdata));

  const Tensor target = image_to_tensor(noisy);
  Adam optimizer(net.parameters(), AdamConfig{.learning_rate = opts.learning_rate});

  TrainTrajectory traj;
  double best_psnr = -1.0;

  for (int it = 1; it <= opts.iterations; ++it) {
    optimizer.zero_grad();
    const Tensor out = net.forward(z);
    const Tensor loss = mse_loss(out, target);
    if (!std::isfinite(loss.item()))
      throw std::runtime_error("run_dip: non-finite loss at iteration " +
                               std::to_string(it));
    backward(loss);
    optimizer.step();

    const bool last = it == opts.iterations;
    if (it % opts.log_every == 0 || last) {
      TrajectoryRecord rec;
      rec.iteration = it;
      rec.loss = loss.item();
      Image img = tensor_to_image(out);
      if (clean) {
        rec.psnr = psnr(img, *clean, 1.0);
        rec.ssim = ssim(img, *clean, 1.0);
        if (*rec.psnr > best_psnr) {
          best_psnr = *rec.psnr;
          traj.best_psnr_iteration = it;
          traj.best_output = img;
        }
      }
      if (last) traj.final_output = std::move(img);
      traj.records.push_back(std::move(rec));
    }
  }
  if (!clean) {
    traj.best_psnr_iteration = opts.iterations;
    traj.best_output = traj.final_output;
  }
  return traj;
}

int peak_iteration(const TrainTrajectory& trajectory) {
  int best_it = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : trajectory.records) {
    if (!r.psnr) continue;
    if (*r.psnr > best) {
      best = *r.psnr;
      best_it = r.iteration;
    }
  }
  if (best_it < 0)
    throw std::invalid_argument("peak_iteration: trajectory has no psnr records");
  return best_it;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<SweepRow> sweep_upsamplers(const Image& clean,
                                       const NoiseSpec& noise,
                                       const ArchSpec& base_spec,
                                       const std::vector<UpsamplerSpec>& bank,
                                       const std::vector<std::uint64_t>& seeds,
                                       const RunOptions& opts, int jobs) {
  if (bank.empty() || seeds.empty())
    throw std::invalid_argument("sweep_upsamplers: empty grid");
  const Image noisy = apply_noise(clean, noise);

  struct Cell {
    std::size_t u, s;
  };
  std::vector<Cell> grid;
  for (std::size_t u = 0; u < bank.size(); ++u)
    for (std::size_t s = 0; s < seeds.size(); ++s) grid.push_back({u, s});

  std::vector<SweepRow> rows(grid.size());
  const auto run_cell = [&](std::size_t g) {
    const Cell c = grid[g];
    SweepRow row;
    row.upsampler = bank[c.u].name();
    row.seed = seeds[c.s];
    try {
      ArchSpec s = base_spec;
      s.upsampler = bank[c.u];
      RunOptions o = opts;
      o.seed = seeds[c.s];
      const TrainTrajectory t = run_dip(noisy, &clean, s, o);
      row.peak_iter = peak_iteration(t);
      for (const auto& r : t.records) {
        if (r.iteration == row.peak_iter) {
          row.peak_psnr = *r.psnr;
          row.peak_ssim = r.ssim.value_or(0.0);
        }
      }
      const auto& last = t.records.back();
      row.final_psnr = last.psnr.value_or(0.0);
      row.final_ssim = last.ssim.value_or(0.0);
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    rows[g] = std::move(row);
  };

  if (jobs <= 1) {
    for (std::size_t g = 0; g < grid.size(); ++g) run_cell(g);
  } else {
    std::size_t next = 0;
    while (next < grid.size()) {
      std::vector<std::future<void>> batch;
      for (int j = 0; j < jobs && next < grid.size(); ++j, ++next)
        batch.push_back(std::async(std::launch::async, run_cell, next));
      for (auto& f : batch) f.get();
    }
  }

  // Median-aggregated row per upsampler, appended in bank order.
  std::vector<SweepRow> out = rows;
  for (std::size_t u = 0; u < bank.size(); ++u) {
    std::vector<double> pk, fn, pks, fns, pit;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (grid[g].u != u || rows[g].status != "ok") continue;
      pk.push_back(rows[g].peak_psnr);
      fn.push_back(rows[g].final_psnr);
      pks.push_back(rows[g].peak_ssim);
      fns.push_back(rows[g].final_ssim);
      pit.push_back(rows[g].peak_iter);
    }
    SweepRow agg;
    agg.upsampler = bank[u].name();
    agg.aggregate = true;
    if (pk.empty()) {
      agg.status = "error: all runs failed";
    } else {
      agg.peak_psnr = median(pk);
      agg.final_psnr = median(fn);
      agg.peak_ssim = median(pks);
      agg.final_ssim = median(fns);
      agg.peak_iter = static_cast<int>(median(pit));
    }
    out.push_back(std::move(agg));
  }
  return out;
}

}  // namespace spectraldip

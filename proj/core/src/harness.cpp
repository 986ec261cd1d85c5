#include "spectraldip/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "spectraldip/arch.hpp"
#include "spectraldip/dft.hpp"
#include "spectraldip/engine.hpp"
#include "spectraldip/exemplars.hpp"
#include "spectraldip/image_io.hpp"
#include "spectraldip/manifest.hpp"
#include "spectraldip/metrics.hpp"

namespace spectraldip {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCsvSchema = "# spectraldip-csv v1\n";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

Image load_clean_input(const std::string& name) {
  if (name == "exemplar:coarse") return coarse_exemplar();
  if (name == "exemplar:fine") return fine_exemplar();
  return load_image(name);
}

Image apply_resize(const Image& img, int resize) {
  if (resize <= 0) return img;
  return clamp01(resize_bicubic(center_crop_square(img), resize, resize));
}

WidthClassifier load_classifier(const std::string& path) {
  if (path.empty()) return WidthClassifier{};
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open classifier '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return WidthClassifier::from_json(ss.str());
}

json features_to_json(const TextureFeatures& f) {
  json j;
  j["glcm_correlation_0"] =
      f.glcm_correlation_0 ? json(*f.glcm_correlation_0) : json();
  j["correlation_defined"] = f.glcm_correlation_0.has_value();
  j["glcm_homogeneity_45"] = f.glcm_homogeneity_45;
  j["glcm_contrast_0"] = f.glcm_contrast_0;
  j["radial_psd"] = f.radial_psd;
  return j;
}

}  // namespace

int cmd_analyze(const AnalyzeConfig& cfg, std::ostream& out, std::ostream& err) {
  Image img;
  try {
    img = load_clean_input(cfg.input);
  } catch (const std::exception& e) {
    err << "analyze: " << e.what() << "\n";
    return 2;
  }
  try {
    const TextureFeatures features = texture_features(img);
    WidthClassifier classifier = load_classifier(cfg.classifier_path);
    const Family family = parse_family(cfg.family);
    const ArchSpec spec =
        recommend_arch(features, family, classifier, cfg.output_channels);

    json report;
    report["input"] = cfg.input;
    report["texture_features"] = features_to_json(features);
    report["predicted_width"] = classify_width(features, classifier);
    if (!features.glcm_correlation_0 &&
        classifier.mode == WidthClassifier::Mode::Linear)
      report["classifier_fallback"] = "rule_based";
    report["recommended_arch"] = json::parse(spec.to_json());
    report["param_count"] = param_count(spec);

    const std::string text = report.dump(2) + "\n";
    if (cfg.report_out.empty())
      out << text;
    else
      write_file(cfg.report_out, text);
    if (!cfg.arch_out.empty()) write_file(cfg.arch_out, spec.to_json() + "\n");
    return 0;
  } catch (const std::exception& e) {
    err << "analyze: " << e.what() << "\n";
    return 2;
  }
}

int cmd_denoise(const DenoiseConfig& cfg, std::ostream& out, std::ostream& err) {
  Image input;
  try {
    input = apply_resize(load_clean_input(cfg.input), cfg.resize);
  } catch (const std::exception& e) {
    err << "denoise: " << e.what() << "\n";
    return 2;
  }
  try {
    const NoiseSpec noise = NoiseSpec::parse(cfg.noise, cfg.seed);
    const Image noisy =
        noise.kind == NoiseSpec::Kind::None ? input : apply_noise(input, noise);

    // With synthetic noise the original input is the reference.
    Image clean_img;
    bool have_clean = false;
    if (!cfg.clean.empty()) {
      clean_img = apply_resize(load_clean_input(cfg.clean), cfg.resize);
      have_clean = true;
    } else if (noise.kind != NoiseSpec::Kind::None) {
      clean_img = input;
      have_clean = true;
    }

    ArchSpec spec;
    if (cfg.arch == "auto") {
      const TextureFeatures features = texture_features(noisy);
      spec = recommend_arch(features, parse_family(cfg.family),
                            load_classifier(cfg.classifier_path),
                            noisy.channels);
    } else {
      std::ifstream in(cfg.arch);
      if (!in) throw std::runtime_error("cannot open arch spec '" + cfg.arch + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      spec = ArchSpec::from_json(ss.str());
    }

    RunOptions opts;
    opts.iterations = cfg.iterations;
    opts.learning_rate = cfg.learning_rate;
    opts.seed = cfg.seed;
    opts.log_every = cfg.log_every;

    const TrainTrajectory traj =
        run_dip(noisy, have_clean ? &clean_img : nullptr, spec, opts);

    if (!cfg.log_csv.empty()) write_file(cfg.log_csv, traj.to_csv());
    const Image& result =
        cfg.report == "best" ? traj.best_output : traj.final_output;
    if (!cfg.out_image.empty()) save_image(clamp01(result), cfg.out_image);

    json summary;
    summary["arch"] = json::parse(spec.to_json());
    summary["param_count"] = param_count(spec);
    summary["iterations"] = cfg.iterations;
    summary["report"] = cfg.report;
    summary["final_loss"] = traj.records.back().loss;
    if (have_clean) {
      summary["noisy_psnr"] = psnr(noisy, clean_img, 1.0);
      summary["final_psnr"] = traj.records.back().psnr.value_or(0.0);
      summary["final_ssim"] = traj.records.back().ssim.value_or(0.0);
      summary["best_psnr_iteration"] = traj.best_psnr_iteration;
      summary["best_psnr"] = psnr(traj.best_output, clean_img, 1.0);
    }
    out << summary.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "denoise: " << e.what() << "\n";
    return 1;
  }
}

int cmd_spectrum(const SpectrumConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.points < 64) throw std::invalid_argument("spectrum: points must be >= 64");
    fs::create_directories(cfg.out_dir);

    std::string kernels = kCsvSchema;
    kernels += "filter,tap_index,value\n";
    std::string responses = kCsvSchema;
    responses += "filter,omega,magnitude_db\n";

    for (const std::string& name : cfg.bank) {
      const UpsamplerSpec spec = UpsamplerSpec::parse(name);
      const LpfDesign d = design_lpf(spec);
      for (std::size_t i = 0; i < d.kernel.size(); ++i)
        kernels += spec.name() + "," + std::to_string(i) + "," + fmt(d.kernel[i]) + "\n";
      const FrequencyResponse r = freq_response(d.kernel, d.gain, cfg.points);
      for (std::size_t i = 0; i < r.omega.size(); ++i)
        responses += spec.name() + "," + fmt(r.omega[i]) + "," +
                     fmt(r.magnitude_db[i]) + "\n";
    }

    std::string replication = kCsvSchema;
    replication += "n,residual,relative_residual\n";
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int n = cfg.replication_min_n; n <= cfg.replication_max_n; ++n) {
      std::vector<double> x(static_cast<std::size_t>(n));
      for (double& v : x) v = uni(rng);
      const double res = verify_spectrum_replication(x);
      const auto spec_of = dft(std::span<const double>(x));
      double xmax = 0.0;
      for (const auto& c : spec_of) xmax = std::max(xmax, std::abs(c));
      replication += std::to_string(n) + "," + fmt(res) + "," + fmt(res / xmax) + "\n";
    }

    write_file((fs::path(cfg.out_dir) / "kernels.csv").string(), kernels);
    write_file((fs::path(cfg.out_dir) / "responses.csv").string(), responses);
    write_file((fs::path(cfg.out_dir) / "replication.csv").string(), replication);
    out << "wrote kernels.csv, responses.csv, replication.csv to " << cfg.out_dir
        << "\n";
    return 0;
  } catch (const DesignError& e) {
    err << "spectrum: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "spectrum: " << e.what() << "\n";
    return 2;
  }
}

namespace {

struct SweepCell {
  std::string image_name;
  ArchSpec spec;
  std::string variant;  // upsampler name or width/depth tag
  std::uint64_t seed = 0;
};

struct CellResult {
  double peak_psnr = 0.0, final_psnr = 0.0, peak_ssim = 0.0, final_ssim = 0.0;
  int peak_iter = 0;
  std::string status = "ok";
};

std::string cell_row(const SweepConfig& cfg, const SweepCell& c,
                     const std::string& seed_text, const CellResult& r) {
  std::string row = cfg.experiment + "," + c.image_name + "," +
                    family_name(c.spec.family) + "," + c.variant + ",";
  row += std::to_string(c.spec.width_at(0)) + "," +
         std::to_string(c.spec.depth_levels) + ",";
  int skips = 0;
  for (int s : c.spec.skip_channels)
    if (s > 0) ++skips;
  row += std::to_string(skips) + "," + seed_text + ",";
  if (r.status == "ok") {
    row += fmt(r.peak_psnr) + "," + fmt(r.final_psnr) + "," + fmt(r.peak_ssim) +
           "," + fmt(r.final_ssim) + "," + std::to_string(r.peak_iter);
  } else {
    row += ",,,,";
  }
  row += "," + r.status + "\n";
  return row;
}

}  // namespace

int cmd_sweep(const SweepConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, Image>> images;
  try {
    if (!cfg.manifest.empty()) {
      const DatasetManifest m = DatasetManifest::load(cfg.manifest);
      for (const auto& e : m.entries)
        images.emplace_back(fs::path(e.image_path).stem().string(),
                            apply_resize(load_image(e.image_path), cfg.resize));
    } else if (!cfg.image.empty()) {
      images.emplace_back(fs::path(cfg.image).stem().string(),
                          apply_resize(load_clean_input(cfg.image), cfg.resize));
    } else {
      throw std::invalid_argument("sweep: need --manifest or --image");
    }
    if (cfg.seeds.empty()) throw std::invalid_argument("sweep: empty seed list");
  } catch (const std::exception& e) {
    err << "sweep: " << e.what() << "\n";
    return 2;
  }

  // Grid construction; one variant axis per experiment kind.
  std::vector<SweepCell> cells;
  try {
    const Family family = parse_family(cfg.family);
    for (const auto& [name, img] : images) {
      std::vector<std::pair<std::string, ArchSpec>> variants;
      ArchSpec base;
      base.family = family;
      base.width = {cfg.base_width};
      base.depth_levels = cfg.base_depth;
      base.num_conv_layers = cfg.num_conv_layers;
      base.kernel_size = family == Family::MlpDecoder ? 1 : 3;
      base.output_channels = img.channels;

      if (cfg.experiment == "upsamplers") {
        for (const auto& uname : cfg.upsamplers) {
          ArchSpec s = base;
          s.upsampler = UpsamplerSpec::parse(uname);
          variants.emplace_back(s.upsampler.name(), s);
        }
      } else if (cfg.experiment == "width") {
        for (int w : cfg.widths) {
          ArchSpec s = base;
          s.width = {w};
          variants.emplace_back("w" + std::to_string(w), s);
        }
      } else if (cfg.experiment == "depth") {
        for (int d : cfg.depths) {
          ArchSpec s = base;
          s.depth_levels = d;
          variants.emplace_back("d" + std::to_string(d), s);
          if (d >= 2) {
            ArchSpec sk = s;
            sk.skip_channels.assign(static_cast<std::size_t>(d), 0);
            sk.skip_channels[1] = std::max(1, cfg.base_width / 4);
            variants.emplace_back("d" + std::to_string(d) + "+skip", sk);
          }
        }
      } else if (cfg.experiment == "ablation") {
        ArchSpec with_up = base;
        with_up.upsampler = UpsamplerSpec::bilinear();
        variants.emplace_back("bilinear", with_up);
        ArchSpec no_up = base;
        no_up.upsampler = UpsamplerSpec::none();
        variants.emplace_back("no_upsampling", no_up);
      } else {
        throw std::invalid_argument("sweep: unknown experiment '" + cfg.experiment + "'");
      }
      for (auto& [vname, spec] : variants) {
        spec.validate();
        for (std::uint64_t seed : cfg.seeds)
          cells.push_back({name, spec, vname, seed});
      }
    }
  } catch (const std::exception& e) {
    err << "sweep: " << e.what() << "\n";
    return 2;
  }

  const auto image_of = [&](const std::string& name) -> const Image& {
    for (const auto& [n, img] : images)
      if (n == name) return img;
    throw std::logic_error("sweep: image lookup");
  };

  std::vector<CellResult> results(cells.size());
  const auto run_cell = [&](std::size_t i) {
    const SweepCell& c = cells[i];
    CellResult r;
    try {
      const Image& clean = image_of(c.image_name);
      NoiseSpec noise = NoiseSpec::parse(cfg.noise, c.seed);
      const Image noisy = apply_noise(clean, noise);
      RunOptions opts;
      opts.iterations = cfg.iterations;
      opts.seed = c.seed;
      opts.log_every = cfg.log_every;
      const TrainTrajectory t = run_dip(noisy, &clean, c.spec, opts);
      r.peak_iter = peak_iteration(t);
      for (const auto& rec : t.records)
        if (rec.iteration == r.peak_iter) {
          r.peak_psnr = *rec.psnr;
          r.peak_ssim = rec.ssim.value_or(0.0);
        }
      r.final_psnr = t.records.back().psnr.value_or(0.0);
      r.final_ssim = t.records.back().ssim.value_or(0.0);
    } catch (const std::exception& e) {
      r.status = std::string("error: ") + e.what();
    }
    results[i] = std::move(r);
  };

  if (cfg.jobs <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::size_t next = 0;
    while (next < cells.size()) {
      std::vector<std::future<void>> batch;
      for (int j = 0; j < cfg.jobs && next < cells.size(); ++j, ++next)
        batch.push_back(std::async(std::launch::async, run_cell, next));
      for (auto& f : batch) f.get();
    }
  }

  // Per-run rows in grid order, then median rows per (image, variant).
  std::string csv = kCsvSchema;
  csv +=
      "experiment,image,family,variant,width,depth,skips,seed,peak_psnr,"
      "final_psnr,peak_ssim,final_ssim,peak_iter,status\n";
  std::size_t ok_count = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    csv += cell_row(cfg, cells[i], std::to_string(cells[i].seed), results[i]);
    if (results[i].status == "ok") ++ok_count;
  }
  std::vector<std::pair<std::string, std::string>> seen;  // image, variant
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto key = std::make_pair(cells[i].image_name, cells[i].variant);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    std::vector<double> pk, fn, pks, fns, pit;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j].image_name != key.first || cells[j].variant != key.second ||
          results[j].status != "ok")
        continue;
      pk.push_back(results[j].peak_psnr);
      fn.push_back(results[j].final_psnr);
      pks.push_back(results[j].peak_ssim);
      fns.push_back(results[j].final_ssim);
      pit.push_back(results[j].peak_iter);
    }
    CellResult agg;
    if (pk.empty()) {
      agg.status = "error: all runs failed";
    } else {
      agg.peak_psnr = median(pk);
      agg.final_psnr = median(fn);
      agg.peak_ssim = median(pks);
      agg.final_ssim = median(fns);
      agg.peak_iter = static_cast<int>(median(pit));
    }
    csv += cell_row(cfg, cells[i], "median", agg);
  }

  try {
    fs::create_directories(cfg.out_dir);
    const std::string path =
        (fs::path(cfg.out_dir) / (cfg.experiment + ".csv")).string();
    write_file(path, csv);
    out << "wrote " << path << " (" << ok_count << "/" << cells.size()
        << " runs ok)\n";
  } catch (const std::exception& e) {
    err << "sweep: " << e.what() << "\n";
    return 2;
  }
  if (ok_count == 0) return 1;
  return 0;
}

int cmd_train_classifier(const TrainClassifierConfig& cfg, std::ostream& out,
                         std::ostream& err) {
  try {
    const DatasetManifest m = DatasetManifest::load(cfg.manifest);
    std::vector<std::pair<TextureFeatures, int>> dataset;
    for (const auto& e : m.entries) {
      if (!e.width_label) continue;
      dataset.emplace_back(texture_features(load_image(e.image_path)),
                           *e.width_label);
    }
    if (dataset.size() < 4)
      throw std::invalid_argument(
          "train-classifier: need at least 4 labeled images");
    TrainOptions opts;
    opts.seed = cfg.seed;
    const TrainedClassifier trained = train_width_classifier(dataset, opts);
    if (!cfg.model_out.empty())
      write_file(cfg.model_out, trained.model.to_json() + "\n");

    json report;
    report["n_images"] = dataset.size();
    report["cv_micro_auc"] = trained.cv_micro_auc;
    report["model_out"] = cfg.model_out;
    const std::string text = report.dump(2) + "\n";
    if (cfg.report_out.empty())
      out << text;
    else
      write_file(cfg.report_out, text);
    return 0;
  } catch (const std::exception& e) {
    err << "train-classifier: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace spectraldip

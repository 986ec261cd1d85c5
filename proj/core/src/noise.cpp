#include "spectraldip/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace spectraldip {

void NoiseSpec::validate() const {
  if (sigma < 0.0) throw std::invalid_argument("noise: sigma must be >= 0");
  if (kind == Kind::Poisson && !(zeta > 0.0))
    throw std::invalid_argument("noise: zeta must be > 0");
}

std::string NoiseSpec::name() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Gaussian: return "gaussian:" + std::to_string(sigma);
    case Kind::Poisson: return "poisson:" + std::to_string(zeta);
  }
  return "?";
}

NoiseSpec NoiseSpec::parse(const std::string& text, std::uint64_t seed) {
  NoiseSpec s;
  s.seed = seed;
  if (text == "none" || text.empty()) {
    s.kind = Kind::None;
    return s;
  }
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "gaussian") {
      s.kind = Kind::Gaussian;
      s.sigma = std::stod(arg);
    } else if (head == "poisson") {
      s.kind = Kind::Poisson;
      s.zeta = std::stod(arg);
    } else {
      throw std::invalid_argument("");
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("noise: cannot parse '" + text +
                                "' (expected gaussian:<sigma>|poisson:<zeta>|none)");
  }
  s.validate();
  return s;
}

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed,
                         double peak) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma < 0");
  Image out = image;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (double& v : out.data) v = std::clamp(v + dist(rng), 0.0, peak);
  return out;
}

Image add_poisson_noise(const Image& image, double zeta, std::uint64_t seed) {
  if (!(zeta > 0.0)) throw std::invalid_argument("add_poisson_noise: zeta <= 0");
  Image out = image;
  std::mt19937_64 rng(seed);
  for (double& v : out.data) {
    if (v < 0.0)
      throw std::invalid_argument("add_poisson_noise: negative pixel value");
    if (v == 0.0) continue;  // Poisson(0) is identically 0
    std::poisson_distribution<long> dist(v / zeta);
    v = zeta * static_cast<double>(dist(rng));
  }
  return out;
}

Image apply_noise(const Image& image, const NoiseSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case NoiseSpec::Kind::None: return image;
    case NoiseSpec::Kind::Gaussian:
      return add_gaussian_noise(image, spec.sigma / 255.0, spec.seed, 1.0);
    case NoiseSpec::Kind::Poisson:
      return add_poisson_noise(image, spec.zeta, spec.seed);
  }
  return image;
}

}  // namespace spectraldip

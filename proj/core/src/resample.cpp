#include "spectraldip/resample.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "spectraldip/dft.hpp"

namespace spectraldip {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxTaps = 2049;

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0)
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

int kaiser_length(double atten_db, double transition_width) {
  const double n = (atten_db - 8.0) / (2.285 * transition_width);
  int len = static_cast<int>(std::ceil(n)) + 1;
  if (len % 2 == 0) ++len;
  return std::max(len, 3);
}

double bessel_i0(double x) {
  // Power series; converges quickly for the beta range used here.
  double sum = 1.0, term = 1.0;
  const double x2 = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= x2 / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// Windowed sinc with cutoff wc, unit DC gain (approximately).
std::vector<double> kaiser_sinc(int len, double wc, double beta) {
  const int m = (len - 1) / 2;
  const double i0b = bessel_i0(beta);
  std::vector<double> h(static_cast<std::size_t>(len));
  for (int n = 0; n < len; ++n) {
    const int j = n - m;
    const double ideal = j == 0 ? wc / kPi : std::sin(wc * j) / (kPi * j);
    const double r = static_cast<double>(j) / static_cast<double>(m);
    const double win = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[static_cast<std::size_t>(n)] = ideal * win;
  }
  return h;
}

// Scales each polyphase branch (tap index mod factor) to sum exactly 1,
// which makes constants map to constants at interior samples.
void normalize_phases(std::vector<double>& kernel, int factor) {
  for (int b = 0; b < factor; ++b) {
    double s = 0.0;
    for (std::size_t j = static_cast<std::size_t>(b); j < kernel.size(); j += static_cast<std::size_t>(factor))
      s += kernel[j];
    if (std::abs(s) < 1e-9)
      throw DesignError("lpf design: degenerate polyphase branch", 0.0);
    for (std::size_t j = static_cast<std::size_t>(b); j < kernel.size(); j += static_cast<std::size_t>(factor))
      kernel[j] /= s;
  }
}

std::complex<double> eval_response(std::span<const double> kernel, double gain,
                                   double omega) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < kernel.size(); ++n) {
    const double ang = -omega * static_cast<double>(n);
    acc += kernel[n] * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return gain * acc;
}

std::vector<double> convolve_full(std::span<const double> a,
                                  std::span<const double> b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

UpsamplerSpec UpsamplerSpec::none() {
  UpsamplerSpec s;
  s.kind = Kind::None;
  s.kernel.clear();
  return s;
}

UpsamplerSpec UpsamplerSpec::nearest(int factor) {
  UpsamplerSpec s;
  s.kind = Kind::NearestNeighbor;
  s.factor = factor;
  s.kernel.assign(static_cast<std::size_t>(factor), 1.0);
  s.gain = 1.0;
  return s;
}

UpsamplerSpec UpsamplerSpec::bilinear(int factor) {
  UpsamplerSpec s;
  s.kind = Kind::Bilinear;
  s.factor = factor;
  s.kernel.assign(static_cast<std::size_t>(2 * factor - 1), 0.0);
  for (int j = 0; j < 2 * factor - 1; ++j)
    s.kernel[static_cast<std::size_t>(j)] =
        1.0 - std::abs(j - (factor - 1)) / static_cast<double>(factor);
  s.gain = 1.0;
  return s;
}

UpsamplerSpec UpsamplerSpec::kaiser(double stopband_db, int factor) {
  UpsamplerSpec s;
  s.kind = Kind::CustomLPF;
  s.factor = factor;
  s.stopband_db = stopband_db;
  LpfBandSpec band;
  band.passband_edge *= 2.0 / factor;
  band.transition_width *= 2.0 / factor;
  LpfDesign d = design_lpf_kaiser(stopband_db, band);
  s.kernel = std::move(d.kernel);
  s.gain = d.gain;
  return s;
}

UpsamplerSpec UpsamplerSpec::transposed(int factor) {
  UpsamplerSpec s = bilinear(factor);
  s.kind = Kind::TransposedConv;
  return s;
}

std::string UpsamplerSpec::name() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::NearestNeighbor: return "nn";
    case Kind::Bilinear: return "bilinear";
    case Kind::TransposedConv: return "transposed";
    case Kind::CustomLPF: {
      std::ostringstream os;
      os << "kaiser";
      const double db = stopband_db.value_or(0.0);
      if (db == std::floor(db)) os << static_cast<long>(db);
      else os << db;
      return os.str();
    }
  }
  return "?";
}

UpsamplerSpec UpsamplerSpec::parse(const std::string& text) {
  if (text == "none") return none();
  if (text == "nn" || text == "nearest") return nearest();
  if (text == "bilinear") return bilinear();
  if (text == "transposed") return transposed();
  std::string t = text;
  if (t.rfind("kaiser", 0) == 0) {
    std::string arg = t.substr(6);
    if (!arg.empty() && arg[0] == ':') arg = arg.substr(1);
    try {
      return kaiser(std::stod(arg));
    } catch (const std::invalid_argument&) {
    }
  }
  throw std::invalid_argument("unknown upsampler '" + text + "'");
}

LpfDesign design_lpf_nn() { return {{1.0, 1.0}, 1.0}; }

LpfDesign design_lpf_bilinear() { return {{0.5, 1.0, 0.5}, 1.0}; }

LpfDesign design_lpf_kaiser(double stopband_db, LpfBandSpec band) {
  if (stopband_db < 10.0 || stopband_db > 120.0)
    throw std::invalid_argument("design_lpf: stopband_db must be in [10, 120]");
  if (!(band.passband_edge > 0.0) ||
      !(band.passband_edge + band.transition_width <= kPi) ||
      !(band.transition_width > 0.0))
    throw std::invalid_argument("design_lpf: bad band edges");

  const int factor = 2;
  const double wc = band.passband_edge + band.transition_width / 2.0;
  const double ws = band.passband_edge + band.transition_width;

  if (stopband_db >= 21.0) {
    // Plain Kaiser windowed sinc; extra design margin absorbs the
    // perturbation from polyphase normalization.
    double best_achieved = 0.0;
    for (double margin = 6.0; margin <= 30.0; margin += 6.0) {
      const double target = stopband_db + margin;
      const int len = kaiser_length(target, band.transition_width);
      if (len > kMaxTaps) break;
      std::vector<double> h = kaiser_sinc(len, wc, kaiser_beta(target));
      for (double& v : h) v *= factor;
      normalize_phases(h, factor);
      const double peak = band_peak_db(h, 1.0, ws, kPi);
      best_achieved = std::max(best_achieved, -peak);
      if (-peak >= stopband_db) return {std::move(h), 1.0};
    }
    std::ostringstream os;
    os << "design_lpf: cannot reach " << stopband_db
       << " dB within " << kMaxTaps << " taps; minimum achievable attenuation "
       << best_achieved << " dB";
    throw DesignError(os.str(), best_achieved);
  }

  // Below 21 dB: blend the NN kernel with a deep Kaiser correction. The
  // composite response equals NN's in the passband (within the correction's
  // ripple) and its stopband peak is dialed to the target by the blend
  // weight.
  const double deep_db = 70.0;
  const int len = kaiser_length(deep_db, band.transition_width);
  std::vector<double> deep = kaiser_sinc(len, wc, kaiser_beta(deep_db));
  {
    double s = 0.0;
    for (double v : deep) s += v;
    for (double& v : deep) v /= s;
  }
  const int center = (len - 1) / 2;

  const auto composite = [&](double t) {
    std::vector<double> c = deep;
    for (double& v : c) v *= t;
    c[static_cast<std::size_t>(center)] += 1.0 - t;
    std::vector<double> nn = {1.0, 1.0};
    std::vector<double> k = convolve_full(nn, c);
    normalize_phases(k, factor);
    return k;
  };

  double lo = 0.0, hi = 1.0;
  std::vector<double> kernel;
  for (int it = 0; it < 80; ++it) {
    const double t = 0.5 * (lo + hi);
    kernel = composite(t);
    const double peak = band_peak_db(kernel, 1.0, ws, kPi);
    if (-peak < stopband_db) lo = t;
    else hi = t;
  }
  kernel = composite(hi);
  const double peak = band_peak_db(kernel, 1.0, ws, kPi);
  if (-peak < stopband_db - 0.5) {
    std::ostringstream os;
    os << "design_lpf: blend cannot reach " << stopband_db
       << " dB; minimum achievable attenuation " << -peak << " dB";
    throw DesignError(os.str(), -peak);
  }
  return {std::move(kernel), 1.0};
}

LpfDesign design_lpf(const UpsamplerSpec& spec) {
  switch (spec.kind) {
    case UpsamplerSpec::Kind::NearestNeighbor: return design_lpf_nn();
    case UpsamplerSpec::Kind::Bilinear:
    case UpsamplerSpec::Kind::TransposedConv: return design_lpf_bilinear();
    case UpsamplerSpec::Kind::CustomLPF:
      if (!spec.kernel.empty()) return {spec.kernel, spec.gain};
      return design_lpf_kaiser(spec.stopband_db.value_or(60.0));
    case UpsamplerSpec::Kind::None:
      throw std::invalid_argument("design_lpf: kind is None");
  }
  throw std::invalid_argument("design_lpf: bad kind");
}

FrequencyResponse freq_response(std::span<const double> kernel, double gain,
                                int n_points) {
  if (n_points < 64)
    throw std::invalid_argument("freq_response: n_points must be >= 64");
  bool all_zero = true;
  for (double v : kernel)
    if (v != 0.0) all_zero = false;
  if (kernel.empty() || all_zero)
    throw std::invalid_argument("freq_response: all-zero kernel");

  const double dc = std::abs(eval_response(kernel, gain, 0.0));
  if (dc == 0.0)
    throw std::invalid_argument("freq_response: zero DC gain");

  FrequencyResponse r;
  r.omega.resize(static_cast<std::size_t>(n_points));
  r.magnitude_db.resize(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double w = kPi * static_cast<double>(i) / static_cast<double>(n_points - 1);
    const double mag = std::abs(eval_response(kernel, gain, w));
    r.omega[static_cast<std::size_t>(i)] = w;
    r.magnitude_db[static_cast<std::size_t>(i)] =
        mag <= dc * 1e-20 ? -400.0 : 20.0 * std::log10(mag / dc);
  }
  return r;
}

double band_peak_db(std::span<const double> kernel, double gain,
                    double omega_lo, double omega_hi, int n_points) {
  const double dc = std::abs(eval_response(kernel, gain, 0.0));
  double peak = -400.0;
  for (int i = 0; i < n_points; ++i) {
    const double w = omega_lo + (omega_hi - omega_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_points - 1);
    const double mag = std::abs(eval_response(kernel, gain, w));
    if (mag > 0.0) peak = std::max(peak, 20.0 * std::log10(mag / dc));
  }
  return peak;
}

std::vector<double> zero_insert(std::span<const double> x, int factor) {
  if (factor < 2) throw std::invalid_argument("zero_insert: factor must be >= 2");
  std::vector<double> out(x.size() * static_cast<std::size_t>(factor), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n)
    out[n * static_cast<std::size_t>(factor)] = x[n];
  return out;
}

std::vector<double> upsample_1d(std::span<const double> x,
                                const UpsamplerSpec& spec) {
  if (spec.kind == UpsamplerSpec::Kind::None)
    throw std::invalid_argument("upsample_1d: kind is None");
  const std::vector<double> u = zero_insert(x, spec.factor);
  const int klen = static_cast<int>(spec.kernel.size());
  const int c = (klen - 1) / 2;
  std::vector<double> out(u.size(), 0.0);
  const auto m = static_cast<std::ptrdiff_t>(u.size());
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int j = 0; j < klen; ++j) {
      const std::ptrdiff_t q = i + c - j;
      if (q < 0 || q >= m) continue;
      acc += spec.kernel[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(q)];
    }
    out[static_cast<std::size_t>(i)] = spec.gain * acc;
  }
  return out;
}

double verify_spectrum_replication(std::span<const double> x) {
  if (x.size() < 2)
    throw std::invalid_argument("verify_spectrum_replication: need N >= 2");
  const std::size_t n = x.size();
  const std::vector<double> up = zero_insert(x, 2);
  const auto xf = dft(x);
  const auto uf = dft(std::span<const double>(up));
  double residual = 0.0;
  for (std::size_t k = 0; k < 2 * n; ++k)
    residual = std::max(residual, std::abs(uf[k] - xf[k % n]));
  return residual;
}

}  // namespace spectraldip

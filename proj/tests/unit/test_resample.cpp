#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spectraldip/dft.hpp"
#include "spectraldip/resample.hpp"
#include "spectraldip/tensor.hpp"

using namespace spectraldip;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = uni(rng);
  return x;
}
}  // namespace

TEST_CASE("zero_insert basic") {
  const std::vector<double> x = {1, 2, 3, 4};
  CHECK(zero_insert(x, 2) == std::vector<double>{1, 0, 2, 0, 3, 0, 4, 0});
  const std::vector<double> zeros(5, 0.0);
  const auto z = zero_insert(zeros, 2);
  CHECK(z.size() == 10);
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("zero_insert replicates the spectrum (DFT oracle)") {
  const auto x = random_signal(16, 5);
  const auto up = zero_insert(x, 2);
  const auto xf = dft_direct(x);
  const auto uf = dft_direct(up);
  for (std::size_t k = 0; k < 32; ++k)
    CHECK(std::abs(uf[k] - xf[k % 16]) < 1e-10);
}

TEST_CASE("verify_spectrum_replication across N in 2..128") {
  std::mt19937_64 rng(9);
  for (int n = 2; n <= 128; ++n) {
    const auto x = random_signal(static_cast<std::size_t>(n), rng());
    const auto xf = dft(std::span<const double>(x));
    double xmax = 0.0;
    for (const auto& c : xf) xmax = std::max(xmax, std::abs(c));
    CHECK(verify_spectrum_replication(x) < 1e-9 * std::max(xmax, 1.0));
  }
}

TEST_CASE("replication of a constant and of a pure tone") {
  // constant [c,c]: equal mass at bins 0 and N
  const std::vector<double> c2 = {3.0, 3.0};
  const auto uf = dft_direct(zero_insert(c2, 2));
  CHECK(std::abs(uf[0]) == doctest::Approx(6.0));
  CHECK(std::abs(uf[2]) == doctest::Approx(6.0));
  CHECK(std::abs(uf[1]) < 1e-12);
  CHECK(std::abs(uf[3]) < 1e-12);

  // pure tone at bin k: nonzero bins exactly {k, k+N}
  const int n = 16, k = 3;
  std::vector<double> tone(n);
  for (int i = 0; i < n; ++i) tone[static_cast<std::size_t>(i)] = std::cos(2.0 * kPi * k * i / n);
  const auto tf = dft_direct(zero_insert(tone, 2));
  for (int b = 0; b < 2 * n; ++b) {
    const double mag = std::abs(tf[static_cast<std::size_t>(b)]);
    // real cosine: energy at +/-k in both replicas
    const bool expected = b == k || b == n - k || b == n + k || b == 2 * n - k;
    if (expected)
      CHECK(mag > 1.0);
    else
      CHECK(mag < 1e-9);
  }
}

TEST_CASE("design_lpf fixed kinds") {
  const LpfDesign nn = design_lpf_nn();
  CHECK(nn.kernel == std::vector<double>{1.0, 1.0});
  CHECK(nn.gain == 1.0);
  const LpfDesign bl = design_lpf_bilinear();
  CHECK(bl.kernel == std::vector<double>{0.5, 1.0, 0.5});
  CHECK(bl.gain == 1.0);
}

TEST_CASE("freq_response closed forms") {
  const LpfDesign nn = design_lpf_nn();
  const FrequencyResponse r = freq_response(nn.kernel, nn.gain, 1025);
  // |H(pi/2)| = sqrt(2), -3.01 dB below DC gain 2
  CHECK(r.omega[512] == doctest::Approx(kPi / 2));
  CHECK(r.magnitude_db[512] == doctest::Approx(-3.0103).epsilon(1e-3));

  const LpfDesign bl = design_lpf_bilinear();
  const FrequencyResponse rb = freq_response(bl.kernel, bl.gain, 1025);
  CHECK(rb.magnitude_db.back() == doctest::Approx(-400.0));  // null at Nyquist

  const std::vector<double> delta = {1.0};
  const FrequencyResponse rd = freq_response(delta, 1.0, 64);
  for (double db : rd.magnitude_db) CHECK(db == doctest::Approx(0.0));

  CHECK_THROWS_AS(freq_response(std::vector<double>{0.0, 0.0}, 1.0, 64),
                  std::invalid_argument);
  CHECK_THROWS_AS(freq_response(nn.kernel, nn.gain, 32), std::invalid_argument);
}

TEST_CASE("kaiser design meets its stopband target") {
  const LpfDesign d60 = design_lpf_kaiser(60.0);
  const double peak60 = band_peak_db(d60.kernel, d60.gain, 0.6 * kPi, kPi);
  CHECK(peak60 <= -59.0);

  const LpfDesign d100 = design_lpf_kaiser(100.0);
  const double peak100 = band_peak_db(d100.kernel, d100.gain, 0.6 * kPi, kPi);
  CHECK(peak100 <= -99.0);
}

TEST_CASE("kaiser 14/15 match the NN passband within 0.03 dB") {
  const LpfDesign nn = design_lpf_nn();
  for (double db : {14.0, 15.0}) {
    const LpfDesign d = design_lpf_kaiser(db);
    const FrequencyResponse rn = freq_response(nn.kernel, nn.gain, 2049);
    const FrequencyResponse rd = freq_response(d.kernel, d.gain, 2049);
    double worst = 0.0;
    for (std::size_t i = 0; i < rn.omega.size(); ++i) {
      if (rn.omega[i] > 0.4 * kPi) break;
      worst = std::max(worst, std::abs(rn.magnitude_db[i] - rd.magnitude_db[i]));
    }
    CHECK(worst <= 0.03);
    const double peak = band_peak_db(d.kernel, d.gain, 0.6 * kPi, kPi);
    CHECK(peak <= -(db - 1.0));
    CHECK(peak >= -(db + 1.0));  // dialed to the target, not far past it
  }
}

TEST_CASE("stopband attenuation is monotone in the design target") {
  const auto peak = [](const LpfDesign& d) {
    return band_peak_db(d.kernel, d.gain, 0.6 * kPi, kPi);
  };
  const double p14 = peak(design_lpf_kaiser(14.0));
  const double p15 = peak(design_lpf_kaiser(15.0));
  const double p60 = peak(design_lpf_kaiser(60.0));
  const double p100 = peak(design_lpf_kaiser(100.0));
  const LpfDesign bl = design_lpf_bilinear();
  const FrequencyResponse rb = freq_response(bl.kernel, bl.gain, 4097);
  const double bl_at_3pi4 = rb.magnitude_db[3 * 4096 / 4];

  CHECK(p100 < p60);
  CHECK(p60 < bl_at_3pi4);
  CHECK(p15 < p14);
}

TEST_CASE("infeasible design reports the achievable attenuation") {
  LpfBandSpec band;
  band.transition_width = 0.002 * kPi;  // would need far more taps than the cap
  try {
    design_lpf_kaiser(110.0, band);
    FAIL("expected DesignError");
  } catch (const DesignError& e) {
    CHECK(e.achieved_db < 110.0);
    CHECK(std::string(e.what()).find("minimum achievable") != std::string::npos);
  }
  CHECK_THROWS_AS(design_lpf_kaiser(5.0), std::invalid_argument);
  CHECK_THROWS_AS(design_lpf_kaiser(130.0), std::invalid_argument);
}

TEST_CASE("upsample_1d: NN doubling and DC preservation") {
  const std::vector<double> x = {1.0, 2.0};
  CHECK(upsample_1d(x, UpsamplerSpec::nearest()) ==
        std::vector<double>{1.0, 1.0, 2.0, 2.0});

  // constant stays constant at interior samples for every fixed kernel
  const std::vector<double> c(32, 0.7);
  for (const auto& spec :
       {UpsamplerSpec::nearest(), UpsamplerSpec::bilinear(),
        UpsamplerSpec::kaiser(14), UpsamplerSpec::kaiser(15),
        UpsamplerSpec::kaiser(60), UpsamplerSpec::kaiser(100)}) {
    const auto y = upsample_1d(c, spec);
    const int margin = static_cast<int>(spec.kernel.size());
    for (int i = margin; i < static_cast<int>(y.size()) - margin; ++i)
      CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(0.7).epsilon(1e-9));
  }
}

TEST_CASE("taped 2D upsample agrees with the 1D path") {
  const UpsamplerSpec spec = UpsamplerSpec::bilinear();
  const auto x = random_signal(8, 77);
  Tensor t = Tensor::from_data({1, 1, 8}, x);
  Tensor k = Tensor::from_data({static_cast<int>(spec.kernel.size())}, spec.kernel);
  Tensor y = upsample_axis(t, k, 2, spec.gain, 2);
  const auto y1 = upsample_1d(x, spec);
  REQUIRE(static_cast<std::size_t>(y.size()) == y1.size());
  for (std::size_t i = 0; i < y1.size(); ++i)
    CHECK(y.data()[i] == doctest::Approx(y1[i]).epsilon(1e-15));
}

TEST_CASE("upsample gradient vs finite differences on 1x3x3") {
  Tensor x = oracle::random_tensor({1, 3, 3}, 88, true);
  const UpsamplerSpec spec = UpsamplerSpec::bilinear();
  Tensor k = Tensor::from_data({3}, spec.kernel);
  auto forward = [&]() {
    Tensor y = upsample_axis(x, k, 2, spec.gain, 2);
    return upsample_axis(y, k, 2, spec.gain, 1);
  };
  auto loss = [&]() { return sum(forward()); };
  CHECK(oracle::fd_check(x, loss) < 1e-6);
}

TEST_CASE("adjoint identity <Ax, y> == <x, A^T y>") {
  std::mt19937_64 rng(123);
  for (const auto& spec : {UpsamplerSpec::nearest(), UpsamplerSpec::bilinear(),
                           UpsamplerSpec::kaiser(60)}) {
    Tensor x = oracle::random_tensor({2, 5, 4}, rng(), true);
    Tensor k = Tensor::from_data({static_cast<int>(spec.kernel.size())}, spec.kernel);
    Tensor ax = upsample_axis(upsample_axis(x, k, 2, spec.gain, 2), k, 2,
                              spec.gain, 1);
    Tensor y = oracle::random_tensor(ax.shape(), rng());

    double lhs = 0.0;
    for (std::size_t i = 0; i < ax.data().size(); ++i)
      lhs += ax.data()[i] * y.data()[i];

    // backward of sum(Ax * y) computes A^T y into x.grad
    backward(sum(mul(ax, y)));
    double rhs = 0.0;
    for (std::size_t i = 0; i < x.data().size(); ++i)
      rhs += x.data()[i] * x.grad()[i];
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("upsampler spec parse/name round trip") {
  CHECK(UpsamplerSpec::parse("nn").kind == UpsamplerSpec::Kind::NearestNeighbor);
  CHECK(UpsamplerSpec::parse("kaiser:60").stopband_db == 60.0);
  CHECK(UpsamplerSpec::parse("kaiser60").name() == "kaiser60");
  CHECK_THROWS_AS(UpsamplerSpec::parse("box"), std::invalid_argument);
}

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "rmvpe/common.hpp"
#include "rmvpe/degradation.hpp"

using namespace rmvpe;

namespace {

double rms(const Waveform& w) {
  double acc = 0.0;
  for (double v : w.samples) acc += v * v;
  return std::sqrt(acc / static_cast<double>(w.samples.size()));
}

Waveform tone(double seconds, double hz, double amp = 0.3, int sr = 16000) {
  Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<std::size_t>(seconds * sr);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.samples[i] = amp * std::sin(2.0 * M_PI * hz * static_cast<double>(i) / sr);
  return w;
}

}  // namespace

TEST_CASE("noise kinds parse by name and reject the unknown") {
  CHECK(parse_noise_kind("white") == NoiseKind::kWhite);
  CHECK(parse_noise_kind("pink") == NoiseKind::kPink);
  CHECK(parse_noise_kind("brown") == NoiseKind::kBrown);
  CHECK(parse_noise_kind("babble") == NoiseKind::kBabble);
  CHECK(noise_kind_name(NoiseKind::kPink) == "pink");
  CHECK_THROWS_AS(parse_noise_kind("mauve"), ConfigError);
}

TEST_CASE("generated noise is unit RMS and deterministic per seed") {
  for (auto kind : {NoiseKind::kWhite, NoiseKind::kPink, NoiseKind::kBrown,
                    NoiseKind::kBabble}) {
    const Waveform a = gen_noise(kind, 16000, 16000, 42);
    CHECK(rms(a) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(a.sample_rate == 16000);
    CHECK(a.samples.size() == 16000);

    const Waveform b = gen_noise(kind, 16000, 16000, 42);
    CHECK(std::memcmp(a.samples.data(), b.samples.data(),
                      a.samples.size() * sizeof(double)) == 0);
    const Waveform c = gen_noise(kind, 16000, 16000, 43);
    bool differs = false;
    for (std::size_t i = 0; i < c.samples.size() && !differs; ++i)
      differs = c.samples[i] != a.samples[i];
    CHECK(differs);
  }
}

TEST_CASE("noise colors carry their nominal spectral slopes") {
  // 10 s at 16 kHz; slope fitted over 100..4000 Hz
  const double sw =
      spectral_slope_db_per_octave(gen_noise(NoiseKind::kWhite, 160000, 16000, 7), 100, 4000);
  const double sp =
      spectral_slope_db_per_octave(gen_noise(NoiseKind::kPink, 160000, 16000, 7), 100, 4000);
  const double sb =
      spectral_slope_db_per_octave(gen_noise(NoiseKind::kBrown, 160000, 16000, 7), 100, 4000);
  CHECK(std::abs(sw - 0.0) < 0.5);
  CHECK(std::abs(sp - -3.0) < 0.5);
  CHECK(std::abs(sb - -6.0) < 0.5);
}

TEST_CASE("mixing hits the requested SNR") {
  const Waveform sig = tone(2.0, 440.0);
  const Waveform noise = gen_noise(NoiseKind::kWhite, 32000, 16000, 11);
  for (double snr : {-10.0, 0.0, 10.0, 20.0, 40.0}) {
    const Waveform mixed = mix_at_snr(sig, noise, snr);
    REQUIRE(mixed.samples.size() == sig.samples.size());
    // recover the injected noise and measure the achieved ratio
    Waveform injected;
    injected.sample_rate = 16000;
    injected.samples.resize(sig.samples.size());
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
      injected.samples[i] = mixed.samples[i] - sig.samples[i];
    const double achieved = 20.0 * std::log10(rms(sig) / rms(injected));
    CHECK(std::abs(achieved - snr) < 0.01);
  }
}

TEST_CASE("a 0 dB mix doubles the signal power") {
  const Waveform sig = tone(2.0, 330.0);
  const Waveform noise = gen_noise(NoiseKind::kWhite, 32000, 16000, 12);
  const Waveform mixed = mix_at_snr(sig, noise, 0.0);
  // equal powers add incoherently: RMS grows by ~sqrt(2)
  CHECK(rms(mixed) == doctest::Approx(rms(sig) * std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("short noise loops to cover the signal") {
  const Waveform sig = tone(2.0, 440.0);
  Waveform noise = gen_noise(NoiseKind::kWhite, 7000, 16000, 13);  // < signal
  const Waveform mixed = mix_at_snr(sig, noise, 10.0);
  REQUIRE(mixed.samples.size() == sig.samples.size());
  // the injected noise repeats with period 7000
  const double n0 = mixed.samples[100] - sig.samples[100];
  const double n1 = mixed.samples[7100] - sig.samples[7100];
  CHECK(n0 == doctest::Approx(n1).epsilon(1e-9));
}

TEST_CASE("mixing rejects silence and rate mismatches") {
  Waveform silent;
  silent.sample_rate = 16000;
  silent.samples.assign(16000, 0.0);
  const Waveform noise = gen_noise(NoiseKind::kWhite, 16000, 16000, 14);
  CHECK_THROWS_AS(mix_at_snr(silent, noise, 10.0), DomainError);

  Waveform wrong_rate = gen_noise(NoiseKind::kWhite, 16000, 22050, 15);
  CHECK_THROWS_AS(mix_at_snr(tone(1.0, 440.0), wrong_rate, 10.0), DomainError);
}

TEST_CASE("noise has no DC component") {
  for (auto kind : {NoiseKind::kPink, NoiseKind::kBrown}) {
    const Waveform n = gen_noise(kind, 65536, 16000, 16);
    double mean = 0.0;
    for (double v : n.samples) mean += v;
    mean /= static_cast<double>(n.samples.size());
    CHECK(std::abs(mean) < 1e-3);
  }
}

TEST_CASE("slope estimation needs a sensible band") {
  const Waveform n = gen_noise(NoiseKind::kWhite, 4096, 16000, 17);
  CHECK_THROWS_AS(spectral_slope_db_per_octave(n, 4000, 100), DomainError);
  CHECK_THROWS_AS(spectral_slope_db_per_octave(n, 7990, 8000), DomainError);
}

#include <cmath>

#include "rmvpe/audio_io.hpp"
#include "rmvpe/common.hpp"

namespace rmvpe {

namespace {

constexpr int kZeroCrossings = 32;
constexpr double kKaiserBeta = 10.0;

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

double kaiser(double t) {  // |t| <= 1
  const double arg = 1.0 - t * t;
  if (arg <= 0.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(arg)) /
         std::cyl_bessel_i(0.0, kKaiserBeta);
}

}  // namespace

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw DomainError("resample: target_rate must be > 0");
  if (w.sample_rate <= 0) throw DomainError("resample: source rate must be > 0");
  if (w.samples.empty()) throw DomainError("resample: empty waveform");
  if (target_rate == w.sample_rate) return w;

  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const auto n_in = static_cast<std::int64_t>(w.samples.size());
  const auto n_out = static_cast<std::int64_t>(
      std::llround(static_cast<double>(n_in) * ratio));

  // When decimating, the sinc cutoff drops to the output Nyquist and the
  // kernel stretches so it still spans kZeroCrossings lobes.
  const double cutoff = ratio < 1.0 ? ratio : 1.0;
  const double half_width = kZeroCrossings / cutoff;

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));

  const double* x = w.samples.data();
  for (std::int64_t k = 0; k < n_out; ++k) {
    const double pos = static_cast<double>(k) / ratio;
    const auto j_lo = static_cast<std::int64_t>(std::ceil(pos - half_width));
    const auto j_hi = static_cast<std::int64_t>(std::floor(pos + half_width));
    double acc = 0.0, wsum = 0.0;
    for (std::int64_t j = j_lo; j <= j_hi; ++j) {
      const double t = pos - static_cast<double>(j);
      const double h = cutoff * sinc(cutoff * t) * kaiser(t / half_width);
      wsum += h;
      if (j >= 0 && j < n_in) acc += h * x[j];
    }
    out.samples[static_cast<std::size_t>(k)] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

}  // namespace rmvpe

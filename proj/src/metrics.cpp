#include "rmvpe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rmvpe/common.hpp"
#include "rmvpe/pitch_codec.hpp"

namespace rmvpe {
namespace {

// fold a cent difference into (-600, 600]
double fold_octave(double d) {
  double f = std::fmod(d, 1200.0);
  if (f <= -600.0)
    f += 1200.0;
  else if (f > 600.0)
    f -= 1200.0;
  return f;
}

}  // namespace

EvalResult from_counts(const EvalCounts& c) {
  EvalResult r;
  r.counts = c;
  const std::int64_t total = c.ref_voiced + c.ref_unvoiced;
  r.rpa = c.ref_voiced > 0 ? static_cast<double>(c.matched_rpa) / static_cast<double>(c.ref_voiced) : 0.0;
  r.rca = c.ref_voiced > 0 ? static_cast<double>(c.matched_rca) / static_cast<double>(c.ref_voiced) : 0.0;
  r.oa = total > 0 ? static_cast<double>(c.matched_oa) / static_cast<double>(total) : 0.0;
  return r;
}

EvalResult evaluate(const PitchTrack& ref, const PitchTrack& est) {
  if (std::abs(ref.hop_seconds - est.hop_seconds) > 1e-9)
    throw DomainError("evaluate: hop mismatch (" + std::to_string(ref.hop_seconds) +
                      " vs " + std::to_string(est.hop_seconds) + ")");
  const std::int64_t n = std::min(ref.size(), est.size());
  EvalCounts c;
  for (std::int64_t i = 0; i < n; ++i) {
    const double rf = ref.frames[static_cast<std::size_t>(i)];
    const double ef = est.frames[static_cast<std::size_t>(i)];
    if (rf > 0.0) {
      ++c.ref_voiced;
      if (ef > 0.0) {
        const double d = hz_to_cents(ef) - hz_to_cents(rf);
        const bool hit = std::abs(d) <= 50.0;
        if (hit) {
          ++c.matched_rpa;
          ++c.matched_oa;
        }
        if (std::abs(fold_octave(d)) <= 50.0) ++c.matched_rca;
      }
    } else {
      ++c.ref_unvoiced;
      if (!(ef > 0.0)) ++c.matched_oa;
    }
  }
  return from_counts(c);
}

std::string summarize(const std::vector<double>& fractions) {
  if (fractions.empty()) throw DomainError("summarize: no results");
  double mean = 0.0;
  for (double v : fractions) mean += v;
  mean /= static_cast<double>(fractions.size());
  double var = 0.0;
  for (double v : fractions) var += (v - mean) * (v - mean);
  var /= static_cast<double>(fractions.size());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100.0 * mean, 100.0 * std::sqrt(var));
  return buf;
}

}  // namespace rmvpe

#ifndef RMVPE_METRICS_HPP
#define RMVPE_METRICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rmvpe/audio_io.hpp"

namespace rmvpe {

struct EvalCounts {
  std::int64_t ref_voiced = 0;
  std::int64_t ref_unvoiced = 0;
  std::int64_t matched_rpa = 0;  // ref-voiced frames within 50 cents
  std::int64_t matched_rca = 0;  // same, after folding to one octave
  std::int64_t matched_oa = 0;   // voiced matches + correctly unvoiced frames
};

struct EvalResult {
  double rpa = 0, rca = 0, oa = 0;
  EvalCounts counts;
};

// Frame-paired pitch accuracy. Tracks must share the hop; unequal lengths
// are truncated to the shorter. A reference-voiced frame scores for RPA when
// the estimate is voiced and within 50 cents (closed interval); RCA folds
// the difference into (-600, 600]; OA additionally credits unvoiced frames
// the estimate leaves unvoiced. An unvoiced estimate on a voiced frame is a
// miss (0 Hz carries no pitch). Tracks with no voiced reference frames score
// rpa = rca = 0.
EvalResult evaluate(const PitchTrack& ref, const PitchTrack& est);

EvalResult from_counts(const EvalCounts& c);

// Unweighted per-song mean and population standard deviation of a fraction,
// rendered as percentages: "95.00±5.00".
std::string summarize(const std::vector<double>& fractions);

}  // namespace rmvpe

#endif  // RMVPE_METRICS_HPP

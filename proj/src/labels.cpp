#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmvpe/audio_io.hpp"
#include "rmvpe/common.hpp"

namespace rmvpe {

PitchTrack load_pitch_labels(const std::string& path, double hop_seconds) {
  if (hop_seconds <= 0.0) throw DomainError("load_pitch_labels: hop must be > 0");
  std::ifstream f(path);
  if (!f) throw IoError(path + ": cannot open");

  std::vector<double> times, freqs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    std::istringstream is(line.substr(start));
    double t = 0.0, hz = 0.0;
    if (!(is >> t >> hz))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 'time_sec frequency_hz'");
    if (!std::isfinite(t) || !std::isfinite(hz))
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-finite value");
    if (hz < 0.0)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": negative frequency");
    if (!times.empty() && t <= times.back())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": times must be strictly increasing");
    times.push_back(t);
    freqs.push_back(hz);
  }

  PitchTrack track;
  track.hop_seconds = hop_seconds;
  if (times.empty()) return track;

  const auto n_frames =
      static_cast<std::size_t>(std::floor(times.back() / hop_seconds)) + 1;
  track.frames.resize(n_frames, 0.0);

  // Nearest neighbor over the sorted label times; ties go to the earlier label.
  std::size_t j = 0;
  for (std::size_t k = 0; k < n_frames; ++k) {
    const double t = static_cast<double>(k) * hop_seconds;
    while (j + 1 < times.size() && times[j + 1] <= t) ++j;
    std::size_t pick = j;
    if (j + 1 < times.size()) {
      const double d_lo = t - times[j];
      const double d_hi = times[j + 1] - t;
      if (d_hi < d_lo) pick = j + 1;
    }
    if (t < times.front()) pick = 0;
    track.frames[k] = freqs[pick];
  }
  return track;
}

void save_pitch_labels(const PitchTrack& track, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError(path + ": cannot open for writing");
  char buf[64];
  for (std::size_t k = 0; k < track.frames.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f\n",
                  static_cast<double>(k) * track.hop_seconds, track.frames[k]);
    f << buf;
  }
  if (!f) throw IoError(path + ": write failed");
}

}  // namespace rmvpe

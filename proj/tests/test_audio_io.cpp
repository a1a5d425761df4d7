#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rmvpe/audio_io.hpp"
#include "rmvpe/common.hpp"

using namespace rmvpe;

namespace {

const std::string kTmp = "/tmp/rmvpe_test_audio";

std::string tmp_path(const std::string& name) {
  return kTmp + "_" + name;
}

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>(x >> 8));
}
void put_tag(std::vector<std::uint8_t>& v, const char* t) {
  v.insert(v.end(), t, t + 4);
}

// hand-rolled WAV emitter so the parser is tested against independent bytes
std::vector<std::uint8_t> make_wav(std::uint16_t format, std::uint16_t channels,
                                   std::uint32_t rate, std::uint16_t bits,
                                   const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> v;
  put_tag(v, "RIFF");
  put_u32(v, 36 + static_cast<std::uint32_t>(payload.size()));
  put_tag(v, "WAVE");
  put_tag(v, "fmt ");
  put_u32(v, 16);
  put_u16(v, format);
  put_u16(v, channels);
  put_u32(v, rate);
  put_u32(v, rate * channels * bits / 8);
  put_u16(v, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(v, bits);
  put_tag(v, "data");
  put_u32(v, static_cast<std::uint32_t>(payload.size()));
  v.insert(v.end(), payload.begin(), payload.end());
  return v;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& v) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size()));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  os << text;
}

}  // namespace

TEST_CASE("wav round trip keeps samples within one quantization step") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(1600);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = 0.7 * std::sin(2.0 * M_PI * 440.0 * i / 16000.0);
  const auto path = tmp_path("roundtrip.wav");
  save_wav(w, path);
  const Waveform r = load_wav(path);
  REQUIRE(r.sample_rate == 16000);
  REQUIRE(r.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
}

TEST_CASE("wav save clips out-of-range samples instead of wrapping") {
  Waveform w;
  w.sample_rate = 8000;
  w.samples = {2.0, -2.0, 0.0};
  const auto path = tmp_path("clip.wav");
  save_wav(w, path);
  const Waveform r = load_wav(path);
  CHECK(r.samples[0] == doctest::Approx(32767.0 / 32768.0));
  CHECK(r.samples[1] == doctest::Approx(-1.0));
  CHECK(r.samples[2] == doctest::Approx(0.0));
}

TEST_CASE("wav save rejects non-finite samples") {
  Waveform w;
  w.sample_rate = 8000;
  w.samples = {0.0, std::nan("")};
  CHECK_THROWS_AS(save_wav(w, tmp_path("nan.wav")), DomainError);
}

TEST_CASE("stereo wav reduces per channel mode") {
  // two frames: L = 0.5, R = -0.5 (PCM16 16384 / -16384)
  std::vector<std::uint8_t> payload;
  for (int frame = 0; frame < 2; ++frame) {
    payload.push_back(0x00);
    payload.push_back(0x40);  // 16384
    payload.push_back(0x00);
    payload.push_back(0xc0);  // -16384
  }
  const auto path = tmp_path("stereo.wav");
  write_bytes(path, make_wav(1, 2, 44100, 16, payload));

  const Waveform mixed = load_wav(path, ChannelMode::kMix);
  CHECK(mixed.samples[0] == doctest::Approx(0.0));
  const Waveform left = load_wav(path, ChannelMode::kLeft);
  CHECK(left.samples[0] == doctest::Approx(0.5));
  const Waveform right = load_wav(path, ChannelMode::kRight);
  CHECK(right.samples[0] == doctest::Approx(-0.5));
  CHECK(mixed.sample_rate == 44100);
}

TEST_CASE("float32 wav decodes and clamps") {
  std::vector<std::uint8_t> payload;
  const float vals[3] = {0.25f, -1.5f, 1.0f};
  for (float f : vals) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(payload, bits);
  }
  const auto path = tmp_path("f32.wav");
  write_bytes(path, make_wav(3, 1, 16000, 32, payload));
  const Waveform w = load_wav(path);
  CHECK(w.samples[0] == doctest::Approx(0.25));
  CHECK(w.samples[1] == doctest::Approx(-1.0));  // clamped
  CHECK(w.samples[2] == doctest::Approx(1.0));
}

TEST_CASE("wav loader rejects malformed files") {
  const auto path = tmp_path("bad.wav");

  SUBCASE("not RIFF") {
    write_text(path, "this is not audio at all, just text filler");
    CHECK_THROWS_AS(load_wav(path), FormatError);
  }
  SUBCASE("truncated header") {
    write_bytes(path, {'R', 'I', 'F', 'F', 4, 0, 0, 0, 'W', 'A'});
    CHECK_THROWS_AS(load_wav(path), FormatError);
  }
  SUBCASE("unsupported codec") {
    write_bytes(path, make_wav(7 /* mu-law */, 1, 8000, 8, {0, 0}));
    CHECK_THROWS_AS(load_wav(path), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_wav(tmp_path("nonexistent.wav")), IoError);
  }
}

TEST_CASE("pitch labels parse and align to the frame grid") {
  const auto path = tmp_path("labels.txt");
  write_text(path,
             "# header comment\n"
             "0.00 100.0\n"
             "\n"
             "0.04 200.0\n"
             "0.08 0.0\n");
  const PitchTrack t = load_pitch_labels(path, 0.02);
  REQUIRE(t.size() == 5);  // floor(0.08/0.02)+1
  CHECK(t.frames[0] == doctest::Approx(100.0));
  // 0.02 is equidistant between 0.00 and 0.04: tie goes to the earlier label
  CHECK(t.frames[1] == doctest::Approx(100.0));
  CHECK(t.frames[2] == doctest::Approx(200.0));
  CHECK(t.frames[3] == doctest::Approx(200.0));  // 0.06 nearer to 0.04 than 0.08
  CHECK(t.frames[4] == doctest::Approx(0.0));
}

TEST_CASE("pitch labels reject malformed input with line numbers") {
  const auto path = tmp_path("badlabels.txt");

  SUBCASE("garbage column") {
    write_text(path, "0.0 100.0\n0.02 oops\n");
    try {
      load_pitch_labels(path, 0.02);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("negative frequency") {
    write_text(path, "0.0 -5.0\n");
    CHECK_THROWS_AS(load_pitch_labels(path, 0.02), ParseError);
  }
  SUBCASE("non-increasing times") {
    write_text(path, "0.04 100.0\n0.02 120.0\n");
    CHECK_THROWS_AS(load_pitch_labels(path, 0.02), ParseError);
  }
  SUBCASE("empty file gives empty track") {
    write_text(path, "# nothing\n");
    CHECK(load_pitch_labels(path, 0.02).size() == 0);
  }
}

TEST_CASE("pitch label writer round trips") {
  PitchTrack t;
  t.hop_seconds = 0.02;
  t.frames = {0.0, 440.0, 452.893, 0.0};
  const auto path = tmp_path("labels_rt.txt");
  save_pitch_labels(t, path);
  const PitchTrack r = load_pitch_labels(path, 0.02);
  REQUIRE(r.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(r.frames[i] == doctest::Approx(t.frames[i]).epsilon(1e-6));
}

TEST_CASE("resample preserves a band-limited tone") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(8000);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = std::sin(2.0 * M_PI * 440.0 * i / 16000.0);

  SUBCASE("upsample to 22050") {
    const Waveform r = resample(w, 22050);
    CHECK(r.sample_rate == 22050);
    CHECK(r.samples.size() == static_cast<std::size_t>(
                                  std::llround(8000.0 * 22050.0 / 16000.0)));
    double worst = 0.0;
    for (std::size_t i = 300; i + 300 < r.samples.size(); ++i) {
      const double want = std::sin(2.0 * M_PI * 440.0 * i / 22050.0);
      worst = std::max(worst, std::abs(r.samples[i] - want));
    }
    CHECK(worst < 1e-3);
  }
  SUBCASE("downsample to 8000") {
    const Waveform r = resample(w, 8000);
    REQUIRE(r.samples.size() == 4000);
    double worst = 0.0;
    for (std::size_t i = 300; i + 300 < r.samples.size(); ++i) {
      const double want = std::sin(2.0 * M_PI * 440.0 * i / 8000.0);
      worst = std::max(worst, std::abs(r.samples[i] - want));
    }
    CHECK(worst < 1e-3);
  }
  SUBCASE("identity when rates match") {
    const Waveform r = resample(w, 16000);
    CHECK(r.samples == w.samples);
  }
}

TEST_CASE("downsampling removes content above the new Nyquist") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(8000);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = std::sin(2.0 * M_PI * 5000.0 * i / 16000.0);  // > 4 kHz
  const Waveform r = resample(w, 8000);
  double rms = 0.0;
  for (std::size_t i = 300; i + 300 < r.samples.size(); ++i)
    rms += r.samples[i] * r.samples[i];
  rms = std::sqrt(rms / (r.samples.size() - 600));
  CHECK(rms < 0.02);  // tone sat in the filter stopband
}

TEST_CASE("resample rejects bad arguments") {
  Waveform w;
  w.sample_rate = 16000;
  CHECK_THROWS_AS(resample(w, 8000), DomainError);  // empty
  w.samples = {0.0, 1.0};
  CHECK_THROWS_AS(resample(w, 0), DomainError);
}

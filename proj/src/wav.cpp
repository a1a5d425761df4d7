#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "rmvpe/audio_io.hpp"
#include "rmvpe/common.hpp"

namespace rmvpe {

namespace {

struct Reader {
  std::ifstream f;
  std::string path;

  void read(void* dst, std::size_t n) {
    f.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (f.gcount() != static_cast<std::streamsize>(n))
      throw FormatError(path + ": truncated WAV file");
  }
  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
  }
  std::uint16_t u16() {
    unsigned char b[2];
    read(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  void tag(char out[4]) { read(out, 4); }
  void skip(std::uint32_t n) { f.seekg(n, std::ios::cur); }
};

void put_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  f.write(reinterpret_cast<char*>(b), 4);
}
void put_u16(std::ofstream& f, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  f.write(reinterpret_cast<char*>(b), 2);
}

float le_float(const unsigned char* b) {
  std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (std::uint32_t(b[1]) << 8) |
                    (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
  float out;
  std::memcpy(&out, &u, 4);
  return out;
}

}  // namespace

Waveform load_wav(const std::string& path, ChannelMode mode) {
  Reader r;
  r.path = path;
  r.f.open(path, std::ios::binary);
  if (!r.f) throw IoError(path + ": cannot open");

  char tag[4];
  r.tag(tag);
  if (std::memcmp(tag, "RIFF", 4) != 0)
    throw FormatError(path + ": not a RIFF file");
  r.u32();  // riff size, unused
  r.tag(tag);
  if (std::memcmp(tag, "WAVE", 4) != 0)
    throw FormatError(path + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<unsigned char> raw;

  while (true) {
    r.f.read(tag, 4);
    if (r.f.gcount() == 0) break;  // clean EOF after last chunk
    if (r.f.gcount() != 4) throw FormatError(path + ": truncated chunk header");
    std::uint32_t size = r.u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path + ": fmt chunk too small");
      format = r.u16();
      channels = r.u16();
      sample_rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      if (size > 16) r.skip(size - 16);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      raw.resize(size);
      if (size > 0) r.read(raw.data(), size);
    } else {
      r.skip(size + (size & 1));  // chunks are word aligned
    }
    if (std::memcmp(tag, "fmt ", 4) == 0 || std::memcmp(tag, "data", 4) == 0)
      if (size & 1) r.skip(1);
    if (!raw.empty() && have_fmt) break;
  }

  if (!have_fmt) throw FormatError(path + ": missing fmt chunk");
  if (raw.empty()) throw FormatError(path + ": missing or empty data chunk");
  if (channels < 1 || channels > 2)
    throw FormatError(path + ": only mono/stereo supported, got " +
                      std::to_string(channels) + " channels");
  if (sample_rate == 0) throw FormatError(path + ": zero sample rate");

  const bool pcm16 = (format == 1 && bits == 16);
  const bool f32 = (format == 3 && bits == 32);
  if (!pcm16 && !f32)
    throw FormatError(path + ": unsupported encoding (format=" +
                      std::to_string(format) + ", bits=" + std::to_string(bits) +
                      "); need PCM16 or float32");

  const std::size_t bytes_per = pcm16 ? 2 : 4;
  const std::size_t n_frames = raw.size() / (bytes_per * channels);
  if (n_frames == 0) throw FormatError(path + ": empty data chunk");

  Waveform w;
  w.sample_rate = static_cast<int>(sample_rate);
  w.samples.resize(n_frames);

  auto sample_at = [&](std::size_t frame, int ch) -> double {
    const std::size_t off = (frame * channels + static_cast<std::size_t>(ch)) * bytes_per;
    if (pcm16) {
      std::int16_t s = static_cast<std::int16_t>(raw[off] | (raw[off + 1] << 8));
      return static_cast<double>(s) / 32768.0;
    }
    double v = static_cast<double>(le_float(&raw[off]));
    if (v > 1.0) v = 1.0;
    if (v < -1.0) v = -1.0;
    return v;
  };

  for (std::size_t i = 0; i < n_frames; ++i) {
    if (channels == 1) {
      w.samples[i] = sample_at(i, 0);
    } else {
      switch (mode) {
        case ChannelMode::kLeft:
          w.samples[i] = sample_at(i, 0);
          break;
        case ChannelMode::kRight:
          w.samples[i] = sample_at(i, 1);
          break;
        case ChannelMode::kMix:
          w.samples[i] = 0.5 * (sample_at(i, 0) + sample_at(i, 1));
          break;
      }
    }
  }
  return w;
}

void save_wav(const Waveform& w, const std::string& path) {
  if (w.sample_rate <= 0) throw DomainError("save_wav: sample_rate must be > 0");
  for (double s : w.samples)
    if (!std::isfinite(s)) throw DomainError("save_wav: non-finite sample");

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path + ": cannot open for writing");

  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_bytes = n * 2;

  f.write("RIFF", 4);
  put_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(f, 16);
  put_u16(f, 1);  // PCM
  put_u16(f, 1);  // mono
  put_u32(f, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(f, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(f, 2);
  put_u16(f, 16);
  f.write("data", 4);
  put_u32(f, data_bytes);

  for (double s : w.samples) {
    long q = std::lround(s * 32768.0);
    if (q > 32767) q = 32767;  // clip, never wrap
    if (q < -32768) q = -32768;
    put_u16(f, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!f) throw IoError(path + ": write failed");
  f.close();
  if (!f) throw IoError(path + ": close failed");
}

}  // namespace rmvpe

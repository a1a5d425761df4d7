#include "rmvpe/checkpoint.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "rmvpe/common.hpp"

namespace rmvpe {
namespace {

constexpr char kMagic[4] = {'R', 'M', 'V', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

struct Reader {
  const std::uint8_t* p;
  std::size_t left;

  void need(std::size_t n) const {
    if (left < n) throw CheckpointError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    left -= 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    left -= 8;
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    left -= n;
    return s;
  }
  void floats(float* dst, std::size_t n) {
    need(n * 4);
    std::memcpy(dst, p, n * 4);
    p += n * 4;
    left -= n * 4;
  }
};

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void append_record(std::vector<std::uint8_t>& out, const std::string& name,
                   const Tensor<float>& t) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  put_bytes(out, name.data(), name.size());
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape) put_u64(out, static_cast<std::uint64_t>(d));
  static_assert(sizeof(float) == 4);
  put_bytes(out, t.data.data(), t.data.size() * 4);
}

void write_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename failed: " + tmp + " -> " + path);
}

}  // namespace

std::string encode_config(const ModelConfig& cfg, const TrainState& state) {
  std::ostringstream os;
  os << "mel_bins=" << cfg.mel_bins << "\n";
  os << "bins_out=" << cfg.bins_out << "\n";
  os << "encoder_channels=";
  for (int i = 0; i < 5; ++i)
    os << (i ? "," : "") << cfg.encoder_channels[static_cast<std::size_t>(i)];
  os << "\n";
  os << "rcb_per_block=" << cfg.rcb_per_block << "\n";
  os << "icb_count=" << cfg.icb_count << "\n";
  os << "gru_hidden=" << cfg.gru_hidden << "\n";
  os << "skip_mode=concat\n";
  os << "gru_variant=v3\n";
  os << "sample_rate=" << state.mel.sample_rate << "\n";
  os << "n_fft=" << state.mel.n_fft << "\n";
  os << "hop=" << state.mel.hop << "\n";
  os << "fmin=" << fmt_double(state.mel.fmin) << "\n";
  os << "fmax=" << fmt_double(state.mel.fmax) << "\n";
  os << "floor_amp=" << fmt_double(state.mel.floor_amp) << "\n";
  os << "epoch=" << state.epoch << "\n";
  os << "adam_step=" << state.adam_step << "\n";
  return os.str();
}

void decode_config(const std::string& text, ModelConfig& cfg, TrainState& state) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CheckpointError("bad config line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw CheckpointError("config missing key: " + key);
    return it->second;
  };
  cfg.mel_bins = std::stoi(get("mel_bins"));
  cfg.bins_out = std::stoi(get("bins_out"));
  {
    std::istringstream cs(get("encoder_channels"));
    std::string tok;
    int i = 0;
    while (std::getline(cs, tok, ',')) {
      if (i >= 5) throw CheckpointError("encoder_channels: expected 5 entries");
      cfg.encoder_channels[static_cast<std::size_t>(i++)] = std::stoi(tok);
    }
    if (i != 5) throw CheckpointError("encoder_channels: expected 5 entries");
  }
  cfg.rcb_per_block = std::stoi(get("rcb_per_block"));
  cfg.icb_count = std::stoi(get("icb_count"));
  cfg.gru_hidden = std::stoi(get("gru_hidden"));
  if (get("skip_mode") != "concat")
    throw CheckpointError("unsupported skip_mode: " + get("skip_mode"));
  if (get("gru_variant") != "v3")
    throw CheckpointError("unsupported gru_variant: " + get("gru_variant"));
  state.mel.sample_rate = std::stoi(get("sample_rate"));
  state.mel.n_fft = std::stoi(get("n_fft"));
  state.mel.hop = std::stoi(get("hop"));
  state.mel.n_mels = cfg.mel_bins;
  state.mel.fmin = std::stod(get("fmin"));
  state.mel.fmax = std::stod(get("fmax"));
  state.mel.floor_amp = std::stod(get("floor_amp"));
  state.epoch = std::stoll(get("epoch"));
  state.adam_step = std::stoll(get("adam_step"));
}

void save_checkpoint(const std::string& path, Model<float>& model,
                     const TrainState& state) {
  std::vector<std::uint8_t> out;
  put_bytes(out, kMagic, 4);
  put_u32(out, kVersion);
  const std::string cfg_text = encode_config(model.config(), state);
  put_u32(out, static_cast<std::uint32_t>(cfg_text.size()));
  put_bytes(out, cfg_text.data(), cfg_text.size());

  const auto& entries = model.params().entries;
  put_u32(out, static_cast<std::uint32_t>(entries.size() + state.moments.size()));
  for (const auto& e : entries) append_record(out, e.name, *e.value);
  for (const auto& [name, t] : state.moments) append_record(out, name, t);

  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, out.data(), static_cast<uInt>(out.size())));
  put_u32(out, crc);
  write_atomic(path, out);
}

LoadedModel load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw CheckpointError("checkpoint truncated");

  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i)
    stored |= static_cast<std::uint32_t>(bytes[body + static_cast<std::size_t>(i)]) << (8 * i);
  const auto computed = static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(body)));
  if (stored != computed) throw CheckpointError("checkpoint CRC mismatch");

  Reader r{bytes.data(), body};
  if (r.str(4) != std::string(kMagic, 4))
    throw CheckpointError("bad checkpoint magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

  LoadedModel out;
  const std::uint32_t cfg_len = r.u32();
  decode_config(r.str(cfg_len), out.cfg, out.state);
  out.model = std::make_unique<Model<float>>(out.cfg);

  auto& reg = out.model->params();
  std::map<std::string, bool> seen;
  for (const auto& e : reg.entries) seen[e.name] = false;

  const std::uint32_t n_records = r.u32();
  for (std::uint32_t i = 0; i < n_records; ++i) {
    const std::uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw CheckpointError("implausible tensor rank in " + name);
    std::vector<std::int64_t> dims;
    std::int64_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const auto v = static_cast<std::int64_t>(r.u64());
      if (v <= 0 || v > (1 << 30)) throw CheckpointError("implausible dim in " + name);
      dims.push_back(v);
      numel *= v;
    }
    const bool moment = name.size() > 2 && (name.ends_with(".m") || name.ends_with(".v"));
    if (moment) {
      Tensor<float> t(dims);
      r.floats(t.data.data(), t.data.size());
      out.state.moments.emplace(name, std::move(t));
      continue;
    }
    auto* entry = reg.find(name);
    if (!entry) throw CheckpointError("unknown tensor in checkpoint: " + name);
    if (entry->value->shape != dims)
      throw CheckpointError("shape mismatch for " + name + ": file " +
                            Tensor<float>(dims).shape_str() + " vs model " +
                            entry->value->shape_str());
    r.floats(entry->value->data.data(), entry->value->data.size());
    seen[name] = true;
    (void)numel;
  }
  for (const auto& [name, ok] : seen)
    if (!ok) throw CheckpointError("checkpoint missing tensor: " + name);
  return out;
}

}  // namespace rmvpe

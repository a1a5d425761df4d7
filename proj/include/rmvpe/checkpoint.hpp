#ifndef RMVPE_CHECKPOINT_HPP
#define RMVPE_CHECKPOINT_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "rmvpe/model.hpp"
#include "rmvpe/spectrogram.hpp"
#include "rmvpe/tensor.hpp"

namespace rmvpe {

// State carried alongside the weights: the frontend configuration the model
// was trained against, training counters, and Adam moments keyed
// "<param>.m" / "<param>.v". Moments may be empty (inference-only export).
struct TrainState {
  MelConfig mel;
  std::int64_t epoch = 0;
  std::int64_t adam_step = 0;
  std::map<std::string, Tensor<float>> moments;
};

struct LoadedModel {
  ModelConfig cfg;
  TrainState state;
  std::unique_ptr<Model<float>> model;
};

// Binary layout: magic "RMVP", u32 version, u32 config-text length + bytes,
// u32 record count, records of (u32 name length, name, u32 rank, u64 dims,
// float32 LE payload), then CRC32 of everything before it. Writes go to a
// temp file in the same directory and are renamed into place.
void save_checkpoint(const std::string& path, Model<float>& model,
                     const TrainState& state);
LoadedModel load_checkpoint(const std::string& path);

// Config text serialization, exposed for round-trip tests.
std::string encode_config(const ModelConfig& cfg, const TrainState& state);
void decode_config(const std::string& text, ModelConfig& cfg, TrainState& state);

}  // namespace rmvpe

#endif  // RMVPE_CHECKPOINT_HPP

#ifndef RMVPE_COMMON_HPP
#define RMVPE_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rmvpe {

// Base class for all library errors. Subtypes mirror the failure surfaces of
// the pipeline so callers can catch narrowly.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported file content (WAV headers, label text).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Tensor/layer dimension mismatches.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside its mathematical domain (e.g. hz_to_cents(f <= 0)).
class DomainError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// FNV-1a, used wherever a stable cross-platform hash is needed
// (per-file degradation seeds, sweep cell seeds).
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t seed = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s,
                           std::uint64_t seed = 1469598103934665603ull) {
  return fnv1a(s.data(), s.size(), seed);
}

}  // namespace rmvpe

#endif  // RMVPE_COMMON_HPP

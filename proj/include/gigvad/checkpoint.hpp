#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include "gigvad/errors.hpp"
#include "gigvad/gig.hpp"
#include "gigvad/io.hpp"

// Binary checkpoint layout (all integers and floats little-endian):
//
//   "GIGVAD01"                      8 bytes
//   C, d, k, p                      4 x u64
//   phi1.W (1+C)xd, phi1.b (1+C),
//   phi2.W (1+C)xd, phi2.b (1+C)    f64, row-major
//   checksum                        u64, sum of all preceding bytes mod 2^64
namespace gigvad {

inline constexpr std::string_view kCheckpointMagic = "GIGVAD01";
inline constexpr std::size_t kCheckpointHeaderBytes = 8 + 4 * 8;

struct Checkpoint {
  std::uint64_t classes = 0;
  std::uint64_t channels = 0;
  std::uint64_t k = 0;
  std::uint64_t p = 0;
  HeadParams params;
};

/// Number of f64 values stored for C classes and d channels.
inline std::size_t checkpoint_payload_floats(std::size_t classes, std::size_t channels) {
  return 2 * (1 + classes) * channels + 2 * (1 + classes);
}

inline std::size_t checkpoint_bytes(std::size_t classes, std::size_t channels) {
  return kCheckpointHeaderBytes + 8 * checkpoint_payload_floats(classes, channels) + 8;
}

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_u64(std::string_view in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

inline std::uint64_t byte_sum(std::string_view bytes) {
  std::uint64_t s = 0;
  for (char c : bytes) s += static_cast<unsigned char>(c);
  return s;
}

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& ck) {
  const HeadParams& hp = ck.params;
  if (hp.classes() != ck.classes || hp.channels() != ck.channels || hp.phi2.outputs() != 1 + ck.classes ||
      hp.phi2.inputs() != ck.channels) {
    throw DimensionError("checkpoint header disagrees with parameter shapes");
  }
  std::string out(kCheckpointMagic);
  detail::put_u64(out, ck.classes);
  detail::put_u64(out, ck.channels);
  detail::put_u64(out, ck.k);
  detail::put_u64(out, ck.p);
  for (const Tensor* t : hp.tensors()) {
    for (double v : t->data()) detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  detail::put_u64(out, detail::byte_sum(out));
  return out;
}

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kCheckpointHeaderBytes + 8) {
    throw CorruptCheckpointError("checkpoint size mismatch: " + std::to_string(bytes.size()) +
                                 " bytes is shorter than the header");
  }
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CorruptCheckpointError("checkpoint bad magic");
  }
  Checkpoint ck;
  ck.classes = detail::get_u64(bytes, 8);
  ck.channels = detail::get_u64(bytes, 16);
  ck.k = detail::get_u64(bytes, 24);
  ck.p = detail::get_u64(bytes, 32);
  if (ck.classes == 0 || ck.channels == 0 || ck.classes > (1u << 20) || ck.channels > (1u << 24)) {
    throw CorruptCheckpointError("checkpoint header holds implausible C/d");
  }
  const std::size_t expected = checkpoint_bytes(ck.classes, ck.channels);
  if (bytes.size() != expected) {
    throw CorruptCheckpointError("checkpoint size mismatch: " + std::to_string(bytes.size()) + " bytes, expected " +
                                 std::to_string(expected));
  }
  const std::size_t body = expected - 8;
  if (detail::byte_sum(bytes.substr(0, body)) != detail::get_u64(bytes, body)) {
    throw CorruptCheckpointError("checkpoint checksum failure");
  }
  const std::size_t C = ck.classes, d = ck.channels;
  HeadParams& hp = ck.params;
  hp.phi1 = Affine{Tensor(Shape{1 + C, d}), Tensor(Shape{1 + C})};
  hp.phi2 = Affine{Tensor(Shape{1 + C, d}), Tensor(Shape{1 + C})};
  std::size_t at = kCheckpointHeaderBytes;
  for (Tensor* t : hp.tensors()) {
    for (double& v : t->data()) {
      v = std::bit_cast<double>(detail::get_u64(bytes, at));
      if (!std::isfinite(v)) throw CorruptCheckpointError("checkpoint holds a non-finite parameter");
      at += 8;
    }
  }
  hp.reset_accumulators();
  return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  io::write_file_atomic(path, encode_checkpoint(ck));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(io::read_file(path));
  } catch (const CorruptCheckpointError& e) {
    throw CorruptCheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace gigvad

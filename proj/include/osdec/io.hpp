#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "osdec/errors.hpp"
#include "osdec/synth.hpp"

namespace osdec {

// Binary container for a SyntheticStream.
//
// Layout (little-endian, offsets in bytes):
//   0   magic "OSDECSTM" (8 bytes)
//   8   u32 format version (currently 1)
//   12  u32 reserved, zero
//   16  u64 n, r, d, q, s0, seed (48 bytes)
//   64  L_true, column-major doubles, n*(d+q) entries
//   ..  X_true, column-major doubles, n*(d+q) entries
// No padding, no trailing bytes. Rewriting the same stream reproduces the
// file byte for byte.
inline constexpr char kStreamMagic[8] = {'O', 'S', 'D', 'E', 'C', 'S', 'T', 'M'};
inline constexpr std::uint32_t kStreamFormatVersion = 1;

namespace detail {

inline void write_bytes(std::ofstream& out, const void* p, std::streamsize len,
                        const std::string& path) {
  out.write(static_cast<const char*>(p), len);
  if (!out) throw IoError("write failed: " + path);
}

inline void read_bytes(std::ifstream& in, void* p, std::streamsize len,
                       const std::string& path, std::uint64_t offset) {
  in.read(static_cast<char*>(p), len);
  if (in.gcount() != len) {
    throw IoError("truncated read at byte offset " + std::to_string(offset) +
                  ": " + path);
  }
}

}  // namespace detail

inline void save_stream(const SyntheticStream& stream, const std::string& path) {
  const Eigen::Index frames = stream.params.d + stream.params.q;
  if (stream.L_true.rows() != stream.params.n ||
      stream.L_true.cols() != frames ||
      stream.X_true.rows() != stream.params.n ||
      stream.X_true.cols() != frames) {
    throw InvalidInput("save_stream: matrices do not match params");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);

  detail::write_bytes(out, kStreamMagic, 8, path);
  const std::uint32_t version = kStreamFormatVersion, reserved = 0;
  detail::write_bytes(out, &version, 4, path);
  detail::write_bytes(out, &reserved, 4, path);
  const std::uint64_t header[6] = {
      std::uint64_t(stream.params.n),  std::uint64_t(stream.params.r),
      std::uint64_t(stream.params.d),  std::uint64_t(stream.params.q),
      std::uint64_t(stream.params.s0), stream.params.seed};
  detail::write_bytes(out, header, sizeof(header), path);
  detail::write_bytes(out, stream.L_true.data(),
                      std::streamsize(sizeof(double)) * stream.L_true.size(),
                      path);
  detail::write_bytes(out, stream.X_true.data(),
                      std::streamsize(sizeof(double)) * stream.X_true.size(),
                      path);
  out.close();
  if (!out) throw IoError("close failed: " + path);
}

inline SyntheticStream load_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);

  char magic[8];
  detail::read_bytes(in, magic, 8, path, 0);
  if (std::memcmp(magic, kStreamMagic, 8) != 0) {
    throw IoError("bad magic at byte offset 0 (not a stream file): " + path);
  }
  std::uint32_t version = 0, reserved = 0;
  detail::read_bytes(in, &version, 4, path, 8);
  if (version != kStreamFormatVersion) {
    throw IoError("unsupported format version " + std::to_string(version) +
                  " at byte offset 8: " + path);
  }
  detail::read_bytes(in, &reserved, 4, path, 12);

  std::uint64_t header[6];
  detail::read_bytes(in, header, sizeof(header), path, 16);
  SyntheticStream s;
  s.params.n = Eigen::Index(header[0]);
  s.params.r = int(header[1]);
  s.params.d = Eigen::Index(header[2]);
  s.params.q = Eigen::Index(header[3]);
  s.params.s0 = int(header[4]);
  s.params.seed = header[5];
  if (s.params.n < 1 || s.params.d < 0 || s.params.q < 0 || s.params.r < 0 ||
      s.params.n > (std::int64_t(1) << 32) ||
      s.params.d + s.params.q > (std::int64_t(1) << 32)) {
    throw IoError("implausible dimensions in header at byte offset 16: " +
                  path);
  }

  const Eigen::Index frames = s.params.d + s.params.q;
  s.L_true.resize(s.params.n, frames);
  s.X_true.resize(s.params.n, frames);
  const std::uint64_t l_off = 64;
  const std::uint64_t x_off =
      l_off + sizeof(double) * std::uint64_t(s.L_true.size());
  detail::read_bytes(in, s.L_true.data(),
                     std::streamsize(sizeof(double)) * s.L_true.size(), path,
                     l_off);
  detail::read_bytes(in, s.X_true.data(),
                     std::streamsize(sizeof(double)) * s.X_true.size(), path,
                     x_off);
  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0) {
    throw IoError("trailing bytes after payload at byte offset " +
                  std::to_string(x_off +
                                 sizeof(double) *
                                     std::uint64_t(s.X_true.size())) +
                  ": " + path);
  }
  if (!s.L_true.allFinite() || !s.X_true.allFinite()) {
    throw IoError("non-finite payload values: " + path);
  }
  return s;
}

}  // namespace osdec

#pragma once

// Parameter checkpoint: little-endian binary, stable across runs.
//   magic "MNAVCKP1", u32 param count, then per parameter:
//   u32 name length, name bytes, u32 rank, u32 dims..., f64 row-major values.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "modnav/ad/core.hpp"

namespace modnav::ad {

inline constexpr char kCheckpointMagic[8] = {'M', 'N', 'A', 'V',
                                             'C', 'K', 'P', '1'};

template <class T>
void save_checkpoint(const std::string& path,
                     const std::vector<Param<T>*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const uint32_t count = static_cast<uint32_t>(params.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const Param<T>* p : params) {
    const uint32_t name_len = static_cast<uint32_t>(p->name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(p->name.data(), name_len);
    const uint32_t rank = static_cast<uint32_t>(p->shape.size());
    out.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
    for (int d : p->shape) {
      const uint32_t dim = static_cast<uint32_t>(d);
      out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    }
    for (T v : p->value) {
      const double dv = static_cast<double>(v);
      out.write(reinterpret_cast<const char*>(&dv), sizeof(dv));
    }
  }
  if (!out) throw config_error("checkpoint write failed: " + path);
}

template <class T>
void load_checkpoint(const std::string& path,
                     const std::vector<Param<T>*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read checkpoint: " + path);
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw config_error("bad checkpoint magic: " + path);
  uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (count != params.size())
    throw config_error("checkpoint parameter count mismatch: " + path);
  for (Param<T>* p : params) {
    uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (name != p->name)
      throw config_error("checkpoint name mismatch: expected " + p->name +
                         ", found " + name);
    uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), sizeof(rank));
    if (rank != p->shape.size())
      throw config_error("checkpoint rank mismatch for " + p->name);
    for (int d : p->shape) {
      uint32_t dim = 0;
      in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
      if (dim != static_cast<uint32_t>(d))
        throw config_error("checkpoint shape mismatch for " + p->name);
    }
    for (T& v : p->value) {
      double dv = 0.0;
      in.read(reinterpret_cast<char*>(&dv), sizeof(dv));
      v = static_cast<T>(dv);
    }
    if (!in) throw config_error("truncated checkpoint: " + path);
  }
}

}  // namespace modnav::ad

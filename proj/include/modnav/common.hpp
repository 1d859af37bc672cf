#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace modnav {

struct shape_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// stepping a finished episode, reusing a consumed tape, ...
struct usage_error : std::logic_error {
  using std::logic_error::logic_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// non-finite value escaped a numeric computation; `where` names the module
struct numeric_fault : std::runtime_error {
  explicit numeric_fault(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), module(where) {}
  std::string module;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// distinct, well-mixed seeds for the sub-streams of one run
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 0x51ed2701a9b4e22bULL));
}

class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return normal_(gen_); }
  int uniform_int(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }
  uint64_t next() { return gen_(); }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace modnav

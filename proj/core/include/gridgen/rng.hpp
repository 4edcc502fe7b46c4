#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace gridgen {

// Reproducible random stream addressed by a key path such as
// (seed, "load", country, bus label, replica). Any stream can be recreated
// in isolation, independent of the order other streams are consumed in.
class RngStream {
 public:
  class Key {
   public:
    explicit Key(std::uint64_t seed);
    Key& add(std::string_view part);
    Key& add(std::uint64_t part);
    Key& add(int part) { return add(static_cast<std::uint64_t>(part)); }
    std::uint64_t digest() const { return state_; }

   private:
    std::uint64_t state_;
  };

  explicit RngStream(const Key& key);
  explicit RngStream(std::uint64_t raw_seed);

  // Uniform on [0, 1) with 53 bits of the engine output.
  double uniform();
  // Uniform on [0, 2*pi).
  double uniform_angle();
  // Standard normal via Box-Muller (does not depend on library-specific
  // distribution implementations, so streams are stable across toolchains).
  double normal();

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace gridgen

#include "gridgen/rng.hpp"

#include <cmath>
#include <numbers>

namespace gridgen {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_bytes(std::uint64_t state, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    state ^= p[i];
    state *= kFnvPrime;
  }
  return state;
}

// Final avalanche so that nearby keys land far apart in seed space.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::Key::Key(std::uint64_t seed) : state_(kFnvOffset) {
  state_ = fnv_bytes(state_, &seed, sizeof(seed));
}

RngStream::Key& RngStream::Key::add(std::string_view part) {
  state_ = fnv_bytes(state_, part.data(), part.size());
  const unsigned char sep = 0xff;  // keeps ("ab","c") distinct from ("a","bc")
  state_ = fnv_bytes(state_, &sep, 1);
  return *this;
}

RngStream::Key& RngStream::Key::add(std::uint64_t part) {
  state_ = fnv_bytes(state_, &part, sizeof(part));
  return *this;
}

RngStream::RngStream(const Key& key) : engine_(mix(key.digest())) {}
RngStream::RngStream(std::uint64_t raw_seed) : engine_(mix(raw_seed)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_angle() {
  return uniform() * 2.0 * std::numbers::pi;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_ = true;
  return r * std::cos(a);
}

}  // namespace gridgen

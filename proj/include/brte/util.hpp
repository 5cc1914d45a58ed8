#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace brte {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

using cplx = std::complex<double>;
inline constexpr cplx iu{0.0, 1.0};

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Integer lattice coordinates. Entries beyond the active dimension stay zero.
struct IVec {
  std::array<int, 3> v{0, 0, 0};

  IVec() = default;
  IVec(int a, int b, int c) : v{a, b, c} {}

  int& operator[](int i) { return v[static_cast<size_t>(i)]; }
  int operator[](int i) const { return v[static_cast<size_t>(i)]; }

  friend IVec operator+(const IVec& a, const IVec& b) {
    return {a.v[0] + b.v[0], a.v[1] + b.v[1], a.v[2] + b.v[2]};
  }
  friend IVec operator-(const IVec& a, const IVec& b) {
    return {a.v[0] - b.v[0], a.v[1] - b.v[1], a.v[2] - b.v[2]};
  }
  IVec operator-() const { return {-v[0], -v[1], -v[2]}; }

  bool operator==(const IVec&) const = default;
  auto operator<=>(const IVec&) const = default;

  bool is_zero() const { return v[0] == 0 && v[1] == 0 && v[2] == 0; }
};

struct IVecHash {
  size_t operator()(const IVec& a) const {
    uint64_t h = 1469598103934665603ull;
    for (int x : a.v) {
      h ^= static_cast<uint64_t>(static_cast<uint32_t>(x));
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Counter-based generator: value at a counter is independent of call order,
/// so parallel consumers with distinct counters stay deterministic.
struct CounterRng {
  uint64_t key;

  explicit CounterRng(uint64_t seed) : key(splitmix64(seed ^ 0x5851f42d4c957f2dull)) {}

  uint64_t bits(uint64_t counter) const { return splitmix64(key ^ splitmix64(counter + 0x632be59bd9b4e019ull)); }

  /// Uniform in (0,1).
  double uniform(uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Box-Muller pair of standard normals from counters (2c, 2c+1).
  void normal_pair(uint64_t counter, double& g0, double& g1) const;
};

std::string format_double(double x);

uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t v);

}  // namespace brte

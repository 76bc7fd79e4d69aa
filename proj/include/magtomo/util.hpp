#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace magtomo {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, GeometryError / NumericError -> 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double operator[](int i) const { return i == 0 ? x : y; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Deterministic parallel loop: each index writes its own slot, so results do
// not depend on the number of worker threads.
class ThreadPoolConfig {
 public:
  static int threads() { return instance().n_; }
  static void set_threads(int n) { instance().n_ = n < 1 ? 1 : n; }

 private:
  static ThreadPoolConfig& instance() {
    static ThreadPoolConfig cfg;
    return cfg;
  }
  int n_ = static_cast<int>(std::thread::hardware_concurrency());
};

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int nt = ThreadPoolConfig::threads();
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

// FNV-1a over raw little-endian doubles; used to key geometry caches.
inline std::uint64_t hash_mix(std::uint64_t h, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) {
    h ^= (bits >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t hash_mix(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t kHashSeed = 14695981039346656037ull;

}  // namespace magtomo

// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace sketchir
{

// Counter-based generator: every (seed, stream, index) triple names an
// independent sequence, so results never depend on generation order.
inline constexpr std::string_view kRngName = "splitmix64-counter/box-muller v1";

enum class StreamKind : std::uint64_t
{
  GaussianSketch = 1,
  SparseSketch = 2,
  RandsvdLeft = 3,
  RandsvdRight = 4,
  RightHandSide = 5,
  TestData = 6,
  Directions = 7
};

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class RandomStream
{
public:
  RandomStream(std::uint64_t seed, StreamKind kind, std::uint64_t index)
    : state_(splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(kind))) + index))
  {
  }

  std::uint64_t next_u64()
  {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53; }

  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound)
  {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next_u64();
    while (x >= limit)
    {
      x = next_u64();
    }
    return x % bound;
  }

  // Standard normal via Box-Muller; the sine branch is cached.
  double normal()
  {
    if (has_spare_)
    {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sketchir

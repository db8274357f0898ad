#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "boxcouple/coarse.hpp"
#include "boxcouple/groups.hpp"

namespace support {

inline std::shared_ptr<const boxcouple::groups::FiniteQuotient> cyclic(std::int64_t n) {
  return std::make_shared<const boxcouple::groups::FiniteQuotient>(boxcouple::groups::cyclic_quotient(n));
}

inline std::shared_ptr<const boxcouple::coarse::GroupSpace> cyclic_space(std::int64_t n) {
  return boxcouple::coarse::GroupSpace::from_quotient(cyclic(n));
}

/// Index of residue k in the canonical element order of Z/n.
inline std::uint32_t residue(const boxcouple::coarse::GroupSpace& s, std::int32_t k) {
  auto id = s.base().index_of(boxcouple::groups::Key{k});
  return static_cast<std::uint32_t>(*id);
}

/// Table of the map x -> a*x (mod m) between cyclic spaces, in element order.
inline boxcouple::coarse::Table linear_map(const boxcouple::coarse::GroupSpace& x,
                                           const boxcouple::coarse::GroupSpace& y, std::int64_t a) {
  boxcouple::coarse::Table t(x.size());
  auto m = static_cast<std::int64_t>(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::int64_t k = x.base().key(i)[0];
    t[i] = residue(y, static_cast<std::int32_t>(((a * k) % m + m) % m));
  }
  return t;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool coin() { return below(2) == 1; }
  std::mt19937_64& engine() { return rng_; }

  /// Random metric on n points: shortest paths of a random weighted complete graph.
  std::vector<double> metric(std::size_t n, int max_weight = 5) {
    std::vector<double> d(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = 1 + static_cast<double>(below(max_weight));
    }
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::min(d[i * n + j], d[i * n + k] + d[k * n + j]);
      }
    }
    return d;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace support

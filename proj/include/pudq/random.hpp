#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <cstdint>
#include <random>

namespace pudq {

// Substream tags. A stream is seeded from (seed, tag, index) through std::seed_seq,
// whose mixing algorithm is fixed by the C++ standard; Boost distributions are
// used because their output does not depend on the standard library vendor.
enum class Stream : std::uint32_t { trajectory = 1, loop_closure = 2, covariance = 3, noise = 4, test = 99 };

class Rng {
 public:
  Rng(std::uint64_t seed, Stream tag, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    engine_.seed(seq);
  }

  // standard normal
  double normal() { return normal_(engine_); }

  // uniform on [0, 1)
  double uniform() { return uniform_(engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t raw() { return engine_(); }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
};

}  // namespace pudq

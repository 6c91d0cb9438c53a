#pragma once

#include <cstdint>
#include <type_traits>
#include <vector>

#include "schwarz/types.hpp"

namespace schwarz {

/// Counter-based deterministic random stream (splitmix64 core).
///
/// The sequence is a pure function of the seed; derive(key) yields a stream
/// that is independent of its parent and of streams derived under other keys,
/// so parallel runs can each own a substream without coordination.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

  RandomStream derive(std::uint64_t key) const;

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double next_u01();

  /// Standard normal via Box-Muller (two uniform draws per call).
  double next_gaussian();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Discrete probability measure over subspace indices, with an alias table
/// for O(1) sampling. Weights must be strictly positive and sum to one
/// within 1e-12.
///
/// Default construction yields an empty placeholder that cannot be sampled.
class DiscreteMeasure {
public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(Vector weights);

  int size() const { return static_cast<int>(weights_.size()); }
  const Vector& weights() const { return weights_; }
  double weight(int i) const { return weights_(i); }

  int sample(RandomStream& stream) const;

private:
  Vector weights_;
  std::vector<double> alias_prob_;
  std::vector<int> alias_;
};

inline int sample(const DiscreteMeasure& measure, RandomStream& stream) {
  return measure.sample(stream);
}

/// Exact expectation sum_i rho_i f(i); works for scalar- and vector-valued f.
template <class F>
auto expect(const DiscreteMeasure& measure, F&& f) {
  using Result = std::decay_t<decltype(f(0))>;
  Result acc = Result(f(0) * measure.weight(0));
  for (int i = 1; i < measure.size(); ++i) {
    acc += f(i) * measure.weight(i);
  }
  return acc;
}

} // namespace schwarz

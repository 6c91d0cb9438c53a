#include "schwarz/measures.hpp"

#include <cmath>
#include <stdexcept>

namespace schwarz {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

} // namespace

RandomStream RandomStream::derive(std::uint64_t key) const {
  // Distinct mixing route from next_u64 so substreams do not collide with
  // the parent's output sequence.
  std::uint64_t s = mix64(seed_ ^ 0xD1B54A32D192ED03ULL);
  s = mix64(s + kGolden * (key + 1));
  return RandomStream(s);
}

std::uint64_t RandomStream::next_u64() {
  counter_ += 1;
  return mix64(seed_ + kGolden * counter_);
}

double RandomStream::next_u01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_gaussian() {
  // Box-Muller; u1 pushed away from zero so the log stays finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = next_u01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

DiscreteMeasure::DiscreteMeasure(Vector weights) : weights_(std::move(weights)) {
  const int n = static_cast<int>(weights_.size());
  if (n < 1) {
    throw std::invalid_argument("DiscreteMeasure: empty weight vector");
  }
  if ((weights_.array() <= 0.0).any()) {
    throw std::invalid_argument("DiscreteMeasure: weights must be strictly positive");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
  }

  // Vose alias construction.
  alias_prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<int> small, large;
  small.reserve(n);
  large.reserve(n);
  for (int i = 0; i < n; ++i) {
    scaled[i] = weights_(i) * n;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    large.pop_back();
    alias_prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (int i : large) alias_prob_[i] = 1.0;
  for (int i : small) alias_prob_[i] = 1.0;
}

int DiscreteMeasure::sample(RandomStream& stream) const {
  const int n = size();
  if (n == 0) {
    throw std::logic_error("DiscreteMeasure: sampling an empty measure");
  }
  const double u = stream.next_u01() * n;
  int slot = static_cast<int>(u);
  if (slot >= n) slot = n - 1;
  return stream.next_u01() < alias_prob_[slot] ? slot : alias_[slot];
}

} // namespace schwarz

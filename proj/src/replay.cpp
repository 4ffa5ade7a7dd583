#include "hanalab/replay.hpp"

namespace hanalab {

ReplayBuffer::ReplayBuffer(long capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("replay capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (long(items_.size()) == capacity_) {
    items_.pop_front();
    ++evicted_;
    if (!positive_.empty() && positive_.front() < evicted_) positive_.pop_front();
  }
  if (t.reward > 0) positive_.push_back(evicted_ + long(items_.size()));
  items_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(long n, SplitMix64& rng) const {
  if (items_.empty()) throw ConfigError("sampling from an empty replay buffer");
  std::vector<const Transition*> out;
  out.reserve(size_t(n));
  for (long i = 0; i < n; ++i)
    out.push_back(&items_[size_t(rng.next_below(items_.size()))]);
  return out;
}

std::vector<const Transition*> ReplayBuffer::sample_prioritized(long n, double priority_fraction,
                                                                SplitMix64& rng) const {
  if (items_.empty()) throw ConfigError("sampling from an empty replay buffer");
  std::vector<const Transition*> out;
  out.reserve(size_t(n));
  for (long i = 0; i < n; ++i) {
    const bool want_positive = rng.next_double() < priority_fraction && !positive_.empty();
    if (want_positive) {
      const long abs_index = positive_[size_t(rng.next_below(positive_.size()))];
      out.push_back(&items_[size_t(abs_index - evicted_)]);
    } else {
      out.push_back(&items_[size_t(rng.next_below(items_.size()))]);
    }
  }
  return out;
}

}  // namespace hanalab

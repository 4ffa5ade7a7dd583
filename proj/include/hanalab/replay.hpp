#pragma once

#include <deque>
#include <vector>

#include "hanalab/engine.hpp"
#include "hanalab/errors.hpp"
#include "hanalab/rng.hpp"

namespace hanalab {

// FIFO ring buffer of transitions with an optional positive-reward index for
// priority sampling (a fixed fraction of each batch drawn from transitions
// with reward > 0, the rest uniform).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long capacity);

  void push(Transition t);
  long size() const { return long(items_.size()); }
  long capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  // i = 0 is the oldest retained transition.
  const Transition& at(long i) const { return items_.at(size_t(i)); }

  std::vector<const Transition*> sample(long n, SplitMix64& rng) const;
  std::vector<const Transition*> sample_prioritized(long n, double priority_fraction,
                                                    SplitMix64& rng) const;

 private:
  long capacity_;
  long evicted_ = 0;  // count of transitions dropped from the front
  std::deque<Transition> items_;
  std::deque<long> positive_;  // absolute indices of reward > 0 transitions
};

}  // namespace hanalab

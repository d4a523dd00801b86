#pragma once

// Ranked reward: binarize a game score against the alpha-quantile of the
// recent scores kept in a bounded FIFO.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "morpion/core.hpp"

namespace morpion {

class EmptyRewardList : public Error {
 public:
  EmptyRewardList() : Error("threshold of an empty reward list") {}
};

struct RankedRewardConfig {
  double alpha = 0.75;
  std::size_t capacity = 200;

  bool valid() const { return alpha > 0.0 && alpha < 1.0 && capacity >= 1; }
};

// Index of the threshold entry in a sorted list of `len` scores.
inline std::size_t threshold_index(std::size_t len, double alpha) {
  const auto idx = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(len)));
  return std::min(idx, len - 1);
}

// Immutable view handed to search workers.
struct RewardSnapshot {
  std::vector<int> sorted;
  std::optional<int> r_alpha;

  bool empty() const { return !r_alpha.has_value(); }
};

class RewardList {
 public:
  explicit RewardList(std::size_t capacity = 200) : capacity_(capacity) {}

  void record_score(int score) {
    entries_.push_back(score);
    while (entries_.size() > capacity_) entries_.pop_front();
  }

  int threshold(double alpha) const {
    if (entries_.empty()) throw EmptyRewardList();
    std::vector<int> sorted(entries_.begin(), entries_.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted[threshold_index(sorted.size(), alpha)];
  }

  RewardSnapshot snapshot(double alpha) const {
    RewardSnapshot s;
    s.sorted.assign(entries_.begin(), entries_.end());
    std::sort(s.sorted.begin(), s.sorted.end());
    if (!s.sorted.empty()) s.r_alpha = s.sorted[threshold_index(s.sorted.size(), alpha)];
    return s;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const std::deque<int>& entries() const { return entries_; }

  friend bool operator==(const RewardList&, const RewardList&) = default;

 private:
  std::size_t capacity_;
  std::deque<int> entries_;
};

// +1 above the threshold, -1 below, a fair coin from `rng` on a tie.
template <typename Rng>
int rank(int score, int r_alpha, Rng& rng) {
  if (score > r_alpha) return 1;
  if (score < r_alpha) return -1;
  return (rng() & 1u) ? 1 : -1;
}

}  // namespace morpion

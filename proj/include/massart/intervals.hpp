#pragma once

#include <algorithm>
#include <iterator>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace massart {

/// Closed interval [lo, hi]; infinite endpoints are allowed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double length() const noexcept { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted union of pairwise disjoint closed intervals.
class IntervalUnion {
 public:
  IntervalUnion() = default;

  /// Throws std::invalid_argument unless the intervals are well formed,
  /// sorted ascending and pairwise disjoint.
  explicit IntervalUnion(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      if (!(intervals_[i].lo <= intervals_[i].hi))
        throw std::invalid_argument("IntervalUnion: interval with lo > hi");
      if (i > 0 && !(intervals_[i - 1].hi < intervals_[i].lo))
        throw std::invalid_argument("IntervalUnion: intervals overlap or are unsorted");
    }
  }

  std::span<const Interval> intervals() const noexcept { return intervals_; }
  std::size_t size() const noexcept { return intervals_.size(); }
  bool empty() const noexcept { return intervals_.empty(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }

  /// Index of the interval containing x, or -1.
  std::ptrdiff_t find(double x) const noexcept {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    if (it == intervals_.begin()) return -1;
    --it;
    return it->contains(x) ? std::distance(intervals_.begin(), it) : -1;
  }

  bool contains(double x) const noexcept { return find(x) >= 0; }

  /// Closure of the complement in the extended real line. Shares endpoints
  /// with this union, which only matters on a set of measure zero.
  IntervalUnion complement() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<Interval> out;
    double cursor = -inf;
    for (const auto& iv : intervals_) {
      if (cursor < iv.lo) out.push_back({cursor, iv.lo});
      cursor = iv.hi;
    }
    if (cursor < inf) out.push_back({cursor, inf});
    return IntervalUnion(std::move(out));
  }

  /// Union of two disjoint unions.
  IntervalUnion merged_with(const IntervalUnion& other) const {
    std::vector<Interval> out;
    out.reserve(size() + other.size());
    std::merge(intervals_.begin(), intervals_.end(), other.intervals_.begin(),
               other.intervals_.end(), std::back_inserter(out),
               [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    return IntervalUnion(std::move(out));
  }

  bool intersects(const IntervalUnion& other) const noexcept {
    std::size_t i = 0, j = 0;
    while (i < size() && j < other.size()) {
      const auto& a = intervals_[i];
      const auto& b = other.intervals_[j];
      if (a.hi < b.lo) ++i;
      else if (b.hi < a.lo) ++j;
      else return true;
    }
    return false;
  }

  friend bool operator==(const IntervalUnion&, const IntervalUnion&) = default;

 private:
  std::vector<Interval> intervals_;
};

}  // namespace massart

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adamlab {

/// A named contiguous block of parameter indices [start, start + length).
struct Group {
  std::string label;
  Eigen::Index start = 0;
  Eigen::Index length = 0;

  Eigen::Index end() const { return start + length; }
  bool operator==(const Group&) const = default;
};

// Ordered, disjoint groups. A partition is "complete" when the groups cover
// every index of the parameter vector; snapshot files may carry incomplete
// tables.
class GroupPartition {
 public:
  GroupPartition() = default;
  explicit GroupPartition(std::vector<Group> groups) : groups_(std::move(groups)) {
    check_disjoint();
  }

  /// Consecutive blocks with the given labels and sizes, starting at index 0.
  static GroupPartition contiguous(
      const std::vector<std::pair<std::string, Eigen::Index>>& sizes) {
    std::vector<Group> groups;
    Eigen::Index at = 0;
    for (const auto& [label, size] : sizes) {
      groups.push_back({label, at, size});
      at += size;
    }
    return GroupPartition(std::move(groups));
  }

  static GroupPartition single(Eigen::Index n, std::string label = "all") {
    return GroupPartition({Group{std::move(label), 0, n}});
  }

  const std::vector<Group>& groups() const { return groups_; }
  std::size_t size() const { return groups_.size(); }
  const Group& operator[](std::size_t i) const { return groups_[i]; }

  Eigen::Index covered() const {
    Eigen::Index total = 0;
    for (const auto& g : groups_) total += g.length;
    return total;
  }

  /// Highest index + 1 referenced by any group.
  Eigen::Index extent() const {
    Eigen::Index e = 0;
    for (const auto& g : groups_) e = std::max(e, g.end());
    return e;
  }

  bool covers(Eigen::Index n) const { return extent() == n && covered() == n; }

  /// Throws unless the groups fit inside n indices (and cover them all when
  /// `require_complete`).
  void validate(Eigen::Index n, bool require_complete = true) const {
    if (extent() > n)
      throw std::invalid_argument("group table exceeds parameter count");
    if (require_complete && !covers(n))
      throw std::invalid_argument("groups do not cover all parameters");
  }

  const Group& find(const std::string& label) const {
    for (const auto& g : groups_)
      if (g.label == label) return g;
    throw std::invalid_argument("unknown group label '" + label + "'");
  }

  bool contains(const std::string& label) const {
    for (const auto& g : groups_)
      if (g.label == label) return true;
    return false;
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < groups_.size(); ++i)
      if (groups_[i].label == label) return i;
    throw std::invalid_argument("unknown group label '" + label + "'");
  }

 private:
  void check_disjoint() const {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;
    for (const auto& g : groups_) {
      if (g.start < 0 || g.length < 0)
        throw std::invalid_argument("negative group bounds for '" + g.label + "'");
      spans.emplace_back(g.start, g.end());
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
      if (spans[i].first < spans[i - 1].second)
        throw std::invalid_argument("groups overlap");
  }

  std::vector<Group> groups_;
};

/// View of the entries of `x` that belong to `g`.
template <typename Derived>
auto segment(Eigen::DenseBase<Derived>& x, const Group& g) {
  return x.segment(g.start, g.length);
}

template <typename Derived>
auto segment(const Eigen::DenseBase<Derived>& x, const Group& g) {
  return x.segment(g.start, g.length);
}

}  // namespace adamlab

#ifndef BIMODAL_LABEL_TREE_HPP_
#define BIMODAL_LABEL_TREE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace bimodal {

/// Two-level label hierarchy: C leaves partitioned into G groups.
/// Leaves and groups are 0-based.
class LabelTree {
 public:
  LabelTree() = default;
  /// group_of[leaf] in [0, num_groups); every group must be non-empty.
  LabelTree(std::vector<std::size_t> group_of, std::size_t num_groups);

  /// Every leaf in its own group.
  static LabelTree singletons(std::size_t num_leaves);
  /// Leaves assigned to groups in contiguous runs of C / G; requires G | C.
  static LabelTree balanced(std::size_t num_leaves, std::size_t num_groups);

  std::size_t num_leaves() const noexcept { return group_of_.size(); }
  std::size_t num_groups() const noexcept { return members_.size(); }
  std::size_t group_of(std::size_t leaf) const { return group_of_.at(leaf); }
  std::span<const std::size_t> members(std::size_t group) const { return members_.at(group); }
  std::span<const std::size_t> group_table() const noexcept { return group_of_; }

  bool operator==(const LabelTree& other) const { return group_of_ == other.group_of_; }

 private:
  std::vector<std::size_t> group_of_;
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace bimodal

#endif  // BIMODAL_LABEL_TREE_HPP_

#include "bimodal/label_tree.hpp"

#include <string>

#include "bimodal/linalg.hpp"

namespace bimodal {

LabelTree::LabelTree(std::vector<std::size_t> group_of, std::size_t num_groups)
    : group_of_(std::move(group_of)), members_(num_groups) {
  if (group_of_.empty()) throw ParameterError("label tree: need at least one leaf");
  if (num_groups == 0 || num_groups > group_of_.size()) {
    throw ParameterError("label tree: need 1 <= G <= C, got G=" + std::to_string(num_groups) +
                         ", C=" + std::to_string(group_of_.size()));
  }
  for (std::size_t leaf = 0; leaf < group_of_.size(); ++leaf) {
    const std::size_t g = group_of_[leaf];
    if (g >= num_groups) {
      throw ParameterError("label tree: leaf " + std::to_string(leaf) + " maps to group " +
                           std::to_string(g) + " >= G=" + std::to_string(num_groups));
    }
    members_[g].push_back(leaf);
  }
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (members_[g].empty()) {
      throw ParameterError("label tree: group " + std::to_string(g) + " has no leaves");
    }
  }
}

LabelTree LabelTree::singletons(std::size_t num_leaves) {
  std::vector<std::size_t> table(num_leaves);
  for (std::size_t i = 0; i < num_leaves; ++i) table[i] = i;
  return LabelTree(std::move(table), num_leaves);
}

LabelTree LabelTree::balanced(std::size_t num_leaves, std::size_t num_groups) {
  if (num_groups == 0 || num_leaves % num_groups != 0) {
    throw ParameterError("label tree: C=" + std::to_string(num_leaves) +
                         " is not divisible by G=" + std::to_string(num_groups));
  }
  const std::size_t per_group = num_leaves / num_groups;
  std::vector<std::size_t> table(num_leaves);
  for (std::size_t i = 0; i < num_leaves; ++i) table[i] = i / per_group;
  return LabelTree(std::move(table), num_groups);
}

}  // namespace bimodal

#ifndef BIMODAL_DATASET_HPP_
#define BIMODAL_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bimodal/io_errors.hpp"
#include "bimodal/label_tree.hpp"
#include "bimodal/linalg.hpp"

namespace bimodal {

enum class Split : std::uint32_t { Train = 0, Test = 1 };

/// Labelled bimodal samples (x1_i, x2_i, y_i). Row i of x1 and x2 is sample i.
struct Dataset {
  Matrix x1;
  Matrix x2;
  std::vector<std::uint32_t> labels;
  LabelTree tree;
  Split split = Split::Train;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim_a() const noexcept { return x1.cols(); }
  std::size_t dim_v() const noexcept { return x2.cols(); }

  bool operator==(const Dataset&) const = default;
};

/// Throws ValidationError on inconsistent dims, labels out of range or
/// non-finite features.
void validate(const Dataset& dataset);

/// Binary layout, all integers and doubles little-endian:
///
///   char[4]  magic "BMDS"
///   u32      version (1)
///   u32      split (0 train, 1 test)
///   u32      d1, d2, C, G
///   u64      N
///   u32[C]   group of each leaf
///   f64[N*d1] x1, row-major
///   f64[N*d2] x2, row-major
///   u32[N]   labels (0-based leaves)
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(const Dataset& dataset, std::ostream& out);
/// `available_bytes`, when known, bounds allocation for corrupt headers.
Dataset read_dataset(std::istream& in, std::uint64_t available_bytes = UINT64_MAX);

/// Writes to a temporary file and renames it into place.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace bimodal

#endif  // BIMODAL_DATASET_HPP_

#include "bimodal/dataset.hpp"

#include <fstream>
#include <string>
#include <system_error>

#include "binary_io.hpp"

namespace bimodal {

namespace {

constexpr char kMagic[4] = {'B', 'M', 'D', 'S'};
constexpr std::uint64_t kHeaderBytes = 4 + 4 * 6 + 8;  // magic, six u32 fields, N

std::uint32_t narrow(std::size_t n, const char* what) {
  if (n > UINT32_MAX) throw ValidationError(std::string("dataset: ") + what + " exceeds 32 bits");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

void validate(const Dataset& dataset) {
  const std::size_t n = dataset.labels.size();
  if (dataset.tree.num_leaves() == 0) throw ValidationError("dataset: label tree has C = 0");
  if (dataset.x1.rows() != n || dataset.x2.rows() != n) {
    throw ValidationError("dataset: " + std::to_string(n) + " labels but feature blocks have " +
                          std::to_string(dataset.x1.rows()) + " and " +
                          std::to_string(dataset.x2.rows()) + " rows");
  }
  if (dataset.x1.cols() == 0 || dataset.x2.cols() == 0) {
    throw ValidationError("dataset: modality dims must be >= 1");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dataset.labels[i] >= dataset.tree.num_leaves()) {
      throw ValidationError("dataset: sample " + std::to_string(i) + " has label " +
                            std::to_string(dataset.labels[i]) + " >= C = " +
                            std::to_string(dataset.tree.num_leaves()));
    }
  }
  if (!all_finite(dataset.x1.values()) || !all_finite(dataset.x2.values())) {
    throw ValidationError("dataset: non-finite feature value");
  }
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  validate(dataset);
  detail::BinaryWriter w(out);
  w.put_bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.split));
  w.put<std::uint32_t>(narrow(dataset.dim_a(), "d1"));
  w.put<std::uint32_t>(narrow(dataset.dim_v(), "d2"));
  w.put<std::uint32_t>(narrow(dataset.tree.num_leaves(), "C"));
  w.put<std::uint32_t>(narrow(dataset.tree.num_groups(), "G"));
  w.put<std::uint64_t>(dataset.size());
  for (std::size_t g : dataset.tree.group_table()) w.put<std::uint32_t>(narrow(g, "group"));
  w.put_array(dataset.x1.values());
  w.put_array(dataset.x2.values());
  w.put_array(std::span<const std::uint32_t>(dataset.labels));
}

Dataset read_dataset(std::istream& in, std::uint64_t available_bytes) {
  detail::BinaryReader r(in);
  char magic[4];
  r.get_bytes(magic, sizeof magic, "magic");
  if (std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
    throw ParseError("not a dataset file (bad magic)", 0);
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kDatasetVersion) {
    throw VersionError("dataset: file version " + std::to_string(version) + ", reader supports " +
                       std::to_string(kDatasetVersion));
  }
  const auto split = r.get<std::uint32_t>("split");
  if (split > 1) throw ParseError("dataset: split tag " + std::to_string(split), 8);
  const std::uint64_t d1 = r.get<std::uint32_t>("d1");
  const std::uint64_t d2 = r.get<std::uint32_t>("d2");
  const std::uint64_t classes = r.get<std::uint32_t>("C");
  const std::uint64_t groups = r.get<std::uint32_t>("G");
  const std::uint64_t n = r.get<std::uint64_t>("N");
  if (classes == 0) throw ValidationError("dataset: C = 0");
  if (groups == 0 || groups > classes) {
    throw ValidationError("dataset: G = " + std::to_string(groups) + " with C = " +
                          std::to_string(classes));
  }
  if (d1 == 0 || d2 == 0) throw ValidationError("dataset: modality dims must be >= 1");

  // Refuse to allocate for a header that promises more data than exists.
  const long double payload = 4.0L * classes + 8.0L * n * (d1 + d2) + 4.0L * n;
  if (available_bytes != UINT64_MAX &&
      payload > static_cast<long double>(available_bytes - kHeaderBytes)) {
    throw ParseError("dataset: header promises " + std::to_string(static_cast<double>(payload)) +
                         " payload bytes, file has " +
                         std::to_string(available_bytes - kHeaderBytes),
                     available_bytes);
  }

  std::vector<std::size_t> group_of(classes);
  for (auto& g : group_of) g = r.get<std::uint32_t>("group table");

  Dataset ds;
  ds.split = static_cast<Split>(split);
  try {
    ds.tree = LabelTree(std::move(group_of), groups);
  } catch (const ParameterError& e) {
    throw ValidationError(std::string("dataset: ") + e.what());
  }
  ds.x1 = Matrix(n, d1);
  ds.x2 = Matrix(n, d2);
  ds.labels.resize(n);
  r.get_array(ds.x1.values(), "x1 block");
  r.get_array(ds.x2.values(), "x2 block");
  r.get_array(std::span<std::uint32_t>(ds.labels), "labels");
  r.expect_end();
  validate(ds);
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  validate(dataset);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    write_dataset(dataset, out);
    out.flush();
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  return read_dataset(in, ec ? UINT64_MAX : static_cast<std::uint64_t>(size));
}

}  // namespace bimodal

#include "bimodal/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "binary_io.hpp"

namespace bimodal {

namespace {

constexpr std::string_view kMagicLine = "bimodal-model";

std::string join(std::span<const std::size_t> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

class Header {
 public:
  void parse_line(const std::string& line, std::uint64_t offset) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("model header: expected key=value", offset);
    entries_[line.substr(0, eq)] = {line.substr(eq + 1), offset};
  }

  const std::string& text(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError("model header: missing key '" + key + "'", end_);
    return it->second.value;
  }

  std::uint64_t number(const std::string& key) const {
    const std::string& s = text(key);
    std::uint64_t value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ParseError("model header: '" + key + "' is not an unsigned integer",
                       entries_.at(key).offset);
    }
    return value;
  }

  double real(const std::string& key) const {
    const std::string& s = text(key);
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ParseError("model header: '" + key + "' is not a number", entries_.at(key).offset);
    }
    return value;
  }

  std::vector<std::size_t> list(const std::string& key) const {
    const std::string& s = text(key);
    std::vector<std::size_t> out;
    if (s.empty()) return out;
    const char* p = s.data();
    const char* end = s.data() + s.size();
    while (true) {
      std::size_t v = 0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw ParseError("model header: bad list '" + key + "'", entries_.at(key).offset);
      }
      out.push_back(v);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') throw ParseError("model header: bad list '" + key + "'", entries_.at(key).offset);
      ++p;
    }
    return out;
  }

  void set_end(std::uint64_t end) { end_ = end; }

 private:
  struct Entry {
    std::string value;
    std::uint64_t offset;
  };
  std::map<std::string, Entry> entries_;
  std::uint64_t end_ = 0;
};

ModelKind parse_kind(const std::string& s) {
  if (s == "audio") return ModelKind::AudioOnly;
  if (s == "visual") return ModelKind::VisualOnly;
  if (s == "fused") return ModelKind::Fused;
  if (s == "bilinear") return ModelKind::Bilinear;
  throw ValidationError("model header: unknown kind '" + s + "'");
}

HeadVariant parse_variant(const std::string& s) {
  if (s == "full") return HeadVariant::Full;
  if (s == "factored") return HeadVariant::Factored;
  if (s == "shared") return HeadVariant::FactoredShared;
  throw ValidationError("model header: unknown variant '" + s + "'");
}

/// Zero-valued model with the shape described by the header.
Model skeleton(const Header& h) {
  Model m;
  m.kind = parse_kind(h.text("kind"));
  m.seed = h.number("seed");
  const auto classes = h.number("classes");
  const auto groups = h.number("groups");
  auto table = h.list("group_of");
  if (classes == 0) throw ValidationError("model: classes = 0");
  if (table.size() != classes) throw ValidationError("model: group_of has wrong length");
  m.tree = LabelTree(std::move(table), groups);

  const auto dims_a = h.list("dims_a");
  const auto dims_v = h.list("dims_v");
  const auto dims_top = h.list("dims_top");
  auto softmax = [&](std::size_t inputs) {
    m.softmax = SoftmaxLayer{Matrix(inputs, classes), Vector(classes, 0.0)};
  };
  switch (m.kind) {
    case ModelKind::AudioOnly:
      m.tower_a = make_tower(dims_a);
      softmax(m.tower_a.output_dim());
      break;
    case ModelKind::VisualOnly:
      m.tower_v = make_tower(dims_v);
      softmax(m.tower_v.output_dim());
      break;
    case ModelKind::Fused:
      m.tower_a = make_tower(dims_a);
      m.tower_v = make_tower(dims_v);
      m.top = make_tower(dims_top);
      softmax(m.top.output_dim());
      break;
    case ModelKind::Bilinear:
      m.tower_a = make_tower(dims_a);
      m.tower_v = make_tower(dims_v);
      m.head = make_head(parse_variant(h.text("variant")), m.tower_a.output_dim(),
                         m.tower_v.output_dim(), h.number("factors"), m.tree, h.real("lambda"));
      break;
  }
  validate(m);
  return m;
}

}  // namespace

void write_model(const Model& model, std::ostream& out) {
  validate(model);
  const auto params = parameters(model);
  std::size_t payload = 0;
  for (const auto& p : params) payload += p.values.size();

  const bool bilinear = model.kind == ModelKind::Bilinear;
  out << kMagicLine << ' ' << kModelVersion << '\n';
  out << "kind=" << to_string(model.kind) << '\n';
  out << "variant=" << (bilinear ? to_string(model.head.variant) : "") << '\n';
  out << "dims_a=" << join(model.tower_a.dims) << '\n';
  out << "dims_v=" << join(model.tower_v.dims) << '\n';
  out << "dims_top=" << join(model.top.dims) << '\n';
  out << "classes=" << model.num_classes() << '\n';
  out << "groups=" << model.tree.num_groups() << '\n';
  out << "group_of=" << join(model.tree.group_table()) << '\n';
  out << "factors=" << (bilinear && model.head.factored() ? model.head.num_factors() : 0) << '\n';
  out << "lambda=" << format_double(bilinear ? model.head.lambda : 0.0) << '\n';
  out << "seed=" << model.seed << '\n';
  out << "payload=" << payload << '\n';
  out << "end\n";
  detail::BinaryWriter w(out);
  for (const auto& p : params) w.put_array(p.values);
}

Model read_model(std::istream& in) {
  std::uint64_t offset = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("model: empty file", 0);
  const auto space = line.find(' ');
  if (line.substr(0, space) != kMagicLine) {
    throw ParseError("not a model file (bad magic)", 0);
  }
  if (space == std::string::npos) throw ParseError("model: missing version", line.size());
  const std::string version = line.substr(space + 1);
  if (version != std::to_string(kModelVersion)) {
    throw VersionError("model: file version " + version + ", reader supports " +
                       std::to_string(kModelVersion));
  }
  offset += line.size() + 1;

  Header header;
  bool terminated = false;
  while (std::getline(in, line)) {
    const std::uint64_t here = offset;
    offset += line.size() + 1;
    if (line == "end") {
      terminated = true;
      break;
    }
    header.parse_line(line, here);
  }
  if (!terminated) throw ParseError("model: header not terminated by 'end'", offset);
  header.set_end(offset);

  Model model;
  try {
    model = skeleton(header);
  } catch (const ParameterError& e) {
    throw ValidationError(std::string("model: ") + e.what());
  } catch (const ShapeError& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }

  auto params = parameters(model);
  std::size_t expected = 0;
  for (const auto& p : params) expected += p.values.size();
  if (header.number("payload") != expected) {
    throw ValidationError("model: header declares " + header.text("payload") +
                          " parameters, architecture needs " + std::to_string(expected));
  }
  detail::BinaryReader r(in, offset);
  for (auto& p : params) r.get_array(p.values, p.name.c_str());
  r.expect_end();
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    write_model(model, out);
    out.flush();
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_model(in);
}

}  // namespace bimodal

#ifndef BIMODAL_CLI_CLI_HPP_
#define BIMODAL_CLI_CLI_HPP_

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bimodal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Malformed architecture string; `position` is the 0-based character index.
class ArchError : public std::invalid_argument {
 public:
  ArchError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

struct Architecture {
  std::vector<std::size_t> tower_a;  // input dim first, final hidden width last
  std::vector<std::size_t> tower_v;
  std::size_t classes = 0;           // 0 when the string carried no class count
  std::optional<std::size_t> factors;
};

/// Parses "[a0,a1,..,C | v0,v1,..,C | F=n]". With `with_classes` the last
/// entry of each side is the class count, which must agree between sides;
/// otherwise every entry is a tower width. The F part may be omitted.
Architecture parse_arch(std::string_view text, bool with_classes = true);

/// "64,32" -> {64, 32}; an empty string gives an empty list.
std::vector<std::size_t> parse_dims(std::string_view text);

/// Runs one command. `args` excludes the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bimodal::cli

#endif  // BIMODAL_CLI_CLI_HPP_

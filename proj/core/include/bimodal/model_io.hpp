#ifndef BIMODAL_MODEL_IO_HPP_
#define BIMODAL_MODEL_IO_HPP_

#include <filesystem>
#include <iosfwd>

#include "bimodal/io_errors.hpp"
#include "bimodal/model.hpp"

namespace bimodal {

/// Model file: a text header of key=value lines followed by a binary payload.
///
///   bimodal-model 1
///   kind=bilinear            audio | visual | fused | bilinear
///   variant=shared           full | factored | shared (bilinear only)
///   dims_a=20,40             tower dims, empty when unused
///   dims_v=20,40
///   dims_top=                fused top tower dims, empty otherwise
///   classes=8
///   groups=4
///   group_of=0,0,1,1,2,2,3,3
///   factors=8
///   lambda=2
///   seed=42
///   payload=1234             number of float64 values that follow
///   end
///
/// The payload is every parameter array in parameters() order, as
/// little-endian IEEE-754 doubles.
inline constexpr int kModelVersion = 1;

void write_model(const Model& model, std::ostream& out);
Model read_model(std::istream& in);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace bimodal

#endif  // BIMODAL_MODEL_IO_HPP_

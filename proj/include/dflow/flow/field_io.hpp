#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dflow/flow/transform_field.hpp"

namespace dflow {

/// `.dfield` layout: one line of JSON
///   {"format":"dfield","version":1,"anchors":N,"k":K,"tau":T}
/// terminated by '\n', then little-endian float64 blocks: N*3 anchor
/// positions, N*9 row-major rotations, N*3 translations.
void write_field(std::ostream& out, const TransformField& field);
TransformField read_field(std::istream& in, const std::string& source = "<stream>");

void write_field(const std::filesystem::path& path, const TransformField& field);
TransformField read_field(const std::filesystem::path& path);

}  // namespace dflow

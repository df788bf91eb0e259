#pragma once

#include <string>
#include <variant>

#include "mst/field.hpp"

namespace mst {

// MSFLD1 field snapshot, little-endian throughout:
//   magic "MSFLD1" (6 bytes), dims 3 x u64, origin 3 x f64, spacing 3 x f64,
//   rank u8 (1 scalar / 3 vector), payload complex128 node-major (x fastest),
//   vector components interleaved per node.
// The byte layout is normative for cross-tool reproducibility.
void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const VectorField& f);

using AnyField = std::variant<ScalarField, VectorField>;
AnyField read_field(const std::string& path);

}  // namespace mst

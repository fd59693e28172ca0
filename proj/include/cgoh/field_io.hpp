#pragma once

#include <string>

#include "cgoh/fields.hpp"
#include "json.hpp"

namespace cgoh::io {

// Binary layout (little-endian): "CGF1", int32 n[3], f64 lo[3], f64 hi[3],
// then interleaved re/im f64 values, x fastest, one block per component.
// A sidecar "<path>.json" records role, units, component count and the
// parameters the field was created with.
void write_field(const std::string& path, const ScalarField& f, const nlohmann::json& meta);
void write_field(const std::string& path, const VectorField3& V, const nlohmann::json& meta);
ScalarField read_scalar(const std::string& path);
VectorField3 read_vector(const std::string& path);

}  // namespace cgoh::io

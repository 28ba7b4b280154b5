#pragma once

// JSON encoding of tensors and canonical MPS files.
//
// Tensors are nested arrays in index order, row-major nesting, with each
// complex entry stored as [re, im].

#include <cstdint>
#include <string>

#include <json.hpp>

#include "mpsdp/mps.hpp"

namespace mpsdp {

using json = nlohmann::json;

json tensor_to_json(const Tensor& t);
/// Infers the shape from the nesting; throws ShapeError on ragged input.
Tensor tensor_from_json(const json& j);

json mps_to_json(const CanonicalMps& m);
/// Validates the decoded state with CanonicalMps::validate.
CanonicalMps mps_from_json(const json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// FNV-1a over the compact dump of `doc` with the "timings" and "digest"
/// keys removed, as 16 hex digits.
std::string result_digest(const json& doc);

}  // namespace mpsdp

#pragma once

#include <string>

#include "cfnn/models.hpp"

namespace cfnn {

// File layout: "CFNN1" magic line, self-describing text header (config plus
// parameter name tables), little-endian 64-bit float payload, trailing CRC32
// over everything before it. Round-trips are bitwise identical.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace cfnn

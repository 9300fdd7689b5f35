#pragma once

#include <string>

#include <json.hpp>

namespace scaffolding {

using Json = nlohmann::ordered_json;

// Compact serialization used for every document the engine emits: keys in
// insertion order, no whitespace, floating-point numbers in shortest
// round-trip form (150.0 prints as 150).
std::string canonical_dump(const Json& j);

}  // namespace scaffolding

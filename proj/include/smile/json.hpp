#pragma once

#include <json.hpp>  // nlohmann/json, vendored

namespace smile {

// Insertion-ordered so emitted documents keep a stable, readable key order.
using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

}  // namespace smile

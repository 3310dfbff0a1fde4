#pragma once

// Pulls structured blocks out of free-form model replies.

#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

namespace askeval {

using json = nlohmann::ordered_json;

/// Returns the first well-formed JSON object in `raw`: either the whole
/// trimmed reply, or the first fenced block (```json or bare ```) whose body
/// parses to an object. Prose before or after the block is ignored.
std::optional<json> extract_json_object(std::string_view raw);

}  // namespace askeval

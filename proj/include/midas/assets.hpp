#pragma once

// Versioned prompt templates and response schemas, compiled into the binary
// from assets/.

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "midas/json_util.hpp"

namespace midas::assets {

inline constexpr std::string_view kVersion = "v1";

// Relative path (e.g. "prompts/v1/scribe.txt") -> file contents.
const std::map<std::string, std::string>& embedded();

// Throws NotFound for unknown paths.
const std::string& get(const std::string& path);

const std::string& prompt_template(std::string_view name);
const json& schema(std::string_view name);

// Replaces every {name} placeholder with vars[name]. Strings are inserted
// verbatim, string arrays as "- item" lines, anything else as compact JSON.
// A placeholder without a matching variable is an InvalidInput error.
std::string render(std::string_view text, const json& vars);

}  // namespace midas::assets

namespace midas {

// Validates `value` against the subset of JSON Schema used by the bundled
// schemas: type, properties, required, additionalProperties (bool), items,
// minItems, maxItems, minLength, minimum, maximum, enum. Returns the first
// violation as "<path>: <message>".
std::optional<std::string> schema_violation(const json& value, const json& schema, const std::string& path = "$");

}  // namespace midas

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace testutil {

/// Validator for the JSON Schema subset the published schemas use:
/// type, properties, required, items (single schema), enum, minimum,
/// and boolean additionalProperties. Returns human-readable violations;
/// empty means valid.
inline void schema_check_node(const nlohmann::json& schema,
                              const nlohmann::json& value, const std::string& where,
                              std::vector<std::string>& violations) {
    if (schema.contains("type")) {
        const std::string type = schema["type"].get<std::string>();
        const bool ok = (type == "object" && value.is_object()) ||
                        (type == "array" && value.is_array()) ||
                        (type == "string" && value.is_string()) ||
                        (type == "boolean" && value.is_boolean()) ||
                        (type == "integer" && value.is_number_integer()) ||
                        (type == "number" && value.is_number());
        if (!ok) {
            violations.push_back(where + ": expected type " + type + ", got " +
                                 value.type_name());
            return;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& candidate : schema["enum"])
            if (candidate == value) found = true;
        if (!found)
            violations.push_back(where + ": value " + value.dump() +
                                 " not in enum " + schema["enum"].dump());
    }
    if (schema.contains("minimum") && value.is_number() &&
        value.get<double>() < schema["minimum"].get<double>())
        violations.push_back(where + ": " + value.dump() + " below minimum " +
                             schema["minimum"].dump());
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!value.contains(key.get<std::string>()))
                    violations.push_back(where + ": missing required key " +
                                         key.get<std::string>());
        if (schema.contains("properties"))
            for (auto it = schema["properties"].begin();
                 it != schema["properties"].end(); ++it)
                if (value.contains(it.key()))
                    schema_check_node(it.value(), value[it.key()],
                                      where + "." + it.key(), violations);
        if (schema.contains("additionalProperties") &&
            schema["additionalProperties"].is_boolean() &&
            !schema["additionalProperties"].get<bool>()) {
            for (auto it = value.begin(); it != value.end(); ++it)
                if (!schema.contains("properties") ||
                    !schema["properties"].contains(it.key()))
                    violations.push_back(where + ": unexpected key " + it.key());
        }
    }
    if (value.is_array() && schema.contains("items")) {
        std::size_t i = 0;
        for (const auto& element : value)
            schema_check_node(schema["items"], element,
                              where + "[" + std::to_string(i++) + "]", violations);
    }
}

inline std::vector<std::string> schema_violations(const nlohmann::json& schema,
                                                  const nlohmann::json& value) {
    std::vector<std::string> violations;
    schema_check_node(schema, value, "$", violations);
    return violations;
}

}  // namespace testutil

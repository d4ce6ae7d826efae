#pragma once

#include <json.hpp>
#include <string>

namespace qrem {

/// Write-to-temp-then-rename so readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);
void atomic_write_json(const std::string& path, const nlohmann::json& j, int indent = 1);

std::string read_text(const std::string& path);
nlohmann::json read_json(const std::string& path);

} // namespace qrem

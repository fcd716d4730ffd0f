#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ckt {

/// JSON-lines files with a mandatory header line. The header carries a
/// "format" tag checked on read; record lines follow one per line.
/// Writes are atomic (temp file + rename).

void write_jsonl(const std::string& path, const nlohmann::json& header,
                 const std::vector<nlohmann::json>& records);

struct JsonlFile {
    nlohmann::json header;
    std::vector<nlohmann::json> records;
};

/// Parse failures report the 1-based line number.
JsonlFile read_jsonl(const std::string& path, const std::string& expected_format);

/// Atomic whole-file text write.
void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

bool file_exists(const std::string& path);

}  // namespace ckt

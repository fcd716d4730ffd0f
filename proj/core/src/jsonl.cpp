#include "ckt/jsonl.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <sys/stat.h>

#include "ckt/errors.hpp"

namespace ckt {

using nlohmann::json;

namespace {

json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ValidationError("cannot open '" + tmp + "' for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw ValidationError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw ValidationError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

bool file_exists(const std::string& path) {
    struct stat st{};
    return ::stat(path.c_str(), &st) == 0;
}

void write_jsonl(const std::string& path, const json& header,
                 const std::vector<json>& records) {
    std::ostringstream os;
    os << header.dump() << '\n';
    for (const auto& r : records) os << r.dump() << '\n';
    write_text_file(path, os.str());
}

JsonlFile read_jsonl(const std::string& path, const std::string& expected_format) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open '" + path + "'");
    JsonlFile out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": blank line");
        }
        json parsed = parse_line(line, path, line_no);
        if (line_no == 1) {
            if (!parsed.contains("format") || parsed["format"] != expected_format) {
                throw ParseError(path + ":1: expected header with format '" + expected_format +
                                 "'");
            }
            out.header = std::move(parsed);
        } else {
            out.records.push_back(std::move(parsed));
        }
    }
    if (line_no == 0) throw ParseError(path + ":1: missing header line");
    return out;
}

}  // namespace ckt

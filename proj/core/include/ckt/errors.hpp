#pragma once

#include <stdexcept>
#include <string>

namespace ckt {

// Error taxonomy shared by the whole pipeline. The CLI maps each type to a
// distinct exit code, so keep the set small and stable.

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

struct IndexError : std::runtime_error {
    explicit IndexError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct LookupError : std::runtime_error {
    explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ckt

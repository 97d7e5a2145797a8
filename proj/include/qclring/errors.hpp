#pragma once

#include <stdexcept>
#include <string>

namespace qclring {

// Base for all library errors. `kind()` is a short machine-readable tag.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse", m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error("validation", m) {}
};
struct RangeError : Error {
    explicit RangeError(const std::string& m) : Error("range", m) {}
};
struct GridError : Error {
    explicit GridError(const std::string& m) : Error("grid", m) {}
};
struct SolverError : Error {
    explicit SolverError(const std::string& m) : Error("solver", m) {}
};
struct InstabilityError : Error {
    explicit InstabilityError(const std::string& m) : Error("instability", m) {}
};
struct TruncationError : Error {
    explicit TruncationError(const std::string& m) : Error("truncation", m) {}
};
struct AnalysisError : Error {
    explicit AnalysisError(const std::string& m) : Error("analysis", m) {}
};

// Config problems carry the dotted path of the offending field.
struct ConfigError : Error {
    ConfigError(std::string path, const std::string& m)
        : Error("config", path + ": " + m), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace qclring

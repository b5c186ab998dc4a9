#pragma once

#include <stdexcept>
#include <string>

namespace gretel {

// Error taxonomy mapped onto CLI exit codes:
//   ConfigError -> 2, ValidationError (and ParseError) -> 3, StageError -> 4.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Validation failure tied to a specific line of an input file.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& msg)
        : ValidationError(file + ":" + std::to_string(line) + ": " + msg),
          file_(file),
          line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class StageError : public std::runtime_error {
public:
    StageError(const std::string& stage, const std::string& msg)
        : std::runtime_error("[" + stage + "] " + msg), stage_(stage) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace gretel

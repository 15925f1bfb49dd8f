#pragma once

#include <stdexcept>
#include <string>

namespace scenelab {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config: " + msg) {}
};

struct UnsupportedCategory : std::runtime_error {
    explicit UnsupportedCategory(const std::string& msg) : std::runtime_error("unsupported category: " + msg) {}
};

struct MalformedAtom : std::runtime_error {
    explicit MalformedAtom(const std::string& msg) : std::runtime_error("malformed atom: " + msg) {}
};

struct InvalidTrajectory : std::runtime_error {
    explicit InvalidTrajectory(const std::string& msg) : std::runtime_error("invalid trajectory: " + msg) {}
};

struct PermutationMismatch : std::runtime_error {
    explicit PermutationMismatch(const std::string& msg) : std::runtime_error("permutation mismatch: " + msg) {}
};

struct EmptyCategory : std::runtime_error {
    explicit EmptyCategory(const std::string& msg) : std::runtime_error("empty category: " + msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error("io: " + msg) {}
};

} // namespace scenelab

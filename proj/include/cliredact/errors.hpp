#pragma once

#include <stdexcept>
#include <string>

namespace cliredact {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data (bad JSON, bad embedding file, bad CSV row).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

/// Response tree violates a structural constraint.
class StructureError : public Error {
public:
    explicit StructureError(const std::string& msg) : Error(msg) {}
};

/// Response tree nesting exceeds the configured maximum.
class DepthError : public StructureError {
public:
    explicit DepthError(const std::string& msg) : StructureError(msg) {}
};

/// Invalid configuration value or mismatched component wiring.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Tensor/vector dimensions do not line up.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// Training cannot proceed (single-class labels, empty corpus, ...).
class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& msg) : Error(msg) {}
};

/// Evaluation is undefined for the given inputs (e.g. no positives).
class EvalError : public Error {
public:
    explicit EvalError(const std::string& msg) : Error(msg) {}
};

/// Dataset split cannot be formed.
class SplitError : public Error {
public:
    explicit SplitError(const std::string& msg) : Error(msg) {}
};

/// Synthetic corpus generation cannot satisfy the requested shape.
class GenerationError : public Error {
public:
    explicit GenerationError(const std::string& msg) : Error(msg) {}
};

/// Artifact file cannot be loaded (corrupt, truncated, wrong version).
class LoadError : public Error {
public:
    explicit LoadError(const std::string& msg) : Error(msg) {}
};

/// Requested capability does not exist for the given model kind.
class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

}  // namespace cliredact

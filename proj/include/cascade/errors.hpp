#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Configuration / schema / spec-file problems. Fatal for a run.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed schema (missing column, label column listed as feature, ...).
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Bad cell or label in the input data; message carries row/column context.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Feature selection could not produce a mask (e.g. buffer too small).
// Callers keep their previous mask.
struct SelectionError : std::runtime_error {
    explicit SelectionError(const std::string& what) : std::runtime_error(what) {}
};

// Model training failed (non-finite loss, single-class buffer, ...).
// Callers keep their previous model.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cascade

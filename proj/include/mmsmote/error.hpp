#pragma once

#include <stdexcept>
#include <string>

namespace mmsmote {

/// Input data is malformed or cannot support the requested operation.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An experiment or command configuration is invalid.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model-level failure (degenerate hyperplane, no eligible samples, ...).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mmsmote

// Copyright the pdh contributors. Licensed under the terms of the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <stdexcept>
#include <string>

namespace pdh {

/// Malformed or unreadable input data (files, datasets, codebooks).
/// The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss; surfaced instead of masked.
class TrainingDiverged : public DataError {
public:
    explicit TrainingDiverged(const std::string& what) : DataError(what) {}
};

}  // namespace pdh

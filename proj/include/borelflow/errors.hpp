// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_ERRORS_HPP
#define BORELFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace borelflow {

/// Bad run configuration (missing fields, inconsistent mode lists, ...).
/// Mapped to exit code 2 by the CLI.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (fixed-point divergence, blow-up, overflow).
/// Mapped to exit code 3 by the CLI.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Request outside the proven validity region (e.g. 1/t <= omega).
/// Mapped to exit code 4 by the CLI.
class validity_error : public std::runtime_error {
public:
    explicit validity_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace borelflow

#endif

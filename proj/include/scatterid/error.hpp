#pragma once

#include <stdexcept>
#include <string>

namespace scatterid {

/// Argument outside the documented domain of a numerical routine.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A discretized system could not be solved reliably (resonance, intersecting
/// curves, rank deficiency).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user configuration (CLI, JSON config, file headers).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline void require_domain(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

}  // namespace detail
}  // namespace scatterid

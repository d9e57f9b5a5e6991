#pragma once

#include <stdexcept>
#include <string>

namespace blelat {

/// Scenario or geometry parameters violate a construction invariant.
class invalid_params : public std::invalid_argument {
public:
    explicit invalid_params(const std::string& what) : std::invalid_argument(what) {}
};

/// Population violates an invariant (AIP <= 2*tau, empty population where
/// one is required, ...).
class invalid_population : public std::invalid_argument {
public:
    explicit invalid_population(const std::string& what) : std::invalid_argument(what) {}
};

/// Solver hit max_iterations before the residual dropped below tolerance.
class non_convergent : public std::runtime_error {
public:
    explicit non_convergent(const std::string& what) : std::runtime_error(what) {}
};

/// Some state provably never reaches absorption (or the iterate blew past the
/// divergence cap), so expected transition counts are infinite.
class non_absorbing : public std::runtime_error {
public:
    explicit non_absorbing(const std::string& what) : std::runtime_error(what) {}
};

}

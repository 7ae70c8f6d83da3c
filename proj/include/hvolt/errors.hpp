#pragma once

#include <stdexcept>

namespace hvolt {

/// A generator matrix that cannot produce a non-negative semigroup
/// (positive off-diagonal entry or negative row sum).
class InvalidGenerator : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bracketing failed below the search ceiling: the threshold equation
/// has no root for the given data.
class NoRoot : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shifted nonlinearity does not vanish at the shift point.
class InvalidShift : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Picard iterate carries negative entries beyond round-off.
class InvalidIterate : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A certificate constant fell outside (0,1): the geometric-rate
/// construction does not apply to this instance.
class CertificateFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The assumption gate rejected an instance and no override was given.
class AssumptionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A brute-force reference failed to produce a trustworthy trajectory.
class OracleFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or incomplete run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hvolt

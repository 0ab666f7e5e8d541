#pragma once

#include <stdexcept>
#include <string>

namespace retrieval {

// Invalid construction parameters (n_max, value_bits, width relations, ...).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Argument outside its mathematical domain (e.g. iterated log of a value <= 1).
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Value outside the declared range of an operation (key >= 2^u_bits, fingerprint
// wider than the bucket's current width, ...).
struct RangeError : std::out_of_range {
    explicit RangeError(const std::string& what) : std::out_of_range(what) {}
};

// A reducer chain does not contain the entries needed for the requested round.
struct ChainError : std::logic_error {
    explicit ChainError(const std::string& what) : std::logic_error(what) {}
};

// A value store was asked to insert beyond its declared capacity.
struct StoreFull : std::logic_error {
    explicit StoreFull(const std::string& what) : std::logic_error(what) {}
};

// The structure was asked to insert more than n_max keys.
struct CapacityExceeded : std::logic_error {
    explicit CapacityExceeded(const std::string& what) : std::logic_error(what) {}
};

// A key was inserted twice into a store that requires unique keys.
struct DuplicateKey : std::logic_error {
    explicit DuplicateKey(const std::string& what) : std::logic_error(what) {}
};

// A reduction produced equal images for two distinct fingerprints.
struct InjectivityViolation : std::logic_error {
    explicit InjectivityViolation(const std::string& what) : std::logic_error(what) {}
};

// A serialized snapshot failed validation (bad magic, truncated section, ...).
struct SnapshotError : std::runtime_error {
    explicit SnapshotError(const std::string& what) : std::runtime_error(what) {}
};

// No injective reduction found within the trial budget, retries included.
struct SearchExhausted : std::runtime_error {
    explicit SearchExhausted(const std::string& what) : std::runtime_error(what) {}
};

// fit_envelope needs at least six grid points with distinct abscissae.
struct DegenerateGrid : std::invalid_argument {
    explicit DegenerateGrid(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace retrieval

#pragma once

#include <stdexcept>
#include <string>

namespace sbc {

// Input outside the mathematical domain of an operation (non-finite values,
// probabilities outside (0,1)).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Parameters that make a formula singular, e.g. a zero relative SNR.
struct DegenerateInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BlocklengthTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rate at or above capacity: no finite airtime reaches the target.
struct InfeasibleRate : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Too few nodes for the quorum combinatorics of a consensus family.
struct DegenerateNetwork : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CatalogError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SizeError : std::length_error {
  using std::length_error::length_error;
};

// A derived sub-group (shard, committee, partition) below its family minimum.
struct ValidityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sbc

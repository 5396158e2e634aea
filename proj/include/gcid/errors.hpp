#pragma once

#include <stdexcept>
#include <string>

namespace gcid {

// Common exception vocabulary for the library.  Every failure that crosses a
// module boundary is one of these; callers that need finer detail parse the
// message.

struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when an integration step produces a non-finite value.  The message
// names the offending option index.
struct IntegrationDivergedError : std::runtime_error {
  explicit IntegrationDivergedError(const std::string& what, int option_index)
      : std::runtime_error(what), option(option_index) {}
  int option;
};

// solve() with every behavior weight at zero; caller must station-keep.
struct NoActiveBehaviorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transit objective requested with own position equal to the waypoint.
struct DegenerateGoalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wire bytes that cannot be decoded into an opinion message.
struct MalformedMessageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configuration file problems: unknown keys, missing sections, bad values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gcid

// Command-line front end. run_cli is the whole program minus main(), so tests
// can drive it in-process.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace dplane::cli {

/// Settings shared by the computing subcommands, validated before any work.
struct RunConfig {
  int d = 1;
  int n = 2;
  std::uint64_t seed = 0;
  std::uint64_t samples = 2;
  int threads = 1;

  /// Throws std::invalid_argument unless 1 <= d < n <= 16 and samples >= 2.
  void validate() const;
};

/// Exit codes: 0 success, 1 usage or input error, 3 a measurement missed its
/// tolerance.
inline constexpr int kExitTolerance = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dplane::cli

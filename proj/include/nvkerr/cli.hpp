#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace nvkerr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;  ///< domain, parse, I/O or ill-posed fit
inline constexpr int kExitUsage = 2;    ///< bad flags, missing required parameters, bad config

struct Environment {
  /// Returns the value of the `generated_at` field. The field is excluded from
  /// the reproducibility hash.
  std::function<std::string()> timestamp;
};

Environment default_environment();

/// Runs `nvkerr <args...>` (args excludes the program name). Output goes to
/// `out` unless `--out` names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env = default_environment());

/// FNV-1a 64-bit digest, hex encoded.
std::string fnv1a64_hex(std::string_view bytes);

/// Drops the `generated_at` line (CSV) or key (JSON) so two runs can be
/// compared byte-for-byte.
std::string strip_timestamp(const std::string& output);

}  // namespace nvkerr::cli

#pragma once

#include <stdexcept>
#include <string>

namespace retreg {

// Error codes surfaced by the library. The CLI maps them onto process exit
// codes: numerical degeneracies exit 3, everything else (bad input, contract
// violations, I/O) exits 2.
enum class Errc {
  invalid_argument,
  io_error,
  parse_error,
  bad_magic,
  bad_version,
  count_mismatch,
  non_finite,
  empty_cloud,
  duplicate_id,
  dim_mismatch,
  missing_file,
  no_negatives,
  over_occluded,
  degenerate,
  degenerate_split,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline int exit_code(Errc c) {
  return (c == Errc::degenerate || c == Errc::degenerate_split) ? 3 : 2;
}

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace retreg

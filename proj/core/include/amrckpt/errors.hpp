#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace amrckpt {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid domain, parameters, or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was called with its precondition unmet (e.g. stale guards).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Internal mesh invariant violated (unbalanced tree, uncovered region).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Level box not aligned to block granularity.
class AlignmentError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

/// Mesh structure broken: overlap, incomplete sibling quartet, nesting.
class StructureError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

/// Hydro update produced a non-physical state.
class SolverError : public Error {
 public:
  using Error::Error;
};

class IdentityOverflowError : public Error {
 public:
  using Error::Error;
};

/// A particle lies outside every leaf block.
class OwnershipError : public Error {
 public:
  using Error::Error;
};

/// mag_error called on arrays whose pairing is inconsistent.
class PairingError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Restored checkpoint is not a consistent simulation state.
class RestartError : public Error {
 public:
  using Error::Error;
};

/// Event set used after shutdown.
class LifecycleError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  BadMagic,
  VersionMismatch,
  Truncated,
  Overlap,
  MissingSection,
  ShapeMismatch,
  BadValue,
};

const char* to_string(FormatErrorKind kind);

/// Structured decode failure for FLXC containers.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, std::string section, const std::string& detail);

  FormatErrorKind kind() const noexcept { return kind_; }
  const std::string& section() const noexcept { return section_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  FormatErrorKind kind_;
  std::string section_;
  std::string detail_;
};

/// One failed background write, reported at event-set wait.
struct AsyncFailure {
  long long checkpoint_number = 0;
  std::string path;
  std::string cause;
};

class AsyncWriteError : public Error {
 public:
  explicit AsyncWriteError(std::vector<AsyncFailure> failures);

  const std::vector<AsyncFailure>& failures() const noexcept { return failures_; }

 private:
  std::vector<AsyncFailure> failures_;
};

}  // namespace amrckpt

#include "amrckpt/errors.hpp"

namespace amrckpt {

const char* to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::BadMagic: return "bad magic";
    case FormatErrorKind::VersionMismatch: return "version mismatch";
    case FormatErrorKind::Truncated: return "truncated section";
    case FormatErrorKind::Overlap: return "overlapping sections";
    case FormatErrorKind::MissingSection: return "missing section";
    case FormatErrorKind::ShapeMismatch: return "shape mismatch";
    case FormatErrorKind::BadValue: return "bad value";
  }
  return "format error";
}

FormatError::FormatError(FormatErrorKind kind, std::string section, const std::string& detail)
    : Error(std::string(to_string(kind)) + " [" + section + "]: " + detail),
      kind_(kind),
      section_(std::move(section)),
      detail_(detail) {}

namespace {

std::string describe(const std::vector<AsyncFailure>& failures) {
  std::string msg = std::to_string(failures.size()) + " asynchronous checkpoint write(s) failed:";
  for (const auto& f : failures) {
    msg += "\n  checkpoint " + std::to_string(f.checkpoint_number) + " (" + f.path + "): " + f.cause;
  }
  return msg;
}

}  // namespace

AsyncWriteError::AsyncWriteError(std::vector<AsyncFailure> failures)
    : Error(describe(failures)), failures_(std::move(failures)) {}

}  // namespace amrckpt

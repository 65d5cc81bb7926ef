#pragma once

#include <stdexcept>
#include <string>

namespace tsre {

/// Base for every error raised by the library. `kind()` is a short stable tag
/// used in record files and CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TSRE_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& what) : Error(tag, what) {}       \
  };

TSRE_DEFINE_ERROR(InvalidSizeError, "invalid-size")
TSRE_DEFINE_ERROR(TopologyError, "topology")
TSRE_DEFINE_ERROR(UnsupportedTopologyError, "unsupported-topology")
TSRE_DEFINE_ERROR(InvalidRotationError, "invalid-rotation")
TSRE_DEFINE_ERROR(ShapeError, "shape")
TSRE_DEFINE_ERROR(ResourceError, "resource")
TSRE_DEFINE_ERROR(NormalizationError, "normalization")
TSRE_DEFINE_ERROR(DomainError, "domain")
TSRE_DEFINE_ERROR(BoundaryMismatchError, "boundary-mismatch")
TSRE_DEFINE_ERROR(InsufficientDataError, "insufficient-data")
TSRE_DEFINE_ERROR(GroupingError, "grouping")
TSRE_DEFINE_ERROR(ExcitedStateFailure, "excited-state-failure")
TSRE_DEFINE_ERROR(ConfigError, "config")

#undef TSRE_DEFINE_ERROR

}  // namespace tsre

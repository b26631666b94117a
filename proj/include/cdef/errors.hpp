#pragma once

#include <stdexcept>
#include <string>

namespace cdef {

/// Base of every error raised by the library. The `kind()` string is stable
/// and ends up verbatim in reports.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define CDEF_DEFINE_ERROR(Name)                                                \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {}             \
  }

CDEF_DEFINE_ERROR(DegenerateSubspace);
CDEF_DEFINE_ERROR(DimensionMismatch);
CDEF_DEFINE_ERROR(NotImmersion);
CDEF_DEFINE_ERROR(NotConformal);
CDEF_DEFINE_ERROR(FrameAlignmentFailure);
CDEF_DEFINE_ERROR(OnExceptionalRay);
CDEF_DEFINE_ERROR(NotInCone);
CDEF_DEFINE_ERROR(NotConformallyRuled);
CDEF_DEFINE_ERROR(HypothesisOutOfRange);
CDEF_DEFINE_ERROR(NotIsometricPair);
CDEF_DEFINE_ERROR(SplitFailure);
CDEF_DEFINE_ERROR(RankJump);
CDEF_DEFINE_ERROR(ClaimViolation);
CDEF_DEFINE_ERROR(NoIntersection);
CDEF_DEFINE_ERROR(NotTransversal);
CDEF_DEFINE_ERROR(NotImmersionAtRadius);
CDEF_DEFINE_ERROR(ManifestError);
CDEF_DEFINE_ERROR(ExpressionError);

#undef CDEF_DEFINE_ERROR

} // namespace cdef

#pragma once

namespace cdef {

/// Numerical thresholds shared by every rank and signature decision.
///
/// `rank` is relative: a singular value counts as zero when it is below
/// `rank * sigma_max`. `absolute` is the floor applied when the whole matrix
/// is (numerically) zero, so that round-off in an identically vanishing form
/// is not promoted to rank one. `derivative` replaces `rank` wherever the
/// input was obtained by finite differences.
struct Tolerance {
  double rank = 1e-9;
  double absolute = 1e-10;
  double derivative = 1e-6;

  Tolerance loosened() const { return {derivative, derivative, derivative}; }
};

} // namespace cdef

#pragma once

// Derivative-free local minimisation used by the nullity searches.

#include <functional>

#include "cdef/linalg.hpp"

namespace cdef {

struct NelderMeadResult {
  Vec x;
  double value = 0.0;
  int evaluations = 0;
};

/// Nelder-Mead simplex from x0 with initial edge `scale`; stops when the
/// simplex values agree to `ftol` or after `max_evals` evaluations.
NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0,
                             double scale, double ftol = 1e-14, int max_evals = 4000);

/// Golden-section minimisation of a unimodal function on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b, double xtol = 1e-13);

} // namespace cdef

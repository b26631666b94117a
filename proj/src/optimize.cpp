#include "cdef/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cdef {

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0, double scale,
                             double ftol, int max_evals) {
  const int d = static_cast<int>(x0.size());
  std::vector<Vec> pts(d + 1, x0);
  std::vector<double> val(d + 1);
  for (int i = 0; i < d; ++i) pts[i + 1](i) += scale;
  int evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    return f(x);
  };
  for (int i = 0; i <= d; ++i) val[i] = eval(pts[i]);
  std::vector<int> order(d + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
    const int best = order.front(), worst = order.back(), second = order[d - 1 >= 0 ? d - 1 : 0];
    if (std::abs(val[worst] - val[best]) <= ftol) break;
    Vec centroid = Vec::Zero(d);
    for (int i = 0; i < d; ++i) centroid += pts[order[i]];
    centroid /= d;
    const Vec xr = centroid + (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < val[best]) {
      const Vec xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) pts[worst] = xe, val[worst] = fe;
      else pts[worst] = xr, val[worst] = fr;
    } else if (fr < val[second]) {
      pts[worst] = xr, val[worst] = fr;
    } else {
      const bool outside = fr < val[worst];
      const Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid)) : Vec(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = eval(xc);
      if (fc < std::min(fr, val[worst])) {
        pts[worst] = xc, val[worst] = fc;
      } else {
        for (int i = 0; i <= d; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          val[i] = eval(pts[i]);
        }
      }
    }
  }
  const int b = static_cast<int>(std::min_element(val.begin(), val.end()) - val.begin());
  return {pts[b], val[b], evals};
}

double golden_section(const std::function<double(double)>& f, double a, double b, double xtol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

} // namespace cdef

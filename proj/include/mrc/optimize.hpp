#pragma once

#include <cmath>
#include <stdexcept>

namespace mrc {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for a minimum of fn on [lo, hi]. Stops when the
/// bracket is narrower than rel_tol * |x| (absolute rel_tol at x = 0).
/// Only unimodality on the bracket is assumed, so non-smooth minima such
/// as |p(r)| at a simple zero are handled.
template <typename F>
ScalarMinimum golden_section_minimize(F&& fn, double lo, double hi, double rel_tol = 1e-10, int max_iter = 200) {
  if (!(lo < hi)) throw std::invalid_argument("mrc: golden section needs lo < hi");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c), fd = fn(d);
  int evals = 2;
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (a + b);
    if (b - a <= rel_tol * (mid != 0.0 ? std::abs(mid) : 1.0)) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
    ++evals;
  }
  return fc <= fd ? ScalarMinimum{c, fc, evals} : ScalarMinimum{d, fd, evals};
}

}  // namespace mrc

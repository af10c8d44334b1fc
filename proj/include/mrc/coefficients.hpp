#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

#include "mrc/specfun.hpp"

namespace mrc {

/// Expansion coefficients c_lm for l <= L, stored in flat mode order.
struct CoefficientSet {
  int L = 0;
  std::vector<cplx> values = std::vector<cplx>(1);

  static CoefficientSet zeros(int L) {
    if (L < 0) throw std::invalid_argument("mrc: truncation degree must be non-negative");
    return {L, std::vector<cplx>(static_cast<std::size_t>(mode_count(L)))};
  }

  cplx& at(ModeIndex mode) { return values.at(static_cast<std::size_t>(checked(mode))); }
  const cplx& at(ModeIndex mode) const { return values.at(static_cast<std::size_t>(checked(mode))); }

  std::size_t size() const noexcept { return values.size(); }

  /// Copy restricted (or zero-padded) to degree L_new.
  CoefficientSet truncated(int L_new) const {
    auto out = zeros(L_new);
    const std::size_t n = std::min(out.values.size(), values.size());
    std::copy_n(values.begin(), n, out.values.begin());
    return out;
  }

 private:
  int checked(ModeIndex mode) const {
    if (!mode.valid() || mode.ell > L) throw std::out_of_range("mrc: mode outside coefficient set");
    return mode.flat();
  }
};

}  // namespace mrc

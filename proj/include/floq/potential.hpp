#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "floq/errors.hpp"

namespace floq {

// p-periodic on-site potential in tight-binding units. Indexing is 1-based
// and cyclic, matching the usual V(n+p) = V(n) convention.
class PeriodicPotential {
 public:
  explicit PeriodicPotential(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) raise(errc::config_error, "potential: empty");
    for (double v : values_)
      if (!std::isfinite(v)) raise(errc::config_error, "potential: non-finite entry");
  }

  int period() const { return static_cast<int>(values_.size()); }

  // V(n) for any lattice site n (1-based within a cell).
  double at(std::int64_t n) const {
    const std::int64_t p = period();
    std::int64_t m = (n - 1) % p;
    if (m < 0) m += p;
    return values_[static_cast<std::size_t>(m)];
  }

  const std::vector<double>& values() const { return values_; }

  double sup_norm() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
  }

  // Cyclic shift V(n) -> V(n+s); the shifted operator is unitarily
  // equivalent by lattice translation.
  PeriodicPotential shifted(int s) const {
    const int p = period();
    std::vector<double> w(values_.size());
    for (int n = 1; n <= p; ++n) w[n - 1] = at(n + s);
    return PeriodicPotential(std::move(w));
  }

 private:
  std::vector<double> values_;
};

}  // namespace floq

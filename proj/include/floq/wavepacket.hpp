#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace floq {

// Finitely supported complex sequence on the lattice. Norms are computed on
// construction; instances are immutable values.
class WavePacket {
 public:
  WavePacket() : offset_(0) {}
  WavePacket(std::int64_t offset, std::vector<std::complex<double>> amps)
      : offset_(offset), amps_(std::move(amps)) {
    recompute_norms();
  }

  static WavePacket delta(std::int64_t site, std::complex<double> amp = 1.0) {
    return WavePacket(site, {amp});
  }

  std::int64_t offset() const { return offset_; }
  std::int64_t support_end() const { return offset_ + static_cast<std::int64_t>(amps_.size()); }
  const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

  std::complex<double> at(std::int64_t n) const {
    const std::int64_t i = n - offset_;
    if (i < 0 || i >= static_cast<std::int64_t>(amps_.size())) return 0.0;
    return amps_[static_cast<std::size_t>(i)];
  }

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  double linf() const { return linf_; }

  WavePacket scaled(std::complex<double> c) const {
    std::vector<std::complex<double>> a(amps_);
    for (auto& v : a) v *= c;
    return WavePacket(offset_, std::move(a));
  }

  // Drops a zero (or negligible) halo so the support stays tight.
  WavePacket trimmed(double eps = 0.0) const {
    std::int64_t lo = 0, hi = static_cast<std::int64_t>(amps_.size());
    while (lo < hi && std::abs(amps_[static_cast<std::size_t>(lo)]) <= eps) ++lo;
    while (hi > lo && std::abs(amps_[static_cast<std::size_t>(hi - 1)]) <= eps) --hi;
    std::vector<std::complex<double>> a(amps_.begin() + lo, amps_.begin() + hi);
    return WavePacket(offset_ + lo, std::move(a));
  }

 private:
  void recompute_norms() {
    l1_ = l2_ = linf_ = 0.0;
    double sq = 0.0;
    for (const auto& v : amps_) {
      const double a = std::abs(v);
      l1_ += a;
      sq += a * a;
      linf_ = std::max(linf_, a);
    }
    l2_ = std::sqrt(sq);
  }

  std::int64_t offset_;
  std::vector<std::complex<double>> amps_;
  double l1_ = 0.0, l2_ = 0.0, linf_ = 0.0;
};

}  // namespace floq

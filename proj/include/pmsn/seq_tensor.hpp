#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

#include "pmsn/error.hpp"

namespace pmsn {

enum class Precision { kSingle, kDouble };

template <typename Real>
constexpr Precision precision_of() {
  static_assert(std::is_same_v<Real, float> || std::is_same_v<Real, double>);
  return std::is_same_v<Real, float> ? Precision::kSingle : Precision::kDouble;
}

constexpr std::string_view to_string(Precision p) {
  return p == Precision::kSingle ? "single" : "double";
}

/// Batched real sequence with layout [batch, time, feature]; the feature
/// axis is innermost.
template <typename Real>
class SeqTensor {
 public:
  using value_type = Real;

  SeqTensor() = default;
  SeqTensor(std::size_t batch, std::size_t time, std::size_t features, Real fill = Real(0))
      : batch_(batch), time_(time), features_(features), data_(batch * time * features, fill) {}

  std::size_t batch() const noexcept { return batch_; }
  std::size_t time() const noexcept { return time_; }
  std::size_t features() const noexcept { return features_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  static constexpr Precision precision() { return precision_of<Real>(); }

  Real& operator()(std::size_t b, std::size_t t, std::size_t f) {
    return data_[(b * time_ + t) * features_ + f];
  }
  const Real& operator()(std::size_t b, std::size_t t, std::size_t f) const {
    return data_[(b * time_ + t) * features_ + f];
  }

  std::span<Real> data() noexcept { return data_; }
  std::span<const Real> data() const noexcept { return data_; }

  /// Row of `features()` values at (b, t).
  std::span<Real> row(std::size_t b, std::size_t t) {
    return {data_.data() + (b * time_ + t) * features_, features_};
  }
  std::span<const Real> row(std::size_t b, std::size_t t) const {
    return {data_.data() + (b * time_ + t) * features_, features_};
  }

  bool same_shape(const SeqTensor& o) const noexcept {
    return batch_ == o.batch_ && time_ == o.time_ && features_ == o.features_;
  }

  template <typename Other>
  SeqTensor<Other> cast() const {
    SeqTensor<Other> out(batch_, time_, features_);
    std::transform(data_.begin(), data_.end(), out.data().begin(),
                   [](Real v) { return static_cast<Other>(v); });
    return out;
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  std::size_t batch_ = 0, time_ = 0, features_ = 0;
  std::vector<Real> data_;
};

/// Lane-major copy of a SeqTensor: layout [batch, feature, time], so each
/// (batch, feature) lane is contiguous along time. Lanes are held in double.
struct LaneMajor {
  std::size_t batch = 0, time = 0, features = 0;
  std::vector<double> data;

  std::span<double> lane(std::size_t b, std::size_t f) {
    return {data.data() + (b * features + f) * time, time};
  }
  std::span<const double> lane(std::size_t b, std::size_t f) const {
    return {data.data() + (b * features + f) * time, time};
  }
};

template <typename Real>
LaneMajor to_lane_major(const SeqTensor<Real>& x) {
  LaneMajor out{x.batch(), x.time(), x.features(), {}};
  out.data.resize(x.size());
  for (std::size_t b = 0; b < x.batch(); ++b)
    for (std::size_t t = 0; t < x.time(); ++t) {
      auto r = x.row(b, t);
      for (std::size_t f = 0; f < x.features(); ++f)
        out.data[(b * x.features() + f) * x.time() + t] = static_cast<double>(r[f]);
    }
  return out;
}

template <typename Real>
SeqTensor<Real> from_lane_major(const LaneMajor& x) {
  SeqTensor<Real> out(x.batch, x.time, x.features);
  for (std::size_t b = 0; b < x.batch; ++b)
    for (std::size_t f = 0; f < x.features; ++f) {
      auto l = x.lane(b, f);
      for (std::size_t t = 0; t < x.time; ++t) out(b, t, f) = static_cast<Real>(l[t]);
    }
  return out;
}

/// Complex companion of SeqTensor holding split real/imaginary planes.
class ComplexSeq {
 public:
  ComplexSeq() = default;
  ComplexSeq(std::size_t batch, std::size_t time, std::size_t features)
      : batch_(batch), time_(time), features_(features),
        re_(batch * time * features, 0.0), im_(batch * time * features, 0.0) {}

  std::size_t batch() const noexcept { return batch_; }
  std::size_t time() const noexcept { return time_; }
  std::size_t features() const noexcept { return features_; }
  std::size_t size() const noexcept { return re_.size(); }

  std::size_t index(std::size_t b, std::size_t t, std::size_t f) const noexcept {
    return (b * time_ + t) * features_ + f;
  }
  std::complex<double> at(std::size_t b, std::size_t t, std::size_t f) const {
    const auto i = index(b, t, f);
    return {re_[i], im_[i]};
  }
  void set(std::size_t b, std::size_t t, std::size_t f, std::complex<double> v) {
    const auto i = index(b, t, f);
    re_[i] = v.real();
    im_[i] = v.imag();
  }

  std::span<double> re() noexcept { return re_; }
  std::span<double> im() noexcept { return im_; }
  std::span<const double> re() const noexcept { return re_; }
  std::span<const double> im() const noexcept { return im_; }

 private:
  std::size_t batch_ = 0, time_ = 0, features_ = 0;
  std::vector<double> re_, im_;
};

}  // namespace pmsn

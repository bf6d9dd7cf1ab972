#include "pmsn/scan.hpp"

#include "pmsn/parallel_for.hpp"

namespace pmsn {

void inclusive_scan_lane(std::span<double> lane) noexcept {
  double acc = 0.0;
  for (double& v : lane) {
    acc += v;
    v = acc;
  }
}

template <typename Real>
SeqTensor<Real> prefix_sum(const SeqTensor<Real>& x, int workers) {
  SeqTensor<Real> out(x.batch(), x.time(), x.features());
  const std::size_t lanes = x.batch() * x.features();
  parallel_for(lanes, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t lane = begin; lane < end; ++lane) {
      const std::size_t b = lane / x.features(), f = lane % x.features();
      double acc = 0.0;
      for (std::size_t t = 0; t < x.time(); ++t) {
        acc += static_cast<double>(x(b, t, f));
        out(b, t, f) = static_cast<Real>(acc);
      }
    }
  });
  return out;
}

template SeqTensor<float> prefix_sum(const SeqTensor<float>&, int);
template SeqTensor<double> prefix_sum(const SeqTensor<double>&, int);

}  // namespace pmsn

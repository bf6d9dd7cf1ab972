#pragma once

#include <span>

#include "pmsn/seq_tensor.hpp"

namespace pmsn {

/// Inclusive prefix sum along time for every (batch, feature) lane.
/// Accumulation runs in double regardless of the storage precision.
template <typename Real>
SeqTensor<Real> prefix_sum(const SeqTensor<Real>& x, int workers = 1);

/// In-place inclusive scan of one contiguous lane.
void inclusive_scan_lane(std::span<double> lane) noexcept;

}  // namespace pmsn

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pmsn/seq_tensor.hpp"

namespace pmsn {

/// Contents of one IDX file. Image files (magic 0x00000803) hold pixel
/// values scaled to [0, 1]; label files (0x00000801) hold raw byte values.
struct IdxFile {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  bool is_images() const noexcept { return magic == 0x00000803u; }
  bool is_labels() const noexcept { return magic == 0x00000801u; }
};

/// Throws ParseError with the byte offset on a bad magic or truncation.
IdxFile parse_idx(std::span<const std::uint8_t> bytes);
IdxFile load_idx(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_idx_images(std::span<const std::uint8_t> pixels, std::uint32_t count,
                                            std::uint32_t rows, std::uint32_t cols);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Labelled sequence set: x is (samples, T, channels).
struct Dataset {
  SeqTensor<float> x;
  std::vector<int> y;
  int classes = 0;

  std::size_t size() const noexcept { return y.size(); }
  /// Copies the listed samples, in order.
  template <typename Real>
  SeqTensor<Real> gather(std::span<const std::size_t> idx) const;
  std::vector<int> gather_labels(std::span<const std::size_t> idx) const;
};

enum class SequenceTransform { kRaster, kPermuted, kColumnScan };

struct SequenceSpec {
  SequenceTransform transform = SequenceTransform::kRaster;
  /// Pixel permutation for kPermuted; empty means draw one from `seed`.
  std::vector<std::size_t> permutation;
  std::uint64_t seed = 0;
  std::size_t channels = 1;
};

/// Fixed random bijection on [0, n).
std::vector<std::size_t> make_permutation(std::size_t n, std::uint64_t seed);

/// images: count x rows x cols x channels, row-major. Raster and permuted
/// yield (count, rows*cols, channels); column scan yields
/// (count, cols, rows*channels).
SeqTensor<float> make_sequence(std::span<const float> images, std::size_t count, std::size_t rows,
                               std::size_t cols, const SequenceSpec& spec);

/// Class cue (one-hot over n_classes channels) during the first
/// cue_window steps, zero-mean Gaussian noise of std `noise` on every
/// channel afterwards. Labels are drawn uniformly.
Dataset gen_delayed_recall(std::size_t n_samples, std::size_t T, int n_classes,
                           std::size_t cue_window, std::uint64_t seed, double noise = 1.0);

/// Samples of an IDX image/label pair whose label is in `digits`, relabelled 0..k-1
/// in the order of `digits`, at most `limit` samples (0 = all).
Dataset load_idx_digits(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::span<const int> digits, std::size_t limit, const SequenceSpec& spec);

}  // namespace pmsn

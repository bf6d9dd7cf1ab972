#include "pmsn/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

#include "pmsn/error.hpp"

namespace pmsn {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

IdxFile parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ParseError("IDX file shorter than its magic number", bytes.size());
  IdxFile f;
  f.magic = read_be32(bytes, 0);
  if (!f.is_images() && !f.is_labels()) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", f.magic);
    throw ParseError(std::string("bad IDX magic ") + buf + " (expected 0x00000803 or 0x00000801)", 0);
  }
  const std::size_t ndims = f.magic & 0xFFu;
  if (bytes.size() < 4 + 4 * ndims) throw ParseError("IDX header truncated", bytes.size());
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    f.dims.push_back(read_be32(bytes, 4 + 4 * d));
    count *= f.dims.back();
  }
  const std::size_t body = 4 + 4 * ndims;
  if (bytes.size() - body < count)
    throw ParseError("IDX data truncated: header declares " + std::to_string(count) + " bytes, " +
                         std::to_string(bytes.size() - body) + " present",
                     bytes.size());
  f.values.resize(count);
  const float scale = f.is_images() ? 1.0f / 255.0f : 1.0f;
  for (std::size_t i = 0; i < count; ++i) f.values[i] = static_cast<float>(bytes[body + i]) * scale;
  return f;
}

IdxFile load_idx(const std::filesystem::path& path) { return parse_idx(read_file(path)); }

std::vector<std::uint8_t> encode_idx_images(std::span<const std::uint8_t> pixels, std::uint32_t count,
                                            std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != std::size_t{count} * rows * cols)
    throw InvalidArgument("pixel buffer does not match count x rows x cols");
  std::vector<std::uint8_t> out;
  put_be32(out, 0x00000803u);
  put_be32(out, count);
  put_be32(out, rows);
  put_be32(out, cols);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, 0x00000801u);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

template <typename Real>
SeqTensor<Real> Dataset::gather(std::span<const std::size_t> idx) const {
  const std::size_t T = x.time(), C = x.features();
  SeqTensor<Real> out(idx.size(), T, C);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= size()) throw InvalidArgument("sample index out of range");
    for (std::size_t t = 0; t < T; ++t) {
      auto src = x.row(idx[k], t);
      auto dst = out.row(k, t);
      for (std::size_t c = 0; c < C; ++c) dst[c] = static_cast<Real>(src[c]);
    }
  }
  return out;
}

template SeqTensor<float> Dataset::gather(std::span<const std::size_t>) const;
template SeqTensor<double> Dataset::gather(std::span<const std::size_t>) const;

std::vector<int> Dataset::gather_labels(std::span<const std::size_t> idx) const {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(y.at(i));
  return out;
}

std::vector<std::size_t> make_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Explicit Fisher-Yates so the permutation does not depend on the
  // standard library's shuffle.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

SeqTensor<float> make_sequence(std::span<const float> images, std::size_t count, std::size_t rows,
                               std::size_t cols, const SequenceSpec& spec) {
  const std::size_t C = spec.channels, npix = rows * cols;
  if (images.size() != count * npix * C) throw InvalidArgument("image buffer does not match its shape");
  if (spec.transform == SequenceTransform::kColumnScan) {
    SeqTensor<float> out(count, cols, rows * C);
    for (std::size_t n = 0; n < count; ++n)
      for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t ch = 0; ch < C; ++ch)
            out(n, c, r * C + ch) = images[((n * rows + r) * cols + c) * C + ch];
    return out;
  }
  std::vector<std::size_t> perm;
  if (spec.transform == SequenceTransform::kPermuted) {
    perm = spec.permutation.empty() ? make_permutation(npix, spec.seed) : spec.permutation;
    if (perm.size() != npix) throw InvalidArgument("permutation length must equal rows*cols");
    std::vector<bool> seen(npix, false);
    for (auto v : perm) {
      if (v >= npix || seen[v]) throw InvalidArgument("pixel permutation is not a bijection");
      seen[v] = true;
    }
  }
  SeqTensor<float> out(count, npix, C);
  for (std::size_t n = 0; n < count; ++n)
    for (std::size_t t = 0; t < npix; ++t) {
      const std::size_t src = perm.empty() ? t : perm[t];
      for (std::size_t ch = 0; ch < C; ++ch) out(n, t, ch) = images[(n * npix + src) * C + ch];
    }
  return out;
}

Dataset gen_delayed_recall(std::size_t n_samples, std::size_t T, int n_classes, std::size_t cue_window,
                           std::uint64_t seed, double noise) {
  if (n_classes < 2) throw InvalidArgument("delayed recall needs at least 2 classes");
  if (cue_window == 0 || cue_window >= T) throw InvalidArgument("cue window must lie in [1, T)");
  if (noise < 0) throw InvalidArgument("noise level must be non-negative");
  Dataset d;
  d.classes = n_classes;
  d.x = SeqTensor<float>(n_samples, T, static_cast<std::size_t>(n_classes));
  d.y.resize(n_samples);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const int label = static_cast<int>(rng() % static_cast<std::uint64_t>(n_classes));
    d.y[n] = label;
    for (std::size_t t = 0; t < cue_window; ++t) d.x(n, t, static_cast<std::size_t>(label)) = 1.0f;
    for (std::size_t t = cue_window; t < T; ++t)
      for (int c = 0; c < n_classes; ++c)
        d.x(n, t, static_cast<std::size_t>(c)) = static_cast<float>(noise * gauss(rng));
  }
  return d;
}

Dataset load_idx_digits(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::span<const int> digits, std::size_t limit, const SequenceSpec& spec) {
  const IdxFile im = load_idx(images);
  const IdxFile lb = load_idx(labels);
  if (!im.is_images() || im.dims.size() != 3) throw ParseError(images.string() + " is not an IDX image file", 0);
  if (!lb.is_labels() || lb.dims.size() != 1) throw ParseError(labels.string() + " is not an IDX label file", 0);
  if (im.dims[0] != lb.dims[0])
    throw ParseError("image and label files disagree on sample count", 4);
  const std::size_t rows = im.dims[1], cols = im.dims[2], npix = rows * cols;
  std::vector<float> pix;
  Dataset d;
  d.classes = static_cast<int>(digits.size());
  for (std::size_t n = 0; n < im.dims[0]; ++n) {
    const int lab = static_cast<int>(lb.values[n]);
    const auto it = std::find(digits.begin(), digits.end(), lab);
    if (it == digits.end()) continue;
    d.y.push_back(static_cast<int>(it - digits.begin()));
    pix.insert(pix.end(), im.values.begin() + static_cast<std::ptrdiff_t>(n * npix),
               im.values.begin() + static_cast<std::ptrdiff_t>((n + 1) * npix));
    if (limit != 0 && d.y.size() == limit) break;
  }
  d.x = make_sequence(pix, d.y.size(), rows, cols, spec);
  return d;
}

}  // namespace pmsn

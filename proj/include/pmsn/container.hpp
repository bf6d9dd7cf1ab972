#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "pmsn/neuron.hpp"

namespace pmsn {

/// Versioned binary tensor container.
///
/// Layout: the 5-byte magic "PMSN1", a little-endian uint64 header length,
/// a JSON header of that many bytes, then raw little-endian arrays. The
/// header holds {"version", "precision", "tensors": [{name, dtype, shape,
/// offset, nbytes}], "meta"}; offsets count from the first byte after the
/// header. dtype is "f64" or "c128" (interleaved real, imaginary).
class Container {
 public:
  static constexpr std::string_view kMagic = "PMSN1";
  static constexpr int kVersion = 1;

  struct Tensor {
    std::string dtype;
    std::vector<std::uint64_t> shape;
    std::vector<double> real;
    std::vector<std::complex<double>> complex;
  };

  void put(const std::string& name, std::span<const double> values,
           std::vector<std::uint64_t> shape = {});
  void put(const std::string& name, std::span<const std::complex<double>> values,
           std::vector<std::uint64_t> shape = {});

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  /// Throw ParseError naming the tensor when it is missing or has the
  /// wrong dtype.
  const std::vector<double>& real(const std::string& name) const;
  const std::vector<std::complex<double>>& complex(const std::string& name) const;
  const Tensor& tensor(const std::string& name) const;
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }
  std::string precision = "double";

  std::vector<std::uint8_t> serialize() const;
  static Container deserialize(std::span<const std::uint8_t> bytes);

  /// IoError when the file cannot be written or read.
  void write(const std::filesystem::path& path) const;
  static Container read(const std::filesystem::path& path);

 private:
  std::map<std::string, Tensor> tensors_;
  nlohmann::json meta_ = nlohmann::json::object();
};

/// Stores every field of `p` under names prefixed by `prefix`.
void put_params(Container& c, const std::string& prefix, const PmsnParams& p);
PmsnParams get_params(const Container& c, const std::string& prefix);

void save_params(const PmsnParams& p, const std::filesystem::path& path);
PmsnParams load_params(const std::filesystem::path& path);

}  // namespace pmsn

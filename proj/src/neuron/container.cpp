#include "pmsn/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pmsn/error.hpp"

namespace pmsn {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

using json = nlohmann::json;

namespace {

std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

void Container::put(const std::string& name, std::span<const double> values,
                    std::vector<std::uint64_t> shape) {
  if (shape.empty()) shape = {values.size()};
  if (element_count(shape) != values.size())
    throw InvalidArgument("tensor '" + name + "' shape does not match its length");
  tensors_[name] = Tensor{"f64", std::move(shape), {values.begin(), values.end()}, {}};
}

void Container::put(const std::string& name, std::span<const std::complex<double>> values,
                    std::vector<std::uint64_t> shape) {
  if (shape.empty()) shape = {values.size()};
  if (element_count(shape) != values.size())
    throw InvalidArgument("tensor '" + name + "' shape does not match its length");
  tensors_[name] = Tensor{"c128", std::move(shape), {}, {values.begin(), values.end()}};
}

const Container::Tensor& Container::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ParseError("container has no tensor '" + name + "'", 0);
  return it->second;
}

const std::vector<double>& Container::real(const std::string& name) const {
  const auto& t = tensor(name);
  if (t.dtype != "f64") throw ParseError("tensor '" + name + "' is not f64", 0);
  return t.real;
}

const std::vector<std::complex<double>>& Container::complex(const std::string& name) const {
  const auto& t = tensor(name);
  if (t.dtype != "c128") throw ParseError("tensor '" + name + "' is not c128", 0);
  return t.complex;
}

std::vector<std::uint8_t> Container::serialize() const {
  json header;
  header["version"] = kVersion;
  header["precision"] = precision;
  header["meta"] = meta_;
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors_) {
    const std::uint64_t nbytes = t.dtype == "f64" ? t.real.size() * 8 : t.complex.size() * 16;
    header["tensors"].push_back(
        {{"name", name}, {"dtype", t.dtype}, {"shape", t.shape}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(kMagic.size() + 8 + text.size() + offset);
  std::memcpy(out.data(), kMagic.data(), kMagic.size());
  const std::uint64_t len = text.size();
  std::memcpy(out.data() + kMagic.size(), &len, 8);
  std::memcpy(out.data() + kMagic.size() + 8, text.data(), text.size());
  std::uint8_t* body = out.data() + kMagic.size() + 8 + text.size();
  for (const auto& [name, t] : tensors_) {
    if (t.dtype == "f64") {
      std::memcpy(body, t.real.data(), t.real.size() * 8);
      body += t.real.size() * 8;
    } else {
      std::memcpy(body, t.complex.data(), t.complex.size() * 16);
      body += t.complex.size() * 16;
    }
  }
  return out;
}

Container Container::deserialize(std::span<const std::uint8_t> bytes) {
  const std::size_t prefix = kMagic.size() + 8;
  if (bytes.size() < prefix) throw ParseError("container truncated before header length", bytes.size());
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
    throw ParseError("bad container magic (expected PMSN1)", 0);
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + kMagic.size(), 8);
  if (len > bytes.size() - prefix) throw ParseError("container header runs past end of file", kMagic.size());
  json header;
  try {
    header = json::parse(bytes.begin() + prefix, bytes.begin() + prefix + static_cast<std::ptrdiff_t>(len));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("container header is not valid JSON: ") + e.what(), prefix + e.byte);
  }
  const std::size_t body = prefix + len;
  Container c;
  try {
    if (header.at("version").get<int>() != kVersion)
      throw ParseError("unsupported container version " + header.at("version").dump(), prefix);
    c.precision = header.value("precision", "double");
    c.meta_ = header.value("meta", json::object());
    for (const auto& entry : header.at("tensors")) {
      Tensor t;
      const auto name = entry.at("name").get<std::string>();
      t.dtype = entry.at("dtype").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<std::uint64_t>>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
      const std::uint64_t width = t.dtype == "f64" ? 8 : t.dtype == "c128" ? 16 : 0;
      if (width == 0) throw ParseError("tensor '" + name + "' has unknown dtype " + t.dtype, prefix);
      if (nbytes != element_count(t.shape) * width)
        throw ParseError("tensor '" + name + "' byte count does not match its shape", prefix);
      if (offset > bytes.size() - body || nbytes > bytes.size() - body - offset)
        throw ParseError("tensor '" + name + "' data runs past end of file", body + offset);
      const std::uint8_t* src = bytes.data() + body + offset;
      if (width == 8) {
        t.real.resize(nbytes / 8);
        std::memcpy(t.real.data(), src, nbytes);
      } else {
        t.complex.resize(nbytes / 16);
        std::memcpy(t.complex.data(), src, nbytes);
      }
      c.tensors_[name] = std::move(t);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed container header: ") + e.what(), prefix);
  }
  return c;
}

void Container::write(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

Container Container::read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

void put_params(Container& c, const std::string& prefix, const PmsnParams& p) {
  const std::vector<std::uint64_t> shape{p.neurons, p.modes};
  c.put(prefix + "lambda_dt", p.lambda_dt, shape);
  c.put(prefix + "phi_c", p.phi_c, shape);
  c.put(prefix + "phi_s", p.phi_s, shape);
  c.put(prefix + "dt", p.dt);
  c.put(prefix + "gamma_n", p.gamma_n);
  const double scalars[] = {p.theta, p.alpha_out};
  c.put(prefix + "theta_alpha", scalars);
}

PmsnParams get_params(const Container& c, const std::string& prefix) {
  const auto& shape = c.tensor(prefix + "lambda_dt").shape;
  if (shape.size() != 2) throw ParseError("tensor '" + prefix + "lambda_dt' must be 2-D", 0);
  PmsnParams p(shape[0], shape[1]);
  p.lambda_dt = c.complex(prefix + "lambda_dt");
  p.phi_c = c.complex(prefix + "phi_c");
  p.phi_s = c.complex(prefix + "phi_s");
  p.dt = c.real(prefix + "dt");
  p.gamma_n = c.real(prefix + "gamma_n");
  const auto& s = c.real(prefix + "theta_alpha");
  if (s.size() != 2) throw ParseError("tensor '" + prefix + "theta_alpha' must hold 2 values", 0);
  p.theta = s[0];
  p.alpha_out = s[1];
  p.validate();
  return p;
}

void save_params(const PmsnParams& p, const std::filesystem::path& path) {
  Container c;
  put_params(c, "", p);
  c.meta()["kind"] = "pmsn_params";
  c.write(path);
}

PmsnParams load_params(const std::filesystem::path& path) { return get_params(Container::read(path), ""); }

}  // namespace pmsn

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pmsn/bench.hpp"
#include "pmsn/error.hpp"
#include "pmsn/neuron.hpp"
#include "pmsn/parallel.hpp"
#include "pmsn/version.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

pmsn::SeqTensor<double> to_tensor(const Array& a) {
  if (a.ndim() != 3) throw pmsn::InvalidArgument("input must have shape (batch, time, features)");
  pmsn::SeqTensor<double> t(a.shape(0), a.shape(1), a.shape(2));
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
  return t;
}

Array to_array(const pmsn::SeqTensor<double>& t) {
  Array a({t.batch(), t.time(), t.features()});
  std::copy(t.data().begin(), t.data().end(), a.mutable_data());
  return a;
}

py::dict forward(const pmsn::PmsnParams& p, const Array& input, const std::string& mode, int workers) {
  pmsn::ForwardOptions opt;
  opt.mode = pmsn::parse_forward_mode(mode);
  opt.workers = workers;
  const auto I = to_tensor(input);
  pmsn::ForwardOutput<double> out;
  {
    py::gil_scoped_release release;
    out = pmsn::layer_forward(p, I, opt);
  }
  py::dict d;
  d["S"] = to_array(out.S);
  d["v_s"] = to_array(out.v_s);
  d["I_h"] = to_array(out.I_h);
  d["v_r"] = to_array(out.v_r);
  return d;
}

py::dict impulse(const pmsn::PmsnParams& p, std::size_t T, std::size_t neuron) {
  const auto tr = pmsn::impulse_trace(p, T, neuron);
  Array modes({tr.T, tr.modes});
  std::copy(tr.mode_values.begin(), tr.mode_values.end(), modes.mutable_data());
  py::dict d;
  d["modes"] = modes;
  d["v_s"] = py::array_t<double>(static_cast<py::ssize_t>(tr.v_s.size()), tr.v_s.data());
  d["spikes"] = py::array_t<double>(static_cast<py::ssize_t>(tr.spikes.size()), tr.spikes.data());
  return d;
}

}  // namespace

PYBIND11_MODULE(_pmsn, m) {
  m.doc() = "Parallel multi-compartment spiking neuron engine";
  m.attr("__version__") = pmsn::kVersion;

  py::register_exception<pmsn::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<pmsn::NumericFailure>(m, "NumericFailure", PyExc_ArithmeticError);

  py::class_<pmsn::PmsnParams>(m, "Params")
      .def_readonly("neurons", &pmsn::PmsnParams::neurons)
      .def_readonly("modes", &pmsn::PmsnParams::modes)
      .def_readwrite("theta", &pmsn::PmsnParams::theta)
      .def_property_readonly("lambda_dt", [](const pmsn::PmsnParams& p) { return p.lambda_dt; })
      .def_property_readonly("dt", [](const pmsn::PmsnParams& p) { return p.dt; })
      .def_property_readonly("compartments", &pmsn::PmsnParams::compartments);

  m.def(
      "init_params", [](int n, std::size_t neurons, std::uint64_t seed) { return pmsn::init_params(n, neurons, seed).pmsn; },
      py::arg("n"), py::arg("neurons"), py::arg("seed") = 0, "Diagonalized parameters of n-compartment neurons.");
  m.def("forward", &forward, py::arg("params"), py::arg("input"), py::arg("mode") = "parallel", py::arg("workers") = 1,
        "Run one layer on a (batch, time, features) array; returns S, v_s, I_h and v_r.");
  m.def("impulse", &impulse, py::arg("params"), py::arg("T"), py::arg("neuron") = 0);

  py::class_<pmsn::EnergyReport>(m, "EnergyRow")
      .def_readonly("layer", &pmsn::EnergyReport::layer)
      .def_property_readonly("picojoules", [](const pmsn::EnergyReport& r) { return r.picojoules.to_string(); })
      .def_property_readonly("ac", [](const pmsn::EnergyReport& r) { return r.ac_count.to_string(); })
      .def_property_readonly("mac", [](const pmsn::EnergyReport& r) { return r.mac_count.to_string(); });

  m.def(
      "energy_estimate",
      [](const std::string& kind, std::uint64_t h, std::uint64_t m_, std::uint64_t t, std::uint64_t fr_num,
         std::uint64_t fr_den, std::uint64_t n, std::uint64_t k) {
        pmsn::EnergyStats s;
        s.kind = pmsn::parse_model_kind(kind);
        s.h = h;
        s.m = m_;
        s.t = t;
        s.fr_num = fr_num;
        s.fr_den = fr_den;
        s.n = n;
        s.k = k;
        return pmsn::energy_estimate(s);
      },
      py::arg("kind"), py::arg("h"), py::arg("m"), py::arg("t"), py::arg("fr_num"), py::arg("fr_den"),
      py::arg("n") = 1, py::arg("k") = 0);
}

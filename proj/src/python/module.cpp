// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The SWiT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "swit/channel_sim.hpp"
#include "swit/dataset_io.hpp"
#include "swit/error.hpp"
#include "swit/eval_harness.hpp"
#include "swit/nn/checkpoint.hpp"
#include "swit/run_config.hpp"
#include "swit/swit_trainer.hpp"
#include "swit/wit_encoder.hpp"

namespace py = pybind11;
using namespace swit;

namespace {

using Overrides = std::map<std::string, std::string>;

std::string config_text(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  if (py::isinstance<py::float_>(v)) return py::str(py::repr(v));
  return py::str(v);
}

RunConfig make_config(const py::dict& overrides) {
  RunConfig cfg;
  for (const auto& [k, v] : overrides) set_run_config_value(cfg, py::str(k), config_text(v));
  cfg.apply_seed();
  cfg.validate();
  return cfg;
}

Overrides config_dict(const RunConfig& cfg) {
  Overrides out;
  std::istringstream in(serialize_run_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

py::array_t<std::complex<float>> channels(const Dataset& d) {
  py::array_t<std::complex<float>> out({static_cast<py::ssize_t>(d.size()), static_cast<py::ssize_t>(d.num_antennas),
                                        static_cast<py::ssize_t>(d.num_subcarriers)});
  auto v = out.mutable_unchecked<3>();
  for (std::size_t i = 0; i < d.size(); ++i)
    for (int a = 0; a < d.num_antennas; ++a)
      for (int n = 0; n < d.num_subcarriers; ++n) v(i, a, n) = d.samples[i].channel(a, n);
  return out;
}

Eigen::MatrixXd positions(const Dataset& d) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(d.size()), 3);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (int k = 0; k < 3; ++k) out(static_cast<Eigen::Index>(i), k) = d.samples[i].position[k];
  return out;
}

std::vector<std::uint32_t> labels_of(const py::array_t<std::int64_t>& a) {
  std::vector<std::uint32_t> out;
  auto v = a.unchecked<1>();
  for (py::ssize_t i = 0; i < v.shape(0); ++i) {
    if (v(i) < 0) throw InvalidArgument("labels must be non-negative");
    out.push_back(static_cast<std::uint32_t>(v(i)));
  }
  return out;
}

EncoderSnapshot encoder_for(const Dataset& data, const py::dict& overrides) {
  RunConfig cfg = make_config(overrides);
  cfg.train.model.encoder.token_width = 3 * data.num_antennas;
  return random_encoder(cfg.train.model.encoder, cfg.seed);
}

}  // namespace

PYBIND11_MODULE(_swit, m) {
  m.doc() = "Channel simulation, self-supervised pretraining and evaluation for CSI embeddings.";

  static py::exception<Error> base(m, "SwitError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::kInvalidArgument:
        case ErrorCode::kConfig:
        case ErrorCode::kShapeMismatch:
        case ErrorCode::kDegenerateGeometry:
          PyErr_SetString(PyExc_ValueError, e.what());
          break;
        case ErrorCode::kIo:
          PyErr_SetString(PyExc_OSError, e.what());
          break;
        default:
          py::set_error(base, e.what());
      }
    }
  });

  m.def("config_keys", &run_config_keys, "All configuration keys in serialization order.");
  m.def(
      "config", [](const py::dict& o) { return config_dict(make_config(o)); }, py::arg("overrides") = py::dict(),
      "Resolved configuration as a key -> value dict after applying overrides.");

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("size", &Dataset::size)
      .def("__len__", &Dataset::size)
      .def_readonly("num_antennas", &Dataset::num_antennas)
      .def_readonly("num_subcarriers", &Dataset::num_subcarriers)
      .def_readonly("spot_count", &Dataset::spot_count)
      .def("channels", &channels, "Complex channels, shape (R, N_r, N_c).")
      .def("positions", &positions, "User positions, shape (R, 3).")
      .def("spot_labels", &spot_labels)
      .def("pathloss_db", [](const Dataset& d) {
        std::vector<double> out;
        for (const auto& s : d.samples) out.push_back(s.pathloss_db);
        return out;
      })
      .def("save", [](const Dataset& d, const std::filesystem::path& p) { save_dataset(p, d); }, py::arg("path"));

  m.def(
      "generate_dataset",
      [](const py::dict& o) {
        const RunConfig cfg = make_config(o);
        py::gil_scoped_release release;
        return generate_dataset(cfg.scenario);
      },
      py::arg("overrides") = py::dict());
  m.def("load_dataset", &load_dataset, py::arg("path"));

  m.def(
      "array_response",
      [](double az, double el, int rows, int cols, double spacing_fraction, double carrier_freq) {
        ArrayGeometry g;
        g.rows = rows;
        g.cols = cols;
        g.wavelength = kSpeedOfLight / carrier_freq;
        g.spacing = spacing_fraction * g.wavelength;
        return Eigen::VectorXcd(array_response(az, el, g));
      },
      py::arg("azimuth"), py::arg("elevation"), py::arg("rows"), py::arg("cols"), py::arg("spacing_fraction") = 0.5,
      py::arg("carrier_freq") = 3.5e9);

  py::class_<EncoderSnapshot>(m, "Encoder")
      .def_property_readonly("embed_dim", [](const EncoderSnapshot& e) { return e.config.embed_dim; })
      .def_property_readonly("token_width", [](const EncoderSnapshot& e) { return e.config.token_width; })
      .def(
          "embed",
          [](const EncoderSnapshot& e, const Dataset& d, int chunk) { return extract_embeddings(e, d, chunk); },
          py::arg("dataset"), py::arg("chunk_size") = 64, py::call_guard<py::gil_scoped_release>(),
          "LID embedding of every sample, shape (R, D).")
      .def("save", [](const EncoderSnapshot& e, const std::filesystem::path& p) {
        nn::save_checkpoint(p, encoder_checkpoint(e.config, e.params));
      });

  m.def(
      "load_encoder", [](const std::filesystem::path& p) { return load_encoder_snapshot(nn::load_checkpoint(p)); },
      py::arg("path"));
  m.def("random_encoder", &encoder_for, py::arg("dataset"), py::arg("overrides") = py::dict(),
        "Randomly initialized encoder sized for `dataset`.");

  m.def(
      "pretrain",
      [](const Dataset& data, const py::dict& o, const std::filesystem::path& out_dir, std::int64_t max_steps) {
        RunConfig cfg = make_config(o);
        cfg.train.model.encoder.token_width = 3 * data.num_antennas;
        cfg.train.validate();
        PretrainOptions options;
        options.out_dir = out_dir;
        options.max_steps = max_steps;
        PretrainResult res;
        {
          py::gil_scoped_release release;
          res = pretrain(data, cfg.train, options);
        }
        std::vector<std::map<std::string, double>> trace;
        for (const auto& s : res.trace)
          trace.push_back({{"step", static_cast<double>(s.step)},
                           {"L_c", s.macro},
                           {"L_s", s.micro},
                           {"L_SSL", s.loss},
                           {"lr", s.lr},
                           {"wd", s.weight_decay},
                           {"kappa", s.kappa}});
        return py::make_tuple(load_encoder_snapshot(res.encoder), trace);
      },
      py::arg("dataset"), py::arg("overrides") = py::dict(), py::arg("out_dir") = std::filesystem::path(),
      py::arg("max_steps") = -1, "Returns (target encoder, loss trace).");

  m.def(
      "knn_eval",
      [](const Eigen::MatrixXd& train_x, const py::array_t<std::int64_t>& train_y, const Eigen::MatrixXd& test_x,
         const py::array_t<std::int64_t>& test_y, int k, int num_classes) {
        const auto res = knn_eval(train_x, labels_of(train_y), test_x, labels_of(test_y), k, num_classes);
        return py::make_tuple(res.top1, res.top5);
      },
      py::arg("train_x"), py::arg("train_y"), py::arg("test_x"), py::arg("test_y"), py::arg("k") = 20,
      py::arg("num_classes"), "Cosine k-NN; returns (top1, top5) in percent.");
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smcgate/protocol.hpp"
#include "smcgate/runner.hpp"

namespace py = pybind11;
using namespace smcgate;

namespace {

Json py_to_json(const py::handle& obj);

Json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    Json j = Json::object();
    for (auto item : obj.cast<py::dict>()) {
      j[item.first.cast<std::string>()] = py_to_json(item.second);
    }
    return j;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    Json j = Json::array();
    for (auto item : obj.cast<py::sequence>()) j.push_back(py_to_json(item));
    return j;
  }
  throw py::type_error("unsupported value in scenario JSON");
}

py::object json_to_py(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return py::none();
    case Json::value_t::boolean: return py::bool_(j.get<bool>());
    case Json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float: return py::float_(j.get<double>());
    case Json::value_t::string: return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out[py::str(it.key())] = json_to_py(it.value());
      }
      return out;
    }
    default: return py::none();
  }
}

py::dict artifacts_to_py(const RunArtifacts& artifacts) {
  py::dict out;
  py::list results;
  for (const auto& r : artifacts.results) results.append(json_to_py(r.to_json()));
  out["results"] = results;
  out["transcript"] = artifacts.transcript.serialize();
  out["transcript_hash"] = artifacts.report.transcript_hash;
  py::dict checks;
  for (const auto& c : artifacts.report.checks) {
    checks[py::str(c.name)] = c.passed;
  }
  out["checks"] = checks;
  out["checks_passed"] = artifacts.checks_passed();
  py::dict logs;
  for (const auto& [node, text] : artifacts.transparency_logs) {
    logs[py::str(node)] = text;
  }
  out["transparency_logs"] = logs;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Privacy-preserving IoT aggregation: prime-field secret sharing "
            "and the SMC gateway scenario runner.";

  py::register_exception<Error>(m, "SmcgateError");

  py::class_<FieldElement>(m, "FieldElement")
      .def_property_readonly("value", &FieldElement::value)
      .def("__int__", &FieldElement::value)
      .def("__eq__", [](FieldElement a, FieldElement b) { return a == b; })
      .def("__repr__", [](FieldElement a) {
        return "FieldElement(" + std::to_string(a.value()) + ")";
      });

  py::class_<Field>(m, "Field")
      .def(py::init<>())
      .def(py::init<std::uint64_t>(), py::arg("modulus"))
      .def_property_readonly("modulus", &Field::modulus)
      .def("element", &Field::element, py::arg("raw"))
      .def("add", &Field::add)
      .def("neg", &Field::neg)
      .def("sub", &Field::sub)
      .def("from_signed", &Field::from_signed)
      .def("to_signed", &Field::to_signed)
      .def_readonly_static("DEFAULT_MODULUS", &Field::kDefaultModulus);

  py::class_<FixedPointCodec>(m, "FixedPointCodec")
      .def(py::init([](unsigned fraction_bits, std::uint64_t half_range) {
             return FixedPointCodec{fraction_bits, half_range};
           }),
           py::arg("fraction_bits") = 16,
           py::arg("half_range") = (1ULL << 40))
      .def_readwrite("fraction_bits", &FixedPointCodec::fraction_bits)
      .def_readwrite("half_range", &FixedPointCodec::half_range);

  m.def("encode_fixed", &encode_fixed, py::arg("x"), py::arg("codec"),
        py::arg("field"));
  m.def("decode_fixed", &decode_fixed, py::arg("element"), py::arg("codec"),
        py::arg("field"));

  py::class_<RandomSource>(m, "RandomSource");
  py::class_<Mt19937Random, RandomSource>(m, "Mt19937Random")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &Mt19937Random::uniform, py::arg("bound"));
  py::class_<ScriptedRandom, RandomSource>(m, "ScriptedRandom")
      .def(py::init<std::vector<std::uint64_t>>(), py::arg("values"))
      .def("uniform", &ScriptedRandom::uniform, py::arg("bound"));

  m.def(
      "share_additive",
      [](std::uint64_t secret, const std::vector<PartyId>& parties,
         RandomSource& rng, const Field& field) {
        ShareVector shares =
            share_additive(field.element(secret), parties, rng, field);
        std::vector<std::pair<PartyId, std::uint64_t>> out;
        for (const auto& [party, value] : shares.shares) {
          out.emplace_back(party, value.value());
        }
        return out;
      },
      py::arg("secret"), py::arg("party_ids"), py::arg("rng"), py::arg("field"),
      "Split a secret into additive shares, one per party.");

  m.def(
      "reconstruct_additive",
      [](const std::vector<std::pair<PartyId, std::uint64_t>>& shares,
         const Field& field) {
        ShareVector sv;
        for (const auto& [party, value] : shares) {
          sv.shares.emplace_back(party, field.element(value));
        }
        return reconstruct_additive(sv, field).value();
      },
      py::arg("shares"), py::arg("field"));

  m.def(
      "run_scenario_file",
      [](const std::string& path, const py::object& out_dir) {
        Scenario scenario = Scenario::load(path);
        RunArtifacts artifacts = run_scenario(scenario);
        if (!out_dir.is_none()) {
          write_artifacts(artifacts, out_dir.cast<std::string>());
        }
        return artifacts_to_py(artifacts);
      },
      py::arg("path"), py::arg("out_dir") = py::none(),
      "Run a scenario file and return results, transcript, and check status.");

  m.def(
      "run_scenario",
      [](const py::dict& scenario, const py::object& out_dir) {
        Scenario sc = Scenario::from_json(py_to_json(scenario));
        RunArtifacts artifacts = run_scenario(sc);
        if (!out_dir.is_none()) {
          write_artifacts(artifacts, out_dir.cast<std::string>());
        }
        return artifacts_to_py(artifacts);
      },
      py::arg("scenario"), py::arg("out_dir") = py::none(),
      "Run a scenario given as a dict (same schema as the scenario file).");

  m.def(
      "verify_transcript",
      [](const std::string& scenario_path, const std::string& transcript_text,
         const std::map<std::string, std::string>& logs) {
        Scenario scenario = Scenario::load(scenario_path);
        Transcript transcript = Transcript::parse(transcript_text);
        VerificationReport report = verify_run(scenario, transcript, logs);
        py::dict out;
        for (const auto& c : report.checks) out[py::str(c.name)] = c.passed;
        out["all_passed"] = report.all_passed();
        out["transcript_hash"] = report.transcript_hash;
        return out;
      },
      py::arg("scenario_path"), py::arg("transcript"),
      py::arg("transparency_logs") = std::map<std::string, std::string>{},
      "Re-run the invariant checks over a serialized transcript.");
}

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aicf/codec.hpp"
#include "aicf/descriptors.hpp"
#include "aicf/netsim.hpp"
#include "aicf/registry.hpp"
#include "aicf/topic.hpp"

namespace py = pybind11;

namespace {

// JSON <-> Python conversion for payloads, descriptors and results.
py::object json_to_py(const aicf::json& j) {
  switch (j.type()) {
    case aicf::json::value_t::null: return py::none();
    case aicf::json::value_t::boolean: return py::bool_(j.get<bool>());
    case aicf::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case aicf::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case aicf::json::value_t::number_float: return py::float_(j.get<double>());
    case aicf::json::value_t::string: return py::str(j.get<std::string>());
    case aicf::json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case aicf::json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
      return out;
    }
    default: return py::none();
  }
}

aicf::json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    aicf::json out = aicf::json::object();
    for (auto item : obj.cast<py::dict>()) {
      out[item.first.cast<std::string>()] = py_to_json(item.second);
    }
    return out;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    aicf::json out = aicf::json::array();
    for (auto item : obj.cast<py::sequence>()) out.push_back(py_to_json(item));
    return out;
  }
  throw py::type_error("unsupported value for JSON conversion");
}

aicf::Envelope envelope_from_dict(const py::dict& d) {
  aicf::Envelope env;
  auto type = aicf::msg_type_from_wire(d["type"].cast<std::string>());
  if (!type) throw py::value_error("unknown msg type");
  env.type = *type;
  env.sender = d["sender"].cast<std::string>();
  if (d.contains("topic") && !d["topic"].is_none()) env.topic = d["topic"].cast<std::string>();
  if (d.contains("ts_us")) env.ts_us = d["ts_us"].cast<std::uint64_t>();
  if (d.contains("seq")) env.seq = d["seq"].cast<std::uint64_t>();
  if (d.contains("payload")) env.payload = py_to_json(d["payload"]);
  return env;
}

py::dict envelope_to_dict(const aicf::Envelope& env) {
  py::dict d;
  d["v"] = env.version;
  d["type"] = std::string(aicf::to_wire_name(env.type));
  d["sender"] = env.sender;
  if (env.topic) d["topic"] = *env.topic;
  d["ts_us"] = env.ts_us;
  d["seq"] = env.seq;
  d["payload"] = json_to_py(env.payload);
  return d;
}

py::dict metrics_to_dict(const aicf::sim::RunMetrics& m) {
  py::dict d;
  d["scenario"] = m.scenario;
  d["mode"] = m.mode;
  d["seed"] = m.seed;
  d["generated"] = m.generated;
  d["delivered"] = m.delivered;
  d["dropped"] = m.dropped;
  d["mean_latency_us"] = m.mean_latency_us;
  d["p50_latency_us"] = m.p50_latency_us;
  d["p99_latency_us"] = m.p99_latency_us;
  d["throughput_mbps"] = m.throughput_mbps;
  d["channel_util"] = m.channel_util;
  d["controls_emitted"] = m.controls_emitted;
  d["msgs_published"] = m.msgs_published;
  d["trace_hash"] = m.trace_hash;
  return d;
}

}  // namespace

PYBIND11_MODULE(_aicf, m) {
  m.doc() = "AI control framework core: wire codec, registry and PON/RAN fronthaul simulation";

  m.def(
      "topic_matches",
      [](const std::string& filter, const std::string& topic) {
        return aicf::topic_matches(filter, topic);
      },
      py::arg("filter"), py::arg("topic"),
      "Match a hierarchical topic against a */# filter pattern.");

  m.def(
      "canonical_topics",
      [](const py::dict& node) {
        auto desc = py_to_json(node).get<aicf::NodeDescriptor>();
        return aicf::canonical_topics(desc);
      },
      py::arg("node"), "pm/ctrl topics for a node descriptor, in descriptor order.");

  m.def(
      "encode",
      [](const py::dict& envelope) { return py::bytes(aicf::encode_frame(envelope_from_dict(envelope))); },
      py::arg("envelope"), "Encode an envelope dict into a length-prefixed frame.");

  m.def(
      "decode",
      [](const py::bytes& data) {
        const std::string buf = data;
        auto r = aicf::decode_frame(buf);
        if (r.status != aicf::CodecStatus::Ok) {
          throw py::value_error("decode failed: " + r.detail);
        }
        return py::make_tuple(envelope_to_dict(r.envelope), r.consumed);
      },
      py::arg("frame"), "Decode the first frame; returns (envelope, bytes_consumed).");

  py::class_<aicf::Registry>(m, "Registry")
      .def(py::init([](const std::string& policy) {
             auto p = aicf::conflict_policy_from_string(policy);
             if (!p) throw py::value_error("policy must be reject or priority_preempt");
             return aicf::Registry(*p);
           }),
           py::arg("policy") = "reject")
      .def("register_node",
           [](aicf::Registry& reg, const py::dict& node) {
             auto out = reg.register_node(py_to_json(node).get<aicf::NodeDescriptor>());
             if (!out.ok) throw py::value_error(aicf::json(out.error).dump());
           })
      .def("register_app",
           [](aicf::Registry& reg, const py::dict& app) {
             auto out = reg.register_app(py_to_json(app).get<aicf::AppDescriptor>());
             if (!out.ok) throw py::value_error(aicf::json(out.error).dump());
             py::list revoked;
             for (const auto& r : out.revocations) {
               revoked.append(py::make_tuple(r.app_id, r.node_id, r.param));
             }
             return revoked;
           })
      .def("deregister",
           [](aicf::Registry& reg, const std::string& kind, const std::string& id) {
             auto out = reg.deregister(
                 kind == "node" ? aicf::Registry::Kind::Node : aicf::Registry::Kind::App, id);
             if (!out.ok) throw py::value_error(aicf::json(out.error).dump());
           })
      .def("nodes",
           [](const aicf::Registry& reg) { return json_to_py(aicf::json(reg.all_nodes())); })
      .def("apps", [](const aicf::Registry& reg) { return json_to_py(aicf::json(reg.apps())); })
      .def("claims", [](const aicf::Registry& reg) {
        py::list out;
        for (const auto& [node, param, app] : reg.claims()) {
          out.append(py::make_tuple(node, param, app));
        }
        return out;
      });

  m.def(
      "run_sim",
      [](const py::object& scenario, const std::string& mode, std::optional<std::uint64_t> seed) {
        aicf::json doc;
        if (py::isinstance<py::str>(scenario)) {
          doc = aicf::json::parse(std::ifstream(scenario.cast<std::string>()));
        } else {
          doc = py_to_json(scenario);
        }
        auto cfg = aicf::sim::ScenarioConfig::from_json(doc);
        if (seed) cfg.seed = *seed;
        auto m_enum = aicf::sim::run_mode_from_string(mode);
        if (!m_enum) throw py::value_error("mode must be baseline|cooperative|balanced");
        aicf::sim::RunMetrics metrics;
        {
          py::gil_scoped_release release;
          metrics = aicf::sim::run_scenario(cfg, *m_enum);
        }
        return metrics_to_dict(metrics);
      },
      py::arg("scenario"), py::arg("mode") = "baseline", py::arg("seed") = std::nullopt,
      "Run one simulation; scenario is a dict or a path to a scenario JSON file.");

  m.attr("__version__") = "0.1.0";
}

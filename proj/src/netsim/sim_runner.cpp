#include <stdexcept>

#include <spdlog/spdlog.h>

#include "aicf/apps.hpp"
#include "aicf/broker_server.hpp"
#include "aicf/engine.hpp"
#include "aicf/netsim.hpp"
#include "aicf/node_agent.hpp"
#include "aicf/register_service.hpp"
#include "pon_model.hpp"

namespace aicf::sim {

namespace {

constexpr const char* kNodeBrokerEp = "sim://node-broker";
constexpr const char* kInterAiBrokerEp = "sim://interai-broker";

NodeDescriptor olt_descriptor(const ScenarioConfig& cfg, std::uint64_t cap_bytes) {
  NodeDescriptor d;
  d.node_id = "olt-0";
  d.node_type = NodeType::PonOlt;
  d.measurements.push_back({"channel_util", "ratio", cfg.channel_util_period_ms});
  for (int i = 0; i < cfg.n_onus; ++i) {
    d.controls.push_back({"grant_map_" + cfg.onu_id(i), ValueKind::Integer, 0,
                          static_cast<double>(cap_bytes), {}});
  }
  return d;
}

NodeDescriptor onu_descriptor(const ScenarioConfig& cfg, int index) {
  NodeDescriptor d;
  d.node_id = cfg.onu_id(index);
  d.node_type = NodeType::PonOnu;
  d.measurements.push_back({"queue_bytes", "B", cfg.queue_bytes_period_ms});
  d.controls.push_back(
      {"onu_channel", ValueKind::Integer, 0, static_cast<double>(cfg.n_channels - 1), {}});
  return d;
}

NodeDescriptor du_descriptor(const std::string& du_id) {
  NodeDescriptor d;
  d.node_id = du_id;
  d.node_type = NodeType::RanDu;
  d.measurements.push_back({"ul_grant_bytes", "B", 0});  // event-driven
  return d;
}

RunMetrics run_impl(const ScenarioConfig& cfg, AppSelection sel, const std::string& mode_name,
                    std::vector<TraceRecord>* trace_out) {
  if (auto err = cfg.validate()) throw std::invalid_argument("scenario: " + *err);

  VirtualExecutor exec;
  InMemNetwork net(exec);

  BrokerCore node_core(BrokerRole::NodeBroker, "node-broker");
  BrokerServerOptions server_opts;
  server_opts.threaded_delivery = false;  // the executor is the delivery queue
  BrokerServer node_server(node_core, net, exec, kNodeBrokerEp, server_opts);
  node_server.start();

  BrokerCore interai_core(BrokerRole::InterAiBroker, "interai-broker");
  BrokerServer interai_server(interai_core, net, exec, kInterAiBrokerEp, server_opts);
  interai_server.start();

  Registry registry(ConflictPolicy::Reject);
  auto register_client =
      std::make_shared<BrokerClient>("register", kNodeBrokerEp, net, exec);
  RegisterService register_service(registry, register_client);
  register_service.start();
  register_client->start();
  exec.run_current_instant();

  PonModel pon(cfg, exec);

  // Agents: measurements sample the model, control hooks drive it.
  std::vector<std::unique_ptr<NodeAgent>> agents;

  AgentConfig olt_cfg;
  olt_cfg.descriptor = olt_descriptor(cfg, pon.cycle_cap_bytes());
  olt_cfg.broker_endpoint = kNodeBrokerEp;
  olt_cfg.sampler = [&pon](const std::string& metric) -> json {
    if (metric == "channel_util") return pon.channel_util_window();
    return 0;
  };
  for (int i = 0; i < cfg.n_onus; ++i) {
    olt_cfg.apply_hooks["grant_map_" + cfg.onu_id(i)] = [&pon, i](const std::string&,
                                                                  const json& value) {
      pon.pregrant(i, value.get<std::uint64_t>());
      return true;
    };
  }
  agents.push_back(std::make_unique<NodeAgent>(std::move(olt_cfg), net, exec));

  for (int i = 0; i < cfg.n_onus; ++i) {
    AgentConfig onu_cfg;
    onu_cfg.descriptor = onu_descriptor(cfg, i);
    onu_cfg.broker_endpoint = kNodeBrokerEp;
    onu_cfg.sampler = [&pon, i](const std::string& metric) -> json {
      if (metric == "queue_bytes") return pon.queue_bytes(i);
      return 0;
    };
    onu_cfg.apply_hooks["onu_channel"] = [&pon, i](const std::string&, const json& value) {
      pon.switch_channel(i, value.get<int>());
      return true;
    };
    agents.push_back(std::make_unique<NodeAgent>(std::move(onu_cfg), net, exec));
  }

  for (const auto& [du_id, onu_id] : cfg.du_to_onu) {
    AgentConfig du_cfg;
    du_cfg.descriptor = du_descriptor(du_id);
    du_cfg.broker_endpoint = kNodeBrokerEp;
    agents.push_back(std::make_unique<NodeAgent>(std::move(du_cfg), net, exec));
  }

  std::map<std::string, NodeAgent*> agents_by_id;
  for (auto& agent : agents) {
    agent->start();
    agents_by_id[agent->descriptor().node_id] = agent.get();
  }
  exec.run_current_instant();
  for (auto& agent : agents) {
    if (!agent->registered()) {
      throw std::runtime_error("sim: agent failed to register: " + agent->descriptor().node_id);
    }
  }

  pon.set_announce_cb([&agents_by_id](const std::string& du, std::uint64_t bytes) {
    auto it = agents_by_id.find(du);
    if (it != agents_by_id.end()) it->second->publish_measurement("ul_grant_bytes", bytes);
  });

  std::unique_ptr<Engine> engine;
  if (sel.coop_dba || sel.channel_balancer) {
    EngineOptions opts;
    opts.engine_id = "engine";
    opts.node_broker_endpoint = kNodeBrokerEp;
    opts.interai_broker_endpoint = kInterAiBrokerEp;
    engine = std::make_unique<Engine>(opts, net, exec);
    engine->start();
    exec.run_current_instant();

    auto load = [&](std::shared_ptr<ControlApp> app) {
      if (!app) throw std::invalid_argument("sim: bad app parameters");
      bool ok = false;
      RegistryError error;
      bool done = false;
      engine->load_app(app, [&](bool k, const RegistryError& e) {
        ok = k;
        error = e;
        done = true;
      });
      exec.run_current_instant();
      if (!done) throw std::runtime_error("sim: app load did not complete");
      if (!ok) {
        throw std::runtime_error("sim: app registration failed: " + error.detail);
      }
    };

    if (sel.coop_dba) {
      load(apps::make_coop_dba(json{{"olt", "olt-0"}, {"du_to_onu", cfg.du_to_onu}}));
    }
    if (sel.channel_balancer) {
      std::vector<std::string> onus;
      for (int i = 0; i < cfg.n_onus; ++i) onus.push_back(cfg.onu_id(i));
      load(apps::make_channel_balancer(json{{"olt", "olt-0"},
                                            {"onus", onus},
                                            {"initial_channels", cfg.onu_to_channel},
                                            {"n_channels", cfg.n_channels},
                                            {"threshold", cfg.balancer_threshold},
                                            {"min_interval_us", cfg.balancer_min_interval_us}}));
    }
  }

  pon.schedule_all();
  exec.run_until_ps(cfg.duration_us * kPsPerUs);

  RunMetrics metrics;
  metrics.scenario = cfg.name;
  metrics.mode = mode_name;
  metrics.seed = cfg.seed;
  metrics.duration_us = cfg.duration_us;
  const std::int64_t duration_ps = cfg.duration_us * kPsPerUs;
  for (const auto& sample : pon.raw_samples()) {
    if (sample.delivered_ps <= duration_ps) metrics.samples.push_back(sample);
  }
  std::sort(metrics.samples.begin(), metrics.samples.end(),
            [](const LatencySample& a, const LatencySample& b) { return a.pkt_id < b.pkt_id; });
  metrics.channel_util = pon.total_utilization();
  metrics.generated = pon.generated();
  metrics.delivered = metrics.samples.size();
  metrics.dropped = pon.dropped();
  metrics.residual = metrics.generated - metrics.delivered - metrics.dropped;
  metrics.controls_emitted = engine ? engine->stats().controls_emitted : 0;
  metrics.msgs_published =
      node_core.stats().published_total + interai_core.stats().published_total;
  metrics.trace_hash = pon.trace_hash();
  metrics.finalize();

  if (trace_out) *trace_out = pon.trace();

  if (engine) engine->stop();
  for (auto& agent : agents) agent->stop();
  register_client->stop();
  return metrics;
}

}  // namespace

RunMetrics run_baseline(const ScenarioConfig& config, std::vector<TraceRecord>* trace) {
  return run_impl(config, AppSelection{}, "baseline", trace);
}

RunMetrics run_controlled(const ScenarioConfig& config, AppSelection apps,
                          std::vector<TraceRecord>* trace) {
  std::string mode = apps.coop_dba && apps.channel_balancer ? "cooperative+balanced"
                     : apps.coop_dba                        ? "cooperative"
                     : apps.channel_balancer                ? "balanced"
                                                            : "baseline";
  return run_impl(config, apps, mode, trace);
}

RunMetrics run_scenario(const ScenarioConfig& config, RunMode mode,
                        std::vector<TraceRecord>* trace) {
  switch (mode) {
    case RunMode::Baseline:
      return run_baseline(config, trace);
    case RunMode::Cooperative:
      return run_controlled(config, AppSelection{true, false}, trace);
    case RunMode::Balanced:
      return run_controlled(config, AppSelection{false, true}, trace);
  }
  return run_baseline(config, trace);
}

}  // namespace aicf::sim

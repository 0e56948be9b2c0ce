#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "aicf/apps.hpp"
#include "aicf/broker_server.hpp"
#include "aicf/engine.hpp"
#include "aicf/log.hpp"
#include "aicf/netsim.hpp"
#include "aicf/node_agent.hpp"
#include "aicf/register_service.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::atomic<int> g_signal{0};

void handle_signal(int sig) { g_signal.store(sig); }

void install_signal_handlers() {
  struct sigaction sa {};
  sa.sa_handler = handle_signal;
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
}

/// Blocks until SIGINT/SIGTERM; SIGUSR1 invokes `on_usr1` and keeps running.
void wait_for_shutdown(const std::function<void()>& on_usr1 = {}) {
  struct sigaction sa {};
  sa.sa_handler = handle_signal;
  sigaction(SIGUSR1, &sa, nullptr);
  while (true) {
    int sig = g_signal.exchange(0);
    if (sig == SIGINT || sig == SIGTERM) return;
    if (sig == SIGUSR1 && on_usr1) on_usr1();
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

aicf::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  aicf::json doc = aicf::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw std::invalid_argument("invalid JSON in " + path);
  return doc;
}

int cmd_broker(const std::string& role_name, int port, std::size_t queue_capacity) {
  auto role = aicf::broker_role_from_string(role_name);
  if (!role) {
    std::cerr << "error: --role must be node or interai\n";
    return kExitConfig;
  }
  aicf::TcpNetwork net;
  aicf::ThreadExecutor executor;
  aicf::BrokerCore core(*role, role_name + "-broker");
  aicf::BrokerServerOptions opts;
  opts.queue_capacity = queue_capacity;
  aicf::BrokerServer server(core, net, executor, "0.0.0.0:" + std::to_string(port), opts);
  try {
    server.start();
  } catch (const aicf::BindError& e) {
    std::cerr << "error: BIND_FAILED: " << e.what() << "\n";
    return kExitRuntime;
  }
  install_signal_handlers();
  wait_for_shutdown([&core] { std::cerr << core.stats_line() << "\n"; });
  std::cerr << core.stats_line() << "\n";
  server.stop();
  return 0;
}

int cmd_register(const std::string& broker_endpoint, const std::string& policy_name,
                 const std::string& snapshot) {
  auto policy = aicf::conflict_policy_from_string(policy_name);
  if (!policy) {
    std::cerr << "error: --policy must be reject or priority-preempt\n";
    return kExitConfig;
  }
  aicf::Registry registry(*policy);
  if (!snapshot.empty() && std::filesystem::exists(snapshot)) {
    auto restored = aicf::Registry::load(snapshot);
    if (!restored) {
      std::cerr << "error: MALFORMED snapshot: " << snapshot << "\n";
      return kExitConfig;
    }
    registry = std::move(*restored);
    spdlog::info("register: restored snapshot from {}", snapshot);
  }
  aicf::TcpNetwork net;
  aicf::ThreadExecutor executor;
  auto client = std::make_shared<aicf::BrokerClient>("register", broker_endpoint, net, executor);
  aicf::RegisterServiceOptions opts;
  opts.snapshot_path = snapshot;
  aicf::RegisterService service(registry, client, opts);
  service.start();
  client->start();
  install_signal_handlers();
  wait_for_shutdown();
  client->stop();
  return 0;
}

int cmd_engine(const std::string& config_path) {
  aicf::json doc = load_json_file(config_path);
  aicf::EngineOptions opts;
  opts.engine_id = doc.value("engine_id", "engine");
  opts.node_broker_endpoint = doc.at("node_broker").get<std::string>();
  opts.interai_broker_endpoint = doc.value("interai_broker", "");
  opts.state_dir = doc.value("state_dir", "");
  for (const auto& p : doc.value("peers", aicf::json::array())) {
    aicf::PeerLink link;
    link.peer_id = p.at("peer_id").get<std::string>();
    link.endpoint = p.at("endpoint").get<std::string>();
    link.native = p.value("native", true);
    link.kind = p.value("kind", "");
    opts.peers.push_back(std::move(link));
  }

  aicf::TcpNetwork net;
  aicf::ThreadExecutor executor;
  aicf::Engine engine(opts, net, executor);
  engine.start();

  for (const auto& a : doc.value("apps", aicf::json::array())) {
    const std::string name = a.at("name").get<std::string>();
    auto app = aicf::apps::make_app(name, a.value("params", aicf::json::object()));
    if (!app) throw std::invalid_argument("unknown or misconfigured app: " + name);
    std::promise<std::pair<bool, std::string>> done;
    engine.load_app(app, [&done](bool ok, const aicf::RegistryError& err) {
      done.set_value({ok, err.detail});
    });
    auto fut = done.get_future();
    if (fut.wait_for(std::chrono::seconds(10)) != std::future_status::ready) {
      std::cerr << "error: RUNTIME: app load timed out: " << name << "\n";
      return kExitRuntime;
    }
    auto [ok, detail] = fut.get();
    if (!ok) {
      std::cerr << "error: RUNTIME: app registration failed: " << name << ": " << detail << "\n";
      return kExitRuntime;
    }
    spdlog::info("engine: app {} running", name);
  }

  install_signal_handlers();
  wait_for_shutdown();
  engine.stop();
  return 0;
}

int cmd_agent(const std::string& config_path) {
  aicf::json doc = load_json_file(config_path);
  aicf::AgentConfig cfg;
  cfg.descriptor = doc.at("node").get<aicf::NodeDescriptor>();
  cfg.broker_endpoint = doc.at("broker").get<std::string>();
  cfg.publish_periods_ms =
      doc.value("publish_periods_ms", std::map<std::string, std::uint32_t>{});
  // Standalone agents run a virtual device: controls are accepted and echoed
  // back through the __applied stream, metrics report the last applied value
  // (or 0).
  auto state = std::make_shared<std::map<std::string, aicf::json>>();
  for (const auto& p : cfg.descriptor.controls) {
    cfg.apply_hooks[p.name] = [state](const std::string& param, const aicf::json& value) {
      (*state)[param] = value;
      return true;
    };
  }
  cfg.sampler = [state](const std::string& metric) -> aicf::json {
    auto it = state->find(metric);
    return it == state->end() ? aicf::json(0) : it->second;
  };

  aicf::TcpNetwork net;
  aicf::ThreadExecutor executor;
  aicf::NodeAgent agent(std::move(cfg), net, executor);
  agent.start();
  install_signal_handlers();
  wait_for_shutdown();
  agent.stop();
  return 0;
}

int cmd_sim(const std::string& scenario_path, const std::string& mode_name, std::uint64_t seed,
            bool seed_given, const std::string& out_dir) {
  aicf::sim::ScenarioConfig cfg;
  if (!scenario_path.empty()) {
    if (!std::filesystem::exists(scenario_path)) {
      std::cerr << "error: CONFIG_INVALID: scenario file not found: " << scenario_path << "\n";
      return kExitConfig;
    }
    cfg = aicf::sim::ScenarioConfig::from_json(load_json_file(scenario_path));
  } else {
    // Bundled default: 2 channels, 8 ONUs, 4 DUs with announced periodic
    // traffic at 50% per-channel load.
    aicf::json def{{"name", "default"},
                   {"channels", 2},
                   {"onus", 8},
                   {"dus", 4},
                   {"onu_to_channel", {0, 1, 0, 1, 0, 1, 0, 1}},
                   {"duration_us", 100000}};
    def["traffic"] = aicf::json::array();
    for (int i = 0; i < 4; ++i) {
      def["traffic"].push_back({{"du", "du-" + std::to_string(i)},
                                {"model", "periodic"},
                                {"bytes", 31250},
                                {"period_us", 100},
                                {"announced", true}});
    }
    cfg = aicf::sim::ScenarioConfig::from_json(def);
  }
  if (seed_given) cfg.seed = seed;

  std::vector<aicf::sim::RunMode> modes;
  if (mode_name == "both") {
    modes = {aicf::sim::RunMode::Baseline, aicf::sim::RunMode::Cooperative};
  } else {
    auto mode = aicf::sim::run_mode_from_string(mode_name);
    if (!mode) {
      std::cerr << "error: CONFIG_INVALID: unknown mode " << mode_name << "\n";
      return kExitConfig;
    }
    modes = {*mode};
  }

  std::filesystem::create_directories(out_dir);
  std::vector<aicf::sim::RunMetrics> runs;
  for (auto mode : modes) {
    auto metrics = aicf::sim::run_scenario(cfg, mode);
    const std::string mode_dir = out_dir + "/" + std::string(aicf::sim::to_string(mode));
    std::filesystem::create_directories(mode_dir);
    aicf::sim::write_latency_csv(metrics, mode_dir + "/latency_samples.csv");
    spdlog::info("sim: {} mean={}us p99={}us delivered={}", aicf::sim::to_string(mode),
                 metrics.mean_latency_us, metrics.p99_latency_us, metrics.delivered);
    runs.push_back(std::move(metrics));
  }
  aicf::sim::write_summary_csv(runs, out_dir + "/summary.csv");
  return 0;
}

int cmd_stats(const std::string& endpoint) {
  aicf::TcpNetwork net;
  aicf::ThreadExecutor executor;
  auto client = std::make_shared<aicf::BrokerClient>("stats-cli", endpoint, net, executor,
                                                     aicf::BrokerClientOptions{.reconnect = false});
  std::promise<aicf::json> reply;
  auto got = reply.get_future();
  client->set_on_envelope([&reply](const aicf::Envelope& env) {
    if (env.type == aicf::MsgType::Heartbeat && env.payload.contains("stats")) {
      try {
        reply.set_value(env.payload.at("stats"));
      } catch (const std::future_error&) {
      }
    }
  });
  client->start();
  if (!client->connected()) {
    std::cerr << "error: RUNTIME: cannot reach broker at " << endpoint << "\n";
    return kExitRuntime;
  }
  client->send(aicf::MsgType::Heartbeat, aicf::json{{"cmd", "stats"}});
  if (got.wait_for(std::chrono::seconds(2)) != std::future_status::ready) {
    std::cerr << "error: RUNTIME: no stats reply from " << endpoint << "\n";
    return kExitRuntime;
  }
  std::cout << got.get().dump() << "\n";
  client->stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  aicf::log::init();

  CLI::App app{"aicf - modular AI control framework for fiber/wireless networks"};
  app.require_subcommand(1);

  auto* broker = app.add_subcommand("broker", "Run a message broker");
  int broker_port = 7001;
  std::string broker_role = "node";
  std::size_t queue_capacity = 1024;
  broker->add_option("--port", broker_port, "TCP port to listen on")->capture_default_str();
  broker->add_option("--role", broker_role, "Broker role: node or interai")
      ->capture_default_str();
  broker->add_option("--queue-capacity", queue_capacity, "Per-subscriber delivery queue size")
      ->capture_default_str();

  auto* reg = app.add_subcommand("register", "Run the Register service");
  std::string reg_broker = "127.0.0.1:7001";
  std::string reg_policy = "reject";
  std::string reg_snapshot;
  reg->add_option("--broker-endpoint", reg_broker, "Node broker endpoint")->capture_default_str();
  reg->add_option("--policy", reg_policy, "Conflict policy: reject or priority-preempt")
      ->capture_default_str();
  reg->add_option("--snapshot", reg_snapshot, "Snapshot file path");

  auto* engine = app.add_subcommand("engine", "Run the AI control engine");
  std::string engine_config;
  engine->add_option("--config", engine_config, "Engine config file")->required();

  auto* agent = app.add_subcommand("agent", "Run a standalone node agent");
  std::string agent_config;
  agent->add_option("--config", agent_config, "Agent config file")->required();

  auto* sim = app.add_subcommand("sim", "Run the PON/RAN fronthaul simulation");
  std::string scenario_path;
  std::string sim_mode = "both";
  std::uint64_t sim_seed = 0;
  std::string sim_out = "out";
  sim->add_option("--scenario", scenario_path, "Scenario file (bundled default when omitted)");
  sim->add_option("--mode", sim_mode, "baseline | cooperative | balanced | both")
      ->capture_default_str();
  auto* seed_opt = sim->add_option("--seed", sim_seed, "Override the scenario seed");
  sim->add_option("--out", sim_out, "Output directory")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Query a running broker for statistics");
  std::string stats_endpoint = "127.0.0.1:7001";
  stats->add_option("--endpoint", stats_endpoint, "Broker endpoint")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: CONFIG_INVALID: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (broker->parsed()) return cmd_broker(broker_role, broker_port, queue_capacity);
    if (reg->parsed()) return cmd_register(reg_broker, reg_policy, reg_snapshot);
    if (engine->parsed()) return cmd_engine(engine_config);
    if (agent->parsed()) return cmd_agent(agent_config);
    if (sim->parsed()) {
      return cmd_sim(scenario_path, sim_mode, sim_seed, seed_opt->count() > 0, sim_out);
    }
    if (stats->parsed()) return cmd_stats(stats_endpoint);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: CONFIG_INVALID: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: RUNTIME: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

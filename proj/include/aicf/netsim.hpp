#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace aicf::sim {

using json = nlohmann::json;

inline constexpr std::int64_t kPsPerUs = 1'000'000;

enum class SimEventKind : std::uint8_t {
  PktArrival = 0,
  ReportTx = 1,
  GrantIssue = 2,
  UpstreamTxStart = 3,
  UpstreamTxEnd = 4,
  ChannelSwitch = 5,
};

std::string_view to_string(SimEventKind kind);

struct TrafficSpec {
  enum class Model : std::uint8_t { Periodic, Poisson };

  std::string du;
  Model model = Model::Periodic;
  std::uint64_t bytes = 1500;
  std::int64_t period_us = 1000;
  std::int64_t jitter_us = 0;
  std::optional<std::int64_t> phase_us;  // fixed phase; seeded from U[0, period) otherwise
  bool announced = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  int n_channels = 1;
  int n_onus = 1;
  std::vector<int> onu_to_channel;               // initial assignment, size n_onus
  std::map<std::string, std::string> du_to_onu;  // e.g. "du-0" -> "onu-0"

  std::int64_t dba_cycle_us = 125;
  std::int64_t prop_delay_us = 50;
  double line_rate_gbps = 10.0;
  std::int64_t announce_lead_us = 0;  // 0 -> defaults to dba_cycle_us
  std::int64_t switch_penalty_us = 500;
  std::int64_t duration_us = 100'000;
  std::uint64_t seed = 1;
  std::uint64_t queue_cap_bytes = 0;  // 0 = unbounded

  std::uint32_t queue_bytes_period_ms = 1;
  std::uint32_t channel_util_period_ms = 1;

  double balancer_threshold = 0.1;
  std::uint64_t balancer_min_interval_us = 1000;

  std::vector<TrafficSpec> traffic;

  std::int64_t lead_us() const { return announce_lead_us > 0 ? announce_lead_us : dba_cycle_us; }
  std::string onu_id(int i) const { return "onu-" + std::to_string(i); }
  std::optional<int> onu_index(const std::string& id) const;

  std::optional<std::string> validate() const;
  static ScenarioConfig from_json(const json& doc);  // throws std::invalid_argument
  json to_json() const;
};

enum class RunMode : std::uint8_t { Baseline, Cooperative, Balanced };

std::string_view to_string(RunMode mode);
std::optional<RunMode> run_mode_from_string(std::string_view name);

struct LatencySample {
  std::uint64_t pkt_id = 0;
  std::int64_t arrival_ps = 0;
  std::int64_t delivered_ps = 0;
  std::uint64_t bytes = 0;

  std::int64_t latency_ps() const { return delivered_ps - arrival_ps; }
};

struct TraceRecord {
  std::int64_t t_ps = 0;
  SimEventKind kind = SimEventKind::PktArrival;
  std::string subject;
  std::string info;
};

struct RunMetrics {
  std::string scenario;
  std::string mode;
  std::uint64_t seed = 0;
  std::int64_t duration_us = 0;

  std::vector<LatencySample> samples;  // delivered within the run, by pkt_id
  std::vector<double> channel_util;    // whole-run busy fraction per channel

  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t residual = 0;  // generated - delivered - dropped

  std::uint64_t controls_emitted = 0;
  std::uint64_t msgs_published = 0;
  std::uint64_t trace_hash = 0;

  double mean_latency_us = 0.0;
  double p50_latency_us = 0.0;
  double p99_latency_us = 0.0;
  double throughput_mbps = 0.0;

  void finalize();  // computes the aggregate fields from samples
};

struct AppSelection {
  bool coop_dba = false;
  bool channel_balancer = false;
};

/// Runs the scenario with the framework stack wired in-process over virtual
/// time (brokers, register, agents and — for controlled runs — the engine).
/// Identical (config, seed) inputs produce identical results byte for byte.
RunMetrics run_baseline(const ScenarioConfig& config, std::vector<TraceRecord>* trace = nullptr);
RunMetrics run_controlled(const ScenarioConfig& config, AppSelection apps,
                          std::vector<TraceRecord>* trace = nullptr);
RunMetrics run_scenario(const ScenarioConfig& config, RunMode mode,
                        std::vector<TraceRecord>* trace = nullptr);

/// Exact microsecond rendering of a picosecond count ("12.345678").
std::string ps_to_us_string(std::int64_t ps);

void write_latency_csv(const RunMetrics& metrics, const std::string& path);
void write_summary_csv(const std::vector<RunMetrics>& runs, const std::string& path);

}  // namespace aicf::sim

#include <algorithm>
#include <stdexcept>

#include "aicf/netsim.hpp"

namespace aicf::sim {

std::string_view to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::PktArrival: return "pkt_arrival";
    case SimEventKind::ReportTx: return "report_tx";
    case SimEventKind::GrantIssue: return "grant_issue";
    case SimEventKind::UpstreamTxStart: return "upstream_tx_start";
    case SimEventKind::UpstreamTxEnd: return "upstream_tx_end";
    case SimEventKind::ChannelSwitch: return "channel_switch";
  }
  return "?";
}

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Baseline: return "baseline";
    case RunMode::Cooperative: return "cooperative";
    case RunMode::Balanced: return "balanced";
  }
  return "?";
}

std::optional<RunMode> run_mode_from_string(std::string_view name) {
  if (name == "baseline") return RunMode::Baseline;
  if (name == "cooperative") return RunMode::Cooperative;
  if (name == "balanced") return RunMode::Balanced;
  return std::nullopt;
}

std::optional<int> ScenarioConfig::onu_index(const std::string& id) const {
  for (int i = 0; i < n_onus; ++i) {
    if (onu_id(i) == id) return i;
  }
  return std::nullopt;
}

std::optional<std::string> ScenarioConfig::validate() const {
  if (n_channels < 1) return "n_channels must be >= 1";
  if (n_onus < 1) return "n_onus must be >= 1";
  if (static_cast<int>(onu_to_channel.size()) != n_onus) {
    return "onu_to_channel must list one channel per ONU";
  }
  for (int c : onu_to_channel) {
    if (c < 0 || c >= n_channels) return "onu_to_channel entry out of range";
  }
  if (dba_cycle_us <= 0) return "dba_cycle_us must be positive";
  if (prop_delay_us < 0) return "prop_delay_us must be >= 0";
  if (line_rate_gbps <= 0) return "line_rate_gbps must be positive";
  if (duration_us <= 10 * dba_cycle_us) return "duration_us must exceed 10 dba cycles";
  if (dba_cycle_us < 2 * prop_delay_us) {
    return "dba_cycle_us must be >= 2 * prop_delay_us (grant round trip)";
  }
  if (lead_us() < prop_delay_us) return "announce_lead_us must be >= prop_delay_us";
  if (switch_penalty_us < 0) return "switch_penalty_us must be >= 0";
  for (const auto& t : traffic) {
    if (du_to_onu.count(t.du) == 0) return "traffic entry for unmapped du: " + t.du;
    if (t.bytes == 0) return "traffic bytes must be positive";
    if (t.period_us <= 0) return "traffic period_us must be positive";
    if (t.jitter_us < 0 || t.jitter_us * 2 >= t.period_us) {
      return "traffic jitter_us must be in [0, period/2)";
    }
  }
  for (const auto& [du, onu] : du_to_onu) {
    if (!onu_index(onu)) return "du_to_onu maps " + du + " to unknown onu " + onu;
  }
  return std::nullopt;
}

ScenarioConfig ScenarioConfig::from_json(const json& doc) {
  ScenarioConfig cfg;
  try {
    cfg.name = doc.value("name", cfg.name);
    cfg.n_channels = doc.value("channels", cfg.n_channels);
    cfg.n_onus = doc.value("onus", cfg.n_onus);
    if (doc.contains("onu_to_channel")) {
      cfg.onu_to_channel = doc.at("onu_to_channel").get<std::vector<int>>();
    } else {
      cfg.onu_to_channel.resize(cfg.n_onus);
      for (int i = 0; i < cfg.n_onus; ++i) cfg.onu_to_channel[i] = i % std::max(1, cfg.n_channels);
    }
    if (doc.contains("du_to_onu")) {
      cfg.du_to_onu = doc.at("du_to_onu").get<std::map<std::string, std::string>>();
    } else if (doc.contains("dus")) {
      const int dus = doc.at("dus").get<int>();
      for (int i = 0; i < dus; ++i) {
        cfg.du_to_onu["du-" + std::to_string(i)] = "onu-" + std::to_string(i);
      }
    }
    cfg.dba_cycle_us = doc.value("dba_cycle_us", cfg.dba_cycle_us);
    cfg.prop_delay_us = doc.value("prop_delay_us", cfg.prop_delay_us);
    cfg.line_rate_gbps = doc.value("line_rate_gbps", cfg.line_rate_gbps);
    cfg.announce_lead_us = doc.value("announce_lead_us", cfg.announce_lead_us);
    cfg.switch_penalty_us = doc.value("switch_penalty_us", cfg.switch_penalty_us);
    cfg.duration_us = doc.value("duration_us", cfg.duration_us);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.queue_cap_bytes = doc.value("queue_cap_bytes", cfg.queue_cap_bytes);
    cfg.queue_bytes_period_ms = doc.value("queue_bytes_period_ms", cfg.queue_bytes_period_ms);
    cfg.channel_util_period_ms = doc.value("channel_util_period_ms", cfg.channel_util_period_ms);
    cfg.balancer_threshold = doc.value("balancer_threshold", cfg.balancer_threshold);
    cfg.balancer_min_interval_us =
        doc.value("balancer_min_interval_us", cfg.balancer_min_interval_us);
    if (doc.contains("traffic")) {
      for (const auto& t : doc.at("traffic")) {
        TrafficSpec spec;
        spec.du = t.at("du").get<std::string>();
        const std::string model = t.value("model", "periodic");
        if (model == "periodic") {
          spec.model = TrafficSpec::Model::Periodic;
        } else if (model == "poisson") {
          spec.model = TrafficSpec::Model::Poisson;
        } else {
          throw std::invalid_argument("unknown traffic model: " + model);
        }
        spec.bytes = t.at("bytes").get<std::uint64_t>();
        spec.period_us = t.at("period_us").get<std::int64_t>();
        spec.jitter_us = t.value("jitter_us", 0);
        if (t.contains("phase_us")) spec.phase_us = t.at("phase_us").get<std::int64_t>();
        spec.announced = t.value("announced", false);
        cfg.traffic.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }
  if (auto err = cfg.validate()) throw std::invalid_argument("scenario: " + *err);
  return cfg;
}

json ScenarioConfig::to_json() const {
  json traffic_arr = json::array();
  for (const auto& t : traffic) {
    json entry{{"du", t.du},
               {"model", t.model == TrafficSpec::Model::Periodic ? "periodic" : "poisson"},
               {"bytes", t.bytes},
               {"period_us", t.period_us},
               {"jitter_us", t.jitter_us},
               {"announced", t.announced}};
    if (t.phase_us) entry["phase_us"] = *t.phase_us;
    traffic_arr.push_back(std::move(entry));
  }
  return json{{"name", name},
              {"channels", n_channels},
              {"onus", n_onus},
              {"onu_to_channel", onu_to_channel},
              {"du_to_onu", du_to_onu},
              {"dba_cycle_us", dba_cycle_us},
              {"prop_delay_us", prop_delay_us},
              {"line_rate_gbps", line_rate_gbps},
              {"announce_lead_us", announce_lead_us},
              {"switch_penalty_us", switch_penalty_us},
              {"duration_us", duration_us},
              {"seed", seed},
              {"queue_cap_bytes", queue_cap_bytes},
              {"queue_bytes_period_ms", queue_bytes_period_ms},
              {"channel_util_period_ms", channel_util_period_ms},
              {"balancer_threshold", balancer_threshold},
              {"balancer_min_interval_us", balancer_min_interval_us},
              {"traffic", std::move(traffic_arr)}};
}

}  // namespace aicf::sim

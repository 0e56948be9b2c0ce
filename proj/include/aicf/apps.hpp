#pragma once

#include <memory>

#include "aicf/control_app.hpp"

namespace aicf::apps {

/// Cooperative-DBA application. Consumes `ul_grant_bytes` announcements from
/// DU agents and pre-grants the announced capacity at the OLT, one control
/// per announcement on the per-ONU `grant_map_<onu>` params.
///
/// params: {"olt": "olt-0", "du_to_onu": {"du-0": "onu-0", ...},
///          "priority": 10}
std::shared_ptr<ControlApp> make_coop_dba(const json& params);

/// Channel-balancing application. Watches the OLT's per-channel utilization
/// and retunes ONUs (param `onu_channel`) from the busiest channel to the
/// least busy one when the spread exceeds a threshold.
///
/// params: {"olt": "olt-0", "onus": ["onu-0", ...],
///          "initial_channels": [0, ...], "n_channels": 2,
///          "threshold": 0.1, "min_interval_us": 1000, "priority": 5}
std::shared_ptr<ControlApp> make_channel_balancer(const json& params);

/// Builds a bundled app by name ("coop_dba" | "channel_balancer").
/// Returns nullptr for unknown names or bad params.
std::shared_ptr<ControlApp> make_app(const std::string& name, const json& params);

}  // namespace aicf::apps

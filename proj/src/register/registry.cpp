#include "aicf/registry.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace aicf {

std::string_view to_string(ConflictPolicy policy) {
  return policy == ConflictPolicy::Reject ? "reject" : "priority_preempt";
}

std::optional<ConflictPolicy> conflict_policy_from_string(std::string_view name) {
  if (name == "reject") return ConflictPolicy::Reject;
  if (name == "priority_preempt" || name == "priority-preempt") return ConflictPolicy::PriorityPreempt;
  return std::nullopt;
}

Registry::Outcome Registry::register_node(const NodeDescriptor& descriptor) {
  Outcome out;
  if (auto err = descriptor.validate()) {
    out.error = {RegistryCode::Malformed, *err, {}};
    return out;
  }
  auto existing = nodes_.find(descriptor.node_id);
  if (existing != nodes_.end()) {
    // Replacement is allowed only if it leaves no claim dangling.
    std::string orphans;
    for (const auto& [key, app] : claims_) {
      if (key.first != descriptor.node_id) continue;
      if (!descriptor.find_control(key.second)) {
        if (!orphans.empty()) orphans += ", ";
        orphans += key.second + " (claimed by " + app + ")";
      }
    }
    if (!orphans.empty()) {
      out.error = {RegistryCode::DuplicateId,
                   "re-registration of '" + descriptor.node_id +
                       "' would orphan claimed params: " + orphans,
                   {}};
      return out;
    }
  }
  nodes_[descriptor.node_id] = descriptor;
  out.ok = true;
  return out;
}

Registry::Outcome Registry::register_app(const AppDescriptor& descriptor) {
  Outcome out;
  if (auto err = descriptor.validate()) {
    out.error = {RegistryCode::Malformed, *err, {}};
    return out;
  }
  if (apps_.count(descriptor.app_id) > 0) {
    out.error = {RegistryCode::DuplicateId, "app '" + descriptor.app_id + "' already registered", {}};
    return out;
  }

  // Check everything first; commit only when the whole descriptor is
  // satisfiable.
  std::vector<std::pair<std::string, std::string>> missing_nodes;
  std::vector<std::pair<std::string, std::string>> missing_metrics;
  std::vector<std::pair<std::string, std::string>> missing_params;
  std::vector<std::string> conflicts;
  std::vector<Revocation> preempted;

  for (const auto& [node_id, metric] : descriptor.required_measurements) {
    auto it = nodes_.find(node_id);
    if (it == nodes_.end()) {
      missing_nodes.emplace_back(node_id, "");
    } else if (!it->second.find_metric(metric)) {
      missing_metrics.emplace_back(node_id, metric);
    }
  }
  for (const auto& [node_id, param] : descriptor.controlled_params) {
    auto it = nodes_.find(node_id);
    if (it == nodes_.end()) {
      missing_nodes.emplace_back(node_id, "");
      continue;
    }
    if (!it->second.find_control(param)) {
      missing_params.emplace_back(node_id, param);
      continue;
    }
    auto claim = claims_.find({node_id, param});
    if (claim == claims_.end()) continue;
    const std::string& holder = claim->second;
    bool preemptable = policy_ == ConflictPolicy::PriorityPreempt &&
                       descriptor.priority > apps_.at(holder).priority;
    if (preemptable) {
      preempted.push_back({holder, node_id, param});
    } else {
      conflicts.push_back(node_id + "/" + param + " held by " + holder);
    }
  }

  if (!missing_nodes.empty() || !missing_metrics.empty() || !missing_params.empty() ||
      !conflicts.empty()) {
    RegistryError err;
    std::ostringstream detail;
    if (!missing_nodes.empty()) {
      err.code = RegistryCode::MissingNode;
      detail << missing_nodes.size() << " missing node(s)";
    } else if (!missing_metrics.empty()) {
      err.code = RegistryCode::MissingMetric;
      detail << missing_metrics.size() << " missing metric(s)";
    } else if (!missing_params.empty()) {
      err.code = RegistryCode::MissingParam;
      detail << missing_params.size() << " missing param(s)";
    } else {
      err.code = RegistryCode::Conflict;
      detail << conflicts.size() << " claim conflict(s)";
    }
    for (const auto& m : missing_nodes) err.missing.push_back(m);
    for (const auto& m : missing_metrics) err.missing.push_back(m);
    for (const auto& m : missing_params) err.missing.push_back(m);
    if (!conflicts.empty()) {
      detail << ":";
      for (const auto& c : conflicts) detail << " " << c << ";";
    }
    err.detail = detail.str();
    out.error = std::move(err);
    return out;
  }

  apps_[descriptor.app_id] = descriptor;
  for (const auto& r : preempted) claims_.erase({r.node_id, r.param});
  for (const auto& [node_id, param] : descriptor.controlled_params) {
    claims_[{node_id, param}] = descriptor.app_id;
  }
  out.ok = true;
  out.revocations = std::move(preempted);
  return out;
}

Registry::Outcome Registry::deregister(Kind kind, const std::string& id) {
  Outcome out;
  if (kind == Kind::App) {
    if (apps_.erase(id) == 0) {
      out.error = {RegistryCode::UnknownId, "unknown app: " + id, {}};
      return out;
    }
    for (auto it = claims_.begin(); it != claims_.end();) {
      it = it->second == id ? claims_.erase(it) : std::next(it);
    }
    origins_.erase(id);
    out.ok = true;
    return out;
  }
  if (nodes_.erase(id) == 0) {
    out.error = {RegistryCode::UnknownId, "unknown node: " + id, {}};
    return out;
  }
  for (auto it = claims_.begin(); it != claims_.end();) {
    if (it->first.first == id) {
      out.revocations.push_back({it->second, it->first.first, it->first.second});
      it = claims_.erase(it);
    } else {
      ++it;
    }
  }
  out.ok = true;
  return out;
}

std::vector<NodeDescriptor> Registry::all_nodes() const {
  std::vector<NodeDescriptor> out;
  out.reserve(nodes_.size());
  for (const auto& [id, d] : nodes_) out.push_back(d);
  return out;
}

std::optional<NodeDescriptor> Registry::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return std::nullopt;
  return it->second;
}

std::vector<AppDescriptor> Registry::apps() const {
  std::vector<AppDescriptor> out;
  out.reserve(apps_.size());
  for (const auto& [id, d] : apps_) out.push_back(d);
  return out;
}

std::vector<std::tuple<std::string, std::string, std::string>> Registry::claims() const {
  std::vector<std::tuple<std::string, std::string, std::string>> out;
  out.reserve(claims_.size());
  for (const auto& [key, app] : claims_) out.emplace_back(key.first, key.second, app);
  return out;
}

std::optional<std::string> Registry::claim_holder(const std::string& node_id,
                                                  const std::string& param) const {
  auto it = claims_.find({node_id, param});
  if (it == claims_.end()) return std::nullopt;
  return it->second;
}

void Registry::set_app_origin(const std::string& app_id, const std::string& sender) {
  origins_[app_id] = sender;
}

std::optional<std::string> Registry::app_origin(const std::string& app_id) const {
  auto it = origins_.find(app_id);
  if (it == origins_.end()) return std::nullopt;
  return it->second;
}

json Registry::snapshot_json() const {
  json nodes = json::object();
  for (const auto& [id, d] : nodes_) nodes[id] = d;
  json apps = json::object();
  for (const auto& [id, d] : apps_) apps[id] = d;
  json claims = json::array();
  for (const auto& [key, app] : claims_) claims.push_back({key.first, key.second, app});
  return json{{"policy", std::string(to_string(policy_))},
              {"nodes", std::move(nodes)},
              {"apps", std::move(apps)},
              {"claims", std::move(claims)},
              {"origins", origins_}};
}

std::optional<Registry> Registry::from_snapshot_json(const json& doc) {
  try {
    auto policy = conflict_policy_from_string(doc.at("policy").get<std::string>());
    if (!policy) return std::nullopt;
    Registry reg(*policy);
    for (const auto& [id, d] : doc.at("nodes").items()) {
      NodeDescriptor desc = d.get<NodeDescriptor>();
      if (desc.node_id != id || desc.validate()) return std::nullopt;
      reg.nodes_[id] = std::move(desc);
    }
    for (const auto& [id, d] : doc.at("apps").items()) {
      AppDescriptor desc = d.get<AppDescriptor>();
      if (desc.app_id != id || desc.validate()) return std::nullopt;
      reg.apps_[id] = std::move(desc);
    }
    for (const auto& entry : doc.at("claims")) {
      auto node = entry.at(0).get<std::string>();
      auto param = entry.at(1).get<std::string>();
      auto app = entry.at(2).get<std::string>();
      auto node_it = reg.nodes_.find(node);
      if (node_it == reg.nodes_.end() || !node_it->second.find_control(param) ||
          reg.apps_.count(app) == 0) {
        return std::nullopt;  // claims must reference live entries
      }
      reg.claims_[{node, param}] = app;
    }
    reg.origins_ = doc.value("origins", std::map<std::string, std::string>{});
    return reg;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void Registry::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write snapshot: " + tmp);
    out << snapshot_json().dump(2) << "\n";
    if (!out.good()) throw std::runtime_error("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("rename failed: " + tmp + " -> " + path);
  }
}

std::optional<Registry> Registry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) return std::nullopt;
  return from_snapshot_json(doc);
}

bool Registry::operator==(const Registry& other) const {
  return policy_ == other.policy_ && nodes_ == other.nodes_ && apps_ == other.apps_ &&
         claims_ == other.claims_;
}

}  // namespace aicf

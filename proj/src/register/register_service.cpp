#include "aicf/register_service.hpp"

#include <spdlog/spdlog.h>

namespace aicf {

std::string register_reply_topic(std::string_view client_id) {
  return "register/reply/" + std::string(client_id);
}

RegisterService::RegisterService(Registry& registry, std::shared_ptr<BrokerClient> client,
                                 RegisterServiceOptions options)
    : registry_(registry), client_(std::move(client)), options_(std::move(options)) {}

void RegisterService::start() {
  client_->set_on_envelope([this](const Envelope& env) { handle(env); });
  client_->subscribe(std::string(kTopicRegisterNode));
  client_->subscribe(std::string(kTopicRegisterApp));
  client_->subscribe(std::string(kTopicDeregister));
  client_->subscribe(std::string(kTopicLookup));
}

void RegisterService::ack(const std::string& to, std::uint64_t req_id, json extra) {
  extra["to"] = to;
  extra["req_id"] = req_id;
  extra["ok"] = true;
  client_->send(MsgType::RegisterAck, std::move(extra));
}

void RegisterService::fail(const std::string& to, std::uint64_t req_id,
                           const RegistryError& error) {
  json payload = error;
  payload["to"] = to;
  payload["req_id"] = req_id;
  client_->send(MsgType::Exception, std::move(payload));
}

void RegisterService::notify_revocations(const std::vector<Revocation>& revocations) {
  for (const auto& r : revocations) {
    auto origin = registry_.app_origin(r.app_id);
    if (!origin) {
      spdlog::warn("register: no origin for revoked app {}, notice dropped", r.app_id);
      continue;
    }
    client_->send(MsgType::Exception, json{{"to", *origin},
                                           {"code", "REVOKED"},
                                           {"detail", "claim revoked"},
                                           {"app_id", r.app_id},
                                           {"node_id", r.node_id},
                                           {"param", r.param}});
  }
}

void RegisterService::persist() {
  if (options_.snapshot_path.empty()) return;
  try {
    registry_.save(options_.snapshot_path);
  } catch (const std::exception& e) {
    spdlog::error("register: snapshot failed: {}", e.what());
  }
}

void RegisterService::handle(const Envelope& env) {
  const std::string& to = env.sender;
  const std::uint64_t req_id = env.payload.value("req_id", 0ull);

  auto malformed = [&](const std::string& what) {
    fail(to, req_id, RegistryError{RegistryCode::Malformed, what, {}});
  };

  try {
    switch (env.type) {
      case MsgType::RegisterNode: {
        if (!env.payload.contains("node")) return malformed("missing 'node' descriptor");
        auto desc = env.payload.at("node").get<NodeDescriptor>();
        auto out = registry_.register_node(desc);
        if (!out.ok) return fail(to, req_id, out.error);
        persist();
        return ack(to, req_id, json{{"kind", "node"}, {"id", desc.node_id}});
      }
      case MsgType::RegisterApp: {
        if (!env.payload.contains("app")) return malformed("missing 'app' descriptor");
        auto desc = env.payload.at("app").get<AppDescriptor>();
        auto out = registry_.register_app(desc);
        if (!out.ok) return fail(to, req_id, out.error);
        registry_.set_app_origin(desc.app_id, env.sender);
        notify_revocations(out.revocations);
        persist();
        // The ack carries the ParamSpecs of every claimed param so the
        // engine can range-check emissions locally.
        json params = json::object();
        for (const auto& [node_id, param] : desc.controlled_params) {
          auto node = registry_.node(node_id);
          const ParamSpec* spec = node ? node->find_control(param) : nullptr;
          if (spec) params[node_id][param] = *spec;
        }
        return ack(to, req_id, json{{"kind", "app"}, {"id", desc.app_id}, {"params", params}});
      }
      case MsgType::Deregister: {
        const std::string kind = env.payload.value("kind", "");
        const std::string id = env.payload.value("id", "");
        if (id.empty() || (kind != "node" && kind != "app")) {
          return malformed("deregister needs kind in {node, app} and an id");
        }
        auto out = registry_.deregister(kind == "node" ? Registry::Kind::Node : Registry::Kind::App, id);
        if (!out.ok) return fail(to, req_id, out.error);
        notify_revocations(out.revocations);
        persist();
        return ack(to, req_id, json{{"kind", kind}, {"id", id}});
      }
      case MsgType::Publish: {
        if (!env.topic || *env.topic != kTopicLookup) return;
        const json& query = env.payload.contains("query") ? env.payload.at("query") : json::object();
        const std::string kind = query.value("kind", "");
        json result;
        if (kind == "all_nodes") {
          result = registry_.all_nodes();
        } else if (kind == "node") {
          auto node = registry_.node(query.value("id", ""));
          if (!node) {
            return fail(to, req_id,
                        RegistryError{RegistryCode::UnknownId,
                                      "unknown node: " + query.value("id", ""), {}});
          }
          result = *node;
        } else if (kind == "apps") {
          result = registry_.apps();
        } else if (kind == "claims") {
          result = json::array();
          for (const auto& [node_id, param, app] : registry_.claims()) {
            result.push_back({node_id, param, app});
          }
        } else {
          return malformed("unknown lookup kind: " + kind);
        }
        return ack(to, req_id, json{{"result", std::move(result)}});
      }
      default:
        return;
    }
  } catch (const json::exception& e) {
    malformed(std::string("bad payload: ") + e.what());
  }
}

}  // namespace aicf

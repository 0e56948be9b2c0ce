#include "aicf/register_client.hpp"

namespace aicf {

std::uint64_t RegisterClient::track(ResultFn fn) {
  std::uint64_t req_id = client_->next_req_id();
  std::lock_guard lk(mu_);
  pending_[req_id] = std::move(fn);
  return req_id;
}

std::uint64_t RegisterClient::register_node(const NodeDescriptor& descriptor, ResultFn fn) {
  auto req_id = track(std::move(fn));
  client_->send(MsgType::RegisterNode, json{{"req_id", req_id}, {"node", descriptor}});
  return req_id;
}

std::uint64_t RegisterClient::register_app(const AppDescriptor& descriptor, ResultFn fn) {
  auto req_id = track(std::move(fn));
  client_->send(MsgType::RegisterApp, json{{"req_id", req_id}, {"app", descriptor}});
  return req_id;
}

std::uint64_t RegisterClient::deregister(Registry::Kind kind, const std::string& id, ResultFn fn) {
  auto req_id = track(std::move(fn));
  client_->send(MsgType::Deregister,
                json{{"req_id", req_id},
                     {"kind", kind == Registry::Kind::Node ? "node" : "app"},
                     {"id", id}});
  return req_id;
}

std::uint64_t RegisterClient::lookup(json query, ResultFn fn) {
  auto req_id = track(std::move(fn));
  client_->publish(std::string(kTopicLookup), json{{"req_id", req_id}, {"query", std::move(query)}});
  return req_id;
}

void RegisterClient::abandon(std::uint64_t req_id) {
  std::lock_guard lk(mu_);
  pending_.erase(req_id);
}

bool RegisterClient::handle_reply(const Envelope& env) {
  if (env.type != MsgType::RegisterAck && env.type != MsgType::Exception) return false;
  if (env.payload.value("to", std::string()) != client_->id()) return false;

  if (env.type == MsgType::Exception && env.payload.value("code", "") == "REVOKED") {
    if (on_revoked_) {
      on_revoked_(env.payload.value("app_id", ""), env.payload.value("node_id", ""),
                  env.payload.value("param", ""));
    }
    return true;
  }

  const std::uint64_t req_id = env.payload.value("req_id", 0ull);
  ResultFn fn;
  {
    std::lock_guard lk(mu_);
    auto it = pending_.find(req_id);
    if (it == pending_.end()) return true;  // stale or abandoned reply
    fn = std::move(it->second);
    pending_.erase(it);
  }
  if (env.type == MsgType::RegisterAck) {
    fn(true, RegistryError{}, env.payload);
  } else {
    RegistryError err = env.payload.get<RegistryError>();
    fn(false, err, env.payload);
  }
  return true;
}

}  // namespace aicf

#include "aicf/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <spdlog/spdlog.h>

#include "aicf/topic.hpp"

namespace aicf {

namespace {

std::optional<std::pair<std::string, std::string>> parse_pm_topic(const std::string& topic) {
  auto segs = split_topic(topic);
  if (!segs || segs->size() != 4) return std::nullopt;
  if ((*segs)[0] != "node" || (*segs)[2] != "pm") return std::nullopt;
  return std::make_pair((*segs)[1], (*segs)[3]);
}

}  // namespace

struct Engine::AppRec {
  std::shared_ptr<ControlApp> app;
  std::string app_id;
  AppState state = AppState::Loading;
  std::recursive_mutex cb_mu;  // per-app callback serialization
  bool in_callback = false;    // reentrancy guard
  std::set<std::pair<std::string, std::string>> claims;
  std::map<std::pair<std::string, std::string>, ParamSpec> specs;
  std::vector<std::string> pm_topics;
  TimerId tick_timer = 0;
  json kv = json::object();
  std::unique_ptr<CtxImpl> ctx;
};

class Engine::CtxImpl : public EngineContext {
 public:
  CtxImpl(Engine& engine, AppRec& rec) : engine_(engine), rec_(rec) {}

  EmitStatus emit_control(const std::string& node_id, const std::string& param,
                          const json& value) override {
    return engine_.emit_control(rec_, node_id, param, value);
  }

  SendStatus send_interai(const std::string& peer_id, json payload) override {
    return engine_.send_interai(peer_id, std::move(payload));
  }

  void query_register(json query, LookupFn fn) override {
    auto rec = &rec_;
    Engine* engine = &engine_;
    engine_.register_client_->lookup(std::move(query),
                                     [engine, rec, fn](bool ok, const RegistryError& err,
                                                       const json& payload) {
                                       engine->run_callback(*rec, "query_register",
                                                            [&](EngineContext&) {
                                                              fn(ok, err, payload);
                                                            });
                                     });
  }

  std::uint64_t now_us() override { return engine_.executor_.now_us(); }

  json kv_get(const std::string& key) override {
    auto it = rec_.kv.find(key);
    return it == rec_.kv.end() ? json() : *it;
  }

  void kv_put(const std::string& key, json value) override {
    rec_.kv[key] = std::move(value);
    engine_.save_kv(rec_);
  }

  const std::string& controller_id() const override { return engine_.options_.engine_id; }

 private:
  Engine& engine_;
  AppRec& rec_;
};

Engine::Engine(EngineOptions options, Network& net, Executor& executor)
    : options_(std::move(options)), net_(net), executor_(executor) {
  node_client_ = std::make_shared<BrokerClient>(options_.engine_id, options_.node_broker_endpoint,
                                                net_, executor_);
  register_client_ = std::make_unique<RegisterClient>(node_client_);
  if (!options_.interai_broker_endpoint.empty()) {
    interai_client_ = std::make_shared<BrokerClient>(
        options_.engine_id, options_.interai_broker_endpoint, net_, executor_);
  }
}

Engine::~Engine() { stop(); }

void Engine::start() {
  if (started_) return;
  started_ = true;

  node_client_->set_on_envelope([this](const Envelope& env) { dispatch_node_envelope(env); });
  register_client_->begin();
  register_client_->set_on_revoked(
      [this](const std::string& app_id, const std::string& node_id, const std::string& param) {
        handle_revoked(app_id, node_id, param);
      });
  node_client_->start();

  if (interai_client_) {
    interai_client_->set_on_envelope(
        [this](const Envelope& env) { dispatch_interai_envelope(env); });
    interai_client_->subscribe("interai/" + options_.engine_id + "/inbox");
    interai_client_->start();
  }

  for (const auto& link : options_.peers) {
    Peer peer;
    peer.link = link;
    if (link.native) {
      peer.client = std::make_shared<BrokerClient>(options_.engine_id, link.endpoint, net_,
                                                   executor_);
      peer.client->start();
    } else {
      auto translator = translators_.find(link.kind);
      if (!translator) {
        spdlog::error("engine {}: no translator for peer {} kind '{}'", options_.engine_id,
                      link.peer_id, link.kind);
        continue;
      }
      peer.foreign = std::make_shared<ForeignLink>(translator, link.endpoint, net_, executor_,
                                                   options_.peer_dial_retries);
      peer.foreign->start();
    }
    peers_.emplace(link.peer_id, std::move(peer));
  }
}

void Engine::stop() {
  if (!started_) return;
  started_ = false;
  std::vector<std::shared_ptr<AppRec>> apps;
  {
    std::lock_guard lk(mu_);
    for (auto& [id, rec] : apps_) apps.push_back(rec);
  }
  for (auto& rec : apps) {
    if (rec->tick_timer != 0) executor_.cancel(rec->tick_timer);
    if (rec->state == AppState::Running) {
      run_callback(*rec, "on_stop", [&](EngineContext& ctx) { rec->app->on_stop(ctx); });
      rec->state = AppState::Stopped;
    }
  }
  for (auto& [id, peer] : peers_) {
    if (peer.client) peer.client->stop();
    if (peer.foreign) peer.foreign->stop();
  }
  if (interai_client_) interai_client_->stop();
  node_client_->stop();
}

void Engine::load_app(std::shared_ptr<ControlApp> app, LoadFn done) {
  const AppDescriptor& desc = app->descriptor();
  auto rec = std::make_shared<AppRec>();
  rec->app = app;
  rec->app_id = desc.app_id;
  rec->ctx = std::make_unique<CtxImpl>(*this, *rec);
  {
    std::lock_guard lk(mu_);
    if (apps_.count(desc.app_id) > 0) {
      done(false, RegistryError{RegistryCode::DuplicateId,
                                "app '" + desc.app_id + "' already loaded", {}});
      return;
    }
    apps_[desc.app_id] = rec;
  }

  register_client_->register_app(desc, [this, rec, done](bool ok, const RegistryError& err,
                                                         const json& ack) {
    if (!ok) {
      std::lock_guard lk(mu_);
      apps_.erase(rec->app_id);
      done(false, err);
      return;
    }
    const AppDescriptor& d = rec->app->descriptor();
    for (const auto& [node, param] : d.controlled_params) {
      rec->claims.insert({node, param});
      if (ack.contains("params") && ack["params"].contains(node) &&
          ack["params"][node].contains(param)) {
        rec->specs[{node, param}] = ack["params"][node][param].get<ParamSpec>();
      }
    }
    std::vector<std::string> topics;
    for (const auto& [node, metric] : d.required_measurements) {
      topics.push_back(pm_topic(node, metric));
    }
    std::sort(topics.begin(), topics.end());
    topics.erase(std::unique(topics.begin(), topics.end()), topics.end());
    rec->pm_topics = topics;
    add_subscriptions(topics);
    load_kv(*rec);
    rec->state = AppState::Running;
    run_callback(*rec, "on_start", [&](EngineContext& ctx) { rec->app->on_start(ctx); });
    schedule_tick(rec);
    done(true, RegistryError{});
  });
}

void Engine::unload_app(const std::string& app_id, LoadFn done) {
  std::shared_ptr<AppRec> rec;
  {
    std::lock_guard lk(mu_);
    auto it = apps_.find(app_id);
    if (it == apps_.end() || it->second->state != AppState::Running) {
      done(false, RegistryError{RegistryCode::UnknownId, "unknown app: " + app_id, {}});
      return;
    }
    rec = it->second;
  }
  if (rec->tick_timer != 0) {
    executor_.cancel(rec->tick_timer);
    rec->tick_timer = 0;
  }
  run_callback(*rec, "on_stop", [&](EngineContext& ctx) { rec->app->on_stop(ctx); });
  rec->state = AppState::Stopped;
  save_kv(*rec);
  drop_subscriptions(rec->pm_topics);
  {
    std::lock_guard lk(mu_);
    apps_.erase(app_id);
  }
  register_client_->deregister(Registry::Kind::App, app_id,
                               [done](bool ok, const RegistryError& err, const json&) {
                                 done(ok, err);
                               });
}

std::optional<Engine::AppState> Engine::app_state(const std::string& app_id) const {
  std::lock_guard lk(mu_);
  auto it = apps_.find(app_id);
  if (it == apps_.end()) return std::nullopt;
  return it->second->state;
}

std::set<std::string> Engine::pm_subscriptions() const {
  std::lock_guard lk(mu_);
  std::set<std::string> out;
  for (const auto& [topic, count] : sub_refcount_) {
    if (count > 0) out.insert(topic);
  }
  return out;
}

EngineStats Engine::stats() const {
  std::lock_guard lk(stats_mu_);
  return stats_;
}

std::shared_ptr<ForeignLink> Engine::foreign_link(const std::string& peer_id) const {
  auto it = peers_.find(peer_id);
  if (it == peers_.end()) return nullptr;
  return it->second.foreign;
}

void Engine::add_subscriptions(const std::vector<std::string>& topics) {
  std::vector<std::string> fresh;
  {
    std::lock_guard lk(mu_);
    for (const auto& t : topics) {
      if (sub_refcount_[t]++ == 0) fresh.push_back(t);
    }
  }
  for (const auto& t : fresh) node_client_->subscribe(t);
}

void Engine::drop_subscriptions(const std::vector<std::string>& topics) {
  std::vector<std::string> stale;
  {
    std::lock_guard lk(mu_);
    for (const auto& t : topics) {
      auto it = sub_refcount_.find(t);
      if (it == sub_refcount_.end()) continue;
      if (--it->second <= 0) {
        sub_refcount_.erase(it);
        stale.push_back(t);
      }
    }
  }
  for (const auto& t : stale) node_client_->unsubscribe(t);
}

void Engine::run_callback(AppRec& rec, const char* what,
                          const std::function<void(EngineContext&)>& fn) {
  std::lock_guard lk(rec.cb_mu);
  if (rec.in_callback) {
    // Reentrant ctx use from inside a callback is allowed (recursive mutex);
    // overlapping callbacks from different threads are not possible here.
    fn(*rec.ctx);
    return;
  }
  rec.in_callback = true;
  const auto start = std::chrono::steady_clock::now();
  fn(*rec.ctx);
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start)
          .count();
  rec.in_callback = false;
  if (static_cast<std::uint64_t>(elapsed) > options_.callback_budget_us) {
    std::lock_guard slk(stats_mu_);
    ++stats_.budget_overruns;
    spdlog::warn("engine {}: app {} {} overran budget ({} us)", options_.engine_id, rec.app_id,
                 what, elapsed);
  }
}

void Engine::schedule_tick(const std::shared_ptr<AppRec>& rec) {
  const std::uint64_t period = rec->app->tick_period_us();
  if (period == 0) return;
  rec->tick_timer = executor_.schedule(period, [this, rec] {
    if (rec->state != AppState::Running) return;
    run_callback(*rec, "on_tick", [&](EngineContext& ctx) {
      rec->app->on_tick(ctx, executor_.now_us());
    });
    schedule_tick(rec);
  });
}

void Engine::dispatch_node_envelope(const Envelope& env) {
  if (register_client_->handle_reply(env)) return;
  if (env.type != MsgType::Publish || !env.topic) return;
  auto pm = parse_pm_topic(*env.topic);
  if (!pm) return;
  dispatch_measurement(pm->first, pm->second, env);
}

void Engine::dispatch_measurement(const std::string& node_id, const std::string& metric,
                                  const Envelope& env) {
  if (!env.payload.contains("value")) {
    std::lock_guard slk(stats_mu_);
    ++stats_.malformed_measurements;
    return;
  }
  const json& value = env.payload.at("value");

  std::vector<std::shared_ptr<AppRec>> targets;
  {
    std::lock_guard lk(mu_);
    for (auto& [id, rec] : apps_) {
      if (rec->state != AppState::Running) continue;
      for (const auto& [n, m] : rec->app->descriptor().required_measurements) {
        if (n == node_id && m == metric) {
          targets.push_back(rec);
          break;
        }
      }
    }
  }
  for (auto& rec : targets) {
    run_callback(*rec, "on_measurement", [&](EngineContext& ctx) {
      rec->app->on_measurement(ctx, node_id, metric, value, env.ts_us);
    });
    std::lock_guard slk(stats_mu_);
    ++stats_.measurements_dispatched;
  }
}

void Engine::dispatch_interai_envelope(const Envelope& env) {
  if (env.type != MsgType::InterAi) return;
  const std::string peer_id = env.payload.value("from", env.sender);
  const json data = env.payload.contains("data") ? env.payload.at("data") : json::object();
  {
    std::lock_guard slk(stats_mu_);
    ++stats_.interai_received;
  }
  std::vector<std::shared_ptr<AppRec>> targets;
  {
    std::lock_guard lk(mu_);
    for (auto& [id, rec] : apps_) {
      if (rec->state == AppState::Running) targets.push_back(rec);
    }
  }
  for (auto& rec : targets) {
    run_callback(*rec, "on_interai", [&](EngineContext& ctx) {
      rec->app->on_interai(ctx, peer_id, data);
    });
  }
}

void Engine::handle_revoked(const std::string& app_id, const std::string& node_id,
                            const std::string& param) {
  std::shared_ptr<AppRec> rec;
  {
    std::lock_guard lk(mu_);
    auto it = apps_.find(app_id);
    if (it == apps_.end()) return;
    rec = it->second;
  }
  rec->claims.erase({node_id, param});
  rec->specs.erase({node_id, param});
  run_callback(*rec, "on_revoked", [&](EngineContext& ctx) {
    rec->app->on_revoked(ctx, node_id, param);
  });
}

EngineContext::EmitStatus Engine::emit_control(AppRec& rec, const std::string& node_id,
                                               const std::string& param, const json& value) {
  auto blocked = [this](EngineContext::EmitStatus status) {
    std::lock_guard slk(stats_mu_);
    ++stats_.controls_blocked;
    return status;
  };
  if (rec.state != AppState::Running) return blocked(EngineContext::EmitStatus::NotRunning);
  if (rec.claims.count({node_id, param}) == 0) {
    return blocked(EngineContext::EmitStatus::NotClaimed);
  }
  auto spec = rec.specs.find({node_id, param});
  if (spec != rec.specs.end() && !spec->second.admits(value)) {
    return blocked(EngineContext::EmitStatus::OutOfRange);
  }
  node_client_->publish(ctrl_topic(node_id, param),
                        json{{"param", param}, {"value", value}, {"app_id", rec.app_id}});
  std::lock_guard slk(stats_mu_);
  ++stats_.controls_emitted;
  return EngineContext::EmitStatus::Ok;
}

EngineContext::SendStatus Engine::send_interai(const std::string& peer_id, json payload) {
  auto it = peers_.find(peer_id);
  if (it == peers_.end()) return EngineContext::SendStatus::UnknownPeer;
  Peer& peer = it->second;
  json wrapped{{"to", peer_id}, {"from", options_.engine_id}, {"data", std::move(payload)}};
  if (peer.client) {
    if (!peer.client->connected() &&
        peer.client->dial_attempts() >= static_cast<std::uint64_t>(options_.peer_dial_retries)) {
      return EngineContext::SendStatus::Unreachable;
    }
    if (!peer.client->send(MsgType::InterAi, std::move(wrapped))) {
      return EngineContext::SendStatus::Unreachable;
    }
  } else if (peer.foreign) {
    Envelope env;
    env.type = MsgType::InterAi;
    env.sender = options_.engine_id;
    env.ts_us = executor_.now_us();
    env.seq = 0;
    env.payload = std::move(wrapped);
    auto status = peer.foreign->send(env);
    if (status != ForeignLink::SendStatus::Ok) return EngineContext::SendStatus::Unreachable;
  } else {
    return EngineContext::SendStatus::UnknownPeer;
  }
  std::lock_guard slk(stats_mu_);
  ++stats_.interai_sent;
  return EngineContext::SendStatus::Ok;
}

void Engine::load_kv(AppRec& rec) {
  if (options_.state_dir.empty()) return;
  std::ifstream in(options_.state_dir + "/" + rec.app_id + ".json");
  if (!in) return;
  json doc = json::parse(in, nullptr, false);
  if (!doc.is_discarded() && doc.is_object()) rec.kv = std::move(doc);
}

void Engine::save_kv(AppRec& rec) {
  if (options_.state_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(options_.state_dir, ec);
  const std::string path = options_.state_dir + "/" + rec.app_id + ".json";
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) {
      spdlog::error("engine {}: cannot persist kv for {}", options_.engine_id, rec.app_id);
      return;
    }
    out << rec.kv.dump();
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace aicf

#include <map>

#include <spdlog/spdlog.h>

#include "aicf/apps.hpp"

namespace aicf::apps {

namespace {

class CoopDbaApp : public ControlApp {
 public:
  explicit CoopDbaApp(const json& params) {
    olt_ = params.at("olt").get<std::string>();
    du_to_onu_ = params.at("du_to_onu").get<std::map<std::string, std::string>>();

    descriptor_.app_id = params.value("app_id", "coop-dba");
    descriptor_.priority = params.value("priority", 10);
    std::map<std::string, bool> onus;
    for (const auto& [du, onu] : du_to_onu_) {
      descriptor_.required_measurements.emplace_back(du, "ul_grant_bytes");
      onus.emplace(onu, true);
    }
    for (const auto& [onu, unused] : onus) {
      descriptor_.controlled_params.emplace_back(olt_, "grant_map_" + onu);
    }
  }

  const AppDescriptor& descriptor() const override { return descriptor_; }
  std::uint64_t tick_period_us() const override { return 0; }  // purely event-driven

  void on_measurement(EngineContext& ctx, const std::string& node_id, const std::string& metric,
                      const json& value, std::uint64_t) override {
    if (metric != "ul_grant_bytes" || !value.is_number()) return;
    auto it = du_to_onu_.find(node_id);
    if (it == du_to_onu_.end()) return;
    auto status = ctx.emit_control(olt_, "grant_map_" + it->second, value);
    if (status != EngineContext::EmitStatus::Ok) {
      spdlog::debug("coop-dba: pre-grant for {} via {} blocked ({})", it->second, node_id,
                    static_cast<int>(status));
    }
  }

  void on_revoked(EngineContext&, const std::string& node_id, const std::string& param) override {
    spdlog::warn("coop-dba: lost claim {}/{}", node_id, param);
  }

 private:
  AppDescriptor descriptor_;
  std::string olt_;
  std::map<std::string, std::string> du_to_onu_;
};

}  // namespace

std::shared_ptr<ControlApp> make_coop_dba(const json& params) {
  try {
    return std::make_shared<CoopDbaApp>(params);
  } catch (const json::exception& e) {
    spdlog::error("coop_dba params invalid: {}", e.what());
    return nullptr;
  }
}

}  // namespace aicf::apps

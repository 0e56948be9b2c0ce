#include <algorithm>
#include <vector>

#include <spdlog/spdlog.h>

#include "aicf/apps.hpp"

namespace aicf::apps {

namespace {

class ChannelBalancerApp : public ControlApp {
 public:
  explicit ChannelBalancerApp(const json& params) {
    olt_ = params.at("olt").get<std::string>();
    onus_ = params.at("onus").get<std::vector<std::string>>();
    assignment_ = params.at("initial_channels").get<std::vector<int>>();
    n_channels_ = params.at("n_channels").get<int>();
    threshold_ = params.value("threshold", 0.1);
    min_interval_us_ = params.value("min_interval_us", 1000ull);
    if (assignment_.size() != onus_.size()) {
      throw json::other_error::create(501, "initial_channels must match onus", &params);
    }

    descriptor_.app_id = params.value("app_id", "channel-balancer");
    descriptor_.priority = params.value("priority", 5);
    descriptor_.required_measurements.emplace_back(olt_, "channel_util");
    for (const auto& onu : onus_) {
      descriptor_.controlled_params.emplace_back(onu, "onu_channel");
    }
  }

  const AppDescriptor& descriptor() const override { return descriptor_; }
  std::uint64_t tick_period_us() const override { return 0; }  // driven by channel_util samples

  void on_measurement(EngineContext& ctx, const std::string& node_id, const std::string& metric,
                      const json& value, std::uint64_t) override {
    if (node_id != olt_ || metric != "channel_util" || !value.is_array()) return;
    if (static_cast<int>(value.size()) != n_channels_) return;
    const std::uint64_t now = ctx.now_us();
    if (have_acted_ && now - last_action_us_ < min_interval_us_) return;

    std::vector<double> util(value.begin(), value.end());
    int hottest = 0;
    int coolest = 0;
    for (int c = 1; c < n_channels_; ++c) {
      if (util[c] > util[hottest]) hottest = c;
      if (util[c] < util[coolest]) coolest = c;
    }
    if (util[hottest] - util[coolest] <= threshold_) return;

    // Move the lowest-indexed ONU currently parked on the hottest channel.
    for (std::size_t i = 0; i < onus_.size(); ++i) {
      if (assignment_[i] != hottest) continue;
      auto status = ctx.emit_control(onus_[i], "onu_channel", coolest);
      if (status == EngineContext::EmitStatus::Ok) {
        spdlog::info("channel-balancer: retuning {} {} -> {}", onus_[i], hottest, coolest);
        assignment_[i] = coolest;
        last_action_us_ = now;
        have_acted_ = true;
      }
      return;
    }
  }

 private:
  AppDescriptor descriptor_;
  std::string olt_;
  std::vector<std::string> onus_;
  std::vector<int> assignment_;
  int n_channels_ = 1;
  double threshold_ = 0.1;
  std::uint64_t min_interval_us_ = 1000;
  std::uint64_t last_action_us_ = 0;
  bool have_acted_ = false;
};

}  // namespace

std::shared_ptr<ControlApp> make_channel_balancer(const json& params) {
  try {
    return std::make_shared<ChannelBalancerApp>(params);
  } catch (const json::exception& e) {
    spdlog::error("channel_balancer params invalid: {}", e.what());
    return nullptr;
  }
}

}  // namespace aicf::apps

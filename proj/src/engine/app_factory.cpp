#include "aicf/apps.hpp"

namespace aicf::apps {

std::shared_ptr<ControlApp> make_app(const std::string& name, const json& params) {
  if (name == "coop_dba") return make_coop_dba(params);
  if (name == "channel_balancer") return make_channel_balancer(params);
  return nullptr;
}

}  // namespace aicf::apps

#include "pon_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string_view>
#include <tuple>

namespace aicf::sim {

namespace {

// Event ranks on the VirtualExecutor follow SimEventKind; framework message
// chains use VirtualExecutor::kRankMessage (10), announcements rank 9.
constexpr int kRankAnnounce = 9;

std::uint64_t fnv1a(std::uint64_t h, std::string_view data) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

PonModel::PonModel(const ScenarioConfig& config, VirtualExecutor& executor)
    : config_(config), exec_(executor) {
  cycle_ps_ = config.dba_cycle_us * kPsPerUs;
  prop_ps_ = config.prop_delay_us * kPsPerUs;
  lead_ps_ = config.lead_us() * kPsPerUs;
  duration_ps_ = config.duration_us * kPsPerUs;
  ps_per_bit_ = std::llround(1000.0 / config.line_rate_gbps);
  cap_bytes_ = static_cast<std::uint64_t>(cycle_ps_ / (8 * ps_per_bit_));

  onus_.resize(config.n_onus);
  for (int i = 0; i < config.n_onus; ++i) onus_[i].channel = config.onu_to_channel[i];
  reports_.resize(config.n_onus);
  channel_windows_.resize(config.n_channels);
  granted_bytes_.resize(config.n_channels);
  busy_ps_.assign(config.n_channels, 0);
  last_busy_ps_.assign(config.n_channels, 0);

  generate_traffic();
}

void PonModel::generate_traffic() {
  std::vector<std::string> dus;
  for (const auto& [du, onu] : config_.du_to_onu) dus.push_back(du);
  std::sort(dus.begin(), dus.end());

  std::uint64_t pkt_id = 0;
  for (const auto& spec : config_.traffic) {
    const auto du_it = std::find(dus.begin(), dus.end(), spec.du);
    const int du_index = static_cast<int>(du_it - dus.begin());
    const int onu = *config_.onu_index(config_.du_to_onu.at(spec.du));

    std::mt19937_64 rng(config_.seed * 0x9E3779B97F4A7C15ull + 0x1234567 + du_index);
    auto uniform_ps = [&rng](std::int64_t span_ps) {
      return span_ps <= 0 ? 0 : static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span_ps));
    };

    const std::int64_t period_ps = spec.period_us * kPsPerUs;
    // Announced streams start at least one announce lead in, so every burst
    // can be signalled a full lead before it arrives.
    const std::int64_t base_ps = spec.announced ? lead_ps_ : 0;
    std::int64_t phase_ps =
        spec.phase_us ? *spec.phase_us * kPsPerUs : base_ps + uniform_ps(period_ps);

    if (spec.model == TrafficSpec::Model::Periodic) {
      for (std::int64_t t = phase_ps, n = 0; t <= duration_ps_; t = phase_ps + ++n * period_ps) {
        std::int64_t jitter = 0;
        if (spec.jitter_us > 0) {
          const std::int64_t j_ps = spec.jitter_us * kPsPerUs;
          jitter = uniform_ps(2 * j_ps) - j_ps;
        }
        const std::int64_t arrival = t + jitter;
        if (arrival < base_ps || arrival > duration_ps_) continue;
        bursts_.push_back({pkt_id++, du_index, onu, arrival, spec.bytes, spec.announced});
      }
    } else {
      auto exp_ps = [&rng, period_ps] {
        const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
        return static_cast<std::int64_t>(-static_cast<double>(period_ps) * std::log1p(-u));
      };
      for (std::int64_t t = phase_ps + exp_ps(); t <= duration_ps_; t += exp_ps()) {
        bursts_.push_back({pkt_id++, du_index, onu, t, spec.bytes, spec.announced});
      }
    }
  }
  // Stable ids ordered by (arrival, du) so baseline and controlled runs of
  // one seed agree packet by packet.
  std::sort(bursts_.begin(), bursts_.end(), [](const Burst& a, const Burst& b) {
    return std::tie(a.arrival_ps, a.du_index, a.pkt_id) <
           std::tie(b.arrival_ps, b.du_index, b.pkt_id);
  });
  for (std::uint64_t i = 0; i < bursts_.size(); ++i) bursts_[i].pkt_id = i;
}

void PonModel::schedule_all() {
  const std::int64_t cycles = duration_ps_ / cycle_ps_ + 1;
  for (std::int64_t k = 0; k <= cycles; ++k) {
    exec_.schedule_at_ps(k * cycle_ps_, static_cast<int>(SimEventKind::ReportTx), "",
                         [this, k] { on_cycle_boundary(k); });
    exec_.schedule_at_ps(k * cycle_ps_ + prop_ps_, static_cast<int>(SimEventKind::GrantIssue), "",
                         [this, k] { on_grant_issue(k + 1); });
  }
  for (const Burst& burst : bursts_) {
    exec_.schedule_at_ps(burst.arrival_ps, static_cast<int>(SimEventKind::PktArrival),
                         config_.onu_id(burst.onu), [this, &burst] { on_arrival(burst); });
    if (burst.announced) {
      const std::int64_t announce_at = burst.arrival_ps - lead_ps_;
      if (announce_at >= 0) {
        exec_.schedule_at_ps(announce_at, kRankAnnounce, "du-" + std::to_string(burst.du_index),
                             [this, &burst] {
                               if (announce_cb_) {
                                 announce_cb_("du-" + std::to_string(burst.du_index), burst.bytes);
                               }
                             });
      }
    }
  }
}

void PonModel::record(SimEventKind kind, const std::string& subject, std::string info) {
  trace_.push_back({exec_.now_ps(), kind, subject, std::move(info)});
}

std::uint64_t PonModel::queue_bytes(int onu) const {
  return onus_[static_cast<std::size_t>(onu)].queued_bytes;
}

std::uint64_t PonModel::outstanding_granted_bytes(int onu) const {
  const std::int64_t now = exec_.now_ps();
  std::uint64_t total = 0;
  for (const auto& windows : channel_windows_) {
    for (const auto& [start, w] : windows) {
      if (!w->canceled && w->onu == onu && w->start_ps >= now) total += w->bytes;
    }
  }
  return total;
}

void PonModel::on_cycle_boundary(std::int64_t k) {
  (void)k;
  const std::int64_t now = exec_.now_ps();
  if (now > duration_ps_) return;
  for (int i = 0; i < config_.n_onus; ++i) {
    OnuState& onu = onus_[static_cast<std::size_t>(i)];
    if (onu.outage_until_ps > now) continue;  // off-channel while retuning
    const std::uint64_t outstanding = outstanding_granted_bytes(i);
    const std::uint64_t demand =
        onu.queued_bytes > outstanding ? onu.queued_bytes - outstanding : 0;
    reports_[static_cast<std::size_t>(i)] = {now, now + prop_ps_, demand, false};
    record(SimEventKind::ReportTx, config_.onu_id(i), "demand=" + std::to_string(demand));
  }
}

void PonModel::on_grant_issue(std::int64_t target_cycle) {
  const std::int64_t now = exec_.now_ps();
  // Pre-grants announced before this computation reserve first (their
  // capacity is committed to the announced arrivals), then reports share
  // the rest of the cycle.
  auto pending = pending_pregrants_.find(target_cycle);
  if (pending != pending_pregrants_.end()) {
    std::vector<Pregrant> batch = std::move(pending->second);
    pending_pregrants_.erase(pending);
    std::sort(batch.begin(), batch.end(), [](const Pregrant& a, const Pregrant& b) {
      return std::tie(a.eta_ps, a.onu, a.order) < std::tie(b.eta_ps, b.onu, b.order);
    });
    for (const auto& pg : batch) reserve_pregrant(pg);
  }

  const std::int64_t window_floor = target_cycle * cycle_ps_;
  for (int c = 0; c < config_.n_channels; ++c) {
    // Demands from the freshest unconsumed report that has reached the OLT.
    std::vector<std::pair<int, std::uint64_t>> demands;  // (onu, demand)
    for (int i = 0; i < config_.n_onus; ++i) {
      if (onus_[static_cast<std::size_t>(i)].channel != c) continue;
      Report& r = reports_[static_cast<std::size_t>(i)];
      if (r.consumed || r.arrive_ps > now || r.demand == 0) continue;
      demands.emplace_back(i, r.demand);
      r.consumed = true;
    }
    if (demands.empty()) continue;

    // Equal share capped by demand (max-min fair), against what is left of
    // the cycle budget after pre-grants.
    const std::uint64_t already = granted_bytes_[static_cast<std::size_t>(c)][target_cycle];
    std::uint64_t budget = cap_bytes_ > already ? cap_bytes_ - already : 0;
    std::map<int, std::uint64_t> alloc;
    std::vector<std::pair<int, std::uint64_t>> open = demands;
    while (budget > 0 && !open.empty()) {
      const std::uint64_t share = budget / open.size();
      if (share == 0) break;
      std::vector<std::pair<int, std::uint64_t>> next;
      for (auto& [onu, want] : open) {
        const std::uint64_t take = std::min(want, share);
        alloc[onu] += take;
        budget -= take;
        if (want > take) next.emplace_back(onu, want - take);
      }
      if (next.size() == open.size()) break;  // all capped by share
      open = std::move(next);
    }

    for (const auto& [onu, unused_demand] : demands) {
      auto it = alloc.find(onu);
      if (it == alloc.end() || it->second == 0) continue;
      reserve(c, onu, it->second, window_floor, /*allow_cross_cycle=*/false,
              /*pre_grant=*/false);
    }
  }
}

void PonModel::reserve_pregrant(const Pregrant& pg) {
  const OnuState& onu = onus_[static_cast<std::size_t>(pg.onu)];
  reserve(onu.channel, pg.onu, pg.bytes, pg.eta_ps, /*allow_cross_cycle=*/true,
          /*pre_grant=*/true);
}

std::uint64_t PonModel::reserve(int channel, int onu, std::uint64_t bytes,
                                std::int64_t min_start_ps, bool allow_cross_cycle,
                                bool pre_grant) {
  auto& windows = channel_windows_[static_cast<std::size_t>(channel)];
  auto& granted = granted_bytes_[static_cast<std::size_t>(channel)];
  const std::int64_t now = exec_.now_ps();

  // Prune windows fully in the past; new reservations always start in the
  // future so these cannot collide.
  while (!windows.empty() && windows.begin()->second->end_ps <= now) {
    windows.erase(windows.begin());
  }

  // Walk gaps between reserved windows, first fit at or after min_start_ps.
  std::int64_t cursor = min_start_ps;
  auto it = windows.begin();
  for (int guard = 0; guard < 2 * static_cast<int>(windows.size()) + 16; ++guard) {
    // Advance past windows overlapping the cursor.
    while (it != windows.end() && it->second->end_ps <= cursor) ++it;
    std::int64_t gap_end = std::numeric_limits<std::int64_t>::max();
    if (it != windows.end()) {
      if (it->second->start_ps <= cursor) {
        cursor = it->second->end_ps;
        ++it;
        continue;
      }
      gap_end = it->second->start_ps;
    }
    const std::int64_t cycle = cycle_of(cursor);
    if (!allow_cross_cycle) gap_end = std::min(gap_end, (cycle + 1) * cycle_ps_);

    const std::uint64_t cycle_granted = granted[cycle];
    const std::uint64_t cap_left = cap_bytes_ > cycle_granted ? cap_bytes_ - cycle_granted : 0;
    const std::uint64_t gap_bytes =
        gap_end <= cursor ? 0
                          : static_cast<std::uint64_t>((gap_end - cursor) / (8 * ps_per_bit_));
    const std::uint64_t grant = std::min({bytes, gap_bytes, cap_left});
    if (grant == 0) {
      // Nothing usable here: jump to the next gap or, at a cycle cap/edge,
      // to the next cycle boundary.
      if (it != windows.end() && gap_end == it->second->start_ps) {
        cursor = it->second->end_ps;
        ++it;
      } else {
        cursor = (cycle + 1) * cycle_ps_;
        if (!allow_cross_cycle && !pre_grant) return 0;  // report grants stay in their cycle
        if (cursor - min_start_ps > 4 * cycle_ps_) return 0;
      }
      continue;
    }

    auto w = std::make_shared<Window>();
    w->channel = channel;
    w->onu = onu;
    w->start_ps = cursor;
    w->end_ps = cursor + tx_ps(grant);
    w->bytes = grant;
    w->pre_grant = pre_grant;
    windows.emplace(w->start_ps, w);
    granted[cycle] += grant;
    record(SimEventKind::GrantIssue, config_.onu_id(onu),
           (pre_grant ? std::string("pregrant") : std::string("report")) +
               " bytes=" + std::to_string(grant) + " window=" + std::to_string(w->start_ps));
    exec_.schedule_at_ps(w->start_ps, static_cast<int>(SimEventKind::UpstreamTxStart),
                         config_.onu_id(onu), [this, w] { on_tx_start(w); });
    return grant;
  }
  return 0;
}

void PonModel::on_arrival(const Burst& burst) {
  OnuState& onu = onus_[static_cast<std::size_t>(burst.onu)];
  ++generated_;
  if (config_.queue_cap_bytes > 0 &&
      onu.queued_bytes + burst.bytes > config_.queue_cap_bytes) {
    ++dropped_;
    record(SimEventKind::PktArrival, config_.onu_id(burst.onu),
           "pkt=" + std::to_string(burst.pkt_id) + " dropped");
    return;
  }
  onu.queue.push_back({burst.pkt_id, burst.bytes, burst.bytes, burst.arrival_ps});
  onu.queued_bytes += burst.bytes;
  record(SimEventKind::PktArrival, config_.onu_id(burst.onu),
         "pkt=" + std::to_string(burst.pkt_id) + " bytes=" + std::to_string(burst.bytes));
}

void PonModel::on_tx_start(const std::shared_ptr<Window>& w) {
  if (w->canceled) return;
  OnuState& onu = onus_[static_cast<std::size_t>(w->onu)];
  if (onu.outage_until_ps > w->start_ps) return;  // retuning; window wasted

  std::uint64_t budget = std::min<std::uint64_t>(w->bytes, onu.queued_bytes);
  if (budget == 0) return;

  record(SimEventKind::UpstreamTxStart, config_.onu_id(w->onu),
         "bytes=" + std::to_string(budget));
  busy_ps_[static_cast<std::size_t>(w->channel)] += tx_ps(budget);

  std::uint64_t sent = 0;
  while (budget > 0 && !onu.queue.empty()) {
    QueuedPkt& head = onu.queue.front();
    const std::uint64_t take = std::min(budget, head.remaining);
    head.remaining -= take;
    budget -= take;
    sent += take;
    onu.queued_bytes -= take;
    if (head.remaining == 0) {
      const std::int64_t delivered = w->start_ps + tx_ps(sent) + prop_ps_;
      samples_.push_back({head.pkt_id, head.arrival_ps, delivered, head.total});
      onu.queue.pop_front();
    }
  }
  const std::int64_t tx_end = w->start_ps + tx_ps(sent);
  exec_.schedule_at_ps(tx_end, static_cast<int>(SimEventKind::UpstreamTxEnd),
                       config_.onu_id(w->onu), [this, w, sent] {
                         record(SimEventKind::UpstreamTxEnd, config_.onu_id(w->onu),
                                "bytes=" + std::to_string(sent));
                       });
}

void PonModel::pregrant(int onu, std::uint64_t bytes) {
  if (onu < 0 || onu >= config_.n_onus || bytes == 0) return;
  const std::int64_t now = exec_.now_ps();
  const std::int64_t eta = now + lead_ps_;
  const std::int64_t eta_cycle = cycle_of(eta);
  const std::int64_t issue_at = (eta_cycle - 1) * cycle_ps_ + prop_ps_;
  Pregrant pg{onu, bytes, eta, pregrant_order_++};
  if (now < issue_at) {
    // The cycle's grant computation has not run yet; materialize there so
    // report grants pack around committed pre-grants deterministically.
    pending_pregrants_[eta_cycle].push_back(pg);
  } else {
    reserve_pregrant(pg);
  }
}

void PonModel::switch_channel(int onu_index, int channel) {
  if (onu_index < 0 || onu_index >= config_.n_onus) return;
  if (channel < 0 || channel >= config_.n_channels) return;
  OnuState& onu = onus_[static_cast<std::size_t>(onu_index)];
  if (onu.channel == channel) return;
  const std::int64_t now = exec_.now_ps();
  const int from = onu.channel;

  // Windows granted under the old assignment are void.
  for (auto& windows : channel_windows_) {
    for (auto it = windows.begin(); it != windows.end();) {
      auto& w = it->second;
      if (w->onu == onu_index && w->start_ps >= now && !w->canceled) {
        w->canceled = true;
        auto& granted = granted_bytes_[static_cast<std::size_t>(w->channel)];
        granted[cycle_of(w->start_ps)] -= std::min(granted[cycle_of(w->start_ps)], w->bytes);
        it = windows.erase(it);
      } else {
        ++it;
      }
    }
  }

  onu.channel = channel;
  onu.outage_until_ps = now + config_.switch_penalty_us * kPsPerUs;
  record(SimEventKind::ChannelSwitch, config_.onu_id(onu_index),
         std::to_string(from) + "->" + std::to_string(channel) +
             " outage_until=" + std::to_string(onu.outage_until_ps));
}

std::vector<double> PonModel::channel_util_window() {
  std::vector<double> out(static_cast<std::size_t>(config_.n_channels), 0.0);
  const std::int64_t window_ps =
      static_cast<std::int64_t>(config_.channel_util_period_ms) * 1000 * kPsPerUs;
  for (int c = 0; c < config_.n_channels; ++c) {
    const std::int64_t delta =
        busy_ps_[static_cast<std::size_t>(c)] - last_busy_ps_[static_cast<std::size_t>(c)];
    last_busy_ps_[static_cast<std::size_t>(c)] = busy_ps_[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(c)] =
        window_ps > 0 ? static_cast<double>(delta) / static_cast<double>(window_ps) : 0.0;
  }
  return out;
}

std::vector<double> PonModel::total_utilization() const {
  std::vector<double> out;
  out.reserve(busy_ps_.size());
  for (std::int64_t busy : busy_ps_) {
    out.push_back(static_cast<double>(busy) / static_cast<double>(duration_ps_));
  }
  return out;
}

std::uint64_t PonModel::trace_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& rec : trace_) {
    h = fnv1a(h, std::to_string(rec.t_ps));
    h = fnv1a(h, "|");
    h = fnv1a(h, to_string(rec.kind));
    h = fnv1a(h, "|");
    h = fnv1a(h, rec.subject);
    h = fnv1a(h, "|");
    h = fnv1a(h, rec.info);
    h = fnv1a(h, "\n");
  }
  return h;
}

}  // namespace aicf::sim

#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>

#include "aicf/executor.hpp"
#include "aicf/netsim.hpp"

namespace aicf::sim {

/// Discrete-event model of a TWDM-PON upstream carrying DU fronthaul
/// traffic. Baseline scheduling is status-report DBA with a one-cycle grant
/// lag and equal-share allocation capped by demand; the cooperative path
/// adds pre-granted windows placed at announced arrival times.
///
/// All times are integer picoseconds on the shared VirtualExecutor. Grant
/// windows never overlap per channel; granted bytes are accounted to the
/// cycle a window starts in and capped at line_rate * cycle / 8.
class PonModel {
 public:
  using AnnounceFn = std::function<void(const std::string& du, std::uint64_t bytes)>;

  PonModel(const ScenarioConfig& config, VirtualExecutor& executor);

  // --- agent-facing hooks -------------------------------------------------
  std::uint64_t queue_bytes(int onu) const;
  /// Per-channel busy fraction since the previous call (the OLT publishes
  /// this as `channel_util`).
  std::vector<double> channel_util_window();
  /// Pre-grants `bytes` for `onu` at eta = now + announce lead.
  void pregrant(int onu, std::uint64_t bytes);
  /// Retunes `onu`; cancels its pending windows and starts the switch outage.
  void switch_channel(int onu, int channel);
  void set_announce_cb(AnnounceFn fn) { announce_cb_ = std::move(fn); }

  /// Schedules cycle boundaries, grant computations, arrivals and
  /// announcements; call once, then drive the executor.
  void schedule_all();

  // --- results ------------------------------------------------------------
  const std::vector<LatencySample>& raw_samples() const { return samples_; }
  std::vector<double> total_utilization() const;
  std::uint64_t generated() const { return generated_; }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t trace_hash() const;
  const std::vector<TraceRecord>& trace() const { return trace_; }

  std::int64_t tx_ps(std::uint64_t bytes) const {
    return static_cast<std::int64_t>(bytes) * 8 * ps_per_bit_;
  }
  std::uint64_t cycle_cap_bytes() const { return cap_bytes_; }

 private:
  struct Burst {
    std::uint64_t pkt_id;
    int du_index;
    int onu;
    std::int64_t arrival_ps;
    std::uint64_t bytes;
    bool announced;
  };
  struct QueuedPkt {
    std::uint64_t pkt_id;
    std::uint64_t remaining;
    std::uint64_t total;
    std::int64_t arrival_ps;
  };
  struct Window {
    int channel = 0;
    int onu = 0;
    std::int64_t start_ps = 0;
    std::int64_t end_ps = 0;
    std::uint64_t bytes = 0;
    bool pre_grant = false;
    bool canceled = false;
  };
  struct OnuState {
    int channel = 0;
    std::int64_t outage_until_ps = -1;
    std::deque<QueuedPkt> queue;
    std::uint64_t queued_bytes = 0;
  };
  struct Report {
    std::int64_t sent_ps = -1;
    std::int64_t arrive_ps = -1;
    std::uint64_t demand = 0;
    bool consumed = true;
  };
  struct Pregrant {
    int onu;
    std::uint64_t bytes;
    std::int64_t eta_ps;
    std::uint64_t order;
  };

  void on_cycle_boundary(std::int64_t k);
  void on_grant_issue(std::int64_t target_cycle);
  void on_arrival(const Burst& burst);
  void on_tx_start(const std::shared_ptr<Window>& window);
  void reserve_pregrant(const Pregrant& pg);
  /// First-fit reservation at or after min_start. Returns granted bytes
  /// (possibly clipped by gap size or the start cycle's byte budget) and
  /// schedules the transmission.
  std::uint64_t reserve(int channel, int onu, std::uint64_t bytes, std::int64_t min_start_ps,
                        bool allow_cross_cycle, bool pre_grant);
  std::uint64_t outstanding_granted_bytes(int onu) const;
  std::int64_t cycle_of(std::int64_t t_ps) const { return t_ps / cycle_ps_; }
  void record(SimEventKind kind, const std::string& subject, std::string info);
  void generate_traffic();

  const ScenarioConfig& config_;
  VirtualExecutor& exec_;
  AnnounceFn announce_cb_;

  std::int64_t cycle_ps_;
  std::int64_t prop_ps_;
  std::int64_t lead_ps_;
  std::int64_t duration_ps_;
  std::int64_t ps_per_bit_;
  std::uint64_t cap_bytes_;

  std::vector<OnuState> onus_;
  std::vector<Report> reports_;  // latest per onu
  std::vector<std::map<std::int64_t, std::shared_ptr<Window>>> channel_windows_;
  std::vector<std::map<std::int64_t, std::uint64_t>> granted_bytes_;  // per channel: cycle -> bytes
  std::map<std::int64_t, std::vector<Pregrant>> pending_pregrants_;   // keyed by eta cycle
  std::uint64_t pregrant_order_ = 0;

  std::vector<Burst> bursts_;
  std::vector<std::int64_t> busy_ps_;
  std::vector<std::int64_t> last_busy_ps_;  // for the windowed util metric

  std::vector<LatencySample> samples_;
  std::uint64_t generated_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<TraceRecord> trace_;
};

}  // namespace aicf::sim

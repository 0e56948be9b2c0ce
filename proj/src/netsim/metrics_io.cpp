#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aicf/netsim.hpp"

namespace aicf::sim {

std::string ps_to_us_string(std::int64_t ps) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%" PRId64 ".%06" PRId64, ps / kPsPerUs,
                ps % kPsPerUs);
  return buf;
}

void RunMetrics::finalize() {
  if (samples.empty()) {
    mean_latency_us = p50_latency_us = p99_latency_us = throughput_mbps = 0.0;
    return;
  }
  __int128 sum_ps = 0;
  std::uint64_t bytes = 0;
  std::vector<std::int64_t> latencies;
  latencies.reserve(samples.size());
  for (const auto& s : samples) {
    sum_ps += s.latency_ps();
    bytes += s.bytes;
    latencies.push_back(s.latency_ps());
  }
  std::sort(latencies.begin(), latencies.end());
  // Nearest-rank percentile: value at index ceil(q*N).
  auto nearest_rank = [&](double q) {
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(latencies.size())));
    rank = std::clamp<std::size_t>(rank, 1, latencies.size());
    return latencies[rank - 1];
  };
  mean_latency_us =
      static_cast<double>(sum_ps) / static_cast<double>(samples.size()) / kPsPerUs;
  p50_latency_us = static_cast<double>(nearest_rank(0.50)) / kPsPerUs;
  p99_latency_us = static_cast<double>(nearest_rank(0.99)) / kPsPerUs;
  // bits per microsecond == Mbit/s
  throughput_mbps = duration_us > 0
                        ? static_cast<double>(bytes) * 8.0 / static_cast<double>(duration_us)
                        : 0.0;
}

void write_latency_csv(const RunMetrics& metrics, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "pkt_id,arrival_us,delivered_us,latency_us\n";
  for (const auto& s : metrics.samples) {
    out << s.pkt_id << ',' << ps_to_us_string(s.arrival_ps) << ','
        << ps_to_us_string(s.delivered_ps) << ',' << ps_to_us_string(s.latency_ps()) << '\n';
  }
  if (!out.good()) throw std::runtime_error("short write: " + path);
}

void write_summary_csv(const std::vector<RunMetrics>& runs, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::size_t channels = runs.empty() ? 0 : runs.front().channel_util.size();
  out << "scenario,seed,mean_latency_us,p50_latency_us,p99_latency_us,throughput_mbps";
  for (std::size_t c = 0; c < channels; ++c) out << ",util_ch" << c;
  out << ",controls_emitted,msgs_published\n";
  char buf[64];
  for (const auto& r : runs) {
    out << r.scenario << '/' << r.mode << ',' << r.seed;
    for (double v : {r.mean_latency_us, r.p50_latency_us, r.p99_latency_us, r.throughput_mbps}) {
      std::snprintf(buf, sizeof(buf), "%.9f", v);
      out << ',' << buf;
    }
    for (std::size_t c = 0; c < channels; ++c) {
      std::snprintf(buf, sizeof(buf), "%.9f",
                    c < r.channel_util.size() ? r.channel_util[c] : 0.0);
      out << ',' << buf;
    }
    out << ',' << r.controls_emitted << ',' << r.msgs_published << '\n';
  }
  if (!out.good()) throw std::runtime_error("short write: " + path);
}

}  // namespace aicf::sim

#include "aicf/topic.hpp"

#include <stdexcept>

namespace aicf {

std::optional<std::vector<std::string>> split_topic(std::string_view topic) {
  if (topic.empty()) return std::nullopt;
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = topic.find('/', start);
    std::string_view seg = topic.substr(start, slash == std::string_view::npos ? slash : slash - start);
    if (seg.empty()) return std::nullopt;
    out.emplace_back(seg);
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

bool is_literal_topic(std::string_view topic) {
  auto segs = split_topic(topic);
  if (!segs) return false;
  for (const auto& seg : *segs) {
    if (seg == "*" || seg == "#") return false;
  }
  return true;
}

TopicFilter TopicFilter::parse(std::string_view pattern) {
  auto f = try_parse(pattern);
  if (!f) throw std::invalid_argument("invalid topic filter: " + std::string(pattern));
  return *f;
}

std::optional<TopicFilter> TopicFilter::try_parse(std::string_view pattern) {
  auto segs = split_topic(pattern);
  if (!segs) return std::nullopt;
  TopicFilter filter;
  filter.text_.assign(pattern);
  for (std::size_t i = 0; i < segs->size(); ++i) {
    const std::string& seg = (*segs)[i];
    if (seg == "#") {
      if (i + 1 != segs->size()) return std::nullopt;  // "#" only as last segment
      filter.multi_tail_ = true;
    } else {
      filter.segments_.push_back(seg);
    }
  }
  return filter;
}

bool TopicFilter::matches(std::string_view topic) const {
  auto segs = split_topic(topic);
  if (!segs) return false;
  if (segs->size() < segments_.size()) return false;
  if (segs->size() > segments_.size() && !multi_tail_) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i] != "*" && segments_[i] != (*segs)[i]) return false;
  }
  return true;
}

std::string_view TopicFilter::first_literal() const {
  if (segments_.empty() || segments_[0] == "*") return {};
  return segments_[0];
}

bool topic_matches(const TopicFilter& filter, std::string_view topic) {
  return filter.matches(topic);
}

bool topic_matches(std::string_view filter_pattern, std::string_view topic) {
  auto filter = TopicFilter::try_parse(filter_pattern);
  return filter && filter->matches(topic);
}

}  // namespace aicf

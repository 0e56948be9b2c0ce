#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aicf {

/// Splits a "/"-separated topic into segments. Returns nothing if the topic
/// is empty or contains an empty segment.
std::optional<std::vector<std::string>> split_topic(std::string_view topic);

/// True iff `topic` is a valid literal topic (non-empty segments, no
/// wildcard characters "*" or "#" as whole segments).
bool is_literal_topic(std::string_view topic);

/// Pattern over hierarchical topics. "*" matches exactly one segment, a
/// trailing "#" matches zero or more segments.
class TopicFilter {
 public:
  /// Throws std::invalid_argument on an invalid pattern.
  static TopicFilter parse(std::string_view pattern);
  static std::optional<TopicFilter> try_parse(std::string_view pattern);

  bool matches(std::string_view topic) const;

  const std::string& str() const { return text_; }
  const std::vector<std::string>& segments() const { return segments_; }
  /// First segment when it is a literal (namespace checks), else empty.
  std::string_view first_literal() const;

  bool operator==(const TopicFilter& other) const { return text_ == other.text_; }
  bool operator<(const TopicFilter& other) const { return text_ < other.text_; }

 private:
  TopicFilter() = default;
  std::string text_;
  std::vector<std::string> segments_;  // excludes trailing "#"
  bool multi_tail_ = false;
};

/// Free-function form used throughout the codebase and bindings.
bool topic_matches(const TopicFilter& filter, std::string_view topic);
bool topic_matches(std::string_view filter_pattern, std::string_view topic);

}  // namespace aicf

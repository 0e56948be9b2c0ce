#include <charconv>

#include "aicf/base64.hpp"
#include "aicf/translate.hpp"

namespace aicf {

namespace {

bool parse_u64(std::string_view text, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Envelope> LegacySdnV0::translate_in(std::string_view frame) {
  if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
  if (!frame.empty() && frame.back() == '\r') frame.remove_suffix(1);

  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t bar = frame.find('|', start);
    fields.push_back(frame.substr(start, bar == std::string_view::npos ? bar : bar - start));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (fields.size() != 5) return std::nullopt;
  if (fields[0] != "LSDN0") return std::nullopt;
  if (fields[1].empty()) return std::nullopt;

  Envelope env;
  env.type = MsgType::InterAi;
  env.sender.assign(fields[1]);
  if (!parse_u64(fields[2], env.ts_us)) return std::nullopt;
  if (!parse_u64(fields[3], env.seq)) return std::nullopt;
  auto payload_text = base64_decode(fields[4]);
  if (!payload_text) return std::nullopt;
  json payload = json::parse(*payload_text, nullptr, false);
  if (payload.is_discarded() || !payload.is_object()) return std::nullopt;
  env.payload = std::move(payload);
  return env;
}

std::optional<std::string> LegacySdnV0::translate_out(const Envelope& env) {
  if (env.type != MsgType::InterAi) return std::nullopt;
  if (env.sender.empty() || env.sender.find('|') != std::string::npos) return std::nullopt;
  std::string line = "LSDN0|";
  line += env.sender;
  line += '|';
  line += std::to_string(env.ts_us);
  line += '|';
  line += std::to_string(env.seq);
  line += '|';
  line += base64_encode(env.payload.dump());
  line += '\n';
  return line;
}

void TranslatorRegistry::register_translator(std::shared_ptr<Translator> translator) {
  translators_[std::string(translator->kind())] = std::move(translator);
}

std::shared_ptr<Translator> TranslatorRegistry::find(std::string_view kind) const {
  auto it = translators_.find(kind);
  if (it == translators_.end()) return nullptr;
  return it->second;
}

TranslatorRegistry TranslatorRegistry::with_builtins() {
  TranslatorRegistry registry;
  registry.register_translator(std::make_shared<LegacySdnV0>());
  return registry;
}

}  // namespace aicf

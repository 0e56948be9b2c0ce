#include <doctest.h>

#include "aicf/codec.hpp"
#include "aicf/descriptors.hpp"
#include "aicf/topic.hpp"
#include "util/generators.hpp"

using namespace aicf;

namespace {

Envelope heartbeat(const std::string& sender, std::uint64_t seq) {
  Envelope env;
  env.type = MsgType::Heartbeat;
  env.sender = sender;
  env.seq = seq;
  return env;
}

std::uint32_t be32(std::string_view buf) {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[0])) << 24) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[1])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[2])) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[3]));
}

}  // namespace

TEST_CASE("frame prefix is the big-endian body length") {
  auto frame = encode_frame(heartbeat("olt-0", 0));
  REQUIRE(frame.size() > 4);
  CHECK(be32(frame) == frame.size() - 4);
}

TEST_CASE("encode/decode round trip on generated envelopes") {
  testutil::Gen gen(42);
  for (int i = 0; i < 500; ++i) {
    Envelope env = gen.envelope();
    auto frame = encode_frame(env);
    auto r = decode_frame(frame);
    REQUIRE(r.status == CodecStatus::Ok);
    CHECK(r.consumed == frame.size());
    CHECK(r.envelope == env);
  }
}

TEST_CASE("frame stream is self-delimiting") {
  testutil::Gen gen(7);
  std::vector<Envelope> sent;
  std::string stream;
  for (int i = 0; i < 37; ++i) {
    sent.push_back(gen.envelope());
    stream += encode_frame(sent.back());
  }
  std::vector<Envelope> got;
  std::string_view view = stream;
  while (!view.empty()) {
    auto r = decode_frame(view);
    REQUIRE(r.status == CodecStatus::Ok);
    got.push_back(r.envelope);
    view.remove_prefix(r.consumed);
  }
  CHECK(got == sent);
  CHECK(view.empty());
}

TEST_CASE("oversize payloads are rejected") {
  Envelope env;
  env.type = MsgType::Publish;
  env.sender = "big";
  env.topic = "node/n/pm/m";
  env.payload["blob"] = std::string(2 * 1024 * 1024, 'x');
  CHECK_THROWS_AS((void)encode_frame(env), CodecError);
  try {
    (void)encode_frame(env);
  } catch (const CodecError& e) {
    CHECK(e.code() == CodecError::Code::Oversize);
  }
}

TEST_CASE("invalid envelopes are rejected at encode") {
  Envelope no_topic;
  no_topic.type = MsgType::Publish;
  no_topic.sender = "x";
  CHECK_THROWS_AS((void)encode_frame(no_topic), CodecError);

  Envelope topic_on_heartbeat = heartbeat("x", 0);
  topic_on_heartbeat.topic = "node/a";
  CHECK_THROWS_AS((void)encode_frame(topic_on_heartbeat), CodecError);

  Envelope wildcard_publish;
  wildcard_publish.type = MsgType::Publish;
  wildcard_publish.sender = "x";
  wildcard_publish.topic = "node/*/pm/q";
  CHECK_THROWS_AS((void)encode_frame(wildcard_publish), CodecError);
}

TEST_CASE("truncated frames ask for more bytes") {
  SUBCASE("declared length 10 with 6 bytes of body") {
    std::string frame{'\x00', '\x00', '\x00', '\x0a'};
    frame += "sixbyt";
    auto r = decode_frame(frame);
    CHECK(r.status == CodecStatus::Truncated);
  }
  SUBCASE("split mid-stream") {
    auto frame = encode_frame(heartbeat("h", 3));
    for (std::size_t cut = 0; cut < frame.size(); ++cut) {
      auto r = decode_frame(std::string_view(frame).substr(0, cut));
      CHECK(r.status == CodecStatus::Truncated);
    }
  }
}

TEST_CASE("unknown msg_type is surfaced as UNKNOWN_TYPE") {
  std::string body =
      R"({"v":1,"type":"BOGUS","sender":"s","ts_us":0,"seq":0,"payload":{}})";
  std::string frame;
  frame.push_back(0);
  frame.push_back(0);
  frame.push_back(static_cast<char>(body.size() >> 8));
  frame.push_back(static_cast<char>(body.size() & 0xff));
  frame += body;
  auto r = decode_frame(frame);
  CHECK(r.status == CodecStatus::UnknownType);
  CHECK(r.consumed == frame.size());
}

TEST_CASE("malformed frames") {
  SUBCASE("not json") {
    std::string frame{'\x00', '\x00', '\x00', '\x03'};
    frame += "abc";
    CHECK(decode_frame(frame).status == CodecStatus::Malformed);
  }
  SUBCASE("declared length above the cap") {
    std::string frame{'\x7f', '\x00', '\x00', '\x00'};
    CHECK(decode_frame(frame).status == CodecStatus::Malformed);
  }
  SUBCASE("wrong version") {
    std::string body = R"({"v":2,"type":"HEARTBEAT","sender":"s","ts_us":0,"seq":0,"payload":{}})";
    std::string frame{'\x00', '\x00', '\x00', static_cast<char>(body.size())};
    frame += body;
    CHECK(decode_frame(frame).status == CodecStatus::Malformed);
  }
}

TEST_CASE("topic matching examples") {
  CHECK(topic_matches("node/onu-1/pm/*", "node/onu-1/pm/queue_bytes"));
  CHECK(topic_matches("node/#", "node"));
  CHECK_FALSE(topic_matches("node/#", "interai/x"));
  CHECK_FALSE(topic_matches("node/*/ctrl/grant", "node/onu-1/pm/grant"));
  CHECK(topic_matches("node/onu-1/ctrl/#", "node/onu-1/ctrl/grant_bytes"));
  CHECK_FALSE(topic_matches("node/onu-1/pm/*", "node/onu-1/pm/a/b"));
}

TEST_CASE("filter validation") {
  CHECK_FALSE(TopicFilter::try_parse(""));
  CHECK_FALSE(TopicFilter::try_parse("a//b"));
  CHECK_FALSE(TopicFilter::try_parse("a/#/b"));
  CHECK(TopicFilter::try_parse("a/*/b"));
  CHECK(TopicFilter::try_parse("a/b/#"));
}

TEST_CASE("wildcard-free filters behave as string equality") {
  testutil::Gen gen(11);
  for (int i = 0; i < 300; ++i) {
    std::string a = gen.literal_topic();
    std::string b = gen.chance(0.5) ? a : gen.literal_topic();
    CHECK(topic_matches(a, b) == (a == b));
  }
}

TEST_CASE("canonical topics") {
  NodeDescriptor onu;
  onu.node_id = "onu-1";
  onu.node_type = NodeType::PonOnu;
  onu.measurements.push_back({"queue_bytes", "B", 100});
  onu.controls.push_back({"grant_bytes", ValueKind::Integer, 0, 1e9, {}});
  CHECK(canonical_topics(onu) == std::vector<std::string>{"node/onu-1/pm/queue_bytes",
                                                          "node/onu-1/ctrl/grant_bytes"});

  NodeDescriptor empty;
  empty.node_id = "x";
  CHECK(canonical_topics(empty).empty());

  NodeDescriptor olt;
  olt.node_id = "olt-0";
  olt.measurements.push_back({"m1", "", 0});
  olt.measurements.push_back({"m2", "", 0});
  olt.controls.push_back({"c1", ValueKind::Real, 0, 1, {}});
  auto topics = canonical_topics(olt);
  REQUIRE(topics.size() == 3);
  CHECK(topics[0] == "node/olt-0/pm/m1");
  CHECK(topics[1] == "node/olt-0/pm/m2");
  CHECK(topics[2] == "node/olt-0/ctrl/c1");
}

TEST_CASE("canonical topic count equals descriptor size") {
  testutil::Gen gen(5);
  for (int i = 0; i < 100; ++i) {
    NodeDescriptor d;
    d.node_id = gen.identifier();
    std::size_t metrics = gen.below(5);
    std::size_t controls = gen.below(5);
    for (std::size_t k = 0; k < metrics; ++k) {
      d.measurements.push_back({"m" + std::to_string(k), "", 0});
    }
    for (std::size_t k = 0; k < controls; ++k) {
      d.controls.push_back({"c" + std::to_string(k), ValueKind::Integer, 0, 10, {}});
    }
    CHECK(canonical_topics(d).size() == metrics + controls);
  }
}

TEST_CASE("param specs admit values by kind") {
  ParamSpec int_spec{"grant", ValueKind::Integer, 0, 10000, {}};
  CHECK(int_spec.admits(json(8000)));
  CHECK_FALSE(int_spec.admits(json(10001)));
  CHECK_FALSE(int_spec.admits(json(2.5)));

  ParamSpec real_spec{"gain", ValueKind::Real, -1.0, 1.0, {}};
  CHECK(real_spec.admits(json(0.25)));
  CHECK(real_spec.admits(json(-1)));
  CHECK_FALSE(real_spec.admits(json(1.5)));

  ParamSpec enum_spec{"mode", ValueKind::Enumerated, 0, 0, {"slow", "fast"}};
  CHECK(enum_spec.admits(json("fast")));
  CHECK_FALSE(enum_spec.admits(json("faster")));
  CHECK_FALSE(enum_spec.admits(json(1)));
}

TEST_CASE("descriptor validation") {
  NodeDescriptor d;
  d.node_id = "";
  CHECK(d.validate());
  d.node_id = "n";
  d.measurements.push_back({"q", "B", 0});
  d.measurements.push_back({"q", "B", 0});
  CHECK(d.validate());
  d.measurements.pop_back();
  CHECK_FALSE(d.validate());

  AppDescriptor a;
  a.app_id = "app";
  a.controlled_params.emplace_back("n", "p");
  a.controlled_params.emplace_back("n", "p");
  CHECK(a.validate());
  a.controlled_params.pop_back();
  CHECK_FALSE(a.validate());
  a.priority = -1;
  CHECK(a.validate());
}

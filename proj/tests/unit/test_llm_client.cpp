#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "sectorrank/corpus.hpp"
#include "sectorrank/csv.hpp"
#include "sectorrank/error.hpp"
#include "sectorrank/llm_client.hpp"
#include "support/mock_llm.hpp"

using namespace sectorrank;
using namespace std::chrono_literals;

namespace {

template <typename F>
ErrorKind kind_of(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::Io;
}

SectorTaxonomy reference_taxonomy() {
  SectorTaxonomy t;
  std::size_t i = 0;
  for (const auto &name : reference_sector_names()) t.add(SectorId(name), "T" + std::to_string(i++));
  return t;
}

SectorTaxonomy banks_textiles() {
  SectorTaxonomy t;
  t.add(SectorId("Banks"), "b");
  t.add(SectorId("Textiles"), "t");
  return t;
}

std::size_t occurrences(const std::string &hay, const std::string &needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

llm::EndpointConfig config_for(const mock::ChatServer &server) {
  llm::EndpointConfig c;
  c.base_url = server.base_url();
  c.model_name = "mock-model";
  c.api_key = "secret";
  c.timeout_seconds = 5;
  c.max_retries = 3;
  c.initial_backoff = 1ms;
  return c;
}

} // namespace

TEST(Prompts, ExtractionTemplate) {
  const auto t = reference_taxonomy();
  const std::string p = llm::build_extraction_prompt("The budget raises credit for handlooms.", t);
  EXPECT_NE(p.find("You are provided with the budget of India"), std::string::npos);
  EXPECT_NE(p.find("Your output should be a json file having 2 keys"), std::string::npos);
  EXPECT_TRUE(p.ends_with("The budget raises credit for handlooms."));
  std::string joined;
  for (const auto &name : reference_sector_names()) joined += (joined.empty() ? "" : ", ") + name;
  const auto from = p.find("List of industries: ") + 20;
  EXPECT_EQ(p.substr(from, p.find('\n', from) - from), joined);
  EXPECT_EQ(occurrences(p, "Diamond, Gems and Jewellery"), 1u);
  EXPECT_EQ(p, llm::build_extraction_prompt("The budget raises credit for handlooms.", t));
  EXPECT_EQ(kind_of([&] { llm::build_extraction_prompt("  ", t); }), ErrorKind::EmptyTranscript);
}

TEST(Prompts, PerformanceTemplate) {
  const std::string p = llm::build_perf_prompt(SectorId("Banks"), "credit for handlooms");
  EXPECT_NE(p.find("You are a financial expert"), std::string::npos);
  EXPECT_NE(p.find("estimate the performance of the sector"), std::string::npos);
  EXPECT_NE(p.find("between -1 to 1"), std::string::npos);
  EXPECT_TRUE(p.ends_with("Sector: Banks, Excerpt: credit for handlooms"));
  EXPECT_EQ(kind_of([] { llm::build_perf_prompt(SectorId("Banks"), ""); }), ErrorKind::EmptyExcerpt);
}

TEST(ExtractionResponse, ParsesFencedAndUnfenced) {
  const auto t = banks_textiles();
  const std::string raw = R"([{"text_segment":"credit for handlooms","industry":["Banks","Textiles"]}])";
  const auto r = llm::parse_extraction_response(raw, t);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].industry.size(), 2u);
  const auto fenced = llm::parse_extraction_response("```json\n" + raw + "\n```", t);
  EXPECT_EQ(fenced.records[0].text_segment, r.records[0].text_segment);
  EXPECT_EQ(fenced.records[0].industry, r.records[0].industry);
}

TEST(ExtractionResponse, RejectsAndShapes) {
  const auto t = banks_textiles();
  const auto r = llm::parse_extraction_response(
      R"([{"text_segment":"a","industry":["Banks","Shipping"]},{"text_segment":"b","industry":["Mining"]}])", t);
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.rejects.size(), 2u);
  EXPECT_EQ(r.rejects[0].name, "Shipping");
  EXPECT_EQ(r.rejects[1].record, 1u);
  EXPECT_EQ(kind_of([&] { llm::parse_extraction_response(R"({"text_segment":"a","industry":[]})", t); }),
            ErrorKind::WrongShape);
  EXPECT_EQ(kind_of([&] { llm::parse_extraction_response(R"([{"text_segment":"a"}])", t); }),
            ErrorKind::WrongShape);
  EXPECT_EQ(kind_of([&] {
              llm::parse_extraction_response(R"([{"text_segment":"a","industry":[],"x":1}])", t);
            }),
            ErrorKind::WrongShape);
  EXPECT_EQ(kind_of([&] { llm::parse_extraction_response("sure, here you go", t); }), ErrorKind::NotJson);
}

TEST(PerfResponse, ParsesAndRejects) {
  EXPECT_DOUBLE_EQ(llm::parse_perf_response("0.35"), 0.35);
  EXPECT_DOUBLE_EQ(llm::parse_perf_response("  -0.2\n"), -0.2);
  EXPECT_DOUBLE_EQ(llm::parse_perf_response("```\n+0.5\n```"), 0.5);
  EXPECT_DOUBLE_EQ(llm::parse_perf_response("1"), 1.0);
  EXPECT_EQ(kind_of([] { llm::parse_perf_response("bullish"); }), ErrorKind::NotANumber);
  EXPECT_EQ(kind_of([] { llm::parse_perf_response("0.3 maybe"); }), ErrorKind::NotANumber);
  EXPECT_EQ(kind_of([] { llm::parse_perf_response(""); }), ErrorKind::NotANumber);
  EXPECT_EQ(kind_of([] { llm::parse_perf_response("1.5"); }), ErrorKind::OutOfRange);
}

TEST(PerfResponse, RoundTripsSixDecimalRendering) {
  for (int i = -1000; i <= 1000; ++i) {
    const double x = i / 1000.0 + (i % 7) * 1e-6;
    if (std::fabs(x) > 1.0) continue;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    EXPECT_EQ(llm::parse_perf_response(buf), std::stod(buf));
  }
}

TEST(Request, BodyShape) {
  llm::EndpointConfig c;
  c.model_name = "m";
  EXPECT_EQ(llm::request_body(c, "hi"),
            R"({"model":"m","messages":[{"role":"user","content":"hi"}],"temperature":0})");
}

TEST(Request, MockRoundTripSendsBearerKey) {
  mock::ChatServer server([](const std::string &, int) { return mock::Reply{200, "0.25"}; });
  EXPECT_EQ(llm::request(config_for(server), "prompt"), "0.25");
  ASSERT_EQ(server.calls(), 1);
  EXPECT_EQ(server.auth_headers()[0], "Bearer secret");
  EXPECT_NE(server.bodies()[0].find("\"temperature\":0"), std::string::npos);
}

TEST(Request, RetriesServerErrors) {
  mock::ChatServer server([](const std::string &, int call) {
    return call < 2 ? mock::Reply{500, ""} : mock::Reply{200, "ok"};
  });
  EXPECT_EQ(llm::request(config_for(server), "p"), "ok");
  EXPECT_EQ(server.calls(), 3);
}

TEST(Request, GivesUpAfterRetriesAndOnClientErrors) {
  mock::ChatServer failing([](const std::string &, int) { return mock::Reply{503, ""}; });
  auto c = config_for(failing);
  c.max_retries = 2;
  EXPECT_EQ(kind_of([&] { llm::request(c, "p"); }), ErrorKind::HttpStatus);
  EXPECT_EQ(failing.calls(), 3);

  mock::ChatServer denied([](const std::string &, int) { return mock::Reply{401, ""}; });
  EXPECT_EQ(kind_of([&] { llm::request(config_for(denied), "p"); }), ErrorKind::HttpStatus);
  EXPECT_EQ(denied.calls(), 1);
}

TEST(Request, AuthMissingBeforeAnyNetworkCall) {
  mock::ChatServer server([](const std::string &, int) { return mock::Reply{200, "0"}; });
  auto c = config_for(server);
  c.api_key.clear();
  EXPECT_EQ(kind_of([&] { llm::request(c, "p"); }), ErrorKind::AuthMissing);
  EXPECT_EQ(server.calls(), 0);
}

TEST(Request, TransportFailure) {
  llm::EndpointConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.api_key = "k";
  c.max_retries = 1;
  c.initial_backoff = 1ms;
  const ErrorKind k = kind_of([&] { llm::request(c, "p"); });
  EXPECT_TRUE(k == ErrorKind::Transport || k == ErrorKind::Timeout);
}

TEST(EstimatePerformance, OrderedOutcomesWithPartialFailures) {
  mock::ChatServer server([](const std::string &prompt, int) {
    if (prompt.find("Sector: Steel") != std::string::npos) return mock::Reply{200, "1.7"};
    if (prompt.find("Sector: Cement") != std::string::npos) return mock::Reply{500, ""};
    return mock::Reply{200, prompt.find("Sector: Banks") != std::string::npos ? "0.4" : "-0.1"};
  });
  auto c = config_for(server);
  c.max_retries = 1;
  std::vector<llm::PerfQuery> qs;
  for (const char *s : {"Banks", "Steel", "Cement", "Textiles", "Banks"}) {
    qs.push_back({std::string(s) + std::to_string(qs.size()), SectorId(s), "excerpt"});
  }
  const auto out = llm::estimate_performance(c, qs, 3);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_EQ(out[0].key, "Banks0");
  EXPECT_DOUBLE_EQ(*out[0].value, 0.4);
  EXPECT_EQ(*out[1].error, ErrorKind::OutOfRange);
  EXPECT_EQ(*out[2].error, ErrorKind::HttpStatus);
  EXPECT_DOUBLE_EQ(*out[3].value, -0.1);
  EXPECT_DOUBLE_EQ(*out[4].value, 0.4);
}

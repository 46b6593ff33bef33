#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "sectorrank/llm_client.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "json.hpp"
#include "sectorrank/io.hpp"

namespace sectorrank::llm {

using nlohmann::json;

EndpointConfig EndpointConfig::from_environment(std::string base_url, std::string model_name) {
  EndpointConfig config;
  config.base_url = std::move(base_url);
  config.model_name = std::move(model_name);
  if (const char *key = std::getenv(kApiKeyEnv)) config.api_key = key;
  return config;
}

std::string build_extraction_prompt(std::string_view transcript, const SectorTaxonomy &taxonomy) {
  if (trim(transcript).empty()) throw Error(ErrorKind::EmptyTranscript, "transcript is empty");
  std::string industries;
  for (const auto &sector : taxonomy.sectors()) {
    if (!industries.empty()) industries += ", ";
    industries += sector.name();
  }
  std::string prompt =
      "You are provided with the budget of India below. From this budget only pick up text "
      "segments relevant to the given list of industries.\n"
      "List of industries: ";
  prompt += industries;
  prompt +=
      "\n"
      "Your output should be a json file having 2 keys: 'text_segment' and 'industry'. The value "
      "corresponding to 'text_segment' would be the extract text segment extracted from the "
      "budget. The value of 'industry' should be the corresponding list of industries from the "
      "given list that the text segment is related to. Return only the segments having any "
      "relation with the given list of industries. One text segment can be related to multiple "
      "industries.\n"
      "\n"
      "Text context from Budget: ";
  prompt += transcript;
  return prompt;
}

std::string build_perf_prompt(const SectorId &sector, std::string_view excerpt) {
  if (trim(excerpt).empty()) throw Error(ErrorKind::EmptyExcerpt, "excerpt is empty");
  std::string prompt =
      "You are a financial expert with extensive experience of analysing Indian Budgets. Given a "
      "sector and an excerpts related to the sector from a budget speech, estimate the "
      "performance of the sector. You output should be just a real number between -1 to 1. "
      "Don't reply anything else. Sector: ";
  prompt += sector.name();
  prompt += ", Excerpt: ";
  prompt += excerpt;
  return prompt;
}

std::string_view strip_fences(std::string_view text) {
  text = trim(text);
  if (!text.starts_with("```")) return text;
  const auto first_nl = text.find('\n');
  if (first_nl == std::string_view::npos) {
    // single-line fence: ```0.3```
    text.remove_prefix(3);
    if (text.ends_with("```")) text.remove_suffix(3);
    return trim(text);
  }
  std::string_view body = text.substr(first_nl + 1);
  body = trim(body);
  if (body.ends_with("```")) body.remove_suffix(3);
  return trim(body);
}

ExtractionResult parse_extraction_response(std::string_view text, const SectorTaxonomy &taxonomy) {
  const json j = json::parse(strip_fences(text), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::NotJson, "response is not JSON");
  if (!j.is_array()) throw Error(ErrorKind::WrongShape, "expected a JSON array of records");

  ExtractionResult result;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json &obj = j[i];
    const std::string where = "record " + std::to_string(i);
    if (!obj.is_object() || obj.size() != 2 || !obj.contains("text_segment") ||
        !obj.contains("industry")) {
      throw Error(ErrorKind::WrongShape, where + ": expected keys text_segment and industry");
    }
    const json &segment = obj["text_segment"];
    const json &industry = obj["industry"];
    if (!segment.is_string() || !industry.is_array()) {
      throw Error(ErrorKind::WrongShape, where + ": wrong value types");
    }
    ExtractionRecord record{segment.get<std::string>(), {}};
    if (trim(record.text_segment).empty()) {
      throw Error(ErrorKind::WrongShape, where + ": empty text_segment");
    }
    for (const auto &name : industry) {
      if (!name.is_string()) throw Error(ErrorKind::WrongShape, where + ": industry not a string");
      auto sector = taxonomy.find(name.get<std::string>());
      if (!sector) {
        result.rejects.push_back({i, name.get<std::string>()});
      } else if (std::find(record.industry.begin(), record.industry.end(), *sector) ==
                 record.industry.end()) {
        record.industry.push_back(*sector);
      }
    }
    if (!record.industry.empty()) result.records.push_back(std::move(record));
  }
  return result;
}

double parse_perf_response(std::string_view text) {
  std::string_view body = strip_fences(text);
  if (body.starts_with('+')) body.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size() ||
      !std::isfinite(value)) {
    throw Error(ErrorKind::NotANumber, "'" + std::string(trim(text)) + "'");
  }
  if (value < -1.0 || value > 1.0) {
    throw Error(ErrorKind::OutOfRange, std::string(body) + " not in [-1, 1]");
  }
  return value;
}

std::string request_body(const EndpointConfig &config, std::string_view prompt) {
  nlohmann::ordered_json body;
  body["model"] = config.model_name;
  body["messages"] = nlohmann::ordered_json::array(
      {nlohmann::ordered_json{{"role", "user"}, {"content", std::string(prompt)}}});
  body["temperature"] = 0;
  return body.dump();
}

namespace {

struct Url {
  std::string origin; // scheme://host[:port]
  std::string path;   // without trailing slash
};

Url split_url(const std::string &base) {
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::InvalidConfig, "base_url needs a scheme: '" + base + "'");
  }
  const auto path_start = base.find('/', scheme_end + 3);
  Url url;
  url.origin = base.substr(0, path_start);
  url.path = path_start == std::string::npos ? "" : base.substr(path_start);
  while (!url.path.empty() && url.path.back() == '/') url.path.pop_back();
  return url;
}

std::string extract_content(const std::string &body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::WrongShape, "completion body is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception &) {
    throw Error(ErrorKind::WrongShape, "completion body lacks choices[0].message.content");
  }
}

} // namespace

std::string request(const EndpointConfig &config, std::string_view prompt) {
  if (config.api_key.empty()) {
    throw Error(ErrorKind::AuthMissing, std::string(kApiKeyEnv) + " is not set");
  }
  if (!(config.timeout_seconds > 0.0) || config.max_retries < 0) {
    throw Error(ErrorKind::InvalidConfig, "timeout must be > 0 and retries >= 0");
  }
  const Url url = split_url(config.base_url);
  const std::string body = request_body(config, prompt);
  const httplib::Headers headers = {{"Authorization", "Bearer " + config.api_key}};
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config.timeout_seconds));

  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                static_cast<time_t>(timeout.count() % 1000000));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                          static_cast<time_t>(timeout.count() % 1000000));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                           static_cast<time_t>(timeout.count() % 1000000));

  auto backoff = config.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(url.path + "/chat/completions", headers, body, "application/json");
    std::optional<Error> failure;
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      failure.emplace(timed_out ? ErrorKind::Timeout : ErrorKind::Transport,
                      httplib::to_string(err));
    } else if (res->status >= 500) {
      failure.emplace(ErrorKind::HttpStatus, "HTTP " + std::to_string(res->status));
    } else if (res->status >= 300 || res->status < 200) {
      throw Error(ErrorKind::HttpStatus, "HTTP " + std::to_string(res->status));
    } else {
      return extract_content(res->body);
    }
    if (attempt >= config.max_retries) throw *failure;
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

std::vector<PerfOutcome> estimate_performance(const EndpointConfig &config,
                                              const std::vector<PerfQuery> &queries,
                                              int max_in_flight) {
  std::vector<PerfOutcome> outcomes(queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      const PerfQuery &q = queries[i];
      PerfOutcome &out = outcomes[i];
      out.key = q.key;
      out.sector = q.sector;
      try {
        out.value = parse_perf_response(request(config, build_perf_prompt(q.sector, q.excerpt)));
      } catch (const Error &e) {
        out.error = e.kind();
        out.message = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(max_in_flight, static_cast<int>(queries.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  return outcomes;
}

} // namespace sectorrank::llm

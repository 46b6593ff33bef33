#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sectorrank/corpus.hpp"
#include "sectorrank/error.hpp"

namespace sectorrank::llm {

inline constexpr const char *kApiKeyEnv = "BASIR_LLM_API_KEY";

struct EndpointConfig {
  std::string base_url; // e.g. http://localhost:8000/v1
  std::string model_name;
  std::string api_key;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};

  /// Fills api_key from BASIR_LLM_API_KEY (left empty when unset).
  static EndpointConfig from_environment(std::string base_url, std::string model_name);
};

struct ExtractionRecord {
  std::string text_segment;
  std::vector<SectorId> industry;
};

struct RejectedIndustry {
  std::size_t record = 0; // index in the response array
  std::string name;
};

struct ExtractionResult {
  std::vector<ExtractionRecord> records;
  std::vector<RejectedIndustry> rejects;
};

/// Sector-tagging prompt over a full transcript. Throws EmptyTranscript.
std::string build_extraction_prompt(std::string_view transcript, const SectorTaxonomy &taxonomy);

/// Accepts a JSON array, optionally inside a markdown code fence, of objects
/// with exactly `text_segment` and `industry`. Unknown industries go to
/// `rejects`; a record left with no known industry is dropped.
/// Throws NotJson, WrongShape.
ExtractionResult parse_extraction_response(std::string_view text, const SectorTaxonomy &taxonomy);

/// Per-sector performance prompt. Throws EmptyExcerpt.
std::string build_perf_prompt(const SectorId &sector, std::string_view excerpt);

/// One decimal number in [-1, 1]. Throws NotANumber, OutOfRange.
double parse_perf_response(std::string_view text);

/// Removes surrounding whitespace and one enclosing ``` / ```json fence.
std::string_view strip_fences(std::string_view text);

/// POSTs a single-user-message chat completion and returns the first
/// choice's message content. Retries transport failures and 5xx responses
/// with exponential backoff. Throws AuthMissing, Transport, Timeout,
/// HttpStatus, WrongShape.
std::string request(const EndpointConfig &config, std::string_view prompt);

/// JSON body sent by `request`.
std::string request_body(const EndpointConfig &config, std::string_view prompt);

struct PerfQuery {
  std::string key; // caller's identifier, echoed back
  SectorId sector;
  std::string excerpt;
};

struct PerfOutcome {
  std::string key;
  SectorId sector;
  std::optional<double> value;
  std::optional<ErrorKind> error;
  std::string message;
};

/// Runs one request per query with at most `max_in_flight` concurrent
/// requests. Outcomes come back in query order.
std::vector<PerfOutcome> estimate_performance(const EndpointConfig &config,
                                              const std::vector<PerfQuery> &queries,
                                              int max_in_flight);

} // namespace sectorrank::llm

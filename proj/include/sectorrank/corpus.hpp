#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sectorrank/date.hpp"

namespace sectorrank {

/// Canonical sector name. Construct through SectorTaxonomy lookups or
/// SectorId::canonical so the name is NFC-normalized and trimmed.
class SectorId {
public:
  SectorId() = default;
  explicit SectorId(std::string name) : name_(std::move(name)) {}
  static SectorId canonical(std::string_view raw);

  const std::string &name() const { return name_; }
  auto operator<=>(const SectorId &) const = default;

private:
  std::string name_;
};

class SectorTaxonomy {
public:
  SectorTaxonomy() = default;

  /// Adds a (sector, company) pair. New sectors are appended in call order.
  /// Throws EmptyField or DuplicatePair.
  void add(const SectorId &sector, const std::string &company);

  const std::vector<SectorId> &sectors() const { return sectors_; }
  std::size_t size() const { return sectors_.size(); }
  const std::vector<std::string> &companies(const SectorId &sector) const;

  std::optional<std::size_t> index_of(const SectorId &sector) const;
  bool contains(const SectorId &sector) const { return index_.contains(sector); }
  /// Normalizes `raw` and returns the matching sector, if any.
  std::optional<SectorId> find(std::string_view raw) const;

private:
  std::vector<SectorId> sectors_;
  std::map<SectorId, std::size_t> index_;
  std::vector<std::vector<std::string>> companies_;
};

/// Industry names of the reference taxonomy, in reference order.
const std::vector<std::string> &reference_sector_names();

struct Segment {
  std::string id;
  int year = 0;
  Date date;
  std::string text;
  std::vector<SectorId> sectors; // taxonomy order, no duplicates
};

struct SplitSpec {
  int train_end_year = 2019;
  int val_end_year = 2023;
};

class Corpus {
public:
  Corpus() = default;
  /// Sorts by (date, id). Throws DuplicateId.
  explicit Corpus(std::vector<Segment> segments);

  const std::vector<Segment> &segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }
  /// Distinct budget dates, ascending. Interim and full budgets of one year
  /// are distinct events.
  std::vector<Date> events() const;
  const Segment *find(std::string_view id) const;

private:
  std::vector<Segment> segments_;
};

struct SplitResult {
  Corpus train;
  Corpus val;
  Corpus test;
  std::vector<std::string> warnings;
};

SectorTaxonomy parse_taxonomy(std::string_view csv_text, const std::string &source = "taxonomy");
SectorTaxonomy load_taxonomy(const std::filesystem::path &path);

Corpus parse_segments(std::string_view jsonl, const SectorTaxonomy &taxonomy, bool require_labels,
                      const std::string &source = "segments");
Corpus load_segments(const std::filesystem::path &path, const SectorTaxonomy &taxonomy,
                     bool require_labels);

/// Every record-level problem in a segments file (not just the first), each
/// prefixed with `source:line`.
std::vector<std::string> validate_segments(std::string_view jsonl, const SectorTaxonomy &taxonomy,
                                           bool require_labels,
                                           const std::string &source = "segments");

/// Canonical JSONL serialization, one record per line in corpus order.
std::string to_jsonl(const Corpus &corpus);

/// train: year <= train_end; val: train_end < year <= val_end; test: later.
/// Empty partitions produce warnings, not errors. Throws InvalidSplit.
SplitResult temporal_split(const Corpus &corpus, const SplitSpec &spec);

} // namespace sectorrank

template <> struct std::hash<sectorrank::SectorId> {
  std::size_t operator()(const sectorrank::SectorId &s) const noexcept {
    return std::hash<std::string>{}(s.name());
  }
};

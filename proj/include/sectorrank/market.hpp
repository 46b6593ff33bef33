#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sectorrank/corpus.hpp"
#include "sectorrank/date.hpp"

namespace sectorrank {

/// Daily opening prices keyed by company, each with its own trading calendar.
class PriceTable {
public:
  /// Throws NonPositivePrice, DuplicateEntry.
  void add(const std::string &company, const Date &date, double open);

  bool has_company(const std::string &company) const { return opens_.contains(company); }
  std::optional<double> open(const std::string &company, const Date &date) const;
  std::vector<Date> trading_days(const std::string &company) const;
  const std::map<std::string, std::map<Date, double>> &companies() const { return opens_; }

private:
  std::map<std::string, std::map<Date, double>> opens_;
};

struct SectorReturn {
  SectorId sector;
  Date budget_date;
  double value = 0.0;
  int companies_used = 0;
  int companies_skipped = 0;
};

/// Sectors by realized return, descending; ties by name ascending.
struct GroundTruthRanking {
  Date budget_date;
  std::vector<std::pair<SectorId, double>> ordered;
};

PriceTable parse_prices(std::string_view csv_text, const std::string &source = "prices");
PriceTable load_prices(const std::filesystem::path &path);

/// Smallest listed date strictly after `d`. Throws UnknownCompany, NoLaterDate.
Date next_trading_day(const PriceTable &table, const std::string &company, const Date &d);

/// Mean open-to-next-open return over the sector's usable constituents. The
/// anchor is a company's first listed date >= d; the exit is its next listed
/// date after the anchor. Companies lacking either are skipped.
/// Throws UnknownSector, NoUsableCompanies.
SectorReturn sector_return(const SectorTaxonomy &taxonomy, const PriceTable &table,
                           const SectorId &sector, const Date &d);

/// Throws MixedDates, DuplicateSector.
GroundTruthRanking ground_truth_ranking(const std::vector<SectorReturn> &returns);

/// CSV `date,sector,return,companies_used,companies_skipped`.
std::string returns_csv(const std::vector<SectorReturn> &returns);
std::vector<SectorReturn> parse_returns(std::string_view csv_text, const SectorTaxonomy &taxonomy,
                                        const std::string &source = "returns");

} // namespace sectorrank

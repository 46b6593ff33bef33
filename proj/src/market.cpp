#include "sectorrank/market.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "sectorrank/csv.hpp"
#include "sectorrank/error.hpp"
#include "sectorrank/io.hpp"

namespace sectorrank {

namespace {

double parse_number(std::string_view text, const std::string &where) {
  text = trim(text);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(x)) {
    throw Error(ErrorKind::MalformedRow, where + ": bad number '" + std::string(text) + "'");
  }
  return x;
}

int parse_int(std::string_view text, const std::string &where) {
  text = trim(text);
  int x = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::MalformedRow, where + ": bad integer '" + std::string(text) + "'");
  }
  return x;
}

} // namespace

void PriceTable::add(const std::string &company, const Date &date, double open) {
  if (!(open > 0.0) || !std::isfinite(open)) {
    throw Error(ErrorKind::NonPositivePrice, company + " " + date.iso());
  }
  if (!opens_[company].try_emplace(date, open).second) {
    throw Error(ErrorKind::DuplicateEntry, company + " " + date.iso());
  }
}

std::optional<double> PriceTable::open(const std::string &company, const Date &date) const {
  auto c = opens_.find(company);
  if (c == opens_.end()) return std::nullopt;
  auto d = c->second.find(date);
  if (d == c->second.end()) return std::nullopt;
  return d->second;
}

std::vector<Date> PriceTable::trading_days(const std::string &company) const {
  std::vector<Date> days;
  auto c = opens_.find(company);
  if (c == opens_.end()) return days;
  for (const auto &[date, open] : c->second) days.push_back(date);
  return days;
}

PriceTable parse_prices(std::string_view csv_text, const std::string &source) {
  PriceTable table;
  for (const auto &row : csv::parse_with_header(csv_text, {"company", "date", "open"}, source)) {
    const std::string where = source + ":" + std::to_string(row.line);
    if (row.fields.size() != 3) {
      throw Error(ErrorKind::MalformedRow, where + ": expected 3 columns");
    }
    const std::string company(trim(row.fields[0]));
    if (company.empty()) throw Error(ErrorKind::MalformedRow, where + ": empty company");
    Date date;
    try {
      date = Date::parse(trim(row.fields[1]));
    } catch (const Error &e) {
      throw Error(ErrorKind::MalformedRow, where + ": " + e.what());
    }
    const double open = parse_number(row.fields[2], where);
    try {
      table.add(company, date, open);
    } catch (const Error &e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  return table;
}

PriceTable load_prices(const std::filesystem::path &path) {
  return parse_prices(read_file(path), path.string());
}

Date next_trading_day(const PriceTable &table, const std::string &company, const Date &d) {
  auto c = table.companies().find(company);
  if (c == table.companies().end()) throw Error(ErrorKind::UnknownCompany, company);
  auto it = c->second.upper_bound(d);
  if (it == c->second.end()) throw Error(ErrorKind::NoLaterDate, company + " after " + d.iso());
  return it->first;
}

SectorReturn sector_return(const SectorTaxonomy &taxonomy, const PriceTable &table,
                           const SectorId &sector, const Date &d) {
  SectorReturn out{sector, d, 0.0, 0, 0};
  double sum = 0.0;
  for (const auto &company : taxonomy.companies(sector)) {
    auto c = table.companies().find(company);
    if (c == table.companies().end()) {
      ++out.companies_skipped;
      continue;
    }
    auto anchor = c->second.lower_bound(d);
    if (anchor == c->second.end() || std::next(anchor) == c->second.end()) {
      ++out.companies_skipped;
      continue;
    }
    const double p0 = anchor->second;
    const double p1 = std::next(anchor)->second;
    sum += (p1 - p0) / p0;
    ++out.companies_used;
  }
  if (out.companies_used == 0) {
    throw Error(ErrorKind::NoUsableCompanies, sector.name() + " on " + d.iso());
  }
  out.value = sum / out.companies_used;
  return out;
}

GroundTruthRanking ground_truth_ranking(const std::vector<SectorReturn> &returns) {
  GroundTruthRanking out;
  if (returns.empty()) return out;
  out.budget_date = returns.front().budget_date;
  std::set<SectorId> seen;
  for (const auto &r : returns) {
    if (r.budget_date != out.budget_date) {
      throw Error(ErrorKind::MixedDates, r.budget_date.iso() + " vs " + out.budget_date.iso());
    }
    if (!seen.insert(r.sector).second) throw Error(ErrorKind::DuplicateSector, r.sector.name());
    out.ordered.emplace_back(r.sector, r.value);
  }
  std::sort(out.ordered.begin(), out.ordered.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::string returns_csv(const std::vector<SectorReturn> &returns) {
  std::string out = "date,sector,return,companies_used,companies_skipped\n";
  for (const auto &r : returns) {
    out += csv::join({r.budget_date.iso(), r.sector.name(), format_double(r.value),
                      std::to_string(r.companies_used), std::to_string(r.companies_skipped)});
    out.push_back('\n');
  }
  return out;
}

std::vector<SectorReturn> parse_returns(std::string_view csv_text, const SectorTaxonomy &taxonomy,
                                        const std::string &source) {
  std::vector<SectorReturn> out;
  for (const auto &row : csv::parse_with_header(
           csv_text, {"date", "sector", "return", "companies_used", "companies_skipped"}, source)) {
    const std::string where = source + ":" + std::to_string(row.line);
    if (row.fields.size() != 5) throw Error(ErrorKind::MalformedRow, where + ": expected 5 columns");
    SectorReturn r;
    try {
      r.budget_date = Date::parse(trim(row.fields[0]));
    } catch (const Error &e) {
      throw Error(ErrorKind::MalformedRow, where + ": " + e.what());
    }
    auto sector = taxonomy.find(row.fields[1]);
    if (!sector) throw Error(ErrorKind::UnknownSector, where + ": '" + row.fields[1] + "'");
    r.sector = *sector;
    r.value = parse_number(row.fields[2], where);
    r.companies_used = parse_int(row.fields[3], where);
    r.companies_skipped = parse_int(row.fields[4], where);
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace sectorrank

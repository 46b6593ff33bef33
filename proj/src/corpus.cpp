#include "sectorrank/corpus.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "sectorrank/csv.hpp"
#include "sectorrank/error.hpp"
#include "sectorrank/io.hpp"

namespace sectorrank {

using nlohmann::json;

SectorId SectorId::canonical(std::string_view raw) { return SectorId(normalize_name(raw)); }

void SectorTaxonomy::add(const SectorId &sector, const std::string &company) {
  if (sector.name().empty()) throw Error(ErrorKind::EmptyField, "empty sector name");
  if (company.empty()) {
    throw Error(ErrorKind::EmptyField, "empty company for sector '" + sector.name() + "'");
  }
  auto [it, inserted] = index_.try_emplace(sector, sectors_.size());
  if (inserted) {
    sectors_.push_back(sector);
    companies_.emplace_back();
  }
  auto &list = companies_[it->second];
  if (std::find(list.begin(), list.end(), company) != list.end()) {
    throw Error(ErrorKind::DuplicatePair, sector.name() + "," + company);
  }
  list.push_back(company);
}

const std::vector<std::string> &SectorTaxonomy::companies(const SectorId &sector) const {
  auto it = index_.find(sector);
  if (it == index_.end()) throw Error(ErrorKind::UnknownSector, sector.name());
  return companies_[it->second];
}

std::optional<std::size_t> SectorTaxonomy::index_of(const SectorId &sector) const {
  auto it = index_.find(sector);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SectorId> SectorTaxonomy::find(std::string_view raw) const {
  SectorId id = SectorId::canonical(raw);
  if (!contains(id)) return std::nullopt;
  return id;
}

const std::vector<std::string> &reference_sector_names() {
  static const std::vector<std::string> names = {
      "Aerospace & Defence",
      "Agro Chemicals",
      "Air Transport Service",
      "Alcoholic Beverages",
      "Auto Ancillaries",
      "Automobile",
      "Banks",
      "Bearings",
      "Cables",
      "Capital Goods - Electrical Equipment",
      "Capital Goods-Non Electrical Equipment",
      "Castings, Forgings & Fastners",
      "Cement",
      "Cement - Products",
      "Ceramic Products",
      "Chemicals",
      "Computer Education",
      "Construction",
      "Consumer Durables",
      "Credit Rating Agencies",
      "Crude Oil & Natural Gas",
      "Diamond, Gems and Jewellery",
      "Diversified",
      "Dry cells",
      "E-Commerce/App based Aggregator",
      "Edible Oil",
      "Education",
      "Electronics",
      "Engineering",
      "Entertainment",
      "Ferro Alloys",
      "Fertilizers",
      "Finance",
      "Financial Services",
      "FMCG",
      "Gas Distribution",
      "Glass & Glass Products",
      "Healthcare",
      "Hotels & Restaurants",
      "Infrastructure Developers & Operators",
      "Infrastructure Investment Trusts",
      "Insurance",
      "IT - Hardware",
      "IT - Software",
      "Leather",
      "Logistics",
      "Marine Port & Services",
      "Media - Print/Television/Radio",
      "Mining & Mineral products",
      "Miscellaneous",
      "Non Ferrous Metals",
      "Oil Drill/Allied",
      "Packaging",
      "Paints/Varnish",
      "Paper",
      "Petrochemicals",
      "Pharmaceuticals",
      "Plantation & Plantation Products",
      "Plastic products",
      "Plywood Boards/Laminates",
      "Power Generation & Distribution",
      "Power Infrastructure",
      "Printing & Stationery",
      "Quick Service Restaurant",
      "Railways",
      "Readymade Garments/ Apparells",
      "Real Estate Investment Trusts",
      "Realty",
      "Refineries",
      "Refractories",
      "Retail",
      "Ship Building",
      "Shipping",
      "Steel",
      "Stock/ Commodity Brokers",
      "Sugar",
      "Telecomm Equipment & Infra Services",
      "Telecomm-Service",
      "Textiles",
      "Tobacco Products",
      "Trading",
      "Tyres",
  };
  return names;
}

SectorTaxonomy parse_taxonomy(std::string_view csv_text, const std::string &source) {
  SectorTaxonomy taxonomy;
  for (const auto &row : csv::parse_with_header(csv_text, {"sector", "company"}, source)) {
    const std::string where = source + ":" + std::to_string(row.line);
    if (row.fields.size() != 2) {
      throw Error(ErrorKind::MalformedRow, where + ": expected 2 columns, got " +
                                               std::to_string(row.fields.size()));
    }
    SectorId sector = SectorId::canonical(row.fields[0]);
    std::string company(trim(row.fields[1]));
    if (sector.name().empty() || company.empty()) {
      throw Error(ErrorKind::EmptyField, where);
    }
    try {
      taxonomy.add(sector, company);
    } catch (const Error &e) {
      throw Error(e.kind(), where + ": " + sector.name() + "," + company);
    }
  }
  return taxonomy;
}

SectorTaxonomy load_taxonomy(const std::filesystem::path &path) {
  return parse_taxonomy(read_file(path), path.string());
}

Corpus::Corpus(std::vector<Segment> segments) : segments_(std::move(segments)) {
  std::sort(segments_.begin(), segments_.end(), [](const Segment &a, const Segment &b) {
    return std::tie(a.date, a.id) < std::tie(b.date, b.id);
  });
  std::set<std::string_view> seen;
  for (const auto &s : segments_) {
    if (!seen.insert(s.id).second) throw Error(ErrorKind::DuplicateId, s.id);
  }
}

std::vector<Date> Corpus::events() const {
  std::vector<Date> dates;
  for (const auto &s : segments_) {
    if (dates.empty() || dates.back() != s.date) dates.push_back(s.date);
  }
  return dates;
}

const Segment *Corpus::find(std::string_view id) const {
  for (const auto &s : segments_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

namespace {

Segment parse_record(const json &obj, const SectorTaxonomy &taxonomy, bool require_labels,
                     const std::string &where) {
  if (!obj.is_object()) throw Error(ErrorKind::JsonSyntax, where + ": record is not an object");
  auto field = [&](const char *key) -> const json & {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorKind::JsonSyntax, where + ": missing key '" + key + "'");
    return *it;
  };
  const json &id = field("id");
  const json &year = field("year");
  const json &date = field("date");
  const json &text = field("text");
  const json &sectors = field("sectors");
  if (!id.is_string() || !year.is_number_integer() || !date.is_string() || !text.is_string() ||
      !sectors.is_array()) {
    throw Error(ErrorKind::JsonSyntax, where + ": field has wrong type");
  }

  Segment seg;
  seg.id = id.get<std::string>();
  if (seg.id.empty()) throw Error(ErrorKind::EmptyField, where + ": empty id");
  seg.year = year.get<int>();
  if (seg.year < 1947 || seg.year > 2100) {
    throw Error(ErrorKind::InvalidDate, where + ": year " + std::to_string(seg.year) +
                                            " outside 1947-2100");
  }
  try {
    seg.date = Date::parse(date.get<std::string>());
  } catch (const Error &e) {
    throw Error(ErrorKind::InvalidDate, where + ": " + e.what());
  }
  if (seg.date.year() != seg.year) {
    throw Error(ErrorKind::DateYearMismatch,
                where + ": date " + seg.date.iso() + " vs year " + std::to_string(seg.year));
  }
  seg.text = text.get<std::string>();

  std::vector<std::pair<std::size_t, SectorId>> labels;
  for (const auto &name : sectors) {
    if (!name.is_string()) throw Error(ErrorKind::JsonSyntax, where + ": sector is not a string");
    auto sector = taxonomy.find(name.get<std::string>());
    if (!sector) {
      throw Error(ErrorKind::UnknownSector, where + ": '" + name.get<std::string>() + "'");
    }
    labels.emplace_back(*taxonomy.index_of(*sector), *sector);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (auto &[idx, sector] : labels) seg.sectors.push_back(std::move(sector));
  if (require_labels && seg.sectors.empty()) {
    throw Error(ErrorKind::EmptyField, where + ": segment '" + seg.id + "' has no sectors");
  }
  return seg;
}

} // namespace

namespace {

// Calls `on_line(where, line)` for each non-blank line.
template <typename Fn> void for_each_line(std::string_view jsonl, const std::string &source, Fn &&on_line) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    auto nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    on_line(source + ":" + std::to_string(line_no), line);
  }
}

Segment parse_line(std::string_view line, const SectorTaxonomy &taxonomy, bool require_labels,
                   const std::string &where) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) throw Error(ErrorKind::JsonSyntax, where + ": invalid JSON");
  return parse_record(obj, taxonomy, require_labels, where);
}

} // namespace

Corpus parse_segments(std::string_view jsonl, const SectorTaxonomy &taxonomy, bool require_labels,
                      const std::string &source) {
  std::vector<Segment> segments;
  std::set<std::string> ids;
  for_each_line(jsonl, source, [&](const std::string &where, std::string_view line) {
    Segment seg = parse_line(line, taxonomy, require_labels, where);
    if (!ids.insert(seg.id).second) {
      throw Error(ErrorKind::DuplicateId, where + ": '" + seg.id + "'");
    }
    segments.push_back(std::move(seg));
  });
  return Corpus(std::move(segments));
}

std::vector<std::string> validate_segments(std::string_view jsonl, const SectorTaxonomy &taxonomy,
                                           bool require_labels, const std::string &source) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for_each_line(jsonl, source, [&](const std::string &where, std::string_view line) {
    try {
      Segment seg = parse_line(line, taxonomy, require_labels, where);
      if (!ids.insert(seg.id).second) {
        throw Error(ErrorKind::DuplicateId, where + ": '" + seg.id + "'");
      }
    } catch (const Error &e) {
      problems.emplace_back(e.what());
    }
  });
  return problems;
}

Corpus load_segments(const std::filesystem::path &path, const SectorTaxonomy &taxonomy,
                     bool require_labels) {
  return parse_segments(read_file(path), taxonomy, require_labels, path.string());
}

std::string to_jsonl(const Corpus &corpus) {
  std::string out;
  for (const auto &s : corpus.segments()) {
    json sectors = json::array();
    for (const auto &sector : s.sectors) sectors.push_back(sector.name());
    // ordered_json keeps the documented key order
    nlohmann::ordered_json obj;
    obj["id"] = s.id;
    obj["year"] = s.year;
    obj["date"] = s.date.iso();
    obj["text"] = s.text;
    obj["sectors"] = std::move(sectors);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

SplitResult temporal_split(const Corpus &corpus, const SplitSpec &spec) {
  if (spec.train_end_year >= spec.val_end_year) {
    throw Error(ErrorKind::InvalidSplit, "train_end_year must be < val_end_year");
  }
  std::vector<Segment> train, val, test;
  for (const auto &s : corpus.segments()) {
    if (s.year <= spec.train_end_year) {
      train.push_back(s);
    } else if (s.year <= spec.val_end_year) {
      val.push_back(s);
    } else {
      test.push_back(s);
    }
  }
  SplitResult result{Corpus(std::move(train)), Corpus(std::move(val)), Corpus(std::move(test)), {}};
  if (result.train.empty()) result.warnings.push_back("EmptySplit: train");
  if (result.val.empty()) result.warnings.push_back("EmptySplit: val");
  if (result.test.empty()) result.warnings.push_back("EmptySplit: test");
  return result;
}

} // namespace sectorrank

#include "sectorrank/classifier.hpp"

#include <map>
#include <set>

#include "sectorrank/csv.hpp"
#include "sectorrank/io.hpp"

namespace sectorrank {

double SectorScores::score(const SectorId &sector) const {
  for (std::size_t k = 0; k < sectors.size(); ++k) {
    if (sectors[k] == sector) return scores[static_cast<Eigen::Index>(k)];
  }
  throw Error(ErrorKind::UnknownSector, sector.name());
}

SectorScores score_sectors(const std::string &segment_id, const Eigen::VectorXd &segment_vector,
                           const AdapterModel &model) {
  const Eigen::VectorXd adapted = apply_adapter(model, segment_vector);
  SectorScores out{segment_id, model.sectors, Eigen::VectorXd(model.prototypes.cols())};
  for (Eigen::Index k = 0; k < model.prototypes.cols(); ++k) {
    out.scores[k] = cosine(adapted, model.prototypes.col(k));
  }
  return out;
}

PredictionSet predict(const SectorScores &scores, double tau) {
  PredictionSet out{scores.segment_id, {}, tau};
  for (std::size_t k = 0; k < scores.sectors.size(); ++k) {
    if (scores.scores[static_cast<Eigen::Index>(k)] >= tau) out.predicted.push_back(scores.sectors[k]);
  }
  return out;
}

SectorF1 f1_from_counts(const SectorCounts &c) {
  SectorF1 r{c, 0.0, 0.0, 0.0};
  if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

F1Report evaluate_f1(const std::vector<PredictionSet> &predictions, const Corpus &gold,
                     const SectorTaxonomy &taxonomy) {
  std::map<std::string_view, const PredictionSet *> by_id;
  for (const auto &p : predictions) {
    if (!gold.find(p.segment_id)) throw Error(ErrorKind::UnknownSegment, p.segment_id);
    by_id[p.segment_id] = &p;
  }

  std::vector<SectorCounts> counts(taxonomy.size());
  for (const auto &seg : gold.segments()) {
    if (seg.sectors.empty()) continue;
    auto it = by_id.find(seg.id);
    if (it == by_id.end()) throw Error(ErrorKind::MissingPrediction, seg.id);

    std::set<std::size_t> truth, guess;
    for (const auto &s : seg.sectors) {
      auto idx = taxonomy.index_of(s);
      if (!idx) throw Error(ErrorKind::UnknownSector, s.name());
      truth.insert(*idx);
    }
    for (const auto &s : it->second->predicted) {
      auto idx = taxonomy.index_of(s);
      if (!idx) throw Error(ErrorKind::UnknownSector, s.name());
      guess.insert(*idx);
    }
    for (std::size_t k : guess) ++(truth.contains(k) ? counts[k].tp : counts[k].fp);
    for (std::size_t k : truth) {
      if (!guess.contains(k)) ++counts[k].fn;
    }
  }

  F1Report report;
  report.sectors = taxonomy.sectors();
  SectorCounts pooled;
  double f1_sum = 0.0;
  double weighted_sum = 0.0;
  std::size_t support_total = 0;
  for (const auto &c : counts) {
    SectorF1 r = f1_from_counts(c);
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    f1_sum += r.f1;
    weighted_sum += static_cast<double>(c.support()) * r.f1;
    support_total += c.support();
    report.per_sector.push_back(r);
  }
  if (!counts.empty()) report.macro = f1_sum / static_cast<double>(counts.size());
  report.micro = f1_from_counts(pooled).f1;
  if (support_total > 0) report.weighted = weighted_sum / static_cast<double>(support_total);
  return report;
}

std::string predictions_csv(const std::vector<SectorScores> &scores, double tau, bool full) {
  std::string out = "segment_id,sector,score,predicted\n";
  for (const auto &s : scores) {
    for (std::size_t k = 0; k < s.sectors.size(); ++k) {
      const double v = s.scores[static_cast<Eigen::Index>(k)];
      const bool hit = v >= tau;
      if (!hit && !full) continue;
      out += csv::join({s.segment_id, s.sectors[k].name(), format_double(v), hit ? "1" : "0"});
      out.push_back('\n');
    }
  }
  return out;
}

} // namespace sectorrank

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "sectorrank/corpus.hpp"
#include "sectorrank/embeddings.hpp"

namespace sectorrank {

/// Similarity of one segment to every sector, aligned with `sectors`.
struct SectorScores {
  std::string segment_id;
  std::vector<SectorId> sectors;
  Eigen::VectorXd scores;

  double score(const SectorId &sector) const;
};

struct PredictionSet {
  std::string segment_id;
  std::vector<SectorId> predicted;
  double tau = 0.5;
};

struct SectorCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support() const { return tp + fn; }
  bool operator==(const SectorCounts &) const = default;
};

struct SectorF1 {
  SectorCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct F1Report {
  double macro = 0.0;
  double micro = 0.0;
  double weighted = 0.0;
  std::vector<SectorId> sectors; // taxonomy order
  std::vector<SectorF1> per_sector;
};

/// cos(W v, prototype_s) for every sector of the model.
SectorScores score_sectors(const std::string &segment_id, const Eigen::VectorXd &segment_vector,
                           const AdapterModel &model);

/// Sectors with score >= tau, in model order. May be empty.
PredictionSet predict(const SectorScores &scores, double tau);

/// Precision/recall/F1 from raw counts with 0/0 taken as 0.
SectorF1 f1_from_counts(const SectorCounts &counts);

/// Macro (all taxonomy sectors, zero-support included), micro (pooled) and
/// support-weighted F1 over labeled segments of `gold`. Throws
/// MissingPrediction, UnknownSegment, UnknownSector.
F1Report evaluate_f1(const std::vector<PredictionSet> &predictions, const Corpus &gold,
                     const SectorTaxonomy &taxonomy);

/// CSV `segment_id,sector,score,predicted`. Without `full`, only rows at or
/// above tau are written.
std::string predictions_csv(const std::vector<SectorScores> &scores, double tau, bool full);

} // namespace sectorrank

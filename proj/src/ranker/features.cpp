#include <algorithm>

#include "sectorrank/ranker.hpp"

namespace sectorrank {

Eigen::VectorXd make_features(const Date &event, const SectorId &sector, const Corpus &segments,
                              const EmbeddingStore &store, const AdapterModel *adapter) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(store.dim());
  int count = 0;
  for (const auto &seg : segments.segments()) {
    if (seg.date != event) continue;
    if (std::find(seg.sectors.begin(), seg.sectors.end(), sector) == seg.sectors.end()) continue;
    const Eigen::VectorXd &v = store.segment(seg.id);
    if (adapter) {
      sum += apply_adapter(*adapter, v);
    } else {
      sum += v;
    }
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::NoSegments, sector.name() + " on " + event.iso());
  return sum / static_cast<double>(count);
}

std::vector<RankingInstance> make_instances(const Corpus &segments, const EmbeddingStore &store,
                                            const std::vector<SectorReturn> &returns,
                                            const AdapterModel *adapter) {
  std::vector<const SectorReturn *> sorted;
  for (const auto &r : returns) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const SectorReturn *a, const SectorReturn *b) {
    return std::tie(a->budget_date, a->sector) < std::tie(b->budget_date, b->sector);
  });

  std::vector<RankingInstance> out;
  for (const SectorReturn *r : sorted) {
    Eigen::VectorXd feature;
    try {
      feature = make_features(r->budget_date, r->sector, segments, store, adapter);
    } catch (const Error &e) {
      if (e.kind() == ErrorKind::NoSegments) continue;
      throw;
    }
    out.push_back({r->budget_date, r->sector, std::move(feature), r->value, r->value > 0.0});
  }
  return out;
}

Eigen::MatrixXd feature_matrix(const std::vector<RankingInstance> &instances) {
  if (instances.empty()) return {};
  const Eigen::Index dim = instances.front().feature.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(instances.size()), dim);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].feature.size() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "instance " + std::to_string(i));
    }
    X.row(static_cast<Eigen::Index>(i)) = instances[i].feature.transpose();
  }
  return X;
}

} // namespace sectorrank

#include <algorithm>
#include <cmath>
#include <set>

#include "sectorrank/csv.hpp"
#include "sectorrank/io.hpp"
#include "sectorrank/ranker.hpp"

namespace sectorrank {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_dim(Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw Error(ErrorKind::DimensionMismatch,
                "model dim " + std::to_string(expected) + " vs feature " + std::to_string(got));
  }
}

template <typename Pair> void sort_desc_by_score(std::vector<Pair> &items) {
  std::sort(items.begin(), items.end(), [](const Pair &a, const Pair &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

} // namespace

double score(const RankerModel &model, const Eigen::Ref<const Eigen::VectorXd> &feature) {
  return std::visit(
      [&](const auto &m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogisticModel>) {
          check_dim(m.weights.size(), feature.size());
          return sigmoid(m.weights.dot(feature) + m.bias);
        } else if constexpr (std::is_same_v<M, LinearModel>) {
          check_dim(m.weights.size(), feature.size());
          return m.weights.dot(feature) + m.bias;
        } else {
          check_dim(m.dim, feature.size());
          const double margin = m.margin(feature);
          if (m.objective == Objective::Logistic && m.config.mode == EnsembleMode::Boosted) {
            return sigmoid(margin);
          }
          return margin;
        }
      },
      model);
}

RankedList rank_event(const std::map<SectorId, double> &scores, const Date &budget_date) {
  RankedList out{budget_date, {scores.begin(), scores.end()}};
  sort_desc_by_score(out.ordered);
  return out;
}

double ndcg(const RankedList &predicted, const GroundTruthRanking &truth) {
  const std::size_t n = truth.ordered.size();
  std::map<SectorId, double> relevance;
  for (std::size_t j = 0; j < n; ++j) {
    relevance.emplace(truth.ordered[j].first, static_cast<double>(n - j));
  }
  if (predicted.ordered.size() != n || relevance.size() != n) {
    throw Error(ErrorKind::SectorSetMismatch, "predicted and truth sizes differ");
  }
  double dcg = 0.0, idcg = 0.0;
  std::set<SectorId> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const SectorId &s = predicted.ordered[i].first;
    auto it = relevance.find(s);
    if (it == relevance.end() || !seen.insert(s).second) {
      throw Error(ErrorKind::SectorSetMismatch, s.name());
    }
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += it->second / discount;
    idcg += static_cast<double>(n - i) / discount;
  }
  if (n == 0) return 1.0;
  return dcg / idcg;
}

GroundTruthRanking truth_for(const std::vector<RankingInstance> &instances, const Date &event) {
  std::vector<SectorReturn> returns;
  for (const auto &inst : instances) {
    if (inst.budget_date == event) returns.push_back({inst.sector, event, inst.target_return, 1, 0});
  }
  return ground_truth_ranking(returns);
}

RankingEvaluation evaluate_ranker(const RankerModel &model,
                                  const std::vector<RankingInstance> &instances) {
  std::map<Date, std::map<SectorId, double>> by_event;
  for (const auto &inst : instances) {
    if (!by_event[inst.budget_date].emplace(inst.sector, score(model, inst.feature)).second) {
      throw Error(ErrorKind::DuplicateSector, inst.sector.name() + " on " + inst.budget_date.iso());
    }
  }
  RankingEvaluation eval;
  double sum = 0.0;
  for (const auto &[date, scores] : by_event) {
    RankedList ranked = rank_event(scores, date);
    const double value = ndcg(ranked, truth_for(instances, date));
    eval.per_event.push_back({date, value});
    eval.rankings.push_back(std::move(ranked));
    sum += value;
  }
  if (!eval.per_event.empty()) eval.mean_ndcg = sum / static_cast<double>(eval.per_event.size());
  return eval;
}

std::string rankings_csv(const std::vector<RankedList> &rankings) {
  std::string out = "date,rank,sector,score\n";
  for (const auto &list : rankings) {
    for (std::size_t i = 0; i < list.ordered.size(); ++i) {
      out += csv::join({list.budget_date.iso(), std::to_string(i + 1), list.ordered[i].first.name(),
                        format_double(list.ordered[i].second)});
      out.push_back('\n');
    }
  }
  return out;
}

std::string ndcg_csv(const std::vector<EventNdcg> &per_event, double mean) {
  std::string out = "date,ndcg\n";
  for (const auto &e : per_event) out += e.budget_date.iso() + "," + format_double(e.ndcg) + "\n";
  out += "mean," + format_double(mean) + "\n";
  return out;
}

ModelKind parse_model_kind(std::string_view text) {
  static const std::pair<std::string_view, ModelKind> kinds[] = {
      {"logistic", ModelKind::Logistic},   {"linear", ModelKind::Linear},
      {"gbt-cls", ModelKind::GbtCls},      {"gbt-reg", ModelKind::GbtReg},
      {"gbt-ltr", ModelKind::GbtLtr},      {"forest-cls", ModelKind::ForestCls},
      {"forest-reg", ModelKind::ForestReg},
  };
  for (const auto &[name, kind] : kinds) {
    if (name == text) return kind;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown model kind '" + std::string(text) + "'");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::Logistic: return "logistic";
  case ModelKind::Linear: return "linear";
  case ModelKind::GbtCls: return "gbt-cls";
  case ModelKind::GbtReg: return "gbt-reg";
  case ModelKind::GbtLtr: return "gbt-ltr";
  case ModelKind::ForestCls: return "forest-cls";
  case ModelKind::ForestReg: return "forest-reg";
  }
  return "unknown";
}

RankerModel train_ranker(ModelKind kind, const std::vector<RankingInstance> &instances,
                         std::uint64_t seed) {
  EnsembleConfig boosted = EnsembleConfig::boosted();
  boosted.seed = seed;
  EnsembleConfig bagged = EnsembleConfig::bagged();
  bagged.seed = seed;
  switch (kind) {
  case ModelKind::Logistic: return train_logistic(instances);
  case ModelKind::Linear: return train_linear(instances);
  case ModelKind::GbtCls: return train_ensemble(instances, Objective::Logistic, boosted);
  case ModelKind::GbtReg: return train_ensemble(instances, Objective::Squared, boosted);
  case ModelKind::GbtLtr: return train_ensemble(instances, Objective::Pairwise, boosted);
  case ModelKind::ForestCls: return train_ensemble(instances, Objective::Logistic, bagged);
  case ModelKind::ForestReg: return train_ensemble(instances, Objective::Squared, bagged);
  }
  throw Error(ErrorKind::InvalidConfig, "unknown model kind");
}

} // namespace sectorrank

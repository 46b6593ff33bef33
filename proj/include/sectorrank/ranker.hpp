#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "sectorrank/corpus.hpp"
#include "sectorrank/embeddings.hpp"
#include "sectorrank/market.hpp"

namespace sectorrank {

// ---------------------------------------------------------------------------
// Instances and features

struct RankingInstance {
  Date budget_date;
  SectorId sector;
  Eigen::VectorXd feature;
  double target_return = 0.0;
  bool label_up = false; // target_return > 0
};

/// Mean of the (optionally adapted) vectors of segments dated `event` and
/// labeled with `sector`. Throws NoSegments, MissingVector.
Eigen::VectorXd make_features(const Date &event, const SectorId &sector, const Corpus &segments,
                              const EmbeddingStore &store, const AdapterModel *adapter = nullptr);

/// One instance per return whose (date, sector) has at least one labeled
/// segment; others are skipped. Ordered by (date, sector name).
std::vector<RankingInstance> make_instances(const Corpus &segments, const EmbeddingStore &store,
                                            const std::vector<SectorReturn> &returns,
                                            const AdapterModel *adapter = nullptr);

/// Rows are instance features.
Eigen::MatrixXd feature_matrix(const std::vector<RankingInstance> &instances);

// ---------------------------------------------------------------------------
// Logistic and linear models

struct LogisticConfig {
  double learning_rate = 1.0;
  int epochs = 500;
  double l2 = 1e-4;
};

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double l2 = 0.0;
  LogisticConfig config;
};

struct LogisticGradient {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

/// Mean binary cross-entropy on `labels` plus 0.5 * l2 * |w|^2.
double logistic_loss(const LogisticModel &model, const Eigen::MatrixXd &X,
                     const Eigen::VectorXd &labels);
LogisticGradient logistic_grad(const LogisticModel &model, const Eigen::MatrixXd &X,
                               const Eigen::VectorXd &labels);

/// Full-batch gradient descent; a step that would raise the loss is halved
/// until it does not. Throws SingleClass, Diverged.
LogisticModel train_logistic(const std::vector<RankingInstance> &instances,
                             const LogisticConfig &config = {});

struct LinearConfig {
  double l2 = 1e-8;
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double l2 = 0.0;
};

inline constexpr double kRidgeFloor = 1e-8;

/// Ridge regression on target_return, unpenalized bias, via the normal
/// equations with ridge max(l2, 1e-8).
LinearModel train_linear(const std::vector<RankingInstance> &instances,
                         const LinearConfig &config = {});

// ---------------------------------------------------------------------------
// Tree ensembles

enum class Objective { Squared, Logistic, Pairwise };
enum class EnsembleMode { Boosted, Bagged };

struct TreeNode {
  int feature = -1; // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;  // x[feature] <= threshold
  int right = -1; // x[feature] > threshold
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes; // nodes[0] is the root

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived> &x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode &n = nodes[static_cast<std::size_t>(i)];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
  int depth() const;
};

struct EnsembleConfig {
  EnsembleMode mode = EnsembleMode::Boosted;
  int num_trees = 100;
  int max_depth = 3;
  double shrinkage = 0.1;  // boosted only
  double reg_lambda = 1.0; // boosted leaf L2; bagged leaves are plain means
  double min_child_weight = 0.0;
  bool bootstrap = true; // bagged only
  std::uint64_t seed = 42;

  static EnsembleConfig boosted() { return {}; }
  static EnsembleConfig bagged() {
    EnsembleConfig c;
    c.mode = EnsembleMode::Bagged;
    c.max_depth = 6;
    c.shrinkage = 1.0;
    c.reg_lambda = 0.0;
    return c;
  }
};

struct TreeEnsemble {
  std::vector<Tree> trees;
  double shrinkage = 0.1; // per-tree weight; 1/num_trees for bagged
  double base_score = 0.0;
  Objective objective = Objective::Squared;
  EnsembleConfig config;
  Eigen::Index dim = 0;

  /// base_score + shrinkage * sum of leaf values.
  double margin(const Eigen::Ref<const Eigen::VectorXd> &x) const;
};

/// Event grouping for the pairwise objective: instances sharing a date form
/// one group. Returns a group index per instance.
std::vector<int> event_groups(const std::vector<RankingInstance> &instances);

/// Sum over same-group pairs with target_i > target_j of
/// log(1 + exp(-(score_i - score_j))).
double pairwise_loss(const Eigen::VectorXd &scores, const Eigen::VectorXd &targets,
                     const std::vector<int> &groups);
/// Gradient of pairwise_loss w.r.t. scores; `hessian` gets the diagonal.
Eigen::VectorXd pairwise_gradient(const Eigen::VectorXd &scores, const Eigen::VectorXd &targets,
                                  const std::vector<int> &groups,
                                  Eigen::VectorXd *hessian = nullptr);

/// Boosted: trees fit to the objective's gradients with Newton leaves.
/// Bagged: independent trees on seeded bootstrap resamples, averaged.
/// Throws NoPairs, SingleClass, InvalidConfig.
TreeEnsemble train_ensemble(const std::vector<RankingInstance> &instances, Objective objective,
                            const EnsembleConfig &config = {});

// ---------------------------------------------------------------------------
// Scoring, ranking, evaluation

using RankerModel = std::variant<LogisticModel, LinearModel, TreeEnsemble>;

/// Probability (logistic models and classification ensembles), predicted
/// return (linear, regression ensembles) or raw ranking score (pairwise).
/// Throws DimensionMismatch.
double score(const RankerModel &model, const Eigen::Ref<const Eigen::VectorXd> &feature);

struct RankedList {
  Date budget_date;
  std::vector<std::pair<SectorId, double>> ordered;
};

/// Descending score, ties by sector name ascending.
RankedList rank_event(const std::map<SectorId, double> &scores, const Date &budget_date);

/// Untruncated NDCG with rank-derived gains: the sector at truth position j
/// (0-based) of N has relevance N - j; discount log2(i + 2).
/// Throws SectorSetMismatch.
double ndcg(const RankedList &predicted, const GroundTruthRanking &truth);

struct EventNdcg {
  Date budget_date;
  double ndcg = 0.0;
};

struct RankingEvaluation {
  std::vector<RankedList> rankings;
  std::vector<EventNdcg> per_event;
  double mean_ndcg = 0.0;
};

RankingEvaluation evaluate_ranker(const RankerModel &model,
                                  const std::vector<RankingInstance> &instances);

/// Ground truth for the instances of one event, from their target returns.
GroundTruthRanking truth_for(const std::vector<RankingInstance> &instances, const Date &event);

/// CSV `date,rank,sector,score` (rank is 1-based).
std::string rankings_csv(const std::vector<RankedList> &rankings);
/// CSV `date,ndcg` with a trailing `mean,<value>` row.
std::string ndcg_csv(const std::vector<EventNdcg> &per_event, double mean);

// ---------------------------------------------------------------------------
// Model kinds and persistence

enum class ModelKind { Logistic, Linear, GbtCls, GbtReg, GbtLtr, ForestCls, ForestReg };

ModelKind parse_model_kind(std::string_view text);
std::string_view to_string(ModelKind kind);

/// Trains the model family behind a CLI `--model-kind` with its defaults.
RankerModel train_ranker(ModelKind kind, const std::vector<RankingInstance> &instances,
                         std::uint64_t seed);

/// JSON with `format_version`, `kind` (logistic|linear|ensemble), parameters
/// and a config echo.
std::string model_to_json(const RankerModel &model);
RankerModel model_from_json(std::string_view text);

} // namespace sectorrank

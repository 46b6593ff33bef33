#include <algorithm>
#include <cmath>
#include <numeric>

#include "sectorrank/random.hpp"
#include "sectorrank/ranker.hpp"

namespace sectorrank {

namespace {

constexpr double kMinGain = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log1p_exp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

int subtree_depth(const Tree &tree, int node) {
  const TreeNode &n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(subtree_depth(tree, n.left), subtree_depth(tree, n.right));
}

/// Exact greedy tree growth over gradient/hessian statistics. `rows` may
/// contain repeated indices (bootstrap multiplicity).
class TreeBuilder {
public:
  TreeBuilder(const Eigen::MatrixXd &X, const Eigen::VectorXd &grad, const Eigen::VectorXd &hess,
              const EnsembleConfig &config)
      : X_(X), grad_(grad), hess_(hess), config_(config) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, std::move(rows), 0);
    return tree;
  }

private:
  struct Split {
    double gain = kMinGain;
    int feature = -1;
    double threshold = 0.0;
  };

  double leaf_value(double G, double H) const {
    const double denom = H + config_.reg_lambda;
    return denom > 0.0 ? -G / denom : 0.0;
  }

  double score(double G, double H) const {
    const double denom = H + config_.reg_lambda;
    return denom > 0.0 ? G * G / denom : 0.0;
  }

  void grow(Tree &tree, int node, std::vector<std::size_t> rows, int depth) {
    double G = 0.0, H = 0.0;
    for (std::size_t r : rows) {
      G += grad_[static_cast<Eigen::Index>(r)];
      H += hess_[static_cast<Eigen::Index>(r)];
    }
    tree.nodes[static_cast<std::size_t>(node)].value = leaf_value(G, H);
    if (depth >= config_.max_depth || rows.size() < 2) return;

    const Split best = find_split(rows, G, H);
    if (best.feature < 0) return;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (X_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int rgt = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode &n = tree.nodes[static_cast<std::size_t>(node)];
    n.feature = best.feature;
    n.threshold = best.threshold;
    n.left = l;
    n.right = rgt;
    grow(tree, l, std::move(left), depth + 1);
    grow(tree, rgt, std::move(right), depth + 1);
  }

  // Ties keep the first candidate: lowest feature, then lowest threshold.
  Split find_split(const std::vector<std::size_t> &rows, double G, double H) const {
    Split best;
    const double parent = score(G, H);
    std::vector<std::size_t> order(rows);
    for (Eigen::Index f = 0; f < X_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return X_(static_cast<Eigen::Index>(a), f) < X_(static_cast<Eigen::Index>(b), f);
      });
      double GL = 0.0, HL = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        GL += grad_[static_cast<Eigen::Index>(order[i])];
        HL += hess_[static_cast<Eigen::Index>(order[i])];
        const double lo = X_(static_cast<Eigen::Index>(order[i]), f);
        const double hi = X_(static_cast<Eigen::Index>(order[i + 1]), f);
        if (!(lo < hi)) continue;
        const double HR = H - HL;
        if (HL < config_.min_child_weight || HR < config_.min_child_weight) continue;
        const double gain = 0.5 * (score(GL, HL) + score(G - GL, HR) - parent);
        if (gain > best.gain) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = {gain, static_cast<int>(f), mid};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd &X_;
  const Eigen::VectorXd &grad_;
  const Eigen::VectorXd &hess_;
  const EnsembleConfig &config_;
};

void check_config(const EnsembleConfig &c) {
  if (c.num_trees < 1 || c.max_depth < 0 || !(c.shrinkage > 0.0 && c.shrinkage <= 1.0) ||
      !(c.reg_lambda >= 0.0) || !(c.min_child_weight >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "ensemble config out of range");
  }
}

} // namespace

int Tree::depth() const { return nodes.empty() ? 0 : subtree_depth(*this, 0); }

double TreeEnsemble::margin(const Eigen::Ref<const Eigen::VectorXd> &x) const {
  double sum = 0.0;
  for (const Tree &t : trees) sum += t.predict(x);
  return base_score + shrinkage * sum;
}

std::vector<int> event_groups(const std::vector<RankingInstance> &instances) {
  std::map<Date, int> ids;
  std::vector<int> groups;
  groups.reserve(instances.size());
  for (const auto &inst : instances) {
    auto [it, inserted] = ids.try_emplace(inst.budget_date, static_cast<int>(ids.size()));
    groups.push_back(it->second);
  }
  return groups;
}

namespace {

template <typename Fn>
void for_each_pair(const Eigen::VectorXd &targets, const std::vector<int> &groups, Fn &&fn) {
  std::map<int, std::vector<Eigen::Index>> members;
  for (std::size_t i = 0; i < groups.size(); ++i) members[groups[i]].push_back(static_cast<Eigen::Index>(i));
  for (const auto &[group, idx] : members) {
    for (Eigen::Index a : idx) {
      for (Eigen::Index b : idx) {
        if (targets[a] > targets[b]) fn(a, b);
      }
    }
  }
}

} // namespace

double pairwise_loss(const Eigen::VectorXd &scores, const Eigen::VectorXd &targets,
                     const std::vector<int> &groups) {
  double loss = 0.0;
  for_each_pair(targets, groups, [&](Eigen::Index hi, Eigen::Index lo) {
    loss += log1p_exp(-(scores[hi] - scores[lo]));
  });
  return loss;
}

Eigen::VectorXd pairwise_gradient(const Eigen::VectorXd &scores, const Eigen::VectorXd &targets,
                                  const std::vector<int> &groups, Eigen::VectorXd *hessian) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(scores.size());
  if (hessian) *hessian = Eigen::VectorXd::Zero(scores.size());
  for_each_pair(targets, groups, [&](Eigen::Index hi, Eigen::Index lo) {
    const double rho = sigmoid(-(scores[hi] - scores[lo]));
    grad[hi] -= rho;
    grad[lo] += rho;
    if (hessian) {
      const double h = rho * (1.0 - rho);
      (*hessian)[hi] += h;
      (*hessian)[lo] += h;
    }
  });
  return grad;
}

TreeEnsemble train_ensemble(const std::vector<RankingInstance> &instances, Objective objective,
                            const EnsembleConfig &config) {
  check_config(config);
  if (instances.size() < 2) throw Error(ErrorKind::InvalidConfig, "need at least 2 instances");
  const Eigen::MatrixXd X = feature_matrix(instances);
  const Eigen::Index n = X.rows();
  Eigen::VectorXd targets(n), labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    targets[i] = instances[static_cast<std::size_t>(i)].target_return;
    labels[i] = instances[static_cast<std::size_t>(i)].label_up ? 1.0 : 0.0;
  }
  const std::vector<int> groups = event_groups(instances);

  TreeEnsemble ensemble;
  ensemble.objective = objective;
  ensemble.config = config;
  ensemble.dim = X.cols();

  if (objective == Objective::Logistic) {
    const double positives = labels.sum();
    if (positives == 0.0 || positives == static_cast<double>(n)) {
      throw Error(ErrorKind::SingleClass, "labels are all one class");
    }
  }
  if (objective == Objective::Pairwise) {
    bool any = false;
    for_each_pair(targets, groups, [&](Eigen::Index, Eigen::Index) { any = true; });
    if (!any) {
      throw Error(ErrorKind::NoPairs, "pairwise objective needs two instances with different "
                                      "returns on the same budget date");
    }
  }

  std::vector<std::size_t> all_rows(static_cast<std::size_t>(n));
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  if (config.mode == EnsembleMode::Bagged) {
    if (objective == Objective::Pairwise) {
      throw Error(ErrorKind::InvalidConfig, "bagged mode supports squared and logistic only");
    }
    // Plain regression trees on the raw target: leaf = mean target.
    const Eigen::VectorXd &y = objective == Objective::Logistic ? labels : targets;
    const Eigen::VectorXd grad = -y;
    const Eigen::VectorXd hess = Eigen::VectorXd::Ones(n);
    EnsembleConfig leaf_config = config;
    leaf_config.reg_lambda = 0.0;
    TreeBuilder builder(X, grad, hess, leaf_config);
    Rng rng(config.seed);
    for (int t = 0; t < config.num_trees; ++t) {
      std::vector<std::size_t> rows = all_rows;
      if (config.bootstrap) {
        for (auto &r : rows) r = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n)));
      }
      ensemble.trees.push_back(builder.build(std::move(rows)));
    }
    ensemble.shrinkage = 1.0 / static_cast<double>(config.num_trees);
    ensemble.base_score = 0.0;
    return ensemble;
  }

  ensemble.shrinkage = config.shrinkage;
  switch (objective) {
  case Objective::Squared: ensemble.base_score = targets.mean(); break;
  case Objective::Logistic: {
    const double p = labels.mean();
    ensemble.base_score = std::log(p / (1.0 - p));
    break;
  }
  case Objective::Pairwise: ensemble.base_score = 0.0; break;
  }

  Eigen::VectorXd margins = Eigen::VectorXd::Constant(n, ensemble.base_score);
  Eigen::VectorXd grad(n), hess(n);
  for (int t = 0; t < config.num_trees; ++t) {
    switch (objective) {
    case Objective::Squared:
      grad = margins - targets;
      hess.setOnes();
      break;
    case Objective::Logistic:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double p = sigmoid(margins[i]);
        grad[i] = p - labels[i];
        hess[i] = p * (1.0 - p);
      }
      break;
    case Objective::Pairwise: grad = pairwise_gradient(margins, targets, groups, &hess); break;
    }
    TreeBuilder builder(X, grad, hess, config);
    Tree tree = builder.build(all_rows);
    for (Eigen::Index i = 0; i < n; ++i) margins[i] += ensemble.shrinkage * tree.predict(X.row(i).transpose());
    ensemble.trees.push_back(std::move(tree));
  }
  return ensemble;
}

} // namespace sectorrank

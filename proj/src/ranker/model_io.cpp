#include <cmath>

#include "json.hpp"
#include "sectorrank/ranker.hpp"

namespace sectorrank {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::vector<double> to_std(const Eigen::VectorXd &v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double> &v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string_view objective_name(Objective o) {
  switch (o) {
  case Objective::Squared: return "squared";
  case Objective::Logistic: return "logistic";
  case Objective::Pairwise: return "pairwise";
  }
  return "";
}

Objective objective_from(const std::string &s) {
  if (s == "squared") return Objective::Squared;
  if (s == "logistic") return Objective::Logistic;
  if (s == "pairwise") return Objective::Pairwise;
  throw Error(ErrorKind::BadModel, "unknown objective '" + s + "'");
}

ojson tree_to_json(const Tree &tree) {
  ojson nodes = ojson::array();
  for (const auto &n : tree.nodes) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"value", n.value}});
    }
  }
  return nodes;
}

Tree tree_from_json(const json &j, Eigen::Index dim) {
  Tree tree;
  for (const auto &node : j) {
    TreeNode n;
    if (node.contains("leaf")) {
      n.value = node.at("leaf").get<double>();
    } else {
      n.feature = node.at("feature").get<int>();
      n.threshold = node.at("threshold").get<double>();
      n.left = node.at("left").get<int>();
      n.right = node.at("right").get<int>();
      n.value = node.at("value").get<double>();
    }
    tree.nodes.push_back(n);
  }
  const int count = static_cast<int>(tree.nodes.size());
  if (count == 0) throw Error(ErrorKind::BadModel, "empty tree");
  for (const auto &n : tree.nodes) {
    if (!std::isfinite(n.value)) throw Error(ErrorKind::BadModel, "non-finite leaf");
    if (n.is_leaf()) continue;
    if (n.feature >= dim || n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count) {
      throw Error(ErrorKind::BadModel, "tree node references out of range");
    }
  }
  return tree;
}

} // namespace

std::string model_to_json(const RankerModel &model) {
  ojson j;
  j["format_version"] = kFormatVersion;
  std::visit(
      [&](const auto &m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogisticModel>) {
          j["kind"] = "logistic";
          j["weights"] = to_std(m.weights);
          j["bias"] = m.bias;
          j["config"] = {{"learning_rate", m.config.learning_rate},
                         {"epochs", m.config.epochs},
                         {"l2", m.l2}};
        } else if constexpr (std::is_same_v<M, LinearModel>) {
          j["kind"] = "linear";
          j["weights"] = to_std(m.weights);
          j["bias"] = m.bias;
          j["config"] = {{"l2", m.l2}, {"ridge_floor", kRidgeFloor}};
        } else {
          j["kind"] = "ensemble";
          j["objective"] = objective_name(m.objective);
          j["dim"] = m.dim;
          j["base_score"] = m.base_score;
          j["shrinkage"] = m.shrinkage;
          const auto &c = m.config;
          j["config"] = {{"mode", c.mode == EnsembleMode::Boosted ? "boosted" : "bagged"},
                         {"num_trees", c.num_trees},
                         {"max_depth", c.max_depth},
                         {"shrinkage", c.shrinkage},
                         {"reg_lambda", c.reg_lambda},
                         {"min_child_weight", c.min_child_weight},
                         {"bootstrap", c.bootstrap},
                         {"seed", c.seed}};
          ojson trees = ojson::array();
          for (const auto &t : m.trees) trees.push_back(tree_to_json(t));
          j["trees"] = std::move(trees);
        }
      },
      model);
  return j.dump(1) + "\n";
}

RankerModel model_from_json(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::JsonSyntax, "model file is not JSON");
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw Error(ErrorKind::BadModel, "unsupported format_version");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "logistic") {
      LogisticModel m;
      m.weights = to_eigen(j.at("weights").get<std::vector<double>>());
      m.bias = j.at("bias").get<double>();
      const json &c = j.at("config");
      m.l2 = c.at("l2").get<double>();
      m.config = {c.at("learning_rate").get<double>(), c.at("epochs").get<int>(), m.l2};
      return m;
    }
    if (kind == "linear") {
      LinearModel m;
      m.weights = to_eigen(j.at("weights").get<std::vector<double>>());
      m.bias = j.at("bias").get<double>();
      m.l2 = j.at("config").at("l2").get<double>();
      return m;
    }
    if (kind == "ensemble") {
      TreeEnsemble m;
      m.objective = objective_from(j.at("objective").get<std::string>());
      m.dim = j.at("dim").get<Eigen::Index>();
      m.base_score = j.at("base_score").get<double>();
      m.shrinkage = j.at("shrinkage").get<double>();
      const json &c = j.at("config");
      m.config.mode = c.at("mode").get<std::string>() == "bagged" ? EnsembleMode::Bagged
                                                                  : EnsembleMode::Boosted;
      m.config.num_trees = c.at("num_trees").get<int>();
      m.config.max_depth = c.at("max_depth").get<int>();
      m.config.shrinkage = c.at("shrinkage").get<double>();
      m.config.reg_lambda = c.at("reg_lambda").get<double>();
      m.config.min_child_weight = c.at("min_child_weight").get<double>();
      m.config.bootstrap = c.at("bootstrap").get<bool>();
      m.config.seed = c.at("seed").get<std::uint64_t>();
      for (const auto &t : j.at("trees")) m.trees.push_back(tree_from_json(t, m.dim));
      return m;
    }
    throw Error(ErrorKind::BadModel, "unknown kind '" + kind + "'");
  } catch (const json::exception &e) {
    throw Error(ErrorKind::BadModel, e.what());
  }
}

} // namespace sectorrank

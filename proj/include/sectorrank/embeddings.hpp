#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sectorrank/corpus.hpp"
#include "sectorrank/error.hpp"

namespace sectorrank {

/// Fixed base vectors for segments (`id`) and sector names (`sector::<name>`).
class EmbeddingStore {
public:
  explicit EmbeddingStore(Eigen::Index dim = 0) : dim_(dim) {}

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return segments_.size() + sectors_.size(); }

  void add_segment(const std::string &id, Eigen::VectorXd v);
  void add_sector(const SectorId &sector, Eigen::VectorXd v);

  const std::map<std::string, Eigen::VectorXd> &segments() const { return segments_; }
  const std::map<SectorId, Eigen::VectorXd> &sectors() const { return sectors_; }

  /// Throws MissingVector.
  const Eigen::VectorXd &segment(const std::string &id) const;
  /// Throws MissingSectorVector.
  const Eigen::VectorXd &sector(const SectorId &sector) const;

private:
  void check(const std::string &id, const Eigen::VectorXd &v) const;

  Eigen::Index dim_;
  std::map<std::string, Eigen::VectorXd> segments_;
  std::map<SectorId, Eigen::VectorXd> sectors_;
};

inline constexpr std::string_view kSectorPrefix = "sector::";

/// EMBV1: header `EMBV1 <dim>`, rows `id<TAB>v1 v2 ... vD`.
EmbeddingStore parse_store(std::string_view text, const std::string &source = "embeddings");
EmbeddingStore load_store(const std::filesystem::path &path);
std::string to_embv1(const EmbeddingStore &store);

/// dot(a,b)/(|a||b|) clamped to [-1, 1]. Throws DimensionMismatch or ZeroNorm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA> &a,
                                 const Eigen::MatrixBase<DerivedB> &b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) throw Error(ErrorKind::ZeroNorm, "cosine of zero vector");
  return std::clamp<Scalar>(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
}

/// Linear map W plus one learnable prototype per sector (columns of
/// `prototypes`, in `sectors` order).
struct AdapterModel {
  Eigen::MatrixXd W;
  Eigen::MatrixXd prototypes; // dim x sectors
  std::vector<SectorId> sectors;
  double temperature = 0.07;
  std::uint64_t seed = 42;

  Eigen::Index dim() const { return W.rows(); }
};

/// Exact (bitwise for finite values) equality of every parameter.
bool operator==(const AdapterModel &a, const AdapterModel &b);

struct AdapterGradient {
  Eigen::MatrixXd W;
  Eigen::MatrixXd prototypes;
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 32;
  double l2 = 1e-3;
  std::uint64_t seed = 42;
};

/// One training example: a base segment vector and its gold sector columns.
struct LabeledVector {
  Eigen::VectorXd vector;
  std::vector<std::size_t> gold;
};

/// W = I, prototypes = sector-name vectors. Throws MissingSectorVector.
AdapterModel init_adapter(const EmbeddingStore &store, const SectorTaxonomy &taxonomy,
                          double temperature = 0.07, std::uint64_t seed = 42);

template <typename Derived>
Eigen::VectorXd apply_adapter(const AdapterModel &model, const Eigen::MatrixBase<Derived> &v) {
  if (v.size() != model.W.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "adapter dim " + std::to_string(model.W.cols()) + " vs vector " +
                    std::to_string(v.size()));
  }
  return model.W * v;
}

/// Mean over (segment, gold sector) pairs of the softmax cross-entropy of the
/// cosine logits cos(Wv, p_s)/temperature, plus l2 * ||W - I||_F^2.
double adapter_loss(const AdapterModel &model, const std::vector<LabeledVector> &batch,
                    double l2 = 0.0);
AdapterGradient adapter_grad(const AdapterModel &model, const std::vector<LabeledVector> &batch,
                             double l2 = 0.0);

/// Labeled segments of `corpus` as training examples; unlabeled ones are skipped.
std::vector<LabeledVector> make_batch(const AdapterModel &model, const Corpus &corpus,
                                      const EmbeddingStore &store);

/// Mini-batch gradient descent with a seeded shuffle. `epoch_losses`, when
/// given, receives the full-set loss before training followed by one entry
/// per epoch. Throws MissingVector, EmptyBatch, InvalidConfig, TrainingDiverged.
AdapterModel train_adapter(const AdapterModel &model, const Corpus &corpus,
                           const EmbeddingStore &store, const TrainConfig &config,
                           std::vector<double> *epoch_losses = nullptr);

std::string adapter_to_json(const AdapterModel &model);
AdapterModel adapter_from_json(std::string_view text);
void save_adapter(const AdapterModel &model, const std::filesystem::path &path);
AdapterModel load_adapter(const std::filesystem::path &path);

} // namespace sectorrank

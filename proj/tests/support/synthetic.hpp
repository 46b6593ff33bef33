#pragma once

// Synthetic corpora, stores and ranking instances for unit and acceptance
// tests, plus small filesystem helpers.

#include <Eigen/Dense>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "sectorrank/corpus.hpp"
#include "sectorrank/embeddings.hpp"
#include "sectorrank/io.hpp"
#include "sectorrank/random.hpp"
#include "sectorrank/ranker.hpp"

namespace synth {

using namespace sectorrank;

class TempDir {
public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sectorrank-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const { return path_ / name; }
  std::filesystem::path write(const std::string &name, const std::string &text) const {
    write_file_atomic(path_ / name, text);
    return path_ / name;
  }

private:
  std::filesystem::path path_;
};

inline SectorId sector_name(std::size_t k) {
  return SectorId("Sector " + std::string(k < 10 ? "0" : "") + std::to_string(k));
}

/// `k` sectors named "Sector 00".., each with one company "Ckk".
inline SectorTaxonomy taxonomy(std::size_t k) {
  SectorTaxonomy t;
  for (std::size_t i = 0; i < k; ++i) t.add(sector_name(i), "C" + std::to_string(i));
  return t;
}

inline Eigen::VectorXd gaussian(Rng &rng, Eigen::Index dim, double sigma = 1.0) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = sigma * rng.normal();
  return v;
}

/// Orthogonal matrix from the QR factorization of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(Rng &rng, Eigen::Index dim) {
  Eigen::MatrixXd g(dim, dim);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
}

struct ClassificationData {
  SectorTaxonomy taxonomy;
  Corpus corpus;
  EmbeddingStore store;
};

struct ClassificationSpec {
  std::size_t sectors = 3;
  Eigen::Index dim = 3;
  std::size_t segments = 90;
  double sigma = 0.1;
  bool rotate_segments = false; // segment vectors live in a rotated frame
  std::uint64_t seed = 1;
  std::uint64_t rotation_seed = 99;
  int first_year = 2010;
};

/// Single-label segments: segment i belongs to sector i % k and its vector is
/// the sector's axis direction e_k plus N(0, sigma^2) noise. Sector name
/// vectors are the axes themselves. Years cycle over ten consecutive years.
inline ClassificationData classification(const ClassificationSpec &spec) {
  Rng rng(spec.seed);
  ClassificationData d{taxonomy(spec.sectors), {}, EmbeddingStore(spec.dim)};
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(spec.dim, spec.dim);
  if (spec.rotate_segments) {
    Rng rot(spec.rotation_seed);
    R = random_rotation(rot, spec.dim);
  }
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < spec.segments; ++i) {
    const std::size_t k = i % spec.sectors;
    Segment s;
    s.id = "seg-" + std::to_string(1000 + i);
    s.year = spec.first_year + static_cast<int>(i % 10);
    s.date = Date(s.year, 2, 1);
    s.text = "excerpt " + std::to_string(i);
    s.sectors = {sector_name(k)};
    Eigen::VectorXd v = Eigen::VectorXd::Unit(spec.dim, static_cast<Eigen::Index>(k)) +
                        gaussian(rng, spec.dim, spec.sigma);
    d.store.add_segment(s.id, R * v);
    segs.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < spec.sectors; ++k) {
    d.store.add_sector(sector_name(k), Eigen::VectorXd::Unit(spec.dim, static_cast<Eigen::Index>(k)));
  }
  d.corpus = Corpus(std::move(segs));
  return d;
}

/// `events` dates x `sectors` instances whose coordinate 0 is the target
/// return and whose other coordinates are noise. Returns are distinct within
/// an event.
inline std::vector<RankingInstance> oracle_instances(std::size_t events, std::size_t sectors,
                                                     Eigen::Index dim, std::uint64_t seed,
                                                     int first_year = 2000) {
  Rng rng(seed);
  std::vector<RankingInstance> out;
  for (std::size_t e = 0; e < events; ++e) {
    const Date date(first_year + static_cast<int>(e), 2, 1);
    const auto order = rng.permutation(sectors);
    for (std::size_t k = 0; k < sectors; ++k) {
      RankingInstance inst;
      inst.budget_date = date;
      inst.sector = sector_name(k);
      inst.target_return = (static_cast<double>(order[k]) - static_cast<double>(sectors) / 2.0) / 100.0 +
                           0.001 * rng.uniform();
      inst.label_up = inst.target_return > 0.0;
      inst.feature = gaussian(rng, dim, 0.1);
      inst.feature[0] = inst.target_return;
      out.push_back(std::move(inst));
    }
  }
  return out;
}

} // namespace synth

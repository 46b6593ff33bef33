#include "sectorrank/embeddings.hpp"

#include <charconv>
#include <cmath>

#include "json.hpp"
#include "sectorrank/io.hpp"
#include "sectorrank/random.hpp"

namespace sectorrank {

using nlohmann::json;

void EmbeddingStore::check(const std::string &id, const Eigen::VectorXd &v) const {
  if (v.size() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, id + ": expected " + std::to_string(dim_) +
                                                  " values, got " + std::to_string(v.size()));
  }
  if (!v.allFinite()) throw Error(ErrorKind::NonFiniteValue, id);
  if (v.squaredNorm() == 0.0) throw Error(ErrorKind::ZeroNorm, id);
}

void EmbeddingStore::add_segment(const std::string &id, Eigen::VectorXd v) {
  check(id, v);
  if (!segments_.try_emplace(id, std::move(v)).second) throw Error(ErrorKind::DuplicateId, id);
}

void EmbeddingStore::add_sector(const SectorId &sector, Eigen::VectorXd v) {
  check(std::string(kSectorPrefix) + sector.name(), v);
  if (!sectors_.try_emplace(sector, std::move(v)).second) {
    throw Error(ErrorKind::DuplicateId, std::string(kSectorPrefix) + sector.name());
  }
}

const Eigen::VectorXd &EmbeddingStore::segment(const std::string &id) const {
  auto it = segments_.find(id);
  if (it == segments_.end()) throw Error(ErrorKind::MissingVector, id);
  return it->second;
}

const Eigen::VectorXd &EmbeddingStore::sector(const SectorId &sector) const {
  auto it = sectors_.find(sector);
  if (it == sectors_.end()) throw Error(ErrorKind::MissingSectorVector, sector.name());
  return it->second;
}

EmbeddingStore parse_store(std::string_view text, const std::string &source) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view &line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    return true;
  };

  std::string_view header;
  if (!next_line(header) || header.substr(0, 6) != "EMBV1 ") {
    throw Error(ErrorKind::BadHeader, source + ": expected 'EMBV1 <dim>'");
  }
  long dim = 0;
  auto dim_text = header.substr(6);
  auto [dptr, dec] = std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), dim);
  if (dec != std::errc() || dptr != dim_text.data() + dim_text.size() || dim < 1) {
    throw Error(ErrorKind::BadHeader, source + ": bad dimension '" + std::string(dim_text) + "'");
  }

  EmbeddingStore store(dim);
  std::vector<double> values;
  std::string_view line;
  while (next_line(line)) {
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(ErrorKind::MalformedRow, where + ": expected 'id<TAB>values'");
    }
    const std::string id(line.substr(0, tab));
    values.clear();
    std::string_view rest = line.substr(tab + 1);
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      std::string_view tok = rest.substr(0, sp);
      rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
      if (tok.empty()) continue;
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw Error(ErrorKind::MalformedRow, where + ": bad number '" + std::string(tok) + "'");
      }
      if (!std::isfinite(x)) throw Error(ErrorKind::NonFiniteValue, where + ": " + id);
      values.push_back(x);
    }
    if (static_cast<long>(values.size()) != dim) {
      throw Error(ErrorKind::DimensionMismatch, where + ": expected " + std::to_string(dim) +
                                                    " values, got " +
                                                    std::to_string(values.size()));
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
    try {
      if (id.starts_with(kSectorPrefix)) {
        store.add_sector(SectorId::canonical(id.substr(kSectorPrefix.size())), std::move(v));
      } else {
        store.add_segment(id, std::move(v));
      }
    } catch (const Error &e) {
      throw Error(e.kind(), where + ": " + e.what());
    }
  }
  return store;
}

EmbeddingStore load_store(const std::filesystem::path &path) {
  return parse_store(read_file(path), path.string());
}

std::string to_embv1(const EmbeddingStore &store) {
  std::string out = "EMBV1 " + std::to_string(store.dim()) + "\n";
  auto row = [&](const std::string &id, const Eigen::VectorXd &v) {
    out += id;
    out.push_back('\t');
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) out.push_back(' ');
      out += format_double(v[i]);
    }
    out.push_back('\n');
  };
  for (const auto &[id, v] : store.segments()) row(id, v);
  for (const auto &[sector, v] : store.sectors()) row(std::string(kSectorPrefix) + sector.name(), v);
  return out;
}

bool operator==(const AdapterModel &a, const AdapterModel &b) {
  return a.W.rows() == b.W.rows() && a.W.cols() == b.W.cols() &&
         a.prototypes.rows() == b.prototypes.rows() &&
         a.prototypes.cols() == b.prototypes.cols() && a.W == b.W &&
         a.prototypes == b.prototypes && a.sectors == b.sectors &&
         a.temperature == b.temperature && a.seed == b.seed;
}

AdapterModel init_adapter(const EmbeddingStore &store, const SectorTaxonomy &taxonomy,
                          double temperature, std::uint64_t seed) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::InvalidConfig, "temperature must be > 0");
  }
  AdapterModel model;
  model.W = Eigen::MatrixXd::Identity(store.dim(), store.dim());
  model.prototypes.resize(store.dim(), static_cast<Eigen::Index>(taxonomy.size()));
  model.sectors = taxonomy.sectors();
  for (std::size_t k = 0; k < taxonomy.size(); ++k) {
    model.prototypes.col(static_cast<Eigen::Index>(k)) = store.sector(taxonomy.sectors()[k]);
  }
  model.temperature = temperature;
  model.seed = seed;
  return model;
}

namespace {

struct Accumulated {
  double loss = 0.0;
  std::size_t pairs = 0;
};

// Forward (and optionally backward) pass. Gradients are summed, not averaged.
Accumulated accumulate(const AdapterModel &model, const std::vector<LabeledVector> &batch,
                       AdapterGradient *grad) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "adapter batch is empty");
  const Eigen::Index sectors = model.prototypes.cols();
  const double inv_t = 1.0 / model.temperature;

  const Eigen::VectorXd proto_norms = model.prototypes.colwise().norm().transpose();
  if ((proto_norms.array() == 0.0).any()) throw Error(ErrorKind::ZeroNorm, "sector prototype");
  const Eigen::MatrixXd unit_protos =
      model.prototypes * proto_norms.cwiseInverse().asDiagonal();

  Accumulated acc;
  for (const auto &example : batch) {
    if (example.gold.empty()) throw Error(ErrorKind::EmptyBatch, "example without gold sectors");
    const Eigen::VectorXd u = apply_adapter(model, example.vector);
    const double u_norm = u.norm();
    if (u_norm == 0.0) throw Error(ErrorKind::ZeroNorm, "adapted segment vector");
    const Eigen::VectorXd u_hat = u / u_norm;
    const Eigen::VectorXd cos = unit_protos.transpose() * u_hat;
    const Eigen::VectorXd logits = cos * inv_t;
    const double max_logit = logits.maxCoeff();
    const double lse = max_logit + std::log((logits.array() - max_logit).exp().sum());

    for (std::size_t g : example.gold) acc.loss += lse - logits[static_cast<Eigen::Index>(g)];
    acc.pairs += example.gold.size();
    if (!grad) continue;

    // d/dlogits of sum over gold of (lse - logit_g)
    Eigen::VectorXd d_logits =
        static_cast<double>(example.gold.size()) * (logits.array() - lse).exp().matrix();
    for (std::size_t g : example.gold) d_logits[static_cast<Eigen::Index>(g)] -= 1.0;
    const Eigen::VectorXd d_cos = d_logits * inv_t;

    const Eigen::VectorXd d_u = (unit_protos * d_cos - cos.dot(d_cos) * u_hat) / u_norm;
    grad->W.noalias() += d_u * example.vector.transpose();
    for (Eigen::Index k = 0; k < sectors; ++k) {
      grad->prototypes.col(k) +=
          d_cos[k] * (u_hat - cos[k] * unit_protos.col(k)) / proto_norms[k];
    }
  }
  return acc;
}

double regularizer(const AdapterModel &model, double l2) {
  if (l2 == 0.0) return 0.0;
  const auto identity = Eigen::MatrixXd::Identity(model.W.rows(), model.W.cols());
  return l2 * (model.W - identity).squaredNorm();
}

} // namespace

double adapter_loss(const AdapterModel &model, const std::vector<LabeledVector> &batch,
                    double l2) {
  const Accumulated acc = accumulate(model, batch, nullptr);
  return acc.loss / static_cast<double>(acc.pairs) + regularizer(model, l2);
}

AdapterGradient adapter_grad(const AdapterModel &model, const std::vector<LabeledVector> &batch,
                             double l2) {
  AdapterGradient grad{Eigen::MatrixXd::Zero(model.W.rows(), model.W.cols()),
                       Eigen::MatrixXd::Zero(model.prototypes.rows(), model.prototypes.cols())};
  const Accumulated acc = accumulate(model, batch, &grad);
  const double scale = 1.0 / static_cast<double>(acc.pairs);
  grad.W *= scale;
  grad.prototypes *= scale;
  if (l2 != 0.0) {
    grad.W += 2.0 * l2 * (model.W - Eigen::MatrixXd::Identity(model.W.rows(), model.W.cols()));
  }
  return grad;
}

std::vector<LabeledVector> make_batch(const AdapterModel &model, const Corpus &corpus,
                                      const EmbeddingStore &store) {
  std::map<SectorId, std::size_t> column;
  for (std::size_t k = 0; k < model.sectors.size(); ++k) column.emplace(model.sectors[k], k);

  std::vector<LabeledVector> batch;
  for (const auto &seg : corpus.segments()) {
    if (seg.sectors.empty()) continue;
    LabeledVector example{store.segment(seg.id), {}};
    for (const auto &sector : seg.sectors) {
      auto it = column.find(sector);
      if (it == column.end()) throw Error(ErrorKind::UnknownSector, sector.name());
      example.gold.push_back(it->second);
    }
    batch.push_back(std::move(example));
  }
  return batch;
}

AdapterModel train_adapter(const AdapterModel &model, const Corpus &corpus,
                           const EmbeddingStore &store, const TrainConfig &config,
                           std::vector<double> *epoch_losses) {
  if (!(config.learning_rate >= 0.0) || config.epochs < 1 || config.batch_size < 1 ||
      !(config.l2 >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "learning_rate >= 0, epochs >= 1, batch_size >= 1, "
                                          "l2 >= 0 required");
  }
  const std::vector<LabeledVector> examples = make_batch(model, corpus, store);
  if (examples.empty()) throw Error(ErrorKind::EmptyBatch, "no labeled training segments");

  AdapterModel current = model;
  const double initial = adapter_loss(current, examples, config.l2);
  if (epoch_losses) {
    epoch_losses->clear();
    epoch_losses->push_back(initial);
  }

  Rng rng(config.seed);
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<LabeledVector> batch;
  double last = initial;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = rng.permutation(examples.size());
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + batch_size);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);
      const AdapterGradient g = adapter_grad(current, batch, config.l2);
      current.W -= config.learning_rate * g.W;
      current.prototypes -= config.learning_rate * g.prototypes;
    }
    last = adapter_loss(current, examples, config.l2);
    if (!std::isfinite(last)) {
      throw Error(ErrorKind::TrainingDiverged, "non-finite loss at epoch " + std::to_string(epoch + 1));
    }
    if (epoch_losses) epoch_losses->push_back(last);
  }
  if (last > initial) {
    throw Error(ErrorKind::TrainingDiverged,
                "final loss " + format_double(last) + " exceeds initial " + format_double(initial));
  }
  return current;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd &m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json &rows, Eigen::Index expect_rows, Eigen::Index expect_cols) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows) {
    throw Error(ErrorKind::BadModel, "matrix row count");
  }
  Eigen::MatrixXd m(expect_rows, expect_cols);
  for (Eigen::Index r = 0; r < expect_rows; ++r) {
    const json &row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols) {
      throw Error(ErrorKind::BadModel, "matrix column count");
    }
    for (Eigen::Index c = 0; c < expect_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  if (!m.allFinite()) throw Error(ErrorKind::BadModel, "non-finite parameter");
  return m;
}

} // namespace

std::string adapter_to_json(const AdapterModel &model) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["kind"] = "adapter";
  j["dim"] = model.dim();
  j["temperature"] = model.temperature;
  j["seed"] = model.seed;
  j["W"] = matrix_to_json(model.W);
  nlohmann::ordered_json protos = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < model.sectors.size(); ++k) {
    const auto col = model.prototypes.col(static_cast<Eigen::Index>(k));
    protos.push_back({{"sector", model.sectors[k].name()},
                      {"vector", std::vector<double>(col.data(), col.data() + col.size())}});
  }
  j["prototypes"] = std::move(protos);
  return j.dump(1) + "\n";
}

AdapterModel adapter_from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::JsonSyntax, "adapter file is not JSON");
  try {
    if (j.at("kind") != "adapter" || j.at("format_version") != 1) {
      throw Error(ErrorKind::BadModel, "not a version-1 adapter");
    }
    AdapterModel model;
    const Eigen::Index dim = j.at("dim").get<Eigen::Index>();
    model.temperature = j.at("temperature").get<double>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.W = matrix_from_json(j.at("W"), dim, dim);
    const json &protos = j.at("prototypes");
    model.prototypes.resize(dim, static_cast<Eigen::Index>(protos.size()));
    for (std::size_t k = 0; k < protos.size(); ++k) {
      model.sectors.emplace_back(protos[k].at("sector").get<std::string>());
      auto v = protos[k].at("vector").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(v.size()) != dim) throw Error(ErrorKind::BadModel, "prototype dim");
      model.prototypes.col(static_cast<Eigen::Index>(k)) = Eigen::Map<Eigen::VectorXd>(v.data(), dim);
    }
    if (!model.prototypes.allFinite() || !(model.temperature > 0.0)) {
      throw Error(ErrorKind::BadModel, "invalid adapter parameters");
    }
    return model;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::BadModel, e.what());
  }
}

void save_adapter(const AdapterModel &model, const std::filesystem::path &path) {
  write_file_atomic(path, adapter_to_json(model));
}

AdapterModel load_adapter(const std::filesystem::path &path) {
  return adapter_from_json(read_file(path));
}

} // namespace sectorrank

// sectorrank: command-line pipeline over taxonomy, segments, embeddings and
// prices files.
//
// Exit codes: 0 success, 1 domain/validation failure, 2 I/O or config
// failure, 3 remote-service failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sectorrank/classifier.hpp"
#include "sectorrank/corpus.hpp"
#include "sectorrank/csv.hpp"
#include "sectorrank/embeddings.hpp"
#include "sectorrank/io.hpp"
#include "sectorrank/llm_client.hpp"
#include "sectorrank/market.hpp"
#include "sectorrank/ranker.hpp"

namespace fs = std::filesystem;
using namespace sectorrank;

namespace {

enum Exit { kOk = 0, kDomain = 1, kIo = 2, kRemote = 3 };

struct Options {
  std::string taxonomy, segments, embeddings, prices, out = "out";
  double tau = 0.5;
  int train_end = 2019;
  int val_end = 2023;
  std::uint64_t seed = 42;
  std::string model_kind;

  // classify
  std::string adapter;
  bool base = false;
  bool full = false;
  std::string split = "all";
  std::string name;

  // train-adapter
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 32;
  double l2 = 1e-3;
  double temperature = 0.07;

  // rankers
  std::string returns;
  std::string model;
  std::string eval_split = "test";

  // llm-rank
  std::string base_url;
  std::string llm_model;
  int jobs = 4;
  double timeout = 60.0;
  int retries = 3;

  // report
  std::vector<std::string> inputs;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Io:
  case ErrorKind::InvalidConfig: return kIo;
  case ErrorKind::Transport:
  case ErrorKind::HttpStatus:
  case ErrorKind::AuthMissing:
  case ErrorKind::Timeout: return kRemote;
  default: return kDomain;
  }
}

const std::string &require(const std::string &value, const char *flag) {
  if (value.empty()) throw Error(ErrorKind::InvalidConfig, std::string(flag) + " is required");
  return value;
}

void write_out(const Options &o, const std::string &file, const std::string &contents) {
  write_file_atomic(fs::path(o.out) / file, contents);
}

SplitSpec split_spec(const Options &o) { return {o.train_end, o.val_end}; }

Corpus select_split(const Corpus &corpus, const Options &o, const std::string &which) {
  if (which == "all") return corpus;
  SplitResult parts = temporal_split(corpus, split_spec(o));
  if (which == "train") return parts.train;
  if (which == "val") return parts.val;
  if (which == "test") return parts.test;
  throw Error(ErrorKind::InvalidConfig, "split must be all|train|val|test, got '" + which + "'");
}

std::string split_of_year(int year, const SplitSpec &spec) {
  if (year <= spec.train_end_year) return "train";
  if (year <= spec.val_end_year) return "val";
  return "test";
}

// ---------------------------------------------------------------------------

int cmd_validate(const Options &o) {
  std::vector<std::pair<std::string, std::string>> files;
  if (!o.taxonomy.empty()) files.emplace_back("taxonomy", o.taxonomy);
  if (!o.segments.empty()) files.emplace_back("segments", o.segments);
  if (!o.embeddings.empty()) files.emplace_back("embeddings", o.embeddings);
  if (!o.prices.empty()) files.emplace_back("prices", o.prices);
  if (files.empty()) throw Error(ErrorKind::InvalidConfig, "no input files given");
  bool missing = false;
  for (const auto &[label, path] : files) {
    if (!fs::is_regular_file(path)) {
      std::cout << label << " " << path << ": cannot read file\n";
      missing = true;
    }
  }
  if (missing) return kIo;
  if (!o.segments.empty() && o.taxonomy.empty()) {
    throw Error(ErrorKind::InvalidConfig, "--segments validation needs --taxonomy");
  }

  std::map<std::string, std::vector<std::string>> problems;
  std::optional<SectorTaxonomy> taxonomy;
  std::optional<Corpus> corpus;
  std::optional<EmbeddingStore> store;

  auto guarded = [&](const std::string &label, auto &&fn) {
    try {
      fn();
    } catch (const Error &e) {
      if (e.kind() == ErrorKind::Io) throw;
      problems[label].emplace_back(e.what());
    }
  };

  if (!o.taxonomy.empty()) guarded("taxonomy", [&] { taxonomy = load_taxonomy(o.taxonomy); });
  if (!o.segments.empty()) {
    if (taxonomy) {
      auto found = validate_segments(read_file(o.segments), *taxonomy, false, o.segments);
      auto &list = problems["segments"];
      list.insert(list.end(), found.begin(), found.end());
      if (found.empty()) guarded("segments", [&] { corpus = load_segments(o.segments, *taxonomy, false); });
    } else {
      problems["segments"].emplace_back("not checked: taxonomy failed to load");
    }
  }
  if (!o.embeddings.empty()) guarded("embeddings", [&] { store = load_store(o.embeddings); });
  if (!o.prices.empty()) guarded("prices", [&] { load_prices(o.prices); });

  if (store && corpus) {
    for (const auto &seg : corpus->segments()) {
      if (!store->segments().contains(seg.id)) {
        problems["embeddings"].push_back("MissingVector: segment '" + seg.id + "'");
      }
    }
  }
  if (store && taxonomy) {
    for (const auto &sector : taxonomy->sectors()) {
      if (!store->sectors().contains(sector)) {
        problems["embeddings"].push_back("MissingSectorVector: '" + sector.name() + "'");
      }
    }
  }

  bool clean = true;
  for (const auto &[label, path] : files) {
    const auto &list = problems[label];
    if (list.empty()) {
      std::cout << label << " " << path << ": OK\n";
      continue;
    }
    clean = false;
    std::cout << label << " " << path << ": " << list.size() << " problem(s)\n";
    for (const auto &p : list) std::cout << "  - " << p << "\n";
  }
  return clean ? kOk : kDomain;
}

int cmd_split(const Options &o) {
  const SectorTaxonomy taxonomy = load_taxonomy(require(o.taxonomy, "--taxonomy"));
  const Corpus corpus = load_segments(require(o.segments, "--segments"), taxonomy, false);
  const SplitResult parts = temporal_split(corpus, split_spec(o));
  write_out(o, "train.jsonl", to_jsonl(parts.train));
  write_out(o, "val.jsonl", to_jsonl(parts.val));
  write_out(o, "test.jsonl", to_jsonl(parts.test));
  std::cout << "train " << parts.train.size() << "  val " << parts.val.size() << "  test "
            << parts.test.size() << "\n";
  for (const auto &w : parts.warnings) std::cerr << "warning: " << w << "\n";
  return kOk;
}

AdapterModel classifier_model(const Options &o, const EmbeddingStore &store,
                              const SectorTaxonomy &taxonomy) {
  if (!o.adapter.empty() && o.base) {
    throw Error(ErrorKind::InvalidConfig, "--adapter and --base are mutually exclusive");
  }
  if (o.adapter.empty()) return init_adapter(store, taxonomy, o.temperature, o.seed);
  AdapterModel model = load_adapter(o.adapter);
  if (model.sectors != taxonomy.sectors()) {
    throw Error(ErrorKind::InvalidConfig, "adapter sectors do not match the taxonomy");
  }
  if (model.dim() != store.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "adapter dim vs embeddings dim");
  }
  return model;
}

int cmd_classify(const Options &o) {
  const SectorTaxonomy taxonomy = load_taxonomy(require(o.taxonomy, "--taxonomy"));
  const Corpus all = load_segments(require(o.segments, "--segments"), taxonomy, false);
  const EmbeddingStore store = load_store(require(o.embeddings, "--embeddings"));
  const AdapterModel model = classifier_model(o, store, taxonomy);
  const Corpus corpus = select_split(all, o, o.split);

  std::vector<SectorScores> scores;
  std::vector<PredictionSet> predictions;
  std::size_t labeled = 0;
  for (const auto &seg : corpus.segments()) {
    scores.push_back(score_sectors(seg.id, store.segment(seg.id), model));
    predictions.push_back(predict(scores.back(), o.tau));
    if (!seg.sectors.empty()) ++labeled;
  }
  write_out(o, "predictions.csv", predictions_csv(scores, o.tau, o.full));
  std::cout << "classified " << corpus.size() << " segments at tau=" << format_double(o.tau) << "\n";
  if (labeled == 0) return kOk;

  const F1Report report = evaluate_f1(predictions, corpus, taxonomy);
  const std::string name =
      !o.name.empty() ? o.name : (o.adapter.empty() ? "STS (base)" : "STS (fine-tune)");
  std::string metrics = "name,split,tau,macro_f1,micro_f1,weighted_f1\n";
  metrics += csv::join({name, o.split, format_double(o.tau), format_double(report.macro),
                        format_double(report.micro), format_double(report.weighted)}) +
             "\n";
  write_out(o, "classify_metrics.csv", metrics);

  std::string per_sector = "sector,precision,recall,f1,support\n";
  for (std::size_t k = 0; k < report.sectors.size(); ++k) {
    const SectorF1 &s = report.per_sector[k];
    per_sector += csv::join({report.sectors[k].name(), format_double(s.precision),
                             format_double(s.recall), format_double(s.f1),
                             std::to_string(s.counts.support())}) +
                  "\n";
  }
  write_out(o, "classify_per_sector.csv", per_sector);
  std::printf("F1 (M) %.4f  F1 (m) %.4f  F1 (w) %.4f  over %zu labeled segments\n", report.macro,
              report.micro, report.weighted, labeled);
  return kOk;
}

int cmd_train_adapter(const Options &o) {
  const SectorTaxonomy taxonomy = load_taxonomy(require(o.taxonomy, "--taxonomy"));
  const Corpus all = load_segments(require(o.segments, "--segments"), taxonomy, false);
  const EmbeddingStore store = load_store(require(o.embeddings, "--embeddings"));
  const Corpus train = select_split(all, o, "train");

  const AdapterModel initial = init_adapter(store, taxonomy, o.temperature, o.seed);
  TrainConfig config{o.learning_rate, o.epochs, o.batch_size, o.l2, o.seed};
  std::vector<double> losses;
  const AdapterModel trained = train_adapter(initial, train, store, config, &losses);
  save_adapter(trained, fs::path(o.out) / "adapter.json");

  std::string history = "epoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    history += std::to_string(e) + "," + format_double(losses[e]) + "\n";
  }
  write_out(o, "adapter_loss.csv", history);
  std::printf("trained on %zu segments: loss %.6f -> %.6f\n", train.size(), losses.front(),
              losses.back());
  return kOk;
}

std::vector<SectorReturn> compute_returns(const SectorTaxonomy &taxonomy, const PriceTable &prices,
                                          const std::vector<Date> &events,
                                          std::vector<std::pair<Date, SectorId>> *skipped) {
  std::vector<SectorReturn> out;
  for (const Date &d : events) {
    for (const auto &sector : taxonomy.sectors()) {
      try {
        out.push_back(sector_return(taxonomy, prices, sector, d));
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::NoUsableCompanies) throw;
        if (skipped) skipped->emplace_back(d, sector);
      }
    }
  }
  return out;
}

int cmd_returns(const Options &o) {
  const SectorTaxonomy taxonomy = load_taxonomy(require(o.taxonomy, "--taxonomy"));
  const Corpus corpus = load_segments(require(o.segments, "--segments"), taxonomy, false);
  const PriceTable prices = load_prices(require(o.prices, "--prices"));
  std::vector<std::pair<Date, SectorId>> skipped;
  const auto returns = compute_returns(taxonomy, prices, corpus.events(), &skipped);
  write_out(o, "returns.csv", returns_csv(returns));
  std::string skipped_csv = "date,sector,reason\n";
  for (const auto &[d, s] : skipped) {
    skipped_csv += csv::join({d.iso(), s.name(), "NoUsableCompanies"}) + "\n";
  }
  write_out(o, "returns_skipped.csv", skipped_csv);
  std::cout << returns.size() << " sector returns over " << corpus.events().size()
            << " budget events; " << skipped.size() << " (event, sector) pairs without data\n";
  return returns.empty() ? kDomain : kOk;
}

std::optional<std::vector<SectorReturn>> maybe_returns(const Options &o,
                                                       const SectorTaxonomy &taxonomy,
                                                       const Corpus &corpus) {
  if (!o.returns.empty()) return parse_returns(read_file(o.returns), taxonomy, o.returns);
  if (!o.prices.empty()) {
    return compute_returns(taxonomy, load_prices(o.prices), corpus.events(), nullptr);
  }
  return std::nullopt;
}

struct RankingData {
  SectorTaxonomy taxonomy;
  Corpus corpus;
  std::vector<RankingInstance> instances;
};

RankingData ranking_data(const Options &o) {
  RankingData data;
  data.taxonomy = load_taxonomy(require(o.taxonomy, "--taxonomy"));
  data.corpus = load_segments(require(o.segments, "--segments"), data.taxonomy, false);
  const EmbeddingStore store = load_store(require(o.embeddings, "--embeddings"));
  auto returns = maybe_returns(o, data.taxonomy, data.corpus);
  if (!returns) throw Error(ErrorKind::InvalidConfig, "--returns or --prices is required");
  std::optional<AdapterModel> adapter;
  if (!o.adapter.empty()) adapter = classifier_model(o, store, data.taxonomy);
  data.instances = make_instances(data.corpus, store, *returns, adapter ? &*adapter : nullptr);
  return data;
}

std::vector<RankingInstance> instances_in(const std::vector<RankingInstance> &all,
                                          const Options &o, const std::string &which) {
  std::vector<RankingInstance> out;
  for (const auto &inst : all) {
    if (which == "all" || split_of_year(inst.budget_date.year(), split_spec(o)) == which) {
      out.push_back(inst);
    }
  }
  return out;
}

RankerModel train_on_split(const Options &o, const std::vector<RankingInstance> &all) {
  const ModelKind kind = parse_model_kind(require(o.model_kind, "--model-kind"));
  const auto train = instances_in(all, o, "train");
  if (train.empty()) throw Error(ErrorKind::NoSegments, "no training instances");
  try {
    return train_ranker(kind, train, o.seed);
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::NoPairs) {
      std::cerr << "gbt-ltr learns from pairs of sectors within one budget event; every "
                   "training event here has fewer than two sectors with distinct returns.\n";
    }
    throw;
  }
}

int cmd_train_ranker(const Options &o) {
  const RankingData data = ranking_data(o);
  const RankerModel model = train_on_split(o, data.instances);
  write_out(o, "model.json", model_to_json(model));
  std::cout << "trained " << o.model_kind << " on " << instances_in(data.instances, o, "train").size()
            << " instances\n";
  return kOk;
}

std::pair<std::string, std::string> model_labels(const std::string &kind) {
  if (kind == "logistic") return {"Logistic", "Emd + Classifier"};
  if (kind == "linear") return {"Linear", "Emd + Regressor"};
  if (kind == "gbt-cls") return {"Gradient Boosting", "Emd + Classifier"};
  if (kind == "gbt-reg") return {"Gradient Boosting", "Emd + Regressor"};
  if (kind == "gbt-ltr") return {"Gradient Boosting", "Learning to Rank"};
  if (kind == "forest-cls") return {"Random Forest", "Emd + Classifier"};
  if (kind == "forest-reg") return {"Random Forest", "Emd + Regressor"};
  return {kind, ""};
}

int cmd_rank(const Options &o) {
  const RankingData data = ranking_data(o);
  RankerModel model;
  std::string kind = o.model_kind;
  if (!o.model.empty()) {
    model = model_from_json(read_file(o.model));
  } else {
    model = train_on_split(o, data.instances);
  }
  if (kind.empty()) kind = fs::path(o.model).stem().string();

  const auto eval_instances = instances_in(data.instances, o, o.eval_split);
  if (eval_instances.empty()) {
    throw Error(ErrorKind::NoSegments, "no instances in split '" + o.eval_split + "'");
  }
  const RankingEvaluation eval = evaluate_ranker(model, eval_instances);
  write_out(o, "rankings.csv", rankings_csv(eval.rankings));
  write_out(o, "ndcg.csv", ndcg_csv(eval.per_event, eval.mean_ndcg));
  const auto [label, type] = model_labels(kind);
  write_out(o, "rank_metrics.csv",
            "model,type,split,events,mean_ndcg\n" +
                csv::join({label, type, o.eval_split, std::to_string(eval.per_event.size()),
                           format_double(eval.mean_ndcg)}) +
                "\n");
  for (const auto &e : eval.per_event) {
    std::printf("%s  NDCG %.4f\n", e.budget_date.iso().c_str(), e.ndcg);
  }
  std::printf("mean NDCG %.4f over %zu events\n", eval.mean_ndcg, eval.per_event.size());
  return kOk;
}

int cmd_llm_rank(const Options &o) {
  const SectorTaxonomy taxonomy = load_taxonomy(require(o.taxonomy, "--taxonomy"));
  const Corpus all = load_segments(require(o.segments, "--segments"), taxonomy, false);
  const Corpus corpus = select_split(all, o, o.eval_split);

  llm::EndpointConfig config =
      llm::EndpointConfig::from_environment(require(o.base_url, "--base-url"),
                                            require(o.llm_model, "--llm-model"));
  config.timeout_seconds = o.timeout;
  config.max_retries = o.retries;
  if (config.api_key.empty()) {
    throw Error(ErrorKind::AuthMissing, std::string(llm::kApiKeyEnv) + " is not set");
  }

  // one query per (event, gold sector), excerpts joined in corpus order
  std::vector<llm::PerfQuery> queries;
  std::vector<Date> query_dates;
  for (const Date &d : corpus.events()) {
    std::map<std::size_t, std::string> excerpts;
    for (const auto &seg : corpus.segments()) {
      if (seg.date != d) continue;
      for (const auto &s : seg.sectors) {
        auto &text = excerpts[*taxonomy.index_of(s)];
        if (!text.empty()) text += "\n\n";
        text += seg.text;
      }
    }
    for (auto &[idx, text] : excerpts) {
      const SectorId &sector = taxonomy.sectors()[idx];
      queries.push_back({d.iso() + "|" + sector.name(), sector, std::move(text)});
      query_dates.push_back(d);
    }
  }
  const auto outcomes = llm::estimate_performance(config, queries, o.jobs);

  std::map<Date, std::map<SectorId, double>> estimates;
  std::string failures = "date,sector,error,message\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto &out = outcomes[i];
    if (out.value) {
      estimates[query_dates[i]][out.sector] = *out.value;
    } else {
      ++failed;
      failures += csv::join({query_dates[i].iso(), out.sector.name(),
                             std::string(to_string(*out.error)), out.message}) +
                  "\n";
    }
  }
  std::vector<RankedList> rankings;
  for (const auto &[d, scores] : estimates) rankings.push_back(rank_event(scores, d));
  write_out(o, "llm_rankings.csv", rankings_csv(rankings));
  write_out(o, "llm_failures.csv", failures);

  if (auto returns = maybe_returns(o, taxonomy, corpus)) {
    std::map<Date, std::map<SectorId, double>> realized;
    for (const auto &r : *returns) realized[r.budget_date][r.sector] = r.value;
    std::vector<EventNdcg> per_event;
    double sum = 0.0;
    for (const auto &list : rankings) {
      std::map<SectorId, double> scored;
      std::vector<SectorReturn> truth;
      for (const auto &[sector, value] : list.ordered) {
        auto it = realized[list.budget_date].find(sector);
        if (it == realized[list.budget_date].end()) continue;
        scored[sector] = value;
        truth.push_back({sector, list.budget_date, it->second, 1, 0});
      }
      if (truth.empty()) continue;
      const double v = ndcg(rank_event(scored, list.budget_date), ground_truth_ranking(truth));
      per_event.push_back({list.budget_date, v});
      sum += v;
    }
    const double mean = per_event.empty() ? 0.0 : sum / static_cast<double>(per_event.size());
    write_out(o, "llm_ndcg.csv", ndcg_csv(per_event, mean));
    write_out(o, "llm_rank_metrics.csv",
              "model,type,split,events,mean_ndcg\n" +
                  csv::join({config.model_name, "Zero Shot", o.eval_split,
                             std::to_string(per_event.size()), format_double(mean)}) +
                  "\n");
    std::printf("mean NDCG %.4f over %zu events\n", mean, per_event.size());
  }
  std::cout << outcomes.size() - failed << " estimates, " << failed << " failed\n";
  if (failed > 0) {
    std::cerr << "failed pairs are listed in llm_failures.csv\n";
    return kRemote;
  }
  return kOk;
}

int cmd_report(const Options &o) {
  std::vector<std::string> dirs = o.inputs;
  if (dirs.empty()) dirs.push_back(o.out);

  std::vector<std::vector<std::string>> classify_rows, rank_rows;
  auto collect = [](const fs::path &file, std::vector<std::vector<std::string>> &rows) {
    if (!fs::is_regular_file(file)) return;
    auto parsed = csv::parse(read_file(file));
    for (std::size_t i = 1; i < parsed.size(); ++i) rows.push_back(parsed[i].fields);
  };
  for (const auto &dir : dirs) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a directory: " + dir);
    collect(fs::path(dir) / "classify_metrics.csv", classify_rows);
    collect(fs::path(dir) / "rank_metrics.csv", rank_rows);
    collect(fs::path(dir) / "llm_rank_metrics.csv", rank_rows);
  }

  auto fixed = [](const std::string &v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", std::stod(v));
    return std::string(buf);
  };
  std::string md = "# Results\n\n## Multi-label sector classification\n\n";
  md += "| | F1 (M) | F1 (m) | F1 (w) |\n|---|---:|---:|---:|\n";
  for (const auto &r : classify_rows) {
    if (r.size() < 6) continue;
    md += "| " + r[0] + " (" + r[1] + ", tau " + r[2] + ") | " + fixed(r[3]) + " | " + fixed(r[4]) +
          " | " + fixed(r[5]) + " |\n";
  }
  md += "\n## Sector ranking\n\n| Model | Type | Split | Events | NDCG |\n|---|---|---|---:|---:|\n";
  for (const auto &r : rank_rows) {
    if (r.size() < 5) continue;
    md += "| " + r[0] + " | " + r[1] + " | " + r[2] + " | " + r[3] + " | " + fixed(r[4]) + " |\n";
  }
  write_out(o, "report.md", md);
  std::cout << md;
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Budget-excerpt sector identification and post-announcement sector ranking"};
  app.require_subcommand(1);
  Options o;

  app.add_option("--taxonomy", o.taxonomy, "taxonomy.csv (sector,company)");
  app.add_option("--segments", o.segments, "segments.jsonl");
  app.add_option("--embeddings", o.embeddings, "EMBV1 embeddings file");
  app.add_option("--prices", o.prices, "prices.csv (company,date,open)");
  app.add_option("--tau", o.tau, "similarity threshold")->capture_default_str();
  app.add_option("--train-end", o.train_end, "last training year (inclusive)")->capture_default_str();
  app.add_option("--val-end", o.val_end, "last validation year (inclusive)")->capture_default_str();
  app.add_option("--seed", o.seed, "seed for all randomness")->capture_default_str();
  app.add_option("--model-kind", o.model_kind, "ranker family")
      ->check(CLI::IsMember(
          {"logistic", "linear", "gbt-cls", "gbt-reg", "gbt-ltr", "forest-cls", "forest-reg"}));
  app.add_option("--out", o.out, "output directory")->capture_default_str();

  auto *validate = app.add_subcommand("validate", "check input files");
  auto *split = app.add_subcommand("split", "write train/val/test segment files");
  auto *classify = app.add_subcommand("classify", "score and threshold sectors per segment");
  classify->add_option("--adapter", o.adapter, "trained adapter JSON");
  classify->add_flag("--base", o.base, "use base embeddings (identity adapter)");
  classify->add_flag("--full", o.full, "emit every sector row, not only predicted ones");
  classify->add_option("--split", o.split, "all|train|val|test")->capture_default_str();
  classify->add_option("--name", o.name, "row label in classify_metrics.csv");

  auto *train_adapter_cmd = app.add_subcommand("train-adapter", "fit the embedding adapter on the train split");
  train_adapter_cmd->add_option("--lr", o.learning_rate)->capture_default_str();
  train_adapter_cmd->add_option("--epochs", o.epochs)->capture_default_str();
  train_adapter_cmd->add_option("--batch-size", o.batch_size)->capture_default_str();
  train_adapter_cmd->add_option("--l2", o.l2)->capture_default_str();
  train_adapter_cmd->add_option("--temperature", o.temperature)->capture_default_str();

  auto *returns = app.add_subcommand("returns", "compute sector returns per budget event");

  auto *train_ranker = app.add_subcommand("train-ranker", "fit a ranker on the train split");
  auto *rank = app.add_subcommand("rank", "rank sectors per event and report NDCG");
  for (auto *cmd : {train_ranker, rank}) {
    cmd->add_option("--returns", o.returns, "returns.csv from the returns subcommand");
    cmd->add_option("--adapter", o.adapter, "adapter applied to segment vectors before averaging");
  }
  rank->add_option("--model", o.model, "apply a saved model instead of training");
  rank->add_option("--eval-split", o.eval_split, "train|val|test|all")->capture_default_str();

  auto *llm_rank = app.add_subcommand("llm-rank", "zero-shot ranking through a chat-completion endpoint");
  llm_rank->add_option("--base-url", o.base_url, "endpoint base URL (…/v1)");
  llm_rank->add_option("--llm-model", o.llm_model, "model name sent to the endpoint");
  llm_rank->add_option("--jobs", o.jobs, "max requests in flight")->capture_default_str();
  llm_rank->add_option("--timeout", o.timeout, "per-request timeout in seconds")->capture_default_str();
  llm_rank->add_option("--retries", o.retries)->capture_default_str();
  llm_rank->add_option("--returns", o.returns, "returns.csv for NDCG");
  llm_rank->add_option("--eval-split", o.eval_split, "train|val|test|all")->capture_default_str();

  auto *report = app.add_subcommand("report", "summarize metrics CSVs as markdown");
  report->add_option("--in", o.inputs, "directories holding metrics CSVs (default: --out)");

  for (auto *sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kIo;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*split) return cmd_split(o);
    if (*classify) return cmd_classify(o);
    if (*train_adapter_cmd) return cmd_train_adapter(o);
    if (*returns) return cmd_returns(o);
    if (*train_ranker) return cmd_train_ranker(o);
    if (*rank) return cmd_rank(o);
    if (*llm_rank) return cmd_llm_rank(o);
    if (*report) return cmd_report(o);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kIo;
}

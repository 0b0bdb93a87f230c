#include "evrel/trainer.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

namespace evrel {

using nlohmann::json;

FeatureVector feature_delta(const RelationGraph& gold_g, const RelationGraph& system_g,
                            const Document& doc, const Clusters& clusters,
                            const FeatureConfig& config) {
  InferredGraph gold_inf = inferred_graph(gold_g, clusters);
  FeatureVector delta;
  for (const Arc& a : gold_g.arcs) delta += arc_features(doc, a, gold_g.task, config);
  for (const Arc& a : system_g.arcs) {
    // an arc shared with the gold graph cancels; an absent-but-inferable arc
    // is removed from the system side entirely
    if (!gold_g.arcs.count(a) && a.label != ArcLabel::Root && inferable(a, gold_inf, clusters))
      continue;
    delta -= arc_features(doc, a, system_g.task, config);
  }
  return delta;
}

StepDiag pa_step(WeightVector& w, const Document& doc, Task task, const FeatureConfig& config,
                 double cap) {
  StepDiag diag;
  w.advance();
  Clusters clusters = task == Task::Sequencing ? gold_clusters(doc) : Clusters(doc.n_mentions());
  RelationGraph gold = gold_graph(doc, task);
  RelationGraph system = decode(doc, w, task, clusters, config);
  if (matches(system, gold, clusters)) {
    diag.matched = true;
    return diag;
  }
  RelationGraph easiest = decode_gold(doc, w, task, config);
  FeatureVector delta = feature_delta(easiest, system, doc, clusters, config);
  diag.loss = loss(easiest, system, clusters);
  diag.delta_norm_sq = delta.norm_sq();
  if (diag.delta_norm_sq == 0.0) {
    diag.zero_delta_anomaly = true;
    return diag;
  }
  diag.tau = std::min(cap, diag.loss / diag.delta_norm_sq);
  double before = w.dot(delta);
  w.apply(delta, diag.tau);
  double after = w.dot(delta);
  diag.gain_error = std::abs((after - before) - diag.tau * diag.delta_norm_sq);
  diag.updated = true;
  return diag;
}

TrainResult train(const std::vector<Document>& corpus, Task task, const TrainConfig& config,
                  const FeatureConfig& features) {
  if (corpus.empty()) throw TrainError("training corpus is empty");
  for (const Document& doc : corpus)
    if (!doc.gold)
      throw TrainError("training document " + doc.doc_id + " has no gold annotation");

  TrainResult result;
  result.model.task = task;
  result.model.config = config;
  result.model.features = features;
  WeightVector& w = result.model.weights;

  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(config.seed);

  for (int epoch = 1; epoch <= config.iterations; ++epoch) {
    if (config.shuffle) {
      for (size_t i = order.size(); i > 1; --i) {
        size_t k = static_cast<size_t>(rng() % i);
        std::swap(order[i - 1], order[k]);
      }
    }
    EpochLog log;
    log.epoch = epoch;
    int matched = 0;
    for (size_t idx : order) {
      StepDiag d = pa_step(w, corpus[idx], task, features, config.cap);
      if (d.matched) ++matched;
      if (d.updated) ++log.updates;
      if (d.zero_delta_anomaly) ++log.anomalies;
      log.total_loss += d.loss;
      log.max_gain_error = std::max(log.max_gain_error, d.gain_error);
    }
    log.match_rate = static_cast<double>(matched) / static_cast<double>(corpus.size());
    result.log.push_back(log);
  }
  if (config.averaging) result.model.averaged = w.averaged();
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

static constexpr int kModelFormatVersion = 1;

void save_model(const Model& m, const std::string& path) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["task"] = to_string(m.task);
  json cfg;
  cfg["iterations"] = m.config.iterations;
  if (std::isfinite(m.config.cap))
    cfg["cap_c"] = m.config.cap;
  else
    cfg["cap_c"] = nullptr;
  cfg["averaging"] = m.config.averaging;
  cfg["seed"] = m.config.seed;
  cfg["shuffle"] = m.config.shuffle;
  j["config"] = cfg;
  j["disabled_families"] = std::vector<std::string>(m.features.disabled_families.begin(),
                                                    m.features.disabled_families.end());
  j["schema"] = m.features.schema.entries();
  j["weights"] = m.weights.weights;
  j["averaged_weights"] = m.averaged.weights;
  std::ofstream out(path);
  if (!out) throw TrainError("cannot open model file for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw TrainError("I/O failure while writing model: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TrainError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw TrainError(path + ": model parse error: " + std::string(e.what()));
  }
  int version = j.value("format_version", -1);
  if (version != kModelFormatVersion)
    throw TrainError(path + ": unsupported model format version " + std::to_string(version));
  Model m;
  m.task = task_from_string(j.at("task").get<std::string>());
  const json& cfg = j.at("config");
  m.config.iterations = cfg.at("iterations").get<int>();
  m.config.cap = cfg.at("cap_c").is_null() ? std::numeric_limits<double>::infinity()
                                           : cfg.at("cap_c").get<double>();
  m.config.averaging = cfg.at("averaging").get<bool>();
  m.config.seed = cfg.at("seed").get<unsigned long>();
  m.config.shuffle = cfg.at("shuffle").get<bool>();
  for (const auto& f : j.at("disabled_families"))
    m.features.disabled_families.insert(f.get<std::string>());
  m.features.schema =
      SchemaTable::from_entries(j.at("schema").get<std::map<std::string, std::string>>());
  m.weights.weights = j.at("weights").get<std::map<std::string, double>>();
  m.averaged.weights = j.at("averaged_weights").get<std::map<std::string, double>>();
  return m;
}

}  // namespace evrel

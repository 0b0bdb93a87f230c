// Passive-Aggressive online training over whole-document decoding structures,
// with feature deltas that drop gold-inferable predicted links and the
// tau = loss / ||delta||^2 update.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "evrel/corpus.hpp"
#include "evrel/decoder.hpp"
#include "evrel/features.hpp"
#include "evrel/relgraph.hpp"

namespace evrel {

struct TrainConfig {
  int iterations = 20;
  double cap = std::numeric_limits<double>::infinity();  // aggressiveness cap C
  bool averaging = true;
  unsigned long seed = 1;
  bool shuffle = false;  // document order is fixed by default for reproducibility
};

struct Model {
  Task task = Task::Coreference;
  TrainConfig config;
  FeatureConfig features;
  WeightVector weights;   // final
  WeightVector averaged;  // finalized average, empty when averaging is off
};

// Sum of gold-graph arc features minus sum of system-graph arc features,
// with system arcs inferable from the gold inferred graph removed before
// subtraction.
FeatureVector feature_delta(const RelationGraph& gold_g, const RelationGraph& system_g,
                            const Document& doc, const Clusters& clusters,
                            const FeatureConfig& config);

struct StepDiag {
  bool matched = false;
  bool updated = false;
  bool zero_delta_anomaly = false;  // ||delta||^2 == 0 with positive loss
  double loss = 0.0;
  double tau = 0.0;
  double delta_norm_sq = 0.0;
  // |(score gain of delta direction) - tau * ||delta||^2|, ~0 for every update
  double gain_error = 0.0;
};

// One online step: decode with full candidates, and if the result does not
// match the gold graph, update toward the highest-scoring gold structure.
StepDiag pa_step(WeightVector& w, const Document& doc, Task task, const FeatureConfig& config,
                 double cap);

struct EpochLog {
  int epoch = 0;
  double match_rate = 0.0;
  double total_loss = 0.0;
  int updates = 0;
  int anomalies = 0;
  double max_gain_error = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TrainResult train(const std::vector<Document>& corpus, Task task, const TrainConfig& config,
                  const FeatureConfig& features);

void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace evrel

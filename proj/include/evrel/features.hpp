// Arc-wise feature function and the sparse vectors it produces. All emitted
// features are binary indicators (value 1.0); keys are readable strings
// "Family|atom|..." so families can be ablated by name.

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "evrel/corpus.hpp"
#include "evrel/relgraph.hpp"

namespace evrel {

struct WeightVector;

struct FeatureVector {
  std::map<std::string, double> entries;  // no zero-valued entries stored

  void add(const std::string& key, double value = 1.0);
  FeatureVector& operator+=(const FeatureVector& other);
  FeatureVector& operator-=(const FeatureVector& other);
  double norm_sq() const;
  bool empty() const { return entries.empty(); }
};

// Sparse weights with lazily maintained averages: per key we keep the
// accumulated sum of values over steps and the step it was last flushed at.
struct WeightVector {
  std::map<std::string, double> weights;

  struct Accum {
    double total = 0.0;
    long long last = 0;
  };
  std::map<std::string, Accum> accum;
  long long steps = 0;

  double get(const std::string& key) const;
  double dot(const FeatureVector& f) const;
  void advance() { ++steps; }                          // one online step seen
  void apply(const FeatureVector& delta, double tau);  // w += tau * delta
  WeightVector averaged() const;  // plain average over all steps so far
};

double arc_score(const WeightVector& w, const FeatureVector& f);

// Lemma -> schema-cluster id lookup, "lemma<TAB>cluster" per line.
class SchemaTable {
 public:
  static SchemaTable from_file(const std::string& path);
  static const SchemaTable& builtin();
  static SchemaTable from_entries(std::map<std::string, std::string> entries);

  bool same_cluster(const std::string& lemma_a, const std::string& lemma_b) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct FeatureConfig {
  std::set<std::string> disabled_families;
  SchemaTable schema = SchemaTable::builtin();

  bool on(const std::string& family) const { return !disabled_families.count(family); }
};

// Feature family names accepted by ablation toggles.
const std::vector<std::string>& known_families();

// Per Table-style coreference families: Head, Type, Realis, POS, ExactMatch,
// Distance, Frame, Syntactic. Requires 1 <= i < j <= n.
FeatureVector coref_features(const Document& doc, int i, int j, const FeatureConfig& config);

// Cross product of three atom sets (script compatibility surface/discourse
// atoms and event-ordering atoms); direction is AfterForward or AfterBackward.
FeatureVector sequencing_features(const Document& doc, int i, int j, ArcLabel direction,
                                  const FeatureConfig& config);

FeatureVector root_features(const Document& doc, int j, Task task, const FeatureConfig& config);

// Dispatch on the arc label.
FeatureVector arc_features(const Document& doc, const Arc& arc, Task task,
                           const FeatureConfig& config);

// Sum of arc features over a whole graph.
FeatureVector graph_features(const Document& doc, const RelationGraph& g,
                             const FeatureConfig& config);
double graph_score(const Document& doc, const RelationGraph& g, const WeightVector& w,
                   const FeatureConfig& config);

}  // namespace evrel

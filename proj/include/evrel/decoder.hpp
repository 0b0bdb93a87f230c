// Arc-factored decoding for both tasks: a single-antecedent latent tree for
// coreference and a multi-antecedent latent graph with cycle/redundancy checks
// for sequencing. Gold-constrained variants restrict candidates to the gold
// antecedent sets and always reproduce the gold inferred graph.

#pragma once

#include <vector>

#include "evrel/corpus.hpp"
#include "evrel/features.hpp"
#include "evrel/relgraph.hpp"

namespace evrel {

struct CandidateArc {
  int antecedent = 0;  // 0 encodes the root
  ArcLabel label = ArcLabel::Root;
};

// Per-mention candidate sets A_j (or gold-restricted sets). sets[j-1] holds
// the candidates for mention j; every antecedent index is < j.
struct AntecedentSets {
  Task task = Task::Coreference;
  bool gold_constrained = false;
  std::vector<std::vector<CandidateArc>> sets;
};

AntecedentSets full_antecedents(const Document& doc, Task task);
AntecedentSets gold_antecedents_coref(const Document& doc);
// Gold sequencing candidates over the selected representative mentions; the
// After direction of each candidate is forced by the gold event edge.
AntecedentSets gold_antecedents_sequencing(const Document& doc,
                                           const std::vector<int>& representatives);

// One representative mention per event participating in a gold After link,
// chosen greedily in discourse order to maximize the summed scores of the
// arcs realized with representatives chosen so far; ties go to the earliest
// mention. Returned sorted by discourse index.
std::vector<int> select_latent_mentions(const Document& doc, const WeightVector& w,
                                        const FeatureConfig& config);

// Latent antecedent tree: exactly one arc per mention, the argmax over root
// and mention candidates. An arc must score strictly higher than the root to
// beat it; mention-arc ties go to the closest antecedent.
RelationGraph decode_coref(const Document& doc, const WeightVector& w,
                           const AntecedentSets& candidates, const FeatureConfig& config);

// Latent antecedent graph: per mention, candidate arcs scoring strictly
// higher than the root arc are visited best-first; arcs that would create an
// event-level cycle or a redundant (already reachable) edge are rejected. A
// transitive-reduction post-pass keeps the output a minimum decoding
// structure. Reachability is computed over `clusters` (gold clusters during
// training, singletons at inference).
RelationGraph decode_lag(const Document& doc, const WeightVector& w,
                         const AntecedentSets& candidates, const Clusters& clusters,
                         const FeatureConfig& config);

// Full-candidate decoding for the task.
RelationGraph decode(const Document& doc, const WeightVector& w, Task task,
                     const Clusters& clusters, const FeatureConfig& config);

// Gold-constrained decoding; for sequencing this runs latent mention
// selection first and checks reachability over the gold clusters. The result
// always matches the gold graph.
RelationGraph decode_gold(const Document& doc, const WeightVector& w, Task task,
                          const FeatureConfig& config);

}  // namespace evrel

// Coreference metrics (MUC, B3, CEAF-E, BLANC), their average, and the
// closure/reduction-based sequencing score, with per-document counts that
// pool across a corpus for micro aggregation. All scores are percentages.

#pragma once

#include <string>
#include <vector>

#include "evrel/corpus.hpp"
#include "evrel/relgraph.hpp"

namespace evrel {

// Partition of a document's mention ids, singletons explicit, clusters and
// members sorted for canonical comparison.
struct Clustering {
  std::vector<std::vector<std::string>> clusters;

  static Clustering normalized(std::vector<std::vector<std::string>> clusters);
  bool operator==(const Clustering&) const = default;
};

// Gold clusters plus implicit singletons.
Clustering clustering_from_gold(const Document& doc);
// Index-level partition (e.g. a decoded one) mapped back to mention ids.
Clustering clustering_from_partition(const Document& doc,
                                     const std::vector<std::vector<int>>& partition);

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PRF {
  double p = 0.0;
  double r = 0.0;
  double f = 0.0;
};

// --- poolable per-document counts ------------------------------------------

struct MucCounts {
  double rn = 0, rd = 0, pn = 0, pd = 0;
  MucCounts& operator+=(const MucCounts& o);
};
struct B3Counts {
  double psum = 0, rsum = 0;
  int mentions = 0;
  B3Counts& operator+=(const B3Counts& o);
};
struct CeafCounts {
  double phi = 0;
  int gold_clusters = 0, system_clusters = 0;
  CeafCounts& operator+=(const CeafCounts& o);
};
struct BlancCounts {
  // coref pairs: right / gold total / system total; same for non-coref pairs
  double rc = 0, cg = 0, cs = 0;
  double rn = 0, ng = 0, ns = 0;
  BlancCounts& operator+=(const BlancCounts& o);
};
struct TempCounts {
  double pn = 0, pd = 0, rn = 0, rd = 0;
  TempCounts& operator+=(const TempCounts& o);
};

MucCounts muc_counts(const Clustering& gold, const Clustering& system);
B3Counts b3_counts(const Clustering& gold, const Clustering& system);
CeafCounts ceaf_counts(const Clustering& gold, const Clustering& system);
BlancCounts blanc_counts(const Clustering& gold, const Clustering& system);
TempCounts tempeval_counts(const EventDag& gold, const EventDag& system);

PRF finalize(const MucCounts& c);
PRF finalize(const B3Counts& c);
PRF finalize(const CeafCounts& c);
PRF finalize(const BlancCounts& c);
PRF finalize(const TempCounts& c);

// --- single-pair convenience ------------------------------------------------

PRF muc(const Clustering& gold, const Clustering& system);
PRF b_cubed(const Clustering& gold, const Clustering& system);
PRF ceaf_e(const Clustering& gold, const Clustering& system);
PRF blanc(const Clustering& gold, const Clustering& system);
PRF tempeval(const EventDag& gold, const EventDag& system);

double average_f(double b3_f, double ceafe_f, double muc_f, double blanc_f);
double harmonic_f(double p, double r);

// Maximum-sum one-to-one assignment over a rectangular score matrix
// (rows to columns); exposed for the CEAF alignment.
double max_assignment(const std::vector<std::vector<double>>& score);

// --- baselines ---------------------------------------------------------------

Clustering baseline_singleton(const Document& doc);
// Equivalence classes of (event type, realis).
Clustering baseline_matching(const Document& doc);

// --- corpus-level reports -----------------------------------------------------

enum class Aggregation { Micro, Macro };

struct CorefReport {
  PRF b3, ceaf_e, muc, blanc;
  double avg = 0.0;  // mean of the four F scores
};

CorefReport score_coref(const std::vector<std::pair<Clustering, Clustering>>& gold_system,
                        Aggregation agg);
PRF score_sequencing(const std::vector<std::pair<EventDag, EventDag>>& gold_system,
                     Aggregation agg);

std::string format_coref_report(const CorefReport& r);
std::string format_sequencing_report(const PRF& r);

}  // namespace evrel

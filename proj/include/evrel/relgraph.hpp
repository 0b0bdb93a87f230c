// Relation structures over mention discourse indices and the graph algebra
// used for matching, loss and evaluation: event-level propagation through
// coreference clusters, transitive closure/reduction, the inferred-graph
// match criterion and the training loss.
//
// All operations are pure functions on immutable inputs.

#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evrel/corpus.hpp"

namespace evrel {

enum class Task { Coreference, Sequencing };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

// Arc labels. An arc <i, j, r> always points from an earlier discourse
// position i to a later one j; the After direction is carried by the label:
// AfterForward means i's event script-precedes j's, AfterBackward the
// reverse. Root arcs attach j to the artificial root node 0.
enum class ArcLabel { Coref, AfterForward, AfterBackward, Root };

std::string to_string(ArcLabel l);

struct Arc {
  int source = 0;
  int target = 0;
  ArcLabel label = ArcLabel::Root;
  auto operator<=>(const Arc&) const = default;
};

struct RelationGraph {
  Task task = Task::Coreference;
  int n = 0;  // mention count; indices run 1..n, 0 is the root
  std::set<Arc> arcs;
  bool operator==(const RelationGraph&) const = default;

  void add(int source, int target, ArcLabel label);
  bool has(int source, int target, ArcLabel label) const;
};

// Coreference clusters over discourse indices; singletons are implicit. Each
// mention maps to its event representative (the smallest index in its
// cluster).
class Clusters {
 public:
  Clusters() = default;
  explicit Clusters(int n);  // all singletons
  Clusters(int n, const std::vector<std::vector<int>>& groups);
  int n() const { return static_cast<int>(rep_.size()) - 1; }
  int event_of(int index) const { return rep_.at(static_cast<size_t>(index)); }
  std::vector<int> members(int rep) const;

 private:
  std::vector<int> rep_;  // rep_[0] == 0 (root)
};

// Event-level directed graph; an edge (a, b) means a's event script-precedes
// b's event.
struct EventDag {
  std::set<int> nodes;
  std::set<std::pair<int, int>> edges;
  bool operator==(const EventDag&) const = default;
};

class RelationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Propagates a sequencing graph to the event level. Throws RelationError when
// propagation creates a self-loop (coreferent mentions linked by After),
// naming the cluster.
EventDag to_event_dag(const RelationGraph& g, const Clusters& clusters);

bool is_acyclic(const EventDag& d);
EventDag transitive_closure(const EventDag& d);
EventDag transitive_reduction(const EventDag& d);

// Partition of 1..n induced by the Coref arcs (Root arcs ignored), singletons
// explicit, clusters and members sorted.
std::vector<std::vector<int>> inferred_partition(const RelationGraph& g);

// The equivalence used for match and loss: a partition for coreference, the
// closed propagated event graph for sequencing.
struct InferredGraph {
  Task task = Task::Coreference;
  std::vector<std::vector<int>> partition;  // coreference only
  EventDag dag;                             // sequencing only (closed)
  bool operator==(const InferredGraph&) const = default;
};

InferredGraph inferred_graph(const RelationGraph& g, const Clusters& clusters);

// True iff the two graphs have the same inferred graph.
bool matches(const RelationGraph& system, const RelationGraph& gold, const Clusters& clusters);

// True iff the relation asserted by a non-root arc already holds in the
// inferred gold graph.
bool inferable(const Arc& arc, const InferredGraph& gold_inferred, const Clusters& clusters);

// Number of differing arcs, except: a system Root arc absent from gold
// counts 2, and system arcs inferable from the gold inferred graph count 0.
// Zero iff matches().
double loss(const RelationGraph& gold, const RelationGraph& system, const Clusters& clusters);

// --- corpus bridges -------------------------------------------------------

Clusters gold_clusters(const Document& doc);

// The gold annotation realized as a decoding structure: coref clusters as
// left-to-right chains / after links as labeled arcs, plus Root arcs for
// every mention no arc targets.
RelationGraph gold_graph(const Document& doc, Task task);

// Gold after links propagated to the event level (not closed). Throws on
// self-loops.
EventDag gold_event_dag(const Document& doc);

}  // namespace evrel

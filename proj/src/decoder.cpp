#include "evrel/decoder.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <queue>
#include <set>

namespace evrel {

AntecedentSets full_antecedents(const Document& doc, Task task) {
  AntecedentSets out;
  out.task = task;
  int n = doc.n_mentions();
  out.sets.resize(static_cast<size_t>(n));
  for (int j = 1; j <= n; ++j) {
    auto& cands = out.sets[static_cast<size_t>(j - 1)];
    cands.push_back({0, ArcLabel::Root});
    for (int i = 1; i < j; ++i) {
      if (task == Task::Coreference) {
        cands.push_back({i, ArcLabel::Coref});
      } else {
        cands.push_back({i, ArcLabel::AfterForward});
        cands.push_back({i, ArcLabel::AfterBackward});
      }
    }
  }
  return out;
}

AntecedentSets gold_antecedents_coref(const Document& doc) {
  if (!doc.gold) throw RelationError("document " + doc.doc_id + " has no gold annotation");
  AntecedentSets out;
  out.task = Task::Coreference;
  out.gold_constrained = true;
  int n = doc.n_mentions();
  out.sets.resize(static_cast<size_t>(n));
  Clusters clusters = gold_clusters(doc);
  for (int j = 1; j <= n; ++j) {
    auto& cands = out.sets[static_cast<size_t>(j - 1)];
    for (int i = 1; i < j; ++i)
      if (clusters.event_of(i) == clusters.event_of(j)) cands.push_back({i, ArcLabel::Coref});
    if (cands.empty()) cands.push_back({0, ArcLabel::Root});
  }
  return out;
}

namespace {

// Gold event edges keyed by representative mention of each event.
std::set<std::pair<int, int>> event_edges(const Document& doc) {
  return gold_event_dag(doc).edges;
}

}  // namespace

std::vector<int> select_latent_mentions(const Document& doc, const WeightVector& w,
                                        const FeatureConfig& config) {
  Clusters clusters = gold_clusters(doc);
  std::set<std::pair<int, int>> edges = event_edges(doc);
  std::set<int> participants;
  std::map<int, std::set<int>> adjacent;  // event -> events linked either way
  for (const auto& [a, b] : edges) {
    participants.insert(a);
    participants.insert(b);
    adjacent[a].insert(b);
    adjacent[b].insert(a);
  }
  std::map<int, int> chosen;  // event -> representative mention
  for (int event : participants) {  // events ordered by representative index
    std::vector<int> members = clusters.members(event);
    int best = -1;
    double best_score = 0.0;
    for (int m : members) {
      double score = 0.0;
      for (int other : adjacent[event]) {
        auto it = chosen.find(other);
        if (it == chosen.end()) continue;
        int r = it->second;
        // the direction the gold edge forces for this pair
        bool parent_is_event = edges.count({event, other}) > 0;
        int lo = std::min(m, r), hi = std::max(m, r);
        bool parent_is_lo = parent_is_event ? (lo == m) : (lo == r);
        ArcLabel label = parent_is_lo ? ArcLabel::AfterForward : ArcLabel::AfterBackward;
        score += w.dot(sequencing_features(doc, lo, hi, label, config));
      }
      if (best < 0 || score > best_score) {  // ties keep the earliest mention
        best = m;
        best_score = score;
      }
    }
    chosen[event] = best;
  }
  std::vector<int> out;
  for (const auto& [event, rep] : chosen) {
    (void)event;
    out.push_back(rep);
  }
  std::sort(out.begin(), out.end());
  return out;
}

AntecedentSets gold_antecedents_sequencing(const Document& doc,
                                           const std::vector<int>& representatives) {
  if (!doc.gold) throw RelationError("document " + doc.doc_id + " has no gold annotation");
  AntecedentSets out;
  out.task = Task::Sequencing;
  out.gold_constrained = true;
  int n = doc.n_mentions();
  out.sets.resize(static_cast<size_t>(n));
  Clusters clusters = gold_clusters(doc);
  std::set<std::pair<int, int>> edges = event_edges(doc);
  std::map<int, int> rep_of_event;
  for (int r : representatives) rep_of_event[clusters.event_of(r)] = r;
  for (const auto& [pe, ce] : edges) {
    auto ip = rep_of_event.find(pe);
    auto ic = rep_of_event.find(ce);
    if (ip == rep_of_event.end() || ic == rep_of_event.end())
      throw RelationError("document " + doc.doc_id +
                          ": gold after link has no representative mention");
    int parent = ip->second, child = ic->second;
    int lo = std::min(parent, child), hi = std::max(parent, child);
    ArcLabel label = parent == lo ? ArcLabel::AfterForward : ArcLabel::AfterBackward;
    out.sets[static_cast<size_t>(hi - 1)].push_back({lo, label});
  }
  for (int j = 1; j <= n; ++j) {
    auto& cands = out.sets[static_cast<size_t>(j - 1)];
    if (cands.empty()) cands.push_back({0, ArcLabel::Root});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Latent antecedent tree

RelationGraph decode_coref(const Document& doc, const WeightVector& w,
                           const AntecedentSets& candidates, const FeatureConfig& config) {
  RelationGraph g;
  g.task = Task::Coreference;
  g.n = doc.n_mentions();
  for (int j = 1; j <= g.n; ++j) {
    const auto& cands = candidates.sets[static_cast<size_t>(j - 1)];
    if (cands.empty())
      throw RelationError("mention " + doc.mention(j).id + " has an empty candidate set");
    double root_score = 0.0;
    bool have_root = false;
    int best_i = -1;
    double best_score = 0.0;
    for (const CandidateArc& c : cands) {
      if (c.antecedent == 0) {
        root_score = w.dot(root_features(doc, j, Task::Coreference, config));
        have_root = true;
        continue;
      }
      double s = w.dot(coref_features(doc, c.antecedent, j, config));
      // ties go to the closest antecedent; candidates come in increasing i
      if (best_i < 0 || s >= best_score) {
        best_i = c.antecedent;
        best_score = s;
      }
    }
    // a mention arc must score strictly higher than the root to beat it
    if (best_i > 0 && (!have_root || best_score > root_score))
      g.add(best_i, j, ArcLabel::Coref);
    else
      g.add(0, j, ArcLabel::Root);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Latent antecedent graph

namespace {

// Reachability over event representatives, reflexive, updated transitively as
// arcs are accepted.
class Reach {
 public:
  bool reaches(int from, int to) const {
    if (from == to) return true;
    auto it = sets_.find(from);
    return it != sets_.end() && it->second.count(to) > 0;
  }
  void add_edge(int from, int to) {
    std::set<int> downstream = sets_[to];
    downstream.insert(to);
    for (auto& [node, set] : sets_) {
      if (node == from || set.count(from)) set.insert(downstream.begin(), downstream.end());
    }
    sets_[from].insert(downstream.begin(), downstream.end());
  }

 private:
  std::map<int, std::set<int>> sets_;
};

struct ScoredArc {
  Arc arc;
  double score = 0.0;
};

std::pair<int, int> event_edge(const Arc& arc, const Clusters& clusters) {
  int se = clusters.event_of(arc.label == ArcLabel::AfterForward ? arc.source : arc.target);
  int te = clusters.event_of(arc.label == ArcLabel::AfterForward ? arc.target : arc.source);
  return {se, te};
}

bool feasible(const Reach& reach, const Arc& arc, const Clusters& clusters) {
  auto [se, te] = event_edge(arc, clusters);
  if (reach.reaches(te, se)) return false;  // would create a cycle
  if (reach.reaches(se, te)) return false;  // redundant
  return true;
}

// True when adding the arc's edge would turn an already-accepted edge into a
// shortcut of a longer path, violating the minimum-structure restriction.
bool makes_edge_redundant(const Reach& reach, const Arc& arc,
                          const std::set<std::pair<int, int>>& accepted_edges,
                          const Clusters& clusters) {
  auto [se, te] = event_edge(arc, clusters);
  for (const auto& [a, b] : accepted_edges) {
    if (a == se && b == te) continue;
    if (reach.reaches(a, se) && reach.reaches(te, b)) return true;
  }
  return false;
}

}  // namespace

namespace {

// One greedy decoding run over precomputed candidate scores, with optional
// banned arcs. Tracks which accepted arcs blocked a positive-gain candidate
// so the caller can retry without them.
struct GreedyLag {
  const Clusters* clusters;
  const std::vector<ScoredArc>* order;    // globally sorted best-first
  const std::vector<double>* root_score;  // indexed by mention
  int n;

  std::vector<ScoredArc> accepted;
  std::set<std::pair<int, int>> accepted_edges;
  std::set<std::pair<int, int>> used_pairs;  // one label per mention pair
  std::set<int> covered;
  std::set<Arc> blamed;  // accepted arcs that blocked positive candidates
  Reach reach;
  double total = 0.0;

  GreedyLag(const Clusters& c, const std::vector<ScoredArc>& o, const std::vector<double>& r,
            int n_mentions)
      : clusters(&c), order(&o), root_score(&r), n(n_mentions) {}

  bool admissible(const ScoredArc& sa, bool record_blame) {
    if (used_pairs.count({sa.arc.source, sa.arc.target})) return false;
    auto [se, te] = event_edge(sa.arc, *clusters);
    if (reach.reaches(te, se) || reach.reaches(se, te)) {
      // a cycle (te ~> se) or a redundancy (se ~> te): blame the arcs on the
      // connecting paths
      if (record_blame) {
        for (const ScoredArc& a : accepted) {
          auto [x, y] = event_edge(a.arc, *clusters);
          if ((reach.reaches(te, x) && reach.reaches(y, se)) ||
              (reach.reaches(se, x) && reach.reaches(y, te)))
            blamed.insert(a.arc);
        }
      }
      return false;
    }
    bool shortcut = false;
    for (const ScoredArc& a : accepted) {
      auto [x, y] = event_edge(a.arc, *clusters);
      if (x == se && y == te) continue;
      if (reach.reaches(x, se) && reach.reaches(te, y)) {
        shortcut = true;  // the accepted edge (x, y) would become redundant
        if (record_blame) blamed.insert(a.arc);
      }
    }
    return !shortcut;
  }

  void accept(const ScoredArc& sa) {
    auto edge = event_edge(sa.arc, *clusters);
    reach.add_edge(edge.first, edge.second);
    accepted_edges.insert(edge);
    used_pairs.insert({sa.arc.source, sa.arc.target});
    accepted.push_back(sa);
    total += sa.score;
    if (covered.insert(sa.arc.target).second)
      total -= (*root_score)[static_cast<size_t>(sa.arc.target)];
  }

  double gain_of(const ScoredArc& sa) const {
    return covered.count(sa.arc.target)
               ? sa.score
               : sa.score - (*root_score)[static_cast<size_t>(sa.arc.target)];
  }

  // An arc's gain is what it beats: the target's root arc while the mention
  // is uncovered, nothing once it is covered. Arcs are taken best-gain-first;
  // covering a mention re-queues its remaining arcs at their raw scores.
  // Non-positive gains lose to the root (ties included).
  void run(const std::set<Arc>& banned) {
    for (int j = 1; j <= n; ++j) total += (*root_score)[static_cast<size_t>(j)];
    std::map<int, std::vector<ScoredArc>> by_target;
    for (const ScoredArc& sa : *order)
      if (!banned.count(sa.arc)) by_target[sa.arc.target].push_back(sa);
    struct Entry {
      double gain;
      ScoredArc sa;
    };
    auto later = [](const Entry& a, const Entry& b) {
      if (a.gain != b.gain) return a.gain < b.gain;
      if (a.sa.arc.target != b.sa.arc.target) return a.sa.arc.target > b.sa.arc.target;
      if (a.sa.arc.source != b.sa.arc.source) return a.sa.arc.source < b.sa.arc.source;
      return a.sa.arc.label > b.sa.arc.label;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> queue(later);
    for (const auto& [j, arcs] : by_target) {
      (void)j;
      for (const ScoredArc& sa : arcs) queue.push({gain_of(sa), sa});
    }
    while (!queue.empty()) {
      Entry top = queue.top();
      queue.pop();
      if (top.gain <= 0.0) break;  // nothing left can improve the score
      if (used_pairs.count({top.sa.arc.source, top.sa.arc.target})) continue;
      if (top.gain != gain_of(top.sa)) continue;  // stale; a re-queued copy exists
      bool first_at_target = !covered.count(top.sa.arc.target);
      if (!admissible(top.sa, /*record_blame=*/true)) continue;
      accept(top.sa);
      if (first_at_target) {
        for (const ScoredArc& other : by_target[top.sa.arc.target]) {
          if (used_pairs.count({other.arc.source, other.arc.target})) continue;
          queue.push({other.score, other});
        }
      }
    }
    // positive arcs of a still-uncovered mention may beat its root jointly
    // even when none does alone
    for (int j = 1; j <= n; ++j) {
      if (covered.count(j)) continue;
      GreedyLag probe = *this;
      std::vector<ScoredArc> group;
      double sum = 0.0;
      for (const ScoredArc& sa : by_target[j]) {
        if (sa.score <= 0.0) continue;
        if (!probe.admissible(sa, /*record_blame=*/false)) continue;
        probe.accept(sa);
        group.push_back(sa);
        sum += sa.score;
      }
      if (group.size() > 1 && sum > (*root_score)[static_cast<size_t>(j)])
        for (const ScoredArc& sa : group) accept(sa);
    }
  }
};

}  // namespace

RelationGraph decode_lag(const Document& doc, const WeightVector& w,
                         const AntecedentSets& candidates, const Clusters& clusters,
                         const FeatureConfig& config) {
  int n = doc.n_mentions();
  RelationGraph g;
  g.task = Task::Sequencing;
  g.n = n;

  std::vector<double> root_score(static_cast<size_t>(n) + 1, 0.0);
  std::vector<ScoredArc> order;
  for (int j = 1; j <= n; ++j) {
    root_score[static_cast<size_t>(j)] =
        w.dot(root_features(doc, j, Task::Sequencing, config));
    for (const CandidateArc& c : candidates.sets[static_cast<size_t>(j - 1)]) {
      if (c.antecedent == 0) continue;
      double s = w.dot(sequencing_features(doc, c.antecedent, j, c.label, config));
      order.push_back({{c.antecedent, j, c.label}, s});
    }
  }
  // best-first over the whole document: highest score, then the closest pair
  std::sort(order.begin(), order.end(), [](const ScoredArc& a, const ScoredArc& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.arc.target != b.arc.target) return a.arc.target < b.arc.target;
    if (a.arc.source != b.arc.source) return a.arc.source > b.arc.source;
    return a.arc.label < b.arc.label;
  });

  std::vector<ScoredArc> accepted;
  std::vector<bool> has_root(static_cast<size_t>(n) + 1, false);

  if (candidates.gold_constrained) {
    // gold decoding links every gold antecedent the structure checks allow,
    // whatever the scores
    Reach reach;
    std::set<std::pair<int, int>> used_pairs;
    for (const ScoredArc& sa : order) {
      if (used_pairs.count({sa.arc.source, sa.arc.target})) continue;
      if (!feasible(reach, sa.arc, clusters)) continue;
      auto edge = event_edge(sa.arc, clusters);
      reach.add_edge(edge.first, edge.second);
      used_pairs.insert({sa.arc.source, sa.arc.target});
      accepted.push_back(sa);
    }
  } else {
    GreedyLag best(clusters, order, root_score, n);
    best.run({});
    // an accepted arc sometimes blocks a better combination; retry without
    // each arc that rejected a positive candidate and keep improvements
    for (int round = 0; round < 3; ++round) {
      const GreedyLag* improved = nullptr;
      std::vector<GreedyLag> retries;
      retries.reserve(best.blamed.size());
      for (const Arc& banned : best.blamed) {
        GreedyLag retry(clusters, order, root_score, n);
        retry.run({banned});
        retries.push_back(std::move(retry));
      }
      for (const GreedyLag& retry : retries)
        if (retry.total > best.total + 1e-12 &&
            (improved == nullptr || retry.total > improved->total))
          improved = &retry;
      if (improved == nullptr) break;
      best = *improved;
    }
    accepted = best.accepted;
  }

  for (int j = 1; j <= n; ++j) {
    bool targeted = false;
    for (const ScoredArc& sa : accepted)
      if (sa.arc.target == j) targeted = true;
    if (!targeted) {
      g.add(0, j, ArcLabel::Root);
      has_root[static_cast<size_t>(j)] = true;
    }
  }

  // transitive-reduction post-pass: greedy acceptance order can leave an arc
  // whose event edge later became implied by a longer path
  EventDag dag;
  for (int i = 1; i <= n; ++i) dag.nodes.insert(clusters.event_of(i));
  std::map<std::pair<int, int>, const ScoredArc*> arc_of_edge;
  for (const ScoredArc& sa : accepted) {
    dag.edges.insert(event_edge(sa.arc, clusters));
    arc_of_edge[event_edge(sa.arc, clusters)] = &sa;
  }
  EventDag reduced = transitive_reduction(dag);
  std::map<int, std::vector<const ScoredArc*>> kept_by_target;
  for (const auto& [edge, sa] : arc_of_edge)
    if (reduced.edges.count(edge)) kept_by_target[sa->arc.target].push_back(sa);
  // when the reduction stripped a mention's high-scoring arc, the leftover
  // arcs may no longer beat its root arc; dropping them keeps the graph
  // acyclic and reduced
  if (!candidates.gold_constrained) {
    for (auto& [j, arcs] : kept_by_target) {
      double sum = 0.0;
      for (const ScoredArc* sa : arcs) sum += sa->score;
      if (sum <= root_score[static_cast<size_t>(j)]) arcs.clear();
    }
  }
  for (const auto& [j, arcs] : kept_by_target) {
    (void)j;
    for (const ScoredArc* sa : arcs) g.arcs.insert(sa->arc);
  }
  // a mention whose accepted arcs were all reduced away falls back to root
  for (int j = 1; j <= n; ++j) {
    bool targeted = false;
    for (const Arc& a : g.arcs)
      if (a.label != ArcLabel::Root && a.target == j) targeted = true;
    if (!targeted && !has_root[static_cast<size_t>(j)]) g.add(0, j, ArcLabel::Root);
  }
  return g;
}

RelationGraph decode(const Document& doc, const WeightVector& w, Task task,
                     const Clusters& clusters, const FeatureConfig& config) {
  AntecedentSets full = full_antecedents(doc, task);
  if (task == Task::Coreference) return decode_coref(doc, w, full, config);
  return decode_lag(doc, w, full, clusters, config);
}

RelationGraph decode_gold(const Document& doc, const WeightVector& w, Task task,
                          const FeatureConfig& config) {
  if (task == Task::Coreference)
    return decode_coref(doc, w, gold_antecedents_coref(doc), config);
  std::vector<int> reps = select_latent_mentions(doc, w, config);
  AntecedentSets sets = gold_antecedents_sequencing(doc, reps);
  return decode_lag(doc, w, sets, gold_clusters(doc), config);
}

}  // namespace evrel

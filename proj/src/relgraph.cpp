#include "evrel/relgraph.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>

namespace evrel {

std::string to_string(Task t) {
  return t == Task::Coreference ? "coref" : "sequencing";
}

Task task_from_string(const std::string& s) {
  if (s == "coref" || s == "coreference") return Task::Coreference;
  if (s == "sequencing" || s == "seq") return Task::Sequencing;
  throw RelationError("unknown task '" + s + "' (expected coref or sequencing)");
}

std::string to_string(ArcLabel l) {
  switch (l) {
    case ArcLabel::Coref: return "coref";
    case ArcLabel::AfterForward: return "after.forward";
    case ArcLabel::AfterBackward: return "after.backward";
    case ArcLabel::Root: return "root";
  }
  return "root";
}

void RelationGraph::add(int source, int target, ArcLabel label) {
  if (source >= target)
    throw RelationError("arc must point forward in discourse: " + std::to_string(source) +
                        "->" + std::to_string(target));
  if ((label == ArcLabel::Root) != (source == 0))
    throw RelationError("root label is valid exactly for arcs from node 0");
  if (target > n) throw RelationError("arc target out of range");
  bool label_ok = task == Task::Coreference
                      ? (label == ArcLabel::Coref || label == ArcLabel::Root)
                      : (label != ArcLabel::Coref);
  if (!label_ok) throw RelationError("arc label not admitted by task");
  arcs.insert({source, target, label});
}

bool RelationGraph::has(int source, int target, ArcLabel label) const {
  return arcs.count({source, target, label}) > 0;
}

Clusters::Clusters(int n) : rep_(static_cast<size_t>(n) + 1) {
  for (int i = 0; i <= n; ++i) rep_[static_cast<size_t>(i)] = i;
}

Clusters::Clusters(int n, const std::vector<std::vector<int>>& groups) : Clusters(n) {
  for (const auto& g : groups) {
    if (g.empty()) continue;
    int rep = *std::min_element(g.begin(), g.end());
    for (int i : g) {
      if (i < 1 || i > n) throw RelationError("cluster member out of range");
      rep_[static_cast<size_t>(i)] = rep;
    }
  }
}

std::vector<int> Clusters::members(int rep) const {
  std::vector<int> out;
  for (int i = 1; i <= n(); ++i)
    if (event_of(i) == rep) out.push_back(i);
  return out;
}

EventDag to_event_dag(const RelationGraph& g, const Clusters& clusters) {
  EventDag d;
  for (int i = 1; i <= g.n; ++i) d.nodes.insert(clusters.event_of(i));
  for (const Arc& a : g.arcs) {
    if (a.label == ArcLabel::Root || a.label == ArcLabel::Coref) continue;
    int es = clusters.event_of(a.source);
    int et = clusters.event_of(a.target);
    if (es == et) {
      std::string ms;
      for (int m : clusters.members(es)) ms += (ms.empty() ? "" : ",") + std::to_string(m);
      throw RelationError("after arc " + std::to_string(a.source) + "->" +
                          std::to_string(a.target) +
                          " connects coreferent mentions (cluster {" + ms + "})");
    }
    if (a.label == ArcLabel::AfterForward)
      d.edges.emplace(es, et);
    else
      d.edges.emplace(et, es);
  }
  return d;
}

namespace {

std::map<int, std::vector<int>> adjacency(const EventDag& d) {
  std::map<int, std::vector<int>> adj;
  for (const auto& [a, b] : d.edges) adj[a].push_back(b);
  return adj;
}

void reach_from(int start, const std::map<int, std::vector<int>>& adj, std::set<int>& seen) {
  std::vector<int> todo{start};
  while (!todo.empty()) {
    int u = todo.back();
    todo.pop_back();
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (int v : it->second)
      if (seen.insert(v).second) todo.push_back(v);
  }
}

}  // namespace

bool is_acyclic(const EventDag& d) {
  auto adj = adjacency(d);
  for (const auto& [a, b] : d.edges) {
    (void)a;
    std::set<int> seen;
    reach_from(b, adj, seen);
    if (seen.count(a)) return false;
  }
  return true;
}

EventDag transitive_closure(const EventDag& d) {
  EventDag out;
  out.nodes = d.nodes;
  auto adj = adjacency(d);
  for (int node : d.nodes) {
    std::set<int> seen;
    reach_from(node, adj, seen);
    for (int v : seen) out.edges.emplace(node, v);
  }
  // sources may not be listed among nodes when callers build ad-hoc DAGs
  for (const auto& [a, b] : d.edges) {
    out.nodes.insert(a);
    out.nodes.insert(b);
    if (!d.nodes.count(a)) {
      std::set<int> seen;
      reach_from(a, adj, seen);
      for (int v : seen) out.edges.emplace(a, v);
    }
  }
  return out;
}

EventDag transitive_reduction(const EventDag& d) {
  EventDag closed = transitive_closure(d);
  EventDag out;
  out.nodes = closed.nodes;
  for (const auto& [a, b] : d.edges) {
    bool redundant = false;
    for (const auto& [a2, c] : d.edges) {
      if (a2 != a || c == b) continue;
      if (closed.edges.count({c, b})) {
        redundant = true;
        break;
      }
    }
    if (!redundant) out.edges.emplace(a, b);
  }
  return out;
}

std::vector<std::vector<int>> inferred_partition(const RelationGraph& g) {
  std::vector<int> parent(static_cast<size_t>(g.n) + 1);
  for (int i = 0; i <= g.n; ++i) parent[static_cast<size_t>(i)] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (const Arc& a : g.arcs) {
    if (a.label != ArcLabel::Coref) continue;
    int ra = find(a.source), rb = find(a.target);
    if (ra != rb) parent[static_cast<size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 1; i <= g.n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [rep, members] : groups) {
    (void)rep;
    out.push_back(std::move(members));
  }
  return out;
}

InferredGraph inferred_graph(const RelationGraph& g, const Clusters& clusters) {
  InferredGraph out;
  out.task = g.task;
  if (g.task == Task::Coreference)
    out.partition = inferred_partition(g);
  else
    out.dag = transitive_closure(to_event_dag(g, clusters));
  return out;
}

bool matches(const RelationGraph& system, const RelationGraph& gold, const Clusters& clusters) {
  return inferred_graph(system, clusters) == inferred_graph(gold, clusters);
}

bool inferable(const Arc& arc, const InferredGraph& gold_inferred, const Clusters& clusters) {
  switch (arc.label) {
    case ArcLabel::Root:
      return false;
    case ArcLabel::Coref:
      for (const auto& cluster : gold_inferred.partition) {
        bool s = std::binary_search(cluster.begin(), cluster.end(), arc.source);
        bool t = std::binary_search(cluster.begin(), cluster.end(), arc.target);
        if (s || t) return s && t;
      }
      return false;
    case ArcLabel::AfterForward:
      return gold_inferred.dag.edges.count(
                 {clusters.event_of(arc.source), clusters.event_of(arc.target)}) > 0;
    case ArcLabel::AfterBackward:
      return gold_inferred.dag.edges.count(
                 {clusters.event_of(arc.target), clusters.event_of(arc.source)}) > 0;
  }
  return false;
}

double loss(const RelationGraph& gold, const RelationGraph& system, const Clusters& clusters) {
  if (matches(system, gold, clusters)) return 0.0;
  InferredGraph ginf = inferred_graph(gold, clusters);
  double total = 0.0;
  for (const Arc& a : system.arcs) {
    if (gold.arcs.count(a)) continue;
    if (a.label == ArcLabel::Root)
      total += 2.0;  // erroneous root attachment
    else if (!inferable(a, ginf, clusters))
      total += 1.0;
  }
  for (const Arc& a : gold.arcs)
    if (!system.arcs.count(a)) total += 1.0;
  return total;
}

// ---------------------------------------------------------------------------
// Corpus bridges

Clusters gold_clusters(const Document& doc) {
  int n = doc.n_mentions();
  if (!doc.gold) return Clusters(n);
  std::vector<std::vector<int>> groups;
  for (const auto& cluster : doc.gold->coref) {
    std::vector<int> g;
    for (const auto& id : cluster) g.push_back(doc.mention_index(id));
    groups.push_back(std::move(g));
  }
  return Clusters(n, groups);
}

RelationGraph gold_graph(const Document& doc, Task task) {
  if (!doc.gold) throw RelationError("document " + doc.doc_id + " has no gold annotation");
  RelationGraph g;
  g.task = task;
  g.n = doc.n_mentions();
  std::vector<bool> targeted(static_cast<size_t>(g.n) + 1, false);
  if (task == Task::Coreference) {
    for (const auto& cluster : doc.gold->coref) {
      std::vector<int> idx;
      for (const auto& id : cluster) idx.push_back(doc.mention_index(id));
      std::sort(idx.begin(), idx.end());
      for (size_t k = 1; k < idx.size(); ++k) {
        g.add(idx[k - 1], idx[k], ArcLabel::Coref);
        targeted[static_cast<size_t>(idx[k])] = true;
      }
    }
  } else {
    for (const auto& [src, dst] : doc.gold->after) {
      int a = doc.mention_index(src);
      int b = doc.mention_index(dst);
      if (a < b) {
        g.add(a, b, ArcLabel::AfterForward);
        targeted[static_cast<size_t>(b)] = true;
      } else if (b < a) {
        g.add(b, a, ArcLabel::AfterBackward);
        targeted[static_cast<size_t>(a)] = true;
      } else {
        throw RelationError("after link from a mention to itself: " + src);
      }
    }
  }
  for (int j = 1; j <= g.n; ++j)
    if (!targeted[static_cast<size_t>(j)]) g.add(0, j, ArcLabel::Root);
  return g;
}

EventDag gold_event_dag(const Document& doc) {
  return to_event_dag(gold_graph(doc, Task::Sequencing), gold_clusters(doc));
}

}  // namespace evrel

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "evrel/relgraph.hpp"
#include "helpers.hpp"

using namespace evrel;
using namespace testutil;

namespace {

EventDag dag(std::set<std::pair<int, int>> edges, int n = 0) {
  EventDag d;
  d.edges = std::move(edges);
  for (const auto& [a, b] : d.edges) {
    d.nodes.insert(a);
    d.nodes.insert(b);
  }
  for (int v = 1; v <= n; ++v) d.nodes.insert(v);
  return d;
}

RelationGraph seq_graph(int n, const std::vector<Arc>& arcs) {
  RelationGraph g;
  g.task = Task::Sequencing;
  g.n = n;
  std::vector<bool> targeted(static_cast<size_t>(n) + 1, false);
  for (const Arc& a : arcs) {
    g.add(a.source, a.target, a.label);
    if (a.label != ArcLabel::Root) targeted[static_cast<size_t>(a.target)] = true;
  }
  for (int j = 1; j <= n; ++j)
    if (!targeted[static_cast<size_t>(j)] && !g.has(0, j, ArcLabel::Root))
      g.add(0, j, ArcLabel::Root);
  return g;
}

}  // namespace

TEST_CASE("arc invariants are enforced") {
  RelationGraph g;
  g.task = Task::Coreference;
  g.n = 3;
  CHECK_THROWS_AS(g.add(2, 1, ArcLabel::Coref), RelationError);
  CHECK_THROWS_AS(g.add(1, 2, ArcLabel::Root), RelationError);
  CHECK_THROWS_AS(g.add(0, 2, ArcLabel::Coref), RelationError);
  CHECK_THROWS_AS(g.add(1, 2, ArcLabel::AfterForward), RelationError);
  g.add(1, 2, ArcLabel::Coref);
  CHECK(g.has(1, 2, ArcLabel::Coref));
}

TEST_CASE("to_event_dag direction semantics") {
  Clusters singletons(2);
  RelationGraph g = seq_graph(2, {{1, 2, ArcLabel::AfterBackward}});
  EventDag d = to_event_dag(g, singletons);
  CHECK(d.edges == std::set<std::pair<int, int>>{{2, 1}});

  RelationGraph f = seq_graph(2, {{1, 2, ArcLabel::AfterForward}});
  CHECK(to_event_dag(f, singletons).edges == std::set<std::pair<int, int>>{{1, 2}});

  RelationGraph empty = seq_graph(0, {});
  EventDag de = to_event_dag(empty, Clusters(0));
  CHECK(de.edges.empty());
  CHECK(de.nodes.empty());
}

TEST_CASE("propagating an after arc over coreferent mentions fails loudly") {
  // fired (2) after-linked to one killed (3), coreferent with the other (1)
  Clusters clusters(3, {{1, 3}});
  RelationGraph g = seq_graph(3, {{2, 3, ArcLabel::AfterForward}});
  EventDag d = to_event_dag(g, clusters);
  // the two killed mentions are one event: a single edge fired -> killed
  CHECK(d.edges == std::set<std::pair<int, int>>{{2, 1}});
  CHECK(d.nodes == std::set<int>{1, 2});

  RelationGraph bad = seq_graph(3, {{1, 3, ArcLabel::AfterForward}});
  CHECK_THROWS_WITH_AS(to_event_dag(bad, clusters),
                       doctest::Contains("cluster {1,3}"), RelationError);
}

TEST_CASE("transitive closure on the two-chain") {
  EventDag d = dag({{1, 2}, {2, 3}});
  EventDag c = transitive_closure(d);
  CHECK(c.edges == std::set<std::pair<int, int>>{{1, 2}, {2, 3}, {1, 3}});
  CHECK(transitive_closure(dag({})).edges.empty());
}

TEST_CASE("transitive reduction of the closed chain") {
  EventDag d = dag({{1, 2}, {2, 3}, {1, 3}});
  CHECK(transitive_reduction(d).edges == std::set<std::pair<int, int>>{{1, 2}, {2, 3}});
  // an already-reduced chain is a fixed point
  EventDag chain = dag({{1, 2}, {2, 3}});
  CHECK(transitive_reduction(chain).edges == chain.edges);
}

TEST_CASE("closure and reduction match brute-force oracles on random DAGs") {
  Rng rng(20240601);
  for (int trial = 0; trial < 300; ++trial) {
    EventDag d = random_dag(rng, 10, 0.3);
    EventDag c = transitive_closure(d);
    CHECK(c.edges == oracle_closure(d.nodes, d.edges));
    EventDag r = transitive_reduction(d);
    CHECK(r.edges == oracle_reduction(d.nodes, d.edges));
    // same reachability, and idempotent
    CHECK(transitive_closure(r).edges == c.edges);
    CHECK(transitive_reduction(r).edges == r.edges);
    CHECK(transitive_closure(c).edges == c.edges);
  }
}

TEST_CASE("reduction is minimal: no proper subset has the same closure") {
  Rng rng(77);
  int checked = 0;
  while (checked < 40) {
    EventDag d = random_dag(rng, 6, 0.3);
    if (d.edges.size() > 6) continue;
    ++checked;
    EventDag r = transitive_reduction(d);
    auto closure = oracle_closure(d.nodes, d.edges);
    std::vector<std::pair<int, int>> edges(r.edges.begin(), r.edges.end());
    for (size_t drop = 0; drop < edges.size(); ++drop) {
      EventDag sub;
      sub.nodes = d.nodes;
      for (size_t k = 0; k < edges.size(); ++k)
        if (k != drop) sub.edges.insert(edges[k]);
      CHECK(oracle_closure(sub.nodes, sub.edges) != closure);
    }
  }
}

TEST_CASE("inferred graphs: coref partition from links") {
  RelationGraph g;
  g.task = Task::Coreference;
  g.n = 3;
  g.add(1, 2, ArcLabel::Coref);
  g.add(2, 3, ArcLabel::Coref);
  CHECK(inferred_partition(g) == std::vector<std::vector<int>>{{1, 2, 3}});

  RelationGraph roots;
  roots.task = Task::Coreference;
  roots.n = 3;
  for (int j = 1; j <= 3; ++j) roots.add(0, j, ArcLabel::Root);
  CHECK(inferred_partition(roots) == std::vector<std::vector<int>>{{1}, {2}, {3}});
}

TEST_CASE("the two decoding structures of a chain infer the same graph") {
  Clusters singletons(3);
  RelationGraph s1 = seq_graph(3, {{1, 2, ArcLabel::AfterForward}, {2, 3, ArcLabel::AfterForward}});
  RelationGraph s2 = seq_graph(3, {{1, 2, ArcLabel::AfterForward},
                                   {2, 3, ArcLabel::AfterForward},
                                   {1, 3, ArcLabel::AfterForward}});
  CHECK(inferred_graph(s1, singletons) == inferred_graph(s2, singletons));
  CHECK(matches(s1, s2, singletons));
  CHECK(matches(s2, s1, singletons));

  RelationGraph missing = seq_graph(3, {{1, 2, ArcLabel::AfterForward}});
  CHECK_FALSE(matches(missing, s1, singletons));
}

TEST_CASE("all-root graphs infer singletons / the empty DAG") {
  Clusters singletons(3);
  RelationGraph g = seq_graph(3, {});
  InferredGraph inf = inferred_graph(g, singletons);
  CHECK(inf.dag.edges.empty());
}

TEST_CASE("loss: wrong root plus missing arc costs 3") {
  Clusters singletons(4);
  RelationGraph gold = seq_graph(4, {{1, 2, ArcLabel::AfterForward},
                                     {2, 3, ArcLabel::AfterForward},
                                     {3, 4, ArcLabel::AfterForward}});
  // the system wrongly root-links m4 and misses the arc from m3
  RelationGraph system = seq_graph(4, {{1, 2, ArcLabel::AfterForward},
                                       {2, 3, ArcLabel::AfterForward}});
  CHECK(system.has(0, 4, ArcLabel::Root));
  CHECK(loss(gold, system, singletons) == doctest::Approx(3.0));
  CHECK_FALSE(matches(system, gold, singletons));
}

TEST_CASE("loss: identical graphs and gold-inferable extras cost nothing") {
  Clusters singletons(3);
  RelationGraph gold = seq_graph(3, {{1, 2, ArcLabel::AfterForward}, {2, 3, ArcLabel::AfterForward}});
  CHECK(loss(gold, gold, singletons) == 0.0);

  RelationGraph with_extra = seq_graph(3, {{1, 2, ArcLabel::AfterForward},
                                           {2, 3, ArcLabel::AfterForward},
                                           {1, 3, ArcLabel::AfterForward}});
  CHECK(loss(gold, with_extra, singletons) == 0.0);
  CHECK(matches(with_extra, gold, singletons));
}

TEST_CASE("loss: a mention linked where gold leaves it unlinked costs 1 + 1") {
  Clusters singletons(2);
  RelationGraph gold = seq_graph(2, {});
  RelationGraph system = seq_graph(2, {{1, 2, ArcLabel::AfterForward}});
  // one for the spurious arc, one for the missing gold root arc
  CHECK(loss(gold, system, singletons) == doctest::Approx(2.0));
}

TEST_CASE("loss and matches properties on random graph pairs") {
  Rng rng(4243);
  for (int trial = 0; trial < 200; ++trial) {
    Document doc = random_doc(rng, 6);
    Clusters clusters = gold_clusters(doc);
    Task task = rng.chance(0.5) ? Task::Coreference : Task::Sequencing;
    RelationGraph gold = gold_graph(doc, task);
    CHECK(matches(gold, gold, clusters));
    CHECK(loss(gold, gold, clusters) == 0.0);
    // a random system graph decoded from random weights
    FeatureConfig config;
    WeightVector w = random_weights(rng, doc, task, config);
    RelationGraph system = decode(doc, w, task, clusters, config);
    double l = loss(gold, system, clusters);
    CHECK(l >= 0.0);
    if (matches(system, gold, clusters)) CHECK(l == 0.0);
    if (l == 0.0) CHECK(matches(system, gold, clusters));
  }
}

TEST_CASE("gold graph realization covers every mention") {
  Document doc = build_doc({{"a.x", "order"}, {"a.y", "eat"}, {"a.z", "pay"}},
                           {{0, 2}}, {{0, 1}});
  for (Task task : {Task::Coreference, Task::Sequencing}) {
    RelationGraph g = gold_graph(doc, task);
    std::vector<bool> covered(4, false);
    for (const Arc& a : g.arcs) covered[static_cast<size_t>(a.target)] = true;
    for (int j = 1; j <= 3; ++j) CHECK(covered[static_cast<size_t>(j)]);
  }
  // coref chain reproduces the cluster
  RelationGraph g = gold_graph(doc, Task::Coreference);
  CHECK(inferred_partition(g) == std::vector<std::vector<int>>{{1, 3}, {2}});
}

TEST_CASE("event dag of gold annotation propagates through clusters") {
  // after link names mention 1 -> mention 2, but 1 is clustered with 3
  Document doc = build_doc({{"a.x", "kill"}, {"a.y", "die"}, {"a.x", "kill"}},
                           {{0, 2}}, {{0, 1}});
  EventDag d = gold_event_dag(doc);
  CHECK(d.edges == std::set<std::pair<int, int>>{{1, 2}});
}

TEST_CASE("acyclicity agrees with a topological-sort oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    EventDag d = random_dag(rng, 8, 0.35);
    CHECK(is_acyclic(d));
    CHECK(oracle_acyclic_toposort(d.nodes, d.edges));
    if (!d.edges.empty()) {
      auto [a, b] = *d.edges.begin();
      EventDag cyc = d;
      cyc.edges.emplace(b, a);
      CHECK(is_acyclic(cyc) == oracle_acyclic_toposort(cyc.nodes, cyc.edges));
    }
  }
}

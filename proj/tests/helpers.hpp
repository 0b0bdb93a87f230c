// Shared test utilities: independent brute-force oracles, deterministic
// generators for random documents / weights / DAGs, and small document
// builders. Everything here is test-only and deliberately avoids the code
// paths it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "evrel/corpus.hpp"
#include "evrel/decoder.hpp"
#include "evrel/features.hpp"
#include "evrel/metrics.hpp"
#include "evrel/relgraph.hpp"
#include "evrel/synth.hpp"

namespace testutil {

using namespace evrel;

// Deterministic draws independent of standard-library distributions.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(uint64_t seed) : engine(seed) {}
  size_t index(size_t n) { return n == 0 ? 0 : static_cast<size_t>(engine() % n); }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(index(static_cast<size_t>(hi - lo + 1)));
  }
  double real() { return static_cast<double>(engine() >> 11) / 9007199254740992.0; }
  bool chance(double p) { return real() < p; }
  double gauss() {  // Box-Muller
    double u1 = std::max(real(), 1e-12), u2 = real();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
};

// --- graph oracles ----------------------------------------------------------

// Floyd-Warshall reachability, independent of the BFS-based implementation.
inline std::set<std::pair<int, int>> oracle_closure(const std::set<int>& nodes,
                                                    const std::set<std::pair<int, int>>& edges) {
  std::vector<int> ids(nodes.begin(), nodes.end());
  for (const auto& [a, b] : edges) {
    if (!nodes.count(a)) ids.push_back(a);
    if (!nodes.count(b)) ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::map<int, size_t> pos;
  for (size_t k = 0; k < ids.size(); ++k) pos[ids[k]] = k;
  size_t n = ids.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (const auto& [a, b] : edges) reach[pos[a]][pos[b]] = true;
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;
  std::set<std::pair<int, int>> out;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (reach[i][j]) out.emplace(ids[i], ids[j]);
  return out;
}

// Kahn's algorithm; acyclic iff every node can be scheduled.
inline bool oracle_acyclic_toposort(const std::set<int>& nodes,
                                    const std::set<std::pair<int, int>>& edges) {
  std::set<int> all = nodes;
  for (const auto& [a, b] : edges) {
    all.insert(a);
    all.insert(b);
  }
  std::map<int, int> indegree;
  for (int v : all) indegree[v] = 0;
  for (const auto& [a, b] : edges) {
    (void)a;
    indegree[b] += 1;
  }
  std::vector<int> queue;
  for (const auto& [v, d] : indegree)
    if (d == 0) queue.push_back(v);
  size_t scheduled = 0;
  while (!queue.empty()) {
    int v = queue.back();
    queue.pop_back();
    ++scheduled;
    for (const auto& [a, b] : edges)
      if (a == v && --indegree[b] == 0) queue.push_back(b);
  }
  return scheduled == all.size();
}

// An edge (a,b) of a DAG is redundant iff some two-step-or-longer path a~>b
// exists, i.e. (a,c) in edges and c reaches b.
inline std::set<std::pair<int, int>> oracle_reduction(const std::set<int>& nodes,
                                                      const std::set<std::pair<int, int>>& edges) {
  auto closure = oracle_closure(nodes, edges);
  std::set<std::pair<int, int>> out;
  for (const auto& [a, b] : edges) {
    bool redundant = false;
    for (const auto& [a2, c] : edges)
      if (a2 == a && c != b && closure.count({c, b})) redundant = true;
    if (!redundant) out.emplace(a, b);
  }
  return out;
}

// Random DAG: sample a permutation as a hidden topological order, then edges
// that respect it.
inline EventDag random_dag(Rng& rng, int max_nodes, double edge_prob) {
  int n = rng.range(0, max_nodes);
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i + 1;
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  EventDag d;
  for (int i = 1; i <= n; ++i) d.nodes.insert(i);
  for (size_t a = 0; a < order.size(); ++a)
    for (size_t b = a + 1; b < order.size(); ++b)
      if (rng.chance(edge_prob)) d.edges.emplace(order[a], order[b]);
  return d;
}

// --- partitions ---------------------------------------------------------------

// All set partitions of {0..n-1} via restricted growth strings.
inline std::vector<std::vector<std::vector<int>>> all_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> out;
  if (n == 0) return out;
  std::vector<int> rgs(static_cast<size_t>(n), 0);
  for (;;) {
    int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
    std::vector<std::vector<int>> part(static_cast<size_t>(blocks));
    for (int i = 0; i < n; ++i) part[static_cast<size_t>(rgs[static_cast<size_t>(i)])].push_back(i);
    out.push_back(part);
    // next restricted growth string
    int i = n - 1;
    for (; i > 0; --i) {
      int maxprefix = *std::max_element(rgs.begin(), rgs.begin() + i);
      if (rgs[static_cast<size_t>(i)] <= maxprefix) break;
    }
    if (i == 0) break;
    rgs[static_cast<size_t>(i)] += 1;
    for (int k = i + 1; k < n; ++k) rgs[static_cast<size_t>(k)] = 0;
  }
  return out;
}

inline Clustering partition_to_clustering(const std::vector<std::vector<int>>& part,
                                          const std::vector<std::string>& ids) {
  std::vector<std::vector<std::string>> clusters;
  for (const auto& group : part) {
    std::vector<std::string> c;
    for (int i : group) c.push_back(ids[static_cast<size_t>(i)]);
    clusters.push_back(std::move(c));
  }
  return Clustering::normalized(std::move(clusters));
}

// --- document builders ---------------------------------------------------------

struct MentionSpec {
  std::string type;
  std::string lemma;
  Realis realis = Realis::Actual;
};

// One sentence per mention: ["the", lemma, "."], head on the lemma.
inline Document build_doc(const std::vector<MentionSpec>& specs,
                          const std::vector<std::vector<int>>& coref_clusters = {},
                          const std::vector<std::pair<int, int>>& after_links = {}) {
  Document doc;
  doc.doc_id = "test-doc";
  int k = 0;
  for (const auto& spec : specs) {
    Sentence sent;
    sent.index = k;
    sent.tokens = {{0, "the", "the", "DT"},
                   {1, spec.lemma, spec.lemma, "VBD"},
                   {2, ".", ".", "."}};
    doc.sentences.push_back(std::move(sent));
    EventMention m;
    char buf[16];
    std::snprintf(buf, sizeof buf, "m%03d", k + 1);
    m.id = buf;
    m.sentence = k;
    m.span = {1, 2};
    m.head = 1;
    m.type = spec.type;
    m.realis = spec.realis;
    m.discourse_index = k + 1;
    doc.mentions.push_back(std::move(m));
    ++k;
  }
  GoldAnnotation gold;
  // cluster / link positions are 0-based into the mention list
  for (const auto& cluster : coref_clusters) {
    std::vector<std::string> ids;
    for (int i : cluster) ids.push_back(doc.mentions[static_cast<size_t>(i)].id);
    gold.coref.push_back(std::move(ids));
  }
  for (const auto& [a, b] : after_links)
    gold.after.emplace_back(doc.mentions[static_cast<size_t>(a)].id,
                            doc.mentions[static_cast<size_t>(b)].id);
  doc.gold = std::move(gold);
  return doc;
}

// Random annotated document: random types/lemmas, a random mention partition,
// and a random event-level DAG realized as mention-level after links.
inline Document random_doc(Rng& rng, int max_mentions = 8) {
  static const std::vector<std::pair<std::string, std::string>> kPool = {
      {"alpha.one", "order"}, {"alpha.two", "eat"},   {"alpha.three", "pay"},
      {"beta.one", "arrest"}, {"beta.two", "charge"}, {"beta.three", "jail"},
      {"gamma.one", "fly"},   {"gamma.two", "land"}};
  int n = rng.range(2, max_mentions);
  std::vector<MentionSpec> specs;
  for (int i = 0; i < n; ++i) {
    const auto& p = kPool[rng.index(kPool.size())];
    Realis realis = rng.chance(0.7)   ? Realis::Actual
                    : rng.chance(0.5) ? Realis::Generic
                                      : Realis::Other;
    specs.push_back({p.first, p.second, realis});
  }
  // random partition over 0-based mention positions
  std::map<int, std::vector<int>> buckets;
  for (int i = 0; i < n; ++i) buckets[rng.range(0, (n + 1) / 2)].push_back(i);
  std::vector<std::vector<int>> clusters;
  for (auto& [b, members] : buckets) {
    (void)b;
    if (members.size() > 1) clusters.push_back(members);
  }
  // random DAG over events via a random order over cluster representatives
  std::vector<std::vector<int>> groups = clusters;
  std::set<int> covered;
  for (const auto& c : clusters) covered.insert(c.begin(), c.end());
  for (int i = 0; i < n; ++i)
    if (!covered.count(i)) groups.push_back({i});
  std::vector<size_t> order(groups.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  std::vector<std::pair<int, int>> links;
  for (size_t a = 0; a < order.size(); ++a) {
    for (size_t b = a + 1; b < order.size(); ++b) {
      if (!rng.chance(0.3)) continue;
      const auto& ga = groups[order[a]];
      const auto& gb = groups[order[b]];
      int ma = ga[rng.index(ga.size())];
      int mb = gb[rng.index(gb.size())];
      links.emplace_back(ma, mb);
    }
  }
  Document doc = build_doc(specs, clusters, links);
  validate_document(doc);
  return doc;
}

// Random weights over every feature key the document can produce.
inline WeightVector random_weights(Rng& rng, const Document& doc, Task task,
                                   const FeatureConfig& config, double scale = 1.0) {
  std::set<std::string> keys;
  int n = doc.n_mentions();
  for (int j = 1; j <= n; ++j) {
    for (const auto& [k, v] : root_features(doc, j, task, config).entries) {
      (void)v;
      keys.insert(k);
    }
    for (int i = 1; i < j; ++i) {
      if (task == Task::Coreference) {
        for (const auto& [k, v] : coref_features(doc, i, j, config).entries) {
          (void)v;
          keys.insert(k);
        }
      } else {
        for (ArcLabel label : {ArcLabel::AfterForward, ArcLabel::AfterBackward})
          for (const auto& [k, v] : sequencing_features(doc, i, j, label, config).entries) {
            (void)v;
            keys.insert(k);
          }
      }
    }
  }
  WeightVector w;
  for (const auto& k : keys) w.weights[k] = scale * rng.gauss();
  return w;
}

// --- exhaustive LAG structure enumeration (documents with few mentions) --------

// Maximum structure score over all minimum decoding structures: any per-pair
// label assignment whose event graph (singleton clusters) is acyclic and
// transitively reduced, with root arcs for every untargeted mention.
inline double enumerate_lag_max(const Document& doc, const WeightVector& w,
                                const FeatureConfig& config) {
  int n = doc.n_mentions();
  std::vector<std::pair<int, int>> pairs;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) pairs.emplace_back(i, j);
  std::vector<double> score_f(pairs.size()), score_b(pairs.size());
  for (size_t p = 0; p < pairs.size(); ++p) {
    score_f[p] = w.dot(
        sequencing_features(doc, pairs[p].first, pairs[p].second, ArcLabel::AfterForward, config));
    score_b[p] = w.dot(
        sequencing_features(doc, pairs[p].first, pairs[p].second, ArcLabel::AfterBackward, config));
  }
  std::vector<double> root_score(static_cast<size_t>(n) + 1, 0.0);
  for (int j = 1; j <= n; ++j)
    root_score[static_cast<size_t>(j)] = w.dot(root_features(doc, j, Task::Sequencing, config));

  double best = -1e300;
  std::vector<int> choice(pairs.size(), 0);  // 0 none, 1 forward, 2 backward
  for (;;) {
    std::set<std::pair<int, int>> edges;
    std::set<int> nodes;
    for (int v = 1; v <= n; ++v) nodes.insert(v);
    std::vector<bool> targeted(static_cast<size_t>(n) + 1, false);
    double total = 0.0;
    for (size_t p = 0; p < pairs.size(); ++p) {
      if (choice[p] == 0) continue;
      auto [i, j] = pairs[p];
      targeted[static_cast<size_t>(j)] = true;
      if (choice[p] == 1) {
        edges.emplace(i, j);
        total += score_f[p];
      } else {
        edges.emplace(j, i);
        total += score_b[p];
      }
    }
    bool valid = oracle_acyclic_toposort(nodes, edges) &&
                 oracle_reduction(nodes, edges) == edges;
    if (valid) {
      for (int j = 1; j <= n; ++j)
        if (!targeted[static_cast<size_t>(j)]) total += root_score[static_cast<size_t>(j)];
      best = std::max(best, total);
    }
    // next assignment
    size_t p = 0;
    while (p < choice.size() && choice[p] == 2) choice[p++] = 0;
    if (p == choice.size()) break;
    choice[p] += 1;
  }
  return best;
}

}  // namespace testutil

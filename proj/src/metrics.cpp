#include "evrel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace evrel {

Clustering Clustering::normalized(std::vector<std::vector<std::string>> clusters) {
  Clustering out;
  for (auto& c : clusters) {
    if (c.empty()) continue;
    std::sort(c.begin(), c.end());
    out.clusters.push_back(std::move(c));
  }
  std::sort(out.clusters.begin(), out.clusters.end());
  return out;
}

Clustering clustering_from_gold(const Document& doc) {
  std::vector<std::vector<std::string>> clusters;
  std::set<std::string> covered;
  if (doc.gold) {
    for (const auto& c : doc.gold->coref) {
      clusters.push_back(c);
      covered.insert(c.begin(), c.end());
    }
  }
  for (const auto& m : doc.mentions)
    if (!covered.count(m.id)) clusters.push_back({m.id});
  return Clustering::normalized(std::move(clusters));
}

Clustering clustering_from_partition(const Document& doc,
                                     const std::vector<std::vector<int>>& partition) {
  std::vector<std::vector<std::string>> clusters;
  for (const auto& group : partition) {
    std::vector<std::string> c;
    for (int i : group) c.push_back(doc.mention(i).id);
    clusters.push_back(std::move(c));
  }
  return Clustering::normalized(std::move(clusters));
}

namespace {

void check_universe(const Clustering& gold, const Clustering& system) {
  std::set<std::string> g, s;
  for (const auto& c : gold.clusters) g.insert(c.begin(), c.end());
  for (const auto& c : system.clusters) s.insert(c.begin(), c.end());
  if (g != s) {
    std::string missing, extra;
    for (const auto& id : g)
      if (!s.count(id)) missing += (missing.empty() ? "" : ",") + id;
    for (const auto& id : s)
      if (!g.count(id)) extra += (extra.empty() ? "" : ",") + id;
    throw MetricError("clusterings cover different mentions (missing from system: {" + missing +
                      "}, extra in system: {" + extra + "})");
  }
}

std::map<std::string, int> cluster_index(const Clustering& c) {
  std::map<std::string, int> idx;
  for (size_t k = 0; k < c.clusters.size(); ++k)
    for (const auto& id : c.clusters[k]) idx[id] = static_cast<int>(k);
  return idx;
}

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

double harmonic_f(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

double average_f(double b3_f, double ceafe_f, double muc_f, double blanc_f) {
  return (b3_f + ceafe_f + muc_f + blanc_f) / 4.0;
}

// ---------------------------------------------------------------------------
// MUC

MucCounts& MucCounts::operator+=(const MucCounts& o) {
  rn += o.rn;
  rd += o.rd;
  pn += o.pn;
  pd += o.pd;
  return *this;
}

namespace {

// Link-based numerator/denominator of one direction: sum over key clusters K
// of |K| - p(K), where p(K) is the number of response partitions K falls in.
void muc_direction(const Clustering& key, const Clustering& response, double& num, double& den) {
  auto ridx = cluster_index(response);
  for (const auto& k : key.clusters) {
    std::set<int> parts;
    for (const auto& id : k) parts.insert(ridx.at(id));
    num += static_cast<double>(k.size()) - static_cast<double>(parts.size());
    den += static_cast<double>(k.size()) - 1.0;
  }
}

}  // namespace

MucCounts muc_counts(const Clustering& gold, const Clustering& system) {
  check_universe(gold, system);
  MucCounts c;
  muc_direction(gold, system, c.rn, c.rd);
  muc_direction(system, gold, c.pn, c.pd);
  return c;
}

PRF finalize(const MucCounts& c) {
  PRF out;
  out.p = 100.0 * ratio(c.pn, c.pd);
  out.r = 100.0 * ratio(c.rn, c.rd);
  out.f = harmonic_f(out.p, out.r);
  return out;
}

// ---------------------------------------------------------------------------
// B3

B3Counts& B3Counts::operator+=(const B3Counts& o) {
  psum += o.psum;
  rsum += o.rsum;
  mentions += o.mentions;
  return *this;
}

B3Counts b3_counts(const Clustering& gold, const Clustering& system) {
  check_universe(gold, system);
  B3Counts c;
  auto gidx = cluster_index(gold);
  auto sidx = cluster_index(system);
  for (const auto& [id, gi] : gidx) {
    const auto& gc = gold.clusters[static_cast<size_t>(gi)];
    const auto& sc = system.clusters[static_cast<size_t>(sidx.at(id))];
    std::vector<std::string> overlap;
    std::set_intersection(gc.begin(), gc.end(), sc.begin(), sc.end(),
                          std::back_inserter(overlap));
    c.psum += static_cast<double>(overlap.size()) / static_cast<double>(sc.size());
    c.rsum += static_cast<double>(overlap.size()) / static_cast<double>(gc.size());
    c.mentions += 1;
  }
  return c;
}

PRF finalize(const B3Counts& c) {
  PRF out;
  out.p = 100.0 * ratio(c.psum, c.mentions);
  out.r = 100.0 * ratio(c.rsum, c.mentions);
  out.f = harmonic_f(out.p, out.r);
  return out;
}

// ---------------------------------------------------------------------------
// CEAF-E

CeafCounts& CeafCounts::operator+=(const CeafCounts& o) {
  phi += o.phi;
  gold_clusters += o.gold_clusters;
  system_clusters += o.system_clusters;
  return *this;
}

// Potentials-based assignment on the negated score matrix (cost-minimizing
// Jonker-Volgenant style, O(n^3)).
double max_assignment(const std::vector<std::vector<double>>& score) {
  int rows = static_cast<int>(score.size());
  int cols = rows ? static_cast<int>(score[0].size()) : 0;
  if (rows == 0 || cols == 0) return 0.0;
  int dim = std::max(rows, cols);
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(static_cast<size_t>(dim) + 1,
                                        std::vector<double>(static_cast<size_t>(dim) + 1, 0.0));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) cost[static_cast<size_t>(i) + 1][static_cast<size_t>(j) + 1] =
        -score[static_cast<size_t>(i)][static_cast<size_t>(j)];
  std::vector<double> u(static_cast<size_t>(dim) + 1), v(static_cast<size_t>(dim) + 1);
  std::vector<int> p(static_cast<size_t>(dim) + 1), way(static_cast<size_t>(dim) + 1);
  for (int i = 1; i <= dim; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(dim) + 1, kInf);
    std::vector<char> used(static_cast<size_t>(dim) + 1, 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      int i0 = p[static_cast<size_t>(j0)], j1 = 0;
      double delta = kInf;
      for (int j = 1; j <= dim; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        double cur = cost[static_cast<size_t>(i0)][static_cast<size_t>(j)] -
                     u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= dim; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= dim; ++j) {
    int i = p[static_cast<size_t>(j)];
    if (i >= 1 && i <= rows && j <= cols)
      total += score[static_cast<size_t>(i) - 1][static_cast<size_t>(j) - 1];
  }
  return total;
}

CeafCounts ceaf_counts(const Clustering& gold, const Clustering& system) {
  check_universe(gold, system);
  CeafCounts c;
  c.gold_clusters = static_cast<int>(gold.clusters.size());
  c.system_clusters = static_cast<int>(system.clusters.size());
  std::vector<std::vector<double>> phi4(gold.clusters.size(),
                                        std::vector<double>(system.clusters.size(), 0.0));
  for (size_t i = 0; i < gold.clusters.size(); ++i) {
    for (size_t j = 0; j < system.clusters.size(); ++j) {
      std::vector<std::string> overlap;
      std::set_intersection(gold.clusters[i].begin(), gold.clusters[i].end(),
                            system.clusters[j].begin(), system.clusters[j].end(),
                            std::back_inserter(overlap));
      phi4[i][j] = 2.0 * static_cast<double>(overlap.size()) /
                   static_cast<double>(gold.clusters[i].size() + system.clusters[j].size());
    }
  }
  c.phi = max_assignment(phi4);
  return c;
}

PRF finalize(const CeafCounts& c) {
  PRF out;
  out.p = 100.0 * ratio(c.phi, c.system_clusters);
  out.r = 100.0 * ratio(c.phi, c.gold_clusters);
  out.f = harmonic_f(out.p, out.r);
  return out;
}

// ---------------------------------------------------------------------------
// BLANC

BlancCounts& BlancCounts::operator+=(const BlancCounts& o) {
  rc += o.rc;
  cg += o.cg;
  cs += o.cs;
  rn += o.rn;
  ng += o.ng;
  ns += o.ns;
  return *this;
}

BlancCounts blanc_counts(const Clustering& gold, const Clustering& system) {
  check_universe(gold, system);
  BlancCounts c;
  auto gidx = cluster_index(gold);
  auto sidx = cluster_index(system);
  std::vector<std::string> mentions;
  for (const auto& [id, k] : gidx) {
    (void)k;
    mentions.push_back(id);
  }
  for (size_t a = 0; a < mentions.size(); ++a) {
    for (size_t b = a + 1; b < mentions.size(); ++b) {
      bool gl = gidx[mentions[a]] == gidx[mentions[b]];
      bool sl = sidx[mentions[a]] == sidx[mentions[b]];
      if (gl) c.cg += 1;
      if (sl) c.cs += 1;
      if (gl && sl) c.rc += 1;
      if (!gl) c.ng += 1;
      if (!sl) c.ns += 1;
      if (!gl && !sl) c.rn += 1;
    }
  }
  return c;
}

PRF finalize(const BlancCounts& c) {
  // a component whose link sets are empty on both sides is perfect; a lone
  // empty side yields 0 via the 0/0 -> 0 convention
  PRF link, non;
  if (c.cg == 0 && c.cs == 0) {
    link = {100.0, 100.0, 100.0};
  } else {
    link.p = 100.0 * ratio(c.rc, c.cs);
    link.r = 100.0 * ratio(c.rc, c.cg);
    link.f = harmonic_f(link.p, link.r);
  }
  if (c.ng == 0 && c.ns == 0) {
    non = {100.0, 100.0, 100.0};
  } else {
    non.p = 100.0 * ratio(c.rn, c.ns);
    non.r = 100.0 * ratio(c.rn, c.ng);
    non.f = harmonic_f(non.p, non.r);
  }
  return {(link.p + non.p) / 2.0, (link.r + non.r) / 2.0, (link.f + non.f) / 2.0};
}

// ---------------------------------------------------------------------------
// Sequencing score: reductions against closures

TempCounts& TempCounts::operator+=(const TempCounts& o) {
  pn += o.pn;
  pd += o.pd;
  rn += o.rn;
  rd += o.rd;
  return *this;
}

TempCounts tempeval_counts(const EventDag& gold, const EventDag& system) {
  if (!is_acyclic(gold)) throw MetricError("gold event graph is not acyclic");
  if (!is_acyclic(system)) throw MetricError("system event graph is not acyclic");
  EventDag gold_closed = transitive_closure(gold);
  EventDag gold_reduced = transitive_reduction(gold);
  EventDag sys_closed = transitive_closure(system);
  EventDag sys_reduced = transitive_reduction(system);
  TempCounts c;
  c.pd = static_cast<double>(sys_reduced.edges.size());
  for (const auto& e : sys_reduced.edges)
    if (gold_closed.edges.count(e)) c.pn += 1;
  c.rd = static_cast<double>(gold_reduced.edges.size());
  for (const auto& e : gold_reduced.edges)
    if (sys_closed.edges.count(e)) c.rn += 1;
  return c;
}

PRF finalize(const TempCounts& c) {
  PRF out;
  out.p = 100.0 * ratio(c.pn, c.pd);
  out.r = 100.0 * ratio(c.rn, c.rd);
  out.f = harmonic_f(out.p, out.r);
  return out;
}

// ---------------------------------------------------------------------------

PRF muc(const Clustering& gold, const Clustering& system) { return finalize(muc_counts(gold, system)); }
PRF b_cubed(const Clustering& gold, const Clustering& system) { return finalize(b3_counts(gold, system)); }
PRF ceaf_e(const Clustering& gold, const Clustering& system) { return finalize(ceaf_counts(gold, system)); }
PRF blanc(const Clustering& gold, const Clustering& system) { return finalize(blanc_counts(gold, system)); }
PRF tempeval(const EventDag& gold, const EventDag& system) { return finalize(tempeval_counts(gold, system)); }

// ---------------------------------------------------------------------------
// Baselines

Clustering baseline_singleton(const Document& doc) {
  std::vector<std::vector<std::string>> clusters;
  for (const auto& m : doc.mentions) clusters.push_back({m.id});
  return Clustering::normalized(std::move(clusters));
}

Clustering baseline_matching(const Document& doc) {
  std::map<std::pair<std::string, Realis>, std::vector<std::string>> groups;
  for (const auto& m : doc.mentions) groups[{m.type, m.realis}].push_back(m.id);
  std::vector<std::vector<std::string>> clusters;
  for (auto& [key, ids] : groups) {
    (void)key;
    clusters.push_back(std::move(ids));
  }
  return Clustering::normalized(std::move(clusters));
}

// ---------------------------------------------------------------------------
// Corpus-level reports

CorefReport score_coref(const std::vector<std::pair<Clustering, Clustering>>& gold_system,
                        Aggregation agg) {
  CorefReport report;
  if (agg == Aggregation::Micro) {
    MucCounts mc;
    B3Counts bc;
    CeafCounts cc;
    BlancCounts lc;
    for (const auto& [gold, system] : gold_system) {
      mc += muc_counts(gold, system);
      bc += b3_counts(gold, system);
      cc += ceaf_counts(gold, system);
      lc += blanc_counts(gold, system);
    }
    report.muc = finalize(mc);
    report.b3 = finalize(bc);
    report.ceaf_e = finalize(cc);
    report.blanc = finalize(lc);
  } else {
    auto add = [](PRF& acc, const PRF& x) {
      acc.p += x.p;
      acc.r += x.r;
      acc.f += x.f;
    };
    size_t n = gold_system.size();
    for (const auto& [gold, system] : gold_system) {
      add(report.muc, muc(gold, system));
      add(report.b3, b_cubed(gold, system));
      add(report.ceaf_e, ceaf_e(gold, system));
      add(report.blanc, blanc(gold, system));
    }
    if (n > 0) {
      auto scale = [&](PRF& x) {
        x.p /= static_cast<double>(n);
        x.r /= static_cast<double>(n);
        x.f /= static_cast<double>(n);
      };
      scale(report.muc);
      scale(report.b3);
      scale(report.ceaf_e);
      scale(report.blanc);
    }
  }
  report.avg = average_f(report.b3.f, report.ceaf_e.f, report.muc.f, report.blanc.f);
  return report;
}

PRF score_sequencing(const std::vector<std::pair<EventDag, EventDag>>& gold_system,
                     Aggregation agg) {
  if (agg == Aggregation::Micro) {
    TempCounts tc;
    for (const auto& [gold, system] : gold_system) tc += tempeval_counts(gold, system);
    return finalize(tc);
  }
  PRF acc;
  for (const auto& [gold, system] : gold_system) {
    PRF x = tempeval(gold, system);
    acc.p += x.p;
    acc.r += x.r;
    acc.f += x.f;
  }
  size_t n = gold_system.size();
  if (n > 0) {
    acc.p /= static_cast<double>(n);
    acc.r /= static_cast<double>(n);
    acc.f /= static_cast<double>(n);
  }
  return acc;
}

namespace {

std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

void print_row(std::ostringstream& out, const std::string& name, const PRF& x) {
  out << name;
  for (size_t k = name.size(); k < 10; ++k) out << ' ';
  auto cell = [&](double v) {
    std::string s = fmt2(v);
    for (size_t k = s.size(); k < 8; ++k) out << ' ';
    out << s;
  };
  cell(x.p);
  cell(x.r);
  cell(x.f);
  out << "\n";
}

}  // namespace

std::string format_coref_report(const CorefReport& r) {
  std::ostringstream out;
  out << "metric            P       R      F1\n";
  print_row(out, "B3", r.b3);
  print_row(out, "CEAF-E", r.ceaf_e);
  print_row(out, "MUC", r.muc);
  print_row(out, "BLANC", r.blanc);
  out << "AVG " << fmt2(r.avg) << "\n";
  return out.str();
}

std::string format_sequencing_report(const PRF& r) {
  std::ostringstream out;
  out << "metric            P       R      F1\n";
  print_row(out, "TempEval", r);
  return out.str();
}

}  // namespace evrel

#include "evrel/features.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>

namespace evrel {

void FeatureVector::add(const std::string& key, double value) {
  if (value == 0.0) return;
  double& slot = entries[key];
  slot += value;
  if (slot == 0.0) entries.erase(key);
}

FeatureVector& FeatureVector::operator+=(const FeatureVector& other) {
  for (const auto& [k, v] : other.entries) add(k, v);
  return *this;
}

FeatureVector& FeatureVector::operator-=(const FeatureVector& other) {
  for (const auto& [k, v] : other.entries) add(k, -v);
  return *this;
}

double FeatureVector::norm_sq() const {
  double s = 0.0;
  for (const auto& [k, v] : entries) {
    (void)k;
    s += v * v;
  }
  return s;
}

double WeightVector::get(const std::string& key) const {
  auto it = weights.find(key);
  return it == weights.end() ? 0.0 : it->second;
}

double WeightVector::dot(const FeatureVector& f) const {
  double s = 0.0;
  for (const auto& [k, v] : f.entries) s += get(k) * v;
  return s;
}

void WeightVector::apply(const FeatureVector& delta, double tau) {
  for (const auto& [k, v] : delta.entries) {
    Accum& a = accum[k];
    double& w = weights[k];
    a.total += w * static_cast<double>(steps - 1 - a.last);
    a.last = steps - 1;
    w += tau * v;
    if (w == 0.0) weights.erase(k);
  }
}

WeightVector WeightVector::averaged() const {
  WeightVector out;
  if (steps == 0) return out;
  for (const auto& [k, w] : weights) {
    double total = w * static_cast<double>(steps);
    auto it = accum.find(k);
    if (it != accum.end())
      total = it->second.total + w * static_cast<double>(steps - it->second.last);
    double avg = total / static_cast<double>(steps);
    if (avg != 0.0) out.weights[k] = avg;
  }
  // keys that decayed back to exactly zero still carry average mass
  for (const auto& [k, a] : accum) {
    if (weights.count(k)) continue;
    double avg = a.total / static_cast<double>(steps);
    if (avg != 0.0) out.weights[k] = avg;
  }
  return out;
}

double arc_score(const WeightVector& w, const FeatureVector& f) { return w.dot(f); }

// ---------------------------------------------------------------------------
// Schema table

SchemaTable SchemaTable::from_entries(std::map<std::string, std::string> entries) {
  SchemaTable t;
  t.entries_ = std::move(entries);
  return t;
}

SchemaTable SchemaTable::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open schema table: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw CorpusError(path + ":" + std::to_string(lineno) +
                        ": expected 'lemma<TAB>cluster_id'");
    entries[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return from_entries(std::move(entries));
}

const SchemaTable& SchemaTable::builtin() {
  static const SchemaTable table = from_entries({
      {"order", "dining"},    {"request", "dining"},  {"eat", "dining"},
      {"dine", "dining"},     {"pay", "dining"},      {"tip", "dining"},
      {"leave", "dining"},    {"attack", "conflict"}, {"bomb", "conflict"},
      {"fire", "conflict"},   {"shoot", "conflict"},  {"kill", "conflict"},
      {"die", "conflict"},    {"wound", "conflict"},  {"injure", "conflict"},
      {"arrest", "justice"},  {"charge", "justice"},  {"try", "justice"},
      {"convict", "justice"}, {"sentence", "justice"},{"jail", "justice"},
      {"extradite", "justice"}, {"acquit", "justice"},
      {"buy", "commerce"},    {"sell", "commerce"},   {"ship", "commerce"},
      {"deliver", "commerce"},{"refund", "commerce"},
      {"depart", "travel"},   {"fly", "travel"},      {"land", "travel"},
      {"arrive", "travel"},   {"board", "travel"},    {"travel", "travel"},
      {"hire", "employment"}, {"promote", "employment"}, {"resign", "employment"},
      {"retire", "employment"}, {"quit", "employment"},
  });
  return table;
}

bool SchemaTable::same_cluster(const std::string& a, const std::string& b) const {
  auto ia = entries_.find(a);
  if (ia == entries_.end()) return false;
  auto ib = entries_.find(b);
  return ib != entries_.end() && ia->second == ib->second;
}

// ---------------------------------------------------------------------------
// Extraction helpers

namespace {

const std::vector<std::string> kFamilies = {
    // coreference
    "Head", "Type", "Realis", "POS", "ExactMatch", "Distance", "Frame", "Syntactic",
    // sequencing atoms
    "HeadPair", "TypePair", "Schema", "SharedArg", "Dependency", "FunctionWords",
    "MentionType", "Sentence", "Temporal", "Ordering", "TemporalOrder",
    // shared
    "Root"};

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), '|', '/');
  return s;
}

const Token& head_token(const Document& doc, const EventMention& m) {
  return doc.sentences[static_cast<size_t>(m.sentence)].tokens[static_cast<size_t>(m.head)];
}

std::string distance_bucket(int d) {
  if (d <= 3) return std::to_string(d);
  if (d <= 7) return "4-7";
  return "8+";
}

// Document-level token position of a (sentence, token) pair.
int doc_position(const Document& doc, int sentence, int token) {
  int off = 0;
  for (int s = 0; s < sentence; ++s)
    off += static_cast<int>(doc.sentences[static_cast<size_t>(s)].tokens.size());
  return off + token;
}

const Token* token_at(const Document& doc, int pos) {
  for (const auto& sent : doc.sentences) {
    if (pos < static_cast<int>(sent.tokens.size())) return &sent.tokens[static_cast<size_t>(pos)];
    pos -= static_cast<int>(sent.tokens.size());
  }
  return nullptr;
}

int doc_token_count(const Document& doc) {
  int n = 0;
  for (const auto& sent : doc.sentences) n += static_cast<int>(sent.tokens.size());
  return n;
}

std::vector<std::string> window_texts(const Document& doc, const EventMention& m) {
  int center = doc_position(doc, m.sentence, m.head);
  int total = doc_token_count(doc);
  std::vector<std::string> out;
  for (int p = std::max(0, center - 2); p <= std::min(total - 1, center + 2); ++p)
    out.push_back(token_at(doc, p)->text);
  return out;
}

bool is_content_pos(const std::string& pos) {
  return pos.rfind("NN", 0) == 0 || pos.rfind("VB", 0) == 0 || pos.rfind("JJ", 0) == 0 ||
         pos.rfind("RB", 0) == 0 || pos == "NOUN" || pos == "VERB" || pos == "ADJ" ||
         pos == "ADV" || pos == "PROPN";
}

// Frame whose target is the mention's head token; null when the frames layer
// is absent on the mention's sentence.
struct FrameInfo {
  bool layer_present = false;
  const Frame* frame = nullptr;  // may be null with layer present
};

FrameInfo frame_of(const Document& doc, const EventMention& m) {
  const Sentence& sent = doc.sentences[static_cast<size_t>(m.sentence)];
  FrameInfo info;
  if (!sent.frames) return info;
  info.layer_present = true;
  for (const Frame& f : *sent.frames)
    if (f.target == m.head) {
      info.frame = &f;
      break;
    }
  return info;
}

std::string arg_text(const Document& doc, int sentence, const TokenSpan& span) {
  const Sentence& sent = doc.sentences[static_cast<size_t>(sentence)];
  std::string out;
  for (int t = span.begin; t < span.end && t < static_cast<int>(sent.tokens.size()); ++t) {
    if (!out.empty()) out += " ";
    out += sent.tokens[static_cast<size_t>(t)].text;
  }
  return out;
}

// Shortest undirected dependency path between two tokens of one sentence,
// rendered with per-edge direction markers; empty when there is no path.
std::string dependency_path(const Sentence& sent, int from, int to, int cap) {
  if (!sent.dependencies) return "";
  std::map<int, std::vector<std::pair<int, std::string>>> adj;
  for (const auto& d : *sent.dependencies) {
    adj[d.head].emplace_back(d.dep, ">" + d.label);  // head to dependent
    adj[d.dep].emplace_back(d.head, "<" + d.label);  // dependent to head
  }
  std::map<int, std::pair<int, std::string>> back;  // node -> (prev, step)
  std::deque<int> q{from};
  std::set<int> seen{from};
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    if (u == to) break;
    for (const auto& [v, step] : adj[u]) {
      if (!seen.insert(v).second) continue;
      back[v] = {u, step};
      q.push_back(v);
    }
  }
  if (!seen.count(to) || from == to) return "";
  std::vector<std::string> steps;
  for (int v = to; v != from; v = back[v].first) steps.push_back(back[v].second);
  std::reverse(steps.begin(), steps.end());
  if (static_cast<int>(steps.size()) > cap) return "long";
  std::string out;
  for (const auto& s : steps) out += s;
  return out;
}

bool is_ancestor(const Sentence& sent, int anc, int node) {
  std::map<int, int> head_of;
  for (const auto& d : *sent.dependencies) head_of[d.dep] = d.head;
  std::set<int> seen;
  int cur = node;
  while (head_of.count(cur) && seen.insert(cur).second) {
    cur = head_of[cur];
    if (cur == anc) return true;
  }
  return false;
}

// Document position of the temporal expression nearest to the mention's head
// within its sentence, or -1 when the layer is absent or empty.
int nearest_time_position(const Document& doc, const EventMention& m) {
  const Sentence& sent = doc.sentences[static_cast<size_t>(m.sentence)];
  if (!sent.time_spans || sent.time_spans->empty()) return -1;
  int best = -1, best_dist = 1 << 30;
  for (const auto& span : *sent.time_spans) {
    int d = std::abs(span.begin - m.head);
    if (d < best_dist) {
      best_dist = d;
      best = span.begin;
    }
  }
  return doc_position(doc, m.sentence, best);
}

}  // namespace

const std::vector<std::string>& known_families() { return kFamilies; }

// ---------------------------------------------------------------------------
// Coreference features (pair families per the classic head/type/realis table)

FeatureVector coref_features(const Document& doc, int i, int j, const FeatureConfig& config) {
  const EventMention& mi = doc.mention(i);
  const EventMention& mj = doc.mention(j);
  const Token& hi = head_token(doc, mi);
  const Token& hj = head_token(doc, mj);
  FeatureVector f;

  if (config.on("Head")) {
    f.add("Head|word|" + sanitize(hi.text) + "|" + sanitize(hj.text));
    f.add("Head|lemma|" + sanitize(hi.lemma) + "|" + sanitize(hj.lemma));
    if (hi.text == hj.text) f.add("Head|same_word");
    if (hi.lemma == hj.lemma) f.add("Head|same_lemma");
  }
  if (config.on("Type")) {
    f.add("Type|pair|" + sanitize(mi.type) + "|" + sanitize(mj.type));
    if (mi.type == mj.type) f.add("Type|same");
  }
  if (config.on("Realis")) {
    f.add("Realis|pair|" + to_string(mi.realis) + "|" + to_string(mj.realis));
    if (mi.realis == mj.realis) f.add("Realis|same");
  }
  if (config.on("POS")) {
    f.add("POS|pair|" + sanitize(hi.pos) + "|" + sanitize(hj.pos));
    if (hi.pos == hj.pos) f.add("POS|same");
  }
  if (config.on("ExactMatch")) {
    if (window_texts(doc, mi) == window_texts(doc, mj)) f.add("ExactMatch|window");
  }
  if (config.on("Distance")) {
    f.add("Distance|" + distance_bucket(std::abs(mj.sentence - mi.sentence)));
  }
  if (config.on("Frame")) {
    FrameInfo fi = frame_of(doc, mi);
    FrameInfo fj = frame_of(doc, mj);
    if (fi.layer_present && fj.layer_present) {
      std::string ni = fi.frame ? fi.frame->name : "-";
      std::string nj = fj.frame ? fj.frame->name : "-";
      f.add("Frame|pair|" + sanitize(ni) + "|" + sanitize(nj));
      if (fi.frame && fj.frame && ni == nj) f.add("Frame|same");
    }
  }
  if (config.on("Syntactic")) {
    if (mi.sentence == mj.sentence) {
      const Sentence& sent = doc.sentences[static_cast<size_t>(mi.sentence)];
      if (sent.dependencies &&
          (is_ancestor(sent, mi.head, mj.head) || is_ancestor(sent, mj.head, mi.head)))
        f.add("Syntactic|ancestor");
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Sequencing features: cross product of three atom sets

FeatureVector sequencing_features(const Document& doc, int i, int j, ArcLabel direction,
                                  const FeatureConfig& config) {
  const EventMention& mi = doc.mention(i);
  const EventMention& mj = doc.mention(j);
  const Token& hi = head_token(doc, mi);
  const Token& hj = head_token(doc, mj);
  bool forward = direction == ArcLabel::AfterForward;
  // script-order orientation: parent event first
  const EventMention& parent = forward ? mi : mj;
  const EventMention& child = forward ? mj : mi;
  const Token& hp = head_token(doc, parent);
  const Token& hc = head_token(doc, child);
  std::string dir = forward ? "forward" : "backward";

  std::set<std::string> surface, discourse, ordering;

  // 1. surface-based script compatibility
  if (config.on("HeadPair"))
    surface.insert("hw=" + sanitize(hp.lemma) + "," + sanitize(hc.lemma));
  if (config.on("TypePair"))
    surface.insert("type=" + sanitize(parent.type) + "," + sanitize(child.type));
  if (config.on("Schema") && config.schema.same_cluster(hi.lemma, hj.lemma))
    surface.insert("schema_same");
  if (config.on("SharedArg")) {
    FrameInfo fi = frame_of(doc, mi);
    FrameInfo fj = frame_of(doc, mj);
    if (fi.frame && fj.frame) {
      bool shared = false;
      for (const auto& ai : fi.frame->args)
        for (const auto& aj : fj.frame->args) {
          std::string ti = arg_text(doc, mi.sentence, ai.span);
          if (!ti.empty() && ti == arg_text(doc, mj.sentence, aj.span)) shared = true;
        }
      if (shared) {
        surface.insert("sharedarg");
        surface.insert("sharedargframe=" + sanitize(fi.frame->name));
        surface.insert("sharedargframe=" + sanitize(fj.frame->name));
      }
    }
  }

  // 2. discourse-based script compatibility
  if (config.on("Dependency") && mi.sentence == mj.sentence) {
    const Sentence& sent = doc.sentences[static_cast<size_t>(mi.sentence)];
    std::string path = dependency_path(sent, mi.head, mj.head, 4);
    if (!path.empty()) discourse.insert("deppath=" + sanitize(path));
  }
  if (config.on("FunctionWords")) {
    int from = doc_position(doc, mi.sentence, mi.span.end - 1);
    int to = doc_position(doc, mj.sentence, mj.span.begin);
    for (int p = from + 1; p < to; ++p) {
      const Token* t = token_at(doc, p);
      if (t && !is_content_pos(t->pos)) {
        std::string w = t->text;
        std::transform(w.begin(), w.end(), w.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        discourse.insert("fw=" + sanitize(w));
      }
    }
  }
  if (config.on("MentionType")) {
    for (int k = i + 1; k < j; ++k)
      discourse.insert("midtype=" + sanitize(doc.mention(k).type));
  }
  if (config.on("Sentence"))
    discourse.insert("sentdist=" + distance_bucket(std::abs(mj.sentence - mi.sentence)));
  if (config.on("Temporal")) {
    const Sentence& si = doc.sentences[static_cast<size_t>(mi.sentence)];
    const Sentence& sj = doc.sentences[static_cast<size_t>(mj.sentence)];
    if (si.time_spans && sj.time_spans) {
      discourse.insert("tmp=" + std::string(si.time_spans->empty() ? "0" : "1") + "," +
                       (sj.time_spans->empty() ? "0" : "1"));
    }
  }

  // 3. event ordering; every atom carries the proposed direction so a
  // direction flip changes every emitted key
  if (config.on("Ordering")) ordering.insert("ord=" + dir);
  if (config.on("TemporalOrder")) {
    int tp = nearest_time_position(doc, parent);
    int tc = nearest_time_position(doc, child);
    if (tp >= 0 && tc >= 0) {
      std::string rel = tp < tc ? "before" : (tp > tc ? "after" : "same");
      ordering.insert("tord=" + dir + "," + rel);
    }
  }

  FeatureVector f;
  std::vector<const std::set<std::string>*> sets;
  for (const auto* s : {&surface, &discourse, &ordering})
    if (!s->empty()) sets.push_back(s);
  if (sets.empty()) return f;
  std::vector<std::string> parts(sets.size());
  std::function<void(size_t)> emit = [&](size_t depth) {
    if (depth == sets.size()) {
      std::string key = "Seq";
      for (const auto& p : parts) key += "|" + p;
      f.add(key);
      return;
    }
    for (const auto& atom : *sets[depth]) {
      parts[depth] = atom;
      emit(depth + 1);
    }
  };
  emit(0);
  return f;
}

FeatureVector root_features(const Document& doc, int j, Task task, const FeatureConfig& config) {
  FeatureVector f;
  if (!config.on("Root")) return f;
  const EventMention& m = doc.mention(j);
  f.add("Root|bias|" + to_string(task));
  f.add("Root|type|" + sanitize(m.type));
  f.add("Root|realis|" + to_string(m.realis));
  return f;
}

FeatureVector arc_features(const Document& doc, const Arc& arc, Task task,
                           const FeatureConfig& config) {
  switch (arc.label) {
    case ArcLabel::Root:
      return root_features(doc, arc.target, task, config);
    case ArcLabel::Coref:
      return coref_features(doc, arc.source, arc.target, config);
    case ArcLabel::AfterForward:
    case ArcLabel::AfterBackward:
      return sequencing_features(doc, arc.source, arc.target, arc.label, config);
  }
  return {};
}

FeatureVector graph_features(const Document& doc, const RelationGraph& g,
                             const FeatureConfig& config) {
  FeatureVector f;
  for (const Arc& a : g.arcs) f += arc_features(doc, a, g.task, config);
  return f;
}

double graph_score(const Document& doc, const RelationGraph& g, const WeightVector& w,
                   const FeatureConfig& config) {
  double s = 0.0;
  for (const Arc& a : g.arcs) s += w.dot(arc_features(doc, a, g.task, config));
  return s;
}

}  // namespace evrel

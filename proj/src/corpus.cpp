#include "evrel/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "json.hpp"

namespace evrel {

using nlohmann::json;

std::string to_string(Realis r) {
  switch (r) {
    case Realis::Actual: return "Actual";
    case Realis::Generic: return "Generic";
    case Realis::Other: return "Other";
  }
  return "Actual";
}

Realis realis_from_string(const std::string& s) {
  if (s == "Actual") return Realis::Actual;
  if (s == "Generic") return Realis::Generic;
  if (s == "Other") return Realis::Other;
  throw CorpusError("realis must be one of Actual/Generic/Other, got '" + s + "'");
}

const EventMention& Document::mention(int discourse_index) const {
  return mentions.at(static_cast<size_t>(discourse_index) - 1);
}

int Document::mention_index(const std::string& id) const {
  for (const auto& m : mentions)
    if (m.id == id) return m.discourse_index;
  throw CorpusError("document " + doc_id + ": unknown mention id '" + id + "'");
}

// ---------------------------------------------------------------------------
// JSON bridge

static json span_to_json(const TokenSpan& s) { return json::array({s.begin, s.end}); }

static TokenSpan span_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw CorpusError("span must be a [begin, end] pair");
  return {j[0].get<int>(), j[1].get<int>()};
}

std::string document_to_line(const Document& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["sentences"] = json::array();
  for (const auto& sent : doc.sentences) {
    json js;
    js["tokens"] = json::array();
    for (const auto& t : sent.tokens)
      js["tokens"].push_back({{"text", t.text}, {"lemma", t.lemma}, {"pos", t.pos}});
    if (sent.dependencies) {
      js["dependencies"] = json::array();
      for (const auto& d : *sent.dependencies)
        js["dependencies"].push_back(json::array({d.head, d.dep, d.label}));
    }
    if (sent.frames) {
      js["frames"] = json::array();
      for (const auto& f : *sent.frames) {
        json jf;
        jf["name"] = f.name;
        jf["target"] = f.target;
        jf["args"] = json::array();
        for (const auto& a : f.args)
          jf["args"].push_back(json::array({a.role, a.span.begin, a.span.end}));
        js["frames"].push_back(jf);
      }
    }
    if (sent.time_spans) {
      js["time_spans"] = json::array();
      for (const auto& s : *sent.time_spans) js["time_spans"].push_back(span_to_json(s));
    }
    j["sentences"].push_back(js);
  }
  j["mentions"] = json::array();
  for (const auto& m : doc.mentions) {
    j["mentions"].push_back({{"id", m.id},
                             {"sentence", m.sentence},
                             {"span", span_to_json(m.span)},
                             {"head", m.head},
                             {"type", m.type},
                             {"realis", to_string(m.realis)}});
  }
  if (doc.gold) {
    j["coref"] = doc.gold->coref;
    j["after"] = json::array();
    for (const auto& [a, b] : doc.gold->after) j["after"].push_back(json::array({a, b}));
    j["subevent"] = json::array();
    for (const auto& [a, b] : doc.gold->subevent) j["subevent"].push_back(json::array({a, b}));
  }
  return j.dump();
}

Document document_from_line(const std::string& line) {
  json j = json::parse(line);
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  int si = 0;
  for (const auto& js : j.at("sentences")) {
    Sentence sent;
    sent.index = si++;
    int ti = 0;
    for (const auto& jt : js.at("tokens")) {
      Token t;
      t.index = ti++;
      t.text = jt.at("text").get<std::string>();
      t.lemma = jt.at("lemma").get<std::string>();
      t.pos = jt.at("pos").get<std::string>();
      sent.tokens.push_back(std::move(t));
    }
    if (js.contains("dependencies")) {
      std::vector<Dependency> deps;
      for (const auto& jd : js["dependencies"]) {
        if (!jd.is_array() || jd.size() != 3)
          throw CorpusError("dependency must be a [head, dep, label] triple");
        deps.push_back({jd[0].get<int>(), jd[1].get<int>(), jd[2].get<std::string>()});
      }
      sent.dependencies = std::move(deps);
    }
    if (js.contains("frames")) {
      std::vector<Frame> frames;
      for (const auto& jf : js["frames"]) {
        Frame f;
        f.name = jf.at("name").get<std::string>();
        f.target = jf.at("target").get<int>();
        if (jf.contains("args")) {
          for (const auto& ja : jf["args"]) {
            if (!ja.is_array() || ja.size() != 3)
              throw CorpusError("frame arg must be a [role, begin, end] triple");
            f.args.push_back({ja[0].get<std::string>(), {ja[1].get<int>(), ja[2].get<int>()}});
          }
        }
        frames.push_back(std::move(f));
      }
      sent.frames = std::move(frames);
    }
    if (js.contains("time_spans")) {
      std::vector<TokenSpan> spans;
      for (const auto& jt : js["time_spans"]) spans.push_back(span_from_json(jt));
      sent.time_spans = std::move(spans);
    }
    doc.sentences.push_back(std::move(sent));
  }
  int di = 0;
  for (const auto& jm : j.at("mentions")) {
    EventMention m;
    m.id = jm.at("id").get<std::string>();
    m.sentence = jm.at("sentence").get<int>();
    m.span = span_from_json(jm.at("span"));
    m.head = jm.at("head").get<int>();
    m.type = jm.at("type").get<std::string>();
    try {
      m.realis = realis_from_string(jm.at("realis").get<std::string>());
    } catch (const CorpusError& e) {
      throw CorpusError("mention " + m.id + ": " + e.what());
    }
    m.discourse_index = ++di;
    doc.mentions.push_back(std::move(m));
  }
  if (j.contains("coref") || j.contains("after") || j.contains("subevent")) {
    GoldAnnotation gold;
    if (j.contains("coref"))
      gold.coref = j["coref"].get<std::vector<std::vector<std::string>>>();
    auto read_pairs = [](const json& arr, const char* what) {
      std::vector<IdPair> out;
      for (const auto& jp : arr) {
        if (!jp.is_array() || jp.size() != 2)
          throw CorpusError(std::string(what) + " link must be an [src, dst] pair");
        out.emplace_back(jp[0].get<std::string>(), jp[1].get<std::string>());
      }
      return out;
    };
    if (j.contains("after")) gold.after = read_pairs(j["after"], "after");
    if (j.contains("subevent")) gold.subevent = read_pairs(j["subevent"], "subevent");
    doc.gold = std::move(gold);
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

// Union-find over mention ids for event-level views of the gold annotation.
class IdUnionFind {
 public:
  explicit IdUnionFind(const Document& doc) {
    for (const auto& m : doc.mentions) parent_[m.id] = m.id;
    if (doc.gold) {
      for (const auto& cluster : doc.gold->coref)
        for (size_t k = 1; k < cluster.size(); ++k) unite(cluster[0], cluster[k]);
    }
  }
  std::string find(const std::string& id) {
    auto it = parent_.find(id);
    if (it == parent_.end()) throw CorpusError("unknown mention id '" + id + "'");
    if (it->second == id) return id;
    std::string root = find(it->second);
    it->second = root;
    return root;
  }
  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra == rb) return;
    // keep the lexicographically smallest id as the canonical event id
    if (rb < ra) std::swap(ra, rb);
    parent_[rb] = ra;
  }

 private:
  std::unordered_map<std::string, std::string> parent_;
};

}  // namespace

void validate_document(const Document& doc) {
  auto fail = [&](const std::string& msg) {
    throw CorpusError("document " + doc.doc_id + ": " + msg);
  };

  for (const auto& sent : doc.sentences) {
    int n = static_cast<int>(sent.tokens.size());
    for (const auto& t : sent.tokens)
      if (t.text.empty())
        fail("sentence " + std::to_string(sent.index) + ": empty token text at index " +
             std::to_string(t.index));
    if (sent.dependencies) {
      for (const auto& d : *sent.dependencies)
        if (d.head < 0 || d.head >= n || d.dep < 0 || d.dep >= n)
          fail("sentence " + std::to_string(sent.index) +
               ": dependency references missing token (" + std::to_string(d.head) + "," +
               std::to_string(d.dep) + ")");
    }
    if (sent.frames) {
      for (const auto& f : *sent.frames) {
        if (f.target < 0 || f.target >= n)
          fail("sentence " + std::to_string(sent.index) + ": frame '" + f.name +
               "' targets missing token " + std::to_string(f.target));
        for (const auto& a : f.args)
          if (a.span.begin < 0 || a.span.end > n || a.span.begin >= a.span.end)
            fail("sentence " + std::to_string(sent.index) + ": frame '" + f.name +
                 "' has an out-of-range argument span");
      }
    }
    if (sent.time_spans) {
      for (const auto& s : *sent.time_spans)
        if (s.begin < 0 || s.end > n || s.begin >= s.end)
          fail("sentence " + std::to_string(sent.index) + ": time span out of range");
    }
  }

  std::set<std::string> ids;
  const EventMention* prev = nullptr;
  int expect = 1;
  for (const auto& m : doc.mentions) {
    if (m.id.empty()) fail("mention with empty id");
    if (!ids.insert(m.id).second) fail("duplicate mention id '" + m.id + "'");
    if (m.sentence < 0 || m.sentence >= static_cast<int>(doc.sentences.size()))
      fail("mention " + m.id + ": sentence index out of range");
    int n = static_cast<int>(doc.sentences[m.sentence].tokens.size());
    if (m.span.begin < 0 || m.span.end > n || m.span.begin >= m.span.end)
      fail("mention " + m.id + ": token span out of range or empty");
    if (m.head < 0 || m.head >= n)
      fail("mention " + m.id + ": head token index out of range");
    if (m.type.empty()) fail("mention " + m.id + ": empty event type");
    if (m.discourse_index != expect++)
      fail("mention " + m.id + ": discourse index not contiguous from 1");
    if (prev) {
      auto key = [](const EventMention& x) {
        return std::tuple(x.sentence, x.span.begin, x.span.end);
      };
      if (key(*prev) == key(m))
        fail("mentions " + prev->id + " and " + m.id + " have identical spans (discourse order tie)");
      if (key(m) < key(*prev))
        fail("mention " + m.id + " is out of discourse order (after " + prev->id + ")");
    }
    prev = &m;
  }

  if (!doc.gold) return;
  const GoldAnnotation& gold = *doc.gold;

  std::set<std::string> clustered;
  for (const auto& cluster : gold.coref) {
    for (const auto& id : cluster) {
      if (!ids.count(id)) fail("coref cluster references unknown mention '" + id + "'");
      if (!clustered.insert(id).second)
        fail("coref clusters are not disjoint: mention '" + id + "' appears twice");
    }
  }
  for (const auto& links : {gold.after, gold.subevent}) {
    for (const auto& [a, b] : links) {
      if (!ids.count(a)) fail("relation link references unknown mention '" + a + "'");
      if (!ids.count(b)) fail("relation link references unknown mention '" + b + "'");
    }
  }

  // Event-level view of the after links: self-loops and cycles are invalid.
  IdUnionFind uf(doc);
  std::map<std::string, std::vector<std::pair<std::string, const IdPair*>>> adj;
  for (const auto& link : gold.after) {
    std::string ea = uf.find(link.first), eb = uf.find(link.second);
    if (ea == eb) {
      std::string members;
      for (const auto& cluster : gold.coref) {
        if (std::find(cluster.begin(), cluster.end(), link.first) != cluster.end()) {
          for (const auto& id : cluster) members += (members.empty() ? "" : ",") + id;
          break;
        }
      }
      fail("after link " + link.first + "->" + link.second +
           " connects coreferent mentions (cluster {" + members + "})");
    }
    adj[ea].emplace_back(eb, &link);
  }
  // DFS cycle detection; on a cycle, report the annotation links along it.
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  std::vector<std::pair<std::string, const IdPair*>> stack;
  auto describe = [](const IdPair* l) { return l->first + "->" + l->second; };
  std::function<void(const std::string&)> dfs = [&](const std::string& u) {
    color[u] = 1;
    for (const auto& [v, link] : adj[u]) {
      if (color[v] == 1) {
        std::string msg = "gold after links form an event-level cycle: " + describe(link);
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          msg += ", " + describe(it->second);
          if (it->first == v) break;
        }
        fail(msg);
      }
      if (color[v] == 0) {
        stack.emplace_back(u, link);
        dfs(v);
        stack.pop_back();
      }
    }
    color[u] = 2;
  };
  for (const auto& [node, edges] : adj) {
    (void)edges;
    if (color[node] == 0) dfs(node);
  }
}

// ---------------------------------------------------------------------------
// File I/O

std::vector<Document> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file: " + path);
  std::vector<Document> docs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Document doc;
    try {
      doc = document_from_line(line);
    } catch (const json::exception& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": parse error: " + e.what());
    } catch (const CorpusError& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    try {
      validate_document(doc);
    } catch (const CorpusError& e) {
      throw CorpusError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_corpus(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot open file for writing: " + path);
  for (const auto& doc : docs) out << document_to_line(doc) << "\n";
  if (!out) throw CorpusError("I/O failure while writing: " + path);
}

std::string event_of(const Document& doc, const std::string& mention_id) {
  doc.mention_index(mention_id);  // throws on unknown id
  if (!doc.gold) return mention_id;
  IdUnionFind uf(doc);
  return uf.find(mention_id);
}

}  // namespace evrel

#include "evrel/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "json.hpp"

namespace evrel {

using nlohmann::json;

namespace {

// Thin wrappers over the raw engine so draws stay deterministic and
// independent of standard-library distribution implementations.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(unsigned long seed) : engine(seed) {}
  size_t index(size_t n) { return n == 0 ? 0 : static_cast<size_t>(engine() % n); }
  double real() { return static_cast<double>(engine() >> 11) / 9007199254740992.0; }
  bool chance(double p) { return real() < p; }
};

const std::vector<std::pair<const char*, const char*>> kFillers = {
    {"the", "DT"}, {"a", "DT"}, {"on", "IN"}, {"of", "IN"},
    {"and", "CC"}, {"it", "PRP"}, {"to", "TO"}, {"in", "IN"}};
const std::vector<const char*> kNouns = {"crowd", "team", "report", "city", "group"};
const std::vector<const char*> kActors = {"alice", "bob", "carol", "dave", "erin"};

std::string script_of_type(const std::string& type) {
  auto dot = type.find('.');
  return dot == std::string::npos ? type : type.substr(0, dot);
}

}  // namespace

void ScriptGrammar::validate() const {
  if (scripts.empty()) throw CorpusError("grammar has no scripts");
  for (const auto& s : scripts) {
    if (s.events.empty()) throw CorpusError("script '" + s.name + "' has no events");
    for (const auto& t : s.events) {
      auto it = lexicon.find(t);
      if (it == lexicon.end() || it->second.empty())
        throw CorpusError("event type '" + t + "' has no lemmas in the lexicon");
    }
  }
  for (const auto& [type, lemmas] : lexicon)
    if (lemmas.empty()) throw CorpusError("event type '" + type + "' has no lemmas");
  for (double p : {coref_repeat, interleave, distractor})
    if (p < 0.0 || p > 1.0) throw CorpusError("grammar probabilities must be in [0,1]");
}

ScriptGrammar ScriptGrammar::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open grammar file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CorpusError(path + ": grammar parse error: " + std::string(e.what()));
  }
  ScriptGrammar g;
  for (const auto& js : j.at("scripts")) {
    Script s;
    s.name = js.at("name").get<std::string>();
    s.events = js.at("events").get<std::vector<std::string>>();
    g.scripts.push_back(std::move(s));
  }
  g.lexicon = j.at("lexicon").get<std::map<std::string, std::vector<std::string>>>();
  if (j.contains("noise")) {
    const json& n = j["noise"];
    g.coref_repeat = n.value("coref_repeat", 0.0);
    g.interleave = n.value("interleave", 0.0);
    g.distractor = n.value("distractor", 0.0);
  }
  g.unique_scripts = j.value("unique_scripts", true);
  g.emit_layers = j.value("emit_layers", false);
  g.seed = j.value("seed", 1UL);
  g.validate();
  return g;
}

void ScriptGrammar::save(const std::string& path) const {
  json j;
  j["scripts"] = json::array();
  for (const auto& s : scripts)
    j["scripts"].push_back({{"name", s.name}, {"events", s.events}});
  j["lexicon"] = lexicon;
  j["noise"] = {{"coref_repeat", coref_repeat}, {"interleave", interleave},
                {"distractor", distractor}};
  j["unique_scripts"] = unique_scripts;
  j["emit_layers"] = emit_layers;
  j["seed"] = seed;
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot open grammar file for writing: " + path);
  out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Presets

namespace {

ScriptGrammar base_grammar() {
  ScriptGrammar g;
  g.scripts = {
      {"dining", {"dining.order", "dining.eat", "dining.pay", "dining.leave"}},
      {"justice", {"justice.arrest", "justice.charge", "justice.convict", "justice.jail"}},
      {"travel", {"travel.depart", "travel.fly", "travel.land", "travel.arrive"}},
      {"commerce", {"commerce.buy", "commerce.ship", "commerce.deliver"}},
  };
  g.lexicon = {
      {"dining.order", {"order", "request"}},
      {"dining.eat", {"eat", "dine"}},
      {"dining.pay", {"pay", "tip"}},
      {"dining.leave", {"leave"}},
      {"justice.arrest", {"arrest"}},
      {"justice.charge", {"charge"}},
      {"justice.convict", {"convict"}},
      {"justice.jail", {"jail", "sentence"}},
      {"travel.depart", {"depart"}},
      {"travel.fly", {"fly"}},
      {"travel.land", {"land"}},
      {"travel.arrive", {"arrive"}},
      {"commerce.buy", {"buy"}},
      {"commerce.ship", {"ship"}},
      {"commerce.deliver", {"deliver"}},
      // distractor pool: types that belong to no script
      {"noise.meet", {"meet", "gather"}},
      {"noise.talk", {"talk", "chat"}},
      {"noise.report", {"report"}},
      {"noise.plan", {"plan"}},
  };
  return g;
}

}  // namespace

ScriptGrammar ScriptGrammar::preset_default() {
  ScriptGrammar g = base_grammar();
  g.coref_repeat = 0.3;
  g.interleave = 0.4;
  g.distractor = 0.2;
  g.seed = 7;
  return g;
}

ScriptGrammar ScriptGrammar::preset_separable() {
  ScriptGrammar g = base_grammar();
  for (auto& [type, lemmas] : g.lexicon) lemmas.resize(1);  // one lemma per type
  g.coref_repeat = 0.35;
  g.interleave = 0.3;
  g.distractor = 0.0;
  g.seed = 11;
  return g;
}

ScriptGrammar ScriptGrammar::preset_noisy() {
  ScriptGrammar g = base_grammar();
  g.coref_repeat = 0.0;
  g.interleave = 0.5;
  g.distractor = 0.5;
  g.seed = 13;
  return g;
}

const std::vector<std::string>& ScriptGrammar::preset_names() {
  static const std::vector<std::string> names = {"default", "separable", "noisy"};
  return names;
}

ScriptGrammar ScriptGrammar::preset(const std::string& name) {
  if (name == "default") return preset_default();
  if (name == "separable") return preset_separable();
  if (name == "noisy") return preset_noisy();
  throw CorpusError("unknown grammar preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Generation

namespace {

struct PlannedMention {
  int event = 0;  // index into the document's event list
  bool first = false;
};

struct PlannedEvent {
  std::string type;
  std::string lemma;
  Realis realis = Realis::Actual;
  int instance = -1;  // -1 for distractors
  std::vector<std::string> mention_ids;
};

Realis draw_realis(Rng& rng) {
  double x = rng.real();
  if (x < 0.80) return Realis::Actual;
  if (x < 0.95) return Realis::Generic;
  return Realis::Other;
}

Document generate_doc(const ScriptGrammar& g, unsigned long doc_seed, const std::string& doc_id,
                      const std::vector<std::string>& noise_pool) {
  Rng rng(doc_seed);
  Document doc;
  doc.doc_id = doc_id;

  // pick script instances
  size_t max_inst = g.unique_scripts ? std::min<size_t>(3, g.scripts.size()) : 3;
  size_t n_inst = 1 + rng.index(max_inst);
  std::vector<size_t> chosen;
  if (g.unique_scripts) {
    std::vector<size_t> pool(g.scripts.size());
    for (size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    for (size_t i = 0; i < n_inst; ++i) {
      size_t k = i + rng.index(pool.size() - i);
      std::swap(pool[i], pool[k]);
      chosen.push_back(pool[i]);
    }
  } else {
    for (size_t i = 0; i < n_inst; ++i) chosen.push_back(rng.index(g.scripts.size()));
  }

  // plan events and the interleaved order of their first mentions
  std::vector<PlannedEvent> events;
  std::vector<std::vector<int>> queues(chosen.size());
  for (size_t inst = 0; inst < chosen.size(); ++inst) {
    for (const auto& type : g.scripts[chosen[inst]].events) {
      PlannedEvent ev;
      ev.type = type;
      const auto& lemmas = g.lexicon.at(type);
      ev.lemma = lemmas[rng.index(lemmas.size())];
      ev.realis = draw_realis(rng);
      ev.instance = static_cast<int>(inst);
      queues[inst].push_back(static_cast<int>(events.size()));
      events.push_back(std::move(ev));
    }
  }
  std::vector<PlannedMention> slots;
  size_t current = 0;
  size_t remaining = events.size();
  std::vector<size_t> heads(queues.size(), 0);
  while (remaining > 0) {
    std::vector<size_t> nonempty;
    for (size_t q = 0; q < queues.size(); ++q)
      if (heads[q] < queues[q].size()) nonempty.push_back(q);
    if (heads[current] >= queues[current].size() || rng.chance(g.interleave))
      current = nonempty[rng.index(nonempty.size())];
    slots.push_back({queues[current][heads[current]++], true});
    --remaining;
  }

  // repeat mentions create coreference clusters
  size_t base_len = slots.size();
  for (size_t e = 0; e < events.size(); ++e) {
    int extra = 0;
    if (rng.chance(g.coref_repeat)) extra = 1 + (rng.chance(g.coref_repeat) ? 1 : 0);
    for (int k = 0; k < extra; ++k) {
      size_t first_pos = 0;
      for (size_t p = 0; p < slots.size(); ++p)
        if (slots[p].event == static_cast<int>(e) && slots[p].first) first_pos = p;
      size_t pos = first_pos + 1 + rng.index(slots.size() - first_pos);
      slots.insert(slots.begin() + static_cast<long>(pos), {static_cast<int>(e), false});
    }
  }

  // distractor mentions
  if (!noise_pool.empty()) {
    size_t n_noise = static_cast<size_t>(g.distractor * static_cast<double>(base_len) + 0.5);
    for (size_t k = 0; k < n_noise; ++k) {
      PlannedEvent ev;
      ev.type = noise_pool[rng.index(noise_pool.size())];
      const auto& lemmas = g.lexicon.at(ev.type);
      ev.lemma = lemmas[rng.index(lemmas.size())];
      ev.realis = draw_realis(rng);
      size_t pos = rng.index(slots.size() + 1);
      slots.insert(slots.begin() + static_cast<long>(pos),
                   {static_cast<int>(events.size()), true});
      events.push_back(std::move(ev));
    }
  }

  // realize one sentence per slot; occasionally merge into the previous one
  std::vector<std::string> actor_of_instance;
  for (size_t i = 0; i < chosen.size(); ++i)
    actor_of_instance.push_back(kActors[(doc_seed + i) % kActors.size()]);
  int mention_counter = 0;
  for (const PlannedMention& slot : slots) {
    PlannedEvent& ev = events[static_cast<size_t>(slot.event)];
    bool merge = !doc.sentences.empty() && rng.chance(0.25);
    if (!merge) {
      Sentence sent;
      sent.index = static_cast<int>(doc.sentences.size());
      doc.sentences.push_back(std::move(sent));
    }
    Sentence& sent = doc.sentences.back();
    std::vector<Token>& toks = sent.tokens;
    auto push = [&](const std::string& text, const std::string& lemma, const std::string& pos) {
      toks.push_back({static_cast<int>(toks.size()), text, lemma, pos});
      return static_cast<int>(toks.size()) - 1;
    };
    const auto& filler = kFillers[rng.index(kFillers.size())];
    push(filler.first, filler.first, filler.second);
    int actor_idx = -1;
    if (g.emit_layers && ev.instance >= 0) {
      const std::string& actor = actor_of_instance[static_cast<size_t>(ev.instance)];
      actor_idx = push(actor, actor, "NNP");
    }
    int trigger = push(ev.lemma, ev.lemma, "VBD");
    if (rng.chance(0.5)) {
      const auto& f2 = kFillers[rng.index(kFillers.size())];
      push(f2.first, f2.first, f2.second);
      push(kNouns[rng.index(kNouns.size())], kNouns[rng.index(kNouns.size())], "NN");
    }
    int time_idx = -1;
    if (g.emit_layers && rng.chance(0.3)) time_idx = push("yesterday", "yesterday", "RB");
    push(".", ".", ".");

    if (g.emit_layers) {
      std::vector<Dependency> deps;
      for (int t = 0; t < static_cast<int>(toks.size()); ++t) {
        if (t == trigger) continue;
        std::string label = toks[static_cast<size_t>(t)].pos == "DT" ? "det"
                            : t == actor_idx                         ? "nsubj"
                            : toks[static_cast<size_t>(t)].pos == "." ? "punct"
                                                                      : "dep";
        deps.push_back({trigger, t, label});
      }
      if (sent.dependencies)
        sent.dependencies->insert(sent.dependencies->end(), deps.begin(), deps.end());
      else
        sent.dependencies = std::move(deps);
      Frame frame;
      frame.name = "f_" + ev.type;
      frame.target = trigger;
      if (actor_idx >= 0) frame.args.push_back({"arg0", {actor_idx, actor_idx + 1}});
      if (sent.frames)
        sent.frames->push_back(std::move(frame));
      else
        sent.frames = std::vector<Frame>{std::move(frame)};
      if (!sent.time_spans) sent.time_spans = std::vector<TokenSpan>{};
      if (time_idx >= 0) sent.time_spans->push_back({time_idx, time_idx + 1});
    }

    EventMention m;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "m%04d", ++mention_counter);
    m.id = idbuf;
    m.sentence = doc.sentences.back().index;
    m.span = {trigger, trigger + 1};
    m.head = trigger;
    m.type = ev.type;
    m.realis = ev.realis;
    m.discourse_index = mention_counter;
    ev.mention_ids.push_back(m.id);
    doc.mentions.push_back(std::move(m));
  }

  GoldAnnotation gold;
  for (const PlannedEvent& ev : events)
    if (ev.mention_ids.size() > 1) gold.coref.push_back(ev.mention_ids);
  for (size_t inst = 0; inst < queues.size(); ++inst) {
    for (size_t k = 1; k < queues[inst].size(); ++k) {
      const PlannedEvent& prev = events[static_cast<size_t>(queues[inst][k - 1])];
      const PlannedEvent& next = events[static_cast<size_t>(queues[inst][k])];
      gold.after.emplace_back(prev.mention_ids.front(), next.mention_ids.front());
    }
  }
  doc.gold = std::move(gold);
  validate_document(doc);
  return doc;
}

}  // namespace

std::vector<Document> generate(const ScriptGrammar& grammar, int n_docs) {
  grammar.validate();
  std::set<std::string> script_types;
  for (const auto& s : grammar.scripts)
    script_types.insert(s.events.begin(), s.events.end());
  std::vector<std::string> noise_pool;
  for (const auto& [type, lemmas] : grammar.lexicon) {
    (void)lemmas;
    if (!script_types.count(type)) noise_pool.push_back(type);
  }
  if (grammar.distractor == 0.0) noise_pool.clear();

  std::vector<Document> docs;
  for (int k = 0; k < n_docs; ++k) {
    unsigned long doc_seed = grammar.seed + 0x9E3779B97F4A7C15UL * static_cast<unsigned long>(k + 1);
    docs.push_back(generate_doc(grammar, doc_seed, "synth-" + std::to_string(grammar.seed) +
                                                       "-" + std::to_string(k),
                                noise_pool));
  }
  return docs;
}

RelationGraph adjacency_baseline(const Document& doc) {
  RelationGraph g;
  g.task = Task::Sequencing;
  g.n = doc.n_mentions();
  for (int j = 1; j <= g.n; ++j) {
    std::string script = script_of_type(doc.mention(j).type);
    int found = 0;
    for (int i = j - 1; i >= 1; --i) {
      if (script_of_type(doc.mention(i).type) == script) {
        found = i;
        break;
      }
    }
    if (found > 0)
      g.add(found, j, ArcLabel::AfterForward);
    else
      g.add(0, j, ArcLabel::Root);
  }
  return g;
}

}  // namespace evrel

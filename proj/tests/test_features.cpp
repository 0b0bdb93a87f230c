#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "evrel/features.hpp"
#include "evrel/synth.hpp"
#include "helpers.hpp"

using namespace evrel;
using namespace testutil;

namespace {

bool has_prefix(const FeatureVector& f, const std::string& prefix) {
  for (const auto& [k, v] : f.entries) {
    (void)v;
    if (k.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

int count_prefix(const FeatureVector& f, const std::string& prefix) {
  int n = 0;
  for (const auto& [k, v] : f.entries) {
    (void)v;
    if (k.rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

// one sentence holding the two classic mentions: killed ... fired
Document fired_killed_doc() {
  Document doc;
  doc.doc_id = "fig1";
  Sentence sent;
  sent.index = 0;
  const char* words[] = {"the", "killed", "were", "mourned", "after", "he", "fired", "."};
  const char* lemmas[] = {"the", "kill", "be", "mourn", "after", "he", "fire", "."};
  const char* pos[] = {"DT", "VBN", "VBD", "VBN", "IN", "PRP", "VBD", "."};
  for (int t = 0; t < 8; ++t) sent.tokens.push_back({t, words[t], lemmas[t], pos[t]});
  doc.sentences.push_back(std::move(sent));
  EventMention killed;
  killed.id = "m001";
  killed.sentence = 0;
  killed.span = {1, 2};
  killed.head = 1;
  killed.type = "Life.Die";
  killed.realis = Realis::Actual;
  killed.discourse_index = 1;
  EventMention fired;
  fired.id = "m002";
  fired.sentence = 0;
  fired.span = {6, 7};
  fired.head = 6;
  fired.type = "Conflict.Attack";
  fired.realis = Realis::Actual;
  fired.discourse_index = 2;
  doc.mentions = {killed, fired};
  doc.gold = GoldAnnotation{};
  validate_document(doc);
  return doc;
}

}  // namespace

TEST_CASE("coref features: definitional same-indicators") {
  Document doc = build_doc({{"Life.Die", "kill"}, {"Life.Die", "kill"}});
  FeatureConfig config;
  FeatureVector f = coref_features(doc, 1, 2, config);
  CHECK(f.entries.count("Head|same_lemma"));
  CHECK(f.entries.count("Head|same_word"));
  CHECK(f.entries.count("Type|same"));
  CHECK(f.entries.count("Realis|same"));
  CHECK(f.entries.count("POS|same"));
  CHECK(f.entries.count("Type|pair|Life.Die|Life.Die"));
  // all indicator values are 1.0
  for (const auto& [k, v] : f.entries) {
    (void)k;
    CHECK(v == 1.0);
  }

  Document mixed = build_doc({{"Life.Die", "kill"}, {"Conflict.Attack", "fire"}});
  FeatureVector g = coref_features(mixed, 1, 2, config);
  CHECK_FALSE(g.entries.count("Head|same_lemma"));
  CHECK_FALSE(g.entries.count("Type|same"));
}

TEST_CASE("coref features: sentence distance buckets") {
  FeatureConfig config;
  Document doc = fired_killed_doc();
  CHECK(coref_features(doc, 1, 2, config).entries.count("Distance|0"));

  std::vector<MentionSpec> far;
  for (int k = 0; k < 10; ++k) far.push_back({"a.x", "eat"});
  Document spread = build_doc(far);
  CHECK(coref_features(spread, 1, 2, config).entries.count("Distance|1"));
  CHECK(coref_features(spread, 1, 5, config).entries.count("Distance|4-7"));
  CHECK(coref_features(spread, 1, 10, config).entries.count("Distance|8+"));
}

TEST_CASE("coref features: frame and syntactic families follow their layers") {
  FeatureConfig config;
  ScriptGrammar g = ScriptGrammar::preset_default();
  g.emit_layers = true;
  g.seed = 21;
  std::vector<Document> docs = generate(g, 6);
  bool saw_frame = false, saw_syntactic_family_absent = true;
  for (const Document& doc : docs) {
    for (int j = 2; j <= doc.n_mentions(); ++j) {
      FeatureVector with = coref_features(doc, 1, j, config);
      if (has_prefix(with, "Frame|")) saw_frame = true;
      // stripping the layers removes the families and adds nothing
      Document stripped = doc;
      for (Sentence& s : stripped.sentences) {
        s.frames.reset();
        s.dependencies.reset();
        s.time_spans.reset();
      }
      FeatureVector without = coref_features(stripped, 1, j, config);
      CHECK(count_prefix(without, "Frame|") == 0);
      CHECK(count_prefix(without, "Syntactic|") == 0);
      for (const auto& [k, v] : without.entries) {
        (void)v;
        CHECK(with.entries.count(k));
      }
    }
  }
  CHECK(saw_frame);
  (void)saw_syntactic_family_absent;
}

TEST_CASE("coref features: exact window match") {
  FeatureConfig config;
  // identical "the kill ." sentences produce identical 5-word windows for
  // interior mentions; document edges truncate the windows and break the match
  Document doc = build_doc({{"a.x", "kill"}, {"a.x", "kill"}, {"a.x", "kill"}, {"a.x", "kill"}});
  CHECK(coref_features(doc, 2, 3, config).entries.count("ExactMatch|window"));
  CHECK_FALSE(coref_features(doc, 1, 2, config).entries.count("ExactMatch|window"));
  Document diff = build_doc({{"a.x", "kill"}, {"a.x", "kill"}, {"a.x", "die"}, {"a.x", "kill"}});
  CHECK_FALSE(coref_features(diff, 2, 3, config).entries.count("ExactMatch|window"));
}

TEST_CASE("sequencing features: the classic attack-die backward arc key") {
  Document doc = fired_killed_doc();
  FeatureConfig config;
  // killed is the antecedent (i=1), fired the anaphor (j=2); the After arc
  // goes fired -> killed, so the discourse ordering is backward
  FeatureVector f = sequencing_features(doc, 1, 2, ArcLabel::AfterBackward, config);
  CHECK(f.entries.count("Seq|type=Conflict.Attack,Life.Die|sentdist=0|ord=backward"));
}

TEST_CASE("sequencing features: layer-dependent atoms vanish with their layers") {
  FeatureConfig config;
  ScriptGrammar g = ScriptGrammar::preset_default();
  g.emit_layers = true;
  g.seed = 33;
  std::vector<Document> docs = generate(g, 8);
  bool saw_dep = false, saw_tmp = false, saw_shared = false, saw_tord = false;
  for (const Document& doc : docs) {
    Document stripped = doc;
    for (Sentence& s : stripped.sentences) {
      s.frames.reset();
      s.dependencies.reset();
      s.time_spans.reset();
    }
    for (int j = 2; j <= doc.n_mentions(); ++j) {
      for (int i = 1; i < j; ++i) {
        for (ArcLabel label : {ArcLabel::AfterForward, ArcLabel::AfterBackward}) {
          FeatureVector with = sequencing_features(doc, i, j, label, config);
          if (has_prefix(with, "Seq|") &&
              std::any_of(with.entries.begin(), with.entries.end(), [](const auto& kv) {
                return kv.first.find("deppath=") != std::string::npos;
              }))
            saw_dep = true;
          for (const auto& [k, v] : with.entries) {
            (void)v;
            if (k.find("|tmp=") != std::string::npos) saw_tmp = true;
            if (k.find("sharedarg") != std::string::npos) saw_shared = true;
            if (k.find("tord=") != std::string::npos) saw_tord = true;
          }
          FeatureVector without = sequencing_features(stripped, i, j, label, config);
          for (const auto& [k, v] : without.entries) {
            (void)v;
            CHECK(k.find("deppath=") == std::string::npos);
            CHECK(k.find("|tmp=") == std::string::npos);
            CHECK(k.find("sharedarg") == std::string::npos);
            CHECK(k.find("tord=") == std::string::npos);
          }
        }
      }
    }
  }
  CHECK(saw_tmp);
  CHECK(saw_shared);
  CHECK(saw_dep);
  CHECK(saw_tord);
}

TEST_CASE("sequencing features: swapping the direction changes every key") {
  Rng rng(505);
  FeatureConfig config;
  ScriptGrammar g = ScriptGrammar::preset_default();
  g.emit_layers = true;
  g.seed = 44;
  std::vector<Document> docs = generate(g, 5);
  for (const Document& doc : docs) {
    for (int trial = 0; trial < 10; ++trial) {
      int j = rng.range(2, doc.n_mentions());
      int i = rng.range(1, j - 1);
      FeatureVector fwd = sequencing_features(doc, i, j, ArcLabel::AfterForward, config);
      FeatureVector bwd = sequencing_features(doc, i, j, ArcLabel::AfterBackward, config);
      for (const auto& [k, v] : fwd.entries) {
        (void)v;
        CHECK_FALSE(bwd.entries.count(k));
      }
    }
  }
}

TEST_CASE("sequencing features: schema and intervening atoms") {
  FeatureConfig config;
  // order and eat share the builtin dining cluster
  Document doc = build_doc({{"a.x", "order"}, {"b.y", "meet"}, {"a.z", "eat"}});
  FeatureVector f = sequencing_features(doc, 1, 3, ArcLabel::AfterForward, config);
  bool schema = false, midtype = false, fw = false;
  for (const auto& [k, v] : f.entries) {
    (void)v;
    if (k.find("schema_same") != std::string::npos) schema = true;
    if (k.find("midtype=b.y") != std::string::npos) midtype = true;
    if (k.find("fw=the") != std::string::npos) fw = true;
  }
  CHECK(schema);
  CHECK(midtype);
  CHECK(fw);  // "the" and "." intervene; "." is not a content POS
  // unrelated lemmas emit no schema atom
  Document other = build_doc({{"a.x", "order"}, {"a.z", "fly"}});
  FeatureVector f2 = sequencing_features(other, 1, 2, ArcLabel::AfterForward, config);
  for (const auto& [k, v] : f2.entries) {
    (void)v;
    CHECK(k.find("schema_same") == std::string::npos);
  }
}

TEST_CASE("root features carry a per-task bias plus type and realis") {
  FeatureConfig config;
  Document doc = build_doc({{"Life.Die", "kill", Realis::Generic}});
  FeatureVector f = root_features(doc, 1, Task::Coreference, config);
  CHECK(f.entries.count("Root|bias|coref"));
  CHECK(f.entries.count("Root|type|Life.Die"));
  CHECK(f.entries.count("Root|realis|Generic"));
  FeatureVector g = root_features(doc, 1, Task::Sequencing, config);
  CHECK(g.entries.count("Root|bias|sequencing"));
  // two mentions of equal type and realis produce identical root vectors
  Document two = build_doc({{"a.x", "kill"}, {"a.x", "die"}});
  CHECK(root_features(two, 1, Task::Coreference, config).entries ==
        root_features(two, 2, Task::Coreference, config).entries);
}

TEST_CASE("determinism: identical inputs give identical key sets") {
  Rng rng(606);
  FeatureConfig config;
  for (int trial = 0; trial < 10; ++trial) {
    Document doc = random_doc(rng, 6);
    for (int j = 2; j <= doc.n_mentions(); ++j) {
      FeatureVector a = coref_features(doc, 1, j, config);
      FeatureVector b = coref_features(doc, 1, j, config);
      CHECK(a.entries == b.entries);
      FeatureVector c = sequencing_features(doc, 1, j, ArcLabel::AfterForward, config);
      FeatureVector d = sequencing_features(doc, 1, j, ArcLabel::AfterForward, config);
      CHECK(c.entries == d.entries);
    }
  }
}

TEST_CASE("family ablation removes exactly the named families") {
  Document doc = fired_killed_doc();
  FeatureConfig config;
  config.disabled_families = {"Distance"};
  CHECK(count_prefix(coref_features(doc, 1, 2, config), "Distance|") == 0);
  FeatureConfig seq_config;
  seq_config.disabled_families = {"Sentence"};
  FeatureVector f = sequencing_features(doc, 1, 2, ArcLabel::AfterBackward, seq_config);
  for (const auto& [k, v] : f.entries) {
    (void)v;
    CHECK(k.find("sentdist=") == std::string::npos);
  }
}

TEST_CASE("arc_score is the sparse dot product") {
  WeightVector w;
  FeatureVector f;
  f.add("a");
  f.add("b");
  CHECK(arc_score(w, f) == 0.0);
  w.weights["a"] = 1.5;
  CHECK(arc_score(w, f) == doctest::Approx(1.5));
}

TEST_CASE("sparse dot product equals a dense oracle on random vectors") {
  Rng rng(707);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> keys;
    for (int k = 0; k < 12; ++k) keys.push_back("k" + std::to_string(k));
    WeightVector w;
    FeatureVector f;
    std::map<std::string, double> dense_w, dense_f;
    for (const auto& k : keys) {
      dense_w[k] = rng.chance(0.5) ? rng.gauss() : 0.0;
      dense_f[k] = rng.chance(0.5) ? rng.gauss() : 0.0;
      if (dense_w[k] != 0.0) w.weights[k] = dense_w[k];
      if (dense_f[k] != 0.0) f.add(k, dense_f[k]);
    }
    double dense = 0.0;
    for (const auto& k : keys) dense += dense_w[k] * dense_f[k];
    CHECK(arc_score(w, f) == doctest::Approx(dense));
  }
}

TEST_CASE("feature vectors never store zero entries") {
  FeatureVector f;
  f.add("x", 1.0);
  f.add("x", -1.0);
  CHECK(f.entries.empty());
  FeatureVector a, b;
  a.add("y", 2.0);
  b.add("y", 2.0);
  a -= b;
  CHECK(a.entries.empty());
  CHECK(a.norm_sq() == 0.0);
}

TEST_CASE("weight averaging tracks per-step values") {
  WeightVector w;
  FeatureVector f;
  f.add("a");
  w.advance();           // step 1, w stays 0
  w.advance();           // step 2
  w.apply(f, 3.0);       // a becomes 3 at step 2
  w.advance();           // step 3, a stays 3
  // values per step: 0, 3, 3 -> average 2
  WeightVector avg = w.averaged();
  CHECK(avg.weights.at("a") == doctest::Approx(2.0));
  // the final weights are untouched
  CHECK(w.get("a") == doctest::Approx(3.0));
}

TEST_CASE("schema table file loading matches the shipped copy") {
  SchemaTable shipped = SchemaTable::from_file(std::string(EVREL_SOURCE_DIR) +
                                               "/data/schema_clusters.tsv");
  CHECK(shipped.entries() == SchemaTable::builtin().entries());
  CHECK(shipped.same_cluster("order", "eat"));
  CHECK_FALSE(shipped.same_cluster("order", "fly"));
  CHECK_FALSE(shipped.same_cluster("order", "nonsense"));
}

// Deterministic synthetic-corpus generation from a small script grammar:
// documents interleave script instances, repeat mentions create coreference
// clusters, and consecutive script events carry gold After links. Event types
// are namespaced "<script>.<step>" so the script of a mention is recoverable
// from its type.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "evrel/corpus.hpp"
#include "evrel/relgraph.hpp"

namespace evrel {

struct ScriptGrammar {
  struct Script {
    std::string name;
    std::vector<std::string> events;  // ordered event types
  };
  std::vector<Script> scripts;
  std::map<std::string, std::vector<std::string>> lexicon;  // type -> trigger lemmas

  // noise parameters
  double coref_repeat = 0.0;  // probability of repeat mentions per event
  double interleave = 0.0;    // probability of switching instances between slots
  double distractor = 0.0;    // distractor mentions per base slot

  bool unique_scripts = true;  // at most one instance per script per document
  bool emit_layers = false;    // emit toy dependency/frame/temporal layers
  unsigned long seed = 1;

  static ScriptGrammar load(const std::string& path);
  void save(const std::string& path) const;
  void validate() const;  // throws CorpusError

  // bundled grammars
  static ScriptGrammar preset_default();
  // no distractors, one lemma per type: relations are a function of the
  // type/lemma pair features
  static ScriptGrammar preset_separable();
  // distractor-heavy, no repeat mentions
  static ScriptGrammar preset_noisy();
  static const std::vector<std::string>& preset_names();
  static ScriptGrammar preset(const std::string& name);
};

std::vector<Document> generate(const ScriptGrammar& grammar, int n_docs);

// Evaluation control: links each mention to its nearest predecessor from the
// same script namespace with an AfterForward arc.
RelationGraph adjacency_baseline(const Document& doc);

}  // namespace evrel

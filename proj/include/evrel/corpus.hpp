// Document data model and the line-delimited corpus format.
//
// A corpus file is UTF-8, one JSON document per line. See README.md for the
// field-by-field format description. Documents are immutable after load and
// safe to share across threads.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace evrel {

struct Token {
  int index = 0;  // position within sentence
  std::string text;
  std::string lemma;
  std::string pos;
  bool operator==(const Token&) const = default;
};

struct Dependency {
  int head = 0;
  int dep = 0;
  std::string label;
  bool operator==(const Dependency&) const = default;
};

struct TokenSpan {
  int begin = 0;
  int end = 0;  // exclusive
  bool operator==(const TokenSpan&) const = default;
};

struct FrameArg {
  std::string role;
  TokenSpan span;
  bool operator==(const FrameArg&) const = default;
};

struct Frame {
  std::string name;
  int target = 0;  // token index
  std::vector<FrameArg> args;
  bool operator==(const Frame&) const = default;
};

struct Sentence {
  int index = 0;  // position within document
  std::vector<Token> tokens;
  // Optional annotation layers. Absent means the layer was never produced;
  // features depending on an absent layer emit nothing.
  std::optional<std::vector<Dependency>> dependencies;
  std::optional<std::vector<Frame>> frames;
  std::optional<std::vector<TokenSpan>> time_spans;
  bool operator==(const Sentence&) const = default;
};

enum class Realis { Actual, Generic, Other };

std::string to_string(Realis r);
Realis realis_from_string(const std::string& s);  // throws CorpusError

struct EventMention {
  std::string id;
  int sentence = 0;
  TokenSpan span;  // token span within the sentence, end exclusive
  int head = 0;    // head token index within the sentence
  std::string type;
  Realis realis = Realis::Actual;
  // 1-based position in discourse order; 0 is reserved for the root node.
  int discourse_index = 0;
  bool operator==(const EventMention&) const = default;
};

using IdPair = std::pair<std::string, std::string>;

struct GoldAnnotation {
  std::vector<std::vector<std::string>> coref;  // disjoint mention-id clusters
  std::vector<IdPair> after;                    // (src, dst): src's event script-precedes dst's
  std::vector<IdPair> subevent;                 // parsed, never used
  bool operator==(const GoldAnnotation&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;
  std::vector<EventMention> mentions;  // in discourse order
  std::optional<GoldAnnotation> gold;
  bool operator==(const Document&) const = default;

  int n_mentions() const { return static_cast<int>(mentions.size()); }
  // 1-based discourse index accessors.
  const EventMention& mention(int discourse_index) const;
  int mention_index(const std::string& id) const;  // throws on unknown id
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checks every documented invariant; throws CorpusError naming the violated
// invariant and the offending id.
void validate_document(const Document& doc);

std::vector<Document> read_corpus(const std::string& path);
void write_corpus(const std::vector<Document>& docs, const std::string& path);

// Canonical event id for a mention: the lexicographically smallest mention id
// in its gold coreference cluster; a mention outside every cluster maps to
// itself.
std::string event_of(const Document& doc, const std::string& mention_id);

// Single-document (de)serialization, shared with the predictions format.
std::string document_to_line(const Document& doc);
Document document_from_line(const std::string& line);  // parses + derives indices, no validation

}  // namespace evrel

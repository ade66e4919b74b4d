#pragma once

// Neutral data model shared by extraction, engine, store and service:
// sentences, analyses, properties, judgments and the analysis x property
// incidence structure. Everything here is an immutable value once built.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace forestjudge {

struct Token {
  std::size_t index = 0;
  std::string surface;
  std::string pos;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::string> pos_sequence() const;
  std::string text() const;
  // Space-joined surface of tokens [start, end).
  std::string phrase(std::size_t start, std::size_t end) const;

  bool operator==(const Sentence&) const = default;
};

// Builds a sentence with contiguous token indices. Throws on an empty token
// list or an empty surface.
Sentence make_sentence(std::string id,
                       const std::vector<std::pair<std::string, std::string>>& surface_pos);

// Half-open token range.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t width() const { return end - start; }
  bool contains(std::size_t token) const { return token >= start && token < end; }

  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

// A parse tree node. Leaves are preterminals covering exactly one token and
// carry no rule; internal nodes carry the rule that built them.
struct Node {
  std::string category;
  Span span;
  std::string rule;
  std::optional<std::size_t> head;  // index into children; unset on leaves
  std::vector<Node> children;

  bool is_leaf() const { return children.empty(); }

  bool operator==(const Node&) const = default;
};

struct SenseTag {
  std::string label;  // e.g. "serve_1"; the root word is the label minus a _N suffix
  std::string gloss;  // e.g. "provide"
  bool ambiguous = false;  // the lexicon lists more than one sense for the word

  bool operator==(const SenseTag&) const = default;
};

// Root word form of a sense label: "serve_2" -> "serve", "Boston" -> "Boston".
std::string sense_root(std::string_view label);

enum class SentenceType {
  imperative,
  wh_question,
  yn_question,
  declarative,
  elliptical_np,
  elliptical_pp,
  other,
};

std::string_view to_string(SentenceType type);        // "elliptical-np"
std::string_view display_name(SentenceType type);     // "elliptical NP"
SentenceType parse_sentence_type(std::string_view text);

struct Analysis {
  std::size_t id = 0;
  Node tree;
  std::map<std::size_t, SenseTag> senses;  // token index -> sense
  SentenceType type = SentenceType::other;

  bool operator==(const Analysis&) const = default;
};

// Checks the structural invariants of an analysis over a sentence: the root
// spans the sentence, children tile their parent, head indices are valid on
// internal nodes, leaves cover one token, ambiguous senses are labelled.
// Throws Error(invalid_argument) naming the first violation.
void validate(const Analysis& analysis, const Sentence& sentence);

// Fixed-capacity set of analysis ids 0..N-1.
class AnalysisSet {
 public:
  AnalysisSet() = default;
  explicit AnalysisSet(std::size_t capacity);
  static AnalysisSet all(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  void insert(std::size_t id);
  void erase(std::size_t id);
  bool contains(std::size_t id) const;
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  bool is_subset_of(const AnalysisSet& other) const;
  bool intersects(const AnalysisSet& other) const;
  std::vector<std::size_t> ids() const;

  AnalysisSet& operator&=(const AnalysisSet& other);
  AnalysisSet& operator|=(const AnalysisSet& other);
  AnalysisSet& operator-=(const AnalysisSet& other);
  friend AnalysisSet operator&(AnalysisSet a, const AnalysisSet& b) { return a &= b; }
  friend AnalysisSet operator|(AnalysisSet a, const AnalysisSet& b) { return a |= b; }
  friend AnalysisSet operator-(AnalysisSet a, const AnalysisSet& b) { return a -= b; }

  bool operator==(const AnalysisSet&) const = default;

 private:
  std::size_t capacity_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class PropertyKind {
  constituent,
  semantic_triple,
  word_sense,
  sentence_type,
  rule_name,
  arg_triple,
};

std::string_view to_string(PropertyKind kind);
PropertyKind parse_property_kind(std::string_view text);
// Kind encoded in a canonical key's prefix. Throws on an unknown prefix.
PropertyKind kind_of_key(std::string_view key);

// 1 = most user-friendly. Ranks 1-4 are displayed by default.
int friendliness(PropertyKind kind);
inline constexpr int kMaxDisplayedFriendliness = 4;

struct ConstituentFact {
  std::string category;
  Span span;
  std::string phrase;

  bool operator==(const ConstituentFact&) const = default;
};

struct TripleEnd {
  std::size_t index = 0;
  std::string word;  // root form

  bool operator==(const TripleEnd&) const = default;
};

// head -relation-> dependent. Argument-position triples use labels such as
// "arg1" and are hidden by default.
struct TripleFact {
  TripleEnd head;
  std::string relation;
  bool low = false;
  TripleEnd dependent;
  bool argument = false;

  bool operator==(const TripleFact&) const = default;
};

struct WordSenseFact {
  std::size_t index = 0;
  std::string label;
  std::string gloss;

  bool operator==(const WordSenseFact&) const = default;
};

struct SentenceTypeFact {
  SentenceType type = SentenceType::other;

  bool operator==(const SentenceTypeFact&) const = default;
};

struct RuleFact {
  std::string name;

  bool operator==(const RuleFact&) const = default;
};

using PropertyContent =
    std::variant<ConstituentFact, TripleFact, WordSenseFact, SentenceTypeFact, RuleFact>;

PropertyKind kind_of(const PropertyContent& content);

// Stable identity of a property within a sentence. Embeds kind, labels and
// token positions, never an analysis id:
//   c:NP:2-9   t:3:to:+:5:flight:boston   w:6:serve_1   y:imperative   r:vp_v_np
// Throws Error(invalid_argument) on incomplete content.
std::string canonical_key(const PropertyContent& content);

// The canonical key with word forms removed, used to map judgments between
// sentences that share a part-of-speech sequence: "t:3:to:+:5".
std::string structural_key(std::string_view key);

std::string display_text(const PropertyContent& content);

struct Property {
  PropertyKind kind = PropertyKind::rule_name;
  std::string key;
  std::string display;
  Span span;
  PropertyContent content;

  int friendliness() const { return forestjudge::friendliness(kind); }
  bool displayed() const { return friendliness() <= kMaxDisplayedFriendliness; }

  bool operator==(const Property&) const = default;
};

Property make_property(PropertyContent content, Span span);

enum class Polarity { good, bad };
enum class Provenance { user, derived, automatic, pos_propagated };

std::string_view to_string(Polarity value);
Polarity parse_polarity(std::string_view text);
std::string_view to_string(Provenance provenance);  // "auto", "pos-propagated", ...
Provenance parse_provenance(std::string_view text);

struct Judgment {
  std::string target;
  Polarity value = Polarity::good;
  Provenance provenance = Provenance::user;
  std::uint64_t sequence = 0;

  bool operator==(const Judgment&) const = default;
};

// Which analyses each property of one sentence holds for. Properties are kept
// sorted by key; analysis ids are 0..N-1 after duplicate collapsing.
class Incidence {
 public:
  Incidence() = default;
  // multiplicity[i] is the number of input analyses collapsed into id i;
  // empty means one each.
  Incidence(std::size_t analysis_count, std::vector<Property> properties,
            std::vector<AnalysisSet> holds, std::vector<std::size_t> multiplicity = {});

  std::size_t analysis_count() const { return analysis_count_; }
  const std::vector<Property>& properties() const { return properties_; }
  const Property& property(std::size_t index) const { return properties_.at(index); }
  const AnalysisSet& holds(std::size_t index) const { return holds_.at(index); }
  const std::vector<std::size_t>& multiplicity() const { return multiplicity_; }

  std::optional<std::size_t> find(std::string_view key) const;
  // Throws Error(not_found).
  std::size_t index_of(std::string_view key) const;
  const AnalysisSet& holds(std::string_view key) const { return holds(index_of(key)); }

  bool is_discriminant(std::size_t index) const;
  // Displayed discriminants sorted by (friendliness, span width descending, key).
  std::vector<std::size_t> display_order() const;

  bool operator==(const Incidence& other) const {
    return analysis_count_ == other.analysis_count_ && properties_ == other.properties_ &&
           holds_ == other.holds_ && multiplicity_ == other.multiplicity_;
  }

 private:
  std::size_t analysis_count_ = 0;
  std::vector<Property> properties_;
  std::vector<AnalysisSet> holds_;
  std::vector<std::size_t> multiplicity_;
  std::unordered_map<std::string, std::size_t> index_;
};

// True iff 0 < |holds(key)| < N. Throws Error(not_found) for an unknown key.
bool is_discriminant(const Incidence& incidence, std::string_view key);

// Labeled bracketing used in corpus files:
//   (IMP/s_imp^0 (VP/vp_v_np^0 (V show) (NP/np_pro^0 (Pro me))))
// Leaves are "(Category surface)". The "^k" head mark is optional.
std::string format_tree(const Node& root, const Sentence& sentence);
// Rebuilds spans from leaf order and checks leaf surfaces against the
// sentence. Throws Error(parse_error).
Node parse_tree(std::string_view text, const Sentence& sentence);

}  // namespace forestjudge

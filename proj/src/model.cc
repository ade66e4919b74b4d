#include "forestjudge/model.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <numeric>
#include <sstream>

#include "forestjudge/error.h"

namespace forestjudge {

namespace {

std::string key_word(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word) {
    if (c == ' ' || c == ':' || c == '\t') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::vector<std::string_view> split_fields(std::string_view key) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto colon = key.find(':', start);
    if (colon == std::string_view::npos) {
      fields.push_back(key.substr(start));
      return fields;
    }
    fields.push_back(key.substr(start, colon - start));
    start = colon + 1;
  }
}

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::invalid_argument, message);
}

}  // namespace

std::vector<std::string> Sentence::pos_sequence() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) out.push_back(token.pos);
  return out;
}

std::string Sentence::text() const { return phrase(0, tokens.size()); }

std::string Sentence::phrase(std::size_t start, std::size_t end) const {
  std::string out;
  for (std::size_t i = start; i < end && i < tokens.size(); ++i) {
    if (i > start) out.push_back(' ');
    out += tokens[i].surface;
  }
  return out;
}

Sentence make_sentence(std::string id,
                       const std::vector<std::pair<std::string, std::string>>& surface_pos) {
  if (surface_pos.empty()) invalid("sentence '" + id + "' has no tokens");
  Sentence sentence;
  sentence.id = std::move(id);
  for (std::size_t i = 0; i < surface_pos.size(); ++i) {
    if (surface_pos[i].first.empty()) {
      invalid("sentence '" + sentence.id + "' token " + std::to_string(i) + " is empty");
    }
    sentence.tokens.push_back(Token{i, surface_pos[i].first, surface_pos[i].second});
  }
  return sentence;
}

std::string sense_root(std::string_view label) {
  auto underscore = label.rfind('_');
  if (underscore == std::string_view::npos || underscore == 0 ||
      underscore + 1 == label.size()) {
    return std::string(label);
  }
  for (std::size_t i = underscore + 1; i < label.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(label[i]))) return std::string(label);
  }
  return std::string(label.substr(0, underscore));
}

namespace {

struct SentenceTypeName {
  SentenceType type;
  std::string_view id;
  std::string_view display;
};

constexpr SentenceTypeName kSentenceTypes[] = {
    {SentenceType::imperative, "imperative", "imperative"},
    {SentenceType::wh_question, "wh-question", "wh-question"},
    {SentenceType::yn_question, "yn-question", "yes/no question"},
    {SentenceType::declarative, "declarative", "declarative"},
    {SentenceType::elliptical_np, "elliptical-np", "elliptical NP"},
    {SentenceType::elliptical_pp, "elliptical-pp", "elliptical PP"},
    {SentenceType::other, "other", "other"},
};

}  // namespace

std::string_view to_string(SentenceType type) {
  for (const auto& entry : kSentenceTypes) {
    if (entry.type == type) return entry.id;
  }
  return "other";
}

std::string_view display_name(SentenceType type) {
  for (const auto& entry : kSentenceTypes) {
    if (entry.type == type) return entry.display;
  }
  return "other";
}

SentenceType parse_sentence_type(std::string_view text) {
  for (const auto& entry : kSentenceTypes) {
    if (entry.id == text) return entry.type;
  }
  invalid("unknown sentence type '" + std::string(text) + "'");
}

namespace {

void validate_node(const Node& node, const Sentence& sentence) {
  const auto where = [&] {
    return node.category + " [" + std::to_string(node.span.start) + "," +
           std::to_string(node.span.end) + ")";
  };
  if (node.span.start >= node.span.end || node.span.end > sentence.size()) {
    invalid("node " + where() + " has an invalid span");
  }
  if (node.is_leaf()) {
    if (node.span.width() != 1) invalid("leaf " + where() + " must cover one token");
    return;
  }
  if (!node.head || *node.head >= node.children.size()) {
    invalid("node " + where() + " (" + node.rule + ") has no valid head child");
  }
  if (node.rule.empty()) invalid("node " + where() + " has no rule name");
  std::size_t cursor = node.span.start;
  for (const auto& child : node.children) {
    if (child.span.start != cursor) {
      invalid("children of " + where() + " do not tile its span");
    }
    validate_node(child, sentence);
    cursor = child.span.end;
  }
  if (cursor != node.span.end) invalid("children of " + where() + " do not tile its span");
}

}  // namespace

void validate(const Analysis& analysis, const Sentence& sentence) {
  if (analysis.tree.span != Span{0, sentence.size()}) {
    invalid("analysis " + std::to_string(analysis.id) + " does not span sentence '" +
            sentence.id + "'");
  }
  validate_node(analysis.tree, sentence);
  for (const auto& [index, sense] : analysis.senses) {
    if (index >= sentence.size()) {
      invalid("analysis " + std::to_string(analysis.id) + " has a sense for token " +
              std::to_string(index) + " outside the sentence");
    }
    if (sense.ambiguous && sense.label.empty()) {
      invalid("analysis " + std::to_string(analysis.id) + " token " + std::to_string(index) +
              " is sense-ambiguous but unlabeled");
    }
  }
}

// --- AnalysisSet ----------------------------------------------------------

AnalysisSet::AnalysisSet(std::size_t capacity)
    : capacity_(capacity), words_((capacity + 63) / 64, 0) {}

AnalysisSet AnalysisSet::all(std::size_t capacity) {
  AnalysisSet set(capacity);
  for (std::size_t i = 0; i < set.words_.size(); ++i) set.words_[i] = ~std::uint64_t{0};
  if (capacity % 64 != 0 && !set.words_.empty()) {
    set.words_.back() = (std::uint64_t{1} << (capacity % 64)) - 1;
  }
  return set;
}

void AnalysisSet::insert(std::size_t id) {
  if (id >= capacity_) invalid("analysis id " + std::to_string(id) + " out of range");
  words_[id / 64] |= std::uint64_t{1} << (id % 64);
}

void AnalysisSet::erase(std::size_t id) {
  if (id >= capacity_) return;
  words_[id / 64] &= ~(std::uint64_t{1} << (id % 64));
}

bool AnalysisSet::contains(std::size_t id) const {
  return id < capacity_ && (words_[id / 64] >> (id % 64)) & 1u;
}

std::size_t AnalysisSet::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool AnalysisSet::is_subset_of(const AnalysisSet& other) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    std::uint64_t theirs = i < other.words_.size() ? other.words_[i] : 0;
    if (words_[i] & ~theirs) return false;
  }
  return true;
}

bool AnalysisSet::intersects(const AnalysisSet& other) const {
  for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) {
    if (words_[i] & other.words_[i]) return true;
  }
  return false;
}

std::vector<std::size_t> AnalysisSet::ids() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < capacity_; ++i) {
    if (contains(i)) out.push_back(i);
  }
  return out;
}

AnalysisSet& AnalysisSet::operator&=(const AnalysisSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    words_[i] &= i < other.words_.size() ? other.words_[i] : 0;
  }
  return *this;
}

AnalysisSet& AnalysisSet::operator|=(const AnalysisSet& other) {
  for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) {
    words_[i] |= other.words_[i];
  }
  return *this;
}

AnalysisSet& AnalysisSet::operator-=(const AnalysisSet& other) {
  for (std::size_t i = 0; i < words_.size() && i < other.words_.size(); ++i) {
    words_[i] &= ~other.words_[i];
  }
  return *this;
}

// --- Properties -----------------------------------------------------------

std::string_view to_string(PropertyKind kind) {
  switch (kind) {
    case PropertyKind::constituent: return "constituent";
    case PropertyKind::semantic_triple: return "semantic-triple";
    case PropertyKind::word_sense: return "word-sense";
    case PropertyKind::sentence_type: return "sentence-type";
    case PropertyKind::rule_name: return "rule-name";
    case PropertyKind::arg_triple: return "arg-triple";
  }
  return "rule-name";
}

PropertyKind parse_property_kind(std::string_view text) {
  for (auto kind : {PropertyKind::constituent, PropertyKind::semantic_triple,
                    PropertyKind::word_sense, PropertyKind::sentence_type,
                    PropertyKind::rule_name, PropertyKind::arg_triple}) {
    if (to_string(kind) == text) return kind;
  }
  invalid("unknown property kind '" + std::string(text) + "'");
}

PropertyKind kind_of_key(std::string_view key) {
  if (key.size() >= 2 && key[1] == ':') {
    switch (key[0]) {
      case 'c': return PropertyKind::constituent;
      case 't': return PropertyKind::semantic_triple;
      case 'w': return PropertyKind::word_sense;
      case 'y': return PropertyKind::sentence_type;
      case 'r': return PropertyKind::rule_name;
      case 'a': return PropertyKind::arg_triple;
      default: break;
    }
  }
  invalid("unknown property kind in key '" + std::string(key) + "'");
}

int friendliness(PropertyKind kind) {
  switch (kind) {
    case PropertyKind::constituent: return 1;
    case PropertyKind::semantic_triple: return 2;
    case PropertyKind::word_sense: return 3;
    case PropertyKind::sentence_type: return 4;
    case PropertyKind::rule_name: return 5;
    case PropertyKind::arg_triple: return 6;
  }
  return 6;
}

PropertyKind kind_of(const PropertyContent& content) {
  struct Visitor {
    PropertyKind operator()(const ConstituentFact&) const { return PropertyKind::constituent; }
    PropertyKind operator()(const TripleFact& t) const {
      return t.argument ? PropertyKind::arg_triple : PropertyKind::semantic_triple;
    }
    PropertyKind operator()(const WordSenseFact&) const { return PropertyKind::word_sense; }
    PropertyKind operator()(const SentenceTypeFact&) const { return PropertyKind::sentence_type; }
    PropertyKind operator()(const RuleFact&) const { return PropertyKind::rule_name; }
  };
  return std::visit(Visitor{}, content);
}

std::string canonical_key(const PropertyContent& content) {
  struct Visitor {
    std::string operator()(const ConstituentFact& c) const {
      if (c.category.empty() || c.span.start >= c.span.end) {
        invalid("constituent needs a category and a non-empty span");
      }
      return "c:" + c.category + ":" + std::to_string(c.span.start) + "-" +
             std::to_string(c.span.end);
    }
    std::string operator()(const TripleFact& t) const {
      if (t.relation.empty()) invalid("triple relation is empty");
      if (t.head.index == t.dependent.index) invalid("triple head equals its dependent");
      if (t.head.word.empty() || t.dependent.word.empty()) invalid("triple word form is empty");
      std::string out = t.argument ? "a:" : "t:";
      out += std::to_string(t.head.index) + ":" + key_word(t.relation) + ":" +
             (t.low ? "+" : "-") + ":" + std::to_string(t.dependent.index) + ":" +
             key_word(t.head.word) + ":" + key_word(t.dependent.word);
      return out;
    }
    std::string operator()(const WordSenseFact& w) const {
      if (w.label.empty()) invalid("word sense label is empty");
      return "w:" + std::to_string(w.index) + ":" + key_word(w.label);
    }
    std::string operator()(const SentenceTypeFact& s) const {
      return "y:" + std::string(to_string(s.type));
    }
    std::string operator()(const RuleFact& r) const {
      if (r.name.empty()) invalid("rule name is empty");
      return "r:" + r.name;
    }
  };
  return std::visit(Visitor{}, content);
}

std::string structural_key(std::string_view key) {
  auto kind = kind_of_key(key);
  if (kind != PropertyKind::semantic_triple && kind != PropertyKind::arg_triple) {
    return std::string(key);
  }
  auto fields = split_fields(key);
  if (fields.size() < 5) return std::string(key);
  std::string out(fields[0]);
  for (std::size_t i = 1; i < 5; ++i) {
    out.push_back(':');
    out += fields[i];
  }
  return out;
}

std::string display_text(const PropertyContent& content) {
  struct Visitor {
    std::string operator()(const ConstituentFact& c) const {
      return c.category + ": " + c.phrase;
    }
    std::string operator()(const TripleFact& t) const {
      return t.head.word + " " + (t.low ? "" : "-") + t.relation + " " + t.dependent.word;
    }
    std::string operator()(const WordSenseFact& w) const {
      return sense_root(w.label) + " = " + w.gloss;
    }
    std::string operator()(const SentenceTypeFact& s) const {
      return std::string(display_name(s.type));
    }
    std::string operator()(const RuleFact& r) const { return r.name; }
  };
  return std::visit(Visitor{}, content);
}

Property make_property(PropertyContent content, Span span) {
  Property p;
  p.kind = kind_of(content);
  p.key = canonical_key(content);
  p.display = display_text(content);
  p.span = span;
  p.content = std::move(content);
  return p;
}

std::string_view to_string(Polarity value) {
  return value == Polarity::good ? "good" : "bad";
}

Polarity parse_polarity(std::string_view text) {
  if (text == "good") return Polarity::good;
  if (text == "bad") return Polarity::bad;
  invalid("judgment value must be 'good' or 'bad', got '" + std::string(text) + "'");
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::user: return "user";
    case Provenance::derived: return "derived";
    case Provenance::automatic: return "auto";
    case Provenance::pos_propagated: return "pos-propagated";
  }
  return "user";
}

Provenance parse_provenance(std::string_view text) {
  for (auto p : {Provenance::user, Provenance::derived, Provenance::automatic,
                 Provenance::pos_propagated}) {
    if (to_string(p) == text) return p;
  }
  invalid("unknown provenance '" + std::string(text) + "'");
}

// --- Incidence ------------------------------------------------------------

Incidence::Incidence(std::size_t analysis_count, std::vector<Property> properties,
                     std::vector<AnalysisSet> holds, std::vector<std::size_t> multiplicity)
    : analysis_count_(analysis_count), multiplicity_(std::move(multiplicity)) {
  if (properties.size() != holds.size()) {
    invalid("incidence needs one holds-set per property");
  }
  if (multiplicity_.empty()) multiplicity_.assign(analysis_count_, 1);
  if (multiplicity_.size() != analysis_count_) {
    invalid("incidence multiplicity does not match the analysis count");
  }
  std::vector<std::size_t> order(properties.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return properties[a].key < properties[b].key;
  });
  properties_.reserve(properties.size());
  holds_.reserve(properties.size());
  for (auto i : order) {
    if (holds[i].capacity() != analysis_count_) {
      invalid("holds-set for '" + properties[i].key + "' has the wrong capacity");
    }
    if (!index_.emplace(properties[i].key, properties_.size()).second) {
      invalid("duplicate property key '" + properties[i].key + "'");
    }
    properties_.push_back(std::move(properties[i]));
    holds_.push_back(std::move(holds[i]));
  }
}

std::optional<std::size_t> Incidence::find(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Incidence::index_of(std::string_view key) const {
  auto index = find(key);
  if (!index) throw Error(ErrorCode::not_found, "unknown property '" + std::string(key) + "'");
  return *index;
}

bool Incidence::is_discriminant(std::size_t index) const {
  auto n = holds(index).count();
  return n > 0 && n < analysis_count_;
}

std::vector<std::size_t> Incidence::display_order() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < properties_.size(); ++i) {
    if (properties_[i].displayed() && is_discriminant(i)) out.push_back(i);
  }
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = properties_[a];
    const auto& pb = properties_[b];
    if (pa.friendliness() != pb.friendliness()) return pa.friendliness() < pb.friendliness();
    if (pa.span.width() != pb.span.width()) return pa.span.width() > pb.span.width();
    return pa.key < pb.key;
  });
  return out;
}

bool is_discriminant(const Incidence& incidence, std::string_view key) {
  return incidence.is_discriminant(incidence.index_of(key));
}

}  // namespace forestjudge

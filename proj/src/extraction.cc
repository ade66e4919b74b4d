#include "forestjudge/extraction.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "forestjudge/error.h"

namespace forestjudge {

namespace {

bool starts_with_any(const std::string& text, const std::vector<std::string>& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) { return text.rfind(p, 0) == 0; });
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r");
  return std::string(text.substr(begin, end - begin + 1));
}

}  // namespace

// --- HeadTable ------------------------------------------------------------

HeadTable::HeadTable() = default;

void HeadTable::set_head(const std::string& category, const std::string& rule,
                         std::size_t child) {
  explicit_[{category, rule}] = child;
}

std::size_t HeadTable::head_of(const Node& node) const {
  if (node.head) return *node.head;
  if (auto it = explicit_.find({node.category, node.rule}); it != explicit_.end()) {
    if (it->second >= node.children.size()) {
      throw Error(ErrorCode::invalid_argument,
                  "head entry for rule '" + node.rule + "' is out of range");
    }
    return it->second;
  }
  if (starts_with_any(node.category, left_headed_prefixes)) return 0;
  if (starts_with_any(node.category, nominal_prefixes)) {
    for (std::size_t i = node.children.size(); i-- > 0;) {
      if (starts_with_any(node.children[i].category, nominal_prefixes)) return i;
    }
  }
  throw Error(ErrorCode::invalid_argument,
              "no head entry for rule '" + node.rule + "' (" + node.category + ")");
}

bool HeadTable::is_site(const Token& token) const {
  return starts_with_any(token.pos, site_pos_prefixes);
}

// --- ClassMap -------------------------------------------------------------

void ClassMap::add(const std::string& word, const std::string& class_name) {
  classes_[lowercase(word)] = class_name;
}

std::string ClassMap::class_of(std::string_view word) const {
  auto it = classes_.find(lowercase(word));
  if (it != classes_.end()) return it->second;
  it = classes_.find(lowercase(sense_root(word)));
  if (it != classes_.end()) return it->second;
  return std::string(word);
}

ClassMap parse_class_map(std::string_view text) {
  ClassMap map;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::parse_error, "class map line " + std::to_string(line_number) +
                                              ": expected 'sense<TAB>class'");
    }
    auto word = trim(line.substr(0, tab));
    auto cls = trim(line.substr(tab + 1));
    if (word.empty() || cls.empty() || cls.find('\t') != std::string::npos) {
      throw Error(ErrorCode::parse_error, "class map line " + std::to_string(line_number) +
                                              ": expected two non-empty columns");
    }
    map.add(word, cls);
  }
  return map;
}

ClassMap load_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read class map '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_class_map(buffer.str());
}

// --- Extraction -----------------------------------------------------------

namespace {

class Extractor {
 public:
  Extractor(const Analysis& analysis, const Sentence& sentence, const HeadTable& heads)
      : analysis_(analysis), sentence_(sentence), heads_(heads) {}

  std::vector<Property> run() {
    std::vector<Property> constituents;
    std::vector<Property> triples;
    std::vector<std::string> rules;
    walk(analysis_.tree, constituents, triples, rules);

    std::vector<Property> out = std::move(constituents);
    out.insert(out.end(), triples.begin(), triples.end());
    for (const auto& [index, sense] : analysis_.senses) {
      if (!sense.ambiguous) continue;
      out.push_back(make_property(WordSenseFact{index, sense.label, sense.gloss},
                                  Span{index, index + 1}));
    }
    Span whole{0, sentence_.size()};
    out.push_back(make_property(SentenceTypeFact{analysis_.type}, whole));
    for (const auto& rule : rules) out.push_back(make_property(RuleFact{rule}, whole));
    return out;
  }

 private:
  std::size_t lexical_head(const Node& node) const {
    const Node* cursor = &node;
    while (!cursor->is_leaf()) cursor = &cursor->children[heads_.head_of(*cursor)];
    return cursor->span.start;
  }

  bool is_site(std::size_t token) const { return heads_.is_site(sentence_.tokens.at(token)); }

  std::string root(std::size_t token) const {
    if (auto it = analysis_.senses.find(token); it != analysis_.senses.end()) {
      return sense_root(it->second.label);
    }
    return sentence_.tokens.at(token).surface;
  }

  // An attachment is low iff the modified head is the rightmost site token
  // strictly left of the modifier.
  bool is_low(std::size_t head, const Span& modifier) const {
    for (std::size_t t = modifier.start; t-- > 0;) {
      if (is_site(t)) return t == head;
    }
    return false;
  }

  Property triple(std::size_t head, const std::string& relation, std::size_t dependent,
                  const Span& modifier, bool argument) const {
    TripleFact fact{TripleEnd{head, root(head)}, relation, is_low(head, modifier),
                    TripleEnd{dependent, root(dependent)}, argument};
    Span span{std::min(head, dependent), std::max(head, dependent) + 1};
    return make_property(std::move(fact), span);
  }

  void attachments(const Node& node, std::vector<Property>& triples) const {
    const std::size_t head_child = heads_.head_of(node);
    const std::size_t head = lexical_head(node);
    if (!is_site(head)) return;

    std::string conjunction;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const auto& child = node.children[i];
      if (i != head_child && child.is_leaf() &&
          sentence_.tokens[child.span.start].pos == heads_.conjunction_pos) {
        conjunction = lowercase(sentence_.tokens[child.span.start].surface);
        break;
      }
    }

    std::size_t argument_ordinal = 0;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i == head_child) continue;
      const auto& child = node.children[i];
      const bool argument_slot = heads_.argument_categories.count(child.category) > 0;
      if (argument_slot && i > head_child) ++argument_ordinal;
      if (child.is_leaf()) continue;

      const std::size_t dependent = lexical_head(child);
      if (is_site(dependent)) {
        if (!conjunction.empty()) {
          triples.push_back(triple(head, conjunction, dependent, child.span, false));
        } else if (argument_slot) {
          std::string label = i < head_child ? "subj" : "arg" + std::to_string(argument_ordinal);
          triples.push_back(triple(head, label, dependent, child.span, true));
        } else {
          triples.push_back(triple(head, "mod", dependent, child.span, false));
        }
        continue;
      }

      // Preposition-headed modifier: the relation is the preposition and the
      // dependent is the head of its object.
      const std::size_t marker_child = heads_.head_of(child);
      if (!child.children[marker_child].is_leaf()) continue;
      const auto relation = lowercase(sentence_.tokens[dependent].surface);
      for (std::size_t j = 0; j < child.children.size(); ++j) {
        if (j == marker_child || child.children[j].is_leaf()) continue;
        const std::size_t object = lexical_head(child.children[j]);
        if (is_site(object)) {
          triples.push_back(triple(head, relation, object, child.span, false));
        }
      }
    }
  }

  void walk(const Node& node, std::vector<Property>& constituents,
            std::vector<Property>& triples, std::vector<std::string>& rules) const {
    if (node.is_leaf()) return;
    constituents.push_back(make_property(
        ConstituentFact{node.category, node.span,
                        sentence_.phrase(node.span.start, node.span.end)},
        node.span));
    if (std::find(rules.begin(), rules.end(), node.rule) == rules.end()) {
      rules.push_back(node.rule);
    }
    attachments(node, triples);
    for (const auto& child : node.children) walk(child, constituents, triples, rules);
  }

  const Analysis& analysis_;
  const Sentence& sentence_;
  const HeadTable& heads_;
};

}  // namespace

std::vector<Property> extract_properties(const Analysis& analysis, const Sentence& sentence,
                                         const HeadTable& heads) {
  return Extractor(analysis, sentence, heads).run();
}

Incidence build_incidence(const std::vector<Analysis>& analyses, const Sentence& sentence,
                          const HeadTable& heads, std::vector<std::size_t>* representatives) {
  if (analyses.empty()) {
    throw Error(ErrorCode::invalid_argument,
                "sentence '" + sentence.id + "' has no analyses to build an incidence from");
  }
  std::map<std::vector<std::string>, std::size_t> seen;
  std::vector<std::vector<std::string>> key_sets;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> multiplicity;
  std::map<std::string, Property> by_key;

  for (std::size_t a = 0; a < analyses.size(); ++a) {
    auto properties = extract_properties(analyses[a], sentence, heads);
    std::vector<std::string> keys;
    keys.reserve(properties.size());
    for (auto& p : properties) {
      keys.push_back(p.key);
      by_key.try_emplace(p.key, std::move(p));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    auto [it, inserted] = seen.emplace(keys, kept.size());
    if (!inserted) {
      ++multiplicity[it->second];
      continue;
    }
    kept.push_back(a);
    multiplicity.push_back(1);
    key_sets.push_back(std::move(keys));
  }

  const std::size_t n = kept.size();
  std::map<std::string, AnalysisSet> holds;
  for (std::size_t id = 0; id < n; ++id) {
    for (const auto& key : key_sets[id]) {
      auto [it, inserted] = holds.try_emplace(key, n);
      it->second.insert(id);
    }
  }
  std::vector<Property> properties;
  std::vector<AnalysisSet> sets;
  for (auto& [key, set] : holds) {
    properties.push_back(by_key.at(key));
    sets.push_back(std::move(set));
  }
  if (representatives) *representatives = kept;
  return Incidence(n, std::move(properties), std::move(sets), std::move(multiplicity));
}

Property abstract_property(const Property& property, const ClassMap& classes) {
  const auto* fact = std::get_if<TripleFact>(&property.content);
  if (!fact) return property;
  TripleFact abstracted = *fact;
  abstracted.head.word = classes.class_of(fact->head.word);
  abstracted.dependent.word = classes.class_of(fact->dependent.word);

  Property out = property;
  out.content = abstracted;
  out.display = display_text(abstracted);
  out.key = std::string(abstracted.argument ? "a:" : "t:") + lowercase(abstracted.head.word) +
            ":" + lowercase(abstracted.relation) + ":" + (abstracted.low ? "+" : "-") + ":" +
            lowercase(abstracted.dependent.word);
  return out;
}

}  // namespace forestjudge

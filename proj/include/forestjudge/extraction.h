#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "forestjudge/model.h"

namespace forestjudge {

// Resolves head children for nodes whose trees do not carry a head mark, and
// holds the few category conventions triple extraction needs.
class HeadTable {
 public:
  HeadTable();

  void set_head(const std::string& category, const std::string& rule, std::size_t child);

  // Head child of an internal node: the node's own mark, then an explicit
  // (category, rule) entry, then the category default (leftmost child for
  // verbal/sentential categories, rightmost nominal child for nominal ones).
  // Throws Error(invalid_argument) naming the rule when none applies.
  std::size_t head_of(const Node& node) const;

  // Tokens whose POS starts with one of these prefixes can be modified
  // (attachment sites) and can head triple ends.
  std::vector<std::string> site_pos_prefixes = {"N", "V"};
  // Non-head children of these categories are arguments, not modifiers.
  std::set<std::string> argument_categories = {"NP"};
  // POS tag of coordinating conjunctions.
  std::string conjunction_pos = "CC";
  // Category prefixes defaulting to the leftmost child / rightmost nominal child.
  std::vector<std::string> left_headed_prefixes = {"V", "S", "IMP", "ADVP", "PP", "WH"};
  std::vector<std::string> nominal_prefixes = {"N"};

  bool is_site(const Token& token) const;

 private:
  std::map<std::pair<std::string, std::string>, std::size_t> explicit_;
};

// One-level mapping from word senses (by lowercase root word) to semantic
// class names. Unknown words map to themselves.
class ClassMap {
 public:
  void add(const std::string& word, const std::string& class_name);
  std::string class_of(std::string_view word) const;
  std::size_t size() const { return classes_.size(); }

 private:
  std::map<std::string, std::string> classes_;
};

// Two tab-separated columns (sense, class) per line; '#' starts a comment.
// Throws Error(parse_error) with the line number.
ClassMap parse_class_map(std::string_view text);
ClassMap load_class_map(const std::string& path);

// Properties of one analysis, in a fixed order: constituents (preorder),
// triples (preorder), word senses by token, the sentence type, then rule
// names by first use.
std::vector<Property> extract_properties(const Analysis& analysis, const Sentence& sentence,
                                         const HeadTable& heads);

// Union of the analyses' properties with holds-sets. Analyses with identical
// property sets are collapsed into one id; `representatives` (if given)
// receives the input index kept for each id.
Incidence build_incidence(const std::vector<Analysis>& analyses, const Sentence& sentence,
                          const HeadTable& heads,
                          std::vector<std::size_t>* representatives = nullptr);

// Replaces triple word forms with their class names and drops token positions
// from the key ("t:show:to:-:cc_city"); other kinds pass through. Idempotent.
Property abstract_property(const Property& property, const ClassMap& classes);

}  // namespace forestjudge

#pragma once

// A small context-free grammar with a sense lexicon, and an exhaustive chart
// parser over it. This stands in for a full analyser: it produces genuinely
// ambiguous analyses for corpora and for interactive type-in.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forestjudge/model.h"

namespace forestjudge {

struct GrammarRule {
  std::string name;
  std::string parent;
  std::vector<std::string> children;
  std::size_t head = 0;
};

struct LexicalEntry {
  std::string word;
  std::string pos;
  std::string category;
  std::string sense;
  std::string gloss;
};

class Grammar {
 public:
  const std::vector<GrammarRule>& rules() const { return rules_; }
  const std::vector<std::pair<std::string, SentenceType>>& start() const { return start_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Entries for a word, trying the exact form first, then lowercase.
  const std::vector<LexicalEntry>* lookup(std::string_view word) const;
  // True if the lexicon lists more than one distinct sense for the word.
  bool sense_ambiguous(std::string_view word) const;

 private:
  friend Grammar parse_grammar(std::string_view text);

  std::vector<GrammarRule> rules_;
  std::map<std::string, std::vector<LexicalEntry>> lexicon_;
  std::vector<std::pair<std::string, SentenceType>> start_;
  std::vector<std::string> warnings_;
};

// Line formats ('#' starts a comment):
//   start IMP imperative
//   vp_v_np: VP -> V NP [head=0]
//   serving VBG V serve_1 provide
// Throws Error(parse_error) with the line number for syntax errors, and
// Error(invalid_argument) naming the rule for duplicate names, bad head
// indices or unary cycles. RHS categories with no rule or lexical entry are
// reported in warnings().
Grammar parse_grammar(std::string_view text);
Grammar load_grammar(const std::string& path);

inline constexpr std::size_t kDefaultMaxAnalyses = 10000;

struct ParseResult {
  Sentence sentence;  // POS tags taken from the first analysis
  std::vector<Analysis> analyses;
};

// Every complete parse rooted in a start category crossed with every sense
// assignment, in leftmost-derivation order. Throws Error(not_found) naming an
// unknown word and Error(invalid_argument) with the count when there are more
// than `max_analyses` parses.
ParseResult parse_all(std::string sentence_id, const std::vector<std::string>& words,
                      const Grammar& grammar, std::size_t max_analyses = kDefaultMaxAnalyses);

std::vector<std::string> tokenize(std::string_view text);

}  // namespace forestjudge

// Exhaustive chart parser. The chart maps (category, start, end) to the ways
// the category can cover that span; trees are then enumerated from the chart
// in leftmost-derivation order.

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "forestjudge/error.h"
#include "forestjudge/grammar.h"

namespace forestjudge {

namespace {

// One way of building a category over a span: a lexical entry (rule < 0) or a
// rule with the end position of each child.
struct Derivation {
  int rule = -1;
  std::size_t entry = 0;
  std::vector<std::size_t> cuts;
};

// A subtree plus the lexical entry chosen for each token it covers.
struct Subtree {
  Node node;
  std::vector<std::pair<std::size_t, std::size_t>> entries;  // (token, entry index)
};

class Chart {
 public:
  Chart(const std::vector<std::string>& words, const Grammar& grammar)
      : grammar_(grammar) {
    for (std::size_t i = 0; i < grammar.rules().size(); ++i) {
      by_parent_[grammar.rules()[i].parent].push_back(i);
    }
    for (const auto& word : words) {
      const auto* entries = grammar.lookup(word);
      if (!entries) throw Error(ErrorCode::not_found, "unknown word '" + word + "'");
      // Identical (category, sense) entries would yield identical trees.
      std::vector<std::size_t> kept;
      std::set<std::pair<std::string, std::string>> seen;
      for (std::size_t e = 0; e < entries->size(); ++e) {
        if (seen.emplace((*entries)[e].category, (*entries)[e].sense).second) kept.push_back(e);
      }
      lexical_.push_back(entries);
      usable_.push_back(std::move(kept));
    }
  }

  const std::vector<Derivation>& derivations(const std::string& category, std::size_t i,
                                             std::size_t j) {
    auto key = std::make_tuple(category, i, j);
    if (auto it = chart_.find(key); it != chart_.end()) return it->second;
    std::vector<Derivation> found;
    if (j == i + 1) {
      for (auto e : usable_[i]) {
        if ((*lexical_[i])[e].category == category) found.push_back(Derivation{-1, e, {}});
      }
    }
    if (auto it = by_parent_.find(category); it != by_parent_.end()) {
      for (auto r : it->second) {
        const auto& rule = grammar_.rules()[r];
        std::vector<std::size_t> cuts;
        split(rule, 0, i, j, cuts, [&](const std::vector<std::size_t>& c) {
          found.push_back(Derivation{static_cast<int>(r), 0, c});
        });
      }
    }
    return chart_.emplace(key, std::move(found)).first->second;
  }

  static constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max() / 4;

  // Number of trees, saturating at kSaturated.
  std::size_t count(const std::string& category, std::size_t i, std::size_t j) {
    auto key = std::make_tuple(category, i, j);
    if (auto it = counts_.find(key); it != counts_.end()) return it->second;
    std::size_t total = 0;
    for (const auto& d : derivations(category, i, j)) {
      std::size_t product = 1;
      if (d.rule >= 0) {
        const auto& rule = grammar_.rules()[d.rule];
        std::size_t start = i;
        for (std::size_t k = 0; k < rule.children.size(); ++k) {
          product = saturating_mul(product, count(rule.children[k], start, d.cuts[k]));
          start = d.cuts[k];
        }
      }
      total = std::min(total + product, kSaturated);
    }
    counts_.emplace(key, total);
    return total;
  }

  const std::vector<Subtree>& trees(const std::string& category, std::size_t i, std::size_t j) {
    auto key = std::make_tuple(category, i, j);
    if (auto it = trees_.find(key); it != trees_.end()) return it->second;
    std::vector<Subtree> out;
    for (const auto& d : derivations(category, i, j)) {
      if (d.rule < 0) {
        Subtree leaf;
        leaf.node.category = category;
        leaf.node.span = Span{i, j};
        leaf.entries.emplace_back(i, d.entry);
        out.push_back(std::move(leaf));
        continue;
      }
      const auto& rule = grammar_.rules()[d.rule];
      std::vector<const std::vector<Subtree>*> parts;
      std::size_t start = i;
      for (std::size_t k = 0; k < rule.children.size(); ++k) {
        parts.push_back(&trees(rule.children[k], start, d.cuts[k]));
        start = d.cuts[k];
      }
      // Cartesian product with the first child varying slowest.
      std::vector<std::size_t> pick(parts.size(), 0);
      if (std::any_of(parts.begin(), parts.end(), [](auto* p) { return p->empty(); })) continue;
      while (true) {
        Subtree combined;
        combined.node.category = category;
        combined.node.span = Span{i, j};
        combined.node.rule = rule.name;
        combined.node.head = rule.head;
        for (std::size_t k = 0; k < parts.size(); ++k) {
          const auto& child = (*parts[k])[pick[k]];
          combined.node.children.push_back(child.node);
          combined.entries.insert(combined.entries.end(), child.entries.begin(),
                                  child.entries.end());
        }
        out.push_back(std::move(combined));
        if (!advance(pick, parts)) break;
      }
    }
    return trees_.emplace(key, std::move(out)).first->second;
  }

  const LexicalEntry& entry(std::size_t token, std::size_t index) const {
    return (*lexical_[token])[index];
  }

 private:
  static bool advance(std::vector<std::size_t>& pick,
                      const std::vector<const std::vector<Subtree>*>& parts) {
    for (std::size_t k = pick.size(); k-- > 0;) {
      if (++pick[k] < parts[k]->size()) return true;
      pick[k] = 0;
    }
    return false;
  }

  static std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > kSaturated / a) return kSaturated;
    return a * b;
  }

  template <typename Emit>
  void split(const GrammarRule& rule, std::size_t k, std::size_t start, std::size_t end,
             std::vector<std::size_t>& cuts, Emit&& emit) {
    const std::size_t remaining = rule.children.size() - k;
    if (remaining == 1) {
      if (!derivations(rule.children[k], start, end).empty()) {
        cuts.push_back(end);
        emit(cuts);
        cuts.pop_back();
      }
      return;
    }
    // Every remaining child needs at least one token.
    for (std::size_t cut = start + 1; cut + (remaining - 1) <= end; ++cut) {
      if (derivations(rule.children[k], start, cut).empty()) continue;
      cuts.push_back(cut);
      split(rule, k + 1, cut, end, cuts, emit);
      cuts.pop_back();
    }
  }

  using Key = std::tuple<std::string, std::size_t, std::size_t>;

  const Grammar& grammar_;
  std::map<std::string, std::vector<std::size_t>> by_parent_;
  std::vector<const std::vector<LexicalEntry>*> lexical_;
  std::vector<std::vector<std::size_t>> usable_;
  std::map<Key, std::vector<Derivation>> chart_;
  std::map<Key, std::size_t> counts_;
  std::map<Key, std::vector<Subtree>> trees_;
};

}  // namespace

ParseResult parse_all(std::string sentence_id, const std::vector<std::string>& words,
                      const Grammar& grammar, std::size_t max_analyses) {
  if (max_analyses < 1) throw Error(ErrorCode::invalid_argument, "max analyses must be >= 1");
  if (words.empty()) throw Error(ErrorCode::invalid_argument, "cannot parse an empty sentence");
  Chart chart(words, grammar);
  const std::size_t n = words.size();

  std::size_t total = 0;
  for (const auto& [category, type] : grammar.start()) {
    total = std::min(total + chart.count(category, 0, n), std::numeric_limits<std::size_t>::max() / 4);
  }
  if (total > max_analyses) {
    throw Error(ErrorCode::invalid_argument,
                "sentence '" + sentence_id + "' has " + std::to_string(total) +
                    " analyses, more than the limit of " + std::to_string(max_analyses));
  }

  ParseResult result;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> chosen;
  for (const auto& [category, type] : grammar.start()) {
    for (const auto& subtree : chart.trees(category, 0, n)) {
      Analysis analysis;
      analysis.id = result.analyses.size();
      analysis.tree = subtree.node;
      analysis.type = type;
      for (const auto& [token, entry] : subtree.entries) {
        const auto& lexical = chart.entry(token, entry);
        analysis.senses[token] =
            SenseTag{lexical.sense, lexical.gloss, grammar.sense_ambiguous(words[token])};
      }
      result.analyses.push_back(std::move(analysis));
      chosen.push_back(subtree.entries);
    }
  }

  std::vector<std::pair<std::string, std::string>> tokens;
  for (std::size_t t = 0; t < n; ++t) {
    std::string pos = grammar.lookup(words[t])->front().pos;
    if (!chosen.empty()) {
      for (const auto& [token, entry] : chosen.front()) {
        if (token == t) pos = chart.entry(token, entry).pos;
      }
    }
    tokens.emplace_back(words[t], pos);
  }
  result.sentence = make_sentence(std::move(sentence_id), tokens);
  return result;
}

}  // namespace forestjudge

#include "forestjudge/grammar.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "forestjudge/error.h"

namespace forestjudge {

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

[[noreturn]] void syntax_error(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::parse_error, "grammar line " + std::to_string(line) + ": " + message);
}

GrammarRule parse_rule(std::string_view line, std::size_t line_number) {
  auto colon = line.find(':');
  auto arrow = line.find("->");
  if (colon == std::string_view::npos || arrow == std::string_view::npos || colon > arrow) {
    syntax_error(line_number, "expected 'name: Parent -> Child ... [head=k]'");
  }
  GrammarRule rule;
  auto name = split_ws(line.substr(0, colon));
  auto parent = split_ws(line.substr(colon + 1, arrow - colon - 1));
  if (name.size() != 1 || parent.size() != 1) {
    syntax_error(line_number, "rule needs one name and one parent category");
  }
  rule.name = name[0];
  rule.parent = parent[0];

  std::string_view rhs = line.substr(arrow + 2);
  if (auto bracket = rhs.find('['); bracket != std::string_view::npos) {
    auto close = rhs.find(']', bracket);
    if (close == std::string_view::npos) syntax_error(line_number, "unterminated '['");
    auto annotation = split_ws(rhs.substr(bracket + 1, close - bracket - 1));
    if (annotation.size() != 1 || annotation[0].rfind("head=", 0) != 0) {
      syntax_error(line_number, "expected '[head=k]'");
    }
    try {
      std::size_t used = 0;
      auto digits = annotation[0].substr(5);
      rule.head = std::stoul(digits, &used);
      if (used != digits.size()) throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      syntax_error(line_number, "head index is not a number");
    }
    if (!split_ws(rhs.substr(close + 1)).empty()) {
      syntax_error(line_number, "text after head annotation");
    }
    rhs = rhs.substr(0, bracket);
  }
  rule.children = split_ws(rhs);
  if (rule.children.empty()) syntax_error(line_number, "rule '" + rule.name + "' has no children");
  return rule;
}

}  // namespace

const std::vector<LexicalEntry>* Grammar::lookup(std::string_view word) const {
  if (auto it = lexicon_.find(std::string(word)); it != lexicon_.end()) return &it->second;
  if (auto it = lexicon_.find(lowercase(word)); it != lexicon_.end()) return &it->second;
  return nullptr;
}

bool Grammar::sense_ambiguous(std::string_view word) const {
  const auto* entries = lookup(word);
  if (!entries) return false;
  std::set<std::string> senses;
  for (const auto& e : *entries) senses.insert(e.sense);
  return senses.size() > 1;
}

Grammar parse_grammar(std::string_view text) {
  Grammar grammar;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields[0] == "start") {
      if (fields.size() != 3) syntax_error(line_number, "expected 'start Category type'");
      for (const auto& existing : grammar.start_) {
        if (existing.first == fields[1]) syntax_error(line_number, "duplicate start category");
      }
      try {
        grammar.start_.emplace_back(fields[1], parse_sentence_type(fields[2]));
      } catch (const Error& e) {
        syntax_error(line_number, e.what());
      }
    } else if (line.find("->") != std::string::npos) {
      grammar.rules_.push_back(parse_rule(line, line_number));
    } else {
      if (fields.size() < 5) {
        syntax_error(line_number, "expected 'word POS Category sense gloss'");
      }
      LexicalEntry entry{fields[0], fields[1], fields[2], fields[3], {}};
      for (std::size_t i = 4; i < fields.size(); ++i) {
        if (i > 4) entry.gloss.push_back(' ');
        entry.gloss += fields[i];
      }
      grammar.lexicon_[entry.word].push_back(std::move(entry));
    }
  }

  if (grammar.start_.empty()) {
    throw Error(ErrorCode::invalid_argument, "grammar declares no start category");
  }
  std::set<std::string> names;
  std::set<std::string> defined;
  for (const auto& rule : grammar.rules_) {
    if (!names.insert(rule.name).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate rule name '" + rule.name + "'");
    }
    if (rule.head >= rule.children.size()) {
      throw Error(ErrorCode::invalid_argument,
                  "rule '" + rule.name + "' has head index out of range");
    }
    defined.insert(rule.parent);
  }
  for (const auto& [word, entries] : grammar.lexicon_) {
    for (const auto& entry : entries) defined.insert(entry.category);
  }

  // Unary cycles would make the set of parses infinite.
  std::map<std::string, std::vector<std::string>> unary;
  for (const auto& rule : grammar.rules_) {
    if (rule.children.size() == 1) unary[rule.parent].push_back(rule.children[0]);
  }
  std::map<std::string, int> mark;
  std::function<void(const std::string&)> visit = [&](const std::string& category) {
    mark[category] = 1;
    for (const auto& next : unary[category]) {
      if (mark[next] == 1) {
        throw Error(ErrorCode::invalid_argument,
                    "unary rule cycle through category '" + next + "'");
      }
      if (mark[next] == 0) visit(next);
    }
    mark[category] = 2;
  };
  for (const auto& [category, targets] : unary) {
    if (mark[category] == 0) visit(category);
  }

  std::set<std::string> unknown;
  for (const auto& rule : grammar.rules_) {
    for (const auto& child : rule.children) {
      if (!defined.count(child)) unknown.insert(child);
    }
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& c : unknown) list += (list.empty() ? "" : ", ") + c;
    grammar.warnings_.push_back("unreachable categories (no rule or lexical entry): " + list);
  }
  return grammar;
}

Grammar load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot read grammar '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_grammar(buffer.str());
}

std::vector<std::string> tokenize(std::string_view text) { return split_ws(text); }

}  // namespace forestjudge

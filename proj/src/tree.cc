// Labeled-bracketing reader and writer for analysis trees.

#include <cctype>

#include "forestjudge/error.h"
#include "forestjudge/model.h"

namespace forestjudge {

namespace {

void append_escaped(std::string& out, std::string_view text) {
  for (char c : text) {
    if (c == '(' || c == ')' || c == '\\' || c == ' ' || c == '/' || c == '^') {
      out.push_back('\\');
    }
    out.push_back(c);
  }
}

void format_node(std::string& out, const Node& node, const Sentence& sentence) {
  out.push_back('(');
  append_escaped(out, node.category);
  if (node.is_leaf()) {
    out.push_back(' ');
    append_escaped(out, sentence.tokens.at(node.span.start).surface);
    out.push_back(')');
    return;
  }
  out.push_back('/');
  append_escaped(out, node.rule);
  if (node.head) {
    out.push_back('^');
    out += std::to_string(*node.head);
  }
  for (const auto& child : node.children) {
    out.push_back(' ');
    format_node(out, child, sentence);
  }
  out.push_back(')');
}

class TreeReader {
 public:
  TreeReader(std::string_view text, const Sentence& sentence)
      : text_(text), sentence_(sentence) {}

  Node read() {
    skip_space();
    Node root = read_node();
    skip_space();
    if (pos_ != text_.size()) fail("trailing text after tree");
    if (next_token_ != sentence_.size()) {
      fail("tree covers " + std::to_string(next_token_) + " of " +
           std::to_string(sentence_.size()) + " tokens");
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::parse_error,
                "tree at column " + std::to_string(pos_ + 1) + ": " + message);
  }

  void skip_space() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  // Reads up to an unescaped space, paren, '/' or '^'.
  std::string read_atom() {
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\\') {
        if (pos_ + 1 >= text_.size()) fail("dangling escape");
        out.push_back(text_[pos_ + 1]);
        pos_ += 2;
        continue;
      }
      if (c == ' ' || c == '(' || c == ')' || c == '/' || c == '^') break;
      out.push_back(c);
      ++pos_;
    }
    if (out.empty()) fail("expected a label");
    return out;
  }

  Node read_node() {
    expect('(');
    Node node;
    node.category = read_atom();
    if (pos_ < text_.size() && text_[pos_] == '/') {
      ++pos_;
      node.rule = read_atom();
      if (pos_ < text_.size() && text_[pos_] == '^') {
        ++pos_;
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          ++pos_;
        }
        if (start == pos_) fail("expected a head index after '^'");
        node.head = std::stoul(std::string(text_.substr(start, pos_ - start)));
      }
      node.span.start = next_token_;
      skip_space();
      while (pos_ < text_.size() && text_[pos_] == '(') {
        node.children.push_back(read_node());
        skip_space();
      }
      if (node.children.empty()) fail("internal node " + node.category + " has no children");
      if (node.head && *node.head >= node.children.size()) {
        fail("head index out of range on " + node.category);
      }
      node.span.end = next_token_;
      expect(')');
      return node;
    }
    skip_space();
    std::string surface = read_atom();
    if (next_token_ >= sentence_.size()) fail("more leaves than tokens");
    if (sentence_.tokens[next_token_].surface != surface) {
      fail("leaf '" + surface + "' does not match token " + std::to_string(next_token_) +
           " '" + sentence_.tokens[next_token_].surface + "'");
    }
    node.span = Span{next_token_, next_token_ + 1};
    ++next_token_;
    skip_space();
    expect(')');
    return node;
  }

  std::string_view text_;
  const Sentence& sentence_;
  std::size_t pos_ = 0;
  std::size_t next_token_ = 0;
};

}  // namespace

std::string format_tree(const Node& root, const Sentence& sentence) {
  std::string out;
  format_node(out, root, sentence);
  return out;
}

Node parse_tree(std::string_view text, const Sentence& sentence) {
  return TreeReader(text, sentence).read();
}

}  // namespace forestjudge

#include "fixtures.h"

#include <fstream>
#include <sstream>

#include "forestjudge/error.h"

namespace fixtures {

std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(FORESTJUDGE_DATA_DIR) / name;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const Grammar& bundled_grammar() {
  static const Grammar grammar = load_grammar(data_path("atis.grammar").string());
  return grammar;
}

const ClassMap& bundled_classes() {
  static const ClassMap classes = load_class_map(data_path("atis.classes").string());
  return classes;
}

Grammar grammar_without_adverbials() {
  std::istringstream in(read_file(data_path("atis.grammar")));
  std::string text, line;
  while (std::getline(in, line)) {
    if (line.rfind("vp_vp_advp:", 0) == 0 || line.rfind("advp_vp:", 0) == 0) continue;
    text += line + "\n";
  }
  return parse_grammar(text);
}

Grammar grammar_with_gerund() {
  return parse_grammar(read_file(data_path("atis.grammar")) +
                       "nom_nom_ger: NOM -> NOM GER [head=0]\n"
                       "ger_vg_np: GER -> Vg NP [head=0]\n"
                       "serving VBG Vg serve_1 provide\n");
}

ParseResult parse(const std::string& id, const std::string& text, const Grammar& grammar) {
  return parse_all(id, tokenize(text), grammar);
}

SentenceRecord record(const std::string& id, const std::string& text, const Grammar& grammar) {
  auto parsed = parse(id, text, grammar);
  return make_record(std::move(parsed.sentence), std::move(parsed.analyses), HeadTable{});
}

std::shared_ptr<const Incidence> f154() {
  constexpr std::size_t n = 154;
  std::vector<Property> properties;
  std::vector<AnalysisSet> holds;
  auto add = [&](PropertyContent content, Span span, auto&& member) {
    AnalysisSet set(n);
    for (std::size_t a = 0; a < n; ++a) {
      if (member(a)) set.insert(a);
    }
    properties.push_back(make_property(std::move(content), span));
    holds.push_back(std::move(set));
  };

  add(ConstituentFact{"NP", {2, 16}, "the cheapest flights that serve dinner"}, Span{2, 16},
      [](std::size_t a) { return a < 20; });
  add(ConstituentFact{"RELC", {5, 9}, "that serve dinner"}, Span{5, 9},
      [](std::size_t a) { return a < 2 || (a >= 40 && a < 50); });
  add(ConstituentFact{"VP", {0, 16}, "whole request"}, Span{0, 16},
      [](std::size_t a) { return a >= 20 && a < 90; });
  add(ConstituentFact{"PP", {10, 16}, "on the last leg"}, Span{10, 16},
      [](std::size_t a) { return a == 2 || (a >= 60 && a < 120); });
  add(TripleFact{{3, "flight"}, "on", false, {12, "leg"}, false}, Span{3, 13},
      [](std::size_t a) { return a == 3 || a >= 120; });
  add(WordSenseFact{6, "serve_1", "provide"}, Span{6, 7},
      [](std::size_t a) { return a < 20 || a % 2 == 0; });
  add(SentenceTypeFact{SentenceType::imperative}, Span{0, 16},
      [](std::size_t a) { return a != 153; });
  for (std::size_t bit = 0; bit < 8; ++bit) {
    add(RuleFact{"bit" + std::to_string(bit)}, Span{0, 16},
        [bit](std::size_t a) { return (a >> bit) & 1U; });
  }
  return std::make_shared<const Incidence>(n, std::move(properties), std::move(holds));
}

Corpus suspects_corpus() {
  static const char* cities[] = {"Boston",  "Denver",  "Dallas", "Atlanta", "Chicago",
                                 "Seattle", "Houston", "Oakland", "Baltimore", "Pittsburgh"};
  CorpusFile file{"suspects", {}};
  for (std::size_t i = 0; i < 10; ++i) {
    std::string id = "q" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1);
    std::string city = cities[i];
    std::string lower = city;
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto rec = record(id, "show me the flights to " + city);
    if (id == kContradictoryId) {
      append_judgment(rec, "t:0:to:-:5:show:" + lower, Polarity::good);
    } else {
      append_judgment(rec, "t:3:to:+:5:flight:" + lower, Polarity::good);
    }
    mark_ok(rec);
    file.records.push_back(std::move(rec));
  }
  return {file};
}

std::shared_ptr<const Incidence> random_incidence(std::mt19937& rng, std::size_t n,
                                                  std::size_t m) {
  std::vector<Property> properties;
  std::vector<AnalysisSet> holds;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> shape(0, 9);
  for (std::size_t p = 0; p < m; ++p) {
    AnalysisSet set(n);
    const int s = shape(rng);
    for (std::size_t a = 0; a < n; ++a) {
      // Mostly random sets, with some empty, full and singleton ones mixed in.
      const bool member = s == 0 ? false : s == 1 ? true : s == 2 ? a == p % n : coin(rng);
      if (member) set.insert(a);
    }
    properties.push_back(make_property(ConstituentFact{"X" + std::to_string(p), {p, p + 1}, "w"},
                                       Span{p, p + 1}));
    holds.push_back(std::move(set));
  }
  return std::make_shared<const Incidence>(n, std::move(properties), std::move(holds));
}

}  // namespace fixtures

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "fixtures.h"
#include "forestjudge/error.h"
#include "forestjudge/extraction.h"

using namespace forestjudge;

namespace {

std::vector<std::size_t> ids(std::initializer_list<std::size_t> list) { return list; }

std::set<std::string> keys_of(const std::vector<Property>& properties) {
  std::set<std::string> keys;
  for (const auto& p : properties) keys.insert(p.key);
  return keys;
}

std::size_t lexical_head(const Node& node) {
  const Node* at = &node;
  while (!at->is_leaf()) at = &at->children.at(at->head.value());
  return at->span.start;
}

// Prepositional attachments read straight off the tree with the head marks,
// rendered as keys by hand.
std::set<std::string> pp_triples_by_hand(const Node& node, const Sentence& sentence) {
  std::set<std::string> out;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      const auto& child = n.children[i];
      if (i != n.head && child.category == "PP") {
        const auto head = lexical_head(n);
        const auto dependent = lexical_head(child.children[1]);
        std::size_t rightmost_site = sentence.size();
        for (std::size_t t = 0; t < child.span.start; ++t) {
          const auto& pos = sentence.tokens[t].pos;
          if (pos[0] == 'N' || pos[0] == 'V') rightmost_site = t;
        }
        auto word = [&](std::size_t t) {
          std::string w = sentence.tokens[t].surface;
          for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
          if (w == "flights") w = "flight";
          if (w == "meals") w = "meal";
          if (w == "serving") w = "serve";
          return w;
        };
        out.insert("t:" + std::to_string(head) + ":" + sentence.tokens[child.span.start].surface +
                   ":" + (rightmost_site == head ? "+" : "-") + ":" + std::to_string(dependent) +
                   ":" + word(head) + ":" + word(dependent));
      }
      walk(child);
    }
  };
  walk(node);
  return out;
}

std::size_t internal_nodes(const Node& node) {
  if (node.is_leaf()) return 0;
  std::size_t count = 1;
  for (const auto& child : node.children) count += internal_nodes(child);
  return count;
}

class B6Test : public ::testing::Test {
 protected:
  void SetUp() override {
    parsed_ = fixtures::parse("b6", fixtures::kB6);
    incidence_ = build_incidence(parsed_.analyses, parsed_.sentence, heads_);
  }
  std::vector<std::size_t> holds(const std::string& key) const {
    return incidence_.holds(key).ids();
  }

  HeadTable heads_;
  ParseResult parsed_;
  Incidence incidence_;
};

}  // namespace

TEST_F(B6Test, HoldsSetsOfTheNamedDiscriminants) {
  ASSERT_EQ(incidence_.analysis_count(), 6u);
  EXPECT_EQ(holds(fixtures::kB6Np), ids({0, 1}));
  EXPECT_EQ(holds(fixtures::kB6Advp), ids({2, 3, 4, 5}));
  EXPECT_EQ(holds(fixtures::kB6FlightTo), ids({0, 1, 2, 3}));
  EXPECT_EQ(holds(fixtures::kB6ShowTo), ids({4, 5}));
  EXPECT_EQ(holds(fixtures::kB6Provide), ids({0, 2, 4}));
  EXPECT_EQ(holds(fixtures::kB6FlyTo), ids({1, 3, 5}));
}

TEST_F(B6Test, ServingAMealAsVPIsNotADiscriminant) {
  EXPECT_FALSE(is_discriminant(incidence_, fixtures::kB6VpServing));
  EXPECT_TRUE(is_discriminant(incidence_, fixtures::kB6Advp));
}

TEST_F(B6Test, DisplayStrings) {
  const auto& np = incidence_.property(incidence_.index_of(fixtures::kB6Np));
  EXPECT_EQ(np.display, "NP: the flights to Boston serving a meal");
  EXPECT_EQ(incidence_.property(incidence_.index_of(fixtures::kB6ShowTo)).display,
            "show -to Boston");
  EXPECT_EQ(incidence_.property(incidence_.index_of(fixtures::kB6FlightTo)).display,
            "flight to Boston");
  EXPECT_EQ(incidence_.property(incidence_.index_of(fixtures::kB6FlyTo)).display,
            "serve = fly to");
}

TEST_F(B6Test, PerAnalysisPropertiesFromTheWalkthrough) {
  auto a1 = keys_of(extract_properties(parsed_.analyses[0], parsed_.sentence, heads_));
  EXPECT_TRUE(a1.count(fixtures::kB6Np));
  auto a2 = keys_of(extract_properties(parsed_.analyses[1], parsed_.sentence, heads_));
  EXPECT_TRUE(a2.count(fixtures::kB6FlyTo));
  auto a5 = keys_of(extract_properties(parsed_.analyses[4], parsed_.sentence, heads_));
  EXPECT_TRUE(a5.count(fixtures::kB6ShowTo));
}

TEST_F(B6Test, TripleKeysMatchHandComputedHeads) {
  for (const auto& analysis : parsed_.analyses) {
    auto extracted = keys_of(extract_properties(analysis, parsed_.sentence, heads_));
    for (const auto& key : pp_triples_by_hand(analysis.tree, parsed_.sentence)) {
      EXPECT_TRUE(extracted.count(key)) << "analysis " << analysis.id << " lacks " << key;
    }
  }
}

TEST_F(B6Test, HoldsSetsAgreeWithIndependentReExtraction) {
  for (std::size_t a = 0; a < parsed_.analyses.size(); ++a) {
    auto keys = keys_of(extract_properties(parsed_.analyses[a], parsed_.sentence, heads_));
    for (std::size_t i = 0; i < incidence_.properties().size(); ++i) {
      EXPECT_EQ(incidence_.holds(i).contains(a), keys.count(incidence_.property(i).key) == 1)
          << incidence_.property(i).key << " / analysis " << a;
    }
  }
}

TEST_F(B6Test, ArgumentTriplesAreHidden) {
  bool found = false;
  for (const auto& property : incidence_.properties()) {
    if (property.kind == PropertyKind::arg_triple) {
      found = true;
      EXPECT_FALSE(property.displayed());
    }
  }
  EXPECT_TRUE(found);
}

TEST(ExtractionTest, OneConstituentPerInternalNodeAndDeterministic) {
  HeadTable heads;
  for (const char* text : {fixtures::kB6, fixtures::kW14}) {
    auto parsed = fixtures::parse("s", text);
    for (const auto& analysis : parsed.analyses) {
      auto first = extract_properties(analysis, parsed.sentence, heads);
      EXPECT_EQ(first, extract_properties(analysis, parsed.sentence, heads));
      auto constituents = std::count_if(first.begin(), first.end(), [](const Property& p) {
        return p.kind == PropertyKind::constituent;
      });
      EXPECT_EQ(static_cast<std::size_t>(constituents), internal_nodes(analysis.tree));
    }
  }
}

TEST(ExtractionTest, EllipticalAnswerHasSentenceType) {
  auto parsed = fixtures::parse("s", "Boston");
  ASSERT_EQ(parsed.analyses.size(), 1u);
  auto properties = extract_properties(parsed.analyses[0], parsed.sentence, HeadTable{});
  auto it = std::find_if(properties.begin(), properties.end(), [](const Property& p) {
    return p.kind == PropertyKind::sentence_type;
  });
  ASSERT_NE(it, properties.end());
  EXPECT_EQ(it->display, "elliptical NP");
  EXPECT_EQ(it->key, "y:elliptical-np");
}

TEST(ExtractionTest, SingleAnalysisHasNoDiscriminants) {
  auto parsed = fixtures::parse("s", "show me flights");
  auto incidence = build_incidence(parsed.analyses, parsed.sentence, HeadTable{});
  for (std::size_t i = 0; i < incidence.properties().size(); ++i) {
    EXPECT_FALSE(incidence.is_discriminant(i));
  }
  EXPECT_TRUE(incidence.display_order().empty());
}

TEST(ExtractionTest, W14AttachmentDiscriminants) {
  auto parsed = fixtures::parse("w14", fixtures::kW14);
  auto incidence = build_incidence(parsed.analyses, parsed.sentence, HeadTable{});
  ASSERT_EQ(incidence.analysis_count(), 14u);
  // "on Wednesday" can modify show, flights, serving or meals.
  std::set<std::string> heads;
  for (std::size_t i = 0; i < incidence.properties().size(); ++i) {
    const auto* triple = std::get_if<TripleFact>(&incidence.property(i).content);
    if (triple && triple->relation == "on" && incidence.is_discriminant(i)) {
      heads.insert(triple->head.word);
    }
  }
  EXPECT_EQ(heads, (std::set<std::string>{"show", "flight", "serve", "meal"}));
  // "serving" modifies show or flights, and nothing else.
  const auto show = incidence.holds("t:0:mod:-:4:show:serve");
  const auto flight = incidence.holds("t:3:mod:+:4:flight:serve");
  EXPECT_FALSE(show.intersects(flight));
  EXPECT_EQ((show | flight).count(), 14u);
}

TEST(ExtractionTest, CollapsesAnalysesWithIdenticalProperties) {
  auto parsed = fixtures::parse("s", fixtures::kB6);
  auto doubled = parsed.analyses;
  for (auto analysis : parsed.analyses) {
    analysis.id = doubled.size();
    doubled.push_back(analysis);
  }
  std::vector<std::size_t> representatives;
  auto incidence = build_incidence(doubled, parsed.sentence, HeadTable{}, &representatives);
  EXPECT_EQ(incidence.analysis_count(), 6u);
  EXPECT_EQ(representatives, ids({0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(incidence.multiplicity(), ids({2, 2, 2, 2, 2, 2}));
}

TEST(ExtractionTest, MissingHeadNamesTheRule) {
  auto sentence = make_sentence("s", {{"a", "DT"}, {"b", "XX"}});
  Analysis analysis;
  analysis.tree = Node{"QQ", {0, 2}, "qq_rule", std::nullopt,
                       {Node{"D", {0, 1}, "", std::nullopt, {}}, Node{"X", {1, 2}, "", std::nullopt, {}}}};
  try {
    extract_properties(analysis, sentence, HeadTable{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("qq_rule"), std::string::npos);
  }
  HeadTable heads;
  heads.set_head("QQ", "qq_rule", 1);
  EXPECT_NO_THROW(extract_properties(analysis, sentence, heads));
}

TEST(ExtractionTest, HeadDefaults) {
  HeadTable heads;
  Node vp{"VP", {0, 2}, "r", std::nullopt,
          {Node{"V", {0, 1}, "", std::nullopt, {}}, Node{"NP", {1, 2}, "r2", 0, {}}}};
  EXPECT_EQ(heads.head_of(vp), 0u);
  Node nom{"NOM", {0, 2}, "r", std::nullopt,
           {Node{"Adj", {0, 1}, "", std::nullopt, {}}, Node{"N", {1, 2}, "", std::nullopt, {}}}};
  EXPECT_EQ(heads.head_of(nom), 1u);
}

TEST(ExtractionTest, ConjunctionBecomesTheRelation) {
  auto sentence = make_sentence(
      "s", {{"flights", "NNS"}, {"and", "CC"}, {"fares", "NNS"}});
  Analysis analysis;
  analysis.tree = Node{
      "NP", {0, 3}, "np_coord", 0,
      {Node{"NP", {0, 1}, "np_n", 0, {Node{"N", {0, 1}, "", std::nullopt, {}}}},
       Node{"CONJ", {1, 2}, "", std::nullopt, {}},
       Node{"NP", {2, 3}, "np_n", 0, {Node{"N", {2, 3}, "", std::nullopt, {}}}}}};
  analysis.senses = {{0, {"flight", "-", false}}, {1, {"and", "-", false}}, {2, {"fare", "-", false}}};
  auto keys = keys_of(extract_properties(analysis, sentence, HeadTable{}));
  EXPECT_TRUE(keys.count("t:0:and:+:2:flight:fare")) << *keys.begin();
}

TEST(AbstractionTest, ReplacesTripleWordsWithClasses) {
  auto parsed = fixtures::parse("b6", fixtures::kB6);
  auto incidence = build_incidence(parsed.analyses, parsed.sentence, HeadTable{});
  const auto& classes = fixtures::bundled_classes();
  const auto& show_to = incidence.property(incidence.index_of(fixtures::kB6ShowTo));
  auto abstracted = abstract_property(show_to, classes);
  EXPECT_EQ(abstracted.display, "show -to cc_city");
  EXPECT_EQ(abstracted.key, "t:show:to:-:cc_city");
  EXPECT_EQ(abstracted.kind, show_to.kind);
  EXPECT_EQ(abstracted.span, show_to.span);
  EXPECT_EQ(abstract_property(abstracted, classes), abstracted);

  const auto& sense = incidence.property(incidence.index_of(fixtures::kB6Provide));
  EXPECT_EQ(abstract_property(sense, classes), sense);
}

TEST(AbstractionTest, IdempotentAndKindPreservingOverAllProperties) {
  const auto& classes = fixtures::bundled_classes();
  auto parsed = fixtures::parse("w14", fixtures::kW14);
  auto incidence = build_incidence(parsed.analyses, parsed.sentence, HeadTable{});
  for (const auto& property : incidence.properties()) {
    auto once = abstract_property(property, classes);
    EXPECT_EQ(abstract_property(once, classes), once);
    EXPECT_EQ(once.kind, property.kind);
    EXPECT_EQ(once.span, property.span);
  }
}

TEST(ClassMapTest, ParsesAndReportsLineNumbers) {
  auto classes = parse_class_map("# comment\nboston\tcc_city\n\nwednesday\tcc_day\n");
  EXPECT_EQ(classes.size(), 2u);
  EXPECT_EQ(classes.class_of("Boston"), "cc_city");
  EXPECT_EQ(classes.class_of("serve_2"), "serve_2");
  EXPECT_EQ(classes.class_of("flight"), "flight");
  try {
    parse_class_map("boston\tcc_city\nbroken line\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(load_class_map("/nonexistent/classes"), Error);
}

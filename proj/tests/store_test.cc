#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.h"
#include "forestjudge/error.h"

using namespace forestjudge;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("forestjudge_store_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Judgment judgment_of(const LogEntry& entry) { return std::get<Judgment>(entry); }

CorpusFile judged_b6_file() {
  CorpusFile file{"f001", {}};
  auto b6 = fixtures::record("s0001", fixtures::kB6);
  append_judgment(b6, fixtures::kB6Np, Polarity::good);
  append_judgment(b6, fixtures::kB6Provide, Polarity::good);
  mark_ok(b6);
  file.records.push_back(std::move(b6));

  auto w14 = fixtures::record("s0002", fixtures::kW14);
  append_judgment(w14, "c:ADVP:4-8", Polarity::bad);
  append_reset(w14);
  append_judgment(w14, "c:NP:2-6", Polarity::good);
  mark_not_ok(w14, "missing-construction", "needs\ta gerund\nreading", StoreConfig{});
  file.records.push_back(std::move(w14));

  file.records.push_back(fixtures::record("s0003", "show me flights"));
  return file;
}

}  // namespace

TEST(RecordTest, CollapsesAndNumbersRepresentatives) {
  auto rec = fixtures::record("b6", fixtures::kB6);
  EXPECT_EQ(rec.analyses.size(), 6u);
  for (std::size_t i = 0; i < rec.analyses.size(); ++i) EXPECT_EQ(rec.analyses[i].id, i);
  EXPECT_EQ(rec.incidence->analysis_count(), 6u);
  EXPECT_EQ(rec.status, RecordStatus::undecided);
  EXPECT_THROW(make_record(rec.sentence, {}, HeadTable{}), Error);
}

TEST(RecordTest, OkNeedsExactlyOneAnalysis) {
  auto rec = fixtures::record("b6", fixtures::kB6);
  EXPECT_THROW(mark_ok(rec), Error);
  append_judgment(rec, fixtures::kB6Np, Polarity::good);
  EXPECT_THROW(mark_ok(rec), Error);
  append_judgment(rec, fixtures::kB6Provide, Polarity::good);
  mark_ok(rec);
  EXPECT_EQ(rec.status, RecordStatus::ok);
  append_reset(rec);
  EXPECT_EQ(rec.status, RecordStatus::undecided);
}

TEST(RecordTest, AppendJudgmentRules) {
  auto rec = fixtures::record("b6", fixtures::kB6);
  append_judgment(rec, fixtures::kB6Np, Polarity::good);
  EXPECT_EQ(rec.last_sequence(), 1u);
  append_judgment(rec, fixtures::kB6Provide, Polarity::good, Provenance::user, 7);
  EXPECT_EQ(rec.last_sequence(), 7u);
  EXPECT_THROW(append_judgment(rec, fixtures::kB6FlyTo, Polarity::good, Provenance::user, 7),
               Error);
  EXPECT_THROW(append_judgment(rec, fixtures::kB6FlyTo, Polarity::good, Provenance::derived),
               Error);
  EXPECT_THROW(append_judgment(rec, fixtures::kB6FlyTo, Polarity::good, Provenance::automatic),
               Error);
  try {
    append_judgment(rec, "c:QQ:0-1", Polarity::good);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
  }
  EXPECT_EQ(rec.log.size(), 2u);
  EXPECT_EQ(session_of(rec).candidates().count(), 1u);
}

TEST(RecordTest, ConflictDemotesOk) {
  auto rec = fixtures::record("b6", fixtures::kB6);
  append_judgment(rec, fixtures::kB6Np, Polarity::good);
  append_judgment(rec, fixtures::kB6FlyTo, Polarity::good);
  mark_ok(rec);
  EXPECT_EQ(rec.status, RecordStatus::ok);
  append_judgment(rec, fixtures::kB6Advp, Polarity::good);
  EXPECT_EQ(rec.status, RecordStatus::undecided);
  try {
    mark_ok(rec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::conflict);
  }
  append_reset(rec);
  EXPECT_EQ(session_of(rec).candidates().count(), 6u);
  EXPECT_EQ(rec.log.size(), 4u);
}

TEST(RecordTest, NotOkTriage) {
  Corpus corpus{judged_b6_file()};
  auto& rec = *find_record(corpus, "s0003");
  mark_not_ok(rec, "missing-lexicon", "no entry", StoreConfig{});
  mark_not_ok(rec, "wrong-tree-only", "flat NP", StoreConfig{});
  EXPECT_EQ(rec.failure_type, "wrong-tree-only");
  EXPECT_TRUE(list_failures(corpus, "missing-lexicon").empty());
  auto wrong = list_failures(corpus, "wrong-tree-only");
  ASSERT_EQ(wrong.size(), 1u);
  EXPECT_EQ(wrong[0]->id(), "s0003");
  ASSERT_EQ(list_failures(corpus, "missing-construction").size(), 1u);
  EXPECT_EQ(list_failures(corpus, "missing-construction")[0]->comment, "needs a gerund reading");
  EXPECT_THROW(mark_not_ok(rec, "bogus", "", StoreConfig{}), Error);

  mark_undecided(rec);
  EXPECT_FALSE(rec.failure_type);
  EXPECT_TRUE(list_failures(corpus, "wrong-tree-only").empty());
  mark_ok(rec);
  EXPECT_EQ(rec.status, RecordStatus::ok);
  EXPECT_TRUE(rec.comment.empty());
  EXPECT_FALSE(find_record(corpus, "nope"));
}

TEST(PersistenceTest, RoundTripIsByteStable) {
  auto file = judged_b6_file();
  auto text = serialize_file(file);
  auto parsed = parse_file(text, StoreConfig{});
  EXPECT_EQ(parsed, file);
  EXPECT_EQ(serialize_file(parsed), text);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(text.rfind("{\"format\":\"forestjudge-corpus\",\"id\":\"f001\",\"records\":3", 0),
            0u);
}

TEST(PersistenceTest, RoundTripKeepsMultiplicity) {
  CorpusFile file{"f", {}};
  auto parsed = fixtures::parse("b6", fixtures::kB6);
  auto doubled = parsed.analyses;
  for (auto copy : parsed.analyses) {
    copy.id = doubled.size();
    doubled.push_back(copy);
  }
  file.records.push_back(make_record(parsed.sentence, doubled, HeadTable{}));
  ASSERT_EQ(file.records[0].incidence->multiplicity(), std::vector<std::size_t>(6, 2));
  EXPECT_EQ(parse_file(serialize_file(file), StoreConfig{}), file);
}

TEST(PersistenceTest, SaveAndLoadCorpus) {
  auto dir = fresh_dir("roundtrip");
  Corpus corpus{judged_b6_file(), CorpusFile{"f002", {fixtures::record("s0004", "to Boston")}}};
  save_corpus(corpus, dir);
  EXPECT_TRUE(std::filesystem::exists(file_path(dir, "f002")));
  EXPECT_EQ(load_corpus(dir, StoreConfig{}), corpus);
  std::filesystem::remove_all(dir);
}

TEST(PersistenceTest, RejectsOversizedFiles) {
  CorpusFile file{"big", {}};
  for (int i = 0; i < 51; ++i) {
    file.records.push_back(fixtures::record("s" + std::to_string(i), "show me flights"));
  }
  try {
    parse_file(serialize_file(file), StoreConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("51"), std::string::npos);
  }
  file.records.pop_back();
  EXPECT_NO_THROW(parse_file(serialize_file(file), StoreConfig{}));
}

TEST(PersistenceTest, RejectsDamagedInput) {
  const auto text = serialize_file(judged_b6_file());
  const auto last_line = text.rfind('\n', text.size() - 2);
  try {
    parse_file(text.substr(0, last_line + 1), StoreConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("2 of 3"), std::string::npos) << e.what();
  }

  auto versioned = text;
  versioned.replace(versioned.find("\"version\":1"), 11, "\"version\":2");
  EXPECT_THROW(parse_file(versioned, StoreConfig{}), Error);

  auto garbled = text;
  garbled.insert(last_line + 1, "{not json\n");
  try {
    parse_file(garbled, StoreConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }

  auto unknown_key = text;
  unknown_key.replace(unknown_key.find(fixtures::kB6Np), std::string(fixtures::kB6Np).size(),
                      "c:NP:2-8");
  EXPECT_THROW(parse_file(unknown_key, StoreConfig{}), Error);

  StoreConfig strict;
  strict.failure_types = {"other"};
  EXPECT_THROW(parse_file(text, strict), Error);
}

TEST(PersistenceTest, LoadCorpusChecksIds) {
  auto dir = fresh_dir("ids");
  save_file(judged_b6_file(), dir / "f009.jsonl");
  EXPECT_THROW(load_corpus(dir, StoreConfig{}), Error);
  std::filesystem::remove_all(dir);
}

class MergeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    old_ = fixtures::record("b6", fixtures::kB6);
    append_judgment(old_, fixtures::kB6Np, Polarity::good);
    append_judgment(old_, fixtures::kB6Advp, Polarity::bad);
    append_judgment(old_, fixtures::kB6Provide, Polarity::good);
    mark_ok(old_);
  }

  std::pair<SentenceRecord, MergeReport> merge_with(const Grammar& grammar) {
    auto parsed = fixtures::parse("b6", fixtures::kB6, grammar);
    return merge(old_, parsed.sentence, parsed.analyses, HeadTable{});
  }

  SentenceRecord old_;
};

TEST_F(MergeTest, IdentityKeepsEverything) {
  auto [merged, report] = merge_with(fixtures::bundled_grammar());
  EXPECT_EQ(merged, old_);
  EXPECT_EQ(report.transferred, old_.log);
  EXPECT_TRUE(report.archived.empty());
  EXPECT_EQ(report.old_candidates, 1u);
  EXPECT_EQ(report.new_candidates, 1u);
  EXPECT_FALSE(report.status_changed);
}

TEST_F(MergeTest, DroppedRuleArchivesItsJudgment) {
  auto [merged, report] = merge_with(fixtures::grammar_without_adverbials());
  ASSERT_EQ(report.archived.size(), 1u);
  EXPECT_EQ(report.archived[0].target, fixtures::kB6Advp);
  EXPECT_EQ(report.archived[0].value, Polarity::bad);
  EXPECT_TRUE(std::any_of(report.transferred.begin(), report.transferred.end(),
                          [](const LogEntry& e) {
                            return judgment_of(e).target == fixtures::kB6Np;
                          }));
  EXPECT_EQ(session_of(merged).value_of(fixtures::kB6Np)->provenance, Provenance::user);
  EXPECT_EQ(report.new_state, SessionState::consistent);
}

TEST_F(MergeTest, NewReadingReopensTheRecord) {
  auto [merged, report] = merge_with(fixtures::grammar_with_gerund());
  EXPECT_EQ(merged.analyses.size(), 7u);
  EXPECT_TRUE(report.archived.empty());
  EXPECT_EQ(report.new_candidates, 2u);
  EXPECT_EQ(merged.status, RecordStatus::undecided);
  EXPECT_TRUE(report.status_changed);
  EXPECT_EQ(session_of(merged).candidates().count(), 2u);
}

TEST_F(MergeTest, TransferredAndArchivedPartitionTheOldLog) {
  append_reset(old_);
  append_judgment(old_, fixtures::kB6Advp, Polarity::bad);
  old_.auto_assertions[fixtures::kB6ShowTo] = Polarity::bad;
  std::vector<Grammar> grammars;
  grammars.push_back(fixtures::grammar_without_adverbials());
  grammars.push_back(fixtures::grammar_with_gerund());
  for (const auto& grammar : grammars) {
    auto [merged, report] = merge_with(grammar);
    std::vector<LogEntry> rebuilt = report.transferred;
    for (const auto& j : report.archived) {
      if (j.provenance != Provenance::automatic) rebuilt.push_back(j);
    }
    std::sort(rebuilt.begin(), rebuilt.end(),
              [](const LogEntry& a, const LogEntry& b) { return sequence_of(a) < sequence_of(b); });
    EXPECT_EQ(rebuilt, old_.log);
    EXPECT_EQ(merged.log, report.transferred);
  }
}

TEST_F(MergeTest, RejectsDifferentTokens) {
  auto parsed = fixtures::parse("b6", "show me the flights to Denver serving a meal");
  EXPECT_THROW(merge(old_, parsed.sentence, parsed.analyses, HeadTable{}), Error);
}

class PosPropagationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    CorpusFile file{"f", {}};
    auto source = fixtures::record("src", "show me flights to Boston");
    append_judgment(source, "t:2:to:+:4:flight:boston", Polarity::good);
    mark_ok(source);
    file.records.push_back(std::move(source));
    file.records.push_back(fixtures::record("twin", "show me flights to Denver"));
    auto adversary = fixtures::record("adversary", "list me fares to Dallas");
    append_judgment(adversary, "t:0:to:-:4:list:dallas", Polarity::good);
    file.records.push_back(std::move(adversary));
    file.records.push_back(fixtures::record("other", "show me the flights to Denver"));
    corpus_ = {file};
  }
  Corpus corpus_;
};

TEST_F(PosPropagationTest, CopiesJudgmentsByStructure) {
  auto report = pos_propagate(corpus_, "src");
  EXPECT_EQ(report.updated, std::vector<std::string>{"twin"});
  EXPECT_EQ(report.conflicted, std::vector<std::string>{"adversary"});
  EXPECT_EQ(report.judgments_added, 1u);

  const auto& twin = *find_record(corpus_, "twin");
  ASSERT_EQ(twin.log.size(), 1u);
  EXPECT_EQ(judgment_of(twin.log[0]).target, "t:2:to:+:4:flight:denver");
  EXPECT_EQ(judgment_of(twin.log[0]).provenance, Provenance::pos_propagated);
  EXPECT_EQ(session_of(twin).candidates().count(), 1u);

  EXPECT_EQ(find_record(corpus_, "adversary")->log.size(), 1u);
  EXPECT_TRUE(find_record(corpus_, "other")->log.empty());

  // Running it again adds nothing.
  auto again = pos_propagate(corpus_, "src");
  EXPECT_EQ(again.judgments_added, 0u);
  EXPECT_EQ(find_record(corpus_, "twin")->log.size(), 1u);
}

TEST_F(PosPropagationTest, SourceMustBeOk) {
  EXPECT_THROW(pos_propagate(corpus_, "twin"), Error);
  try {
    pos_propagate(corpus_, "missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
  }
}

TEST(SuspectsTest, FlagsTheOddJudgmentOut) {
  auto corpus = fixtures::suspects_corpus();
  auto priors = update_priors(corpus, fixtures::bundled_classes());
  const auto* flight_to = priors.find("t:flight:to:+:cc_city");
  ASSERT_TRUE(flight_to);
  EXPECT_EQ(*flight_to, (PriorCounts{9, 1}));
  auto suspects = find_suspects(corpus, priors, fixtures::bundled_classes());
  ASSERT_EQ(suspects.size(), 1u);
  EXPECT_EQ(suspects[0].record_id, fixtures::kContradictoryId);
  EXPECT_DOUBLE_EQ(suspects[0].agreement, 0.9);
  ASSERT_EQ(suspects[0].judgments.size(), 1u);
  EXPECT_EQ(suspects[0].judgments[0].abstracted_key, "t:show:to:-:cc_city");
  EXPECT_EQ(suspects[0].judgments[0].value, Polarity::good);

  EXPECT_TRUE(find_suspects(corpus, priors, fixtures::bundled_classes(), 11).empty());
  EXPECT_TRUE(find_suspects(corpus, priors, fixtures::bundled_classes(), 10, 0.95).empty());
}

TEST(PriorsTest, TwinsContributeTwoOutcomesPerKey) {
  CorpusFile file{"f", {}};
  for (const char* text : {"show me flights to Boston", "show me flights to Denver"}) {
    auto rec = fixtures::record(text, text);
    append_judgment(rec, "t:0:to:-:4:show:" + std::string(text[19] == 'B' ? "boston" : "denver"),
                    Polarity::bad);
    mark_ok(rec);
    file.records.push_back(std::move(rec));
  }
  file.records.push_back(fixtures::record("undecided", "show me flights to Dallas"));
  auto priors = update_priors({file}, fixtures::bundled_classes());
  ASSERT_FALSE(priors.empty());
  for (const auto& [key, counts] : priors.entries()) EXPECT_EQ(counts.total(), 2u) << key;
  EXPECT_EQ(*priors.find("t:show:to:-:cc_city"), (PriorCounts{0, 2}));
  EXPECT_EQ(*priors.find("t:flight:to:+:cc_city"), (PriorCounts{2, 0}));
}

TEST(PriorsTest, IndependentOfRecordOrder) {
  auto corpus = fixtures::suspects_corpus();
  auto reference = update_priors(corpus, fixtures::bundled_classes());
  std::mt19937 rng(1);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(corpus[0].records.begin(), corpus[0].records.end(), rng);
    EXPECT_EQ(update_priors(corpus, fixtures::bundled_classes()), reference);
  }
}

TEST(ExportTest, TrainingLinesCoverDecidedDiscriminantsOfOkRecords) {
  Corpus corpus{judged_b6_file()};
  auto text = format_training(corpus, fixtures::bundled_classes());
  std::istringstream in(text);
  std::string line;
  std::size_t lines = 0;
  std::set<std::string> provenances;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_EQ(line.rfind("s0001\t", 0), 0u) << line;
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 3);
    provenances.insert(line.substr(line.rfind('\t') + 1));
  }
  const auto& b6 = *find_record(corpus, "s0001");
  std::size_t discriminants = 0;
  for (std::size_t i = 0; i < b6.incidence->properties().size(); ++i) {
    discriminants += b6.incidence->is_discriminant(i);
  }
  EXPECT_EQ(lines, discriminants);
  EXPECT_EQ(provenances, (std::set<std::string>{"user", "derived"}));
  EXPECT_NE(text.find("s0001\tt:flight:to:+:cc_city\tgood\tderived"), std::string::npos);
}

TEST(ScriptTest, ExportedScriptRebuildsTheCorpus) {
  Corpus judged{judged_b6_file()};
  auto script = export_script(judged);

  CorpusFile blank{"f001", {}};
  for (const auto& rec : judged[0].records) {
    blank.records.push_back(make_record(rec.sentence, rec.analyses, HeadTable{}));
  }
  Corpus rebuilt{blank};
  apply_script(rebuilt, script, StoreConfig{});
  EXPECT_EQ(rebuilt, judged);
  EXPECT_EQ(export_script(rebuilt), script);
}

TEST(ScriptTest, AutoMarksDecidedRecordsOk) {
  Corpus corpus{CorpusFile{"f", {fixtures::record("b6", fixtures::kB6)}}};
  auto report = apply_script(corpus,
                             "# comment\n\nb6\tc:NP:2-9\tgood\nb6\tw:6:serve_1\tgood\n",
                             StoreConfig{});
  EXPECT_EQ(report.lines_applied, 2u);
  EXPECT_EQ(report.touched, std::vector<std::string>{"b6"});
  EXPECT_EQ(report.marked_ok, std::vector<std::string>{"b6"});
  EXPECT_EQ(corpus[0].records[0].status, RecordStatus::ok);
}

TEST(ScriptTest, ErrorsNameTheLine) {
  Corpus corpus{CorpusFile{"f", {fixtures::record("b6", fixtures::kB6)}}};
  for (const char* bad : {"b6\tc:NP:2-9\n", "b6\tc:NP:2-9\tmaybe\n", "zz\tc:NP:2-9\tgood\n",
                          "b6\tc:NP:2-9\tgood\nb6\t@status\tnot-ok:bogus:x\n"}) {
    try {
      apply_script(corpus, bad, StoreConfig{});
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find("script line"), std::string::npos) << e.what();
    }
  }
}

TEST(AutoResolutionTest, AppliesToUndecidedRecordsOnly) {
  auto corpus = fixtures::suspects_corpus();
  corpus[0].records.push_back(fixtures::record("fresh", "show me the flights to Denver"));
  PriorTable priors;
  priors.set("t:show:to:-:cc_city", PriorCounts{0, 40});
  EXPECT_EQ(apply_auto_resolution(corpus, priors, fixtures::bundled_classes()), 1u);
  const auto& fresh = *find_record(corpus, "fresh");
  EXPECT_EQ(fresh.auto_assertions.at("t:0:to:-:5:show:denver"), Polarity::bad);
  EXPECT_TRUE(fresh.log.empty());
  EXPECT_EQ(session_of(fresh).candidates().count(), 1u);
  EXPECT_TRUE(find_record(corpus, fixtures::kContradictoryId)->auto_assertions.empty());
  EXPECT_EQ(parse_file(serialize_file(corpus[0]), StoreConfig{}), corpus[0]);
}

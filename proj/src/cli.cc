#include "forestjudge/cli.h"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "forestjudge/error.h"
#include "forestjudge/grammar.h"
#include "forestjudge/service.h"
#include "forestjudge/store.h"

namespace forestjudge {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ClassMap classes_from(const std::string& path) {
  return path.empty() ? ClassMap{} : load_class_map(path);
}

std::string padded(std::size_t number, int width) {
  std::ostringstream out;
  out << std::setw(width) << std::setfill('0') << number;
  return out.str();
}

std::size_t user_judgment_count(const SentenceRecord& record) {
  std::size_t count = 0;
  for (const auto& [key, assertion] : session_of(record).user_assertions()) {
    if (assertion.provenance == Provenance::user) ++count;
  }
  return count;
}

struct Options {
  std::string db;
  std::string grammar;
  std::string text;
  std::string script;
  std::string classes;
  std::string priors;
  std::string out;
  std::string type;
  std::string source;
  std::string host = "127.0.0.1";
  std::string prefix = "s";
  int port = 8080;
  std::size_t max_analyses = kDefaultMaxAnalyses;
  std::size_t file_size = 50;
  std::size_t min_support = 0;
  double min_agreement = 0.0;
};

int ingest(const Options& o, std::ostream& out, std::ostream& err) {
  const auto grammar = load_grammar(o.grammar);
  for (const auto& warning : grammar.warnings()) err << "warning: " << warning << "\n";
  std::filesystem::create_directories(o.out);
  for (const auto& entry : std::filesystem::directory_iterator(o.out)) {
    if (entry.path().extension() == ".jsonl") {
      throw Error(ErrorCode::invalid_argument,
                  "'" + o.out + "' already holds corpus files; ingest into an empty directory");
    }
  }

  StoreConfig config;
  config.max_records_per_file = o.file_size;
  std::vector<SentenceRecord> records;
  std::istringstream lines(read_text(o.text));
  std::string line;
  std::size_t number = 0;
  std::size_t total_analyses = 0;
  while (std::getline(lines, line)) {
    auto words = tokenize(line);
    if (words.empty() || words[0].front() == '#') continue;
    const auto id = o.prefix + padded(++number, 4);
    auto parsed = parse_all(id, words, grammar, o.max_analyses);
    if (parsed.analyses.empty()) {
      err << "warning: " << id << " has no analysis, skipped: " << line << "\n";
      continue;
    }
    auto record = make_record(std::move(parsed.sentence), std::move(parsed.analyses), config.heads);
    out << id << "\t" << record.analyses.size() << " analyses\t" << record.sentence.text() << "\n";
    total_analyses += record.analyses.size();
    records.push_back(std::move(record));
  }

  Corpus corpus;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i % o.file_size == 0) corpus.push_back(CorpusFile{"f" + padded(corpus.size() + 1, 3), {}});
    corpus.back().records.push_back(std::move(records[i]));
  }
  save_corpus(corpus, o.out);
  out << "ingested " << records.size() << " sentences (" << total_analyses << " analyses) into "
      << corpus.size() << " files\n";
  return 0;
}

AnnotationService* running_service = nullptr;

void on_signal(int) {
  if (running_service) running_service->stop();
}

int serve(const Options& o, std::ostream& out) {
  ServiceConfig config;
  config.db = o.db;
  if (!o.grammar.empty()) config.grammar = o.grammar;
  config.classes = classes_from(o.classes);
  config.max_analyses = o.max_analyses;
  AnnotationService service(std::move(config));
  const int port = service.bind(o.host, o.port);
  out << "serving " << o.db << " on http://" << o.host << ":" << port << std::endl;
  running_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.listen();
  running_service = nullptr;
  return 0;
}

int replay(const Options& o, std::ostream& out) {
  StoreConfig config;
  auto corpus = load_corpus(o.db, config);
  auto report = apply_script(corpus, read_text(o.script), config);
  save_corpus(corpus, o.db);
  out << "applied " << report.lines_applied << " lines to " << report.touched.size()
      << " sentences";
  if (!report.marked_ok.empty()) out << "; marked ok: " << report.marked_ok.size();
  out << "\n";
  return 0;
}

int script(const Options& o, std::ostream& out) {
  auto corpus = load_corpus(o.db, StoreConfig{});
  auto text = export_script(corpus);
  if (o.out.empty() || o.out == "-") {
    out << text;
  } else {
    write_text_file(o.out, text);
  }
  return 0;
}

int check(const Options& o, std::ostream& out) {
  auto corpus = load_corpus(o.db, StoreConfig{});
  auto classes = classes_from(o.classes);
  auto priors = o.priors.empty() ? update_priors(corpus, classes)
                                 : parse_prior_table(read_text(o.priors));
  auto suspects = find_suspects(corpus, priors, classes,
                                o.min_support ? o.min_support : kDefaultSuspectMinSupport,
                                o.min_agreement > 0 ? o.min_agreement : kDefaultSuspectMinAgreement);
  for (const auto& suspect : suspects) {
    const auto* record = find_record(corpus, suspect.record_id);
    out << suspect.record_id << "\t" << std::fixed << std::setprecision(3) << suspect.agreement
        << "\t" << record->sentence.text() << "\n";
    for (const auto& j : suspect.judgments) {
      out << "  " << j.key << " judged " << to_string(j.value) << "; " << j.abstracted_key
          << " was good " << j.prior.good << ", bad " << j.prior.bad << "\n";
    }
  }
  out << suspects.size() << " suspect sentences\n";
  return 0;
}

int merge_all(const Options& o, std::ostream& out, std::ostream& err) {
  StoreConfig config;
  auto corpus = load_corpus(o.db, config);
  const auto grammar = load_grammar(o.grammar);
  for (auto& file : corpus) {
    for (auto& record : file.records) {
      std::vector<std::string> words;
      for (const auto& token : record.sentence.tokens) words.push_back(token.surface);
      ParseResult parsed;
      try {
        parsed = parse_all(record.id(), words, grammar, o.max_analyses);
      } catch (const Error& e) {
        err << "warning: " << record.id() << " kept as is: " << e.what() << "\n";
        continue;
      }
      if (parsed.analyses.empty()) {
        err << "warning: " << record.id() << " kept as is: no analysis under the new grammar\n";
        continue;
      }
      auto [merged, report] =
          merge(record, std::move(parsed.sentence), std::move(parsed.analyses), config.heads);
      out << record.id() << "\ttransferred " << report.transferred.size() << "\tarchived "
          << report.archived.size() << "\tcandidates " << report.old_candidates << " -> "
          << report.new_candidates;
      if (report.status_changed) out << "\tok -> undecided";
      out << "\n";
      for (const auto& j : report.archived) {
        out << "  archived " << j.target << " " << to_string(j.value) << "\n";
      }
      record = std::move(merged);
    }
  }
  save_corpus(corpus, o.db);
  return 0;
}

int export_cmd(const Options& o, std::ostream& out) {
  auto corpus = load_corpus(o.db, StoreConfig{});
  export_training(corpus, classes_from(o.classes), o.out);
  out << "wrote " << o.out << "\n";
  return 0;
}

int failures(const Options& o, std::ostream& out) {
  StoreConfig config;
  if (std::find(config.failure_types.begin(), config.failure_types.end(), o.type) ==
      config.failure_types.end()) {
    throw Error(ErrorCode::invalid_argument, "unknown failure type '" + o.type + "'");
  }
  auto corpus = load_corpus(o.db, config);
  for (const auto* record : list_failures(corpus, o.type)) {
    out << record->id() << "\t" << record->sentence.text() << "\t" << record->comment << "\n";
  }
  return 0;
}

int stats(const Options& o, std::ostream& out) {
  auto corpus = load_corpus(o.db, StoreConfig{});
  std::map<RecordStatus, std::size_t> by_status;
  std::map<std::size_t, std::size_t> histogram;
  std::size_t sentences = 0;
  for (const auto& file : corpus) {
    for (const auto& record : file.records) {
      ++sentences;
      ++by_status[record.status];
      const auto judgments = user_judgment_count(record);
      ++histogram[judgments];
      out << record.id() << "\t" << to_string(record.status) << "\t" << judgments
          << " user judgments\n";
    }
  }
  out << "files\t" << corpus.size() << "\n";
  out << "sentences\t" << sentences << "\n";
  for (auto status : {RecordStatus::ok, RecordStatus::not_ok, RecordStatus::undecided}) {
    out << to_string(status) << "\t" << by_status[status] << "\n";
  }
  out << "user judgments per sentence\n";
  for (const auto& [judgments, count] : histogram) {
    out << "  " << judgments << "\t" << count << "\n";
  }
  return 0;
}

int auto_cmd(const Options& o, std::ostream& out) {
  StoreConfig config;
  auto corpus = load_corpus(o.db, config);
  auto classes = classes_from(o.classes);
  auto priors = parse_prior_table(read_text(o.priors));
  auto changed = apply_auto_resolution(
      corpus, priors, classes, o.min_support ? o.min_support : kDefaultAutoMinSupport,
      o.min_agreement > 0 ? o.min_agreement : kDefaultAutoMinAgreement);
  save_corpus(corpus, o.db);
  out << changed << " sentences received automatic judgments\n";
  for (const auto& file : corpus) {
    for (const auto& record : file.records) {
      if (record.auto_conflict) out << "  " << record.id() << ": automatic judgments conflicted, dropped\n";
    }
  }
  return 0;
}

int priors_cmd(const Options& o, std::ostream& out) {
  auto corpus = load_corpus(o.db, StoreConfig{});
  auto text = format_prior_table(update_priors(corpus, classes_from(o.classes)));
  if (o.out.empty() || o.out == "-") {
    out << text;
  } else {
    write_text_file(o.out, text);
  }
  return 0;
}

int propagate(const Options& o, std::ostream& out) {
  StoreConfig config;
  auto corpus = load_corpus(o.db, config);
  auto report = pos_propagate(corpus, o.source);
  save_corpus(corpus, o.db);
  for (const auto& id : report.updated) out << "updated\t" << id << "\n";
  for (const auto& id : report.conflicted) out << "conflict\t" << id << "\n";
  out << report.judgments_added << " judgments propagated to " << report.updated.size()
      << " sentences\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Judge parse forests by discriminants and manage the judged corpus."};
  app.require_subcommand(1);
  Options o;

  auto add_db = [&](CLI::App* command) {
    command->add_option("--db", o.db, "corpus directory")->envname("FORESTJUDGE_DB")->required();
  };

  auto* ingest_cmd = app.add_subcommand("ingest", "parse a text file into a new corpus");
  ingest_cmd->add_option("--grammar", o.grammar, "grammar file")->required();
  ingest_cmd->add_option("--text", o.text, "one sentence per line")->required();
  ingest_cmd->add_option("--out", o.out, "corpus directory to create")->required();
  ingest_cmd->add_option("--max-analyses", o.max_analyses);
  ingest_cmd->add_option("--file-size", o.file_size, "sentences per corpus file")
      ->check(CLI::Range(1, 50));
  ingest_cmd->add_option("--prefix", o.prefix, "sentence id prefix");

  auto* serve_cmd = app.add_subcommand("serve", "run the annotation HTTP service");
  add_db(serve_cmd);
  serve_cmd->add_option("--port", o.port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", o.host);
  serve_cmd->add_option("--grammar", o.grammar, "grammar for /merge and /parse");
  serve_cmd->add_option("--classes", o.classes, "class map for /suspects");
  serve_cmd->add_option("--max-analyses", o.max_analyses);

  auto* replay_cmd = app.add_subcommand("replay", "apply a judgment script");
  add_db(replay_cmd);
  replay_cmd->add_option("--script", o.script)->required();

  auto* script_cmd = app.add_subcommand("script", "write the corpus judgments as a script");
  add_db(script_cmd);
  script_cmd->add_option("--out", o.out, "output file (default stdout)");

  auto* check_cmd = app.add_subcommand("check", "list sentences with unusual judgments");
  add_db(check_cmd);
  check_cmd->add_option("--classes", o.classes);
  check_cmd->add_option("--priors", o.priors, "prior table (default: computed from the corpus)");
  check_cmd->add_option("--min-support", o.min_support);
  check_cmd->add_option("--min-agreement", o.min_agreement);

  auto* merge_cmd = app.add_subcommand("merge", "re-parse every sentence and carry judgments over");
  add_db(merge_cmd);
  merge_cmd->add_option("--grammar", o.grammar)->required();
  merge_cmd->add_option("--max-analyses", o.max_analyses);

  auto* export_sub = app.add_subcommand("export", "write training data from ok sentences");
  add_db(export_sub);
  export_sub->add_option("--classes", o.classes);
  export_sub->add_option("--out", o.out)->required();

  auto* failures_cmd = app.add_subcommand("failures", "list not-ok sentences of one type");
  add_db(failures_cmd);
  failures_cmd->add_option("--type", o.type)->required();

  auto* stats_cmd = app.add_subcommand("stats", "sentence counts and judgments per sentence");
  add_db(stats_cmd);

  auto* auto_sub = app.add_subcommand("auto", "pre-judge undecided sentences from priors");
  add_db(auto_sub);
  auto_sub->add_option("--priors", o.priors)->required();
  auto_sub->add_option("--classes", o.classes);
  auto_sub->add_option("--min-support", o.min_support);
  auto_sub->add_option("--min-agreement", o.min_agreement);

  auto* priors_sub = app.add_subcommand("priors", "write the prior table of the ok sentences");
  add_db(priors_sub);
  priors_sub->add_option("--classes", o.classes);
  priors_sub->add_option("--out", o.out, "output file (default stdout)");

  auto* propagate_cmd =
      app.add_subcommand("propagate", "copy judgments to sentences with the same POS sequence");
  add_db(propagate_cmd);
  propagate_cmd->add_option("--source", o.source, "id of an ok sentence")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest_cmd) return ingest(o, out, err);
    if (*serve_cmd) return serve(o, out);
    if (*replay_cmd) return replay(o, out);
    if (*script_cmd) return script(o, out);
    if (*check_cmd) return check(o, out);
    if (*merge_cmd) return merge_all(o, out, err);
    if (*export_sub) return export_cmd(o, out);
    if (*failures_cmd) return failures(o, out);
    if (*stats_cmd) return stats(o, out);
    if (*auto_sub) return auto_cmd(o, out);
    if (*priors_sub) return priors_cmd(o, out);
    if (*propagate_cmd) return propagate(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace forestjudge

// Corpus files: one JSON object per line. The first line is a header naming
// the format, version and record count; each further line is a record.

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "forestjudge/error.h"
#include "forestjudge/store.h"

namespace forestjudge {

namespace {

using nlohmann::json;

constexpr std::string_view kFormatName = "forestjudge-corpus";

json analysis_to_json(const Analysis& analysis, const Sentence& sentence, std::size_t multiplicity) {
  json senses = json::array();
  for (const auto& [index, tag] : analysis.senses) {
    senses.push_back(json::array({index, tag.label, tag.gloss, tag.ambiguous}));
  }
  return json{{"id", analysis.id},
              {"multiplicity", multiplicity},
              {"senses", std::move(senses)},
              {"tree", format_tree(analysis.tree, sentence)},
              {"type", std::string(to_string(analysis.type))}};
}

json log_entry_to_json(const LogEntry& entry) {
  if (const auto* j = std::get_if<Judgment>(&entry)) {
    return json{{"key", j->target},
                {"provenance", std::string(to_string(j->provenance))},
                {"seq", j->sequence},
                {"value", std::string(to_string(j->value))}};
  }
  return json{{"reset", true}, {"seq", sequence_of(entry)}};
}

json record_to_json(const SentenceRecord& record) {
  json tokens = json::array();
  for (const auto& token : record.sentence.tokens) {
    tokens.push_back(json::array({token.surface, token.pos}));
  }
  json analyses = json::array();
  const auto& multiplicity = record.incidence->multiplicity();
  for (const auto& analysis : record.analyses) {
    analyses.push_back(analysis_to_json(
        analysis, record.sentence,
        analysis.id < multiplicity.size() ? multiplicity[analysis.id] : 1));
  }
  json automatic = json::object();
  for (const auto& [key, value] : record.auto_assertions) {
    automatic[key] = std::string(to_string(value));
  }
  json log = json::array();
  for (const auto& entry : record.log) log.push_back(log_entry_to_json(entry));

  return json{{"analyses", std::move(analyses)},
              {"auto", std::move(automatic)},
              {"autoConflict", record.auto_conflict},
              {"comment", record.comment},
              {"failureType", record.failure_type ? json(*record.failure_type) : json(nullptr)},
              {"id", record.id()},
              {"log", std::move(log)},
              {"status", std::string(to_string(record.status))},
              {"tokens", std::move(tokens)}};
}

[[noreturn]] void malformed(std::size_t line, std::size_t record, const std::string& message) {
  std::string where = "corpus line " + std::to_string(line);
  if (record > 0) where += " (record " + std::to_string(record) + ")";
  throw Error(ErrorCode::parse_error, where + ": " + message);
}

template <typename T>
T field(const json& object, const char* name) {
  if (!object.contains(name)) throw Error(ErrorCode::parse_error, std::string("missing '") + name + "'");
  try {
    return object.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::parse_error, std::string("field '") + name + "' has the wrong type");
  }
}

SentenceRecord record_from_json(const json& object, const StoreConfig& config) {
  if (!object.is_object()) throw Error(ErrorCode::parse_error, "record is not an object");
  std::vector<std::pair<std::string, std::string>> tokens;
  for (const auto& token : field<json>(object, "tokens")) {
    if (!token.is_array() || token.size() != 2) {
      throw Error(ErrorCode::parse_error, "token must be [surface, pos]");
    }
    tokens.emplace_back(token[0].get<std::string>(), token[1].get<std::string>());
  }
  Sentence sentence = make_sentence(field<std::string>(object, "id"), tokens);

  std::vector<Analysis> analyses;
  std::vector<std::size_t> multiplicity;
  for (const auto& entry : field<json>(object, "analyses")) {
    Analysis analysis;
    analysis.id = field<std::size_t>(entry, "id");
    if (analysis.id != analyses.size()) {
      throw Error(ErrorCode::parse_error, "analysis ids must run 0..N-1 in order");
    }
    analysis.tree = parse_tree(field<std::string>(entry, "tree"), sentence);
    analysis.type = parse_sentence_type(field<std::string>(entry, "type"));
    for (const auto& sense : field<json>(entry, "senses")) {
      if (!sense.is_array() || sense.size() != 4) {
        throw Error(ErrorCode::parse_error, "sense must be [index, label, gloss, ambiguous]");
      }
      analysis.senses[sense[0].get<std::size_t>()] =
          SenseTag{sense[1].get<std::string>(), sense[2].get<std::string>(), sense[3].get<bool>()};
    }
    multiplicity.push_back(field<std::size_t>(entry, "multiplicity"));
    analyses.push_back(std::move(analysis));
  }

  SentenceRecord record = make_record(std::move(sentence), std::move(analyses), config.heads);
  if (record.analyses.size() != multiplicity.size()) {
    throw Error(ErrorCode::parse_error, "stored analyses are not distinct under their properties");
  }
  const auto& built = *record.incidence;
  std::vector<AnalysisSet> holds;
  for (std::size_t i = 0; i < built.properties().size(); ++i) holds.push_back(built.holds(i));
  record.incidence = std::make_shared<const Incidence>(built.analysis_count(), built.properties(),
                                                       std::move(holds), multiplicity);

  const auto automatic = field<json>(object, "auto");
  for (const auto& [key, value] : automatic.items()) {
    record.incidence->index_of(key);
    if (!value.is_string()) throw Error(ErrorCode::parse_error, "auto value for '" + key + "' is not a string");
    record.auto_assertions[key] = parse_polarity(value.get<std::string>());
  }
  record.auto_conflict = field<bool>(object, "autoConflict");
  for (const auto& entry : field<json>(object, "log")) {
    const auto sequence = field<std::uint64_t>(entry, "seq");
    if (sequence <= record.last_sequence()) {
      throw Error(ErrorCode::parse_error, "log sequence numbers must increase");
    }
    if (entry.contains("reset")) {
      record.log.push_back(ResetMark{sequence});
      continue;
    }
    const auto key = field<std::string>(entry, "key");
    record.incidence->index_of(key);
    const auto provenance = parse_provenance(field<std::string>(entry, "provenance"));
    if (provenance != Provenance::user && provenance != Provenance::pos_propagated) {
      throw Error(ErrorCode::parse_error, "log holds only user and pos-propagated judgments");
    }
    record.log.push_back(
        Judgment{key, parse_polarity(field<std::string>(entry, "value")), provenance, sequence});
  }

  record.status = parse_record_status(field<std::string>(object, "status"));
  record.comment = field<std::string>(object, "comment");
  if (const auto& failure = field<json>(object, "failureType"); !failure.is_null()) {
    record.failure_type = failure.get<std::string>();
  }
  if (record.status == RecordStatus::not_ok) {
    const auto& types = config.failure_types;
    if (!record.failure_type ||
        std::find(types.begin(), types.end(), *record.failure_type) == types.end()) {
      throw Error(ErrorCode::parse_error, "not-ok record needs a configured failure type");
    }
  } else if (record.failure_type) {
    throw Error(ErrorCode::parse_error, "only not-ok records carry a failure type");
  }
  if (record.status == RecordStatus::ok && session_of(record).candidates().count() != 1) {
    throw Error(ErrorCode::parse_error, "ok record does not have exactly one analysis left");
  }
  return record;
}

}  // namespace

std::string serialize_header(const std::string& file_id, std::size_t record_count) {
  return json{{"format", kFormatName},
              {"id", file_id},
              {"records", record_count},
              {"version", kCorpusFormatVersion}}
      .dump();
}

std::string serialize_record(const SentenceRecord& record) { return record_to_json(record).dump(); }

std::string serialize_file(const CorpusFile& file) {
  std::string out = serialize_header(file.id, file.records.size()) + "\n";
  for (const auto& record : file.records) out += serialize_record(record) + "\n";
  return out;
}

CorpusFile parse_file(std::string_view text, const StoreConfig& config) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  CorpusFile file;
  std::size_t expected = 0;
  bool have_header = false;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json object;
    const std::size_t record_number = have_header ? file.records.size() + 1 : 0;
    try {
      object = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed(line_number, record_number, std::string("invalid JSON: ") + e.what());
    }
    if (!have_header) {
      try {
        if (field<std::string>(object, "format") != kFormatName) {
          malformed(line_number, 0, "not a corpus file");
        }
        const auto version = field<int>(object, "version");
        if (version != kCorpusFormatVersion) {
          malformed(line_number, 0,
                    "unsupported version " + std::to_string(version) + " (expected " +
                        std::to_string(kCorpusFormatVersion) + ")");
        }
        file.id = field<std::string>(object, "id");
        expected = field<std::size_t>(object, "records");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::parse_error && std::string(e.what()).rfind("corpus line", 0) == 0) throw;
        malformed(line_number, 0, e.what());
      }
      if (expected < 1 || expected > config.max_records_per_file) {
        malformed(line_number, 0,
                  "a file holds 1 to " + std::to_string(config.max_records_per_file) +
                      " records, header says " + std::to_string(expected));
      }
      have_header = true;
      continue;
    }
    if (file.records.size() == expected) {
      malformed(line_number, record_number, "more records than the header declares");
    }
    try {
      auto record = record_from_json(object, config);
      if (!ids.insert(record.id()).second) {
        malformed(line_number, record_number, "duplicate sentence id '" + record.id() + "'");
      }
      file.records.push_back(std::move(record));
    } catch (const Error& e) {
      if (std::string(e.what()).rfind("corpus line", 0) == 0) throw;
      malformed(line_number, record_number, e.what());
    }
  }
  if (!have_header) malformed(line_number, 0, "missing header");
  if (file.records.size() != expected) {
    malformed(line_number, file.records.size() + 1,
              "file ends after " + std::to_string(file.records.size()) + " of " +
                  std::to_string(expected) + " records");
  }
  return file;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto temporary = path;
  temporary += ".tmp";
  {
    std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write '" + temporary.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "write to '" + temporary.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(temporary, path, ec);
  if (ec) {
    throw Error(ErrorCode::io_error, "cannot replace '" + path.string() + "': " + ec.message());
  }
}

void save_file(const CorpusFile& file, const std::filesystem::path& path) {
  if (file.records.empty()) {
    throw Error(ErrorCode::invalid_argument, "corpus file '" + file.id + "' has no records");
  }
  write_text_file(path, serialize_file(file));
}

CorpusFile load_file(const std::filesystem::path& path, const StoreConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_file(buffer.str(), config);
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + e.what());
  }
}

std::filesystem::path file_path(const std::filesystem::path& dir, const std::string& file_id) {
  return dir / (file_id + ".jsonl");
}

Corpus load_corpus(const std::filesystem::path& dir, const StoreConfig& config) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::io_error, "corpus directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());

  Corpus corpus;
  std::set<std::string> ids;
  for (const auto& path : paths) {
    auto file = load_file(path, config);
    if (file.id != path.stem().string()) {
      throw Error(ErrorCode::parse_error,
                  path.filename().string() + ": header id '" + file.id + "' does not match");
    }
    for (const auto& record : file.records) {
      if (!ids.insert(record.id()).second) {
        throw Error(ErrorCode::parse_error, path.filename().string() +
                                                ": sentence id '" + record.id() +
                                                "' already used in another file");
      }
    }
    corpus.push_back(std::move(file));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& file : corpus) save_file(file, file_path(dir, file.id));
}

}  // namespace forestjudge

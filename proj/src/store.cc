#include "forestjudge/store.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "forestjudge/error.h"

namespace forestjudge {

std::string_view to_string(RecordStatus status) {
  switch (status) {
    case RecordStatus::undecided:
      return "undecided";
    case RecordStatus::ok:
      return "ok";
    case RecordStatus::not_ok:
      return "not-ok";
  }
  return "undecided";
}

RecordStatus parse_record_status(std::string_view text) {
  if (text == "undecided") return RecordStatus::undecided;
  if (text == "ok") return RecordStatus::ok;
  if (text == "not-ok") return RecordStatus::not_ok;
  throw Error(ErrorCode::invalid_argument, "unknown record status '" + std::string(text) + "'");
}

std::uint64_t sequence_of(const LogEntry& entry) {
  return std::visit([](const auto& e) { return e.sequence; }, entry);
}

bool SentenceRecord::operator==(const SentenceRecord& other) const {
  const bool same_incidence =
      incidence == other.incidence ||
      (incidence && other.incidence && *incidence == *other.incidence);
  return same_incidence && sentence == other.sentence && analyses == other.analyses &&
         auto_assertions == other.auto_assertions && auto_conflict == other.auto_conflict &&
         log == other.log && status == other.status && failure_type == other.failure_type &&
         comment == other.comment;
}

SentenceRecord make_record(Sentence sentence, std::vector<Analysis> analyses,
                           const HeadTable& heads) {
  if (analyses.empty()) {
    throw Error(ErrorCode::invalid_argument, "sentence '" + sentence.id + "' has no analyses");
  }
  for (const auto& analysis : analyses) validate(analysis, sentence);
  std::vector<std::size_t> representatives;
  auto incidence = build_incidence(analyses, sentence, heads, &representatives);

  SentenceRecord record;
  for (std::size_t id = 0; id < representatives.size(); ++id) {
    Analysis kept = analyses[representatives[id]];
    kept.id = id;
    record.analyses.push_back(std::move(kept));
  }
  record.sentence = std::move(sentence);
  record.incidence = std::make_shared<const Incidence>(std::move(incidence));
  return record;
}

Session session_of(const SentenceRecord& record) {
  Session session = new_session(record.incidence);
  if (!record.auto_assertions.empty()) {
    session = with_auto_assertions(session, record.auto_assertions);
  }
  for (const auto& entry : record.log) {
    if (const auto* judgment = std::get_if<Judgment>(&entry)) {
      session = judge(session, judgment->target, judgment->value, judgment->provenance);
    } else {
      session = reset(session);
    }
  }
  return session;
}

namespace {

std::uint64_t next_sequence(const SentenceRecord& record, std::optional<std::uint64_t> wanted) {
  const auto last = record.last_sequence();
  if (!wanted) return last + 1;
  if (*wanted <= last) {
    throw Error(ErrorCode::invalid_argument,
                "sequence " + std::to_string(*wanted) + " for '" + record.id() +
                    "' is not after " + std::to_string(last));
  }
  return *wanted;
}

// An ok record must keep exactly one candidate; anything else reopens it.
void demote_if_reopened(SentenceRecord& record) {
  if (record.status == RecordStatus::ok && session_of(record).candidates().count() != 1) {
    record.status = RecordStatus::undecided;
  }
}

std::string single_line(std::string text) {
  for (auto& c : text) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

}  // namespace

void append_judgment(SentenceRecord& record, const std::string& key, Polarity value,
                     Provenance provenance, std::optional<std::uint64_t> sequence) {
  record.incidence->index_of(key);
  if (provenance != Provenance::user && provenance != Provenance::pos_propagated) {
    throw Error(ErrorCode::invalid_argument,
                "only user and pos-propagated judgments are logged, not " +
                    std::string(to_string(provenance)));
  }
  record.log.push_back(Judgment{key, value, provenance, next_sequence(record, sequence)});
  demote_if_reopened(record);
}

void append_reset(SentenceRecord& record, std::optional<std::uint64_t> sequence) {
  record.log.push_back(ResetMark{next_sequence(record, sequence)});
  demote_if_reopened(record);
}

void mark_ok(SentenceRecord& record) {
  const auto session = session_of(record);
  if (session.state() != SessionState::consistent) {
    throw Error(ErrorCode::conflict,
                "sentence '" + record.id() + "' cannot be ok: its judgments conflict");
  }
  if (const auto left = session.candidates().count(); left != 1) {
    throw Error(ErrorCode::conflict, "sentence '" + record.id() + "' cannot be ok: " +
                                         std::to_string(left) + " analyses remain");
  }
  record.status = RecordStatus::ok;
  record.failure_type.reset();
  record.comment.clear();
}

void mark_not_ok(SentenceRecord& record, const std::string& failure_type, std::string comment,
                 const StoreConfig& config) {
  if (std::find(config.failure_types.begin(), config.failure_types.end(), failure_type) ==
      config.failure_types.end()) {
    throw Error(ErrorCode::invalid_argument, "unknown failure type '" + failure_type + "'");
  }
  record.status = RecordStatus::not_ok;
  record.failure_type = failure_type;
  record.comment = single_line(std::move(comment));
}

void mark_undecided(SentenceRecord& record) {
  record.status = RecordStatus::undecided;
  record.failure_type.reset();
  record.comment.clear();
}

std::vector<const SentenceRecord*> list_failures(const Corpus& corpus,
                                                 const std::string& failure_type) {
  std::vector<const SentenceRecord*> out;
  for (const auto& file : corpus) {
    for (const auto& record : file.records) {
      if (record.status == RecordStatus::not_ok && record.failure_type == failure_type) {
        out.push_back(&record);
      }
    }
  }
  return out;
}

SentenceRecord* find_record(Corpus& corpus, std::string_view id) {
  for (auto& file : corpus) {
    for (auto& record : file.records) {
      if (record.id() == id) return &record;
    }
  }
  return nullptr;
}

const SentenceRecord* find_record(const Corpus& corpus, std::string_view id) {
  return find_record(const_cast<Corpus&>(corpus), id);
}

// --- merge ----------------------------------------------------------------

std::pair<SentenceRecord, MergeReport> merge(const SentenceRecord& old_record,
                                             Sentence new_sentence,
                                             std::vector<Analysis> new_analyses,
                                             const HeadTable& heads) {
  bool same_tokens = old_record.sentence.size() == new_sentence.size();
  for (std::size_t i = 0; same_tokens && i < new_sentence.size(); ++i) {
    same_tokens = old_record.sentence.tokens[i].surface == new_sentence.tokens[i].surface;
  }
  if (!same_tokens) {
    throw Error(ErrorCode::invalid_argument,
                "cannot merge '" + old_record.id() + "': the tokens differ");
  }
  new_sentence.id = old_record.id();

  MergeReport report;
  const auto old_session = session_of(old_record);
  report.old_candidates = old_session.candidates().count();

  SentenceRecord merged = make_record(std::move(new_sentence), std::move(new_analyses), heads);
  merged.status = old_record.status;
  merged.failure_type = old_record.failure_type;
  merged.comment = old_record.comment;
  merged.auto_conflict = old_record.auto_conflict;

  for (const auto& [key, value] : old_record.auto_assertions) {
    if (merged.incidence->find(key)) {
      merged.auto_assertions.emplace(key, value);
    } else {
      report.archived.push_back(Judgment{key, value, Provenance::automatic, 0});
    }
  }
  for (const auto& entry : old_record.log) {
    const auto* judgment = std::get_if<Judgment>(&entry);
    if (judgment && !merged.incidence->find(judgment->target)) {
      report.archived.push_back(*judgment);
      continue;
    }
    merged.log.push_back(entry);
    report.transferred.push_back(entry);
  }

  const auto new_session = session_of(merged);
  report.new_candidates = new_session.candidates().count();
  report.new_state = new_session.state();
  if (merged.status == RecordStatus::ok &&
      (new_session.state() == SessionState::conflict || report.new_candidates > 1)) {
    merged.status = RecordStatus::undecided;
    report.status_changed = true;
  }
  return {std::move(merged), std::move(report)};
}

// --- POS-sequence propagation ---------------------------------------------

PropagationReport pos_propagate(Corpus& corpus, std::string_view source_id) {
  const SentenceRecord* source = find_record(corpus, source_id);
  if (!source) throw Error(ErrorCode::not_found, "no sentence '" + std::string(source_id) + "'");
  if (source->status != RecordStatus::ok) {
    throw Error(ErrorCode::invalid_argument,
                "sentence '" + source->id() + "' must be ok before its judgments propagate");
  }
  const auto source_session = session_of(*source);
  const auto pattern = source->sentence.pos_sequence();

  std::vector<std::pair<std::string, Polarity>> source_judgments;
  for (const auto& [key, assertion] : source_session.user_assertions()) {
    if (assertion.provenance == Provenance::user) source_judgments.emplace_back(key, assertion.value);
  }

  PropagationReport report;
  for (auto& file : corpus) {
    for (auto& target : file.records) {
      if (target.id() == source->id() || target.sentence.pos_sequence() != pattern) continue;

      std::unordered_map<std::string, std::string> by_structure;
      std::set<std::string> ambiguous;
      for (const auto& property : target.incidence->properties()) {
        auto structural = structural_key(property.key);
        if (!by_structure.emplace(structural, property.key).second) ambiguous.insert(structural);
      }
      const auto target_session = session_of(target);

      SentenceRecord candidate = target;
      std::size_t added = 0;
      for (const auto& [key, value] : source_judgments) {
        auto structural = structural_key(key);
        auto it = by_structure.find(structural);
        if (it == by_structure.end() || ambiguous.count(structural)) continue;
        const auto& target_key = it->second;
        if (auto existing = target_session.user_assertions().find(target_key);
            existing != target_session.user_assertions().end()) {
          if (existing->second.provenance == Provenance::user) continue;
          if (existing->second.value == value) continue;
        }
        append_judgment(candidate, target_key, value, Provenance::pos_propagated);
        ++added;
      }
      if (added == 0) continue;
      if (session_of(candidate).state() == SessionState::conflict) {
        report.conflicted.push_back(target.id());
        continue;
      }
      target = std::move(candidate);
      report.updated.push_back(target.id());
      report.judgments_added += added;
    }
  }
  return report;
}

// --- priors, suspects, export ---------------------------------------------

namespace {

template <typename Visit>
void for_each_decided_discriminant(const SentenceRecord& record, Visit&& visit) {
  const auto session = session_of(record);
  const auto& incidence = session.incidence();
  for (std::size_t i = 0; i < incidence.properties().size(); ++i) {
    if (!incidence.is_discriminant(i)) continue;
    if (auto value = session.value_of(incidence.property(i).key)) {
      visit(incidence.property(i), *value);
    }
  }
}

}  // namespace

PriorTable update_priors(const Corpus& corpus, const ClassMap& classes) {
  PriorTable table;
  for (const auto& file : corpus) {
    for (const auto& record : file.records) {
      if (record.status != RecordStatus::ok) continue;
      for_each_decided_discriminant(record, [&](const Property& property, const Assertion& a) {
        table.add(abstract_property(property, classes).key, a.value);
      });
    }
  }
  return table;
}

std::vector<Suspect> find_suspects(const Corpus& corpus, const PriorTable& priors,
                                   const ClassMap& classes, std::size_t min_support,
                                   double min_agreement) {
  std::vector<Suspect> out;
  if (priors.empty()) return out;
  for (const auto& file : corpus) {
    for (const auto& record : file.records) {
      const auto session = session_of(record);
      Suspect suspect{record.id(), 0.0, {}};
      for (const auto& [key, assertion] : session.user_assertions()) {
        if (assertion.provenance != Provenance::user) continue;
        const auto& property = session.incidence().property(session.incidence().index_of(key));
        auto abstracted = abstract_property(property, classes).key;
        const auto* counts = priors.find(abstracted);
        if (!counts || counts->total() < min_support || counts->agreement() < min_agreement ||
            counts->majority() == assertion.value) {
          continue;
        }
        suspect.agreement = std::max(suspect.agreement, counts->agreement());
        suspect.judgments.push_back(SuspectJudgment{key, abstracted, assertion.value, *counts});
      }
      if (!suspect.judgments.empty()) out.push_back(std::move(suspect));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Suspect& a, const Suspect& b) { return a.agreement > b.agreement; });
  return out;
}

std::string format_training(const Corpus& corpus, const ClassMap& classes) {
  std::string out;
  for (const auto& file : corpus) {
    for (const auto& record : file.records) {
      if (record.status != RecordStatus::ok) continue;
      for_each_decided_discriminant(record, [&](const Property& property, const Assertion& a) {
        out += record.id() + "\t" + abstract_property(property, classes).key + "\t" +
               std::string(to_string(a.value)) + "\t" + std::string(to_string(a.provenance)) +
               "\n";
      });
    }
  }
  return out;
}

void export_training(const Corpus& corpus, const ClassMap& classes,
                     const std::filesystem::path& path) {
  write_text_file(path, format_training(corpus, classes));
}

std::size_t apply_auto_resolution(Corpus& corpus, const PriorTable& priors,
                                  const ClassMap& classes, std::size_t min_support,
                                  double min_agreement) {
  std::size_t changed = 0;
  for (auto& file : corpus) {
    for (auto& record : file.records) {
      if (record.status != RecordStatus::undecided) continue;
      auto resolved =
          auto_resolve(session_of(record), priors, classes, min_support, min_agreement);
      record.auto_assertions = resolved.auto_assertions();
      record.auto_conflict = resolved.auto_conflict();
      if (!record.auto_assertions.empty()) ++changed;
    }
  }
  return changed;
}

// --- judgment scripts -------------------------------------------------------

std::string export_script(const Corpus& corpus) {
  std::ostringstream out;
  for (const auto& file : corpus) {
    for (const auto& record : file.records) {
      const bool pristine = record.log.empty() && record.auto_assertions.empty() &&
                            !record.auto_conflict && record.status == RecordStatus::undecided;
      if (pristine) continue;
      const auto& id = record.id();
      if (record.auto_conflict) out << id << "\t@auto-conflict\ttrue\n";
      for (const auto& [key, value] : record.auto_assertions) {
        out << id << "\t@auto:" << key << '\t' << to_string(value) << '\n';
      }
      for (const auto& entry : record.log) {
        if (const auto* j = std::get_if<Judgment>(&entry)) {
          out << id << '\t' << j->target << '\t' << to_string(j->value) << '\t'
              << to_string(j->provenance) << '\t' << j->sequence << '\n';
        } else {
          out << id << "\t@reset\t-\tuser\t" << sequence_of(entry) << '\n';
        }
      }
      out << id << "\t@status\t" << to_string(record.status);
      if (record.status == RecordStatus::not_ok) {
        out << ':' << record.failure_type.value_or("") << ':' << record.comment;
      }
      out << '\n';
    }
  }
  return out.str();
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) fields.push_back(field);
  if (!line.empty() && line.back() == '\t') fields.emplace_back();
  return fields;
}

std::uint64_t parse_sequence(const std::string& text) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::parse_error, "bad sequence number '" + text + "'");
  }
  return value;
}

}  // namespace

ScriptReport apply_script(Corpus& corpus, std::string_view script, const StoreConfig& config) {
  ScriptReport report;
  std::set<std::string> touched;
  std::set<std::string> explicit_status;
  std::istringstream in{std::string(script)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      auto fields = split_tabs(line);
      if (fields.size() < 3 || fields.size() > 5) {
        throw Error(ErrorCode::parse_error, "expected 3 to 5 tab-separated fields");
      }
      const auto& id = fields[0];
      const auto& key = fields[1];
      const auto& value = fields[2];
      SentenceRecord* record = find_record(corpus, id);
      if (!record) throw Error(ErrorCode::not_found, "no sentence '" + id + "'");
      if (touched.insert(id).second) report.touched.push_back(id);

      std::optional<std::uint64_t> sequence;
      if (fields.size() == 5) sequence = parse_sequence(fields[4]);

      if (key == "@reset") {
        append_reset(*record, sequence);
      } else if (key == "@status") {
        explicit_status.insert(id);
        if (value == "ok") {
          mark_ok(*record);
        } else if (value == "undecided") {
          mark_undecided(*record);
        } else if (value.rfind("not-ok:", 0) == 0) {
          auto rest = value.substr(7);
          auto colon = rest.find(':');
          auto type = rest.substr(0, colon);
          auto comment = colon == std::string::npos ? std::string() : rest.substr(colon + 1);
          mark_not_ok(*record, type, comment, config);
        } else {
          throw Error(ErrorCode::parse_error, "unknown status '" + value + "'");
        }
      } else if (key == "@auto-conflict") {
        record->auto_conflict = value == "true";
      } else if (key.rfind("@auto:", 0) == 0) {
        auto target = key.substr(6);
        record->incidence->index_of(target);
        record->auto_assertions[target] = parse_polarity(value);
      } else {
        auto provenance = fields.size() >= 4 ? parse_provenance(fields[3]) : Provenance::user;
        append_judgment(*record, key, parse_polarity(value), provenance, sequence);
      }
      ++report.lines_applied;
    } catch (const Error& e) {
      throw Error(e.code(), "script line " + std::to_string(line_number) + ": " + e.what());
    }
  }

  for (const auto& id : report.touched) {
    if (explicit_status.count(id)) continue;
    auto* record = find_record(corpus, id);
    if (record->status != RecordStatus::undecided) continue;
    const auto session = session_of(*record);
    if (session.state() == SessionState::consistent && session.candidates().count() == 1) {
      record->status = RecordStatus::ok;
      report.marked_ok.push_back(id);
    }
  }
  return report;
}

}  // namespace forestjudge

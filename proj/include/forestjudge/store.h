#pragma once

// Corpus persistence and the corpus-level operations built on sessions:
// judgment logs, Not-OK triage, merging judgments across re-analysis,
// propagation between sentences with the same POS sequence, suspect
// detection, prior tables and training export.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "forestjudge/engine.h"
#include "forestjudge/extraction.h"
#include "forestjudge/model.h"

namespace forestjudge {

enum class RecordStatus { undecided, ok, not_ok };

std::string_view to_string(RecordStatus status);  // "undecided", "ok", "not-ok"
RecordStatus parse_record_status(std::string_view text);

// A Reset press. Later judgments start from a clean slate; automatic
// assertions stay.
struct ResetMark {
  std::uint64_t sequence = 0;

  bool operator==(const ResetMark&) const = default;
};

using LogEntry = std::variant<Judgment, ResetMark>;

std::uint64_t sequence_of(const LogEntry& entry);

struct SentenceRecord {
  Sentence sentence;
  // One representative per distinct property set, ids 0..N-1.
  std::vector<Analysis> analyses;
  std::shared_ptr<const Incidence> incidence;
  // Automatic assertions currently in force; not part of the log.
  ValueMap auto_assertions;
  bool auto_conflict = false;
  // User and pos-propagated judgments plus resets, sequence strictly increasing.
  std::vector<LogEntry> log;
  RecordStatus status = RecordStatus::undecided;
  std::optional<std::string> failure_type;
  std::string comment;

  const std::string& id() const { return sentence.id; }
  std::uint64_t last_sequence() const { return log.empty() ? 0 : sequence_of(log.back()); }

  bool operator==(const SentenceRecord& other) const;
};

struct CorpusFile {
  std::string id;
  std::vector<SentenceRecord> records;

  bool operator==(const CorpusFile&) const = default;
};

using Corpus = std::vector<CorpusFile>;

struct StoreConfig {
  std::size_t max_records_per_file = 50;
  std::vector<std::string> failure_types = {"missing-lexicon", "missing-construction",
                                            "wrong-tree-only", "extraction-gap", "other"};
  HeadTable heads;
};

// Collapses analyses with identical property sets and builds the incidence.
// Throws Error(invalid_argument) for an empty analysis list or an analysis
// that fails validation.
SentenceRecord make_record(Sentence sentence, std::vector<Analysis> analyses,
                           const HeadTable& heads);

// The session obtained by replaying the record's log over its automatic
// assertions.
Session session_of(const SentenceRecord& record);

// Appends a judgment with the next sequence number (or `sequence`, which must
// be larger than the last). An ok record left with other than one candidate
// drops back to undecided, after a judgment or a reset. Throws Error(not_found) for an unknown key and
// Error(invalid_argument) for derived/auto provenance or a stale sequence.
void append_judgment(SentenceRecord& record, const std::string& key, Polarity value,
                     Provenance provenance = Provenance::user,
                     std::optional<std::uint64_t> sequence = std::nullopt);
void append_reset(SentenceRecord& record, std::optional<std::uint64_t> sequence = std::nullopt);

// Throws Error(conflict) unless the session is consistent with exactly one
// analysis left.
void mark_ok(SentenceRecord& record);
// Throws Error(invalid_argument) for a failure type not in the configured set.
void mark_not_ok(SentenceRecord& record, const std::string& failure_type, std::string comment,
                 const StoreConfig& config);
void mark_undecided(SentenceRecord& record);

std::vector<const SentenceRecord*> list_failures(const Corpus& corpus,
                                                 const std::string& failure_type);

SentenceRecord* find_record(Corpus& corpus, std::string_view id);
const SentenceRecord* find_record(const Corpus& corpus, std::string_view id);

// --- persistence ----------------------------------------------------------

inline constexpr int kCorpusFormatVersion = 1;

// JSON lines: a header object, then one object per record. Output is
// byte-stable for equal files.
std::string serialize_file(const CorpusFile& file);
std::string serialize_record(const SentenceRecord& record);
std::string serialize_header(const std::string& file_id, std::size_t record_count);
// Throws Error(parse_error) naming the line and record for malformed input,
// a version mismatch or more records than the configured cap.
CorpusFile parse_file(std::string_view text, const StoreConfig& config);

// Atomic write (temporary file + rename).
void write_text_file(const std::filesystem::path& path, std::string_view text);
void save_file(const CorpusFile& file, const std::filesystem::path& path);
CorpusFile load_file(const std::filesystem::path& path, const StoreConfig& config);

// A corpus directory holds one <file id>.jsonl per corpus file.
std::filesystem::path file_path(const std::filesystem::path& dir, const std::string& file_id);
Corpus load_corpus(const std::filesystem::path& dir, const StoreConfig& config);
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// --- merge ----------------------------------------------------------------

struct MergeReport {
  std::vector<LogEntry> transferred;
  std::vector<Judgment> archived;  // judgments (and auto assertions) on vanished keys
  std::size_t old_candidates = 0;
  std::size_t new_candidates = 0;
  SessionState new_state = SessionState::consistent;
  bool status_changed = false;
};

// Rebuilds the record over new analyses of the same tokens and replays every
// judgment whose key still exists, in order. Throws Error(invalid_argument)
// if the token surfaces differ.
std::pair<SentenceRecord, MergeReport> merge(const SentenceRecord& old_record,
                                             Sentence new_sentence,
                                             std::vector<Analysis> new_analyses,
                                             const HeadTable& heads);

// --- POS-sequence propagation ---------------------------------------------

struct PropagationReport {
  std::vector<std::string> updated;     // targets that received judgments
  std::vector<std::string> conflicted;  // targets left untouched because of conflict
  std::size_t judgments_added = 0;
};

// Maps the source's effective user judgments by structural key onto every
// other record with the same POS sequence. Keys the target user already
// asserted are left alone. Throws Error(invalid_argument) unless the source
// is ok, Error(not_found) if it is not in the corpus.
PropagationReport pos_propagate(Corpus& corpus, std::string_view source_id);

// --- priors, suspects, export ---------------------------------------------

// Good/bad counts of every decided discriminant of every ok record, keyed by
// abstracted key.
PriorTable update_priors(const Corpus& corpus, const ClassMap& classes);

inline constexpr std::size_t kDefaultSuspectMinSupport = 10;
inline constexpr double kDefaultSuspectMinAgreement = 0.9;

struct SuspectJudgment {
  std::string key;
  std::string abstracted_key;
  Polarity value = Polarity::good;
  PriorCounts prior;
};

struct Suspect {
  std::string record_id;
  double agreement = 0.0;  // highest agreement among its suspect judgments
  std::vector<SuspectJudgment> judgments;
};

// Records holding a user judgment that disagrees with a well-supported prior,
// most confident disagreement first.
std::vector<Suspect> find_suspects(const Corpus& corpus, const PriorTable& priors,
                                   const ClassMap& classes,
                                   std::size_t min_support = kDefaultSuspectMinSupport,
                                   double min_agreement = kDefaultSuspectMinAgreement);

// One line per decided discriminant of each ok record:
// sentence id, abstracted key, polarity, provenance.
std::string format_training(const Corpus& corpus, const ClassMap& classes);
void export_training(const Corpus& corpus, const ClassMap& classes,
                     const std::filesystem::path& path);

// Runs auto_resolve on every undecided record and stores the outcome.
// Returns the number of records that received automatic assertions.
std::size_t apply_auto_resolution(Corpus& corpus, const PriorTable& priors,
                                  const ClassMap& classes,
                                  std::size_t min_support = kDefaultAutoMinSupport,
                                  double min_agreement = kDefaultAutoMinAgreement);

// --- judgment scripts -------------------------------------------------------

// Tab-separated lines: sentenceId, key, value[, provenance[, sequence]].
// Special keys: "@reset" (value ignored), "@status" with value "ok",
// "undecided" or "not-ok:<type>:<comment>", "@auto:<key>" with a polarity,
// and "@auto-conflict". Blank lines and '#' lines are ignored.
std::string export_script(const Corpus& corpus);

struct ScriptReport {
  std::size_t lines_applied = 0;
  std::vector<std::string> touched;     // record ids, in first-touch order
  std::vector<std::string> marked_ok;   // records auto-marked ok
};

// Applies a script to the corpus. Touched records without an explicit @status
// line that end consistent with a single candidate are marked ok. Throws
// Error(parse_error) with the line number on bad input.
ScriptReport apply_script(Corpus& corpus, std::string_view script, const StoreConfig& config);

}  // namespace forestjudge

#pragma once

// The judging session for one sentence. User (and automatic) assertions are
// kept as latest-wins maps; candidates and derived values are recomputed from
// scratch on every change with the closed form of propagation rules R1-R4
// under the one-good-analysis assumption.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "forestjudge/extraction.h"
#include "forestjudge/model.h"

namespace forestjudge {

enum class SessionState { consistent, conflict };

std::string_view to_string(SessionState state);

struct Assertion {
  Polarity value = Polarity::good;
  Provenance provenance = Provenance::user;

  bool operator==(const Assertion&) const = default;
};

using AssertionMap = std::map<std::string, Assertion>;
using ValueMap = std::map<std::string, Polarity>;

struct Closure {
  AnalysisSet candidates;
  ValueMap derived;
  SessionState state = SessionState::consistent;

  bool operator==(const Closure&) const = default;
};

// Candidates are the analyses every good assertion holds for and no bad
// assertion holds for. If none remain the state is conflict and nothing is
// derived. Otherwise every property not asserted is derived good when it holds
// for all candidates and bad when it holds for none.
// Throws Error(not_found) if an assertion names an unknown property.
Closure propagate(const ValueMap& assertions, const Incidence& incidence);

struct PriorCounts {
  std::size_t good = 0;
  std::size_t bad = 0;

  std::size_t total() const { return good + bad; }
  Polarity majority() const { return good >= bad ? Polarity::good : Polarity::bad; }
  double agreement() const {
    return total() == 0 ? 0.0 : static_cast<double>(std::max(good, bad)) / total();
  }

  bool operator==(const PriorCounts&) const = default;
};

// Good/bad outcome counts per abstracted property key over a judged corpus.
class PriorTable {
 public:
  void add(const std::string& key, Polarity value, std::size_t count = 1);
  void set(const std::string& key, PriorCounts counts) { counts_[key] = counts; }
  const PriorCounts* find(std::string_view key) const;
  const std::map<std::string, PriorCounts>& entries() const { return counts_; }
  bool empty() const { return counts_.empty(); }

  bool operator==(const PriorTable&) const = default;

 private:
  std::map<std::string, PriorCounts> counts_;
};

class Session {
 public:
  const Incidence& incidence() const { return *incidence_; }
  const std::shared_ptr<const Incidence>& shared_incidence() const { return incidence_; }

  // User and pos-propagated assertions; these override automatic ones.
  const AssertionMap& user_assertions() const { return user_; }
  const ValueMap& auto_assertions() const { return auto_; }
  const ValueMap& derived() const { return closure_.derived; }
  const AnalysisSet& candidates() const { return closure_.candidates; }
  SessionState state() const { return closure_.state; }
  bool auto_conflict() const { return auto_conflict_; }

  // Effective value of a property, if decided, with where it came from.
  std::optional<Assertion> value_of(std::string_view key) const;
  // Auto assertions overlaid by user assertions.
  ValueMap effective_assertions() const;

  bool operator==(const Session& other) const;

 private:
  friend Session new_session(std::shared_ptr<const Incidence> incidence);
  friend Session judge(const Session&, std::string_view, Polarity, Provenance);
  friend Session reset(const Session&);
  friend Session auto_resolve(const Session&, const PriorTable&, const ClassMap&,
                              std::size_t, double);
  friend Session with_auto_assertions(const Session&, const ValueMap&);

  void recompute();

  std::shared_ptr<const Incidence> incidence_;
  AssertionMap user_;
  ValueMap auto_;
  Closure closure_;
  bool auto_conflict_ = false;
};

// Throws Error(invalid_argument) if the incidence has no analyses.
Session new_session(std::shared_ptr<const Incidence> incidence);

// Records (or supersedes) an assertion and recomputes the closure. Throws
// Error(not_found) for a key that is not a property of the sentence.
Session judge(const Session& session, std::string_view key, Polarity value,
              Provenance provenance = Provenance::user);

// Drops all user assertions; automatic assertions stay in force.
Session reset(const Session& session);

// Replaces the automatic assertions wholesale (used when rebuilding a
// session from a judgment log).
Session with_auto_assertions(const Session& session, const ValueMap& assertions);

struct SessionStatus {
  std::size_t possibly_good = 0;
  // Displayed discriminants with no user, automatic or derived value; unset
  // in conflict.
  std::optional<std::size_t> undecided_discriminants;
  SessionState state = SessionState::consistent;

  bool operator==(const SessionStatus&) const = default;
};

SessionStatus status(const Session& session);

// Tab-separated (key, good, bad) lines. Throws Error(parse_error).
PriorTable parse_prior_table(std::string_view text);
std::string format_prior_table(const PriorTable& table);

inline constexpr std::size_t kDefaultAutoMinSupport = 10;
inline constexpr double kDefaultAutoMinAgreement = 0.99;

// Adds an automatic assertion for every discriminant whose abstracted key has
// at least `min_support` prior outcomes with a majority share of at least
// `min_agreement`. Keys the user has asserted are skipped. If the result
// conflicts, all automatic assertions are dropped and auto_conflict() is set.
Session auto_resolve(const Session& session, const PriorTable& priors, const ClassMap& classes,
                     std::size_t min_support = kDefaultAutoMinSupport,
                     double min_agreement = kDefaultAutoMinAgreement);

// The undecided displayed discriminant minimizing the worst-case number of
// surviving candidates, ties broken by friendliness then key. Empty when
// nothing is left to decide or the session is in conflict.
std::optional<std::string> suggest_next(const Session& session);

}  // namespace forestjudge

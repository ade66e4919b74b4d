#include "forestjudge/engine.h"

#include <limits>
#include <sstream>

#include "forestjudge/error.h"

namespace forestjudge {

std::string_view to_string(SessionState state) {
  return state == SessionState::consistent ? "consistent" : "conflict";
}

Closure propagate(const ValueMap& assertions, const Incidence& incidence) {
  Closure closure;
  closure.candidates = AnalysisSet::all(incidence.analysis_count());
  // R1 and R2: bad assertions remove the analyses they hold for, good ones
  // remove the analyses they do not hold for.
  for (const auto& [key, value] : assertions) {
    const auto& holds = incidence.holds(key);
    if (value == Polarity::good) {
      closure.candidates &= holds;
    } else {
      closure.candidates -= holds;
    }
  }
  if (closure.candidates.empty()) {
    closure.state = SessionState::conflict;
    return closure;
  }
  // R3 and R4: a property true of no candidate is bad, one true of every
  // candidate is good. Neither can prune further, since each is uniform over
  // the candidates.
  for (std::size_t i = 0; i < incidence.properties().size(); ++i) {
    const auto& key = incidence.property(i).key;
    if (assertions.count(key)) continue;
    const auto& holds = incidence.holds(i);
    if (closure.candidates.is_subset_of(holds)) {
      closure.derived.emplace(key, Polarity::good);
    } else if (!closure.candidates.intersects(holds)) {
      closure.derived.emplace(key, Polarity::bad);
    }
  }
  return closure;
}

// --- Session --------------------------------------------------------------

std::optional<Assertion> Session::value_of(std::string_view key) const {
  const std::string k(key);
  if (auto it = user_.find(k); it != user_.end()) return it->second;
  if (auto it = auto_.find(k); it != auto_.end()) {
    return Assertion{it->second, Provenance::automatic};
  }
  if (auto it = closure_.derived.find(k); it != closure_.derived.end()) {
    return Assertion{it->second, Provenance::derived};
  }
  return std::nullopt;
}

ValueMap Session::effective_assertions() const {
  ValueMap out = auto_;
  for (const auto& [key, assertion] : user_) out[key] = assertion.value;
  return out;
}

bool Session::operator==(const Session& other) const {
  const bool same_incidence =
      incidence_ == other.incidence_ ||
      (incidence_ && other.incidence_ && *incidence_ == *other.incidence_);
  return same_incidence && user_ == other.user_ && auto_ == other.auto_ &&
         closure_ == other.closure_ && auto_conflict_ == other.auto_conflict_;
}

void Session::recompute() { closure_ = propagate(effective_assertions(), *incidence_); }

Session new_session(std::shared_ptr<const Incidence> incidence) {
  if (!incidence || incidence->analysis_count() == 0) {
    throw Error(ErrorCode::invalid_argument, "cannot open a session with no analyses");
  }
  Session session;
  session.incidence_ = std::move(incidence);
  session.recompute();
  return session;
}

Session judge(const Session& session, std::string_view key, Polarity value,
              Provenance provenance) {
  session.incidence().index_of(key);
  if (provenance == Provenance::derived) {
    throw Error(ErrorCode::invalid_argument, "derived values cannot be asserted");
  }
  Session next = session;
  if (provenance == Provenance::automatic) {
    next.auto_[std::string(key)] = value;
  } else {
    next.user_[std::string(key)] = Assertion{value, provenance};
  }
  next.recompute();
  return next;
}

Session reset(const Session& session) {
  Session next = session;
  next.user_.clear();
  next.recompute();
  return next;
}

Session with_auto_assertions(const Session& session, const ValueMap& assertions) {
  for (const auto& [key, value] : assertions) session.incidence().index_of(key);
  Session next = session;
  next.auto_ = assertions;
  next.auto_conflict_ = false;
  next.recompute();
  return next;
}

SessionStatus status(const Session& session) {
  SessionStatus out;
  out.state = session.state();
  out.possibly_good = session.candidates().count();
  if (session.state() == SessionState::conflict) return out;
  std::size_t undecided = 0;
  const auto& incidence = session.incidence();
  for (auto index : incidence.display_order()) {
    if (!session.value_of(incidence.property(index).key)) ++undecided;
  }
  out.undecided_discriminants = undecided;
  return out;
}

// --- Priors ---------------------------------------------------------------

void PriorTable::add(const std::string& key, Polarity value, std::size_t count) {
  auto& counts = counts_[key];
  (value == Polarity::good ? counts.good : counts.bad) += count;
}

const PriorCounts* PriorTable::find(std::string_view key) const {
  auto it = counts_.find(std::string(key));
  return it == counts_.end() ? nullptr : &it->second;
}

PriorTable parse_prior_table(std::string_view text) {
  PriorTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key, good, bad;
    if (!std::getline(fields, key, '\t') || !std::getline(fields, good, '\t') ||
        !std::getline(fields, bad)) {
      throw Error(ErrorCode::parse_error,
                  "prior table line " + std::to_string(line_number) + ": expected 3 columns");
    }
    try {
      std::size_t used_good = 0, used_bad = 0;
      PriorCounts counts{std::stoul(good, &used_good), std::stoul(bad, &used_bad)};
      if (used_good != good.size() || used_bad != bad.size()) throw std::invalid_argument("");
      table.set(key, counts);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse_error,
                  "prior table line " + std::to_string(line_number) + ": bad count");
    }
  }
  return table;
}

std::string format_prior_table(const PriorTable& table) {
  std::string out;
  for (const auto& [key, counts] : table.entries()) {
    out += key + "\t" + std::to_string(counts.good) + "\t" + std::to_string(counts.bad) + "\n";
  }
  return out;
}

Session auto_resolve(const Session& session, const PriorTable& priors, const ClassMap& classes,
                     std::size_t min_support, double min_agreement) {
  if (min_support < 1) {
    throw Error(ErrorCode::invalid_argument, "auto-resolution needs min support >= 1");
  }
  if (!(min_agreement > 0.5 && min_agreement <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "auto-resolution agreement must be in (0.5, 1]");
  }
  const auto& incidence = session.incidence();
  ValueMap automatic;
  for (std::size_t i = 0; i < incidence.properties().size(); ++i) {
    if (!incidence.is_discriminant(i)) continue;
    const auto& property = incidence.property(i);
    if (session.user_assertions().count(property.key)) continue;
    const auto* counts = priors.find(abstract_property(property, classes).key);
    if (!counts || counts->total() < min_support || counts->agreement() < min_agreement) {
      continue;
    }
    automatic.emplace(property.key, counts->majority());
  }
  Session next = session;
  next.auto_ = automatic;
  next.auto_conflict_ = false;
  next.recompute();
  if (next.state() == SessionState::conflict && !automatic.empty()) {
    next.auto_.clear();
    next.auto_conflict_ = true;
    next.recompute();
  }
  return next;
}

std::optional<std::string> suggest_next(const Session& session) {
  if (session.state() == SessionState::conflict) return std::nullopt;
  const auto& incidence = session.incidence();
  const auto& candidates = session.candidates();
  const std::size_t total = candidates.count();

  std::optional<std::size_t> best;
  std::size_t best_worst = std::numeric_limits<std::size_t>::max();
  for (auto index : incidence.display_order()) {
    const auto& property = incidence.property(index);
    if (session.value_of(property.key)) continue;
    const std::size_t inside = (candidates & incidence.holds(index)).count();
    const std::size_t worst = std::max(inside, total - inside);
    if (!best || worst < best_worst) {
      best = index;
      best_worst = worst;
      continue;
    }
    // display_order already sorts by friendliness; break remaining ties by key.
    const auto& incumbent = incidence.property(*best);
    if (worst == best_worst && property.friendliness() == incumbent.friendliness() &&
        property.key < incumbent.key) {
      best = index;
    }
  }
  if (!best) return std::nullopt;
  return incidence.property(*best).key;
}

}  // namespace forestjudge

#pragma once

// Shared fixtures for the unit tests and the acceptance suite.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "forestjudge/engine.h"
#include "forestjudge/grammar.h"
#include "forestjudge/store.h"

namespace fixtures {

using namespace forestjudge;

inline const char* kB6 = "show me the flights to Boston serving a meal";
inline const char* kW14 = "show me the flights serving meals on Wednesday";

// Keys of the B6 discriminants the walkthrough names.
inline const char* kB6Np = "c:NP:2-9";          // the flights to Boston serving a meal
inline const char* kB6Advp = "c:ADVP:6-9";      // serving a meal, attached to the verb
inline const char* kB6VpServing = "c:VP:6-9";   // serving a meal, in every analysis
inline const char* kB6FlightTo = "t:3:to:+:5:flight:boston";
inline const char* kB6ShowTo = "t:0:to:-:5:show:boston";
inline const char* kB6Provide = "w:6:serve_1";
inline const char* kB6FlyTo = "w:6:serve_2";

std::filesystem::path data_path(const std::string& name);
std::string read_file(const std::filesystem::path& path);

const Grammar& bundled_grammar();
const ClassMap& bundled_classes();

// The bundled grammar without the adverbial-participle rules.
Grammar grammar_without_adverbials();
// The bundled grammar plus a gerund modifier, which gives B6 a 7th reading.
Grammar grammar_with_gerund();

ParseResult parse(const std::string& id, const std::string& text,
                  const Grammar& grammar = bundled_grammar());
SentenceRecord record(const std::string& id, const std::string& text,
                      const Grammar& grammar = bundled_grammar());

// A hand-built 154-analysis incidence. The NP over tokens 2-16 holds for 20
// analyses; the relative clause over 5-9 holds for 2 of those (and 10
// outside). Every other displayed discriminant splits the 20 as 1/19 or not
// at all, and hidden rule-name bits tell all 154 apart.
std::shared_ptr<const Incidence> f154();
inline const char* kF154Np = "c:NP:2-16";
inline const char* kF154RelClause = "c:RELC:5-9";

// Ten "show me the flights to <city>" sentences, all ok. Nine approve
// "flight to <city>"; the one with id `kContradictoryId` approves
// "show -to <city>".
Corpus suspects_corpus();
inline const char* kContradictoryId = "q07";

// A random incidence with `n` analyses and `m` displayed properties whose
// holds-sets are drawn uniformly (empty and full sets included).
std::shared_ptr<const Incidence> random_incidence(std::mt19937& rng, std::size_t n, std::size_t m);

}  // namespace fixtures

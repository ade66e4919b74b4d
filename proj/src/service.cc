#include "forestjudge/service.h"

#include <httplib.h>

#include "forestjudge/error.h"

namespace forestjudge {

using nlohmann::json;

namespace {

json span_json(const Span& span) { return json::array({span.start, span.end}); }

json value_fields(const Session& session, const std::string& key) {
  json out;
  if (auto value = session.value_of(key)) {
    out["value"] = std::string(to_string(value->value));
    out["provenance"] = std::string(to_string(value->provenance));
  } else {
    out["value"] = "undecided";
    out["provenance"] = nullptr;
  }
  return out;
}

}  // namespace

json sentence_view(const SentenceRecord& record, bool expert) {
  const auto session = session_of(record);
  const auto& incidence = session.incidence();
  const auto summary = status(session);

  json tokens = json::array();
  for (const auto& token : record.sentence.tokens) {
    tokens.push_back({{"index", token.index}, {"surface", token.surface}, {"pos", token.pos}});
  }

  const auto order = incidence.display_order();
  json discriminants = json::array();
  for (auto index : order) {
    const auto& property = incidence.property(index);
    json item = {{"key", property.key},
                 {"display", property.display},
                 {"kind", std::string(to_string(property.kind))},
                 {"friendliness", property.friendliness()},
                 {"span", span_json(property.span)}};
    item.update(value_fields(session, property.key));
    discriminants.push_back(std::move(item));
  }

  auto suggestion = suggest_next(session);
  json view = {
      {"id", record.id()},
      {"text", record.sentence.text()},
      {"tokens", std::move(tokens)},
      {"analyses", incidence.analysis_count()},
      {"possiblyGood", summary.possibly_good},
      {"undecided", summary.undecided_discriminants ? json(*summary.undecided_discriminants)
                                                    : json(nullptr)},
      {"state", std::string(to_string(summary.state))},
      {"status", std::string(to_string(record.status))},
      {"failureType", record.failure_type ? json(*record.failure_type) : json(nullptr)},
      {"comment", record.comment},
      {"seq", record.last_sequence()},
      {"autoConflict", record.auto_conflict},
      {"discriminants", std::move(discriminants)},
      {"hiddenCount", incidence.properties().size() - order.size()},
      {"suggestion", suggestion ? json(*suggestion) : json(nullptr)},
  };

  if (expert) {
    json properties = json::array();
    for (std::size_t i = 0; i < incidence.properties().size(); ++i) {
      const auto& property = incidence.property(i);
      json item = {{"key", property.key},
                   {"display", property.display},
                   {"kind", std::string(to_string(property.kind))},
                   {"friendliness", property.friendliness()},
                   {"span", span_json(property.span)},
                   {"discriminant", incidence.is_discriminant(i)},
                   {"holds", incidence.holds(i).ids()}};
      item.update(value_fields(session, property.key));
      properties.push_back(std::move(item));
    }
    json forest = json::array();
    for (const auto& analysis : record.analyses) {
      json senses = json::object();
      for (const auto& [index, tag] : analysis.senses) {
        if (tag.ambiguous) senses[std::to_string(index)] = tag.label;
      }
      forest.push_back({{"id", analysis.id},
                        {"tree", format_tree(analysis.tree, record.sentence)},
                        {"type", std::string(to_string(analysis.type))},
                        {"senses", std::move(senses)},
                        {"multiplicity", incidence.multiplicity().at(analysis.id)},
                        {"candidate", session.candidates().contains(analysis.id)}});
    }
    view["properties"] = std::move(properties);
    view["forest"] = std::move(forest);
  }
  return view;
}

// --- service ----------------------------------------------------------------

AnnotationService::AnnotationService(ServiceConfig config)
    : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  if (config_.grammar) grammar_ = load_grammar(config_.grammar->string());
  auto corpus = load_corpus(config_.db, config_.store);
  for (auto& file : corpus) {
    auto file_slot = std::make_unique<FileSlot>();
    file_slot->id = file.id;
    for (std::size_t i = 0; i < file.records.size(); ++i) {
      file_slot->lines.push_back(serialize_record(file.records[i]));
      auto record_slot = std::make_unique<RecordSlot>();
      record_slot->file = files_.size();
      record_slot->index = i;
      record_slot->record = std::move(file.records[i]);
      order_.push_back(record_slot->record.id());
      records_.emplace(order_.back(), std::move(record_slot));
    }
    files_.push_back(std::move(file_slot));
  }
  install_routes();
}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::io_error, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void AnnotationService::listen() { server_->listen_after_bind(); }

void AnnotationService::wait_until_ready() const { server_->wait_until_ready(); }

void AnnotationService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

Corpus AnnotationService::snapshot() const {
  Corpus corpus;
  for (const auto& file : files_) corpus.push_back(CorpusFile{file->id, {}});
  for (const auto& id : order_) {
    const auto& record_slot = *records_.at(id);
    std::shared_lock lock(record_slot.mutex);
    corpus[record_slot.file].records.push_back(record_slot.record);
  }
  return corpus;
}

AnnotationService::RecordSlot& AnnotationService::slot(const std::string& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) throw Error(ErrorCode::not_found, "no sentence '" + id + "'");
  return *it->second;
}

void AnnotationService::commit(RecordSlot& record_slot, SentenceRecord updated) {
  auto& file = *files_[record_slot.file];
  {
    std::lock_guard lock(file.mutex);
    auto lines = file.lines;
    lines[record_slot.index] = serialize_record(updated);
    std::string text = serialize_header(file.id, lines.size()) + "\n";
    for (const auto& line : lines) text += line + "\n";
    write_text_file(file_path(config_.db, file.id), text);
    file.lines = std::move(lines);
  }
  record_slot.record = std::move(updated);
}

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::parse_error:
      return 400;
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::conflict:
      return 409;
    case ErrorCode::io_error:
      return 500;
  }
  return 500;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto body = json::parse(req.body);
    if (!body.is_object()) throw Error(ErrorCode::invalid_argument, "body must be a JSON object");
    return body;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T body_field(const json& body, const char* name) {
  if (!body.contains(name)) {
    throw Error(ErrorCode::invalid_argument, std::string("body needs '") + name + "'");
  }
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::invalid_argument, std::string("'") + name + "' has the wrong type");
  }
}

std::optional<std::uint64_t> body_seq(const json& body) {
  if (!body.contains("seq") || body["seq"].is_null()) return std::nullopt;
  return body_field<std::uint64_t>(body, "seq");
}

bool flag(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return false;
  auto value = req.get_param_value(name);
  return value.empty() || value == "true" || value == "1";
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      reply(res, http_status(e.code()), json{{"error", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, json{{"error", e.what()}});
    }
  };
}

[[noreturn]] void stale(const SentenceRecord& record, std::uint64_t seq) {
  throw Error(ErrorCode::conflict, "sentence '" + record.id() + "' is at seq " +
                                       std::to_string(record.last_sequence()) + ", request had " +
                                       std::to_string(seq));
}

}  // namespace

void AnnotationService::install_routes() {
  auto& server = *server_;

  server.Get("/files", guarded([this](const httplib::Request&, httplib::Response& res) {
    json files = json::array();
    for (const auto& file : snapshot()) {
      json sentences = json::array();
      for (const auto& record : file.records) {
        sentences.push_back({{"id", record.id()},
                             {"text", record.sentence.text()},
                             {"status", std::string(to_string(record.status))}});
      }
      files.push_back({{"id", file.id}, {"sentences", std::move(sentences)}});
    }
    reply(res, 200, files);
  }));

  server.Get(R"(/sentences/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               auto& record_slot = slot(req.matches[1]);
               std::shared_lock lock(record_slot.mutex);
               reply(res, 200, sentence_view(record_slot.record, flag(req, "expert")));
             }));

  server.Post(R"(/sentences/([^/]+)/judgments)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto& record_slot = slot(req.matches[1]);
                const auto body = parse_body(req);
                const auto key = body_field<std::string>(body, "key");
                const auto value = parse_polarity(body_field<std::string>(body, "value"));
                const auto seq = body_seq(body);

                std::unique_lock lock(record_slot.mutex);
                const auto& current = record_slot.record;
                if (seq && *seq != current.last_sequence()) {
                  const auto* last =
                      current.log.empty() ? nullptr : std::get_if<Judgment>(&current.log.back());
                  const bool already_applied = last && last->sequence == *seq + 1 &&
                                               last->target == key && last->value == value &&
                                               last->provenance == Provenance::user;
                  if (!already_applied) stale(current, *seq);
                } else {
                  SentenceRecord updated = current;
                  append_judgment(updated, key, value);
                  commit(record_slot, std::move(updated));
                }
                reply(res, 200, sentence_view(record_slot.record, flag(req, "expert")));
              }));

  server.Post(R"(/sentences/([^/]+)/reset)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto& record_slot = slot(req.matches[1]);
                const auto seq = body_seq(parse_body(req));

                std::unique_lock lock(record_slot.mutex);
                const auto& current = record_slot.record;
                if (seq && *seq != current.last_sequence()) {
                  const bool already_applied =
                      !current.log.empty() && std::holds_alternative<ResetMark>(current.log.back()) &&
                      current.last_sequence() == *seq + 1;
                  if (!already_applied) stale(current, *seq);
                } else {
                  SentenceRecord updated = current;
                  append_reset(updated);
                  commit(record_slot, std::move(updated));
                }
                reply(res, 200, sentence_view(record_slot.record, flag(req, "expert")));
              }));

  server.Post(R"(/sentences/([^/]+)/status)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                auto& record_slot = slot(req.matches[1]);
                const auto body = parse_body(req);
                const auto wanted = parse_record_status(body_field<std::string>(body, "status"));

                std::unique_lock lock(record_slot.mutex);
                SentenceRecord updated = record_slot.record;
                switch (wanted) {
                  case RecordStatus::ok:
                    mark_ok(updated);
                    break;
                  case RecordStatus::undecided:
                    mark_undecided(updated);
                    break;
                  case RecordStatus::not_ok:
                    mark_not_ok(updated, body_field<std::string>(body, "failureType"),
                                body.contains("comment") ? body_field<std::string>(body, "comment")
                                                         : std::string(),
                                config_.store);
                    break;
                }
                commit(record_slot, std::move(updated));
                reply(res, 200, sentence_view(record_slot.record, flag(req, "expert")));
              }));

  server.Get("/suspects", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::size_t min_support = kDefaultSuspectMinSupport;
    double min_agreement = kDefaultSuspectMinAgreement;
    try {
      if (req.has_param("minSupport")) min_support = std::stoul(req.get_param_value("minSupport"));
      if (req.has_param("minAgreement")) {
        min_agreement = std::stod(req.get_param_value("minAgreement"));
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::invalid_argument, "minSupport/minAgreement must be numbers");
    }
    const auto corpus = snapshot();
    const auto priors = update_priors(corpus, config_.classes);
    json out = json::array();
    for (const auto& suspect :
         find_suspects(corpus, priors, config_.classes, min_support, min_agreement)) {
      json judgments = json::array();
      for (const auto& j : suspect.judgments) {
        judgments.push_back({{"key", j.key},
                             {"abstractedKey", j.abstracted_key},
                             {"value", std::string(to_string(j.value))},
                             {"priorGood", j.prior.good},
                             {"priorBad", j.prior.bad}});
      }
      out.push_back({{"id", suspect.record_id},
                     {"agreement", suspect.agreement},
                     {"judgments", std::move(judgments)}});
    }
    reply(res, 200, out);
  }));

  server.Post("/merge", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!grammar_) throw Error(ErrorCode::invalid_argument, "the service has no grammar loaded");
    const auto id = body_field<std::string>(parse_body(req), "id");
    auto& record_slot = slot(id);

    std::unique_lock lock(record_slot.mutex);
    std::vector<std::string> words;
    for (const auto& token : record_slot.record.sentence.tokens) words.push_back(token.surface);
    auto parsed = parse_all(id, words, *grammar_, config_.max_analyses);
    if (parsed.analyses.empty()) {
      throw Error(ErrorCode::invalid_argument, "the grammar gives '" + id + "' no analysis");
    }
    auto [merged, report] = merge(record_slot.record, std::move(parsed.sentence),
                                  std::move(parsed.analyses), config_.store.heads);
    commit(record_slot, std::move(merged));

    json archived = json::array();
    for (const auto& j : report.archived) {
      archived.push_back({{"key", j.target},
                          {"value", std::string(to_string(j.value))},
                          {"provenance", std::string(to_string(j.provenance))}});
    }
    reply(res, 200,
          json{{"transferred", report.transferred.size()},
               {"archived", std::move(archived)},
               {"oldCandidates", report.old_candidates},
               {"newCandidates", report.new_candidates},
               {"statusChanged", report.status_changed},
               {"view", sentence_view(record_slot.record, false)}});
  }));

  server.Post("/parse", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!grammar_) throw Error(ErrorCode::invalid_argument, "the service has no grammar loaded");
    const auto words = tokenize(body_field<std::string>(parse_body(req), "text"));
    if (words.empty()) throw Error(ErrorCode::invalid_argument, "text is empty");
    ParseResult parsed;
    try {
      parsed = parse_all("typein", words, *grammar_, config_.max_analyses);
    } catch (const Error& e) {
      // An unknown word is a problem with the request, not a missing resource.
      throw Error(ErrorCode::invalid_argument, e.what());
    }
    if (parsed.analyses.empty()) {
      throw Error(ErrorCode::invalid_argument, "the grammar gives this text no analysis");
    }
    auto record = make_record(std::move(parsed.sentence), std::move(parsed.analyses),
                              config_.store.heads);
    reply(res, 200, sentence_view(record, flag(req, "expert")));
  }));
}

}  // namespace forestjudge

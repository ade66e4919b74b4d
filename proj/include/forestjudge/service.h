#pragma once

// HTTP annotation service over a corpus directory. All bodies are JSON.
//
//   GET  /files
//   GET  /sentences/{id}?expert=true
//   POST /sentences/{id}/judgments   {"key": ..., "value": "good"|"bad", "seq": n}
//   POST /sentences/{id}/reset       {"seq": n}
//   POST /sentences/{id}/status      {"status": "ok"|"not-ok"|"undecided",
//                                     "failureType": ..., "comment": ...}
//   GET  /suspects?minSupport=n&minAgreement=x
//   POST /merge                      {"id": ...}
//   POST /parse                      {"text": ...}
//
// "seq" is optional. When given it must equal the sentence's current seq.
// Re-sending a request that was already applied returns the current view.
// Any other mismatch is answered with 409.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "forestjudge/grammar.h"
#include "forestjudge/store.h"

namespace httplib {
class Server;
}

namespace forestjudge {

// The view of one sentence the annotator UI renders. Expert views add every
// property with its holds-set and the parse forest.
nlohmann::json sentence_view(const SentenceRecord& record, bool expert = false);

struct ServiceConfig {
  std::filesystem::path db;
  StoreConfig store;
  // Needed by /merge and /parse; both answer 400 without one.
  std::optional<std::filesystem::path> grammar;
  ClassMap classes;
  std::size_t max_analyses = kDefaultMaxAnalyses;
};

class AnnotationService {
 public:
  // Loads the corpus. Throws Error on a bad corpus or grammar.
  explicit AnnotationService(ServiceConfig config);
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Returns the bound port. Port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // Blocks until a listen() running on another thread accepts connections.
  void wait_until_ready() const;
  void stop();

  // Copy of the current corpus, in file order.
  Corpus snapshot() const;

 private:
  struct FileSlot {
    std::mutex mutex;
    std::string id;
    std::vector<std::string> lines;  // serialized records
  };
  struct RecordSlot {
    mutable std::shared_mutex mutex;
    SentenceRecord record;
    std::size_t file = 0;
    std::size_t index = 0;
  };

  void install_routes();
  RecordSlot& slot(const std::string& id) const;
  // Writes the record's file with `updated` in place, then stores it.
  void commit(RecordSlot& slot, SentenceRecord updated);

  ServiceConfig config_;
  std::optional<Grammar> grammar_;
  std::vector<std::unique_ptr<FileSlot>> files_;
  std::vector<std::string> order_;  // sentence ids in corpus order
  std::unordered_map<std::string, std::unique_ptr<RecordSlot>> records_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace forestjudge

#pragma once

// HTTP/SSE service and command-line entry point.
//
// Endpoints (all JSON):
//   POST /sessions                      {problem_text, seed?, config?}
//   GET  /sessions                      ids known to the store
//   GET  /sessions/{id}                 session.json document
//   POST /sessions/{id}/problem         {problem_text}
//   POST /sessions/{id}/ideas           {text}
//   POST /sessions/{id}/literature      {title, action, object, context, source_url?}
//   POST /sessions/{id}/advance         {approve?, note?}
//   POST /sessions/{id}/rerun           {phase}
//   POST /sessions/{id}/overrides       {type: AddIdea | RemoveIdea | RestoreIdea, ...}
//   GET  /sessions/{id}/clusters        plot data
//   GET  /sessions/{id}/report          ?format=json | markdown
//   GET  /sessions/{id}/artifacts/{ref} rendered image bytes
//   GET  /sessions/{id}/events          server-sent events; ?from=<index>,
//                                       Last-Event-ID, ?follow=false
// Errors: 400 malformed or invalid input, 404 unknown session or idea,
// 409 phase or gate conflicts, 502 provider failures.

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "midas/orchestrator.hpp"
#include "midas/persistence.hpp"
#include "midas/runtime_config.hpp"

namespace httplib {
class Server;
}

namespace midas {

struct ServiceOptions {
  std::filesystem::path store_root = "sessions";
  RuntimeConfig runtime;
  Sleeper sleeper = real_sleeper();
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Blocks until stop(). Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and serves on a background thread; returns the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  httplib::Server& server();

 private:
  struct Slot;
  std::shared_ptr<Slot> slot(const std::string& id);
  std::shared_ptr<Slot> open(Session s);
  void publish(Slot& slot);
  void routes();

  ServiceOptions options_;
  Store store_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex slots_mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  std::atomic<bool> stopping_{false};
  std::unique_ptr<std::thread> thread_;
};

// Maps an exception to an HTTP status and a JSON body {error, field?}.
std::pair<int, json> error_response(const std::exception& e);

// CLI: run | resume | export | plot | serve. Exit codes: 0 success,
// 2 validation / config / decode errors, 3 provider or structured-output
// failures, 1 anything else.
int cli_run(int argc, const char* const* argv);

}  // namespace midas

#include "midas/gateway.hpp"

#include <httplib.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <thread>

namespace midas {

namespace fs = std::filesystem;

struct Service::Slot {
  std::mutex mu;  // serializes commands on this session
  Session session;
  ArtifactStore artifacts;
  RuntimeTransports transports;
  std::unique_ptr<ProviderHub> hub;
  std::unique_ptr<Professor> professor;

  std::mutex ev_mu;
  std::condition_variable cv;
  std::vector<SessionEvent> published;
  bool done = false;
};

std::pair<int, json> error_response(const std::exception& e) {
  json body{{"error", e.what()}};
  if (const auto* d = dynamic_cast<const DecodeError*>(&e)) {
    body["field"] = d->field();
    return {400, body};
  }
  if (dynamic_cast<const json::exception*>(&e)) return {400, body};
  if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const ConfigError*>(&e)) return {400, body};
  if (dynamic_cast<const NotFound*>(&e)) return {404, body};
  if (dynamic_cast<const PhaseError*>(&e) || dynamic_cast<const GateError*>(&e)) return {409, body};
  if (dynamic_cast<const ProviderError*>(&e) || dynamic_cast<const StructuredOutputError*>(&e)) return {502, body};
  return {500, body};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw DecodeError("$", std::string("malformed JSON body: ") + e.what());
  }
  if (!body.is_object()) throw DecodeError("$", "expected object");
  return body;
}

json summary(const Session& s) {
  return json{{"id", s.id},
              {"phase", to_string(s.phase)},
              {"phase_state", to_string(s.phase_state)},
              {"round", s.round},
              {"loop_pending", s.loop_pending},
              {"gate_approved", s.gate_approved},
              {"awaiting_gate", s.phase_state == PhaseState::Completed && !s.loop_pending && !s.gate_approved &&
                                    phase_is_gated(s.config, s.phase)},
              {"events", s.event_log.size()},
              {"pending_human_ideas", s.pending_human_ideas.size()}};
}

std::string sse_frame(const SessionEvent& e) {
  return "id: " + std::to_string(e.index) + "\nevent: " + std::string(to_string(e.kind)) + "\ndata: " + encode(e).dump() +
         "\n\n";
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), store_(options_.store_root), server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::~Service() { stop(); }

httplib::Server& Service::server() { return *server_; }

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::start_background(const std::string& host) {
  int port = server_->bind_to_any_port(host);
  if (port <= 0) return port;
  thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  stopping_ = true;
  {
    std::lock_guard lock(slots_mu_);
    for (auto& [id, s] : slots_) s->cv.notify_all();
  }
  if (server_) server_->stop();
  if (thread_ && thread_->joinable()) thread_->join();
  thread_.reset();
}

std::shared_ptr<Service::Slot> Service::open(Session s) {
  auto slot = std::make_shared<Slot>();
  slot->transports = build_transports(options_.runtime, s.seed);
  slot->hub = std::make_unique<ProviderHub>(slot->transports.transports, s.config, s.seed, options_.sleeper);
  slot->professor = std::make_unique<Professor>(*slot->hub, &slot->artifacts);
  slot->session = std::move(s);
  slot->published = slot->session.event_log;
  slot->done = slot->session.phase == Phase::Done;
  return slot;
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& id) {
  std::lock_guard lock(slots_mu_);
  if (auto it = slots_.find(id); it != slots_.end()) return it->second;
  if (!store_.contains(id)) throw NotFound("unknown session '" + id + "'");
  auto s = open(store_.load(id));
  store_.load_artifacts(id, s->artifacts);
  slots_[id] = s;
  return s;
}

void Service::publish(Slot& slot) {
  store_.save(slot.session, &slot.artifacts);
  std::lock_guard lock(slot.ev_mu);
  for (std::size_t i = slot.published.size(); i < slot.session.event_log.size(); ++i) {
    slot.published.push_back(slot.session.event_log[i]);
  }
  slot.done = slot.session.phase == Phase::Done;
  slot.cv.notify_all();
}

void Service::routes() {
  auto& srv = *server_;

  // Runs `body` under the session's command lock and persists + publishes
  // whatever it committed, including on failure.
  auto command = [this](const httplib::Request& req, httplib::Response& res,
                        const std::function<json(Slot&, const json&)>& body) {
    std::shared_ptr<Slot> s;
    try {
      s = slot(req.path_params.at("id"));
    } catch (const std::exception& e) {
      auto [status, err] = error_response(e);
      return send_json(res, status, err);
    }
    std::lock_guard lock(s->mu);
    try {
      json out = body(*s, parse_body(req));
      publish(*s);
      send_json(res, 200, out);
    } catch (const std::exception& e) {
      publish(*s);
      auto [status, err] = error_response(e);
      err["session"] = summary(s->session);
      send_json(res, status, err);
    }
  };
  auto query = [this](const httplib::Request& req, httplib::Response& res,
                      const std::function<void(Slot&, httplib::Response&)>& body) {
    try {
      auto s = slot(req.path_params.at("id"));
      std::lock_guard lock(s->mu);
      body(*s, res);
    } catch (const std::exception& e) {
      auto [status, err] = error_response(e);
      send_json(res, status, err);
    }
  };

  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      json body = parse_body(req);
      Reader r(body);
      SessionConfig config = options_.runtime.session;
      if (auto c = r.maybe("config")) config = decode_config(*c);
      std::uint64_t seed = r.maybe("seed") ? r.at("seed").unsigned_integer() : 0;
      Session s = new_session(r.at("problem_text").nonempty_str(), config, seed);
      std::shared_ptr<Slot> slot;
      {
        std::lock_guard lock(slots_mu_);
        if (slots_.count(s.id) || store_.contains(s.id)) {
          throw PhaseError("session '" + s.id + "' already exists; choose another seed");
        }
        slot = open(std::move(s));
        slots_[slot->session.id] = slot;
      }
      std::lock_guard lock(slot->mu);
      publish(*slot);
      send_json(res, 201, summary(slot->session));
    } catch (const std::exception& e) {
      auto [status, err] = error_response(e);
      send_json(res, status, err);
    }
  });

  srv.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, json{{"sessions", store_.list()}});
  });

  srv.Get("/sessions/:id", [query](const httplib::Request& req, httplib::Response& res) {
    query(req, res, [](Slot& s, httplib::Response& r) { send_json(r, 200, encode(s.session)); });
  });

  srv.Post("/sessions/:id/problem", [command](const httplib::Request& req, httplib::Response& res) {
    command(req, res, [](Slot& s, const json& body) {
      Professor::revise_problem(s.session, Reader(body).at("problem_text").nonempty_str());
      return summary(s.session);
    });
  });

  srv.Post("/sessions/:id/ideas", [command](const httplib::Request& req, httplib::Response& res) {
    command(req, res, [](Slot& s, const json& body) {
      Professor::submit_idea(s.session, Reader(body).at("text").nonempty_str());
      return summary(s.session);
    });
  });

  srv.Post("/sessions/:id/literature", [command](const httplib::Request& req, httplib::Response& res) {
    command(req, res, [](Slot& s, const json& body) {
      Reader r(body);
      LiteratureEntry e;
      e.title = r.at("title").nonempty_str();
      e.action = r.at("action").nonempty_str();
      e.object = r.at("object").nonempty_str();
      e.context = r.at("context").nonempty_str();
      if (auto u = r.maybe("source_url")) e.source_url = u->str();
      std::string id = Professor::add_literature(s.session, e);
      json out = summary(s.session);
      out["literature_id"] = id;
      return out;
    });
  });

  srv.Post("/sessions/:id/advance", [command](const httplib::Request& req, httplib::Response& res) {
    command(req, res, [](Slot& s, const json& body) {
      Reader r(body);
      bool approve = r.maybe("approve") && r.at("approve").boolean();
      std::string note = r.maybe("note") ? r.at("note").str() : std::string();
      Session& ses = s.session;
      if (ses.phase == Phase::Done) throw PhaseError("session is done");
      json out;
      bool ran = false;
      if (ses.phase_state != PhaseState::Completed) {
        out["ran"] = to_string(ses.phase);
        s.professor->run_phase(ses);
        ran = true;
      }
      bool awaiting = !ses.loop_pending && !ses.gate_approved && phase_is_gated(ses.config, ses.phase);
      if (awaiting && !approve) {
        if (!ran) throw GateError(std::string(to_string(ses.phase)) + " gate requires approval");
        json sum = summary(ses);
        sum["ran"] = out["ran"];
        sum["advanced"] = false;
        return sum;
      }
      s.professor->advance(ses, awaiting ? std::optional<HumanApproval>(HumanApproval{note, Actor::Human}) : std::nullopt);
      json sum = summary(ses);
      if (ran) sum["ran"] = out["ran"];
      sum["advanced"] = true;
      return sum;
    });
  });

  srv.Post("/sessions/:id/rerun", [command](const httplib::Request& req, httplib::Response& res) {
    command(req, res, [](Slot& s, const json& body) {
      Phase target = decode_phase(Reader(body).at("phase"));
      s.professor->rerun_from(s.session, target, Actor::Human);
      return summary(s.session);
    });
  });

  srv.Post("/sessions/:id/overrides", [command](const httplib::Request& req, httplib::Response& res) {
    command(req, res, [](Slot& s, const json& body) {
      std::string id = apply_override(s.session, decode_override(Reader(body)));
      json out = summary(s.session);
      out["idea"] = encode(*s.session.vaults.find_idea(id));
      return out;
    });
  });

  srv.Get("/sessions/:id/clusters", [query](const httplib::Request& req, httplib::Response& res) {
    query(req, res, [](Slot& s, httplib::Response& r) { send_json(r, 200, session_plot_data(s.session)); });
  });

  srv.Get("/sessions/:id/report", [query](const httplib::Request& req, httplib::Response& res) {
    std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
    query(req, res, [format](Slot& s, httplib::Response& r) {
      ReportFormat f = parse_report_format(format);
      std::string doc = export_report(s.session, f);
      r.status = 200;
      r.set_content(doc, f == ReportFormat::Markdown ? "text/markdown" : "application/json");
    });
  });

  srv.Get("/sessions/:id/artifacts/:ref", [query](const httplib::Request& req, httplib::Response& res) {
    std::string ref = req.path_params.at("ref");
    query(req, res, [ref](Slot& s, httplib::Response& r) {
      auto art = s.artifacts.get(ref);
      if (!art) throw NotFound("unknown artifact '" + ref + "'");
      r.status = 200;
      r.set_content(art->bytes, art->media_type);
    });
  });

  srv.Get("/sessions/:id/events", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<Slot> s;
    std::uint64_t next = 0;
    try {
      s = slot(req.path_params.at("id"));
      if (req.has_param("from")) next = std::stoull(req.get_param_value("from"));
      if (req.has_header("Last-Event-ID")) next = std::stoull(req.get_header_value("Last-Event-ID")) + 1;
    } catch (const std::invalid_argument&) {
      return send_json(res, 400, json{{"error", "event index must be a non-negative integer"}});
    } catch (const std::out_of_range&) {
      return send_json(res, 400, json{{"error", "event index out of range"}});
    } catch (const std::exception& e) {
      auto [status, err] = error_response(e);
      return send_json(res, status, err);
    }
    bool follow = !(req.has_param("follow") && req.get_param_value("follow") == "false");
    res.set_header("Cache-Control", "no-cache");
    auto cursor = std::make_shared<std::uint64_t>(next);
    res.set_chunked_content_provider("text/event-stream", [this, s, cursor, follow](std::size_t, httplib::DataSink& sink) {
      std::string chunk;
      bool finished = false;
      {
        std::unique_lock lock(s->ev_mu);
        if (follow && *cursor >= s->published.size() && !s->done) {
          s->cv.wait_for(lock, std::chrono::milliseconds(250),
                         [&] { return stopping_ || s->done || *cursor < s->published.size(); });
        }
        for (; *cursor < s->published.size(); ++*cursor) chunk += sse_frame(s->published[*cursor]);
        finished = !follow || s->done || stopping_;
      }
      if (!chunk.empty() && !sink.write(chunk.data(), chunk.size())) return false;
      if (!chunk.empty() || !follow) {
      } else if (!sink.is_writable()) {
        return false;
      } else {
        static const std::string ping = ": keep-alive\n\n";
        if (!sink.write(ping.data(), ping.size())) return false;
      }
      if (finished) sink.done();
      return true;
    });
  });
}

// --- CLI -------------------------------------------------------------------------

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ProviderError*>(&e) || dynamic_cast<const StructuredOutputError*>(&e)) return 3;
  if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DecodeError*>(&e) ||
      dynamic_cast<const NotFound*>(&e) || dynamic_cast<const json::exception*>(&e)) {
    return 2;
  }
  return 1;
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path);
  out << text;
}

struct Runner {
  RuntimeTransports transports;
  std::unique_ptr<ProviderHub> hub;
  ArtifactStore artifacts;
  std::unique_ptr<Professor> professor;

  Runner(const RuntimeConfig& rc, const Session& s) {
    transports = build_transports(rc, s.seed);
    hub = std::make_unique<ProviderHub>(transports.transports, s.config, s.seed);
    professor = std::make_unique<Professor>(*hub, &artifacts);
  }
};

// Runs until Done (headless) or the next human gate; saves on every exit path.
void drive(Runner& runner, Session& s, const Store& store, bool headless) {
  try {
    if (headless) runner.professor->run_to_completion(s);
    else runner.professor->run_until_gate(s);
  } catch (...) {
    store.save(s, &runner.artifacts);
    throw;
  }
  store.save(s, &runner.artifacts);
}

void report_status(const Session& s, const Store& store) {
  std::cerr << "session " << s.id << ": " << to_string(s.phase) << " (" << to_string(s.phase_state) << ")";
  if (s.phase != Phase::Done) std::cerr << ", awaiting approval; continue with: midas resume --session " << s.id << " --approve";
  std::cerr << "\nstored in " << store.session_dir(s.id).string() << "\n";
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"midas: multi-agent ideation engine"};
  app.require_subcommand(1);
  std::string store_dir = "sessions";
  app.add_option("--store", store_dir, "Session store directory");

  std::string problem, config, session_id, out, format = "json", host = "127.0.0.1";
  std::uint64_t seed = 0;
  bool headless = false, approve = false;
  int port = 8080;

  auto* run = app.add_subcommand("run", "Create and execute a session");
  run->add_option("--problem", problem, "Problem file (JSON or plain text)")->required();
  run->add_option("--config", config, "Config file (JSON)")->required();
  run->add_option("--seed", seed, "Session seed");
  run->add_flag("--headless", headless, "Auto-approve every gate");
  run->add_option("--out", out, "Report output path (default <store>/<id>/report.json)");
  run->add_option("--format", format, "Report format: json | markdown | plot-data");

  auto* resume = app.add_subcommand("resume", "Continue a stored session");
  resume->add_option("--session", session_id, "Session id")->required();
  resume->add_option("--config", config, "Config file (JSON)")->required();
  resume->add_flag("--approve", approve, "Approve the gate the session is waiting at");
  resume->add_flag("--headless", headless, "Auto-approve every remaining gate");
  resume->add_option("--out", out, "Report output path");
  resume->add_option("--format", format, "Report format");

  auto* exp = app.add_subcommand("export", "Export a report");
  exp->add_option("--session", session_id, "Session id")->required();
  exp->add_option("--format", format, "json | markdown | plot-data");
  exp->add_option("--out", out, "Output path (default stdout)");

  auto* plot = app.add_subcommand("plot", "Write cluster plot data");
  plot->add_option("--session", session_id, "Session id")->required();
  plot->add_option("--out", out, "Output path")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP/SSE service");
  serve->add_option("--config", config, "Config file (JSON)")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    Store store(store_dir);
    auto write_report = [&](const Session& s) {
      if (phase_index(s.phase) < phase_index(Phase::Assessment)) return;
      std::string path = out.empty() ? (store.session_dir(s.id) / "report.json").string() : out;
      write_out(path, export_report(s, out.empty() ? ReportFormat::Json : parse_report_format(format)));
    };

    if (*run) {
      RuntimeConfig rc = load_runtime_config(config);
      ProblemInput input = load_problem(problem);
      Session s = new_session(input.problem_text, rc.session, seed);
      for (const auto& idea : input.ideas) Professor::submit_idea(s, idea);
      for (const auto& lit : input.literature) Professor::add_literature(s, lit);
      Runner runner(rc, s);
      drive(runner, s, store, headless);
      write_report(s);
      std::cout << s.id << "\n";
      report_status(s, store);
      return 0;
    }
    if (*resume) {
      RuntimeConfig rc = load_runtime_config(config);
      Session s = store.load(session_id);
      Runner runner(rc, s);
      store.load_artifacts(session_id, runner.artifacts);
      if (s.phase == Phase::Done) throw PhaseError("session is done");
      bool waiting = s.phase_state == PhaseState::Completed && !s.loop_pending && !s.gate_approved &&
                     phase_is_gated(s.config, s.phase);
      if (waiting && (approve || headless)) {
        runner.professor->advance(s, HumanApproval{"approved via CLI", approve ? Actor::Human : Actor::System});
      } else if (waiting) {
        throw GateError(std::string(to_string(s.phase)) + " gate requires --approve");
      }
      drive(runner, s, store, headless);
      write_report(s);
      std::cout << s.id << "\n";
      report_status(s, store);
      return 0;
    }
    if (*exp) {
      Session s = store.load(session_id);
      write_out(out, export_report(s, parse_report_format(format)));
      return 0;
    }
    if (*plot) {
      Session s = store.load(session_id);
      write_out(out, session_plot_data(s).dump(2) + "\n");
      return 0;
    }
    if (*serve) {
      ServiceOptions opts;
      opts.store_root = store_dir;
      opts.runtime = load_runtime_config(config);
      Service service(std::move(opts));
      std::cerr << "listening on " << host << ":" << port << "\n";
      if (!service.listen(host, port)) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 1;
}

}  // namespace midas

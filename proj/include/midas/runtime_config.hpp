#pragma once

// Run configuration for the CLI and the service.
//
//   {"session": {...SessionConfig...},
//    "providers": {"transcript": "transcript.json",
//                  "chat": {"kind": "scripted"}, "embedding": {"kind": "hashing", "dimension": 64},
//                  "search": {"kind": "simulated", "results": 10}, "image": {"kind": "placeholder"}}}
//
// Kinds: chat http | scripted | simulated; embedding http | scripted | hashing;
// search http | scripted | simulated | none; image http | placeholder.
// Relative paths resolve against the config file's directory. HTTP keys come
// from MIDAS_CHAT_KEY, MIDAS_EMBED_KEY, MIDAS_SEARCH_KEY, MIDAS_IMAGE_KEY.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "midas/providers.hpp"
#include "midas/scripted.hpp"

namespace midas {

struct TransportSpec {
  std::string kind;
  std::size_t dimension = 64;  // hashing
  int results = 10;            // simulated search
};

struct RuntimeConfig {
  SessionConfig session = default_config();
  TransportSpec chat{"simulated"};
  TransportSpec embedding{"hashing"};
  TransportSpec search{"simulated"};
  TransportSpec image{"placeholder"};
  std::optional<std::filesystem::path> transcript;
};

// Throws ConfigError or DecodeError.
RuntimeConfig decode_runtime_config(const Reader& r, const std::filesystem::path& base_dir = {});
RuntimeConfig load_runtime_config(const std::filesystem::path& path);

struct RuntimeTransports {
  Transports transports;
  std::shared_ptr<ScriptedProvider> scripted;  // set when any kind is scripted
};

RuntimeTransports build_transports(const RuntimeConfig& config, std::uint64_t seed);

// Problem file: JSON {"problem_text", "ideas": [text], "literature": [{title,
// action, object, context, source_url}]} or plain text.
struct ProblemInput {
  std::string problem_text;
  std::vector<std::string> ideas;
  std::vector<LiteratureEntry> literature;
};

ProblemInput load_problem(const std::filesystem::path& path);

}  // namespace midas

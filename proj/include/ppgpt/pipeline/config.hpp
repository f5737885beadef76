#pragma once

#include <optional>
#include <string>

namespace ppgpt::pipeline {

struct Config {
  std::string knowledge_path;  // knowledge.jsonl entries or a persisted store

  std::string solver_cmd = "z3 -in";
  int solver_timeout_ms = 10000;

  double retrieve_threshold = 0.8;
  std::optional<size_t> retrieve_max;

  int gen_max_attempts = 9;
  unsigned gen_workers = 4;
  size_t rank_k = 2;

  std::string provider_mode = "replay";  // remote | record | replay
  std::string provider_endpoint;
  std::string provider_model;
  std::string provider_fixture;  // record: appended to; replay: read from
  int provider_max_concurrent = 4;
  double provider_temperature = 0.8;

  std::string embed_mode = "local";  // local | remote
  std::string embed_endpoint;
  std::string embed_model;
  size_t embed_dimension = 256;

  int bmc_depth = 3;
  int loop_bound = 5;
};

// key=value lines; '#' starts a comment. Unknown keys and bad values throw
// ConfigError. Relative paths are taken relative to `base_dir`.
Config parse_config(const std::string& text, const std::string& base_dir = "", const std::string& origin = "<config>");
Config load_config(const std::string& path);

}  // namespace ppgpt::pipeline

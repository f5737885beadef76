#include "ppgpt/pipeline/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ppgpt/common/error.hpp"

namespace ppgpt::pipeline {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

int positive(const std::string& key, const std::string& v) {
  int n = number<int>(key, v);
  if (n < 1) throw ConfigError(key + " must be a positive integer");
  return n;
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = key + " must be one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg + ", got '" + v + "'");
}

}  // namespace

Config parse_config(const std::string& text, const std::string& base_dir, const std::string& origin) {
  Config c;
  auto path = [&](const std::string& v) {
    fs::path p(v);
    return (p.is_absolute() || base_dir.empty()) ? p.string() : (fs::path(base_dir) / p).lexically_normal().string();
  };
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> keys = {
      {"knowledgePath", [&](auto&, auto& v) { c.knowledge_path = path(v); }},
      {"solver.cmd", [&](auto&, auto& v) { c.solver_cmd = v; }},
      {"solver.timeout_ms", [&](auto& k, auto& v) { c.solver_timeout_ms = positive(k, v); }},
      {"retrieve.threshold",
       [&](auto& k, auto& v) {
         c.retrieve_threshold = number<double>(k, v);
         if (c.retrieve_threshold < -1 || c.retrieve_threshold > 1) throw ConfigError(k + " must lie in [-1, 1]");
       }},
      {"retrieve.max", [&](auto& k, auto& v) { c.retrieve_max = size_t(positive(k, v)); }},
      {"gen.max_attempts",
       [&](auto& k, auto& v) {
         c.gen_max_attempts = number<int>(k, v);
         if (c.gen_max_attempts < 0) throw ConfigError(k + " must not be negative");
       }},
      {"gen.workers", [&](auto& k, auto& v) { c.gen_workers = unsigned(positive(k, v)); }},
      {"rank.k", [&](auto& k, auto& v) { c.rank_k = size_t(positive(k, v)); }},
      {"provider.mode", [&](auto& k, auto& v) { c.provider_mode = one_of(k, v, {"remote", "record", "replay"}); }},
      {"provider.endpoint", [&](auto&, auto& v) { c.provider_endpoint = v; }},
      {"provider.model", [&](auto&, auto& v) { c.provider_model = v; }},
      {"provider.fixture", [&](auto&, auto& v) { c.provider_fixture = path(v); }},
      {"provider.max_concurrent", [&](auto& k, auto& v) { c.provider_max_concurrent = positive(k, v); }},
      {"provider.temperature", [&](auto& k, auto& v) { c.provider_temperature = number<double>(k, v); }},
      {"embed.mode", [&](auto& k, auto& v) { c.embed_mode = one_of(k, v, {"local", "remote"}); }},
      {"embed.endpoint", [&](auto&, auto& v) { c.embed_endpoint = v; }},
      {"embed.model", [&](auto&, auto& v) { c.embed_model = v; }},
      {"embed.dimension", [&](auto& k, auto& v) { c.embed_dimension = size_t(positive(k, v)); }},
      {"bmc.depth",
       [&](auto& k, auto& v) {
         c.bmc_depth = number<int>(k, v);
         if (c.bmc_depth < 0) throw ConfigError(k + " must not be negative");
       }},
      {"loop.bound", [&](auto& k, auto& v) { c.loop_bound = positive(k, v); }},
  };

  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (size_t h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(n) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(origin + ":" + std::to_string(n) + ": unknown key '" + key + "'");
    try {
      it->second(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::path(path).parent_path().string(), path);
}

}  // namespace ppgpt::pipeline

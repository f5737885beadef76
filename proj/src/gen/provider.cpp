#include "ppgpt/gen/provider.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "ppgpt/common/error.hpp"
#include "ppgpt/common/http.hpp"

namespace ppgpt::gen {

using nlohmann::json;

std::string prompt_hash(const std::string& prompt) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(prompt.data(), prompt.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

// ---- remote ----

RemoteProvider::RemoteProvider(RemoteProviderOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ConfigError("provider.endpoint is required in remote and record mode");
  if (options_.api_key.empty())
    if (const char* k = std::getenv("PROPGPT_LLM_KEY")) options_.api_key = k;
  if (options_.max_concurrent < 1) options_.max_concurrent = 1;
}

std::string RemoteProvider::complete(const std::string& prompt, const LLMParams& p) {
  {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return in_flight_ < options_.max_concurrent; });
    ++in_flight_;
  }
  struct Release {
    RemoteProvider* self;
    ~Release() {
      std::lock_guard lk(self->mu_);
      --self->in_flight_;
      self->cv_.notify_one();
    }
  } release{this};

  json req = {{"model", options_.model},
              {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
              {"temperature", p.temperature},
              {"top_p", p.top_p},
              {"frequency_penalty", p.frequency_penalty},
              {"presence_penalty", p.presence_penalty},
              {"max_tokens", p.max_tokens}};
  std::map<std::string, std::string> headers;
  if (!options_.api_key.empty()) headers["Authorization"] = "Bearer " + options_.api_key;
  HttpResponse r = http_post_json(options_.endpoint, req.dump(), headers, options_.timeout_ms);
  if (r.status < 200 || r.status >= 300) throw ProviderError("LLM endpoint answered HTTP " + std::to_string(r.status));
  try {
    return json::parse(r.body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("malformed LLM response: ") + e.what());
  }
}

// ---- fixtures ----

std::vector<FixtureRecord> load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("cannot read replay fixture " + path);
  std::vector<FixtureRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      out.push_back({j.at("promptHash").get<std::string>(), j.at("response").get<std::string>()});
    } catch (const json::exception& e) {
      throw ProviderError(path + ":" + std::to_string(n) + ": malformed fixture record");
    }
  }
  return out;
}

void append_fixture(const std::string& path, const FixtureRecord& r) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw ProviderError("cannot write fixture " + path);
  out << json{{"promptHash", r.prompt_hash}, {"response", r.response}}.dump() << "\n";
}

RecordingProvider::RecordingProvider(std::shared_ptr<LLMProvider> inner, std::string path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

std::string RecordingProvider::complete(const std::string& prompt, const LLMParams& params) {
  std::string resp = inner_->complete(prompt, params);
  std::lock_guard lk(mu_);
  append_fixture(path_, {prompt_hash(prompt), resp});
  return resp;
}

ReplayProvider::ReplayProvider(const std::vector<FixtureRecord>& records) {
  for (const auto& r : records) by_hash_[r.prompt_hash].push_back(r.response);
}

std::shared_ptr<ReplayProvider> ReplayProvider::from_file(const std::string& path) {
  return std::make_shared<ReplayProvider>(load_fixture(path));
}

std::string ReplayProvider::complete(const std::string& prompt, const LLMParams&) {
  std::string h = prompt_hash(prompt);
  std::lock_guard lk(mu_);
  auto it = by_hash_.find(h);
  if (it == by_hash_.end()) throw ProviderError("no recorded response for prompt " + h);
  size_t& k = next_[h];
  const std::string& r = it->second[std::min(k, it->second.size() - 1)];
  ++k;
  return r;
}

std::string ScriptedProvider::complete(const std::string& prompt, const LLMParams&) {
  std::lock_guard lk(mu_);
  if (prompts_.size() >= responses_.size()) throw ProviderError("scripted provider has no more responses");
  prompts_.push_back(prompt);
  return responses_[prompts_.size() - 1];
}

}  // namespace ppgpt::gen

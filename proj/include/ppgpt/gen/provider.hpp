#pragma once

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace ppgpt::gen {

struct LLMParams {
  double temperature = 0.8;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;
  int max_tokens = 2000;
};

class LLMProvider {
 public:
  virtual ~LLMProvider() = default;
  // Throws ProviderError on failure.
  virtual std::string complete(const std::string& prompt, const LLMParams& params) = 0;
};

// Hex SHA-256 of the prompt; the replay key.
std::string prompt_hash(const std::string& prompt);

struct RemoteProviderOptions {
  std::string endpoint;  // chat-completions URL
  std::string model;
  std::string api_key;   // defaults to $PROPGPT_LLM_KEY
  int timeout_ms = 120000;
  int max_concurrent = 4;
};

/// Chat-completion client: POST {model, messages, temperature, top_p, ...},
/// answer text at choices[0].message.content.
class RemoteProvider : public LLMProvider {
 public:
  explicit RemoteProvider(RemoteProviderOptions options);
  std::string complete(const std::string& prompt, const LLMParams& params) override;

 private:
  RemoteProviderOptions options_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
};

/// Forwards to `inner` and appends every exchange to a fixture file.
class RecordingProvider : public LLMProvider {
 public:
  RecordingProvider(std::shared_ptr<LLMProvider> inner, std::string path);
  std::string complete(const std::string& prompt, const LLMParams& params) override;

 private:
  std::shared_ptr<LLMProvider> inner_;
  std::string path_;
  std::mutex mu_;
};

struct FixtureRecord {
  std::string prompt_hash;
  std::string response;
};

std::vector<FixtureRecord> load_fixture(const std::string& path);
void append_fixture(const std::string& path, const FixtureRecord& r);

/// Answers from recorded fixtures only. Several records under one hash are
/// served in file order; the last one repeats once they run out.
class ReplayProvider : public LLMProvider {
 public:
  explicit ReplayProvider(const std::vector<FixtureRecord>& records);
  static std::shared_ptr<ReplayProvider> from_file(const std::string& path);
  std::string complete(const std::string& prompt, const LLMParams& params) override;

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<std::string>> by_hash_;
  std::map<std::string, size_t> next_;
};

/// Returns canned responses in order, regardless of the prompt; keeps the prompts.
class ScriptedProvider : public LLMProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const std::string& prompt, const LLMParams& params) override;
  const std::vector<std::string>& prompts() const { return prompts_; }
  size_t calls() const { return prompts_.size(); }

 private:
  std::mutex mu_;
  std::vector<std::string> responses_;
  std::vector<std::string> prompts_;
};

}  // namespace ppgpt::gen

#include "ppgpt/knowledge/embedder.hpp"

#include <cctype>
#include <cmath>
#include <json.hpp>

#include "ppgpt/common/error.hpp"
#include "ppgpt/common/http.hpp"

namespace ppgpt::knowledge {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> tokenize_code(const std::string& text) {
  static const char* ops[] = {"==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "=>", "**"};
  std::vector<std::string> out;
  size_t i = 0, n = text.size();
  auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
  while (i < n) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (text.compare(i, 2, "//") == 0) {
      while (i < n && text[i] != '\n') ++i;
    } else if (text.compare(i, 2, "/*") == 0) {
      size_t e = text.find("*/", i + 2);
      i = e == std::string::npos ? n : e + 2;
    } else if (c == '"' || c == '\'') {
      size_t j = i + 1;
      while (j < n && text[j] != c) j += text[j] == '\\' ? 2 : 1;
      j = std::min(j + 1, n);
      out.push_back(text.substr(i, j - i));
      i = j;
    } else if (ident(c)) {
      size_t j = i;
      while (j < n && ident(text[j])) ++j;
      out.push_back(text.substr(i, j - i));
      i = j;
    } else {
      size_t len = 1;
      for (const char* op : ops)
        if (text.compare(i, 2, op) == 0) len = 2;
      out.push_back(text.substr(i, len));
      i += len;
    }
  }
  return out;
}

Vector LocalEmbedder::embed(const std::string& text) {
  Vector v(dim_, 0.0);
  auto toks = tokenize_code(text);
  for (size_t k = 0; k < toks.size(); ++k) {
    v[fnv1a(toks[k]) % dim_] += 1.0;
    if (k + 1 < toks.size()) v[fnv1a(toks[k] + " " + toks[k + 1]) % dim_] += 0.5;
  }
  return v;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ConfigError("embed.endpoint is required for the remote embedder");
}

Vector RemoteEmbedder::embed(const std::string& text) {
  nlohmann::json req = {{"text", text}, {"model", options_.model}};
  std::map<std::string, std::string> headers;
  if (!options_.api_key.empty()) headers["Authorization"] = "Bearer " + options_.api_key;
  HttpResponse r = http_post_json(options_.endpoint, req.dump(), headers, options_.timeout_ms);
  if (r.status < 200 || r.status >= 300)
    throw ProviderError("embedding endpoint answered HTTP " + std::to_string(r.status));
  Vector v;
  try {
    auto j = nlohmann::json::parse(r.body);
    v = j.at("vector").get<Vector>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed embedding response: ") + e.what());
  }
  if (options_.dimension == 0) options_.dimension = v.size();
  if (v.size() != options_.dimension)
    throw StoreError(StoreError::Kind::DimensionMismatch, "embedding has dimension " + std::to_string(v.size()) +
                                                              ", expected " + std::to_string(options_.dimension));
  return v;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw StoreError(StoreError::Kind::DimensionMismatch,
                     "vector dimensions differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector normalize(const Vector& v) {
  double n = 0;
  for (double x : v) {
    if (!std::isfinite(x)) throw StoreError(StoreError::Kind::InvalidEntry, "embedding has a non-finite component");
    n += x * x;
  }
  n = std::sqrt(n);
  if (n == 0) throw StoreError(StoreError::Kind::InvalidEntry, "embedding is the zero vector");
  Vector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

}  // namespace ppgpt::knowledge

#include "ppgpt/common/http.hpp"

#include <httplib.h>

#include <regex>

#include "ppgpt/common/error.hpp"

namespace ppgpt {

HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers, int timeout_ms) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw ProviderError("malformed endpoint URL '" + url + "'");
  std::string path = m[2].matched ? m[2].str() : "/";
  httplib::Client cli(m[1].str());
  auto secs = timeout_ms / 1000;
  auto usecs = (timeout_ms % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers hs;
  for (const auto& [k, v] : headers) hs.emplace(k, v);
  auto res = cli.Post(path, hs, body, "application/json");
  if (!res) throw ProviderError("request to " + url + " failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

}  // namespace ppgpt

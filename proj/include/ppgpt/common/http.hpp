#pragma once

#include <map>
#include <string>

namespace ppgpt {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// POST with a JSON body to an http:// or https:// URL. Throws ProviderError on
// transport failure; non-2xx answers are returned to the caller.
HttpResponse http_post_json(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers, int timeout_ms);

}  // namespace ppgpt

#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace clara::http {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string base_path;  // no trailing slash
};

/// Parses "http(s)://host[:port][/path]". Throws InvalidArgument.
Url parse_url(const std::string& url);

struct Response {
  int status = 0;           // HTTP status, or -1 on transport failure
  std::string body;
  std::string error;        // transport error description when status == -1
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// POSTs a JSON body to base_path + path.
Response post_json(const Url& url, const std::string& path, const std::string& body,
                   const Headers& headers, std::chrono::milliseconds timeout);

}  // namespace clara::http

#include "clara/http.hpp"

#include <httplib.h>

#include "clara/error.hpp"

namespace clara::http {

Url parse_url(const std::string& url) {
  Url out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint '" + url + "' lacks a scheme");
  }
  out.scheme = url.substr(0, scheme_end);
  if (out.scheme != "http" && out.scheme != "https") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported scheme '" + out.scheme + "'");
  }
  std::string rest = url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  out.base_path = slash == std::string::npos ? "" : rest.substr(slash);
  while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos && authority.find(']') == std::string::npos) {
    out.host = authority.substr(0, colon);
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad port in endpoint '" + url + "'");
    }
  } else {
    out.host = authority;
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (out.host.empty()) throw Error(ErrorCode::kInvalidArgument, "endpoint '" + url + "' has no host");
  return out;
}

Response post_json(const Url& url, const std::string& path, const std::string& body,
                   const Headers& headers, std::chrono::milliseconds timeout) {
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  const std::string full_path = url.base_path + path;

  auto run = [&](auto& client) {
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    Response out;
    auto res = client.Post(full_path, h, body, "application/json");
    if (!res) {
      out.status = -1;
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  };

  if (url.scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    httplib::SSLClient client(url.host, url.port);
    return run(client);
#else
    Response out;
    out.status = -1;
    out.error = "built without TLS support";
    return out;
#endif
  }
  httplib::Client client(url.host, url.port);
  return run(client);
}

}  // namespace clara::http

#include "agrag/http.hpp"

#ifdef AGRAG_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace agrag::http {

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::Config, "URL must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

Response post_json(const Request& request) {
  const Url url = split_url(request.url);
  httplib::Client client(url.scheme_host_port);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  httplib::Headers headers;
  for (const auto& [name, value] : request.headers) headers.emplace(name, value);

  Response out;
  auto result = client.Post(url.path, headers, request.body, "application/json");
  if (!result) {
    out.transport_error = httplib::to_string(result.error());
    return out;
  }
  out.status = result->status;
  out.body = result->body;
  return out;
}

void check_status(const Response& response, const std::string& what) {
  if (response.status == 0) {
    throw TransientFailure(what + ": transport error: " + response.transport_error);
  }
  if (response.status >= 200 && response.status < 300) return;
  const std::string detail = what + ": HTTP " + std::to_string(response.status);
  if (response.status == 408 || response.status == 429 || response.status >= 500) {
    throw TransientFailure(detail);
  }
  throw Error(ErrorCode::BackendUnavailable, detail + ": " + response.body.substr(0, 200));
}

}  // namespace agrag::http

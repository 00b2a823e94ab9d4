#pragma once

#include <string>
#include <utility>

#include <httplib.h>

#include "stackrag/errors.hpp"
#include "stackrag/http_util.hpp"
#include "stackrag/net_probe.hpp"
#include "stackrag/se_transport.hpp"

namespace stackrag {

// Live HTTPS transport for the StackExchange API. Status codes are passed
// through untouched; interpreting API-level errors (and backoff fields) is
// the client's job.
class LiveSeTransport : public SeTransport {
 public:
  explicit LiveSeTransport(std::string base_url)
      : base_(parse_base_url(base_url)) {}

  SeResponse get(const SeRequest& request) override {
    std::string path = base_.path_prefix + request.path;
    char sep = '?';
    for (const auto& [name, value] : request.params) {
      path.push_back(sep);
      sep = '&';
      path += url_encode(name);
      path.push_back('=');
      path += url_encode(value);
    }
    httplib::Client client(base_.origin);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    note_live_request();
    httplib::Result res = client.Get(path);
    if (!res) {
      throw TransportError("stackexchange request failed: " +
                           httplib::to_string(res.error()));
    }
    return SeResponse{res->status, res->body};
  }

 private:
  ParsedBaseUrl base_;
};

}  // namespace stackrag

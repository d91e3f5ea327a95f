#include <httplib.h>

#include "rankcast/app.hpp"

namespace rankcast {

struct Service::Impl {
  httplib::Server server;
};

Service::Service(const Api& api) : impl_(std::make_unique<Impl>()) {
  auto dispatch = [&api](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    const ApiResponse r = api.handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Get(".*", dispatch);
  impl_->server.Post(".*", dispatch);
  impl_->server.Put(".*", dispatch);
  impl_->server.Delete(".*", dispatch);
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

bool serve(const Api& api, const std::string& host, int port) {
  Service service(api);
  if (service.bind(host, port) < 0) return false;
  service.run();
  return true;
}

}  // namespace rankcast

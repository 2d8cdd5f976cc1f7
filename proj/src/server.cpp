#include "possig/whatif.hpp"

// after Eigen: <resolv.h> defines a _res macro
#include <httplib.h>

namespace possig {

struct HttpServer::Impl {
  Impl(const WhatIfService& s, ServerOptions o) : service(s), options(std::move(o)) {}
  const WhatIfService& service;
  ServerOptions options;
  httplib::Server srv;
};

HttpServer::HttpServer(const WhatIfService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& srv = impl_->srv;
  const auto& opt = impl_->options;
  srv.set_read_timeout(opt.timeout_seconds, 0);
  srv.set_write_timeout(opt.timeout_seconds, 0);
  srv.set_default_headers({{"Access-Control-Allow-Origin", opt.cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});

  auto send = [](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  const WhatIfService* svc = &service;
  srv.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  srv.Post("/v1/predict",
           [svc, send](const httplib::Request& req, httplib::Response& res) { send(res, svc->predict(req.body)); });
  srv.Get("/v1/model/info",
          [svc, send](const httplib::Request&, httplib::Response& res) { send(res, svc->model_info()); });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  const auto& opt = impl_->options;
  if (opt.port == 0) return impl_->srv.bind_to_any_port(opt.host);
  return impl_->srv.bind_to_port(opt.host, opt.port) ? opt.port : -1;
}

bool HttpServer::listen() { return impl_->srv.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->srv.stop();
}

bool run_server(const WhatIfService& service, const ServerOptions& options) {
  HttpServer server(service, options);
  if (server.bind() < 0) return false;
  return server.listen();
}

}  // namespace possig

#include "bootseq/service.hpp"

#include <httplib.h>

#include "bootseq/error.hpp"

namespace bootseq {

struct AnalysisService::Server {
  httplib::Server http;
};

ServiceResponse error_response(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

AnalysisService::AnalysisService(const ReferenceStore& store, Config config)
    : store_(store), config_(config), cache_(store, std::move(config)) {
  config_.validate();
}

ServiceResponse AnalysisService::analyze(const std::string& body) {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "malformed_json", e.what());
  }
  if (!request.is_object()) return error_response(400, "invalid_request", "request body must be an object");
  for (const char* key : {"app_id", "device_id"})
    if (!request.contains(key) || !request[key].is_string())
      return error_response(400, "invalid_request", std::string("field '") + key + "' must be a string");
  if (!request.contains("syscalls") || !request["syscalls"].is_array())
    return error_response(400, "invalid_request", "field 'syscalls' must be an array of names");
  std::vector<std::string> names;
  for (const auto& n : request["syscalls"]) {
    if (!n.is_string() || n.get_ref<const std::string&>().empty())
      return error_response(400, "invalid_request", "every syscall must be a non-empty string");
    names.push_back(n.get<std::string>());
  }
  if (names.empty()) return error_response(400, "invalid_request", "field 'syscalls' is empty");

  const auto app_id = request["app_id"].get<std::string>();
  try {
    BootSequence test = encode_names(names, store_.alphabet()).sequence;
    test.app_id = app_id;
    test.device_id = request["device_id"].get<std::string>();
    const auto model = cache_.get(app_id);
    const Analysis a = bootseq::analyze(*model, std::move(test), config_);
    ServiceResponse r;
    r.body["label"] = to_string(a.verdict.label);
    r.body["p_value"] = a.verdict.p_value;
    r.body["I"] = a.verdict.confidence;
    r.body["n_effective"] = a.verdict.detail.n_effective;
    return r;
  } catch (const NotFound& e) {
    return error_response(404, "unknown_app", e.what());
  } catch (const StageError& e) {
    return error_response(e.stage() == "preprocess" ? 400 : 500, "analysis_failed", e.what());
  } catch (const InvalidInput& e) {
    return error_response(400, "invalid_request", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

ServiceResponse AnalysisService::health() const {
  ServiceResponse r;
  r.body["status"] = "ok";
  const auto apps = store_.apps();
  r.body["apps"] = apps.size();
  nlohmann::ordered_json samples = nlohmann::ordered_json::object();
  for (const auto& a : apps) samples[a] = store_.size(a);
  r.body["samples"] = std::move(samples);
  return r;
}

ServiceResponse AnalysisService::handle(const std::string& method, const std::string& path, const std::string& body) {
  if (path == "/v1/analyze") {
    if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
    return analyze(body);
  }
  if (path == "/v1/health") {
    if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
    return health();
  }
  return error_response(404, "no_such_endpoint", path);
}

namespace {

void install(httplib::Server& http, AnalysisService& service) {
  auto reply = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  http.Post("/v1/analyze", reply);
  http.Get("/v1/health", reply);
  http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto r = error_response(res.status, "no_such_endpoint", req.path);
    res.set_content(r.body.dump(), "application/json");
  });
}

}  // namespace

bool AnalysisService::listen(const std::string& host, int port) {
  server_ = std::make_shared<Server>();
  install(server_->http, *this);
  return server_->http.listen(host, port);
}

int AnalysisService::bind_any(const std::string& host) {
  server_ = std::make_shared<Server>();
  install(server_->http, *this);
  return server_->http.bind_to_any_port(host);
}

bool AnalysisService::run() { return server_ && server_->http.listen_after_bind(); }

void AnalysisService::stop() {
  if (server_) server_->http.stop();
}

}  // namespace bootseq

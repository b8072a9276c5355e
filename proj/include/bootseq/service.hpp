#pragma once

// HTTP front end for analyses. The handler is a plain function of the request
// so it can be exercised without a socket.

#include <string>

#include <nlohmann/json.hpp>

#include "bootseq/config.hpp"
#include "bootseq/ensemble.hpp"
#include "bootseq/harness.hpp"

namespace bootseq {

struct ServiceResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

class AnalysisService {
 public:
  AnalysisService(const ReferenceStore& store, Config config);

  /// POST /v1/analyze with {app_id, device_id, syscalls: [names]}.
  ServiceResponse analyze(const std::string& body);
  /// GET /v1/health: app count and per-app sample counts.
  ServiceResponse health() const;
  ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body);

  /// Blocks until stop() is called from another thread. Returns false if the
  /// socket could not be bound.
  bool listen(const std::string& host, int port);
  /// Binds to an ephemeral port; the port is returned and serving starts on run().
  int bind_any(const std::string& host);
  bool run();
  void stop();

 private:
  const ReferenceStore& store_;
  Config config_;
  ModelCache cache_;
  struct Server;
  std::shared_ptr<Server> server_;
};

ServiceResponse error_response(int status, const std::string& code, const std::string& message);

}  // namespace bootseq

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bailout/service.hpp"

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HTTP service for what-if clearing and bailout optimisation", "bailout-service"};
  std::string host = env_or("BAILOUT_HOST", "127.0.0.1");
  int port = std::stoi(env_or("BAILOUT_PORT", "8080"));
  long timeout = std::stol(env_or("BAILOUT_SESSION_TIMEOUT", "1800"));
  app.add_option("--host", host, "bind address (env BAILOUT_HOST)");
  app.add_option("--port", port, "port (env BAILOUT_PORT)")->check(CLI::Range(0, 65535));
  app.add_option("--session-timeout", timeout, "idle seconds before a session expires (env BAILOUT_SESSION_TIMEOUT)")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  bailout::service::ServiceConfig config;
  config.session_timeout = std::chrono::seconds(timeout);
  bailout::service::Service service(config);
  httplib::Server server;
  service.install(server);
  std::cerr << "listening on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot bind " << host << ':' << port << '\n';
    return 2;
  }
  return 0;
}

#ifndef BAILOUT_SERVICE_HPP
#define BAILOUT_SERVICE_HPP

// HTTP+JSON facade for what-if clearing and optimisation.
//
//   POST /networks                  network document -> 201 {id, summary}
//   GET  /networks/{id}             {n, total_liabilities, baseline_defaults, ...}
//   POST /networks/{id}/whatif      injection document -> clearing outcome
//   POST /networks/{id}/optimize    {mode, budget | lambda, ...} -> result, or 202 {job_id}
//   GET  /jobs/{id}                 {status, result | error}
//
// Errors are {code, message}.

#include <chrono>
#include <cstdint>
#include <future>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include "bailout/bailout.hpp"
#include "bailout/io.hpp"
#include "httplib.h"

namespace bailout::service {

struct ServiceConfig {
  std::chrono::seconds session_timeout{1800};
  std::size_t async_node_threshold = 256;   // optimise asynchronously above this many nodes
  std::size_t async_start_threshold = 6;    // ... or above this many random starts
};

inline std::string random_token() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(16) << rng();
  return os.str();
}

/// In-memory sessions keyed by opaque token; idle sessions expire.
class SessionStore {
public:
  using Clock = std::chrono::steady_clock;

  explicit SessionStore(std::chrono::seconds timeout) : timeout_(timeout) {}

  std::string create(LiabilityNetwork net) {
    auto shared = std::make_shared<const LiabilityNetwork>(std::move(net));
    std::lock_guard lock(mu_);
    purge_locked(Clock::now());
    auto id = random_token();
    sessions_[id] = Entry{std::move(shared), Clock::now()};
    return id;
  }

  /// Null when the id is unknown or has expired. Touches the session.
  std::shared_ptr<const LiabilityNetwork> find(const std::string& id) {
    std::lock_guard lock(mu_);
    const auto now = Clock::now();
    purge_locked(now);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return nullptr;
    it->second.last_used = now;
    return it->second.network;
  }

  std::size_t size() {
    std::lock_guard lock(mu_);
    purge_locked(Clock::now());
    return sessions_.size();
  }

private:
  struct Entry {
    std::shared_ptr<const LiabilityNetwork> network;
    Clock::time_point last_used;
  };

  void purge_locked(Clock::time_point now) {
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now - it->second.last_used > timeout_) {
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::chrono::seconds timeout_;
  std::mutex mu_;
  std::map<std::string, Entry> sessions_;
};

/// Outcome of an optimisation request: HTTP status plus JSON body.
struct Reply {
  int status = 200;
  json body;
};

inline Reply error_reply(int status, const std::string& code, const std::string& message) {
  return Reply{status, json{{"code", code}, {"message", message}}};
}

class JobTable {
public:
  std::string submit(std::function<Reply()> work) {
    auto id = random_token();
    auto fut = std::async(std::launch::async, std::move(work)).share();
    std::lock_guard lock(mu_);
    jobs_.emplace(id, std::move(fut));
    return id;
  }

  std::optional<Reply> poll(const std::string& id) {
    std::shared_future<Reply> fut;
    {
      std::lock_guard lock(mu_);
      const auto it = jobs_.find(id);
      if (it == jobs_.end()) return std::nullopt;
      fut = it->second;
    }
    json body{{"job_id", id}};
    if (fut.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
      body["status"] = "running";
      return Reply{200, body};
    }
    const Reply& done = fut.get();
    if (done.status == 200) {
      body["status"] = "done";
      body["result"] = done.body;
    } else {
      body["status"] = "failed";
      body["error"] = done.body;
    }
    return Reply{200, body};
  }

private:
  std::mutex mu_;
  std::map<std::string, std::shared_future<Reply>> jobs_;
};

struct OptimizeRequest {
  std::string mode;
  double budget = 0.0;
  double lambda = 0.0;
  ReweightParams params;
};

inline OptimizeRequest parse_optimize_request(const json& body) {
  if (!body.is_object()) throw ValidationError("optimize body must be a JSON object");
  OptimizeRequest req;
  if (!body.contains("mode") || !body.at("mode").is_string()) {
    throw ValidationError("\"mode\" must be one of liabilities, lagrangian, defaults");
  }
  req.mode = body.at("mode").get<std::string>();
  auto number = [&](const char* key, double fallback, bool required) {
    if (!body.contains(key)) {
      if (required) throw ValidationError(std::string("missing \"") + key + "\"");
      return fallback;
    }
    if (!body.at(key).is_number()) throw ValidationError(std::string("\"") + key + "\" must be a number");
    return body.at(key).get<double>();
  };
  auto count = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
    if (!body.contains(key)) return fallback;
    const auto& v = body.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ValidationError(std::string("\"") + key + "\" must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  };
  if (req.mode == "liabilities" || req.mode == "defaults") {
    req.budget = number("budget", 0.0, true);
    if (!std::isfinite(req.budget) || req.budget < 0.0) throw ValidationError("budget must be non-negative");
  } else if (req.mode == "lagrangian") {
    req.lambda = number("lambda", 0.0, true);
    if (!std::isfinite(req.lambda) || req.lambda < 0.0) throw ValidationError("lambda must be non-negative");
  } else {
    throw ValidationError("\"mode\" must be one of liabilities, lagrangian, defaults");
  }
  req.params.k_const = number("k", req.params.k_const, false);
  req.params.epsilon = number("epsilon", req.params.epsilon, false);
  req.params.delta = number("delta", req.params.delta, false);
  req.params.num_random_starts = count("starts", req.params.num_random_starts);
  req.params.rng_seed = count("seed", req.params.rng_seed);
  req.params.max_iterations = count("max_iterations", req.params.max_iterations);
  validate(req.params);
  return req;
}

/// Runs one optimisation and serialises it exactly as the CLI does.
inline Reply run_optimize(const LiabilityNetwork& net, const OptimizeRequest& req) {
  try {
    if (req.mode == "liabilities") {
      return Reply{200, result_to_json(net, solve_problem1(net, req.budget), "liabilities")};
    }
    if (req.mode == "lagrangian") {
      auto doc = result_to_json(net, solve_lagrangian(net, req.lambda), "lagrangian");
      doc["lambda"] = req.lambda;
      return Reply{200, doc};
    }
    return Reply{200, result_to_json(net, solve_problem2(net, req.budget, req.params, [](const std::string&) {}),
                                     "defaults")};
  } catch (const ValidationError& e) {
    return error_reply(400, "invalid_request", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "solver_failure", e.what());
  }
}

class Service {
public:
  explicit Service(ServiceConfig config = {}) : config_(config), sessions_(config.session_timeout) {}

  void install(httplib::Server& server) {
    server.Post("/networks", [this](const httplib::Request& req, httplib::Response& res) {
      respond(res, handle_post_network(req.body));
    });
    server.Get(R"(/networks/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      respond(res, handle_get_network(req.matches[1]));
    });
    server.Post(R"(/networks/([^/]+)/whatif)", [this](const httplib::Request& req, httplib::Response& res) {
      respond(res, handle_whatif(req.matches[1], req.body));
    });
    server.Post(R"(/networks/([^/]+)/optimize)", [this](const httplib::Request& req, httplib::Response& res) {
      respond(res, handle_optimize(req.matches[1], req.body));
    });
    server.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto reply = jobs_.poll(req.matches[1]);
      respond(res, reply ? *reply : error_reply(404, "not_found", "unknown job id"));
    });
  }

  Reply handle_post_network(const std::string& body) {
    try {
      auto net = network_from_json(json::parse(body));
      auto summary = network_summary(net);
      summary["id"] = sessions_.create(std::move(net));
      return Reply{201, summary};
    } catch (const json::exception& e) {
      return error_reply(400, "invalid_request", std::string("malformed JSON: ") + e.what());
    } catch (const ValidationError& e) {
      return error_reply(400, "invalid_request", e.what());
    } catch (const std::exception& e) {
      return error_reply(500, "solver_failure", e.what());
    }
  }

  Reply handle_get_network(const std::string& id) {
    const auto net = sessions_.find(id);
    if (!net) return error_reply(404, "not_found", "unknown or expired session");
    try {
      auto summary = network_summary(*net);
      summary["id"] = id;
      return Reply{200, summary};
    } catch (const std::exception& e) {
      return error_reply(500, "solver_failure", e.what());
    }
  }

  Reply handle_whatif(const std::string& id, const std::string& body) {
    const auto net = sessions_.find(id);
    if (!net) return error_reply(404, "not_found", "unknown or expired session");
    try {
      const auto alloc = allocation_from_json(json::parse(body), *net);
      return Reply{200, outcome_to_json(*net, clearing_vector(*net, alloc))};
    } catch (const json::exception& e) {
      return error_reply(400, "invalid_request", std::string("malformed JSON: ") + e.what());
    } catch (const ValidationError& e) {
      return error_reply(400, "invalid_request", e.what());
    } catch (const std::exception& e) {
      return error_reply(500, "solver_failure", e.what());
    }
  }

  Reply handle_optimize(const std::string& id, const std::string& body) {
    const auto net = sessions_.find(id);
    if (!net) return error_reply(404, "not_found", "unknown or expired session");
    OptimizeRequest req;
    try {
      req = parse_optimize_request(json::parse(body));
    } catch (const json::exception& e) {
      return error_reply(400, "invalid_request", std::string("malformed JSON: ") + e.what());
    } catch (const ValidationError& e) {
      return error_reply(400, "invalid_request", e.what());
    }
    const bool heavy = net->size() > config_.async_node_threshold ||
                       (req.mode == "defaults" && req.params.num_random_starts > config_.async_start_threshold);
    if (!heavy) return run_optimize(*net, req);
    auto job = jobs_.submit([net, req] { return run_optimize(*net, req); });
    return Reply{202, json{{"job_id", job}, {"status", "running"}}};
  }

  SessionStore& sessions() { return sessions_; }

private:
  static void respond(httplib::Response& res, const Reply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  }

  ServiceConfig config_;
  SessionStore sessions_;
  JobTable jobs_;
};

}  // namespace bailout::service

#endif  // BAILOUT_SERVICE_HPP

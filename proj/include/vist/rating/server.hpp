#pragma once

#include <filesystem>
#include <string>

#include <httplib.h>

#include "vist/rating/service.hpp"

namespace vist::rating {

// HTTP front end:
//   GET  /task?rater=ID  next task for the rater (blind payload)
//   POST /rating         RatingRecord body; 200 accepted or duplicate, 400 invalid, 409 conflict
//   GET  /report         per-source means and totals
//   GET  /health
// Anything else under / is served from the static directory, if one is given.
class RatingServer {
 public:
  explicit RatingServer(RatingService& service, const std::filesystem::path& static_dir = {}) : service_(service) {
    server_.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}, {"tasks", service_.pool_size()}});
    });
    server_.Get("/task", [this](const httplib::Request& req, httplib::Response& res) { get_task(req, res); });
    server_.Post("/rating", [this](const httplib::Request& req, httplib::Response& res) { post_rating(req, res); });
    server_.Get("/report", [this](const httplib::Request&, httplib::Response& res) {
      const auto report = service_.report();
      Json j = to_json(report);
      j["table"] = render_table(report);
      reply(res, 200, j);
    });
    if (!static_dir.empty()) {
      if (!server_.set_mount_point("/", static_dir.string())) {
        throw InvalidArgument("static directory '" + static_dir.string() + "' does not exist");
      }
    }
    server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      reply(res, 500, {{"error", what}});
    });
  }

  // Binds an ephemeral port on host and returns it, or -1.
  int bind_any_port(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void wait_until_ready() { server_.wait_until_ready(); }
  void stop() { server_.stop(); }

 private:
  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void get_task(const httplib::Request& req, httplib::Response& res) {
    const std::string rater = req.has_param("rater") ? req.get_param_value("rater") : "";
    if (rater.empty()) return reply(res, 400, {{"error", "query parameter 'rater' is required"}});
    const auto next = service_.next_task(rater);
    switch (next.status) {
      case NextStatus::kTask: {
        Json j = rater_payload(next.task);
        j["status"] = "task";
        return reply(res, 200, j);
      }
      case NextStatus::kExhausted:
        return reply(res, 200, {{"status", "exhausted"}, {"message", "no tasks left for this rater"}});
      case NextStatus::kEmptyPool:
        return reply(res, 503, {{"status", "empty"}, {"error", "the task pool is empty"}});
    }
  }

  void post_rating(const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return reply(res, 400, {{"error", "body is not valid JSON"}});
    }
    const auto result = service_.submit_json(body);
    // An identical resubmission gets the very same ack.
    if (result.ok()) return reply(res, 200, {{"status", "accepted"}, {"task_id", body.value("task_id", "")}});
    reply(res, result.http_status(), {{"error", result.message}});
  }

  RatingService& service_;
  httplib::Server server_;
};

}  // namespace vist::rating

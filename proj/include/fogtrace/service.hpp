// Copyright 2026 The Fogtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP front end for the fog store.
//
//   POST /users     {user_id?, contact_number?, location?, age?} -> {user_id}
//   POST /meetups   {user_a, user_b, contact_time_s, signal_dbm} -> {ok, alert}
//   POST /symptoms  {user_id, flag}                              -> {ok}
//   POST /cycles                                                 -> cycle summary
//   GET  /reports/:id                                            -> report
//   GET  /stats/daily                      -> {new_infections[], cumulative[]}
//   POST /sync                                                   -> {uploaded}
//   GET  /healthz                                                -> {ok}
//
// Errors use conventional status classes with a JSON {error, detail} body:
// 400 bad_request, 404 not_found, 409 conflict, 502 sink_failure,
// 500 internal.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include "fogtrace/config.hpp"
#include "fogtrace/errors.hpp"
#include "fogtrace/http_sink.hpp"
#include "fogtrace/sinks.hpp"
#include "fogtrace/store.hpp"
#include "httplib.h"
#include "json.hpp"

namespace fogtrace {

inline std::unique_ptr<ReportSink> make_sink(const SinkConfig& config) {
  if (config.kind == "http") return std::make_unique<HttpReportSink>(config.url);
  return std::make_unique<FileReportSink>(config.path);
}

class HttpService {
 public:
  HttpService(FogStore& store, ServiceConfig config)
      : store_(store), config_(std::move(config)), sink_(make_sink(config_.sink)) {
    // SO_REUSEADDR for quick restarts, but no SO_REUSEPORT: a second service
    // on the same port must fail to bind, not silently share the socket.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                 reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    install_routes();
  }

  ~HttpService() { stop(); }

  // Binds an OS-assigned port (tests); returns the port.
  int bind_any_port(const std::string& host = "127.0.0.1") {
    const int port = server_.bind_to_any_port(host);
    if (port <= 0) throw std::runtime_error("cannot bind a port on " + host);
    bound_ = true;
    return port;
  }

  void bind_configured_port(const std::string& host = "0.0.0.0") {
    if (!server_.bind_to_port(host, config_.port))
      throw std::runtime_error("cannot bind port " + std::to_string(config_.port) +
                               " (already in use?)");
    bound_ = true;
  }

  // Blocks serving requests until stop(). Starts the periodic cycle timer
  // when cycle_interval_s > 0.
  void run() {
    if (!bound_) bind_configured_port();
    start_timer();
    server_.listen_after_bind();
  }

  void wait_until_ready() { server_.wait_until_ready(); }

  void stop() {
    stop_timer();
    if (server_.is_running()) server_.stop();
  }

  const ServiceConfig& config() const noexcept { return config_; }
  ReportSink& sink() noexcept { return *sink_; }

 private:
  static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void reply_error(httplib::Response& res, int status, const std::string& code,
                          const std::string& detail) {
    reply(res, status, {{"error", code}, {"detail", detail}});
  }

  template <typename Fn>
  static void handle(httplib::Response& res, Fn&& fn) {
    try {
      std::forward<Fn>(fn)();
    } catch (const NotFoundError& e) {
      reply_error(res, 404, "not_found", e.what());
    } catch (const ConflictError& e) {
      reply_error(res, 409, "conflict", e.what());
    } catch (const SinkError& e) {
      reply_error(res, 502, "sink_failure", e.what());
    } catch (const nlohmann::json::exception& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const std::domain_error& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const DataError& e) {
      reply_error(res, 400, "bad_request", e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, "internal", e.what());
    }
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    return nlohmann::json::parse(req.body);  // json::exception -> 400
  }

  void install_routes() {
    server_.Post("/users", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const nlohmann::json j = parse_body(req);
        UserProfile profile;
        profile.user_id = j.value("user_id", "");
        profile.contact_number = j.value("contact_number", "");
        profile.location = j.value("location", "");
        profile.age = j.value("age", 0u);
        reply(res, 200, {{"user_id", store_.register_user(std::move(profile))}});
      });
    });

    server_.Post("/meetups", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const nlohmann::json j = parse_body(req);
        const MeetupIngest meetup{
            j.at("user_a").get<std::string>(),
            j.at("user_b").get<std::string>(),
            j.at("contact_time_s").get<double>(),
            j.at("signal_dbm").get<double>(),
        };
        const MeetupAck ack = store_.ingest_meetup(meetup);
        reply(res, 200, {{"ok", ack.ok}, {"alert", ack.alert}});
      });
    });

    server_.Post("/symptoms", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const nlohmann::json j = parse_body(req);
        store_.ingest_symptom(j.at("user_id").get<std::string>(), j.at("flag").get<int>());
        reply(res, 200, {{"ok", true}});
      });
    });

    server_.Post("/cycles", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&] {
        const CycleSummary summary = store_.compute_cycle();
        reply(res, 200,
              {{"cycle", summary.cycle},
               {"users_updated", summary.users_updated},
               {"newly_infected", summary.newly_infected},
               {"meetups_processed", summary.meetups_processed},
               {"symptoms_processed", summary.symptoms_processed}});
      });
    });

    server_.Get("/reports/:id", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        reply(res, 200, report_to_json(store_.report_for(req.path_params.at("id"))));
      });
    });

    server_.Get("/stats/daily", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&] {
        const DailySeries series = store_.infection_series();
        reply(res, 200,
              {{"new_infections", series.new_infections()},
               {"cumulative", series.cumulative()}});
      });
    });

    server_.Post("/sync", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&] { reply(res, 200, {{"uploaded", store_.sync(*sink_)}}); });
    });

    server_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"ok", true}});
    });
  }

  void start_timer() {
    if (config_.cycle_interval_s <= 0) return;
    timer_running_ = true;
    timer_ = std::thread([this] {
      std::unique_lock lock(timer_mu_);
      while (timer_running_) {
        timer_cv_.wait_for(lock, std::chrono::seconds(config_.cycle_interval_s),
                           [this] { return !timer_running_; });
        if (!timer_running_) break;
        store_.compute_cycle();
      }
    });
  }

  void stop_timer() {
    {
      std::lock_guard lock(timer_mu_);
      timer_running_ = false;
    }
    timer_cv_.notify_all();
    if (timer_.joinable()) timer_.join();
  }

  FogStore& store_;
  ServiceConfig config_;
  std::unique_ptr<ReportSink> sink_;
  httplib::Server server_;
  bool bound_ = false;
  std::thread timer_;
  std::mutex timer_mu_;
  std::condition_variable timer_cv_;
  bool timer_running_ = false;
};

}  // namespace fogtrace

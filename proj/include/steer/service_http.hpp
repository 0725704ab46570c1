// Copyright 2026 The Steer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STEER_SERVICE_HTTP_HPP_
#define STEER_SERVICE_HTTP_HPP_

#include <string>

// Before httplib: <resolv.h> defines a `_res` macro that breaks Eigen.
#include "steer/errors.hpp"
#include "steer/service.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace steer::service {

inline int http_status_for(const std::exception& e) {
  if (dynamic_cast<const NotFound*>(&e)) return 404;
  if (dynamic_cast<const FeatureUnsupportedError*>(&e)) return 409;
  if (dynamic_cast<const ValueError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e)) {
    return 400;
  }
  return 500;
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}, {"code", status}});
}

// Runs `fn`, mapping library errors to JSON error bodies.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    send_error(res, http_status_for(e), e.what());
  }
}

inline int polarity_of(const nlohmann::json& body) {
  const auto& p = body.at("polarity");
  if (!p.is_number_integer()) throw ValueError("polarity must be -1 or +1");
  return p.get<int>();
}

inline void register_routes(httplib::Server& server, FeedService& svc) {
  server.Post("/api/feeds", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      const auto seeds = body.at("seed_doc_ids").get<std::vector<std::string>>();
      const auto id = svc.create_feed(seeds);
      send_json(res, 201, {{"feed_id", id}});
    });
  });
  server.Get(R"(/api/feeds/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      int page = 1;
      if (req.has_param("page")) {
        const auto s = req.get_param_value("page");
        std::size_t used = 0;
        try {
          page = std::stoi(s, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != s.size()) throw ValueError("page must be an integer");
      }
      send_json(res, 200, svc.get_feed(req.matches[1], page));
    });
  });
  server.Post(R"(/api/feeds/([^/]+)/ratings/paper)",
              [&svc](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto body = nlohmann::json::parse(req.body);
                  const auto v = svc.rate_paper(req.matches[1],
                                                body.at("doc_id").get<std::string>(),
                                                polarity_of(body));
                  send_json(res, 200, {{"version", v}});
                });
              });
  server.Post(R"(/api/feeds/([^/]+)/ratings/term)",
              [&svc](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                  const auto body = nlohmann::json::parse(req.body);
                  const auto r = svc.rate_term(req.matches[1], body.at("term").get<std::string>(),
                                               polarity_of(body));
                  send_json(res, 200,
                            {{"retained_count", r.retained_count},
                             {"discarded_count", r.discarded_count},
                             {"version", r.version}});
                });
              });
  server.Get(R"(/api/feeds/([^/]+)/history)",
             [&svc](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, svc.history(req.matches[1])); });
             });
  server.Get(R"(/api/corpus/docs/([^/]+))",
             [&svc](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] { send_json(res, 200, svc.document(req.matches[1])); });
             });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, httplib::status_message(res.status));
  });
}

}  // namespace steer::service

#endif  // STEER_SERVICE_HTTP_HPP_

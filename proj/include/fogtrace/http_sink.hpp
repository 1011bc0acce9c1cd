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

#pragma once

#include <string>

#include "fogtrace/errors.hpp"
#include "fogtrace/sinks.hpp"
#include "httplib.h"

namespace fogtrace {

// Posts each report as a JSON document to a remote endpoint. Any transport
// failure or non-2xx response is a SinkError, so the sync cursor stays put.
class HttpReportSink final : public ReportSink {
 public:
  // url: e.g. "http://cloud.example:9000/reports"
  explicit HttpReportSink(const std::string& url) {
    const auto path_start = url.find('/', url.find("://") == std::string::npos
                                               ? 0
                                               : url.find("://") + 3);
    if (path_start == std::string::npos) {
      base_ = url;
      path_ = "/";
    } else {
      base_ = url.substr(0, path_start);
      path_ = url.substr(path_start);
    }
  }

  void deliver(const Report& report) override {
    httplib::Client client(base_);
    client.set_connection_timeout(5);
    const auto res = client.Post(path_, report_to_json(report).dump(), "application/json");
    if (!res) throw SinkError("cloud sink unreachable: " + base_);
    if (res->status < 200 || res->status >= 300)
      throw SinkError("cloud sink rejected report: HTTP " + std::to_string(res->status));
  }

 private:
  std::string base_;
  std::string path_;
};

}  // namespace fogtrace

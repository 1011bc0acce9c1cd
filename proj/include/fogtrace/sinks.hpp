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

#include <fstream>
#include <string>

#include "fogtrace/errors.hpp"
#include "fogtrace/risk.hpp"

namespace fogtrace {

// Destination for synced reports. Delivery is at-least-once: a sink that
// throws SinkError will see the same report again on the next sync.
class ReportSink {
 public:
  virtual ~ReportSink() = default;
  virtual void deliver(const Report& report) = 0;
};

// Appends newline-delimited JSON records to a local file.
class FileReportSink final : public ReportSink {
 public:
  explicit FileReportSink(std::string path) : path_(std::move(path)) {}

  void deliver(const Report& report) override {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw SinkError("cannot open sink file: " + path_);
    out << report_to_json(report).dump() << '\n';
    out.flush();
    if (!out) throw SinkError("failed appending to sink file: " + path_);
  }

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace fogtrace

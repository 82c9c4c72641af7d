// Copyright 2026 The QSP Authors
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

// qsp_cli run --config exp.cfg [--seed N] [--override-t N] [--workers N] [--out FILE]
// qsp_cli list [FILTER]
// qsp_cli replay --trace report.json

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsp/runner.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qsp::RunError("invalid_config", "config", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int emit(const qsp::Json& doc, const std::string& out) {
  std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "qsp_cli: cannot write " << out << "\n";
      return 2;
    }
    f << text;
  }
  return qsp::exit_status(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch runner for commitment, argument and extraction experiments"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::optional<int> override_t;
  int workers = 1;
  std::string out;
  auto* run = app.add_subcommand("run", "run experiment configs and write a report");
  run->add_option("--config", configs, "flat key = value config file")->required();
  run->add_option("--seed", seed, "master seed, overrides the config");
  run->add_option("--override-t", override_t, "estimator step count, overrides the config");
  run->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, qsp::kMaxWorkers));
  run->add_option("--out", out, "report path, stdout if absent");

  std::string filter;
  auto* list = app.add_subcommand("list", "print the fixture catalog");
  list->add_option("filter", filter, "id or category substring");
  list->add_option("--out", out, "catalog path, stdout if absent");

  std::string trace;
  auto* rep = app.add_subcommand("replay", "re-run a report and compare byte for byte");
  rep->add_option("--trace", trace, "report written by run")->required();
  rep->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, qsp::kMaxWorkers));
  rep->add_option("--out", out, "replay verdict path, stdout if absent");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    auto cat = qsp::catalog_to_json(qsp::list_fixtures(filter));
    return emit(cat, out) == 2 ? 2 : 0;
  }

  if (*rep) {
    try {
      return emit(qsp::replay(qsp::Json::parse(slurp(trace)), workers), out);
    } catch (const qsp::RunError& e) {
      return emit(qsp::error_report(e), out);
    } catch (const qsp::Json::exception& e) {
      return emit(qsp::error_report(qsp::RunError("invalid_config", "trace", e.what())), out);
    }
  }

  std::vector<qsp::Json> reports;
  std::string dest = out;
  for (const auto& path : configs) {
    try {
      auto cfg = qsp::parse_config(slurp(path));
      if (seed) cfg.seed = *seed;
      if (override_t) cfg.override_t = *override_t;
      if (dest.empty() && configs.size() == 1) dest = cfg.out;
      reports.push_back(qsp::run_checked(cfg, workers));
    } catch (const qsp::RunError& e) {
      reports.push_back(qsp::error_report(e));
    }
  }
  if (reports.size() == 1) return emit(reports.front(), dest);
  qsp::Json batch;
  batch["schema_version"] = qsp::kReportSchema;
  batch["reports"] = reports;
  int status = 0;
  for (const auto& r : reports) status = std::max(status, qsp::exit_status(r));
  batch["pass"] = status == 0;
  int written = emit(batch, dest);
  return written == 2 ? 2 : status;
}

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

#ifndef QSP_RUNNER_HPP_
#define QSP_RUNNER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsp/extract.hpp"
#include "qsp/protocols.hpp"
#include "qsp/serialize.hpp"

namespace qsp {

constexpr int kReportSchema = 1;
constexpr int kMaxRuns = 10000;
constexpr int kMaxSamples = 1000;
constexpr int kMaxRounds = 64;
constexpr int kMaxWorkers = 64;

/// Structured failure: code is one of invalid_config, unknown_fixture,
/// cap_violation, runtime.
struct RunError : QspError {
  RunError(std::string code, std::string field, const std::string& msg)
      : QspError(msg), code(std::move(code)), field(std::move(field)) {}
  std::string code;
  std::string field;
};

struct ExperimentConfig {
  std::string kind;  // bind, hide, duality, completeness, squarg, zk, extract
  std::string scheme;
  std::string pcp;
  std::string prover = "honest";
  double gamma = 0.2;
  double q = 0.5;
  int T = 4;
  std::optional<int> override_t;
  std::optional<int> hybrid;  // extract only; nodes [j]
  std::optional<double> bound;
  std::uint64_t seed = 1;
  int runs = 1;
  int samples = 20;
  std::string out;

  void validate() const;
};

/// Flat "key = value" lines; '#' starts a comment.
ExperimentConfig parse_config(const std::string& text);
Json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);

struct Certified {
  std::string quantity;
  double value = 0;
  std::string provenance;  // analytic, exact-sdp, brute-force, exact-simulation, register-count
};

struct FixtureEntry {
  std::string id;
  std::string category;  // scheme, tree, pcp, prover
  std::string description;
  std::vector<Certified> certified;
};

/// Entries whose id or category contains `filter`; empty means all.
std::vector<FixtureEntry> list_fixtures(const std::string& filter = "");
Json catalog_to_json(const std::vector<FixtureEntry>& entries);
const FixtureEntry& fixture(const std::string& id);

CommitScheme scheme_fixture(const std::string& id);
TreeLayout tree_fixture(const std::string& id);
PcpSpec pcp_fixture(const std::string& id);
ZkPcpSpec zk_fixture(const std::string& id);
Vec prover_proof(const std::string& id, const PcpSpec& p);
TreeProver prover_fixture(const std::string& id, const PcpSpec& p, const CommitScheme& sch);

/// Calls job(i) for i in [0, n) on `workers` threads; results keep index order.
std::vector<Json> run_jobs(int n, int workers, const std::function<Json(int)>& job);

/// Report with schema_version, config, values, tolerances, bounds and pass.
Json run(const ExperimentConfig& config, int workers = 1);
/// Same, but failures come back as an error report instead of an exception.
Json run_checked(const ExperimentConfig& config, int workers = 1);
Json error_report(const RunError& e);

/// Re-runs the config stored in a report and compares the output byte for byte.
Json replay(const Json& report, int workers = 1);

/// 0 pass, 1 fail, 2 error.
int exit_status(const Json& report);

}  // namespace qsp

#endif  // QSP_RUNNER_HPP_

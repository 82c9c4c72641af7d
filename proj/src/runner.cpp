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

#include "qsp/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qsp/games.hpp"
#include "qsp/schemes.hpp"

namespace qsp {
namespace {

const char* const kSatCnf = "1 2 0\n-1 3 0\n-2 -3 4 0\n4 0\n";
const char* const kUnsatCnf = "1 0\n-1 0\n";
constexpr std::uint64_t kSatWitness = 0b1101;
constexpr double kExactTol = 1e-9;
constexpr double kSdpTol = 1e-6;
constexpr double kLeafSlack = 0.05;

const std::set<std::string> kKinds = {"bind", "hide", "duality", "completeness",
                                      "squarg", "zk", "extract"};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw RunError("invalid_config", key, "config: '" + key + "' is not a number: " + v);
  return out;
}

const std::vector<FixtureEntry>& catalog() {
  static const std::vector<FixtureEntry> c = {
      {"reveal", "scheme", "message sent in the clear, no commitment register",
       {{"swap_bind", 0.5, "analytic"}, {"hide", 0.0, "analytic"}}},
      {"pauli-pad", "scheme", "one-qubit Pauli one-time pad, key committed",
       {{"swap_bind", 0.0, "analytic"}, {"hide", 0.5, "exact-sdp"}}},
      {"pauli-pad-dual", "scheme", "pauli-pad with commitment and decommitment exchanged",
       {{"swap_bind", 0.5, "exact-sdp"}, {"hide", 0.0, "analytic"}}},
      {"toy-prg", "scheme", "two-qubit pad from a 2-bit table PRG",
       {{"swap_bind", 0.5, "exact-sdp"}, {"hide", 0.5, "exact-sdp"}}},
      {"folklore", "scheme", "commit to a classical pad and send the padded state",
       {{"swap_bind", 0.0, "exact-sdp"}, {"hide", 0.5, "exact-sdp"}}},
      {"md-extended", "scheme", "halving extended to two blocks by chaining",
       {{"swap_bind", 0.5, "exact-sdp"}, {"hide", 0.25, "exact-sdp"}}},
      {"halving", "scheme", "two-qubit pad from a 1-bit table PRG, one-qubit root",
       {{"swap_bind", 0.5, "exact-sdp"}, {"hide", 0.25, "exact-sdp"}}},
      {"tree-b1", "tree", "halving tree of depth 1 over 4 proof qubits",
       {{"width", 7, "register-count"}, {"opening_accept", 1.0, "analytic"}}},
      {"tree-b2", "tree", "halving tree of depth 2 over 8 proof qubits",
       {{"width", 15, "register-count"}, {"opening_accept", 1.0, "analytic"}}},
      {"cnf-sat", "pcp", "clause-check PCP for a satisfiable 4-variable CNF, witness 1101",
       {{"c", 1.0, "brute-force"}, {"s", 1.0, "brute-force"}}},
      {"cnf-unsat", "pcp", "clause-check PCP for x and not x",
       {{"c", 0.5, "brute-force"}, {"s", 0.5, "brute-force"}}},
      {"zk-triangle", "pcp", "zero-knowledge 3-coloring PCP on a triangle",
       {{"c", 1.0, "brute-force"}, {"s", 1.0, "brute-force"}, {"zk_bound", 0.0, "analytic"}}},
      {"honest", "prover", "commits to the PCP's honest proof",
       {{"squarg_accept[cnf-sat]", 1.0, "exact-simulation"},
        {"squarg_accept[cnf-unsat]", 0.5, "exact-simulation"}}},
      {"mixed", "prover", "equal superposition of the honest proof and all-zeros",
       {{"squarg_accept[cnf-sat]", 0.75, "exact-simulation"}}},
      {"zero", "prover", "commits to the all-zeros proof",
       {{"squarg_accept[cnf-sat]", 0.5, "exact-simulation"}}},
  };
  return c;
}

void require_fixture(const std::string& field, const std::string& id,
                     const std::set<std::string>& categories) {
  for (const auto& e : catalog())
    if (e.id == id && categories.count(e.category)) return;
  throw RunError("unknown_fixture", field, "unknown " + field + " fixture: " + id);
}

std::optional<double> certified_value(const std::string& id, const std::string& quantity) {
  for (const auto& e : catalog())
    if (e.id == id)
      for (const auto& c : e.certified)
        if (c.quantity == quantity) return c.value;
  return std::nullopt;
}

std::vector<std::string> ids_in(const std::set<std::string>& categories) {
  std::vector<std::string> out;
  for (const auto& e : catalog())
    if (categories.count(e.category)) out.push_back(e.id);
  return out;
}

std::vector<std::string> selected(const std::string& scheme, const std::set<std::string>& cats) {
  if (scheme.empty() || scheme == "all") return ids_in(cats);
  return {scheme};
}

Vec top_eigenvector(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  Vec v = es.eigenvectors().col(rho.rows() - 1);
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  return v * (std::abs(v(k)) / v(k));
}

Json new_report(const ExperimentConfig& c) {
  Json r;
  r["schema_version"] = kReportSchema;
  r["kind"] = c.kind;
  r["config"] = config_to_json(c);
  return r;
}

Json run_game(const ExperimentConfig& c) {
  auto sch = scheme_fixture(c.scheme);
  bool bind = c.kind == "bind";
  GameResult g = bind ? swap_bind_exact(sch) : hide_exact(sch);
  auto cert = certified_value(c.scheme, bind ? "swap_bind" : "hide");
  double bound = c.bound ? *c.bound : cert.value_or(0.5);
  Json r = new_report(c);
  r["values"]["advantage"] = g.advantage;
  if (cert) r["values"]["certified"] = *cert;
  r["tolerances"]["advantage"] = kSdpTol;
  r["bounds"]["max_advantage"] = bound;
  r["game"] = result_to_json(g);
  r["pass"] = g.advantage <= bound + kSdpTol;
  return r;
}

Json run_duality(const ExperimentConfig& c) {
  Rng rng(c.seed);
  Json r = new_report(c);
  double worst = 0;
  for (const auto& id : selected(c.scheme, {"scheme"})) {
    auto sch = scheme_fixture(id);
    auto d = dual(sch);
    RegisterLayout l({"M", "R"}, {sch.n, 1});
    double m = 0;
    for (int i = 0; i < c.samples; ++i) {
      auto msg = QuantumState::pure(l, random_state(1 << (sch.n + 1), rng));
      auto [h0, h1] = hide_views(sch, msg);
      auto [b0, b1] = swap_bind_views(d, commit(d, msg));
      m = std::max({m, trace_distance(h0, b0), trace_distance(h1, b1)});
    }
    r["values"]["view_distance"][id] = m;
    worst = std::max(worst, m);
  }
  r["tolerances"]["view_distance"] = kExactTol;
  r["pass"] = worst <= kExactTol;
  return r;
}

Json run_completeness(const ExperimentConfig& c) {
  Rng rng(c.seed);
  Json r = new_report(c);
  bool ok = true;
  for (const auto& id : selected(c.scheme, {"scheme", "tree"})) {
    double acc = 1, fid = 1;
    if (fixture(id).category == "tree") {
      auto t = tree_fixture(id);
      int p = t.sch.n << t.beta;
      for (int i = 0; i < c.samples; ++i) {
        Vec psi = random_state(1 << p, rng);
        auto tc = tree_commit(t.sch, psi, t.beta);
        auto S = tc.layout.leaves();
        auto res = verify_open(tc.layout, tc.state, local_open(tc.layout, S), S);
        acc = std::min(acc, res.accept_prob);
        fid = std::min(fid, (psi.adjoint() * res.revealed * psi)(0).real());
      }
    } else {
      auto sch = scheme_fixture(id);
      RegisterLayout l({"M"}, {sch.n});
      for (int i = 0; i < c.samples; ++i) {
        auto msg = QuantumState::pure(l, random_state(1 << sch.n, rng));
        auto res = open_verify(sch, commit(sch, msg));
        acc = std::min(acc, res.accept_prob);
        fid = std::min(fid, fidelity(msg, res.message_state));
      }
    }
    r["values"]["min_accept"][id] = acc;
    r["values"]["min_fidelity"][id] = fid;
    ok = ok && acc >= 1 - kExactTol && fid >= 1 - kExactTol;
  }
  r["tolerances"]["accept"] = kExactTol;
  r["tolerances"]["fidelity"] = kExactTol;
  r["pass"] = ok;
  return r;
}

double default_accept_bound(const ExperimentConfig& c, const PcpSpec& p) {
  if (c.bound) return *c.bound;
  auto cert = certified_value(c.prover, "squarg_accept[" + c.pcp + "]");
  if (cert) return *cert;
  return c.prover == "honest" ? p.c : 0.0;
}

Json run_squarg(const ExperimentConfig& c) {
  auto p = pcp_fixture(c.pcp);
  auto sch = scheme_fixture(c.scheme.empty() ? "halving" : c.scheme);
  auto prover = prover_fixture(c.prover, p, sch);
  double acc = squarg_accept(p, sch, prover);
  bool comm = true;
  Json per = Json::array();
  for (int r = 0; r < p.challenges(); ++r) {
    auto tr = squarg_run(p, sch, prover, r);
    int f = squarg_comm_formula(p, sch, r);
    per.push_back({{"challenge", r}, {"measured", tr.comm_qubits}, {"formula", f}});
    comm = comm && tr.comm_qubits == f;
  }
  double bound = default_accept_bound(c, p);
  Json r = new_report(c);
  r["values"]["accept_prob"] = acc;
  r["values"]["c"] = p.c;
  r["values"]["s"] = p.s;
  r["values"]["comm_qubits"] = per;
  r["tolerances"]["accept_prob"] = kExactTol;
  r["bounds"]["min_accept"] = bound;
  r["pass"] = acc >= bound - kExactTol && comm;
  return r;
}

Json run_zk(const ExperimentConfig& c) {
  auto z = zk_fixture(c.pcp);
  auto sch = scheme_fixture(c.scheme.empty() ? "pauli-pad-dual" : c.scheme);
  double dist = zk_view_distance(z, sch);
  double acc = qsigma_accept(z, sch, z.honest);
  double bound = c.bound ? *c.bound : z.zk_bound;
  Json r = new_report(c);
  r["values"]["view_distance"] = dist;
  r["values"]["accept_prob"] = acc;
  r["values"]["c"] = z.c;
  r["tolerances"]["view_distance"] = kExactTol;
  r["tolerances"]["accept_prob"] = kExactTol;
  r["bounds"]["max_view_distance"] = bound;
  r["bounds"]["min_accept"] = z.c;
  r["pass"] = dist <= bound + kExactTol && acc >= z.c - kExactTol;
  return r;
}

Json run_extract(const ExperimentConfig& c, int workers) {
  auto p = pcp_fixture(c.pcp);
  auto sch = scheme_fixture(c.scheme.empty() ? "halving" : c.scheme);
  auto prover = prover_fixture(c.prover, p, sch);
  double pv = squarg_accept(p, sch, prover);
  ExtractionContext ctx(p, sch, prover);
  int j = c.hybrid.value_or(-1);
  if (j > ctx.node_count())
    throw RunError("cap_violation", "hybrid", "config: hybrid exceeds the node count");
  ctx.compressed(j);  // built once; jobs only read it
  auto runs = run_jobs(c.runs, workers, [&](int i) {
    std::uint64_t s = c.seed + static_cast<std::uint64_t>(i);
    auto tr = hyb_extract(ctx, j, c.gamma, c.q, c.T, c.override_t, s);
    Json o;
    o["seed"] = s;
    o["success"] = tr.success;
    o["leaf_value"] = pcp_value(p, tr.leaves);
    o["leaves_hash"] = matrix_hash(tr.leaves);
    o["trace"] = trace_to_json(tr);
    return o;
  });
  int wins = 0;
  double leaf_sum = 0;
  for (const auto& o : runs)
    if (o["success"].get<bool>()) {
      ++wins;
      leaf_sum += o["leaf_value"].get<double>();
    }
  double f = static_cast<double>(wins) / c.runs;
  double sigma = std::sqrt(f * (1 - f) / c.runs);
  double bound = c.bound ? *c.bound : std::max(0.0, pv - c.q - c.gamma);
  double leaf_mean = wins ? leaf_sum / wins : 0;
  Json r = new_report(c);
  r["values"]["squarg_accept"] = pv;
  r["values"]["successes"] = wins;
  r["values"]["success_freq"] = f;
  r["values"]["sigma"] = sigma;
  r["values"]["mean_leaf_value_on_success"] = leaf_mean;
  r["tolerances"]["sigma_multiplier"] = 3;
  r["tolerances"]["leaf_value_slack"] = kLeafSlack;
  r["bounds"]["min_success_freq"] = bound;
  r["bounds"]["min_leaf_value"] = c.q - kLeafSlack;
  r["pass"] = f >= bound - 3 * sigma && (wins == 0 || leaf_mean >= c.q - kLeafSlack);
  r["runs"] = runs;
  return r;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!kKinds.count(kind)) throw RunError("invalid_config", "kind", "config: unknown kind '" + kind + "'");
  bool needs_scheme = kind == "bind" || kind == "hide";
  bool needs_pcp = kind == "squarg" || kind == "zk" || kind == "extract";
  if (needs_scheme && scheme.empty())
    throw RunError("invalid_config", "scheme", "config: '" + kind + "' needs a scheme");
  if (needs_pcp && pcp.empty())
    throw RunError("invalid_config", "pcp", "config: '" + kind + "' needs a pcp");
  if (!scheme.empty() && !(scheme == "all" && (kind == "duality" || kind == "completeness")))
    require_fixture("scheme", scheme,
                    kind == "completeness" ? std::set<std::string>{"scheme", "tree"}
                                           : std::set<std::string>{"scheme"});
  if (needs_pcp) {
    require_fixture("pcp", pcp, {"pcp"});
    if (kind == "zk" && pcp != "zk-triangle")
      throw RunError("invalid_config", "pcp", "config: zk needs a zero-knowledge pcp");
    if (kind != "zk") {
      if (pcp == "zk-triangle")
        throw RunError("invalid_config", "pcp", "config: zk-triangle only runs with kind zk");
      require_fixture("prover", prover, {"prover"});
    }
  }
  if (runs < 1 || runs > kMaxRuns) throw RunError("cap_violation", "runs", "config: runs outside [1, 10000]");
  if (samples < 1 || samples > kMaxSamples)
    throw RunError("cap_violation", "samples", "config: samples outside [1, 1000]");
  if (T < 0 || T > kMaxRounds) throw RunError("cap_violation", "T", "config: T outside [0, 64]");
  if (!(gamma > 0) || gamma > 1) throw RunError("invalid_config", "gamma", "config: gamma outside (0, 1]");
  if (!(q >= 0) || q > 1) throw RunError("invalid_config", "q", "config: q outside [0, 1]");
  if (override_t && (*override_t < 1 || *override_t > kMaxEstSteps))
    throw RunError("cap_violation", "override_t", "config: override_t outside [1, 100000]");
  if (kind == "extract") {
    try {
      extraction_schedule(gamma, T, override_t);
    } catch (const QspError& e) {
      throw RunError("cap_violation", "override_t", e.what());
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw RunError("invalid_config", "", "config: line " + std::to_string(lineno) + " has no '='");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (!seen.insert(k).second) throw RunError("invalid_config", k, "config: duplicate key '" + k + "'");
    if (k == "kind") c.kind = v;
    else if (k == "scheme") c.scheme = v;
    else if (k == "pcp") c.pcp = v;
    else if (k == "prover") c.prover = v;
    else if (k == "gamma") c.gamma = parse_number<double>(k, v);
    else if (k == "q") c.q = parse_number<double>(k, v);
    else if (k == "T") c.T = parse_number<int>(k, v);
    else if (k == "override_t") c.override_t = parse_number<int>(k, v);
    else if (k == "hybrid") c.hybrid = parse_number<int>(k, v);
    else if (k == "bound") c.bound = parse_number<double>(k, v);
    else if (k == "seed") c.seed = parse_number<std::uint64_t>(k, v);
    else if (k == "runs") c.runs = parse_number<int>(k, v);
    else if (k == "samples") c.samples = parse_number<int>(k, v);
    else if (k == "out") c.out = v;
    else throw RunError("invalid_config", k, "config: unknown key '" + k + "'");
  }
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["kind"] = c.kind;
  j["scheme"] = c.scheme;
  j["pcp"] = c.pcp;
  j["prover"] = c.prover;
  j["gamma"] = c.gamma;
  j["q"] = c.q;
  j["T"] = c.T;
  if (c.override_t) j["override_t"] = *c.override_t;
  if (c.hybrid) j["hybrid"] = *c.hybrid;
  if (c.bound) j["bound"] = *c.bound;
  j["seed"] = c.seed;
  j["runs"] = c.runs;
  j["samples"] = c.samples;
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  try {
    ExperimentConfig c;
    c.kind = j.at("kind").get<std::string>();
    c.scheme = j.at("scheme").get<std::string>();
    c.pcp = j.at("pcp").get<std::string>();
    c.prover = j.at("prover").get<std::string>();
    c.gamma = j.at("gamma").get<double>();
    c.q = j.at("q").get<double>();
    c.T = j.at("T").get<int>();
    if (j.contains("override_t")) c.override_t = j["override_t"].get<int>();
    if (j.contains("hybrid")) c.hybrid = j["hybrid"].get<int>();
    if (j.contains("bound")) c.bound = j["bound"].get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.runs = j.at("runs").get<int>();
    c.samples = j.at("samples").get<int>();
    return c;
  } catch (const Json::exception& e) {
    throw RunError("invalid_config", "config", std::string("config: ") + e.what());
  }
}

std::vector<FixtureEntry> list_fixtures(const std::string& filter) {
  std::vector<FixtureEntry> out;
  for (const auto& e : catalog())
    if (filter.empty() || e.id.find(filter) != std::string::npos ||
        e.category.find(filter) != std::string::npos)
      out.push_back(e);
  return out;
}

Json catalog_to_json(const std::vector<FixtureEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries) {
    Json o;
    o["id"] = e.id;
    o["category"] = e.category;
    o["description"] = e.description;
    Json cs = Json::array();
    for (const auto& c : e.certified)
      cs.push_back({{"quantity", c.quantity}, {"value", c.value}, {"provenance", c.provenance}});
    o["certified"] = cs;
    arr.push_back(o);
  }
  Json j;
  j["schema_version"] = kReportSchema;
  j["fixtures"] = arr;
  return j;
}

const FixtureEntry& fixture(const std::string& id) {
  for (const auto& e : catalog())
    if (e.id == id) return e;
  throw RunError("unknown_fixture", "id", "unknown fixture: " + id);
}

CommitScheme scheme_fixture(const std::string& id) {
  auto halving = [] { return enc_qsc(prg_pad_family(make_toy_prg(1, 4, 8), 2)); };
  if (id == "reveal") return reveal_scheme(1);
  if (id == "pauli-pad") return enc_qsc(pauli_pad_family(1));
  if (id == "pauli-pad-dual") return dual(enc_qsc(pauli_pad_family(1)));
  if (id == "toy-prg") return enc_qsc(prg_pad_family(make_toy_prg(2, 4, 11), 2));
  if (id == "folklore") return folklore_qsc(toy_qbc(2, 1, 1, 5));
  if (id == "md-extended") return md_extend(halving(), 2);
  if (id == "halving") return halving();
  throw RunError("unknown_fixture", "scheme", "unknown scheme fixture: " + id);
}

TreeLayout tree_fixture(const std::string& id) {
  if (id == "tree-b1") return tree_layout(scheme_fixture("halving"), 1);
  if (id == "tree-b2") return tree_layout(scheme_fixture("halving"), 2);
  throw RunError("unknown_fixture", "scheme", "unknown tree fixture: " + id);
}

PcpSpec pcp_fixture(const std::string& id) {
  if (id == "cnf-sat") return toy_pcp(parse_cnf(kSatCnf), kSatWitness);
  if (id == "cnf-unsat") return toy_pcp(parse_cnf(kUnsatCnf));
  if (id == "zk-triangle") return zk_fixture(id);
  throw RunError("unknown_fixture", "pcp", "unknown pcp fixture: " + id);
}

ZkPcpSpec zk_fixture(const std::string& id) {
  if (id == "zk-triangle") return toy_zk_pcp(3, {{0, 1}, {1, 2}, {0, 2}}, std::vector<int>{0, 1, 2});
  throw RunError("unknown_fixture", "pcp", "unknown zero-knowledge pcp fixture: " + id);
}

Vec prover_proof(const std::string& id, const PcpSpec& p) {
  Vec zero = Vec::Zero(Eigen::Index{1} << p.m);
  zero(0) = 1;
  if (id == "zero") return zero;
  Vec honest = top_eigenvector(p.honest);
  if (id == "honest") return honest;
  if (id == "mixed") {
    Vec v = honest + zero;
    return v / v.norm();
  }
  throw RunError("unknown_fixture", "prover", "unknown prover fixture: " + id);
}

TreeProver prover_fixture(const std::string& id, const PcpSpec& p, const CommitScheme& sch) {
  auto pr = honest_prover(sch, prover_proof(id, p), tree_depth_for(p.m, sch.n));
  pr.id = id;
  return pr;
}

std::vector<Json> run_jobs(int n, int workers, const std::function<Json(int)>& job) {
  std::vector<Json> out(n);
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[i] = job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  int k = std::clamp(workers, 1, std::max(n, 1));
  std::vector<std::thread> pool;
  for (int i = 1; i < k; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

Json run(const ExperimentConfig& config, int workers) {
  if (workers < 1 || workers > kMaxWorkers)
    throw RunError("cap_violation", "workers", "workers outside [1, 64]");
  config.validate();
  try {
    if (config.kind == "bind" || config.kind == "hide") return run_game(config);
    if (config.kind == "duality") return run_duality(config);
    if (config.kind == "completeness") return run_completeness(config);
    if (config.kind == "squarg") return run_squarg(config);
    if (config.kind == "zk") return run_zk(config);
    return run_extract(config, workers);
  } catch (const RunError&) {
    throw;
  } catch (const QspError& e) {
    throw RunError("runtime", "", e.what());
  }
}

Json error_report(const RunError& e) {
  Json j;
  j["schema_version"] = kReportSchema;
  j["error"] = {{"code", e.code}, {"field", e.field}, {"message", e.what()}};
  j["pass"] = false;
  return j;
}

Json run_checked(const ExperimentConfig& config, int workers) {
  try {
    return run(config, workers);
  } catch (const RunError& e) {
    return error_report(e);
  }
}

Json replay(const Json& report, int workers) {
  if (!report.is_object() || !report.contains("config"))
    throw RunError("invalid_config", "config", "replay: report has no config");
  auto again = run(config_from_json(report["config"]), workers);
  Json j;
  j["schema_version"] = kReportSchema;
  j["kind"] = "replay";
  j["config"] = report["config"];
  j["match"] = again.dump() == report.dump();
  j["pass"] = j["match"];
  return j;
}

int exit_status(const Json& report) {
  if (report.contains("error")) return 2;
  return report.value("pass", false) ? 0 : 1;
}

}  // namespace qsp

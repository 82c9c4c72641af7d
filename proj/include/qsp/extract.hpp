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

#ifndef QSP_EXTRACT_HPP_
#define QSP_EXTRACT_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qsp/protocols.hpp"
#include "qsp/serialize.hpp"

namespace qsp {

constexpr int kMaxEstSteps = 100000;
constexpr int kMaxCompressedDim = 512;

struct EstParams {
  double eps = 0.05;
  double delta = 0.01;
  std::optional<int> override_t;

  int derived_t() const;
  int t() const;
  int repair_cap() const;  // ceil(1/sqrt(delta)) (B, A) pairs
  void validate() const;
};

/// Spectrum of P = 1/4 I + 1/(2|R|) sum_r Pi_r, grouped into eigenspaces.
struct EstSpectrum {
  Mat vecs;
  std::vector<double> values;
  std::vector<std::pair<int, int>> clusters;  // [begin, end) columns of vecs
};

class ProjFamily {
 public:
  ProjFamily() = default;
  explicit ProjFamily(std::vector<Mat> pis);

  int challenges() const { return static_cast<int>(pi_.size()); }
  Eigen::Index dim() const { return pi_.empty() ? 0 : pi_.front().rows(); }
  const Mat& pi(int r) const { return pi_.at(r); }
  double success(const Vec& s) const;  // average acceptance
  const EstSpectrum& spectrum() const { return *spec_; }

 private:
  std::vector<Mat> pi_;
  std::shared_ptr<const EstSpectrum> spec_;
};

struct EstOutcome {
  double p_tilde = 0;
  Vec post;
  int t = 0;
  int same = 0;          // agreeing consecutive outcomes among the first t
  int tail_steps = 0;
  bool tail_capped = false;  // the tail hit its 2t limit; state kept as-is
};

EstOutcome est(const Vec& s, const ProjFamily& fam, const EstParams& params, Rng& rng);

struct RepairOutcome {
  Vec post;
  bool immediate = false;  // accepted on the first A measurement
  bool accepted = false;
  int rounds = 0;          // (B, A) pairs applied
};

/// Probability that est on an eigenvector of P with eigenvalue `pv` reports at least p.
double est_tail(double pv, int t, double p);

RepairOutcome repair(const Vec& s, const ProjFamily& fam, const Mat& d, const EstParams& params,
                     double p_target, Rng& rng);

struct StepRecord {
  int t = 0;
  double p = 0;
  int r = -1;
  bool accept = false;
  bool aborted = false;
  bool tail_capped = false;
  std::vector<std::string> E;
};

struct ExtractionTrace {
  std::vector<StepRecord> steps;
  double p_final = 0;
  bool success = false;
  int T = 0;
  double gamma = 0;
  double q = 0;
  double eps = 0;
  double delta = 0;
  int t = 0;
  bool override_t = false;
  std::vector<std::string> E;
  Mat leaves;  // extracted M' leaf registers, proof order
};

Json trace_to_json(const ExtractionTrace& tr);

/// eps = gamma / 4T, delta = (gamma / 16T)^2 with T clamped to at least 1.
EstParams extraction_schedule(double gamma, int T, std::optional<int> override_t);

ExtractionTrace bit_extract(const Vec& s, const ProjFamily& fam, double gamma, double q, int T,
                            std::optional<int> override_t, std::uint64_t seed);

/// Prover plus one extracted register M'_l per tree node, on top of the
/// tree wires and prover ancillas.
class ExtractionContext {
 public:
  ExtractionContext(PcpSpec pcp, const CommitScheme& sch, TreeProver prover);

  const PcpSpec& pcp() const { return pcp_; }
  const TreeLayout& tree() const { return tree_; }
  const TreeProver& prover() const { return prover_; }
  int total() const { return total_; }
  int node_count() const { return static_cast<int>(tree_.nodes.size()); }
  const std::vector<int>& mprime(const std::string& label) const;
  std::vector<std::string> path(int r) const;
  Vec initial() const;

  Vec swap_recover(const Vec& v, int r, const std::vector<std::string>& S,
                   const std::set<std::string>& E, bool inverse = false) const;
  Vec swap_diff(const Vec& v, int r, const std::vector<std::string>& S,
                const std::set<std::string>& E) const;
  Vec apply_pi(const Vec& v, int r, const std::set<std::string>& E) const;
  double accept(const Vec& v, int r, const std::set<std::string>& E) const;
  Mat leaves(const Vec& v) const;  // reduced state of the leaf M' registers on pcp.m qubits

  struct Compressed;
  const Compressed& compressed(int j) const;

 private:
  void check_prefix_closed(int r, const std::vector<std::string>& S) const;
  // Column-wise versions of the public maps.
  Mat respond(const Mat& v, int r, bool inverse) const;
  Mat recover_cols(const Mat& v, int r, const std::vector<std::string>& S,
                   const std::set<std::string>& E, bool inverse) const;
  Mat diff_cols(const Mat& v, int r, const std::vector<std::string>& S,
                const std::set<std::string>& E, bool inverse) const;
  Mat pi_cols(const Mat& v, int r, const std::set<std::string>& E) const;

  PcpSpec pcp_;
  TreeLayout tree_;
  TreeProver prover_;
  int total_ = 0;
  std::map<std::string, std::vector<int>> mprime_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<Compressed>> cache_;
};

/// Orthonormal basis of the smallest subspace holding the initial state that
/// is invariant under every operator the run can apply.
struct ExtractionContext::Compressed {
  int j = 0;
  Mat basis;
  std::map<std::set<std::string>, ProjFamily> families;
  std::map<std::pair<int, std::set<std::string>>, Mat> swap_diffs;
  Vec initial;
};

/// Nodes [j] are the first j nodes in level order; j < 0 means all of them.
ExtractionTrace hyb_extract(const ExtractionContext& ctx, int j, double gamma, double q, int T,
                            std::optional<int> override_t, std::uint64_t seed);
ExtractionTrace extract_full(const ExtractionContext& ctx, double gamma, double q, int T,
                             std::optional<int> override_t, std::uint64_t seed);

struct KnowledgeOptions {
  double p_floor = 1;
  double gamma = 0.2;
  std::optional<int> override_t;
  std::optional<int> max_T;  // surrogate for ceil(2^(beta+3) / gamma^2)
};

struct KnowledgeResult {
  Mat proof;
  int T = 0;
  ExtractionTrace trace;
};

/// q = p_floor - gamma; runs Extract with (gamma / 4, q + gamma / 4, T).
KnowledgeResult knowledge_ext(const ExtractionContext& ctx, const KnowledgeOptions& opt,
                              std::uint64_t seed);
int knowledge_T_max(int beta, double gamma);

}  // namespace qsp

#endif  // QSP_EXTRACT_HPP_

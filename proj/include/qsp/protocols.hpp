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

#ifndef QSP_PROTOCOLS_HPP_
#define QSP_PROTOCOLS_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsp/qsc.hpp"
#include "qsp/serialize.hpp"

namespace qsp {

constexpr int kMaxChallenges = 64;
constexpr int kMaxCnfVars = 6;
constexpr int kMaxGraphVertices = 4;

using Gate = std::pair<Mat, std::vector<int>>;
using Circuit = std::vector<Gate>;

Vec run_circuit(const Circuit& c, Vec v);

struct PcpSpec {
  std::string id;
  int m = 0;
  int q = 0;
  std::vector<std::vector<int>> queries;  // Q_r, proof qubit indices
  std::vector<Mat> projectors;            // Pi_r on Q_r, first index least significant
  double c = 0;
  double s = 0;
  bool classical = false;
  Mat honest;  // proof attaining c, density on m qubits

  int challenges() const { return static_cast<int>(queries.size()); }
  int ell() const;
  const std::vector<int>& Q(int r) const { return queries.at(r); }
  const Mat& projector(int r) const { return projectors.at(r); }
  void validate() const;
};

struct ZkPcpSpec : PcpSpec {
  std::vector<Mat> simulated;  // per challenge, on Q_r
  double zk_bound = 0;
};

double pcp_value(const PcpSpec& p, const Mat& proof);
double pcp_value(const PcpSpec& p, const Vec& proof);
/// sup over states of the average acceptance; brute force over basis proofs
/// when every projector is diagonal.
double pcp_soundness(const PcpSpec& p);

struct Cnf {
  int vars = 0;
  std::vector<std::vector<int>> clauses;  // literals +-(v + 1)
};

/// DIMACS-like: one clause per line, optional trailing 0, 'c' and 'p' lines skipped.
Cnf parse_cnf(const std::string& text);
std::vector<std::pair<int, int>> parse_graph(const std::string& text);

PcpSpec toy_pcp(const Cnf& cnf, std::optional<std::uint64_t> assignment = std::nullopt);
PcpSpec amplify_pcp(const PcpSpec& p, int reps);

ZkPcpSpec toy_zk_pcp(int vertices, const std::vector<std::pair<int, int>>& edges,
                     std::optional<std::vector<int>> coloring = std::nullopt);

struct TreeNode {
  std::string label;
  std::vector<int> wires;  // scheme order: message then W
  std::vector<int> m, w, c, d;
};

/// Wire map of a tree commitment. Proof qubits occupy wires [0, s 2^beta),
/// the W registers follow in level order from the leaves up.
struct TreeLayout {
  int beta = 0;
  int s = 0;
  CommitScheme sch;
  std::vector<TreeNode> nodes;  // level order, root first
  int width = 0;

  int index(const std::string& label) const;
  const TreeNode& node(const std::string& label) const { return nodes.at(index(label)); }
  const TreeNode& root() const { return nodes.front(); }
  std::vector<std::string> leaves() const;
  std::string leaf_of_qubit(int q) const;
  std::vector<int> prover_wires(int total) const;  // everything but the root C
};

TreeLayout tree_layout(const CommitScheme& sch, int beta);

struct TreeCommitment {
  TreeLayout layout;
  Vec state;  // on layout.width + anc qubits, ancillas most significant
  int anc = 0;

  int total() const { return layout.width + anc; }
};

/// proof lives on s 2^beta qubits plus `anc` reference qubits above them.
TreeCommitment tree_commit(const CommitScheme& sch, const Vec& proof, int beta, int anc = 0);

/// All prefixes of the labels, root first, level by level.
std::vector<std::string> path_of(const std::vector<std::string>& leaves);

struct TreeOpening {
  std::vector<std::string> labels;
  std::vector<int> wires;  // D registers sent, in label order
};

TreeOpening local_open(const TreeLayout& t, const std::vector<std::string>& S);

struct TreeVerifyResult {
  double accept_prob = 0;
  Vec post;      // accept branch on all wires, opened nodes in (M, W) form
  Mat revealed;  // normalized state of the leaves in S, in S order
  std::vector<int> revealed_wires;
};

/// Rejects openings that are not exactly Path(S).
TreeVerifyResult verify_open(const TreeLayout& t, const Vec& state, const TreeOpening& op,
                             const std::vector<std::string>& S);

/// Prover after sending the root: state on tree wires plus ancillas, and a
/// response circuit per challenge acting on prover_wires.
struct TreeProver {
  Vec state;
  int anc = 0;
  std::vector<Circuit> respond;  // empty means the honest response
  std::string id = "honest";
};

TreeProver honest_prover(const CommitScheme& sch, const Vec& proof, int beta);
int tree_depth_for(int m, int s);
std::vector<std::string> challenge_leaves(const TreeLayout& t, const PcpSpec& p, int r);

struct Transcript {
  std::string pcp_id;
  std::string scheme_id;
  int challenge = 0;
  int root_qubits = 0;
  int challenge_bits = 0;
  std::vector<std::string> opened;
  int opening_qubits = 0;
  int comm_qubits = 0;
  double accept_prob = 0;
  std::optional<bool> decision;  // sampled in Monte-Carlo mode only
};

Json transcript_to_json(const Transcript& t);

/// Proof qubit i sits on tree wire i; the PCP is padded with idle |0> qubits.
Transcript squarg_run(const PcpSpec& p, const CommitScheme& sch, const TreeProver& prover, int r);
Transcript squarg_sample(const PcpSpec& p, const CommitScheme& sch, const TreeProver& prover,
                         Rng& rng);
double squarg_accept(const PcpSpec& p, const CommitScheme& sch, const TreeProver& prover);
int squarg_comm_formula(const PcpSpec& p, const CommitScheme& sch, int r);

/// Per-qubit commitments to `proof`; only the D registers of Q_r are opened.
Transcript qsigma_run(const ZkPcpSpec& zk, const CommitScheme& sch, const Mat& proof, int r);
double qsigma_accept(const ZkPcpSpec& zk, const CommitScheme& sch, const Mat& proof);
/// Trace distance between the honest-verifier views (r, all C, D on Q_r)
/// built from the honest proof and from the simulator.
double zk_view_distance(const ZkPcpSpec& zk, const CommitScheme& sch);

}  // namespace qsp

#endif  // QSP_PROTOCOLS_HPP_

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

#include "qsp/protocols.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

#include "qsp/games.hpp"

namespace qsp {
namespace {

constexpr Eigen::Index pow2(int n) { return Eigen::Index{1} << n; }

int log2_exact(Eigen::Index dim, const char* what) {
  if (dim <= 0 || (dim & (dim - 1)) != 0) throw QspError(std::string(what) + ": dimension is not a power of two");
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

bool is_diagonal(const Mat& m) {
  Mat off = m;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= 1e-12;
}

void project_zero(Vec& v, const std::vector<int>& wires) {
  Eigen::Index mask = 0;
  for (int w : wires) mask |= pow2(w);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (i & mask) v(i) = 0;
}

std::string bits_label(std::uint64_t x, int len) {
  std::string s(len, '0');
  for (int i = 0; i < len; ++i)
    if ((x >> (len - 1 - i)) & 1) s[i] = '1';
  return s;
}

bool label_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

// Low-rank factor F with F F^dag = rho.
Mat psd_factor(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-14) keep.push_back(i);
  Mat f(rho.rows(), static_cast<Eigen::Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j)
    f.col(j) = es.eigenvectors().col(keep[j]) * std::sqrt(es.eigenvalues()(keep[j]));
  return f;
}

// Trace distance of F_a F_a^dag and F_b F_b^dag, computed on their joint support.
double factor_trace_distance(const Mat& fa, const Mat& fb) {
  Mat both(fa.rows(), fa.cols() + fb.cols());
  both << fa, fb;
  if (both.cols() == 0) return 0;
  Eigen::HouseholderQR<Mat> qr(both);
  Eigen::Index k = std::min(both.rows(), both.cols());
  Mat q = qr.householderQ() * Mat::Identity(both.rows(), k);
  Mat a = q.adjoint() * fa, b = q.adjoint() * fb;
  return trace_distance(Mat(a * a.adjoint()), Mat(b * b.adjoint()));
}

// Density on m qubits with `local` on the qubits `q` and |0> elsewhere.
Mat embed_state(const Mat& local, const std::vector<int>& q, int m) {
  int k = static_cast<int>(q.size());
  Mat zeros = Mat::Zero(pow2(m - k), pow2(m - k));
  zeros(0, 0) = 1;
  Mat joint = kron(zeros, local);
  std::vector<int> perm(m, -1);
  for (int j = 0; j < k; ++j) perm[q[j]] = j;
  int next = k;
  for (int i = 0; i < m; ++i)
    if (perm[i] < 0) perm[i] = next++;
  return permute_qubits(joint, perm);
}

bool is_replacement(const Channel& ch) {
  Mat ref;
  for (int i = 0; i < ch.din; ++i)
    for (int j = 0; j < ch.din; ++j) {
      Mat e = Mat::Zero(ch.din, ch.din);
      e(i, j) = 1;
      Mat out = apply_channel_lsb(ch, e);
      if (i != j) {
        if (out.cwiseAbs().maxCoeff() > 1e-12) return false;
      } else if (i == 0) {
        ref = out;
      } else if ((out - ref).cwiseAbs().maxCoeff() > 1e-12) {
        return false;
      }
    }
  return true;
}

std::string cnf_id(const Cnf& cnf) {
  std::ostringstream os;
  os << "cnf[v=" << cnf.vars;
  for (const auto& cl : cnf.clauses) {
    os << ';';
    for (size_t i = 0; i < cl.size(); ++i) os << (i ? "," : "") << cl[i];
  }
  os << ']';
  return os.str();
}

}  // namespace

Vec run_circuit(const Circuit& c, Vec v) {
  for (const auto& [u, wires] : c) v = apply_qubits(u, v, wires);
  return v;
}

int PcpSpec::ell() const {
  int r = challenges(), l = 0;
  while ((1 << l) < r) ++l;
  return l;
}

void PcpSpec::validate() const {
  if (challenges() < 1 || challenges() > kMaxChallenges) throw QspError("pcp: challenge set size out of range");
  if (projectors.size() != queries.size()) throw QspError("pcp: one projector per challenge required");
  if (m < 1 || m > kMixedCap) throw QspError("pcp: proof width out of range");
  for (int r = 0; r < challenges(); ++r) {
    const auto& qr = queries[r];
    if (static_cast<int>(qr.size()) != q) throw QspError("pcp: query set of wrong size");
    std::set<int> seen(qr.begin(), qr.end());
    if (seen.size() != qr.size() || *seen.begin() < 0 || *seen.rbegin() >= m)
      throw QspError("pcp: invalid query indices");
    const Mat& p = projectors[r];
    if (p.rows() != pow2(q) || p.cols() != pow2(q)) throw QspError("pcp: projector dimension mismatch");
    if ((p - p.adjoint()).norm() > 1e-9 || (p * p - p).norm() > 1e-9) throw QspError("pcp: not a projector");
    if (classical && !is_diagonal(p)) throw QspError("pcp: classical projector not diagonal");
  }
}

double pcp_value(const PcpSpec& p, const Mat& proof) {
  if (proof.rows() != pow2(p.m)) throw QspError("pcp_value: proof width mismatch");
  double acc = 0;
  for (int r = 0; r < p.challenges(); ++r)
    acc += (p.projector(r) * partial_trace_qubits(proof, p.Q(r), p.m)).trace().real();
  return acc / p.challenges();
}

double pcp_value(const PcpSpec& p, const Vec& proof) {
  if (proof.size() != pow2(p.m)) throw QspError("pcp_value: proof width mismatch");
  double acc = 0;
  for (int r = 0; r < p.challenges(); ++r)
    acc += (p.projector(r) * partial_trace_qubits(proof, p.Q(r), p.m)).trace().real();
  return acc / p.challenges();
}

double pcp_soundness(const PcpSpec& p) {
  p.validate();
  bool diag = std::all_of(p.projectors.begin(), p.projectors.end(), is_diagonal);
  if (diag) {
    double best = 0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << p.m); ++x) {
      double acc = 0;
      for (int r = 0; r < p.challenges(); ++r) {
        const auto& qr = p.Q(r);
        Eigen::Index local = 0;
        for (size_t j = 0; j < qr.size(); ++j)
          if ((x >> qr[j]) & 1) local |= pow2(static_cast<int>(j));
        acc += p.projector(r)(local, local).real();
      }
      best = std::max(best, acc / p.challenges());
    }
    return best;
  }
  Mat avg = Mat::Zero(pow2(p.m), pow2(p.m));
  for (int r = 0; r < p.challenges(); ++r) avg += embed(p.projector(r), p.Q(r), p.m);
  avg /= p.challenges();
  Eigen::SelfAdjointEigenSolver<Mat> es(avg);
  return es.eigenvalues().maxCoeff();
}

Cnf parse_cnf(const std::string& text) {
  Cnf cnf;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == 'c' || line[first] == 'p') continue;
    std::istringstream ls(line);
    std::vector<int> clause;
    std::string tok;
    while (ls >> tok) {
      int lit = 0;
      try {
        size_t used = 0;
        lit = std::stoi(tok, &used);
        if (used != tok.size()) throw QspError("");
      } catch (...) {
        throw QspError("parse_cnf: bad literal '" + tok + "'");
      }
      if (lit == 0) break;
      clause.push_back(lit);
      cnf.vars = std::max(cnf.vars, std::abs(lit));
    }
    if (!clause.empty()) cnf.clauses.push_back(clause);
  }
  return cnf;
}

std::vector<std::pair<int, int>> parse_graph(const std::string& text) {
  std::vector<std::pair<int, int>> edges;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    int u = 0, v = 0;
    std::string extra;
    if (!(ls >> u >> v) || (ls >> extra)) throw QspError("parse_graph: expected 'u v' per line");
    edges.emplace_back(u, v);
  }
  return edges;
}

PcpSpec toy_pcp(const Cnf& cnf, std::optional<std::uint64_t> assignment) {
  int v = cnf.vars;
  if (v < 1 || v > kMaxCnfVars) throw QspError("toy_pcp: variable count out of range");
  if (cnf.clauses.empty() || cnf.clauses.size() > 8) throw QspError("toy_pcp: clause count out of range");
  std::vector<std::vector<int>> vars_of;
  int q = 0;
  for (const auto& cl : cnf.clauses) {
    if (cl.empty() || cl.size() > 3) throw QspError("toy_pcp: clause width out of range");
    std::set<int> vs;
    for (int lit : cl) {
      if (lit == 0 || std::abs(lit) > v) throw QspError("toy_pcp: literal out of range");
      vs.insert(std::abs(lit) - 1);
    }
    vars_of.emplace_back(vs.begin(), vs.end());
    q = std::max(q, static_cast<int>(vs.size()));
  }
  PcpSpec p;
  p.id = cnf_id(cnf);
  p.m = v;
  p.q = q;
  p.classical = true;
  for (size_t r = 0; r < cnf.clauses.size(); ++r) {
    std::vector<int> qr = vars_of[r];
    for (int x = 0; static_cast<int>(qr.size()) < q; ++x)
      if (std::find(qr.begin(), qr.end(), x) == qr.end()) qr.push_back(x);
    std::sort(qr.begin(), qr.end());
    Mat pi = Mat::Zero(pow2(q), pow2(q));
    for (Eigen::Index local = 0; local < pow2(q); ++local) {
      bool sat = false;
      for (int lit : cnf.clauses[r]) {
        int var = std::abs(lit) - 1;
        auto pos = std::find(qr.begin(), qr.end(), var) - qr.begin();
        bool val = (local >> pos) & 1;
        if (val == (lit > 0)) sat = true;
      }
      if (sat) pi(local, local) = 1;
    }
    p.queries.push_back(qr);
    p.projectors.push_back(pi);
  }
  p.s = pcp_soundness(p);
  std::uint64_t best = 0;
  if (assignment) {
    if (*assignment >= (std::uint64_t{1} << v)) throw QspError("toy_pcp: assignment out of range");
    best = *assignment;
  } else {
    double bv = -1;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << v); ++x) {
      Vec e = Vec::Zero(pow2(v));
      e(static_cast<Eigen::Index>(x)) = 1;
      double val = pcp_value(p, e);
      if (val > bv + 1e-12) bv = val, best = x;
    }
  }
  p.honest = Mat::Zero(pow2(v), pow2(v));
  p.honest(static_cast<Eigen::Index>(best), static_cast<Eigen::Index>(best)) = 1;
  p.c = pcp_value(p, p.honest);
  return p;
}

PcpSpec amplify_pcp(const PcpSpec& p, int reps) {
  p.validate();
  if (reps < 1) throw QspError("amplify_pcp: reps must be positive");
  if (reps == 1) return p;
  if (p.m * reps > kMixedCap) throw QspError("amplify_pcp: proof width exceeds cap");
  long total = 1;
  for (int k = 0; k < reps; ++k) total *= p.challenges();
  if (total > kMaxChallenges) throw QspError("amplify_pcp: challenge set exceeds cap");
  PcpSpec out;
  out.id = p.id + "^" + std::to_string(reps);
  out.m = p.m * reps;
  out.q = p.q * reps;
  out.classical = p.classical;
  for (long idx = 0; idx < total; ++idx) {
    std::vector<int> qr;
    Mat pi = Mat::Ones(1, 1);
    long rest = idx;
    for (int k = 0; k < reps; ++k) {
      int r = static_cast<int>(rest % p.challenges());
      rest /= p.challenges();
      for (int x : p.Q(r)) qr.push_back(x + k * p.m);
      pi = kron(p.projector(r), pi);
    }
    out.queries.push_back(qr);
    out.projectors.push_back(pi);
  }
  out.c = std::pow(p.c, reps);
  if (p.honest.size() > 0) {
    out.honest = Mat::Ones(1, 1);
    for (int k = 0; k < reps; ++k) out.honest = kron(p.honest, out.honest);
  }
  out.s = pcp_soundness(out);
  return out;
}

ZkPcpSpec toy_zk_pcp(int vertices, const std::vector<std::pair<int, int>>& edges,
                     std::optional<std::vector<int>> coloring) {
  if (vertices < 2 || vertices > kMaxGraphVertices) throw QspError("toy_zk_pcp: vertex count out of range");
  if (edges.empty()) throw QspError("toy_zk_pcp: graph has no edges");
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= vertices || v >= vertices || u == v) throw QspError("toy_zk_pcp: invalid edge");
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second) throw QspError("toy_zk_pcp: duplicate edge");
  }
  auto satisfied = [&](const std::vector<int>& col) {
    int k = 0;
    for (auto [u, v] : edges) k += col[u] != col[v];
    return k;
  };
  std::vector<int> col;
  if (coloring) {
    col = *coloring;
    if (static_cast<int>(col.size()) != vertices) throw QspError("toy_zk_pcp: coloring size mismatch");
    for (int c : col)
      if (c < 0 || c > 2) throw QspError("toy_zk_pcp: color out of range");
    if (satisfied(col) != static_cast<int>(edges.size())) throw QspError("toy_zk_pcp: coloring is not proper");
  } else {
    int best = -1;
    std::vector<int> cur(vertices);
    int combos = 1;
    for (int i = 0; i < vertices; ++i) combos *= 3;
    for (int x = 0; x < combos; ++x) {
      for (int i = 0, y = x; i < vertices; ++i, y /= 3) cur[i] = y % 3;
      if (int k = satisfied(cur); k > best) best = k, col = cur;
    }
  }
  ZkPcpSpec z;
  std::ostringstream id;
  id << "3col[v=" << vertices;
  for (auto [u, v] : edges) id << ';' << u << '-' << v;
  id << ']';
  z.id = id.str();
  z.m = 2 * vertices;
  z.q = 4;
  z.classical = true;
  Mat pi = Mat::Zero(16, 16), sim = Mat::Zero(16, 16);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (a < 3 && b < 3 && a != b) {
        pi(a + 4 * b, a + 4 * b) = 1;
        sim(a + 4 * b, a + 4 * b) = 1.0 / 6;
      }
  for (auto [u, v] : edges) {
    z.queries.push_back({2 * u, 2 * u + 1, 2 * v, 2 * v + 1});
    z.projectors.push_back(pi);
    z.simulated.push_back(sim);
  }
  std::array<int, 3> perm{0, 1, 2};
  z.honest = Mat::Zero(pow2(z.m), pow2(z.m));
  do {
    Eigen::Index x = 0;
    for (int i = 0; i < vertices; ++i) x |= static_cast<Eigen::Index>(perm[col[i]]) << (2 * i);
    z.honest(x, x) += 1.0 / 6;
  } while (std::next_permutation(perm.begin(), perm.end()));
  z.c = pcp_value(z, z.honest);
  z.s = pcp_soundness(z);
  z.zk_bound = satisfied(col) == static_cast<int>(edges.size()) ? 0.0 : 1.0;
  return z;
}

int TreeLayout::index(const std::string& label) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].label == label) return static_cast<int>(i);
  throw QspError("tree: unknown node '" + label + "'");
}

std::vector<std::string> TreeLayout::leaves() const {
  std::vector<std::string> out;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << beta); ++b) out.push_back(bits_label(b, beta));
  return out;
}

std::string TreeLayout::leaf_of_qubit(int q) const {
  if (q < 0 || q >= s << beta) throw QspError("tree: proof qubit out of range");
  return bits_label(static_cast<std::uint64_t>(q / s), beta);
}

std::vector<int> TreeLayout::prover_wires(int total) const {
  std::vector<int> out;
  const auto& rc = root().c;
  for (int w = 0; w < total; ++w)
    if (std::find(rc.begin(), rc.end(), w) == rc.end()) out.push_back(w);
  return out;
}

TreeLayout tree_layout(const CommitScheme& sch, int beta) {
  sch.validate();
  if (sch.n % 2 != 0 || sch.n < 2) throw QspError("tree: block width must be even");
  if (sch.c_width() * 2 != sch.n) throw QspError("tree: scheme does not halve its message");
  if (beta < 0) throw QspError("tree: negative depth");
  int s = sch.n;
  long width = (static_cast<long>(s) << beta) + static_cast<long>(sch.lam) * ((2L << beta) - 1);
  if (beta > 8 || width > kPureCap) throw QspError("tree: width exceeds the pure-state cap");
  TreeLayout t;
  t.beta = beta;
  t.s = s;
  t.sch = sch;
  t.width = static_cast<int>(width);
  int next_w = s << beta;
  std::vector<std::vector<TreeNode>> levels(beta + 1);
  for (int j = beta; j >= 0; --j) {
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << j); ++b) {
      TreeNode nd;
      nd.label = bits_label(b, j);
      if (j == beta) {
        for (int i = 0; i < s; ++i) nd.m.push_back(static_cast<int>(b) * s + i);
      } else {
        for (const auto& child : {levels[j + 1][2 * b], levels[j + 1][2 * b + 1]})
          nd.m.insert(nd.m.end(), child.c.begin(), child.c.end());
      }
      for (int i = 0; i < sch.lam; ++i) nd.w.push_back(next_w++);
      nd.wires = nd.m;
      nd.wires.insert(nd.wires.end(), nd.w.begin(), nd.w.end());
      for (int x : sch.c_wires) nd.c.push_back(nd.wires[x]);
      for (int x : sch.d_wires) nd.d.push_back(nd.wires[x]);
      levels[j].push_back(nd);
    }
  }
  for (const auto& lv : levels) t.nodes.insert(t.nodes.end(), lv.begin(), lv.end());
  return t;
}

TreeCommitment tree_commit(const CommitScheme& sch, const Vec& proof, int beta, int anc) {
  TreeCommitment tc;
  tc.layout = tree_layout(sch, beta);
  tc.anc = anc;
  int p = tc.layout.s << beta;
  if (anc < 0 || tc.total() > kPureCap) throw QspError("tree_commit: width exceeds the pure-state cap");
  if (proof.size() != pow2(p + anc)) throw QspError("tree_commit: proof width mismatch");
  tc.state = Vec::Zero(pow2(tc.total()));
  Eigen::Index low = pow2(p) - 1;
  for (Eigen::Index x = 0; x < proof.size(); ++x)
    tc.state((x & low) | ((x >> p) << tc.layout.width)) = proof(x);
  for (auto it = tc.layout.nodes.rbegin(); it != tc.layout.nodes.rend(); ++it)
    tc.state = apply_qubits(sch.unitary, tc.state, it->wires);
  return tc;
}

std::vector<std::string> path_of(const std::vector<std::string>& leaves) {
  std::set<std::string> all;
  for (const auto& l : leaves)
    for (size_t k = 0; k <= l.size(); ++k) all.insert(l.substr(0, k));
  std::vector<std::string> out(all.begin(), all.end());
  std::sort(out.begin(), out.end(), label_less);
  return out;
}

TreeOpening local_open(const TreeLayout& t, const std::vector<std::string>& S) {
  for (const auto& l : S) {
    if (static_cast<int>(l.size()) != t.beta || l.find_first_not_of("01") != std::string::npos)
      throw QspError("local_open: '" + l + "' is not a leaf");
  }
  TreeOpening op;
  if (S.empty()) return op;
  op.labels = path_of(S);
  for (const auto& l : op.labels) {
    const auto& d = t.node(l).d;
    op.wires.insert(op.wires.end(), d.begin(), d.end());
  }
  return op;
}

TreeVerifyResult verify_open(const TreeLayout& t, const Vec& state, const TreeOpening& op,
                             const std::vector<std::string>& S) {
  TreeOpening expected = local_open(t, S);
  if (op.labels != expected.labels || op.wires != expected.wires)
    throw QspError("verify_open: opening is not the prefix closure of S");
  int n = log2_exact(state.size(), "verify_open");
  if (n < t.width) throw QspError("verify_open: state narrower than the tree");
  TreeVerifyResult res;
  Vec v = state;
  for (const auto& l : op.labels) {
    const auto& nd = t.node(l);
    v = apply_qubits(t.sch.unitary.adjoint(), v, nd.wires);
    project_zero(v, nd.w);
  }
  res.accept_prob = v.squaredNorm();
  std::vector<std::string> sorted = S;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const auto& l : sorted) {
    const auto& m = t.node(l).m;
    res.revealed_wires.insert(res.revealed_wires.end(), m.begin(), m.end());
  }
  if (!res.revealed_wires.empty()) {
    res.revealed = partial_trace_qubits(v, res.revealed_wires, n);
    if (res.accept_prob > 1e-15) res.revealed /= res.accept_prob;
  }
  res.post = std::move(v);
  return res;
}

int tree_depth_for(int m, int s) {
  if (m < 1 || s < 1) throw QspError("tree_depth_for: bad widths");
  int beta = 0;
  while ((s << beta) < m) ++beta;
  return beta;
}

TreeProver honest_prover(const CommitScheme& sch, const Vec& proof, int beta) {
  int p = sch.n << beta;
  int m = log2_exact(proof.size(), "honest_prover");
  if (m > p) throw QspError("honest_prover: proof wider than the tree");
  Vec padded = Vec::Zero(pow2(p));
  padded.head(proof.size()) = proof;
  TreeProver pr;
  pr.state = tree_commit(sch, padded, beta).state;
  return pr;
}

std::vector<std::string> challenge_leaves(const TreeLayout& t, const PcpSpec& p, int r) {
  std::set<std::string> s;
  for (int x : p.Q(r)) s.insert(t.leaf_of_qubit(x));
  return {s.begin(), s.end()};
}

Json transcript_to_json(const Transcript& t) {
  Json j;
  j["pcp_id"] = t.pcp_id;
  j["scheme_id"] = t.scheme_id;
  j["challenge"] = t.challenge;
  j["accept_prob"] = t.accept_prob;
  j["comm_qubits"] = t.comm_qubits;
  j["root_qubits"] = t.root_qubits;
  j["challenge_bits"] = t.challenge_bits;
  j["opened"] = t.opened;
  j["opening_qubits"] = t.opening_qubits;
  if (t.decision) j["decision"] = *t.decision;
  return j;
}

Transcript squarg_run(const PcpSpec& p, const CommitScheme& sch, const TreeProver& prover, int r) {
  p.validate();
  if (r < 0 || r >= p.challenges()) throw QspError("squarg_run: challenge out of range");
  int beta = tree_depth_for(p.m, sch.n);
  TreeLayout t = tree_layout(sch, beta);
  if (prover.anc < 0 || prover.state.size() != pow2(t.width + prover.anc))
    throw QspError("squarg_run: prover state width mismatch");
  int total = t.width + prover.anc;
  Transcript tr;
  tr.pcp_id = p.id;
  tr.scheme_id = scheme_id(sch);
  tr.challenge = r;
  tr.root_qubits = static_cast<int>(t.root().c.size());
  tr.challenge_bits = p.ell();
  Vec v = prover.state;
  if (!prover.respond.empty()) {
    if (static_cast<int>(prover.respond.size()) != p.challenges())
      throw QspError("squarg_run: one response per challenge required");
    auto allowed = t.prover_wires(total);
    for (const auto& [u, wires] : prover.respond[r])
      for (int w : wires)
        if (std::find(allowed.begin(), allowed.end(), w) == allowed.end())
          throw QspError("squarg_run: prover touched the root commitment");
    v = run_circuit(prover.respond[r], std::move(v));
  }
  auto S = challenge_leaves(t, p, r);
  TreeOpening op = local_open(t, S);
  tr.opened = op.labels;
  tr.opening_qubits = static_cast<int>(op.wires.size());
  tr.comm_qubits = tr.root_qubits + tr.challenge_bits + tr.opening_qubits;
  auto res = verify_open(t, v, op, S);
  tr.accept_prob = apply_qubits(p.projector(r), res.post, p.Q(r)).squaredNorm();
  return tr;
}

Transcript squarg_sample(const PcpSpec& p, const CommitScheme& sch, const TreeProver& prover,
                         Rng& rng) {
  std::uniform_int_distribution<int> pick(0, p.challenges() - 1);
  Transcript tr = squarg_run(p, sch, prover, pick(rng));
  tr.decision = uniform01(rng) < tr.accept_prob;
  return tr;
}

double squarg_accept(const PcpSpec& p, const CommitScheme& sch, const TreeProver& prover) {
  double acc = 0;
  for (int r = 0; r < p.challenges(); ++r) acc += squarg_run(p, sch, prover, r).accept_prob;
  return acc / p.challenges();
}

int squarg_comm_formula(const PcpSpec& p, const CommitScheme& sch, int r) {
  TreeLayout t = tree_layout(sch, tree_depth_for(p.m, sch.n));
  int path = static_cast<int>(path_of(challenge_leaves(t, p, r)).size());
  return sch.n / 2 + p.ell() + path * sch.d_width();
}

Transcript qsigma_run(const ZkPcpSpec& zk, const CommitScheme& sch, const Mat& proof, int r) {
  zk.validate();
  sch.validate();
  if (sch.n != 1) throw QspError("qsigma_run: scheme must commit to one qubit");
  if (proof.rows() != pow2(zk.m)) throw QspError("qsigma_run: proof width mismatch");
  if (r < 0 || r >= zk.challenges()) throw QspError("qsigma_run: challenge out of range");
  int tw = sch.total(), q = zk.q;
  if (q * tw > kPureCap) throw QspError("qsigma_run: opened width exceeds the pure-state cap");
  Transcript tr;
  tr.pcp_id = zk.id;
  tr.scheme_id = scheme_id(sch);
  tr.challenge = r;
  tr.root_qubits = zk.m * sch.c_width();
  tr.challenge_bits = zk.ell();
  tr.opening_qubits = q * sch.d_width();
  tr.comm_qubits = tr.root_qubits + tr.challenge_bits + tr.opening_qubits;
  for (int i : zk.Q(r)) tr.opened.push_back(std::to_string(i));
  // Commitments outside Q_r are never touched again, so only Q_r is simulated.
  Mat rho = partial_trace_qubits(proof, zk.Q(r), zk.m);
  Mat f = psd_factor(rho);
  std::vector<int> msg_wires;
  for (int j = 0; j < q; ++j) msg_wires.push_back(j * tw);
  double acc = 0;
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    Vec v = Vec::Zero(pow2(q * tw));
    for (Eigen::Index x = 0; x < f.rows(); ++x) {
      Eigen::Index idx = 0;
      for (int j = 0; j < q; ++j)
        if ((x >> j) & 1) idx |= pow2(j * tw);
      v(idx) = f(x, k);
    }
    for (int j = 0; j < q; ++j) {
      std::vector<int> block;
      for (int w = 0; w < tw; ++w) block.push_back(j * tw + w);
      v = apply_qubits(sch.unitary, v, block);
    }
    for (int j = 0; j < q; ++j) {
      std::vector<int> block, wreg;
      for (int w = 0; w < tw; ++w) block.push_back(j * tw + w);
      for (int w = 1; w < tw; ++w) wreg.push_back(j * tw + w);
      v = apply_qubits(sch.unitary.adjoint(), v, block);
      project_zero(v, wreg);
    }
    acc += apply_qubits(zk.projector(r), v, msg_wires).squaredNorm();
  }
  tr.accept_prob = acc;
  return tr;
}

double qsigma_accept(const ZkPcpSpec& zk, const CommitScheme& sch, const Mat& proof) {
  double acc = 0;
  for (int r = 0; r < zk.challenges(); ++r) acc += qsigma_run(zk, sch, proof, r).accept_prob;
  return acc / zk.challenges();
}

double zk_view_distance(const ZkPcpSpec& zk, const CommitScheme& sch) {
  zk.validate();
  sch.validate();
  if (sch.n != 1) throw QspError("zk_view_distance: scheme must commit to one qubit");
  if (zk.simulated.size() != zk.queries.size()) throw QspError("zk_view_distance: missing simulator output");
  if (zk.honest.rows() != pow2(zk.m)) throw QspError("zk_view_distance: missing honest proof");
  int tw = sch.total(), q = zk.q, m = zk.m;
  bool hiding = is_replacement(hide_channel(sch));
  // The view mixes over r with orthogonal flags, so its distance is the average.
  double total = 0;
  for (int r = 0; r < zk.challenges(); ++r) {
    const auto& qr = zk.Q(r);
    if (hiding) {
      // Unopened commitments are the same fixed state in both views.
      if (q * tw > kPureCap) throw QspError("zk_view_distance: opened width exceeds cap");
      Mat iso = commit_isometry(sch);
      Mat big = Mat::Ones(1, 1);
      for (int j = 0; j < q; ++j) big = kron(iso, big);
      Mat real = partial_trace_qubits(zk.honest, qr, m);
      total += factor_trace_distance(big * psd_factor(real), big * psd_factor(zk.simulated[r]));
      continue;
    }
    int view_width = m * sch.c_width() + q * sch.d_width();
    if (m * tw > kPureCap || view_width > kMixedCap)
      throw QspError("zk_view_distance: view exceeds the mixed-state cap");
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) {
      bool opened = std::find(qr.begin(), qr.end(), i) != qr.end();
      for (int x : sch.c_wires) keep.push_back(i * tw + x);
      if (opened)
        for (int x : sch.d_wires) keep.push_back(i * tw + x);
    }
    auto view = [&](const Mat& proof) {
      Mat f = psd_factor(proof);
      Mat out = Mat::Zero(pow2(view_width), pow2(view_width));
      for (Eigen::Index k = 0; k < f.cols(); ++k) {
        Vec v = Vec::Zero(pow2(m * tw));
        for (Eigen::Index x = 0; x < f.rows(); ++x) {
          Eigen::Index idx = 0;
          for (int i = 0; i < m; ++i)
            if ((x >> i) & 1) idx |= pow2(i * tw);
          v(idx) = f(x, k);
        }
        for (int i = 0; i < m; ++i) {
          std::vector<int> block;
          for (int w = 0; w < tw; ++w) block.push_back(i * tw + w);
          v = apply_qubits(sch.unitary, v, block);
        }
        out += partial_trace_qubits(v, keep, m * tw);
      }
      return out;
    };
    total += trace_distance(view(zk.honest), view(embed_state(zk.simulated[r], qr, m)));
  }
  return total / zk.challenges();
}

}  // namespace qsp

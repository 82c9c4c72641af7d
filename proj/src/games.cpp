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

#include "qsp/games.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <utility>

namespace qsp {
namespace {

std::vector<std::string> rest_of(const RegisterLayout& l, const std::vector<std::string>& skip) {
  std::vector<std::string> out;
  for (const auto& n : l.names)
    if (std::find(skip.begin(), skip.end(), n) == skip.end()) out.push_back(n);
  return out;
}

std::vector<int> range(int from, int count) {
  std::vector<int> v(count);
  std::iota(v.begin(), v.end(), from);
  return v;
}

Channel identity_channel(int dim) { return Channel{dim, dim, {identity(dim)}}; }

// Mixed state with M as the least significant register.
QuantumState message_first(const QuantumState& s) {
  std::vector<std::string> order = {"M"};
  auto rest = rest_of(s.layout(), {"M"});
  order.insert(order.end(), rest.begin(), rest.end());
  return reorder(s, order).to_mixed();
}

// Sum over Kraus branches K of f(K applied to register M of s).
template <typename F>
Mat kraus_sum(const Channel& ch, const QuantumState& s, F f) {
  Mat acc;
  for (const auto& k : ch.kraus) {
    Mat v = f(apply_matrix(k, s, {"M"}));
    if (acc.size() == 0) acc = v;
    else acc += v;
  }
  return acc;
}

std::vector<std::string> keep_list(const std::string& first, const std::vector<std::string>& rest) {
  std::vector<std::string> k = {first};
  k.insert(k.end(), rest.begin(), rest.end());
  return k;
}

// Zeroes every amplitude whose W wires (n .. total-1) are not all zero.
void project_w0(Vec& v, int n, int total) {
  const Eigen::Index wmask = ((Eigen::Index{1} << total) - 1) ^ ((Eigen::Index{1} << n) - 1);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (i & wmask) v(i) = 0;
}

Vec swap_blocks(const Vec& v, int a, int b, int width, int nq) {
  std::vector<int> perm(nq);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < width; ++i) std::swap(perm[a + i], perm[b + i]);
  return permute_qubits(v, perm);
}

Vec zero_extend(const Vec& psi, int nq) {
  Vec v = Vec::Zero(Eigen::Index{1} << nq);
  v.head(psi.size()) = psi;
  return v;
}

void check_psi(const Vec& psi, int nq, const char* what) {
  if (psi.size() != (Eigen::Index{1} << nq)) throw QspError(std::string(what) + ": state dimension mismatch");
}

void check_op(const Mat& u, int nq, const char* what) {
  Eigen::Index d = Eigen::Index{1} << nq;
  if (u.rows() != d || u.cols() != d) throw QspError(std::string(what) + ": operator dimension mismatch");
}

double pure_pair_advantage(const Vec& a, const Vec& b) {
  double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na == 0 || nb == 0) return 0.25 * (na + nb);
  // (na + nb)^2 - 4|<a|b>|^2 without the cancellation.
  double perp = (b - (a.dot(b) / na) * a).squaredNorm();
  return 0.25 * std::sqrt((na - nb) * (na - nb) + 4 * na * perp);
}

Mat haar_block_unitary(int dim, const std::vector<int>& cls, int target, Rng& rng) {
  // Unitary that is block diagonal for {cls == target} versus the rest.
  std::vector<int> in, out;
  for (int i = 0; i < dim; ++i) (cls[i] == target ? in : out).push_back(i);
  Mat g = Mat::Zero(dim, dim);
  for (const auto* idx : {&in, &out}) {
    if (idx->empty()) continue;
    Mat h = haar_matrix(static_cast<int>(idx->size()), rng);
    for (size_t r = 0; r < idx->size(); ++r)
      for (size_t c = 0; c < idx->size(); ++c) g((*idx)[r], (*idx)[c]) = h(r, c);
  }
  return g;
}

bool is_projector(const Mat& p) {
  return (p - p.adjoint()).norm() <= 1e-9 && (p * p - p).norm() <= 1e-9;
}

bool is_unitary(const Mat& u) { return (u.adjoint() * u - identity(u.rows())).norm() <= 1e-9; }

}  // namespace

std::string mode_name(GameMode m) {
  switch (m) {
    case GameMode::kExact:
      return "exact";
    case GameMode::kFixedAdversary:
      return "fixed_adversary";
    case GameMode::kMonteCarlo:
      return "monte_carlo";
  }
  return "unknown";
}

Json result_to_json(const GameResult& r) {
  Json j;
  j["game"] = r.game;
  j["scheme_id"] = r.scheme_id;
  j["mode"] = mode_name(r.mode);
  j["advantage"] = r.advantage;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  Json h = Json::array();
  for (const auto& v : r.views) h.push_back(matrix_hash(v));
  j["branch_state_hashes"] = h;
  return j;
}

std::string scheme_id(const CommitScheme& sch) { return sch.name + "@" + matrix_hash(sch.unitary); }

Channel bind_channel(const CommitScheme& sch) {
  Mat v = commit_isometry(sch);
  int dc = 1 << sch.c_width(), dd = 1 << sch.d_width(), dm = 1 << sch.n;
  Channel ch{dm, dd, {}};
  for (int c = 0; c < dc; ++c) {
    Mat k(dd, dm);
    for (int d = 0; d < dd; ++d) k.row(d) = v.row(c + dc * d);
    ch.kraus.push_back(std::move(k));
  }
  return ch;
}

Channel hide_channel(const CommitScheme& sch) {
  Mat v = commit_isometry(sch);
  int dc = 1 << sch.c_width(), dd = 1 << sch.d_width(), dm = 1 << sch.n;
  Channel ch{dm, dc, {}};
  for (int d = 0; d < dd; ++d) ch.kraus.push_back(v.middleRows(dc * d, dc));
  return ch;
}

Channel reset_channel(int n, const std::vector<int>& wires) {
  std::uint64_t mask = 0;
  for (int w : wires) {
    if (w < 0 || w >= n) throw QspError("reset_channel: wire out of range");
    mask |= std::uint64_t{1} << w;
  }
  int dim = 1 << n;
  Channel ch{dim, dim, {}};
  // One Kraus operator per setting of the reset wires.
  for (std::uint64_t j = 0; j < (std::uint64_t{1} << n); ++j) {
    if (j & ~mask) continue;
    Mat k = Mat::Zero(dim, dim);
    for (std::uint64_t x = 0; x < std::uint64_t(dim); ++x)
      if ((x & mask) == j) k(x & ~mask, x) = 1;
    ch.kraus.push_back(std::move(k));
  }
  return ch;
}

Channel dephase_channel(int n) {
  int dim = 1 << n;
  Channel ch{dim, dim, {}};
  for (int j = 0; j < dim; ++j) {
    Mat k = Mat::Zero(dim, dim);
    k(j, j) = 1;
    ch.kraus.push_back(std::move(k));
  }
  return ch;
}

Channel twirl_channel(const EncFamily& fam) {
  fam.validate();
  Channel ch{fam.dim, fam.dim, {}};
  double s = 1.0 / std::sqrt(double(fam.keys()));
  for (const auto& u : fam.unitaries) ch.kraus.push_back(u * s);
  return ch;
}

GameResult exact_game(const std::string& game, const std::string& id, const Channel& c0,
                      const Channel& c1, const DiamondOptions& opt) {
  auto d = diamond_distance(c0, c1, opt);
  GameResult r;
  r.game = game;
  r.scheme_id = id;
  r.mode = GameMode::kExact;
  r.advantage = std::clamp(d.value / 4, 0.0, 0.5);
  r.seed = opt.seed;
  r.optimal_input = d.psi;
  Mat rho = d.psi * d.psi.adjoint();
  r.views = {apply_channel_lsb(c0, rho), apply_channel_lsb(c1, rho)};
  return r;
}

GameResult views_game(const std::string& game, const std::string& id, Mat v0, Mat v1) {
  GameResult r;
  r.game = game;
  r.scheme_id = id;
  r.mode = GameMode::kFixedAdversary;
  r.advantage = 0.25 * trace_norm(v0 - v1);
  r.views = {std::move(v0), std::move(v1)};
  return r;
}

std::pair<Mat, Mat> bind_views_with(const CommitScheme& sch, const QuantumState& adv,
                                    const Channel& op) {
  if (op.din != (1 << sch.n) || op.dout != op.din) throw QspError("bind_views: operation must act on M");
  auto o = open_verify(sch, adv);
  auto rest = rest_of(adv.layout(), {"C", "D"});
  std::vector<std::string> names = {"C", "D"};
  std::vector<int> widths = {sch.c_width(), sch.d_width()};
  for (const auto& r : rest) {
    names.push_back(r);
    widths.push_back(adv.layout().width(r));
  }
  RegisterLayout out(names, widths);
  Mat com = committed_unitary(sch);
  auto view = [&](const Channel& ch) {
    return kraus_sum(ch, o.post_state, [&](const QuantumState& s) {
      QuantumState c = relabel(apply_matrix(com, s, {"M", "W"}), out);
      return partial_trace(c, keep_list("D", rest)).mat();
    });
  };
  return {view(identity_channel(op.din)), view(op)};
}

std::pair<Mat, Mat> swap_bind_views(const CommitScheme& sch, const QuantumState& adv) {
  return bind_views_with(sch, adv, reset_channel(sch.n, range(0, sch.n)));
}

GameResult swap_bind_exact(const CommitScheme& sch, const DiamondOptions& opt) {
  auto b = bind_channel(sch);
  return exact_game("swap_bind", scheme_id(sch), b, compose(b, reset_channel(sch.n, range(0, sch.n))),
                    opt);
}

GameResult swap_bind_advantage(const CommitScheme& sch, const QuantumState& adv) {
  auto [v0, v1] = swap_bind_views(sch, adv);
  return views_game("swap_bind", scheme_id(sch), std::move(v0), std::move(v1));
}

GameResult subset_swap_exact(const CommitScheme& sch, const std::vector<int>& wires,
                             const DiamondOptions& opt) {
  auto b = bind_channel(sch);
  return exact_game("subset_swap_bind", scheme_id(sch), b, compose(b, reset_channel(sch.n, wires)),
                    opt);
}

std::pair<Mat, Mat> hide_views(const CommitScheme& sch, const QuantumState& msg) {
  QuantumState m = msg;
  if (!m.layout().has("M")) m = relabel(m, RegisterLayout({"M"}, {sch.n}));
  auto rest = rest_of(m.layout(), {"M"});
  auto view = [&](const Channel& ch) {
    return kraus_sum(ch, m, [&](const QuantumState& s) {
      return partial_trace(commit(sch, s), keep_list("C", rest)).mat();
    });
  };
  return {view(identity_channel(1 << sch.n)), view(reset_channel(sch.n, range(0, sch.n)))};
}

GameResult hide_exact(const CommitScheme& sch, const DiamondOptions& opt) {
  auto h = hide_channel(sch);
  return exact_game("hide", scheme_id(sch), h, compose(h, reset_channel(sch.n, range(0, sch.n))), opt);
}

GameResult hide_advantage(const CommitScheme& sch, const QuantumState& msg) {
  auto [v0, v1] = hide_views(sch, msg);
  return views_game("hide", scheme_id(sch), std::move(v0), std::move(v1));
}

GameResult collapse_bind_exact(const CommitScheme& qbc, const DiamondOptions& opt) {
  auto b = bind_channel(qbc);
  return exact_game("collapse_bind", scheme_id(qbc), b, compose(b, dephase_channel(qbc.n)), opt);
}

GameResult collapse_bind_advantage(const CommitScheme& qbc, const QuantumState& adv) {
  auto [v0, v1] = bind_views_with(qbc, adv, dephase_channel(qbc.n));
  return views_game("collapse_bind", scheme_id(qbc), std::move(v0), std::move(v1));
}

GameResult qbc_hide_advantage(const CommitScheme& qbc, std::uint64_t x0, std::uint64_t x1) {
  if (x0 >> qbc.n || x1 >> qbc.n) throw QspError("qbc_hide: message out of range");
  RegisterLayout ml({"M"}, {qbc.n});
  auto view = [&](std::uint64_t x) {
    return partial_trace(commit(qbc, QuantumState::basis(ml, x)), {"C"}).density();
  };
  return views_game("qbc_hide", scheme_id(qbc), view(x0), view(x1));
}

GameResult qenc_exact(const EncFamily& fam, const DiamondOptions& opt) {
  auto t = twirl_channel(fam);
  return exact_game("qenc", fam.name, t, compose(t, reset_channel(fam.n(), range(0, fam.n()))), opt);
}

GameResult qenc_advantage(const EncFamily& fam, const QuantumState& msg) {
  auto t = twirl_channel(fam);
  QuantumState m = msg;
  if (!m.layout().has("M")) m = relabel(m, RegisterLayout({"M"}, {fam.n()}));
  m = message_first(m);
  Mat v0 = apply_channel_lsb(t, m.mat());
  Mat v1 = apply_channel_lsb(compose(t, reset_channel(fam.n(), range(0, fam.n()))), m.mat());
  return views_game("qenc", fam.name, std::move(v0), std::move(v1));
}

GameResult monte_carlo(const GameResult& exact, int trials, std::uint64_t seed) {
  if (exact.views.size() != 2) throw QspError("monte_carlo: result has no branch views");
  if (trials <= 0) throw QspError("monte_carlo: trials must be positive");
  const Mat& v0 = exact.views[0];
  const Mat& v1 = exact.views[1];
  Mat diff = (v0 - v1 + (v0 - v1).adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(diff);
  Mat p = Mat::Zero(diff.rows(), diff.cols());
  for (Eigen::Index i = 0; i < diff.rows(); ++i)
    if (es.eigenvalues()(i) > 0) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  // Per branch: accept probability and Pr[guess 0 and accept].
  double acc[2] = {v0.trace().real(), v1.trace().real()};
  double g0[2] = {(p * v0).trace().real(), (p * v1).trace().real()};
  long wins = 0;
  for (int i = 0; i < trials; ++i) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(i)};
    Rng rng(ss);
    int b = static_cast<int>(rng() & 1);
    double u = uniform01(rng);
    int guess;
    if (u >= acc[b]) {
      guess = static_cast<int>(rng() & 1);
    } else {
      guess = u < g0[b] ? 0 : 1;
    }
    wins += guess == b;
  }
  GameResult r = exact;
  r.mode = GameMode::kMonteCarlo;
  r.trials = trials;
  r.seed = seed;
  r.advantage = double(wins) / trials - 0.5;
  return r;
}

Mat hermitian_pauli(int n, std::uint64_t r, std::uint64_t s) {
  static const cd phases[4] = {1, cd(0, 1), -1, cd(0, -1)};
  return phases[std::popcount(r & s) % 4] * pauli(n, r, s);
}

GameResult pauli_bind_advantage(const CommitScheme& sch, const PauliStrategy& st) {
  const int t = sch.total();
  const int nq = t + st.aux_width;
  check_psi(st.psi, nq, "pauli_bind");
  const int dr = sch.d_width() + st.aux_width;
  check_op(st.u_plus, dr, "pauli_bind");
  check_op(st.u_minus, dr, "pauli_bind");
  if (st.r >> sch.n || st.s >> sch.n) throw QspError("pauli_bind: Pauli out of range");
  Mat com_dag = committed_unitary(sch).adjoint();
  Mat p = hermitian_pauli(sch.n, st.r, st.s);
  Mat id = identity(p.rows());
  auto win = [&](const Mat& u, double sign) {
    Vec v = apply_qubits(u, st.psi, range(sch.c_width(), dr));
    v = apply_qubits(com_dag, v, range(0, t));
    project_w0(v, sch.n, t);
    v = apply_qubits((id + sign * p) / 2.0, v, range(0, sch.n));
    return v.squaredNorm();
  };
  GameResult r;
  r.game = "pauli_bind";
  r.scheme_id = scheme_id(sch);
  r.mode = GameMode::kFixedAdversary;
  r.advantage = 0.5 * win(st.u_plus, 1) + 0.5 * win(st.u_minus, -1) - 0.5;
  return r;
}

GameResult double_open_advantage(const CommitScheme& sch, const TwoRoundAdversary& adv) {
  const int t = sch.total(), n = sch.n, e = adv.aux_width;
  const int nq = t + e + n;
  check_pure_cap(nq);
  check_psi(adv.psi, t + e, "double_open");
  check_op(adv.u, sch.d_width() + e, "double_open");
  Mat com = committed_unitary(sch);
  Mat com_dag = com.adjoint();
  auto cd = range(0, t);
  auto open = [&](Vec v) {
    v = apply_qubits(com_dag, v, cd);
    project_w0(v, n, t);
    return v;
  };
  auto swap_out = [&](const Vec& v) { return swap_blocks(v, 0, t + e, n, nq); };
  auto recommit = [&](const Vec& v) { return apply_qubits(com, v, cd); };
  auto adversary = [&](const Vec& v) { return apply_qubits(adv.u, v, range(sch.c_width(), sch.d_width() + e)); };
  Vec start = zero_extend(adv.psi, nq);
  Vec a = recommit(swap_out(open(adversary(recommit(open(start))))));
  Vec b = recommit(open(adversary(recommit(swap_out(open(start))))));
  GameResult r;
  r.game = "double_open";
  r.scheme_id = scheme_id(sch);
  r.mode = GameMode::kFixedAdversary;
  r.advantage = pure_pair_advantage(a, b);
  if (nq <= 8) r.views = {a * a.adjoint(), b * b.adjoint()};
  return r;
}

OneRoundAdversary fold_adversary(const TwoRoundAdversary& adv, int c_width, int d_width) {
  const int e = adv.aux_width;
  check_psi(adv.psi, c_width + d_width + e, "fold");
  check_op(adv.u, d_width + e, "fold");
  OneRoundAdversary out;
  out.aux_width = e + 1;
  Vec upsi = apply_qubits(adv.u, adv.psi, range(c_width, d_width + e));
  out.psi = Vec(2 * adv.psi.size());
  out.psi << adv.psi, upsi;
  out.psi /= std::sqrt(2.0);
  const Eigen::Index de = adv.u.rows();
  out.post = Mat::Zero(2 * de, 2 * de);
  out.post.topLeftCorner(de, de) = identity(de);
  out.post.bottomRightCorner(de, de) = adv.u.adjoint();
  Mat plus = Mat::Constant(2, 2, 0.5);
  out.guess0 = kron(plus, identity(de));
  return out;
}

GameResult swap_bind_play(const CommitScheme& sch, const OneRoundAdversary& adv) {
  const int a = adv.aux_width;
  check_psi(adv.psi, sch.total() + a, "swap_bind_play");
  check_op(adv.post, sch.d_width() + a, "swap_bind_play");
  check_op(adv.guess0, sch.d_width() + a, "swap_bind_play");
  std::vector<std::string> names = {"C", "D"};
  std::vector<int> widths = {sch.c_width(), sch.d_width()};
  if (a > 0) {
    names.push_back("A");
    widths.push_back(a);
  }
  auto [v0, v1] = swap_bind_views(sch, QuantumState::pure(RegisterLayout(names, widths), adv.psi));
  Mat p = adv.post.adjoint() * adv.guess0 * adv.post;
  double acc0 = v0.trace().real(), acc1 = v1.trace().real();
  double win0 = (p * v0).trace().real();
  double win1 = acc1 - (p * v1).trace().real();
  GameResult r;
  r.game = "swap_bind_play";
  r.scheme_id = scheme_id(sch);
  r.mode = GameMode::kFixedAdversary;
  r.advantage = 0.5 * ((1 - acc0) / 2 + win0) + 0.5 * ((1 - acc1) / 2 + win1) - 0.5;
  r.views = {std::move(v0), std::move(v1)};
  return r;
}

GameResult oracle_swap_bind_run(const CommitScheme& sch, const OracleAdversary& adv) {
  const int t = sch.total(), n = sch.n, a = adv.aux_width;
  const int nq = t + a + n;
  check_pure_cap(nq);
  check_psi(adv.psi, t + a, "oracle_swap_bind");
  if (adv.oracle_anc < 0 || adv.oracle_anc > a) throw QspError("oracle_swap_bind: oracle ancilla exceeds aux");
  check_op(adv.oracle, n + adv.oracle_anc, "oracle_swap_bind");
  if (!is_unitary(adv.oracle)) throw QspError("oracle_swap_bind: oracle is not unitary");
  if (adv.queries < 0) throw QspError("oracle_swap_bind: negative query budget");
  if (!adv.steps.empty() && static_cast<int>(adv.steps.size()) != adv.queries + 1)
    throw QspError("oracle_swap_bind: need queries + 1 adversary steps");
  for (const auto& s : adv.steps) check_op(s, sch.d_width() + a, "oracle_swap_bind");

  Mat com = committed_unitary(sch);
  Mat com_dag = com.adjoint();
  auto cd = range(0, t);
  auto dr = range(sch.c_width(), sch.d_width() + a);
  auto anc = range(t, adv.oracle_anc);
  auto run = [&](int b) {
    Vec v = apply_qubits(com_dag, zero_extend(adv.psi, nq), cd);
    project_w0(v, n, t);
    if (b) v = swap_blocks(v, 0, t + a, n, nq);
    v = apply_qubits(com, v, cd);
    std::vector<int> targets = b ? range(t + a, n) : range(0, n);
    targets.insert(targets.end(), anc.begin(), anc.end());
    for (int q = 0; q <= adv.queries; ++q) {
      if (!adv.steps.empty()) v = apply_qubits(adv.steps[q], v, dr);
      if (q == adv.queries) break;
      // G_b: the oracle acts only on the valid-opening subspace.
      Vec w = apply_qubits(com_dag, v, cd);
      Vec valid = w;
      project_w0(valid, n, t);
      w += apply_qubits(adv.oracle, valid, targets) - valid;
      v = apply_qubits(com, w, cd);
    }
    return partial_trace_qubits(v, dr, nq);
  };
  GameResult r = views_game("oracle_swap_bind", scheme_id(sch), run(0), run(1));
  r.trials = adv.queries;
  return r;
}

void WPiInstance::validate() const {
  Eigen::Index d = w.rows();
  if (w.cols() != d || pi.rows() != d || pi.cols() != d || u.rows() != d || u.cols() != d ||
      psi.size() != d)
    throw QspError("wpi: dimension mismatch");
  if ((w - w.adjoint()).norm() > 1e-9 || (w * w - identity(d)).norm() > 1e-9)
    throw QspError("wpi: W is not a binary observable");
  if (!is_projector(pi)) throw QspError("wpi: Pi is not a projector");
  if ((w * pi - pi * w).norm() > 1e-9) throw QspError("wpi: W and Pi do not commute");
  if (!is_unitary(u)) throw QspError("wpi: U is not unitary");
}

WPiInstance random_wpi_instance(int dim, Rng& rng) {
  if (dim < 2) throw QspError("wpi: dimension must be at least 2");
  Mat v = haar_matrix(dim, rng);
  Eigen::VectorXd ws(dim), ps(dim);
  for (int i = 0; i < dim; ++i) {
    ws(i) = (rng() & 1) ? 1 : -1;
    ps(i) = (rng() & 1) ? 1 : 0;
  }
  // Keep both W+ Pi and W- Pi nonzero.
  ws(0) = 1;
  ps(0) = 1;
  ws(1) = -1;
  ps(1) = 1;
  WPiInstance inst;
  inst.w = v * ws.cast<cd>().asDiagonal() * v.adjoint();
  inst.pi = v * ps.cast<cd>().asDiagonal() * v.adjoint();
  inst.u = haar_matrix(dim, rng);
  inst.psi = random_state(dim, rng);
  return inst;
}

double mapping_advantage(const WPiInstance& inst) { return mapping_advantage(inst, inst.u); }

double mapping_advantage(const WPiInstance& inst, const Mat& u) {
  inst.validate();
  Mat id = identity(inst.w.rows());
  Mat wp = (id + inst.w) / 2.0, wm = (id - inst.w) / 2.0;
  return (wm * inst.pi * u * wp * inst.pi * inst.psi).squaredNorm();
}

double distinguishing_advantage(const WPiInstance& inst, const Mat& d) {
  inst.validate();
  Vec p = inst.pi * inst.psi;
  Vec wp = inst.w * p;
  return 0.5 * std::abs(p.dot(d * p).real() - wp.dot(d * wp).real());
}

DistinguisherPair map_to_distinguisher(const WPiInstance& inst) {
  inst.validate();
  const Eigen::Index dim = inst.w.rows();
  Mat id = identity(dim);
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  Mat ctl_u = kron(p0, id) + kron(p1, inst.u);
  Vec psi_plus = (id + inst.w) / 2.0 * inst.pi * inst.psi;
  Vec start(2 * dim);
  start << psi_plus, psi_plus;
  start /= std::sqrt(2.0);
  DistinguisherPair out;
  out.inst.w = kron(identity(2), inst.w);
  out.inst.pi = kron(identity(2), inst.pi);
  out.inst.u = kron(identity(2), inst.u);
  out.inst.psi = ctl_u * start;
  out.inst.b_qubits = inst.b_qubits + 1;
  Mat d = ctl_u * kron(Mat::Constant(2, 2, 0.5), id) * ctl_u.adjoint();
  out.d = Projector((d + d.adjoint()) / 2.0);
  return out;
}

UnitaryOp distinguisher_to_map(const WPiInstance& inst, const Projector& d) {
  inst.validate();
  if (d.matrix.rows() != inst.w.rows()) throw QspError("wpi: distinguisher dimension mismatch");
  return UnitaryOp(identity(d.matrix.rows()) - 2.0 * d.matrix, "reflect");
}

void AdmissibleInstance::validate() const {
  Eigen::Index d = u.rows();
  for (const Mat* m : {&u, &pi0, &pi1, &g0, &g1})
    if (m->rows() != d || m->cols() != d) throw QspError("admissible: dimension mismatch");
  if (psi.size() != d) throw QspError("admissible: state dimension mismatch");
  if (!is_projector(pi0) || !is_projector(pi1)) throw QspError("admissible: not a projector");
  if ((pi0 * pi1).norm() > 1e-9) throw QspError("admissible: projectors are not orthogonal");
  if (!is_unitary(u) || !is_unitary(g0) || !is_unitary(g1)) throw QspError("admissible: not unitary");
  if ((g0 * pi0 - pi0 * g0).norm() > 1e-9 || (g1 * pi1 - pi1 * g1).norm() > 1e-9)
    throw QspError("admissible: oracle branch does not commute with its projector");
}

Mat AdmissibleInstance::g() const {
  Mat id = identity(u.rows());
  return pi0 * g0 + pi1 * g1 + (id - pi0 - pi1);
}

AdmissibleInstance random_admissible_instance(int dim, Rng& rng) {
  if (dim < 2) throw QspError("admissible: dimension must be at least 2");
  std::vector<int> cls(dim);
  for (int i = 0; i < dim; ++i) cls[i] = static_cast<int>(rng() % 3);
  cls[0] = 0;
  cls[1] = 1;
  Mat v = haar_matrix(dim, rng);
  auto proj = [&](int c) {
    Eigen::VectorXd diag(dim);
    for (int i = 0; i < dim; ++i) diag(i) = cls[i] == c ? 1 : 0;
    return Mat(v * diag.cast<cd>().asDiagonal() * v.adjoint());
  };
  AdmissibleInstance inst;
  inst.pi0 = proj(0);
  inst.pi1 = proj(1);
  inst.g0 = v * haar_block_unitary(dim, cls, 0, rng) * v.adjoint();
  inst.g1 = v * haar_block_unitary(dim, cls, 1, rng) * v.adjoint();
  inst.u = haar_matrix(dim, rng);
  inst.psi = random_state(dim, rng);
  return inst;
}

double admissible_eps(const AdmissibleInstance& inst, int t) {
  inst.validate();
  if (t < 0 || t > 6) throw QspError("admissible: t must be in [0, 6]");
  Mat id = identity(inst.u.rows());
  Mat g0t = inst.pi0 * inst.g0 + (id - inst.pi0);
  Mat ug = inst.u * g0t;
  double best = 0;
  Vec vs = inst.pi0 * inst.psi;
  for (int s = 0; s <= t; ++s) {
    Vec vr = vs;
    for (int r = 0; r <= t; ++r) {
      Vec vq = inst.pi0 * vr;
      for (int q = 0; q <= t; ++q) {
        best = std::max(best, (inst.pi1 * vq).norm());
        vq = inst.u * vq;
      }
      vr = g0t * vr;
    }
    vs = ug * vs;
  }
  return best;
}

BoundCheck admissible_bound_check(const AdmissibleInstance& inst, int t) {
  BoundCheck out;
  out.eps = admissible_eps(inst, t);
  Mat ug = inst.u * inst.g();
  Vec v = inst.pi0 * inst.psi;
  for (int i = 0; i < t; ++i) v = ug * v;
  out.lhs = (inst.pi1 * v).norm();
  out.rhs = 4.0 * t * t * out.eps;
  out.holds = out.lhs <= out.rhs + 1e-8;
  return out;
}

namespace {

std::pair<Mat, Mat> honest_views(const InteractiveRounds& ir, const QuantumState& msg,
                                 const std::string& keep) {
  QuantumState m = msg;
  if (!m.layout().has("M")) m = relabel(m, RegisterLayout({"M"}, {ir.n}));
  auto rest = rest_of(m.layout(), {"M"});
  auto view = [&](const Channel& ch) {
    return kraus_sum(ch, m, [&](const QuantumState& s) {
      return partial_trace(replay_interactive(ir, s), keep_list(keep, rest)).mat();
    });
  };
  return {view(identity_channel(1 << ir.n)), view(reset_channel(ir.n, range(0, ir.n)))};
}

}  // namespace

std::pair<Mat, Mat> hon_hide_views(const InteractiveRounds& ir, const QuantumState& msg) {
  return honest_views(ir, msg, "C");
}

std::pair<Mat, Mat> hon_bind_views(const InteractiveRounds& ir, const QuantumState& msg) {
  return honest_views(ir, msg, "D");
}

GameResult hon_hide_advantage(const InteractiveRounds& ir, const QuantumState& msg) {
  auto [v0, v1] = hon_hide_views(ir, msg);
  return views_game("hon_hide", "interactive", std::move(v0), std::move(v1));
}

GameResult hon_bind_advantage(const InteractiveRounds& ir, const QuantumState& msg) {
  auto [v0, v1] = hon_bind_views(ir, msg);
  return views_game("hon_bind", "interactive", std::move(v0), std::move(v1));
}

}  // namespace qsp

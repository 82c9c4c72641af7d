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

#include "qsp/qsc.hpp"

#include <algorithm>
#include <set>

namespace qsp {

void CommitScheme::validate() const {
  if (n < 0 || lam < 0) throw QspError("scheme: negative width");
  if (total() > kSchemeCap) throw QspError("scheme: cap exceeded");
  Eigen::Index dim = Eigen::Index{1} << total();
  if (unitary.rows() != dim || unitary.cols() != dim)
    throw QspError("scheme: unitary size does not match n + lam");
  std::set<int> all;
  for (int w : c_wires) all.insert(w);
  for (int w : d_wires) all.insert(w);
  if (all.size() != c_wires.size() + d_wires.size() ||
      static_cast<int>(all.size()) != total() ||
      (!all.empty() && (*all.begin() != 0 || *all.rbegin() != total() - 1)))
    throw QspError("scheme: C and D wires must partition the output wires");
  if ((unitary * unitary.adjoint() - identity(dim)).cwiseAbs().maxCoeff() > 1e-9)
    throw QspError("scheme: commitment matrix is not unitary");
}

CommitScheme make_scheme(int n, int lam, Mat unitary, std::vector<int> c_wires,
                         std::vector<int> d_wires, std::string name) {
  CommitScheme s{n, lam, std::move(unitary), std::move(c_wires), std::move(d_wires),
                 std::move(name)};
  s.validate();
  return s;
}

CommitScheme identity_scheme(int n, int lam) {
  std::vector<int> c, d;
  for (int i = 0; i < n; ++i) d.push_back(i);
  for (int i = n; i < n + lam; ++i) c.push_back(i);
  return make_scheme(n, lam, identity(Eigen::Index{1} << (n + lam)), c, d,
                     lam == 0 ? "reveal" : "identity");
}

CommitScheme reveal_scheme(int n) { return identity_scheme(n, 0); }

CommitScheme random_scheme(int n, int lam, int c_width, Rng& rng) {
  int total = n + lam;
  if (c_width < 0 || c_width > total) throw QspError("random_scheme: bad c_width");
  std::vector<int> wires(total);
  for (int i = 0; i < total; ++i) wires[i] = i;
  std::shuffle(wires.begin(), wires.end(), rng);
  std::vector<int> c(wires.begin(), wires.begin() + c_width);
  std::vector<int> d(wires.begin() + c_width, wires.end());
  std::sort(c.begin(), c.end());
  std::sort(d.begin(), d.end());
  return make_scheme(n, lam, haar_matrix(1 << total, rng), c, d, "random");
}

Mat committed_unitary(const CommitScheme& sch) {
  std::vector<int> perm = sch.c_wires;
  perm.insert(perm.end(), sch.d_wires.begin(), sch.d_wires.end());
  return permute_rows(sch.unitary, perm);
}

Mat commit_isometry(const CommitScheme& sch) {
  return committed_unitary(sch).leftCols(Eigen::Index{1} << sch.n);
}

RegisterLayout cd_layout(const CommitScheme& sch) {
  return RegisterLayout({"C", "D"}, {sch.c_width(), sch.d_width()});
}

namespace {

std::vector<std::string> others(const RegisterLayout& l, const std::vector<std::string>& skip) {
  std::vector<std::string> out;
  for (const auto& name : l.names)
    if (std::find(skip.begin(), skip.end(), name) == skip.end()) out.push_back(name);
  return out;
}

}  // namespace

QuantumState commit(const CommitScheme& sch, const QuantumState& msg) {
  QuantumState s = msg;
  if (!s.layout().has("M")) {
    if (s.num_qubits() != sch.n) throw QspError("commit: message width mismatch");
    s = relabel(s, RegisterLayout({"M"}, {sch.n}));
  }
  if (s.layout().width("M") != sch.n) throw QspError("commit: message width mismatch");
  if (s.layout().has("W") || s.layout().has("C") || s.layout().has("D"))
    throw QspError("commit: message state uses a reserved register name");
  auto rest = others(s.layout(), {"M"});
  s = append_zero(s, "W", sch.lam);
  std::vector<std::string> order = {"M", "W"};
  order.insert(order.end(), rest.begin(), rest.end());
  s = reorder(s, order);
  s = apply_matrix(committed_unitary(sch), s, {"M", "W"});
  std::vector<std::string> names = {"C", "D"};
  std::vector<int> widths = {sch.c_width(), sch.d_width()};
  for (const auto& r : rest) {
    names.push_back(r);
    widths.push_back(s.layout().width(r));
  }
  return relabel(s, RegisterLayout(names, widths));
}

OpeningResult open_verify(const CommitScheme& sch, const QuantumState& joint) {
  if (!joint.layout().has("C") || !joint.layout().has("D"))
    throw QspError("open_verify: joint state needs C and D registers");
  if (joint.layout().width("C") != sch.c_width() || joint.layout().width("D") != sch.d_width())
    throw QspError("open_verify: width mismatch");
  auto rest = others(joint.layout(), {"C", "D"});
  std::vector<std::string> order = {"C", "D"};
  order.insert(order.end(), rest.begin(), rest.end());
  QuantumState s = reorder(joint, order);
  s = apply_matrix(committed_unitary(sch).adjoint(), s, {"C", "D"});
  std::vector<std::string> names = {"M", "W"};
  std::vector<int> widths = {sch.n, sch.lam};
  for (const auto& r : rest) {
    names.push_back(r);
    widths.push_back(s.layout().width(r));
  }
  s = relabel(s, RegisterLayout(names, widths));
  Mat p0 = zero_projector(sch.lam);
  OpeningResult out;
  out.post_state = apply_matrix(p0, s, {"W"});
  out.accept_prob = out.post_state.is_pure() ? out.post_state.vec().squaredNorm()
                                             : out.post_state.mat().trace().real();
  QuantumState m = partial_trace(out.post_state, {"M"});
  Mat rho = m.mat();
  if (out.accept_prob > 1e-300) rho /= out.accept_prob;
  out.message_state = QuantumState::mixed(m.layout(), rho);
  return out;
}

CommitScheme dual(const CommitScheme& sch) {
  CommitScheme d = sch;
  std::swap(d.c_wires, d.d_wires);
  d.name = sch.name.rfind("dual(", 0) == 0 && sch.name.back() == ')'
               ? sch.name.substr(5, sch.name.size() - 6)
               : "dual(" + sch.name + ")";
  return d;
}

CommitScheme parallel(const std::vector<CommitScheme>& schemes) {
  if (schemes.empty()) throw QspError("parallel: empty list");
  if (schemes.size() == 1) return schemes[0];
  int n = 0, lam = 0;
  for (const auto& s : schemes) {
    n += s.n;
    lam += s.lam;
  }
  if (n + lam > kSchemeCap) throw QspError("parallel: cap exceeded");
  // canon(i, w): canonical wire of component i's local wire w, with all
  // message wires first and all ancilla wires after.
  std::vector<std::vector<int>> canon(schemes.size());
  int m_off = 0, w_off = n;
  for (size_t i = 0; i < schemes.size(); ++i) {
    for (int w = 0; w < schemes[i].n; ++w) canon[i].push_back(m_off + w);
    for (int w = 0; w < schemes[i].lam; ++w) canon[i].push_back(w_off + w);
    m_off += schemes[i].n;
    w_off += schemes[i].lam;
  }
  std::vector<int> canon_of_block;
  Mat blk = identity(1);
  std::vector<int> c, d;
  for (size_t i = 0; i < schemes.size(); ++i) {
    canon_of_block.insert(canon_of_block.end(), canon[i].begin(), canon[i].end());
    blk = kron(schemes[i].unitary, blk);
    for (int w : schemes[i].c_wires) c.push_back(canon[i][w]);
    for (int w : schemes[i].d_wires) d.push_back(canon[i][w]);
  }
  Mat p = permutation_matrix(canon_of_block);
  std::string name = "parallel(";
  for (size_t i = 0; i < schemes.size(); ++i) name += (i ? "," : "") + schemes[i].name;
  return make_scheme(n, lam, p.adjoint() * blk * p, c, d, name + ")");
}

namespace {

void require_held(const std::vector<int>& wires, const std::set<int>& held, const char* what) {
  for (int w : wires)
    if (!held.count(w)) throw QspError(std::string("rounds: ") + what + " touches a wire it does not hold");
}

void check_op(const Mat& op, const std::vector<int>& wires) {
  if (op.rows() != (Eigen::Index{1} << wires.size()) || op.cols() != op.rows())
    throw QspError("rounds: operation width does not match its wires");
  if ((op * op.adjoint() - identity(op.rows())).cwiseAbs().maxCoeff() > 1e-9)
    throw QspError("rounds: operation is not unitary");
}

}  // namespace

Ownership validate_rounds(const InteractiveRounds& ir) {
  int total = ir.n + ir.lam;
  std::set<int> recv(ir.receiver_initial.begin(), ir.receiver_initial.end());
  for (int w : recv)
    if (w < ir.n || w >= total) throw QspError("rounds: receiver may only start with ancilla wires");
  std::set<int> send;
  for (int w = 0; w < total; ++w)
    if (!recv.count(w)) send.insert(w);
  for (const auto& r : ir.rounds) {
    check_op(r.receiver_op, r.receiver_wires);
    check_op(r.sender_op, r.sender_wires);
    require_held(r.receiver_wires, recv, "receiver operation");
    require_held(r.to_sender, recv, "receiver message");
    for (int w : r.to_sender) {
      recv.erase(w);
      send.insert(w);
    }
    require_held(r.sender_wires, send, "sender operation");
    require_held(r.to_receiver, send, "sender message");
    for (int w : r.to_receiver) {
      send.erase(w);
      recv.insert(w);
    }
  }
  return {std::vector<int>(recv.begin(), recv.end()), std::vector<int>(send.begin(), send.end())};
}

CommitScheme compile_interactive(const InteractiveRounds& ir, std::string name) {
  Ownership own = validate_rounds(ir);
  int total = ir.n + ir.lam;
  if (total > kSchemeCap) throw QspError("compile_interactive: cap exceeded");
  Mat u = identity(Eigen::Index{1} << total);
  for (const auto& r : ir.rounds) {
    u = embed(r.receiver_op, r.receiver_wires, total) * u;
    u = embed(r.sender_op, r.sender_wires, total) * u;
  }
  return make_scheme(ir.n, ir.lam, u, own.receiver, own.sender, std::move(name));
}

QuantumState replay_interactive(const InteractiveRounds& ir, const QuantumState& msg) {
  Ownership own = validate_rounds(ir);
  QuantumState s = msg;
  if (!s.layout().has("M")) s = relabel(s, RegisterLayout({"M"}, {ir.n}));
  if (s.layout().width("M") != ir.n) throw QspError("replay: message width mismatch");
  auto rest = others(s.layout(), {"M"});
  s = append_zero(s, "W", ir.lam);
  std::vector<std::string> order = {"M", "W"};
  order.insert(order.end(), rest.begin(), rest.end());
  s = reorder(s, order);
  // Work wire by wire so each party's action is explicit.
  std::vector<std::string> names;
  std::vector<int> widths;
  for (int w = 0; w < ir.n + ir.lam; ++w) {
    names.push_back("w" + std::to_string(w));
    widths.push_back(1);
  }
  for (const auto& r : rest) {
    names.push_back(r);
    widths.push_back(s.layout().width(r));
  }
  s = relabel(s, RegisterLayout(names, widths));
  auto labels = [](const std::vector<int>& ws) {
    std::vector<std::string> out;
    for (int w : ws) out.push_back("w" + std::to_string(w));
    return out;
  };
  for (const auto& r : ir.rounds) {
    s = apply_matrix(r.receiver_op, s, labels(r.receiver_wires));
    s = apply_matrix(r.sender_op, s, labels(r.sender_wires));
  }
  std::vector<std::string> final_order = labels(own.receiver);
  auto snd = labels(own.sender);
  final_order.insert(final_order.end(), snd.begin(), snd.end());
  final_order.insert(final_order.end(), rest.begin(), rest.end());
  s = reorder(s, final_order);
  std::vector<std::string> out_names = {"C", "D"};
  std::vector<int> out_widths = {static_cast<int>(own.receiver.size()),
                                 static_cast<int>(own.sender.size())};
  for (const auto& r : rest) {
    out_names.push_back(r);
    out_widths.push_back(msg.layout().width(r));
  }
  return relabel(s, RegisterLayout(out_names, out_widths));
}

InteractiveRounds one_round(const CommitScheme& sch) {
  InteractiveRounds ir;
  ir.n = sch.n;
  ir.lam = sch.lam;
  Round r;
  r.receiver_op = identity(1);
  std::vector<int> all;
  for (int w = 0; w < sch.total(); ++w) all.push_back(w);
  r.sender_op = sch.unitary;
  r.sender_wires = all;
  r.to_receiver = sch.c_wires;
  ir.rounds.push_back(r);
  return ir;
}

}  // namespace qsp

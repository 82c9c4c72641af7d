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

#include <gtest/gtest.h>

#include <cmath>

#include "qsp/schemes.hpp"

namespace qsp {
namespace {

CommitScheme halving() { return enc_qsc(prg_pad_family(make_toy_prg(1, 4, 8), 2)); }

Cnf sat_cnf() { return parse_cnf("1 2 0\n-1 3 0\n-2 -3 4 0\n4 0\n"); }
Cnf contradiction() { return parse_cnf("1 0\n-1 0\n"); }

Vec basis_vec(int n, Eigen::Index x) {
  Vec v = Vec::Zero(Eigen::Index{1} << n);
  v(x) = 1;
  return v;
}

std::vector<std::vector<std::string>> nonempty_subsets(const std::vector<std::string>& all) {
  std::vector<std::vector<std::string>> out;
  for (unsigned mask = 1; mask < (1u << all.size()); ++mask) {
    std::vector<std::string> s;
    for (size_t i = 0; i < all.size(); ++i)
      if (mask & (1u << i)) s.push_back(all[i]);
    out.push_back(s);
  }
  return out;
}

TEST(ToyPcp, SatisfiableWitnessIsComplete) {
  auto p = toy_pcp(sat_cnf(), 0b1101);
  EXPECT_EQ(p.m, 4);
  EXPECT_EQ(p.challenges(), 4);
  EXPECT_EQ(p.ell(), 2);
  EXPECT_DOUBLE_EQ(p.c, 1.0);
  EXPECT_DOUBLE_EQ(p.s, 1.0);
  for (int r = 0; r < p.challenges(); ++r) EXPECT_EQ(static_cast<int>(p.Q(r).size()), p.q);
}

TEST(ToyPcp, ContradictionSoundnessIsHalf) {
  auto p = toy_pcp(contradiction());
  EXPECT_DOUBLE_EQ(p.s, 0.5);
  EXPECT_DOUBLE_EQ(p.c, 0.5);
}

TEST(ToyPcp, SuperpositionValueIsConvexCombination) {
  auto p = toy_pcp(sat_cnf());
  Rng rng(1);
  Vec psi = random_state(16, rng);
  double mix = 0;
  for (int x = 0; x < 16; ++x) mix += std::norm(psi(x)) * pcp_value(p, basis_vec(4, x));
  EXPECT_NEAR(pcp_value(p, psi), mix, 1e-12);
}

TEST(ToyPcp, RejectsOversizedInstances) {
  EXPECT_THROW(toy_pcp(parse_cnf("1 7 0\n")), QspError);
  EXPECT_THROW(toy_pcp(parse_cnf("1 2 3 4 0\n")), QspError);
  EXPECT_THROW(toy_pcp(contradiction(), 2), QspError);
  EXPECT_THROW(parse_cnf("1 x 0\n"), QspError);
}

TEST(AmplifyPcp, SingleRepetitionIsIdentity) {
  auto p = toy_pcp(sat_cnf());
  auto a = amplify_pcp(p, 1);
  EXPECT_EQ(a.id, p.id);
  EXPECT_EQ(a.queries, p.queries);
}

TEST(AmplifyPcp, TwoRepetitionsSquareSoundness) {
  auto p = toy_pcp(contradiction());
  auto a = amplify_pcp(p, 2);
  EXPECT_EQ(a.q, 2 * p.q);
  EXPECT_EQ(a.challenges(), 4);
  EXPECT_DOUBLE_EQ(a.s, 0.25);
  EXPECT_DOUBLE_EQ(a.c, 0.25);
  EXPECT_NEAR(pcp_value(a, a.honest), 0.25, 1e-12);
  auto b = amplify_pcp(toy_pcp(parse_cnf("1 0\n-1 2 0\n-2 0\n")), 2);
  EXPECT_NEAR(b.s, std::pow(2.0 / 3, 2), 1e-12);
}

TEST(Tree, DepthZeroIsSingleCommit) {
  Rng rng(2);
  auto sch = halving();
  Vec psi = random_state(4, rng);
  auto tc = tree_commit(sch, psi, 0);
  const auto& root = tc.layout.root();
  std::vector<int> perm = root.c;
  perm.insert(perm.end(), root.d.begin(), root.d.end());
  auto c = commit(sch, QuantumState::pure(RegisterLayout({"M"}, {2}), psi));
  EXPECT_LT((permute_qubits(tc.state, perm) - c.vec()).norm(), 1e-12);
}

TEST(Tree, RootWidthIsHalfBlock) {
  auto sch = halving();
  for (int beta = 0; beta <= 2; ++beta) {
    auto t = tree_layout(sch, beta);
    EXPECT_EQ(static_cast<int>(t.root().c.size()), t.s / 2);
    EXPECT_EQ(static_cast<int>(t.nodes.size()), (2 << beta) - 1);
  }
  EXPECT_THROW(tree_layout(enc_qsc(pauli_pad_family(2)), 1), QspError);
}

TEST(Tree, RegisterMapIsExhaustiveAndAcyclic) {
  auto t = tree_layout(halving(), 2);
  std::vector<int> owner(t.width, 0);
  for (const auto& nd : t.nodes) {
    for (int w : nd.w) owner[w]++;
    if (static_cast<int>(nd.label.size()) == t.beta)
      for (int w : nd.m) owner[w]++;
  }
  for (int k : owner) EXPECT_EQ(k, 1);
  for (const auto& nd : t.nodes) {
    if (nd.label.size() == static_cast<size_t>(t.beta)) continue;
    auto c0 = t.node(nd.label + "0").c, c1 = t.node(nd.label + "1").c;
    c0.insert(c0.end(), c1.begin(), c1.end());
    EXPECT_EQ(nd.m, c0);
  }
}

TEST(Tree, HonestOpeningsVerifyForAllSubsets) {
  Rng rng(3);
  auto sch = halving();
  for (int beta = 0; beta <= 2; ++beta) {
    int p = 2 << beta;
    Vec psi = random_state(1 << p, rng);
    auto tc = tree_commit(sch, psi, beta);
    Mat full = psi * psi.adjoint();
    for (const auto& S : nonempty_subsets(tc.layout.leaves())) {
      auto res = verify_open(tc.layout, tc.state, local_open(tc.layout, S), S);
      EXPECT_NEAR(res.accept_prob, 1.0, 1e-9);
      Mat expect = partial_trace_qubits(full, res.revealed_wires, p);
      EXPECT_LT((res.revealed - expect).norm(), 1e-9);
    }
  }
}

TEST(Tree, AllLeavesRevealFullProof) {
  Rng rng(4);
  Vec psi = random_state(16, rng);
  auto tc = tree_commit(halving(), psi, 1);
  auto S = tc.layout.leaves();
  auto res = verify_open(tc.layout, tc.state, local_open(tc.layout, S), S);
  EXPECT_LT((res.revealed - psi * psi.adjoint()).norm(), 1e-9);
}

TEST(Tree, ZeroedDecommitmentMatchesDensityComputation) {
  Rng rng(5);
  auto sch = halving();
  Vec psi = random_state(16, rng);
  auto tc = tree_commit(sch, psi, 1);
  const auto& t = tc.layout;
  const auto& d0 = t.node("0").d;
  int n = t.width;
  // Purified replacement: the old D_0 moves to two fresh prover qubits.
  Vec big = Vec::Zero(Eigen::Index{1} << (n + 2));
  big.head(tc.state.size()) = tc.state;
  for (int k = 0; k < 2; ++k) big = apply_qubits(gates::swap(1), big, {d0[k], n + k});
  std::vector<std::string> S{"0"};
  double got = verify_open(t, big, local_open(t, S), S).accept_prob;

  Mat rho = tc.state * tc.state.adjoint();
  Mat reset = Mat::Zero(rho.rows(), rho.cols());
  for (int k = 0; k < 4; ++k) {
    Mat kr = Mat::Zero(4, 4);
    kr(0, k) = 1;
    Mat e = embed(kr, d0, n);
    reset += e * rho * e.adjoint();
  }
  for (const auto& l : {std::string(""), std::string("0")}) {
    Mat u = embed(sch.unitary.adjoint(), t.node(l).wires, n);
    reset = u * reset * u.adjoint();
    Mat pw = Mat::Zero(rho.rows(), rho.rows());
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      if (!((i >> t.node(l).w[0]) & 1)) pw(i, i) = 1;
    reset = pw * reset * pw;
  }
  double expect = reset.trace().real();
  EXPECT_NEAR(got, expect, 1e-9);
  EXPECT_LT(got, 1 - 1e-3);
}

TEST(Tree, RejectsOpeningsThatAreNotPrefixClosed) {
  auto tc = tree_commit(halving(), basis_vec(4, 3), 1);
  std::vector<std::string> S{"1"};
  auto op = local_open(tc.layout, S);
  auto broken = op;
  broken.labels.erase(broken.labels.begin());
  broken.wires.erase(broken.wires.begin(), broken.wires.begin() + 2);
  EXPECT_THROW(verify_open(tc.layout, tc.state, broken, S), QspError);
  EXPECT_THROW(local_open(tc.layout, {"10"}), QspError);
  EXPECT_EQ(path_of({"01", "00"}), (std::vector<std::string>{"", "0", "00", "01"}));
}

TEST(Tree, OpeningRestoresEntanglementWithReference) {
  auto sch = halving();
  // Proof qubit 0 and the reference qubit (index 4 of the input) form an EPR pair.
  Vec in = Vec::Zero(32);
  in(0) = in(1 | 16) = 1 / std::sqrt(2.0);
  auto tc = tree_commit(sch, in, 1, 1);
  std::vector<std::string> S{"0"};
  auto res = verify_open(tc.layout, tc.state, local_open(tc.layout, S), S);
  EXPECT_NEAR(res.accept_prob, 1.0, 1e-12);
  int n = tc.total();
  Mat got = partial_trace_qubits(res.post, {0, 1, n - 1}, n);
  Mat expect = partial_trace_qubits(in, {0, 1, 4}, 5);
  EXPECT_LT((got - expect).norm(), 1e-12);
}

TEST(Squarg, HonestProverAcceptedWithCompleteness) {
  auto p = toy_pcp(sat_cnf(), 0b1101);
  auto sch = halving();
  int beta = tree_depth_for(p.m, sch.n);
  EXPECT_EQ(beta, 1);
  auto prover = honest_prover(sch, basis_vec(4, 0b1101), beta);
  EXPECT_GE(squarg_accept(p, sch, prover), p.c - 1e-9);
}

TEST(Squarg, HonestAcceptanceEqualsProofValue) {
  auto p = toy_pcp(sat_cnf());
  auto sch = halving();
  Rng rng(6);
  for (int i = 0; i < 5; ++i) {
    Vec psi = random_state(16, rng);
    auto prover = honest_prover(sch, psi, 1);
    EXPECT_NEAR(squarg_accept(p, sch, prover), pcp_value(p, psi), 1e-9);
  }
}

TEST(Squarg, BasisProofsOnContradictionBoundedBySoundness) {
  auto p = toy_pcp(contradiction());
  auto sch = halving();
  for (int x = 0; x < 2; ++x) {
    auto prover = honest_prover(sch, basis_vec(1, x), 0);
    EXPECT_LE(squarg_accept(p, sch, prover), p.s + 1e-9);
  }
}

TEST(Squarg, CommunicationMatchesClosedForm) {
  auto sch = halving();
  for (const auto& cnf : {sat_cnf(), contradiction(), parse_cnf("1 6 0\n-2 3 0\n5 -4 0\n")}) {
    auto p = toy_pcp(cnf);
    int beta = tree_depth_for(p.m, sch.n);
    auto prover = honest_prover(sch, basis_vec(p.m, 0), beta);
    for (int r = 0; r < p.challenges(); ++r) {
      auto tr = squarg_run(p, sch, prover, r);
      EXPECT_EQ(tr.comm_qubits, squarg_comm_formula(p, sch, r));
      EXPECT_EQ(tr.root_qubits, 1);
      EXPECT_EQ(tr.opening_qubits, static_cast<int>(tr.opened.size()) * sch.d_width());
    }
  }
}

TEST(Squarg, AdversarialResponsesAndErrors) {
  auto p = toy_pcp(sat_cnf(), 0b1101);
  auto sch = halving();
  auto prover = honest_prover(sch, basis_vec(4, 0b1101), 1);
  auto t = tree_layout(sch, 1);
  prover.respond.assign(p.challenges(), Circuit{{gates::X(), {t.node("").d[0]}}});
  prover.id = "flip";
  double a = squarg_accept(p, sch, prover);
  EXPECT_GE(a, 0.0);
  EXPECT_LT(a, 1 - 1e-3);
  prover.respond.assign(p.challenges(), Circuit{{gates::X(), {t.root().c[0]}}});
  EXPECT_THROW(squarg_run(p, sch, prover, 0), QspError);
  TreeProver narrow{basis_vec(3, 0), 0, {}, "narrow"};
  EXPECT_THROW(squarg_run(p, sch, narrow, 0), QspError);
}

TEST(Squarg, SampledTranscriptsAreDeterministic) {
  auto p = toy_pcp(sat_cnf());
  auto sch = halving();
  auto prover = honest_prover(sch, basis_vec(4, 5), 1);
  Rng a(9), b(9);
  for (int i = 0; i < 5; ++i) {
    auto ta = squarg_sample(p, sch, prover, a), tb = squarg_sample(p, sch, prover, b);
    EXPECT_EQ(ta.challenge, tb.challenge);
    EXPECT_EQ(ta.decision, tb.decision);
    EXPECT_EQ(transcript_to_json(ta).dump(), transcript_to_json(tb).dump());
  }
}

TEST(ZkPcp, TriangleIsCompleteAndPerfectlySimulatable) {
  auto z = toy_zk_pcp(3, {{0, 1}, {1, 2}, {0, 2}}, std::vector<int>{0, 1, 2});
  EXPECT_EQ(z.m, 6);
  EXPECT_NEAR(z.c, 1.0, 1e-12);
  for (int r = 0; r < z.challenges(); ++r) {
    Mat marg = partial_trace_qubits(z.honest, z.Q(r), z.m);
    EXPECT_LT((marg - z.simulated[r]).norm(), 1e-12);
  }
}

TEST(ZkPcp, RejectsBadColorings) {
  std::vector<std::pair<int, int>> tri{{0, 1}, {1, 2}, {0, 2}};
  EXPECT_THROW(toy_zk_pcp(3, tri, std::vector<int>{0, 1, 0}), QspError);
  EXPECT_THROW(toy_zk_pcp(3, tri, std::vector<int>{0, 1, 3}), QspError);
  EXPECT_THROW(toy_zk_pcp(5, tri), QspError);
  EXPECT_THROW(toy_zk_pcp(3, {{0, 0}}), QspError);
}

TEST(ZkPcp, CompleteGraphOnFourSoundness) {
  auto z = toy_zk_pcp(4, parse_graph("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n"));
  EXPECT_NEAR(z.s, 5.0 / 6, 1e-12);
  EXPECT_DOUBLE_EQ(z.zk_bound, 1.0);
}

TEST(QSigma, HidingSchemesGiveIdenticalViews) {
  auto z = toy_zk_pcp(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_LT(zk_view_distance(z, dual(enc_qsc(pauli_pad_family(1)))), 1e-9);
  EXPECT_LT(zk_view_distance(z, reveal_scheme(1)), 1e-9);
}

TEST(QSigma, RevealingSchemeLeaksUnopenedColors) {
  auto z = toy_zk_pcp(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_GT(zk_view_distance(z, dual(reveal_scheme(1))), 0.1);
}

TEST(QSigma, HonestRunAcceptsAndCountsCommitments) {
  auto z = toy_zk_pcp(4, {{0, 1}, {1, 2}, {2, 3}});
  auto sch = dual(enc_qsc(pauli_pad_family(1)));
  EXPECT_GE(qsigma_accept(z, sch, z.honest), z.c - 1e-9);
  auto tr = qsigma_run(z, sch, z.honest, 1);
  EXPECT_EQ(tr.root_qubits, z.m * sch.c_width());
  EXPECT_EQ(tr.opening_qubits, z.q * sch.d_width());
  EXPECT_THROW(qsigma_run(z, halving(), z.honest, 0), QspError);
}

}  // namespace
}  // namespace qsp

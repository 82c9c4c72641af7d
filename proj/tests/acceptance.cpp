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

// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 iff the
// failing criteria are exactly those named with --known-failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qsp/extract.hpp"
#include "qsp/games.hpp"
#include "qsp/protocols.hpp"
#include "qsp/runner.hpp"
#include "qsp/schemes.hpp"

namespace qsp {
namespace {

// Tolerances.
constexpr double kExact = 1e-9;
constexpr double kOracle = 1e-6;
constexpr double kLemma = 1e-8;
constexpr int kHaarMessages = 20;
constexpr int kRandomInstances = 50;
constexpr int kEstRuns = 500;
constexpr int kExtractRuns = 200;
constexpr int kHybridRuns = 200;
constexpr int kOverrideT = 1000;
constexpr double kRepairFloor = 0.9;
constexpr double kLeafFloor = 0.45;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0 means no runtime limit
  std::function<Verdict()> check;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Vec basis_vec(int n, Eigen::Index x) {
  Vec v = Vec::Zero(Eigen::Index{1} << n);
  v(x) = 1;
  return v;
}

double binomial_sigma(double p, int n) { return std::sqrt(p * (1 - p) / n); }

std::vector<std::pair<std::string, CommitScheme>> builtin_schemes() {
  std::vector<std::pair<std::string, CommitScheme>> out;
  for (const auto& e : list_fixtures("scheme")) out.emplace_back(e.id, scheme_fixture(e.id));
  return out;
}

Verdict completeness() {
  Rng rng(101);
  auto schemes = builtin_schemes();
  auto half = scheme_fixture("halving");
  for (int k = 1; k <= 4; ++k) schemes.emplace_back("md" + std::to_string(k), md_extend(half, k));
  double acc = 1, fid = 1;
  for (const auto& [id, sch] : schemes) {
    RegisterLayout l({"M"}, {sch.n});
    for (int i = 0; i < kHaarMessages; ++i) {
      auto msg = QuantumState::pure(l, random_state(1 << sch.n, rng));
      auto r = open_verify(sch, commit(sch, msg));
      acc = std::min(acc, r.accept_prob);
      fid = std::min(fid, fidelity(msg, r.message_state));
    }
  }
  for (int beta = 0; beta <= 2; ++beta) {
    int p = half.n << beta;
    for (int i = 0; i < kHaarMessages; ++i) {
      Vec psi = random_state(1 << p, rng);
      auto tc = tree_commit(half, psi, beta);
      auto S = tc.layout.leaves();
      auto r = verify_open(tc.layout, tc.state, local_open(tc.layout, S), S);
      acc = std::min(acc, r.accept_prob);
      fid = std::min(fid, (psi.adjoint() * r.revealed * psi)(0).real());
    }
  }
  return {acc >= 1 - kExact && fid >= 1 - kExact,
          std::to_string(schemes.size() + 3) + " schemes, min accept " + fmt("%.12f", acc) +
              ", min fidelity " + fmt("%.12f", fid)};
}

Verdict duality() {
  Rng rng(102);
  double worst = 0;
  auto schemes = builtin_schemes();
  for (const auto& [id, sch] : schemes) {
    auto d = dual(sch);
    RegisterLayout l({"M", "R"}, {sch.n, 1});
    for (int i = 0; i < 10; ++i) {
      auto msg = QuantumState::pure(l, random_state(1 << (sch.n + 1), rng));
      auto [h0, h1] = hide_views(sch, msg);
      auto [b0, b1] = swap_bind_views(d, commit(d, msg));
      worst = std::max({worst, trace_distance(h0, b0), trace_distance(h1, b1)});
    }
  }
  return {worst <= kExact,
          std::to_string(schemes.size()) + " schemes, max view distance " + fmt("%.3e", worst)};
}

Verdict pauli_twirl_binding() {
  double pad = swap_bind_exact(scheme_fixture("pauli-pad")).advantage;
  auto fam = prg_pad_family(make_toy_prg(2, 4, 11), 2);
  double game = swap_bind_exact(enc_qsc(fam)).advantage;
  // Mixture-distance oracle: quarter of the diamond distance between the
  // twirl and the channel that always outputs the twirl of |0>.
  Channel twirl{fam.dim, fam.dim, {}};
  for (const auto& u : fam.unitaries) twirl.kraus.push_back(u / std::sqrt(double(fam.keys())));
  Mat zero = Mat::Zero(fam.dim, fam.dim);
  zero(0, 0) = 1;
  Mat tau0 = Mat::Zero(fam.dim, fam.dim);
  for (const auto& u : fam.unitaries) tau0 += u * zero * u.adjoint() / double(fam.keys());
  double oracle = diamond_distance(twirl, replacement_channel(fam.dim, tau0)).value / 4;
  return {std::abs(pad) <= kExact && std::abs(game - oracle) <= kOracle,
          "pauli-pad " + fmt("%.3e", pad) + ", toy-prg " + fmt("%.9f", game) + " vs oracle " +
              fmt("%.9f", oracle)};
}

Verdict composition() {
  Rng rng(104);
  double slack = 1;
  for (int i = 0; i < kRandomInstances; ++i) {
    auto a = random_scheme(1, 1, 1, rng), b = random_scheme(1, 1, 1, rng);
    double sum = swap_bind_exact(a).advantage + swap_bind_exact(b).advantage;
    slack = std::min(slack, sum - swap_bind_exact(parallel({a, b})).advantage);
  }
  // Domain extension, k = 2: H0-H1 costs k full-message advantages, H1-H2
  // k advantages of swapping the fresh message qubit alone, H2-H3 k of
  // swapping the chaining register.
  const int k = 2;
  auto base = scheme_fixture("halving");
  std::vector<int> chain;
  for (int w = 1; w < base.n; ++w) chain.push_back(w);
  double full = swap_bind_exact(base).advantage;
  double msg = subset_swap_exact(base, {0}).advantage;
  double sub = subset_swap_exact(base, chain).advantage;
  double bound = k * full + k * msg + k * std::min(full, sub);
  double md = swap_bind_exact(md_extend(base, k)).advantage;
  return {slack >= -kExact && md <= bound + kExact,
          "parallel min slack " + fmt("%.3e", slack) + ", md2 " + fmt("%.6f", md) + " <= " +
              fmt("%.6f", bound)};
}

Verdict lemma_duality() {
  Rng rng(105);
  double eq_err = 0, gap1 = 1e300, gap2 = 1e300;
  int below_2 = 0;
  for (int i = 0; i < kRandomInstances; ++i) {
    auto inst = random_wpi_instance(1 << (1 + rng() % 4), rng);
    double eps = mapping_advantage(inst);
    auto pair = map_to_distinguisher(inst);
    eq_err = std::max(eq_err, std::abs(distinguishing_advantage(pair.inst, pair.d.matrix) - eps / 2));

    Mat v = haar_matrix(inst.w.rows(), rng);
    int rank = 1 + static_cast<int>(rng() % (inst.w.rows() - 1));
    Projector dp(v.leftCols(rank) * v.leftCols(rank).adjoint());
    double d = distinguishing_advantage(inst, dp.matrix);
    double map = mapping_advantage(inst, distinguisher_to_map(inst, dp).matrix);
    gap1 = std::min(gap1, map - d * d);
    gap2 = std::min(gap2, map - 2 * d * d);
    below_2 += map < 2 * d * d - 1e-12;
  }
  bool ok = eq_err <= kLemma && gap1 >= -1e-12 && gap2 >= -1e-12;
  return {ok, "(i) max |dist - eps/2| " + fmt("%.3e", eq_err) + "; (ii) min map - eps^2 " +
                  fmt("%.3e", gap1) + ", min map - 2 eps^2 " + fmt("%.3e", gap2) + " (" +
                  std::to_string(below_2) + " below 2 eps^2)"};
}

Verdict lemma_main() {
  Rng rng(106);
  double worst = -1e300;
  int checks = 0;
  for (int i = 0; i < kRandomInstances; ++i) {
    auto inst = random_admissible_instance(4 + static_cast<int>(rng() % 13), rng);
    for (int t = 1; t <= 5; ++t) {
      auto c = admissible_bound_check(inst, t);
      worst = std::max(worst, c.lhs - c.rhs);
      ++checks;
    }
  }
  return {worst <= kLemma, std::to_string(checks) + " checks, max lhs - rhs " + fmt("%.3e", worst)};
}

Verdict squarg() {
  auto sch = scheme_fixture("halving");
  auto sat = pcp_fixture("cnf-sat");
  double honest = squarg_accept(sat, sch, prover_fixture("honest", sat, sch));
  auto unsat = pcp_fixture("cnf-unsat");
  double s = pcp_soundness(unsat), worst = 0;
  for (Eigen::Index x = 0; x < (Eigen::Index{1} << unsat.m); ++x) {
    auto pr = honest_prover(sch, basis_vec(unsat.m, x), tree_depth_for(unsat.m, sch.n));
    worst = std::max(worst, squarg_accept(unsat, sch, pr));
  }
  int mismatched = 0, checked = 0;
  for (const auto& p : {sat, unsat, toy_pcp(parse_cnf("1 6 0\n-2 3 0\n5 -4 0\n"))}) {
    auto pr = honest_prover(sch, basis_vec(p.m, 0), tree_depth_for(p.m, sch.n));
    for (int r = 0; r < p.challenges(); ++r, ++checked)
      mismatched += squarg_run(p, sch, pr, r).comm_qubits != squarg_comm_formula(p, sch, r);
  }
  return {honest >= sat.c - kExact && worst <= s + kExact && mismatched == 0,
          "honest " + fmt("%.12f", honest) + " (c = " + fmt("%g", sat.c) + "), unsat max " +
              fmt("%.12f", worst) + " (s = " + fmt("%g", s) + "), comm " +
              std::to_string(checked - mismatched) + "/" + std::to_string(checked)};
}

Verdict est_repair() {
  EstParams p;  // eps 0.05, delta 0.01, t derived
  double sigma = binomial_sigma(p.delta, kEstRuns);
  Rng rng(108);

  ProjFamily all(std::vector<Mat>(3, identity(2)));
  int high = 0;
  for (int i = 0; i < kEstRuns; ++i) high += est(basis_vec(1, 1), all, p, rng).p_tilde >= 1 - p.eps;
  double f_high = double(high) / kEstRuns;

  auto proj = [&](int dim, int rank) {
    Mat b = haar_matrix(dim, rng).leftCols(rank);
    return Mat(b * b.adjoint());
  };
  ProjFamily fam({proj(4, 2), proj(4, 1), proj(4, 3)});
  Vec s = random_state(4, rng);
  int far = 0;
  for (int i = 0; i < kEstRuns; ++i) {
    auto a = est(s, fam, p, rng);
    far += std::abs(a.p_tilde - est(a.post, fam, p, rng).p_tilde) > p.eps;
  }
  double f_far = double(far) / kEstRuns;

  Mat pi = Mat::Zero(2, 2);
  pi(0, 0) = 1;
  ProjFamily one({pi});
  Mat plus = Mat::Constant(2, 2, 0.5);
  int restored = 0;
  for (int i = 0; i < kEstRuns; ++i) {
    auto e = est(basis_vec(1, 0), one, p, rng);
    double pa = (plus * e.post).squaredNorm();
    Mat d = uniform01(rng) < pa ? plus : Mat(identity(2) - plus);
    Vec x = d * e.post;
    x /= x.norm();
    auto r = repair(x, one, d, p, e.p_tilde, rng);
    restored += est(r.post, one, p, rng).p_tilde >= e.p_tilde - p.eps;
  }
  double f_rep = double(restored) / kEstRuns;
  bool ok = f_high >= 1 - p.delta - 3 * sigma && f_far <= p.delta + 3 * sigma && f_rep >= kRepairFloor;
  return {ok, "t " + std::to_string(p.t()) + ", all-accept " + fmt("%.3f", f_high) + ", drift " +
                  fmt("%.3f", f_far) + " (<= " + fmt("%.4f", p.delta + 3 * sigma) + "), repair " +
                  fmt("%.3f", f_rep)};
}

Verdict extraction() {
  auto p = pcp_fixture("cnf-sat");
  auto sch = scheme_fixture("halving");
  ExtractionContext ctx(p, sch, prover_fixture("honest", p, sch));
  const double gamma = 0.2, q = 0.5;
  const int T = 4;
  double pv = squarg_accept(p, sch, ctx.prover());
  int wins = 0;
  double leaf = 0;
  for (int i = 0; i < kExtractRuns; ++i) {
    auto tr = extract_full(ctx, gamma, q, T, kOverrideT, 9000 + i);
    if (!tr.success) continue;
    ++wins;
    leaf += pcp_value(p, tr.leaves);
  }
  double f = double(wins) / kExtractRuns, target = pv - q - gamma;
  double mean_leaf = wins ? leaf / wins : 0;
  bool ok = f >= target - 3 * binomial_sigma(target, kExtractRuns) && wins > 0 && mean_leaf >= kLeafFloor;
  return {ok, "p " + fmt("%.6f", pv) + ", success " + fmt("%.3f", f) + " (target " + fmt("%.2f", target) +
                  "), mean leaf value " + fmt("%.4f", mean_leaf) + ", t " + std::to_string(kOverrideT)};
}

Verdict hybrids() {
  auto p = pcp_fixture("cnf-sat");
  auto sch = scheme_fixture("halving");
  Vec proof = (basis_vec(4, 0b1101) + basis_vec(4, 0)) / std::sqrt(2.0);
  ExtractionContext ctx(p, sch, honest_prover(sch, proof, 1));
  std::vector<double> f(ctx.node_count() + 1);
  for (int j = 0; j <= ctx.node_count(); ++j) {
    int wins = 0;
    for (int i = 0; i < kHybridRuns; ++i)
      wins += hyb_extract(ctx, j, 0.2, 0.5, 3, kOverrideT, 7000 + i).success;
    f[j] = double(wins) / kHybridRuns;
  }
  bool ok = true;
  std::ostringstream os;
  os << "success by j:";
  for (double x : f) os << " " << fmt("%.3f", x);
  for (int j = 1; j <= ctx.node_count(); ++j) {
    double sigma = std::sqrt((f[j - 1] * (1 - f[j - 1]) + f[j] * (1 - f[j])) / kHybridRuns);
    ok = ok && std::abs(f[j] - f[j - 1]) <= 3 * sigma;
  }
  return {ok, os.str()};
}

Verdict schur() {
  int dim = static_cast<int>(symmetric_basis(2, 2).cols());
  auto ex = schur_expand(EncFamily{5, 2, single_qubit_cliffords(), "clifford"}, 2);
  Rng rng(111);
  double twirl_err = 0, mult_err = 0;
  for (int i = 0; i < 10; ++i) {
    Vec v = random_state(3, rng);
    twirl_err = std::max(twirl_err, trace_distance(twirl(ex, v * v.adjoint()), identity(3) / 3.0));
  }
  for (int i = 0; i < 20; ++i) {
    Mat a = haar_matrix(2, rng), b = haar_matrix(2, rng);
    Mat lhs = schur_expand_unitary(a, 2) * schur_expand_unitary(b, 2);
    mult_err = std::max(mult_err, (lhs - schur_expand_unitary(a * b, 2)).norm());
  }
  return {dim == 3 && ex.dim == 3 && twirl_err <= kExact && mult_err <= kExact,
          "dim " + std::to_string(dim) + ", twirl err " + fmt("%.3e", twirl_err) + ", multiplicative err " +
              fmt("%.3e", mult_err)};
}

Verdict zk_view() {
  auto z = zk_fixture("zk-triangle");
  auto sch = scheme_fixture("pauli-pad-dual");
  double dist = zk_view_distance(z, sch);
  double acc = qsigma_accept(z, sch, z.honest);
  return {dist <= kExact && acc >= z.c - kExact,
          "view distance " + fmt("%.3e", dist) + ", accept " + fmt("%.12f", acc)};
}

}  // namespace
}  // namespace qsp

int main(int argc, char** argv) {
  using namespace qsp;
  std::set<int> known;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--known-failure", known, "criterion expected to fail");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "completeness", 60, completeness},
      {2, "duality", 60, duality},
      {3, "pauli-twirl binding", 0, pauli_twirl_binding},
      {4, "composition bounds", 0, composition},
      {5, "lemma duality", 0, lemma_duality},
      {6, "lemma main", 120, lemma_main},
      {7, "squarg completeness/soundness", 0, squarg},
      {8, "est/repair statistics", 600, est_repair},
      {9, "extraction end-to-end", 1200, extraction},
      {10, "hybrid indistinguishability", 0, hybrids},
      {11, "schur expansion", 0, schur},
      {12, "zk view", 0, zk_view},
  };
  int failed = 0;
  std::set<int> failing;
  for (const auto& c : all) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = c.budget_s == 0 || secs < c.budget_s;
    bool ok = v.pass && in_time;
    failed += !ok;
    if (!ok) failing.insert(c.id);
    std::printf("C%-2d %s  %s: %s [%.1fs%s]\n", c.id, ok ? "PASS" : "FAIL", c.name.c_str(),
                v.detail.c_str(), secs, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  if (!known.empty()) {
    std::printf("known failures:");
    for (int k : known) std::printf(" C%d", k);
    std::printf(" (%s)\n", failing == known ? "as expected" : "MISMATCH");
  }
  return failing == known ? 0 : 1;
}

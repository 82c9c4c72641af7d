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

#ifndef QSP_GAMES_HPP_
#define QSP_GAMES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "qsp/qsc.hpp"
#include "qsp/schemes.hpp"
#include "qsp/serialize.hpp"

namespace qsp {

enum class GameMode { kExact, kFixedAdversary, kMonteCarlo };

std::string mode_name(GameMode m);

/// Advantage is Pr[b' = b] - 1/2. Aborts count as a uniformly random guess.
struct GameResult {
  std::string game;
  std::string scheme_id;
  GameMode mode = GameMode::kExact;
  double advantage = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<Mat> views;  // sub-normalized challenger outputs for b = 0, 1
  Vec optimal_input;       // exact mode: maximizer on (in, ref), in least significant
};

Json result_to_json(const GameResult& r);
std::string scheme_id(const CommitScheme& sch);

// Channels seen by the adversary, as maps from the opened message.
/// M -> D: open, recommit, return D.
Channel bind_channel(const CommitScheme& sch);
/// M -> C: commit, return C.
Channel hide_channel(const CommitScheme& sch);
/// Replaces the message wires in `wires` (indices into M) by |0>.
Channel reset_channel(int n, const std::vector<int>& wires);
Channel dephase_channel(int n);
Channel twirl_channel(const EncFamily& fam);

/// 1/4 of the diamond distance, maximized by alternating optimization.
GameResult exact_game(const std::string& game, const std::string& id, const Channel& c0,
                      const Channel& c1, const DiamondOptions& opt = {});
/// Helstrom advantage of two sub-normalized views.
GameResult views_game(const std::string& game, const std::string& id, Mat v0, Mat v1);

// Swap binding. The adversary state lives on (C, D, extra registers).
GameResult swap_bind_exact(const CommitScheme& sch, const DiamondOptions& opt = {});
GameResult swap_bind_advantage(const CommitScheme& sch, const QuantumState& adv);
/// Views on (D, extras) when the challenger applies `op` to the opened
/// message in branch 1 instead of the swap.
std::pair<Mat, Mat> bind_views_with(const CommitScheme& sch, const QuantumState& adv,
                                    const Channel& op);
std::pair<Mat, Mat> swap_bind_views(const CommitScheme& sch, const QuantumState& adv);
/// Binding game where only the listed message wires are swapped out.
GameResult subset_swap_exact(const CommitScheme& sch, const std::vector<int>& wires,
                             const DiamondOptions& opt = {});

// Hiding. The adversary message lives on (M, extra registers).
GameResult hide_exact(const CommitScheme& sch, const DiamondOptions& opt = {});
GameResult hide_advantage(const CommitScheme& sch, const QuantumState& msg);
std::pair<Mat, Mat> hide_views(const CommitScheme& sch, const QuantumState& msg);

GameResult collapse_bind_exact(const CommitScheme& qbc, const DiamondOptions& opt = {});
GameResult collapse_bind_advantage(const CommitScheme& qbc, const QuantumState& adv);
GameResult qbc_hide_advantage(const CommitScheme& qbc, std::uint64_t x0, std::uint64_t x1);

GameResult qenc_exact(const EncFamily& fam, const DiamondOptions& opt = {});
GameResult qenc_advantage(const EncFamily& fam, const QuantumState& msg);

/// Samples the Helstrom-measured game from its views.
GameResult monte_carlo(const GameResult& exact, int trials, std::uint64_t seed);

/// psi on (C, D, R) with C least significant; u_plus and u_minus act on (D, R).
struct PauliStrategy {
  Vec psi;
  int aux_width = 0;
  Mat u_plus;
  Mat u_minus;
  std::uint64_t r = 0;  // P = i^{|r&s|} X^r Z^s
  std::uint64_t s = 0;
};

Mat hermitian_pauli(int n, std::uint64_t r, std::uint64_t s);
GameResult pauli_bind_advantage(const CommitScheme& sch, const PauliStrategy& st);

/// psi on (C, D, E) with C least significant; u acts on (D, E) between the
/// two openings.
struct TwoRoundAdversary {
  Vec psi;
  int aux_width = 0;
  Mat u;
};

/// Single-opening adversary with a fixed final measurement: after D returns
/// it applies `post` on (D, aux) and guesses 0 on `guess0`.
struct OneRoundAdversary {
  Vec psi;
  int aux_width = 0;
  Mat post;
  Mat guess0;
};

GameResult double_open_advantage(const CommitScheme& sch, const TwoRoundAdversary& adv);
OneRoundAdversary fold_adversary(const TwoRoundAdversary& adv, int c_width, int d_width);
GameResult swap_bind_play(const CommitScheme& sch, const OneRoundAdversary& adv);

/// The oracle applies `oracle` to (M, first oracle_anc aux qubits) of the
/// committed message, or of the swapped-out copy when b = 1. steps[i] acts
/// on (D, aux) before query i; the last step follows the final query.
struct OracleAdversary {
  Vec psi;  // on (C, D, aux)
  int aux_width = 0;
  Mat oracle;
  int oracle_anc = 0;
  int queries = 0;
  std::vector<Mat> steps;  // empty, or queries + 1 unitaries
};

GameResult oracle_swap_bind_run(const CommitScheme& sch, const OracleAdversary& adv);

struct WPiInstance {
  Mat w;
  Mat pi;
  Mat u;
  Vec psi;
  int b_qubits = 0;  // most significant qubits returned to the adversary

  void validate() const;
};

WPiInstance random_wpi_instance(int dim, Rng& rng);
double mapping_advantage(const WPiInstance& inst);
double mapping_advantage(const WPiInstance& inst, const Mat& u);
double distinguishing_advantage(const WPiInstance& inst, const Mat& d);

struct DistinguisherPair {
  WPiInstance inst;  // extended by one control qubit in the most significant position
  Projector d;
};

DistinguisherPair map_to_distinguisher(const WPiInstance& inst);
UnitaryOp distinguisher_to_map(const WPiInstance& inst, const Projector& d);

/// G = pi0 g0 + pi1 g1 + (I - pi0 - pi1).
struct AdmissibleInstance {
  Mat u;
  Vec psi;
  Mat pi0, pi1;
  Mat g0, g1;

  void validate() const;
  Mat g() const;
};

struct BoundCheck {
  double lhs = 0;
  double eps = 0;
  double rhs = 0;
  bool holds = false;
};

AdmissibleInstance random_admissible_instance(int dim, Rng& rng);
/// eps(t) = max over q, r, s <= t of |pi1 U^q pi0 G0~^r (U G0~)^s pi0 psi|.
double admissible_eps(const AdmissibleInstance& inst, int t);
BoundCheck admissible_bound_check(const AdmissibleInstance& inst, int t);

/// Honest interactive games: the challenger runs the whole commit phase on
/// msg (b = 0) or |0> (b = 1).
std::pair<Mat, Mat> hon_hide_views(const InteractiveRounds& ir, const QuantumState& msg);
std::pair<Mat, Mat> hon_bind_views(const InteractiveRounds& ir, const QuantumState& msg);
GameResult hon_hide_advantage(const InteractiveRounds& ir, const QuantumState& msg);
GameResult hon_bind_advantage(const InteractiveRounds& ir, const QuantumState& msg);

}  // namespace qsp

#endif  // QSP_GAMES_HPP_

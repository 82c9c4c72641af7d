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

#include "qsp/extract.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

namespace qsp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::Index pow2(int n) { return Eigen::Index{1} << n; }

double p_tilde_of(int same, int t) { return 2.0 * same / t - 0.5; }

double clamp_open(double p) { return std::clamp(p, 1e-15, 1 - 1e-15); }

// log of C(n, k) p^k (1-p)^(n-k)
double log_binom(int n, int k, double lp, double lq) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * lp +
         (n - k) * lq;
}

int sample_index(const std::vector<double>& w, Rng& rng) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0)) throw QspError("est: sampling from a zero distribution");
  double u = uniform01(rng) * total;
  for (size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u < 0) return static_cast<int>(i);
  }
  for (size_t i = w.size(); i-- > 0;)
    if (w[i] > 0) return static_cast<int>(i);
  return 0;
}

std::vector<double> exp_normalized(const std::vector<double>& lw) {
  double mx = *std::max_element(lw.begin(), lw.end());
  std::vector<double> w(lw.size());
  for (size_t i = 0; i < lw.size(); ++i) w[i] = lw[i] == kNegInf ? 0 : std::exp(lw[i] - mx);
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= s;
  return w;
}

// Applies one measurement in a family of two-dimensional blocks; w holds the
// block weights, rates the per-block probability of repeating the outcome.
bool chain_step(std::vector<double>& w, const std::vector<double>& rates, Rng& rng) {
  double ps = 0;
  for (size_t j = 0; j < w.size(); ++j) ps += w[j] * rates[j];
  bool same = uniform01(rng) < ps;
  double s = 0;
  for (size_t j = 0; j < w.size(); ++j) {
    w[j] *= same ? rates[j] : 1 - rates[j];
    s += w[j];
  }
  if (!(s > 0)) throw QspError("est: chain reached a zero-probability branch");
  for (double& x : w) x /= s;
  return same;
}

std::vector<std::pair<int, int>> cluster(const Eigen::VectorXd& vals, double tol) {
  std::vector<std::pair<int, int>> out;
  int n = static_cast<int>(vals.size());
  int b = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || vals(i) - vals(i - 1) > tol) {
      out.emplace_back(b, i);
      b = i;
    }
  }
  return out;
}

bool label_less(const std::string& a, const std::string& b) {
  return a.size() != b.size() ? a.size() < b.size() : a < b;
}

// Est with the Q register unravelled by a computational-basis measurement.
// branch: -1 unconditioned, 1 keeps estimates >= p_thr, 0 keeps estimates < p_thr.
EstOutcome est_chain(const Vec& u, const ProjFamily& fam, int t, int branch, double p_thr,
                     Rng& rng) {
  const EstSpectrum& sp = fam.spectrum();
  int R = fam.challenges();
  std::vector<Vec> comp;
  std::vector<double> pv, norm2;
  for (const auto& [b, e] : sp.clusters) {
    Mat vj = sp.vecs.middleCols(b, e - b);
    Vec c = vj * (vj.adjoint() * u);
    double n2 = c.squaredNorm();
    if (n2 < 1e-28) continue;
    comp.push_back(c / std::sqrt(n2));
    norm2.push_back(n2);
    pv.push_back(clamp_open(sp.values[b]));
  }
  if (comp.empty()) throw QspError("est: zero input state");
  size_t k = comp.size();

  // Window of the first t outcomes: the first agreement is forced, the rest
  // are independent within each block.
  std::vector<double> pick(k);
  for (size_t j = 0; j < k; ++j)
    pick[j] = norm2[j] * (branch < 0 ? 1.0
                          : branch == 1 ? est_tail(pv[j], t, p_thr)
                                        : 1 - est_tail(pv[j], t, p_thr));
  int js = sample_index(pick, rng);
  int same;
  if (branch < 0) {
    std::binomial_distribution<int> bin(t - 1, pv[js]);
    same = 1 + bin(rng);
  } else {
    double lp = std::log(pv[js]), lq = std::log1p(-pv[js]);
    std::vector<double> lw(t);
    for (int s = 1; s <= t; ++s) {
      bool hi = p_tilde_of(s, t) >= p_thr;
      lw[s - 1] = (hi == (branch == 1)) ? log_binom(t - 1, s - 1, lp, lq) : kNegInf;
    }
    same = 1 + sample_index(exp_normalized(lw), rng);
  }
  std::vector<double> lw(k);
  for (size_t j = 0; j < k; ++j)
    lw[j] = std::log(norm2[j]) + (same - 1) * std::log(pv[j]) + (t - same) * std::log1p(-pv[j]);
  std::vector<double> w = exp_normalized(lw);

  EstOutcome out;
  out.t = t;
  out.same = same;
  out.p_tilde = p_tilde_of(same, t);
  // kind 0 = M_unif (odd steps), 1 = M_win (even steps); b_0 = 1
  int outcome = ((t - same) % 2 == 0) ? 1 : 0;
  int kind = (t % 2 == 1) ? 0 : 1;
  for (int i = t + 1; i <= 2 * t; ++i) {
    kind = (i % 2 == 1) ? 0 : 1;
    if (!chain_step(w, pv, rng)) outcome ^= 1;
  }
  // The last measurement was M_win, so Q is still entangled whatever b_2t
  // says; return to the image of M_unif.
  {
    bool done = false;
    for (int i = 0; i < 2 * t && !done; ++i) {
      kind ^= 1;
      if (!chain_step(w, pv, rng)) outcome ^= 1;
      ++out.tail_steps;
      done = (kind == 0 && outcome == 1);
    }
    out.tail_capped = !done;
  }

  // H-components of the block vectors for each Q basis outcome: top, bottom, r.
  const double r2 = std::sqrt(2.0 * R);
  std::vector<Vec> h(R + 2, Vec::Zero(u.size()));
  for (size_t j = 0; j < k; ++j) {
    if (w[j] == 0) continue;
    double a = std::sqrt(w[j]), p = pv[j];
    const Vec& v = comp[j];
    if (kind == 0 && outcome == 1) {
      h[0] += a * 0.5 * v;
      h[1] += a * 0.5 * v;
      for (int r = 0; r < R; ++r) h[2 + r] += (a / r2) * v;
    } else if (kind == 1 && outcome == 1) {
      double sp1 = std::sqrt(p);
      h[0] += (a * 0.5 / sp1) * v;
      for (int r = 0; r < R; ++r) h[2 + r] += (a / (r2 * sp1)) * (fam.pi(r) * v);
    } else if (kind == 1 && outcome == 0) {
      double sq = std::sqrt(1 - p);
      h[1] += (a * 0.5 / sq) * v;
      for (int r = 0; r < R; ++r) h[2 + r] += (a / (r2 * sq)) * (v - fam.pi(r) * v);
    } else {
      double n = std::sqrt(p * (1 - p));
      h[0] += (a * 0.5 * (1 - p) / n) * v;
      h[1] += (-a * 0.5 * p / n) * v;
      for (int r = 0; r < R; ++r) h[2 + r] += (a / (r2 * n)) * (fam.pi(r) * v - p * v);
    }
  }
  std::vector<double> pq(h.size());
  for (size_t x = 0; x < h.size(); ++x) pq[x] = h[x].squaredNorm();
  int x = sample_index(pq, rng);
  out.post = h[x] / std::sqrt(pq[x]);
  return out;
}

std::vector<std::string> to_vec(const std::set<std::string>& s) {
  std::vector<std::string> v(s.begin(), s.end());
  std::sort(v.begin(), v.end(), label_less);
  return v;
}

Rng step_rng(std::uint64_t seed, std::uint32_t step) {
  std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), step};
  return Rng(sq);
}

using FamilyFn = std::function<const ProjFamily&(const std::set<std::string>&)>;
using AcceptFn = std::function<void(int, Vec&, std::set<std::string>&)>;

ExtractionTrace run_loop(Vec x, double gamma, double q, int T, std::optional<int> override_t,
                         std::uint64_t seed, const FamilyFn& family, const AcceptFn& on_accept,
                         Vec* final_state = nullptr) {
  if (T < 0) throw QspError("extract: negative step count");
  EstParams params = extraction_schedule(gamma, T, override_t);
  ExtractionTrace tr;
  tr.T = T;
  tr.gamma = gamma;
  tr.q = q;
  tr.eps = params.eps;
  tr.delta = params.delta;
  tr.t = params.t();
  tr.override_t = override_t.has_value();
  std::set<std::string> E;
  for (int step = 0; step < T; ++step) {
    Rng rng = step_rng(seed, static_cast<std::uint32_t>(step));
    const ProjFamily& fam = family(E);
    EstOutcome e = est(x, fam, params, rng);
    x = std::move(e.post);
    StepRecord rec;
    rec.t = step;
    rec.p = e.p_tilde;
    rec.tail_capped = e.tail_capped;
    if (e.p_tilde < q) {
      rec.aborted = true;
      rec.E = to_vec(E);
      tr.steps.push_back(rec);
      tr.p_final = e.p_tilde;
      tr.success = false;
      tr.E = to_vec(E);
      if (final_state) *final_state = std::move(x);
      return tr;
    }
    std::uniform_int_distribution<int> pick(0, fam.challenges() - 1);
    int r = pick(rng);
    Vec acc = fam.pi(r) * x;
    double pa = acc.squaredNorm();
    bool accept = uniform01(rng) < pa;
    if (accept && pa < 1e-24) accept = false;
    if (!accept && 1 - pa < 1e-24) accept = true;
    x = accept ? Vec(acc / std::sqrt(pa)) : Vec((x - acc) / std::sqrt(1 - pa));
    if (accept) on_accept(r, x, E);
    const ProjFamily& now = family(E);
    Mat d = accept ? now.pi(r) : Mat(identity(now.dim()) - now.pi(r));
    x = repair(x, now, d, params, e.p_tilde, rng).post;
    rec.r = r;
    rec.accept = accept;
    rec.E = to_vec(E);
    tr.steps.push_back(rec);
  }
  Rng rng = step_rng(seed, static_cast<std::uint32_t>(T));
  EstOutcome e = est(x, family(E), params, rng);
  tr.p_final = e.p_tilde;
  tr.success = e.p_tilde >= q;
  tr.E = to_vec(E);
  if (final_state) *final_state = std::move(e.post);
  return tr;
}

}  // namespace

int EstParams::derived_t() const {
  if (!(eps > 0) || !(delta > 0) || !(delta < 1)) throw QspError("est: eps and delta must be positive");
  double t = std::ceil(2 * std::log2(2 / delta) / (eps * eps));
  if (t > 1e9) return std::numeric_limits<int>::max();
  return std::max(1, static_cast<int>(t));
}

int EstParams::t() const {
  if (override_t) {
    if (*override_t < 1) throw QspError("est: override_t must be positive");
    if (*override_t > kMaxEstSteps) throw QspError("est: override_t exceeds the step cap");
    return *override_t;
  }
  int t = derived_t();
  if (t > kMaxEstSteps) throw QspError("est: schedule infeasible under caps, supply override_t");
  return t;
}

int EstParams::repair_cap() const {
  if (!(delta > 0)) throw QspError("repair: delta must be positive");
  return static_cast<int>(std::ceil(1 / std::sqrt(delta) - 1e-12));
}

void EstParams::validate() const {
  derived_t();
  t();
}

ProjFamily::ProjFamily(std::vector<Mat> pis) : pi_(std::move(pis)) {
  if (pi_.empty()) throw QspError("ProjFamily: empty challenge set");
  Eigen::Index n = pi_.front().rows();
  if (n < 1) throw QspError("ProjFamily: empty register");
  if (n > pow2(kPureCap)) throw QspError("ProjFamily: width exceeds the pure-state cap");
  Mat p = 0.25 * identity(n);
  for (auto& m : pi_) {
    if (m.rows() != n || m.cols() != n) throw QspError("ProjFamily: dimension mismatch");
    double scale = std::max(1.0, m.norm());
    if ((m - m.adjoint()).norm() > 1e-9 * scale || (m * m - m).norm() > 1e-9 * scale)
      throw QspError("ProjFamily: not a projector");
    m = 0.5 * (m + m.adjoint()).eval();
    p += m / (2.0 * static_cast<double>(pi_.size()));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(p);
  auto sp = std::make_shared<EstSpectrum>();
  sp->vecs = es.eigenvectors();
  sp->values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  sp->clusters = cluster(es.eigenvalues(), 1e-9);
  spec_ = std::move(sp);
}

double ProjFamily::success(const Vec& s) const {
  double acc = 0;
  for (const auto& m : pi_) acc += (m * s).squaredNorm();
  return acc / challenges();
}

double est_tail(double pv, int t, double p) {
  pv = clamp_open(pv);
  double lp = std::log(pv), lq = std::log1p(-pv);
  std::vector<double> hi, all;
  for (int s = 1; s <= t; ++s) {
    double l = log_binom(t - 1, s - 1, lp, lq);
    all.push_back(l);
    if (p_tilde_of(s, t) >= p) hi.push_back(l);
  }
  if (hi.empty()) return 0;
  double mx = *std::max_element(all.begin(), all.end());
  double a = 0, b = 0;
  for (double l : all) a += std::exp(l - mx);
  for (double l : hi) b += std::exp(l - mx);
  return std::clamp(b / a, 0.0, 1.0);
}

EstOutcome est(const Vec& s, const ProjFamily& fam, const EstParams& params, Rng& rng) {
  if (s.size() != fam.dim()) throw QspError("est: state dimension mismatch");
  double n = s.norm();
  if (std::abs(n - 1) > 1e-6) throw QspError("est: state is not normalized");
  return est_chain(s / n, fam, params.t(), -1, 0, rng);
}

RepairOutcome repair(const Vec& s, const ProjFamily& fam, const Mat& d, const EstParams& params,
                     double p_target, Rng& rng) {
  if (s.size() != fam.dim() || d.rows() != fam.dim() || d.cols() != fam.dim())
    throw QspError("repair: dimension mismatch");
  if (std::abs(s.norm() - 1) > 1e-6) throw QspError("repair: state is not normalized");
  double in = std::real(s.dot(d * s));
  if (std::abs(in - 1) > 1e-6) throw QspError("repair: state is not in the image of D");
  int t = params.t();
  const EstSpectrum& sp = fam.spectrum();

  // <0|_V Pi_p |0>_V is a function of P: the probability that est reports >= p.
  Eigen::VectorXd g(sp.vecs.cols());
  for (const auto& [b, e] : sp.clusters) {
    double v = est_tail(sp.values[b], t, p_target);
    for (int i = b; i < e; ++i) g(i) = v;
  }
  Mat kmat = sp.vecs * g.asDiagonal() * sp.vecs.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> ds(0.5 * (d + d.adjoint()));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < ds.eigenvalues().size(); ++i)
    if (ds.eigenvalues()(i) > 0.5) cols.push_back(i);
  Mat bd(d.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < cols.size(); ++i) bd.col(static_cast<Eigen::Index>(i)) = ds.eigenvectors().col(cols[i]);
  Mat mr = bd.adjoint() * kmat * bd;
  Eigen::SelfAdjointEigenSolver<Mat> ms(0.5 * (mr + mr.adjoint()));
  Mat wv = bd * ms.eigenvectors();
  Eigen::VectorXd mu = ms.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);

  Vec sd = d * s;
  sd /= sd.norm();
  std::vector<Vec> comp;
  std::vector<double> rate, w;
  for (const auto& [b, e] : cluster(mu, 1e-9)) {
    Mat wj = wv.middleCols(b, e - b);
    Vec c = wj * (wj.adjoint() * sd);
    double n2 = c.squaredNorm();
    if (n2 < 1e-28) continue;
    comp.push_back(c);
    w.push_back(n2);
    rate.push_back(mu(b));
  }
  double tot = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= tot;

  // Types: 0 = B accepts, 1 = B rejects, 2 = A accepts, 3 = A rejects.
  RepairOutcome out;
  int same = 0, flip = 0, type;
  auto step = [&](int from) {
    bool sm = chain_step(w, rate, rng);
    sm ? ++same : ++flip;
    bool was_accept = (from == 0 || from == 2);
    bool now_accept = sm ? was_accept : !was_accept;
    bool to_a = (from <= 1);
    return to_a ? (now_accept ? 2 : 3) : (now_accept ? 0 : 1);
  };
  type = step(0);
  out.immediate = (type == 2);
  int cap = params.repair_cap();
  while (type != 2 && out.rounds < cap) {
    type = step(type);
    type = step(type);
    ++out.rounds;
  }
  out.accepted = (type == 2);

  // Map the final A-type vector through CoherentEst: Pi_p |w,0> equals the
  // estimate-restricted image of |w,0>, scaled by 1/sqrt(mu).
  std::vector<double> lc(comp.size());
  for (size_t j = 0; j < comp.size(); ++j) {
    double es = out.accepted ? same - 1 : same;
    double ef = out.accepted ? flip : flip - 1;
    double l = 0;
    if (es > 0) l += es * (rate[j] > 0 ? std::log(rate[j]) : kNegInf);
    if (ef > 0) l += ef * (rate[j] < 1 ? std::log1p(-rate[j]) : kNegInf);
    lc[j] = 0.5 * l;
  }
  double mx = *std::max_element(lc.begin(), lc.end());
  if (mx == kNegInf) throw QspError("repair: chain reached a zero-probability branch");
  Vec u = Vec::Zero(s.size());
  for (size_t j = 0; j < comp.size(); ++j)
    if (lc[j] != kNegInf) u += std::exp(lc[j] - mx) * comp[j];
  out.post = est_chain(u, fam, t, out.accepted ? 1 : 0, p_target, rng).post;
  return out;
}

Json trace_to_json(const ExtractionTrace& tr) {
  Json j;
  j["T"] = tr.T;
  j["gamma"] = tr.gamma;
  j["q"] = tr.q;
  j["eps"] = tr.eps;
  j["delta"] = tr.delta;
  j["t"] = tr.t;
  j["override_t"] = tr.override_t;
  Json steps = Json::array();
  for (const auto& s : tr.steps) {
    Json r;
    r["t"] = s.t;
    r["p"] = s.p;
    r["r"] = s.r;
    r["accept"] = s.accept;
    r["aborted"] = s.aborted;
    r["tail_capped"] = s.tail_capped;
    r["E"] = s.E;
    steps.push_back(r);
  }
  j["steps"] = steps;
  j["p_final"] = tr.p_final;
  j["success"] = tr.success;
  j["E"] = tr.E;
  return j;
}

EstParams extraction_schedule(double gamma, int T, std::optional<int> override_t) {
  if (!(gamma > 0) || gamma > 1) throw QspError("extract: gamma out of range");
  int tt = std::max(T, 1);
  EstParams p;
  p.eps = gamma / (4.0 * tt);
  p.delta = std::pow(gamma / (16.0 * tt), 2);
  p.override_t = override_t;
  p.t();
  return p;
}

ExtractionTrace bit_extract(const Vec& s, const ProjFamily& fam, double gamma, double q, int T,
                            std::optional<int> override_t, std::uint64_t seed) {
  if (s.size() != fam.dim()) throw QspError("bit_extract: state dimension mismatch");
  return run_loop(
      s, gamma, q, T, override_t, seed,
      [&](const std::set<std::string>&) -> const ProjFamily& { return fam; },
      [](int, Vec&, std::set<std::string>&) {});
}

ExtractionContext::ExtractionContext(PcpSpec pcp, const CommitScheme& sch, TreeProver prover)
    : pcp_(std::move(pcp)), prover_(std::move(prover)) {
  pcp_.validate();
  tree_ = tree_layout(sch, tree_depth_for(pcp_.m, sch.n));
  int base = tree_.width + prover_.anc;
  if (prover_.anc < 0 || prover_.state.size() != pow2(base))
    throw QspError("extract: prover state width mismatch");
  total_ = base + node_count() * tree_.s;
  if (total_ > kPureCap) throw QspError("extract: width exceeds the pure-state cap");
  if (!prover_.respond.empty()) {
    if (static_cast<int>(prover_.respond.size()) != pcp_.challenges())
      throw QspError("extract: one response per challenge required");
    auto allowed = tree_.prover_wires(base);
    for (const auto& c : prover_.respond)
      for (const auto& [u, wires] : c)
        for (int w : wires)
          if (std::find(allowed.begin(), allowed.end(), w) == allowed.end())
            throw QspError("extract: response touches the root commitment");
  }
  int next = base;
  for (const auto& nd : tree_.nodes) {
    std::vector<int> w;
    for (int i = 0; i < tree_.s; ++i) w.push_back(next++);
    mprime_[nd.label] = w;
  }
}

const std::vector<int>& ExtractionContext::mprime(const std::string& label) const {
  auto it = mprime_.find(label);
  if (it == mprime_.end()) throw QspError("extract: unknown node '" + label + "'");
  return it->second;
}

std::vector<std::string> ExtractionContext::path(int r) const {
  if (r < 0 || r >= pcp_.challenges()) throw QspError("extract: challenge out of range");
  return path_of(challenge_leaves(tree_, pcp_, r));
}

Vec ExtractionContext::initial() const {
  Vec v = Vec::Zero(pow2(total_));
  v.head(prover_.state.size()) = prover_.state;
  return v;
}

void ExtractionContext::check_prefix_closed(int r, const std::vector<std::string>& S) const {
  auto p = path(r);
  std::set<std::string> in(S.begin(), S.end());
  for (const auto& l : S) {
    if (std::find(p.begin(), p.end(), l) == p.end())
      throw QspError("swap_recover: '" + l + "' is not on the challenge path");
    if (!l.empty() && !in.count(l.substr(0, l.size() - 1)))
      throw QspError("swap_recover: node set is not prefix-closed");
  }
}

Mat ExtractionContext::respond(const Mat& v, int r, bool inverse) const {
  if (prover_.respond.empty()) return v;
  const Circuit& c = prover_.respond.at(r);
  Mat out = v;
  if (!inverse) {
    for (const auto& [u, wires] : c) out = apply_qubits_left(u, out, wires);
  } else {
    for (auto it = c.rbegin(); it != c.rend(); ++it) out = apply_qubits_left(it->first.adjoint(), out, it->second);
  }
  return out;
}

Mat ExtractionContext::recover_cols(const Mat& v, int r, const std::vector<std::string>& S,
                                    const std::set<std::string>& E, bool inverse) const {
  if (v.rows() != pow2(total_)) throw QspError("swap_recover: state width mismatch");
  check_prefix_closed(r, S);
  std::vector<std::string> order = S;
  std::sort(order.begin(), order.end(), label_less);
  order.erase(std::unique(order.begin(), order.end()), order.end());
  auto swap_perm = [&](const std::string& l) {
    std::vector<int> perm(total_);
    std::iota(perm.begin(), perm.end(), 0);
    const auto& a = tree_.node(l).m;
    const auto& b = mprime(l);
    for (size_t i = 0; i < a.size(); ++i) std::swap(perm[a[i]], perm[b[i]]);
    return perm;
  };
  const Mat& u = tree_.sch.unitary;
  Mat x = v;
  if (!inverse) {
    x = respond(x, r, false);
    for (const auto& l : order) {
      x = apply_qubits_left(u.adjoint(), x, tree_.node(l).wires);
      if (E.count(l)) x = permute_rows(x, swap_perm(l));
    }
  } else {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (E.count(*it)) x = permute_rows(x, swap_perm(*it));
      x = apply_qubits_left(u, x, tree_.node(*it).wires);
    }
    x = respond(x, r, true);
  }
  return x;
}

Mat ExtractionContext::diff_cols(const Mat& v, int r, const std::vector<std::string>& S,
                                 const std::set<std::string>& E, bool inverse) const {
  std::set<std::string> e2 = E;
  e2.insert(S.begin(), S.end());
  if (!inverse) return recover_cols(recover_cols(v, r, S, E, false), r, S, e2, true);
  return recover_cols(recover_cols(v, r, S, e2, false), r, S, E, true);
}

Mat ExtractionContext::pi_cols(const Mat& v, int r, const std::set<std::string>& E) const {
  auto S = path(r);
  Mat x = recover_cols(v, r, S, E, false);
  x = apply_qubits_left(pcp_.projector(r), x, pcp_.Q(r));
  Eigen::Index mask = 0;
  for (const auto& l : S)
    for (int w : tree_.node(l).w) mask |= pow2(w);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (i & mask) x.row(i).setZero();
  return recover_cols(x, r, S, E, true);
}

Vec ExtractionContext::swap_recover(const Vec& v, int r, const std::vector<std::string>& S,
                                    const std::set<std::string>& E, bool inverse) const {
  return recover_cols(v, r, S, E, inverse).col(0);
}

Vec ExtractionContext::swap_diff(const Vec& v, int r, const std::vector<std::string>& S,
                                 const std::set<std::string>& E) const {
  return diff_cols(v, r, S, E, false).col(0);
}

Vec ExtractionContext::apply_pi(const Vec& v, int r, const std::set<std::string>& E) const {
  return pi_cols(v, r, E).col(0);
}

double ExtractionContext::accept(const Vec& v, int r, const std::set<std::string>& E) const {
  return apply_pi(v, r, E).squaredNorm();
}

Mat ExtractionContext::leaves(const Vec& v) const {
  std::vector<int> keep;
  auto ls = tree_.leaves();
  std::sort(ls.begin(), ls.end());
  for (const auto& l : ls) {
    const auto& w = mprime(l);
    keep.insert(keep.end(), w.begin(), w.end());
  }
  keep.resize(pcp_.m);
  return partial_trace_qubits(v, keep, total_);
}

const ExtractionContext::Compressed& ExtractionContext::compressed(int j) const {
  if (j < 0 || j > node_count()) j = node_count();
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(j);
  if (it != cache_.end()) return *it->second;

  std::set<std::string> first;
  for (int i = 0; i < j; ++i) first.insert(tree_.nodes[i].label);
  int R = pcp_.challenges();
  std::vector<std::vector<std::string>> sj(R);
  for (int r = 0; r < R; ++r)
    for (const auto& l : path(r))
      if (first.count(l)) sj[r].push_back(l);

  std::vector<std::set<std::string>> esets{{}};
  for (size_t i = 0; i < esets.size(); ++i) {
    for (int r = 0; r < R; ++r) {
      auto e = esets[i];
      e.insert(sj[r].begin(), sj[r].end());
      if (std::find(esets.begin(), esets.end(), e) == esets.end()) esets.push_back(e);
    }
  }

  std::vector<std::function<Mat(const Mat&)>> ops;
  for (const auto& e : esets) {
    for (int r = 0; r < R; ++r) {
      ops.push_back([this, r, e](const Mat& v) { return pi_cols(v, r, e); });
      if (sj[r].empty()) continue;
      auto S = sj[r];
      ops.push_back([this, r, S, e](const Mat& v) { return diff_cols(v, r, S, e, false); });
    }
  }

  Vec init = initial();
  Eigen::Index n = init.size();
  Mat basis(n, kMaxCompressedDim);
  Eigen::Index k = 0;
  auto add = [&](Vec w) {
    for (int pass = 0; pass < 2 && k > 0; ++pass) w -= basis.leftCols(k) * (basis.leftCols(k).adjoint() * w);
    double nw = w.norm();
    if (nw < 1e-9) return;
    if (k == kMaxCompressedDim) throw QspError("extract: relevant subspace exceeds the compression cap");
    basis.col(k++) = w / nw;
  };
  add(init);
  for (Eigen::Index done = 0; done < k;) {
    Mat frontier = basis.middleCols(done, k - done);
    done = k;
    for (const auto& op : ops) {
      Mat y = op(frontier);
      y -= basis.leftCols(k) * (basis.leftCols(k).adjoint() * y);
      for (Eigen::Index i = 0; i < y.cols(); ++i)
        if (y.col(i).norm() > 1e-9) add(y.col(i));
    }
  }
  auto c = std::make_shared<Compressed>();
  c->j = j;
  c->basis = basis.leftCols(k);
  c->initial = c->basis.adjoint() * init;
  // Pi = SR^dag P SR and SwapDiff = SR_{E u S}^dag SR_E, so one image of the
  // basis per (r, E) suffices.
  for (const auto& e : esets) {
    std::vector<Mat> pis;
    for (int r = 0; r < R; ++r) {
      auto S = path(r);
      Mat x = recover_cols(c->basis, r, S, e, false);
      Mat px = apply_qubits_left(pcp_.projector(r), x, pcp_.Q(r));
      Eigen::Index mask = 0;
      for (const auto& l : S)
        for (int w : tree_.node(l).w) mask |= pow2(w);
      for (Eigen::Index i = 0; i < px.rows(); ++i)
        if (i & mask) px.row(i).setZero();
      Mat m = x.adjoint() * px;
      pis.push_back(0.5 * (m + m.adjoint()));
    }
    c->families.emplace(e, ProjFamily(std::move(pis)));
    for (int r = 0; r < R; ++r) {
      auto e2 = e;
      e2.insert(sj[r].begin(), sj[r].end());
      Mat a = recover_cols(c->basis, r, sj[r], e, false);
      Mat b = e2 == e ? a : recover_cols(c->basis, r, sj[r], e2, false);
      c->swap_diffs.emplace(std::make_pair(r, e), Mat(b.adjoint() * a));
    }
  }
  cache_[j] = c;
  return *c;
}

ExtractionTrace hyb_extract(const ExtractionContext& ctx, int j, double gamma, double q, int T,
                            std::optional<int> override_t, std::uint64_t seed) {
  const auto& c = ctx.compressed(j);
  int R = ctx.pcp().challenges();
  std::set<std::string> first;
  for (int i = 0; i < c.j; ++i) first.insert(ctx.tree().nodes[i].label);
  std::vector<std::vector<std::string>> sj(R);
  for (int r = 0; r < R; ++r)
    for (const auto& l : ctx.path(r))
      if (first.count(l)) sj[r].push_back(l);
  Vec x;
  ExtractionTrace tr = run_loop(
      c.initial, gamma, q, T, override_t, seed,
      [&](const std::set<std::string>& e) -> const ProjFamily& { return c.families.at(e); },
      [&](int r, Vec& y, std::set<std::string>& e) {
        y = c.swap_diffs.at({r, e}) * y;
        y /= y.norm();
        e.insert(sj[r].begin(), sj[r].end());
      },
      &x);
  tr.leaves = ctx.leaves(c.basis * x);
  return tr;
}

ExtractionTrace extract_full(const ExtractionContext& ctx, double gamma, double q, int T,
                             std::optional<int> override_t, std::uint64_t seed) {
  return hyb_extract(ctx, -1, gamma, q, T, override_t, seed);
}

int knowledge_T_max(int beta, double gamma) {
  if (!(gamma > 0)) throw QspError("knowledge_ext: gamma must be positive");
  return static_cast<int>(std::ceil(std::ldexp(1.0, beta + 3) / (gamma * gamma) - 1e-9));
}

KnowledgeResult knowledge_ext(const ExtractionContext& ctx, const KnowledgeOptions& opt,
                              std::uint64_t seed) {
  int tmax = opt.max_T ? *opt.max_T : knowledge_T_max(ctx.tree().beta, opt.gamma);
  if (tmax < 1) throw QspError("knowledge_ext: empty step range");
  Rng rng = step_rng(seed, 0xFFFFFFFFu);
  std::uniform_int_distribution<int> pick(1, tmax);
  KnowledgeResult res;
  res.T = pick(rng);
  double q = opt.p_floor - opt.gamma;
  res.trace = extract_full(ctx, opt.gamma / 4, q + opt.gamma / 4, res.T, opt.override_t, seed);
  res.proof = res.trace.leaves;
  return res;
}

}  // namespace qsp

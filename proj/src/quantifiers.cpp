// Copyright 2026 The ACL Backflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acl/quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

namespace acl {

namespace {

void require_same_dim(const DensityMatrix& a, const DensityMatrix& b, const char* who) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << who << ": dimension mismatch " << a.dim() << " vs " << b.dim();
    throw std::invalid_argument(os.str());
  }
}

double half_abs_sum(const RealVector& ev) { return 0.5 * ev.cwiseAbs().sum(); }

double entropy_of(const ComplexMatrix& m) { return von_neumann_entropy(eigvals_symmetrized(m)); }

double js_from_entropies(double h_mid, double h1, double h2) {
  return (h_mid - 0.5 * h1 - 0.5 * h2) / std::numbers::ln2;
}

double sqrt_clamped(double j) { return std::sqrt(std::max(j, 0.0)); }

RealVector product_spectrum(const RealVector& a, const RealVector& b) {
  RealVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// Nonzero spectrum of F F^dagger via the r x r Gram matrix.
RealVector factor_spectrum(const ComplexMatrix& f) {
  return eigvals_symmetrized(f.adjoint() * f);
}

KindValues pair_values(const DensityMatrix& a, const DensityMatrix& b) {
  return {trace_distance(a, b), sqrt_jsd(a, b)};
}

}  // namespace

std::string_view short_name(QuantifierKind kind) {
  return kind == QuantifierKind::TraceDistance ? "D" : "sqrtJ";
}

double von_neumann_entropy(const RealVector& spectrum, double clip) {
  double h = 0.0;
  for (Index i = 0; i < spectrum.size(); ++i) {
    const double l = spectrum(i);
    if (l < -kPositivityTol) {
      std::ostringstream os;
      os << "von_neumann_entropy: eigenvalue " << l << " violates positivity";
      throw std::domain_error(os.str());
    }
    if (l >= clip) h -= l * std::log(l);
  }
  return h;
}

double trace_distance(const DensityMatrix& r1, const DensityMatrix& r2) {
  require_same_dim(r1, r2, "trace_distance");
  return half_abs_sum(eigvals_symmetrized(r1.matrix() - r2.matrix()));
}

RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                                 double clip) {
  require_same_dim(rho, sigma, "relative_entropy");
  const double neg_h = -von_neumann_entropy(eigvals_hermitian(rho.op()), clip);
  const SpectralDecomposition s = eig_hermitian(sigma.op());
  // <w_j| rho |w_j> for each eigenvector of sigma
  const RealVector weights =
      (s.eigenvectors.adjoint() * rho.matrix() * s.eigenvectors).diagonal().real();
  double cross = 0.0;
  double outside = 0.0;
  for (Index j = 0; j < s.dim(); ++j) {
    const double mu = s.eigenvalues(j);
    if (mu < -kPositivityTol) {
      std::ostringstream os;
      os << "relative_entropy: sigma eigenvalue " << mu << " violates positivity";
      throw std::domain_error(os.str());
    }
    if (mu >= clip)
      cross += weights(j) * std::log(mu);
    else
      outside += weights(j);
  }
  if (outside > kSupportTol) {
    std::ostringstream os;
    os << "relative_entropy: rho has weight " << outside << " outside the support of sigma";
    return {std::numeric_limits<double>::infinity(), os.str()};
  }
  return {neg_h - cross, {}};
}

double jensen_shannon(const DensityMatrix& r1, const DensityMatrix& r2) {
  require_same_dim(r1, r2, "jensen_shannon");
  const ComplexMatrix mid = 0.5 * (r1.matrix() + r2.matrix());
  return js_from_entropies(entropy_of(mid), entropy_of(r1.matrix()), entropy_of(r2.matrix()));
}

double sqrt_jsd(const DensityMatrix& r1, const DensityMatrix& r2) {
  return sqrt_clamped(jensen_shannon(r1, r2));
}

double distinguishability(const DensityMatrix& r1, const DensityMatrix& r2, QuantifierKind kind) {
  return kind == QuantifierKind::TraceDistance ? trace_distance(r1, r2) : sqrt_jsd(r1, r2);
}

double total_correlations(const DensityMatrix& rho_se, const DensityMatrix& rho_s,
                          const DensityMatrix& rho_e, QuantifierKind kind) {
  if (rho_se.dim() != rho_s.dim() * rho_e.dim())
    throw std::invalid_argument("total_correlations: global dimension is not d_S * d_E");
  const DensityMatrix product(HermitianOperator::symmetrized(kron(rho_s.matrix(), rho_e.matrix())),
                              kTraceDriftAbort);
  return distinguishability(rho_se, product, kind);
}

double env_distinguishability(const DensityMatrix& rho_e_1, const DensityMatrix& rho_e_2,
                              QuantifierKind kind) {
  return distinguishability(rho_e_1, rho_e_2, kind);
}

KindValues global_distinguishability(const GlobalState& a, const GlobalState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("global_distinguishability: dimension mismatch");
  if (!a.has_factor() || !b.has_factor() ||
      a.factor().cols() + b.factor().cols() >= a.dim()) {
    return pair_values(a.dense(), b.dense());
  }
  const Index ra = a.factor().cols();
  const Index rb = b.factor().cols();
  ComplexMatrix stacked(a.dim(), ra + rb);
  stacked << a.factor(), b.factor();
  const Eigen::HouseholderQR<ComplexMatrix> qr(stacked);
  const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(a.dim(), ra + rb);
  const ComplexMatrix pa = q.adjoint() * a.factor();
  const ComplexMatrix pb = q.adjoint() * b.factor();
  const DensityMatrix ra_small(HermitianOperator::symmetrized(pa * pa.adjoint()), kTraceDriftAbort);
  const DensityMatrix rb_small(HermitianOperator::symmetrized(pb * pb.adjoint()), kTraceDriftAbort);
  return pair_values(ra_small, rb_small);
}

KindValues branch_correlations(const BranchState& branch) {
  const DensityMatrix rho = branch.global.dense();
  const ComplexMatrix sigma = kron(branch.system.matrix(), branch.environment.matrix());
  if (rho.matrix() == sigma) return {0.0, 0.0};  // exactly factorized

  const double d = half_abs_sum(eigvals_symmetrized(rho.matrix() - sigma));

  const double h_mid = entropy_of(0.5 * (rho.matrix() + sigma));
  const double h_rho = branch.global.has_factor()
                           ? von_neumann_entropy(factor_spectrum(branch.global.factor()))
                           : entropy_of(rho.matrix());
  const double h_sigma = von_neumann_entropy(
      product_spectrum(eigvals_hermitian(branch.system.op()),
                       eigvals_hermitian(branch.environment.op())));
  return {d, sqrt_clamped(js_from_entropies(h_mid, h_rho, h_sigma))};
}

TimeRecord evaluate_snapshot(const StepSnapshot& snap, const EvaluationOptions& opts) {
  const BranchState& b1 = snap.branch[0];
  const BranchState& b2 = snap.branch[1];
  TimeRecord rec;
  rec.t = snap.t;
  const KindValues sys = pair_values(b1.system, b2.system);
  const KindValues env = pair_values(b1.environment, b2.environment);
  KindValues global{}, c1{}, c2{};
  if (opts.with_globals) {
    if (opts.parallel_branches) {
      auto f2 = std::async(std::launch::async, [&] { return branch_correlations(b2); });
      c1 = branch_correlations(b1);
      global = global_distinguishability(b1.global, b2.global);
      c2 = f2.get();
    } else {
      c1 = branch_correlations(b1);
      c2 = branch_correlations(b2);
      global = global_distinguishability(b1.global, b2.global);
    }
  }
  for (QuantifierKind k : kAllKinds) {
    QuantifierRecord& q = rec.by_kind[static_cast<std::size_t>(k)];
    q.dist_s = sys[k];
    q.dist_e = env[k];
    if (opts.with_globals) {
      q.dist_se = global[k];
      q.corr_1 = c1[k];
      q.corr_2 = c2[k];
    }
  }
  return rec;
}

std::vector<RevivalPair> revival_targets(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 3) throw std::invalid_argument("revival_targets: series needs at least 3 points");
  std::vector<char> is_max(n, 0);
  for (std::size_t t = 1; t + 1 < n; ++t) {
    if (!(series[t] - series[t - 1] > kPlateauTol)) continue;
    std::size_t end = t;
    while (end + 1 < n && std::abs(series[end + 1] - series[end]) <= kPlateauTol) ++end;
    if (end + 1 < n && series[end + 1] < series[end]) is_max[t] = 1;
  }
  std::vector<RevivalPair> out;
  std::size_t next = n;  // nearest maximum strictly after s
  std::vector<std::size_t> next_max(n, n);
  for (std::size_t i = n; i-- > 0;) {
    next_max[i] = next;
    if (is_max[i]) next = i;
  }
  for (std::size_t s = 0; s < n; ++s)
    if (next_max[s] < n) out.push_back({s, next_max[s], series[next_max[s]] - series[s]});
  return out;
}

double blp_measure(std::span<const double> series) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < series.size(); ++k)
    total += std::max(0.0, series[k + 1] - series[k]);
  return total;
}

std::vector<double> QuantifierSeries::times() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.t);
  return out;
}

std::vector<double> QuantifierSeries::dist_s(QuantifierKind k) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r[k].dist_s);
  return out;
}

std::vector<double> QuantifierSeries::bound_rhs(QuantifierKind k) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r[k].bound_rhs());
  return out;
}

std::vector<double> QuantifierSeries::i_ext(QuantifierKind k) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r[k].i_ext());
  return out;
}

std::vector<QuantifierDifference> QuantifierSeries::differences() const {
  std::vector<QuantifierDifference> out;
  out.reserve(records_.size());
  for (const auto& r : records_) {
    const auto& d = r[QuantifierKind::TraceDistance];
    const auto& j = r[QuantifierKind::SqrtJensenShannon];
    out.push_back({j.corr_1 - d.corr_1, j.dist_e - d.dist_e});
  }
  return out;
}

SummaryRecord summarize(const QuantifierSeries& series, double gamma, double temp,
                        std::uint64_t seed) {
  SummaryRecord s;
  s.gamma = gamma;
  s.temp = temp;
  s.seed = seed;
  const auto d = series.dist_s(QuantifierKind::TraceDistance);
  const auto j = series.dist_s(QuantifierKind::SqrtJensenShannon);
  s.nm_value = {blp_measure(d), blp_measure(j)};
  s.dist_s_t0 = d.empty() ? 0.0 : d.front();
  if (d.size() >= 3)
    for (const auto& p : revival_targets(d)) s.max_revival_d = std::max(s.max_revival_d, p.delta);
  return s;
}

std::vector<double> distinguishability_series(std::span<const StepSnapshot> snaps,
                                              QuantifierKind kind) {
  std::vector<double> out;
  out.reserve(snaps.size());
  for (const auto& s : snaps)
    out.push_back(distinguishability(s.branch[0].system, s.branch[1].system, kind));
  return out;
}

std::vector<LedgerEntry> information_ledger(std::span<const StepSnapshot> snaps,
                                            QuantifierKind kind) {
  std::vector<LedgerEntry> out;
  out.reserve(snaps.size());
  for (const auto& s : snaps) {
    const double inside = distinguishability(s.branch[0].system, s.branch[1].system, kind);
    const double total = global_distinguishability(s.branch[0].global, s.branch[1].global)[kind];
    out.push_back({inside, total - inside});
  }
  return out;
}

double bound_rhs(const StepSnapshot& snap, QuantifierKind kind) {
  return branch_correlations(snap.branch[0])[kind] + branch_correlations(snap.branch[1])[kind] +
         env_distinguishability(snap.branch[0].environment, snap.branch[1].environment, kind);
}

std::vector<QuantifierDifference> quantifier_difference(std::span<const StepSnapshot> snaps) {
  std::vector<QuantifierDifference> out;
  out.reserve(snaps.size());
  for (const auto& s : snaps) {
    const KindValues corr = branch_correlations(s.branch[0]);
    const KindValues env = pair_values(s.branch[0].environment, s.branch[1].environment);
    out.push_back({corr.sqrt_jsd - corr.trace_distance, env.sqrt_jsd - env.trace_distance});
  }
  return out;
}

}  // namespace acl

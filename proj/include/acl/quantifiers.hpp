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

// Distinguishability quantifiers and the information-flow quantities built
// from them.
//
// Two quantifiers are supported, both normalized to [0, 1]:
//   D(r1, r2)      = (1/2) sum_i |l_i|, l_i eigenvalues of r1 - r2
//   sqrtJ(r1, r2)  = sqrt(J), J = [S(r1, m) + S(r2, m)] / (2 ln 2),
//                    m = (r1 + r2)/2, S the relative entropy (natural log).
//
// For a pair of initial conditions evolved to time t the bookkeeping is
//   I_int(t) = S(rho_S^1(t), rho_S^2(t))
//   I_ext(t) = S(rho_SE^1(t), rho_SE^2(t)) - I_int(t)
// and any revival over [s, t] obeys
//   I_int(t) - I_int(s) <= corr_1(s) + corr_2(s) + S(rho_E^1(s), rho_E^2(s)),
// with corr_i = S(rho_SE^i, rho_S^i (x) rho_E^i).

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acl/dynamics.hpp"
#include "acl/linalg.hpp"

namespace acl {

enum class QuantifierKind { TraceDistance = 0, SqrtJensenShannon = 1 };

inline constexpr std::array<QuantifierKind, 2> kAllKinds = {QuantifierKind::TraceDistance,
                                                            QuantifierKind::SqrtJensenShannon};

/// Column-name prefix: "D" or "sqrtJ".
std::string_view short_name(QuantifierKind kind);

/// Eigenvalues below this are exact zeros inside logarithms (0 log 0 = 0).
inline constexpr double kLogClip = 1e-12;
/// Weight of rho outside supp(sigma) tolerated before S(rho, sigma) = inf.
inline constexpr double kSupportTol = 1e-10;

/// -sum lambda ln lambda over a spectrum. Eigenvalues in (-1e-10, clip) count
/// as zero; anything below -1e-10 throws std::domain_error.
double von_neumann_entropy(const RealVector& spectrum, double clip = kLogClip);

double trace_distance(const DensityMatrix& r1, const DensityMatrix& r2);

struct RelativeEntropy {
  double value = 0.0;
  std::string diagnostic;  // set when value is +inf
  bool finite() const { return value != std::numeric_limits<double>::infinity(); }
};

/// tr rho ln rho - tr rho ln sigma.
RelativeEntropy relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                                 double clip = kLogClip);

/// Evaluated as [H(m) - H(r1)/2 - H(r2)/2] / ln 2, the same quantity as the
/// midpoint relative-entropy form with one eigenvalue problem per matrix.
double jensen_shannon(const DensityMatrix& r1, const DensityMatrix& r2);
double sqrt_jsd(const DensityMatrix& r1, const DensityMatrix& r2);

double distinguishability(const DensityMatrix& r1, const DensityMatrix& r2, QuantifierKind kind);

/// S(rho_SE, rho_S (x) rho_E), all dense.
double total_correlations(const DensityMatrix& rho_se, const DensityMatrix& rho_s,
                          const DensityMatrix& rho_e, QuantifierKind kind);
double env_distinguishability(const DensityMatrix& rho_e_1, const DensityMatrix& rho_e_2,
                              QuantifierKind kind);

/// Both quantifiers for one pair of states.
struct KindValues {
  double trace_distance = 0.0;
  double sqrt_jsd = 0.0;
  double operator[](QuantifierKind k) const {
    return k == QuantifierKind::TraceDistance ? trace_distance : sqrt_jsd;
  }
};

/// S(rho_SE^1, rho_SE^2). With factored states the pair is projected onto
/// the span of both factors first, which is exact and costs O(d r^2).
KindValues global_distinguishability(const GlobalState& a, const GlobalState& b);

/// S(rho_SE, rho_S (x) rho_E) for one branch. H(rho_SE) comes from the
/// factor's Gram matrix and H(rho_S (x) rho_E) from the marginal spectra, so
/// only rho_SE - sigma and the midpoint need full eigensolves.
KindValues branch_correlations(const BranchState& branch);

/// Per-kind quantities at one time. Fields that need global states are NaN
/// when globals were not evaluated.
struct QuantifierRecord {
  double dist_s = 0.0;
  double dist_e = 0.0;
  double dist_se = std::numeric_limits<double>::quiet_NaN();
  double corr_1 = std::numeric_limits<double>::quiet_NaN();
  double corr_2 = std::numeric_limits<double>::quiet_NaN();

  double bound_rhs() const { return corr_1 + corr_2 + dist_e; }
  double i_int() const { return dist_s; }
  double i_ext() const { return dist_se - dist_s; }
};

struct TimeRecord {
  double t = 0.0;
  std::array<QuantifierRecord, 2> by_kind;
  const QuantifierRecord& operator[](QuantifierKind k) const {
    return by_kind[static_cast<std::size_t>(k)];
  }
};

struct EvaluationOptions {
  bool with_globals = true;
  /// Evaluate the two branches' correlations on separate threads.
  bool parallel_branches = false;
};

TimeRecord evaluate_snapshot(const StepSnapshot& snap, const EvaluationOptions& opts = {});

struct RevivalPair {
  std::size_t s = 0;
  std::size_t t = 0;
  double delta = 0.0;  // series[t] - series[s]
};

/// Values closer than this count as equal when locating maxima.
inline constexpr double kPlateauTol = 1e-12;

/// For each s, the nearest later strict local maximum t. A maximum is an index
/// whose value rises strictly from its predecessor and is followed by a
/// strict descent after any run of equal values; the run is represented by
/// its earliest index. Indices s with no later maximum are omitted.
std::vector<RevivalPair> revival_targets(std::span<const double> series);

/// sum_k max(0, s_{k+1} - s_k)
double blp_measure(std::span<const double> series);

struct QuantifierDifference {
  double delta_x = 0.0;  // sqrtJ corr_1 - D corr_1
  double delta_y = 0.0;  // sqrtJ env - D env
};

class QuantifierSeries {
 public:
  QuantifierSeries() = default;
  explicit QuantifierSeries(bool with_globals) : with_globals_(with_globals) {}

  void append(TimeRecord r) { records_.push_back(r); }

  bool with_globals() const { return with_globals_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<TimeRecord>& records() const { return records_; }
  const TimeRecord& operator[](std::size_t k) const { return records_[k]; }

  std::vector<double> times() const;
  std::vector<double> dist_s(QuantifierKind k) const;
  std::vector<double> bound_rhs(QuantifierKind k) const;
  std::vector<double> i_ext(QuantifierKind k) const;
  std::vector<QuantifierDifference> differences() const;

 private:
  bool with_globals_ = true;
  std::vector<TimeRecord> records_;
};

struct SummaryRecord {
  double gamma = 0.0;
  double temp = 0.0;
  std::uint64_t seed = 0;
  KindValues nm_value;          // BLP measure per kind
  double dist_s_t0 = 0.0;       // trace distance at t = 0
  double max_revival_d = 0.0;   // largest revival_targets delta, trace distance
};

SummaryRecord summarize(const QuantifierSeries& series, double gamma, double temp,
                        std::uint64_t seed);

// Snapshot-span forms, used on stored trajectories.
std::vector<double> distinguishability_series(std::span<const StepSnapshot> snaps,
                                              QuantifierKind kind);

struct LedgerEntry {
  double i_int = 0.0;
  double i_ext = 0.0;
};
std::vector<LedgerEntry> information_ledger(std::span<const StepSnapshot> snaps,
                                            QuantifierKind kind);
double bound_rhs(const StepSnapshot& snap, QuantifierKind kind);
std::vector<QuantifierDifference> quantifier_difference(std::span<const StepSnapshot> snaps);

}  // namespace acl

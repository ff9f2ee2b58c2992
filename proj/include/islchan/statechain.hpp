#pragma once

// K-state homogeneous Markov channel.
//
// State indices are ordered by channel quality: 0 is the worst state. For the
// three-state model that is BAD = 0, MODERATE = 1, GOOD = 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "islchan/errors.hpp"
#include "islchan/fadegen.hpp"
#include "islchan/rng.hpp"

namespace islchan::statechain {

/// Row-stochastic K x K matrix, t(j, k) = Pr(S_{n+1} = k | S_n = j).
/// Instances come from validate() (or the default single-state chain), so
/// every one is row-stochastic.
class TransitionMatrix {
public:
  static constexpr double row_tolerance = 1e-9;

  /// Checks each row is a probability vector; rows off by less than
  /// row_tolerance are renormalized, anything else throws NotStochastic.
  static TransitionMatrix validate(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return k_; }
  double operator()(std::size_t j, std::size_t k) const { return t_[j * k_ + k]; }
  std::span<const double> row(std::size_t j) const { return {t_.data() + j * k_, k_}; }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> r(k_);
    for (std::size_t j = 0; j < k_; ++j) r[j].assign(row(j).begin(), row(j).end());
    return r;
  }

  /// Same chain with states relabelled: new state i is old state perm[i].
  TransitionMatrix permuted(std::span<const std::size_t> perm) const;

  static TransitionMatrix identity(std::size_t k) {
    std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) r[i][i] = 1.0;
    return validate(r);
  }

  /// The single-state chain [[1]].
  TransitionMatrix() = default;

private:
  std::size_t k_ = 1;
  std::vector<double> t_{1.0};
};

inline TransitionMatrix TransitionMatrix::validate(const std::vector<std::vector<double>>& rows) {
  const std::size_t k = rows.size();
  if (k == 0) throw NotStochastic(0, "matrix is empty");
  TransitionMatrix m;
  m.k_ = k;
  m.t_.clear();
  m.t_.reserve(k * k);
  for (std::size_t j = 0; j < k; ++j) {
    if (rows[j].size() != k) throw NotStochastic(j, "matrix is not square");
    double sum = 0.0;
    for (double v : rows[j]) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw NotStochastic(j, "entry outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) >= row_tolerance) {
      std::ostringstream os;
      os << "row sums to " << std::setprecision(12) << sum;
      throw NotStochastic(j, os.str());
    }
    for (double v : rows[j]) m.t_.push_back(v / sum);
  }
  return m;
}

inline TransitionMatrix TransitionMatrix::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != k_) throw DomainError("permutation size does not match state count");
  std::vector<bool> seen(k_, false);
  for (std::size_t p : perm) {
    if (p >= k_ || seen[p]) throw DomainError("not a permutation of 0..K-1");
    seen[p] = true;
  }
  std::vector<std::vector<double>> r(k_, std::vector<double>(k_));
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j) r[i][j] = (*this)(perm[i], perm[j]);
  return validate(r);
}

/// Stationary distribution p = p T, sum p = 1. Solved as the linear system
/// (T^T - I) p = 0 with one equation replaced by the normalization; a singular
/// system means the chain has no unique stationary vector.
inline std::vector<double> stationary_distribution(const TransitionMatrix& t) {
  const std::size_t k = t.size();
  std::vector<double> a(k * k), b(k, 0.0);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) a[r * k + c] = t(c, r) - (r == c ? 1.0 : 0.0);
  for (std::size_t c = 0; c < k; ++c) a[(k - 1) * k + c] = 1.0;
  b[k - 1] = 1.0;

  // Gaussian elimination, partial pivoting.
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
    if (std::abs(a[piv * k + col]) < 1e-12)
      throw Reducible("transition matrix has no unique stationary distribution");
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(a[piv * k + c], a[col * k + c]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] / a[col * k + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> p(k);
  for (std::size_t r = k; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < k; ++c) s -= a[r * k + c] * p[c];
    p[r] = s / a[r * k + r];
  }

  for (std::size_t c = 0; c < k; ++c) {
    double v = 0.0;
    for (std::size_t j = 0; j < k; ++j) v += p[j] * t(j, c);
    if (std::abs(v - p[c]) > 1e-10 || p[c] < -1e-12)
      throw Reducible("stationary solve did not converge to a probability vector");
  }
  for (auto& v : p) v = std::max(v, 0.0);
  return p;
}

/// Expected consecutive steps spent in state k, 1/(1 - t_kk).
inline double mean_sojourn(const TransitionMatrix& t, std::size_t k) {
  if (k >= t.size()) throw DomainError("state index out of range");
  const double stay = t(k, k);
  if (stay >= 1.0) throw Absorbing(k);
  return 1.0 / (1.0 - stay);
}

struct StateSequence {
  std::vector<std::uint32_t> states;  ///< one entry per Markov step
  std::vector<double> dwell;          ///< tau_k, seconds
  double total = 0.0;                 ///< tau_T = sum of dwell
  double step_duration_s = 0.0;

  std::size_t transitions() const {
    std::size_t n = 0;
    for (std::size_t i = 1; i < states.size(); ++i) n += states[i] != states[i - 1];
    return n;
  }
};

/// Per-state step counts to dwell times; total is their sum, so the two agree
/// exactly.
inline void compute_dwell(StateSequence& seq, std::size_t k) {
  std::vector<std::uint64_t> counts(k, 0);
  for (auto s : seq.states) ++counts.at(s);
  seq.dwell.assign(k, 0.0);
  seq.total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    seq.dwell[i] = static_cast<double>(counts[i]) * seq.step_duration_s;
    seq.total += seq.dwell[i];
  }
}

/// n_steps states of the chain started in `initial`; states[0] == initial.
inline StateSequence generate_sequence(const TransitionMatrix& t, std::size_t initial,
                                       std::size_t n_steps, double step_duration_s, Rng& rng) {
  const std::size_t k = t.size();
  if (initial >= k) throw DomainError("initial state out of range");
  if (!(step_duration_s > 0.0)) throw DomainError("step duration must be > 0");

  // Cumulative rows; the last bin of each row absorbs rounding.
  std::vector<double> cum(k * k);
  for (std::size_t j = 0; j < k; ++j) {
    double acc = 0.0;
    for (std::size_t c = 0; c < k; ++c) cum[j * k + c] = (acc += t(j, c));
    cum[j * k + k - 1] = 2.0;
  }

  StateSequence seq;
  seq.step_duration_s = step_duration_s;
  seq.states.resize(n_steps);
  std::size_t s = initial;
  for (std::size_t n = 0; n < n_steps; ++n) {
    seq.states[n] = static_cast<std::uint32_t>(s);
    const double u = rng.uniform();
    const double* row = cum.data() + s * k;
    std::size_t next = 0;
    while (u >= row[next]) ++next;
    s = next;
  }
  compute_dwell(seq, k);
  return seq;
}

/// Estimated matrix under statistical CSI error: each entry perturbed by
/// N(0, variance), clamped to [0, 1], rows renormalized. variance == 0 returns t.
inline TransitionMatrix perturb(const TransitionMatrix& t, double variance, Rng& rng) {
  if (!(variance >= 0.0)) throw DomainError("s-CSEE variance must be >= 0");
  if (variance == 0.0) return t;
  const double sd = std::sqrt(variance);
  auto rows = t.rows();
  for (auto& r : rows) {
    double sum = 0.0;
    for (auto& v : r) {
      v = std::clamp(v + sd * rng.normal(), 0.0, 1.0);
      sum += v;
    }
    if (sum <= 0.0) {
      std::fill(r.begin(), r.end(), 1.0 / static_cast<double>(r.size()));
    } else {
      for (auto& v : r) v /= sum;
    }
  }
  return TransitionMatrix::validate(rows);
}

// ---------------------------------------------------------------------------
// State definitions and gain classification

struct StateDef {
  std::size_t index = 0;
  std::string label;
  fadegen::RicianChannelParams channel;
  double gamma_threshold = 0.0;  ///< lower Gamma_Omega bound of this state
  double rate_threshold = 2.0;   ///< Gamma_k, bps/Hz
};

/// Checks indices form 0..K-1 in order and lower bounds strictly increase.
inline void validate_states(std::span<const StateDef> defs) {
  if (defs.empty()) throw DomainError("state set is empty");
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (defs[i].index != i) throw DomainError("state indices must be 0..K-1 in order");
    if (i > 0 && !(defs[i].gamma_threshold > defs[i - 1].gamma_threshold))
      throw DomainError("Gamma_Omega boundaries must strictly increase with state quality");
  }
}

/// Index of the state whose [lower, next lower) interval holds omega. The
/// lowest state covers everything below the first boundary; a value on a
/// boundary belongs to the better state.
inline std::size_t classify_gain(double omega, std::span<const StateDef> defs) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < defs.size(); ++i)
    if (omega >= defs[i].gamma_threshold) k = i;
  return k;
}

/// Labels for the quality-ordered three-state model.
inline const std::vector<std::string>& three_state_labels() {
  static const std::vector<std::string> labels{"BAD", "MODERATE", "GOOD"};
  return labels;
}

/// The reference matrix with rows in the order they are usually printed:
/// GOOD, MODERATE, BAD.
inline const std::vector<std::vector<double>>& reference_rows_printed() {
  static const std::vector<std::vector<double>> rows{
      {0.8, 0.1, 0.1}, {0.5, 0.3, 0.2}, {0.7, 0.25, 0.05}};
  return rows;
}

/// Printed row r describes state printed_to_state[r].
inline constexpr std::size_t printed_to_state[3] = {2, 1, 0};

/// Reference matrix in state-index order (BAD, MODERATE, GOOD).
inline TransitionMatrix reference_matrix() {
  const auto printed = TransitionMatrix::validate(reference_rows_printed());
  // new index i is old (printed) index perm[i]
  const std::size_t perm[3] = {2, 1, 0};
  return printed.permuted(perm);
}

/// State trace CSV rows: step,t_s,state_index,state_label,omega.
inline void write_state_trace_csv(std::ostream& os, const StateSequence& seq,
                                  std::span<const std::string> labels,
                                  std::span<const double> omega_per_step) {
  os << "step,t_s,state_index,state_label,omega\n";
  char buf[160];
  for (std::size_t n = 0; n < seq.states.size(); ++n) {
    const auto s = seq.states[n];
    const std::string& lab = s < labels.size() ? labels[s] : std::to_string(s);
    const double om = n < omega_per_step.size() ? omega_per_step[n] : 0.0;
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%u,%s,%.9g\n", n,
                  static_cast<double>(n) * seq.step_duration_s, s, lab.c_str(), om);
    os << buf;
  }
}

}  // namespace islchan::statechain

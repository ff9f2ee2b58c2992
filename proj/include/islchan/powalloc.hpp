#pragma once

// State-based power allocation.
//
// alpha_k = P_k tau_t / sum_j P_j tau_j, which keeps sum_k alpha_k tau_k equal
// to tau_t: the energy budget of uniform power over the same interval.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "islchan/errors.hpp"

namespace islchan::powalloc {

struct SbpaPolicy {
  std::vector<double> priorities;  ///< P_k, one per state
  std::vector<double> durations;   ///< tau_k, seconds
  double rho = 1.0;                ///< baseline transmit power, mW

  double total() const {
    double s = 0.0;
    for (double d : durations) s += d;
    return s;
  }

  void validate() const {
    if (priorities.empty() || priorities.size() != durations.size())
      throw DomainError("SbpaPolicy: priorities and durations must be non-empty and equally long");
    for (double p : priorities)
      if (!(p > 0.0)) throw DomainError("SbpaPolicy: priorities must be > 0");
    for (double d : durations)
      if (!(d >= 0.0)) throw DomainError("SbpaPolicy: durations must be >= 0");
  }
};

struct AllocationResult {
  std::vector<double> alpha;
  std::vector<double> power_dbm;
  std::vector<double> rate;  ///< bps/Hz
};

inline AllocationResult allocate(const SbpaPolicy& p) {
  p.validate();
  double weighted = 0.0;
  for (std::size_t k = 0; k < p.priorities.size(); ++k) weighted += p.priorities[k] * p.durations[k];
  if (!(weighted > 0.0)) throw DegenerateDurations();
  const double tau_t = p.total();
  AllocationResult r;
  r.alpha.resize(p.priorities.size());
  for (std::size_t k = 0; k < p.priorities.size(); ++k) r.alpha[k] = p.priorities[k] * tau_t / weighted;
  return r;
}

/// Uniform allocation, alpha_k = 1.
inline AllocationResult uniform(std::size_t k) {
  AllocationResult r;
  r.alpha.assign(k, 1.0);
  return r;
}

/// 10 log10(alpha rho), rho in mW.
inline double state_power_dbm(double alpha, double rho_mw) {
  const double p = alpha * rho_mw;
  if (!(p > 0.0)) throw DomainError("state_power_dbm: alpha * rho must be > 0");
  return 10.0 * std::log10(p);
}

/// log2(1 + alpha rho Omega / sigma^2).
inline double state_rate(double alpha, double rho, double omega, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("state_rate: noise power must be > 0");
  return std::log2(1.0 + alpha * rho * omega / sigma2);
}

/// Allocation report CSV: state_label,priority,tau_s,alpha,power_dbm,mean_rate.
inline void write_allocation_csv(std::ostream& os, std::span<const std::string> labels,
                                 const SbpaPolicy& policy, const AllocationResult& a,
                                 std::span<const double> mean_rate) {
  os << "state_label,priority,tau_s,alpha,power_dbm,mean_rate\n";
  char buf[200];
  for (std::size_t k = 0; k < a.alpha.size(); ++k) {
    const double dbm = k < a.power_dbm.size() ? a.power_dbm[k] : state_power_dbm(a.alpha[k], policy.rho);
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  k < labels.size() ? labels[k].c_str() : std::to_string(k).c_str(),
                  policy.priorities[k], policy.durations[k], a.alpha[k], dbm,
                  k < mean_rate.size() ? mean_rate[k] : 0.0);
    os << buf;
  }
}

}  // namespace islchan::powalloc

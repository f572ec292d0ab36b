#ifndef COMPAGENCY_REFERENCE_HPP_
#define COMPAGENCY_REFERENCE_HPP_

// Straightforward long double implementations of the basic quantities.
// They work from the probability vectors directly (never from the cached
// log-probabilities) and are used as independent oracles by the
// verification suites and the unit tests.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "compagency/core.hpp"

namespace compagency::reference {

using Real = long double;

inline std::vector<Real> widen(std::span<const double> x) { return {x.begin(), x.end()}; }

inline Real entropy(std::span<const double> p) {
  Real h = 0;
  for (double v : p) h -= static_cast<Real>(v) * std::log(static_cast<Real>(v));
  return h;
}

inline Real kl(std::span<const double> p, std::span<const double> q) {
  Real acc = 0;
  for (std::size_t o = 0; o < p.size(); ++o)
    acc += static_cast<Real>(p[o]) * std::log(static_cast<Real>(p[o]) / static_cast<Real>(q[o]));
  return acc;
}

/// E_P[log R] - E_R[log R].
inline Real welfare_gap(std::span<const double> r, std::span<const double> p) {
  Real acc = 0;
  for (std::size_t o = 0; o < r.size(); ++o)
    acc += (static_cast<Real>(p[o]) - static_cast<Real>(r[o])) * std::log(static_cast<Real>(r[o]));
  return acc;
}

/// prod_j P_j^{beta_j}, normalized, in linear space.
inline std::vector<Real> log_pool(std::span<const Dist> agents, std::span<const double> beta) {
  const std::size_t m = agents.front().size();
  std::vector<Real> out(m, 1);
  Real total = 0;
  for (std::size_t o = 0; o < m; ++o) {
    for (std::size_t j = 0; j < agents.size(); ++j)
      out[o] *= std::pow(static_cast<Real>(agents[j][o]), static_cast<Real>(beta[j]));
    total += out[o];
  }
  for (Real& v : out) v /= total;
  return out;
}

inline std::vector<Real> linear_pool(std::span<const Dist> agents, std::span<const double> beta) {
  const std::size_t m = agents.front().size();
  std::vector<Real> out(m, 0);
  for (std::size_t j = 0; j < agents.size(); ++j)
    for (std::size_t o = 0; o < m; ++o) out[o] += static_cast<Real>(beta[j]) * static_cast<Real>(agents[j][o]);
  return out;
}

inline Real tv(std::span<const double> p, std::span<const Real> q) {
  Real acc = 0;
  for (std::size_t o = 0; o < p.size(); ++o) acc += std::abs(static_cast<Real>(p[o]) - q[o]);
  return acc / 2;
}

inline Real inner(std::span<const double> p, std::span<const double> f, std::span<const double> g) {
  Real acc = 0;
  for (std::size_t o = 0; o < p.size(); ++o)
    acc += static_cast<Real>(p[o]) * static_cast<Real>(f[o]) * static_cast<Real>(g[o]);
  return acc;
}

}  // namespace compagency::reference

#endif  // COMPAGENCY_REFERENCE_HPP_

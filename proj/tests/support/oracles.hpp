// Independent reference implementations used only by tests.  Each oracle
// recomputes a quantity the library produces, through a different algorithm,
// so agreement is meaningful.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "overlink/convcode.hpp"

namespace overlink::test {

struct EnumMapResult {
  std::vector<double> info_llr;
  std::vector<double> coded_extrinsic;
};

/// Brute-force max-log MAP decoding of the zero-terminated mother code by
/// enumerating all 2^k codewords.  Word metric:
///   sum_i 0.5*(1-2*c_i)*L_i  +  sum_t 0.5*(1-2*u_t)*P_t.
/// Per-bit outputs are metric differences with the bit pinned to 0 and 1.
inline EnumMapResult enum_maxlog_decode(const std::vector<double>& mother_llrs,
                                        int n_info,
                                        const std::vector<double>* priors = nullptr) {
  const int n_mother = 2 * (n_info + 6);
  const double kFloor = -1e300;
  std::vector<double> best_info[2];
  std::vector<double> best_coded[2];
  for (int v = 0; v < 2; ++v) {
    best_info[v].assign(static_cast<std::size_t>(n_info), kFloor);
    best_coded[v].assign(static_cast<std::size_t>(n_mother), kFloor);
  }
  std::vector<std::uint8_t> info(static_cast<std::size_t>(n_info));
  for (std::uint32_t w = 0; w < (1u << n_info); ++w) {
    for (int t = 0; t < n_info; ++t) info[t] = (w >> t) & 1;
    const auto mother = conv_encode(info);
    double metric = 0.0;
    for (int i = 0; i < n_mother; ++i) {
      metric += 0.5 * (1.0 - 2.0 * mother[i]) * mother_llrs[i];
    }
    if (priors) {
      for (int t = 0; t < n_info; ++t) {
        metric += 0.5 * (1.0 - 2.0 * info[t]) * (*priors)[t];
      }
    }
    for (int t = 0; t < n_info; ++t) {
      double& b = best_info[info[t]][t];
      if (metric > b) b = metric;
    }
    for (int i = 0; i < n_mother; ++i) {
      double& b = best_coded[mother[i]][i];
      if (metric > b) b = metric;
    }
  }
  EnumMapResult res;
  res.info_llr.resize(static_cast<std::size_t>(n_info));
  res.coded_extrinsic.resize(static_cast<std::size_t>(n_mother));
  for (int t = 0; t < n_info; ++t) {
    res.info_llr[t] = best_info[0][t] - best_info[1][t];
  }
  for (int i = 0; i < n_mother; ++i) {
    res.coded_extrinsic[i] = (best_coded[0][i] - best_coded[1][i]) - mother_llrs[i];
  }
  return res;
}

/// Composite Simpson quadrature on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

/// Ergodic sum capacity of K iid Rayleigh users by numeric integration: the
/// aggregate gain X is Gamma(K, 1), so
///   C = int_0^inf log2(1 + rho*x) x^(K-1) e^(-x) / (K-1)! dx.
/// Integrated on a log-spaced-safe truncation with composite Simpson.
inline double quadrature_sum_capacity(double snr_linear, int n_users) {
  double log_fact = 0.0;
  for (int i = 2; i < n_users; ++i) log_fact += std::log(static_cast<double>(i));
  const auto integrand = [&](double x) {
    if (x <= 0.0) return 0.0;
    const double log_pdf = (n_users - 1) * std::log(x) - x - log_fact;
    return std::log2(1.0 + snr_linear * x) * std::exp(log_pdf);
  };
  // Gamma(K,1) mass above x = 60 is below 1e-18 for K <= 6.
  return simpson(integrand, 0.0, 60.0, 60000);
}

}  // namespace overlink::test

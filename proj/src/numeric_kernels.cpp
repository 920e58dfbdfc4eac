#include "numeric_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace tempcomm::kernels {

void bazzi_factors(std::span<const double> alpha, std::span<const double> kappa, std::span<double> same,
                   std::span<double> move, std::span<double> log_same, std::span<double> log_move) {
  const std::size_t n = alpha.size();
  const double* a = alpha.data();
  const double* x = kappa.data();
  double* s = same.data();
  double* m = move.data();
  double* ls = log_same.data();
  double* lm = log_move.data();
  for (std::size_t d = 0; d < n; ++d) {
    m[d] = (1.0 - a[d]) * x[d];
    s[d] = a[d] + m[d];
  }
  for (std::size_t d = 0; d < n; ++d) ls[d] = std::log(s[d]);
  for (std::size_t d = 0; d < n; ++d) lm[d] = std::log(m[d]);
}

void add_scaled(std::span<double> out, double c, std::span<const double> x) {
  double* o = out.data();
  const double* v = x.data();
  for (std::size_t d = 0; d < out.size(); ++d) o[d] += c * v[d];
}

double exponentiate(std::span<double> v) {
  double top = v[0];
  for (const double x : v) top = std::max(top, x);
  double* p = v.data();
  for (std::size_t d = 0; d < v.size(); ++d) p[d] = std::exp(p[d] - top);
  return top;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) total += a[d] * b[d];
  return total;
}

double sum(std::span<const double> v) {
  double total = 0.0;
  for (const double x : v) total += x;
  return total;
}

} // namespace tempcomm::kernels

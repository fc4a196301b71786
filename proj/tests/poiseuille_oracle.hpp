#pragma once

#include <stdexcept>
#include <vector>

// Independent 1D two-point BVP oracle for the rescaled channel profile:
//     -mu * eps^{-2} u''(y) = rhs on (0,1),   u(0) = u(1) = 0,
// solved by second-order central finite differences on a fine grid with the
// Thomas algorithm.  Test-side only; shares nothing with the FEM path.
class PoiseuilleOracle {
 public:
  PoiseuilleOracle(double mu, double eps, double rhs, int n_cells = 4096)
      : n_(n_cells), h_(1.0 / n_cells), u_(static_cast<size_t>(n_cells) + 1, 0.0) {
    const int m = n_ - 1;  // interior unknowns
    std::vector<double> diag(static_cast<size_t>(m), 2.0), off(static_cast<size_t>(m), -1.0),
        b(static_cast<size_t>(m), rhs * h_ * h_ * eps * eps / mu);
    for (int i = 1; i < m; ++i) {
      const double w = off[static_cast<size_t>(i)] / diag[static_cast<size_t>(i - 1)];
      diag[static_cast<size_t>(i)] -= w * off[static_cast<size_t>(i - 1)];
      b[static_cast<size_t>(i)] -= w * b[static_cast<size_t>(i - 1)];
    }
    u_[static_cast<size_t>(m)] = b[static_cast<size_t>(m - 1)] / diag[static_cast<size_t>(m - 1)];
    for (int i = m - 1; i >= 1; --i)
      u_[static_cast<size_t>(i)] = (b[static_cast<size_t>(i - 1)] -
                                    off[static_cast<size_t>(i - 1)] * u_[static_cast<size_t>(i + 1)]) /
                                   diag[static_cast<size_t>(i - 1)];
  }

  /// Piecewise-linear evaluation at y in [0,1].
  double operator()(double y) const {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 0.0;
    const double t = y / h_;
    const int i = static_cast<int>(t);
    const double frac = t - i;
    return (1.0 - frac) * u_[static_cast<size_t>(i)] + frac * u_[static_cast<size_t>(i) + 1];
  }

  double max_value() const {
    double m = 0;
    for (double x : u_) m = x > m ? x : m;
    return m;
  }

 private:
  int n_;
  double h_;
  std::vector<double> u_;
};

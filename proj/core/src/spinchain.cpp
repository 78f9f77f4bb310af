#include "qpr/spinchain.hpp"

#include <algorithm>
#include <stdexcept>

namespace qpr {

WeightedPauliSum cluster_ising(int n, double h1, double h2) {
  WeightedPauliSum h;
  h.n = n;
  for (int i = 1; i <= n; ++i) {
    std::vector<std::pair<int, char>> zxz{{i, 'X'}};
    if (i - 1 >= 1) zxz.push_back({i - 1, 'Z'});
    if (i + 1 <= n) zxz.push_back({i + 1, 'Z'});
    h.add(-1.0, PauliString::from_letters(n, zxz));
    if (h1 != 0) h.add(-h1, PauliString::from_letters(n, {{i, 'X'}}));
    if (h2 != 0) {
      // X_{n+1} is out of range, i.e. identity: the last pair term
      // degenerates to a bare X_n
      if (i + 1 <= n)
        h.add(-h2, PauliString::from_letters(n, {{i, 'X'}, {i + 1, 'X'}}));
      else
        h.add(-h2, PauliString::from_letters(n, {{i, 'X'}}));
    }
  }
  return h;
}

GroundState ground_state(const WeightedPauliSum& h) {
  Eigen::MatrixXd hd = h.dense().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hd);
  GroundState g;
  g.energy = es.eigenvalues()(0);
  g.psi = es.eigenvectors().col(0).cast<std::complex<double>>();
  return g;
}

GroundState ground_state(int n, double h1, double h2) {
  return ground_state(cluster_ising(n, h1, h2));
}

PauliString string_order(int n) { return sop_factor(n, 1, n); }

PauliString sop_factor(int n, int j, int k) {
  if (k <= j || (k - j) % 2 != 0)
    throw std::invalid_argument("sop_factor needs k > j with even k-j");
  std::vector<std::pair<int, char>> letters;
  if (j >= 1) letters.push_back({j, 'Z'});
  if (k <= n) letters.push_back({k, 'Z'});
  for (int i = j + 1; i <= k - 1; i += 2) {
    if (i < 1 || i > n) throw std::invalid_argument("sop_factor interior site out of range");
    letters.push_back({i, 'X'});
  }
  return PauliString::from_letters(n, letters);
}

Eigen::VectorXcd cluster_state(int n) {
  const int dim = 1 << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(dim, 1.0 / std::sqrt(double(dim)));
  for (int i = 1; i < n; ++i) {
    // CZ on sites i, i+1: amplitude bits n-i, n-i-1
    uint64_t ma = uint64_t{1} << (n - i), mb = uint64_t{1} << (n - i - 1);
    for (int c = 0; c < dim; ++c)
      if ((c & ma) && (c & mb)) psi[c] = -psi[c];
  }
  return psi;
}

BoundaryScan find_boundaries(int n, double h1, double h2_min, double h2_max, int points) {
  if (points < 5) throw std::invalid_argument("need at least 5 scan points");
  BoundaryScan scan;
  scan.h2.resize(points);
  std::vector<double> e0(points);
  double step = (h2_max - h2_min) / (points - 1);
  for (int i = 0; i < points; ++i) {
    scan.h2[i] = h2_min + i * step;
    e0[i] = ground_state(n, h1, scan.h2[i]).energy;
  }
  scan.curvature.assign(points, 0.0);
  for (int i = 1; i + 1 < points; ++i)
    scan.curvature[i] = -(e0[i + 1] - 2 * e0[i] + e0[i - 1]) / (step * step);

  struct Peak {
    double h2, c;
  };
  std::vector<Peak> peaks;
  for (int i = 2; i + 2 < points; ++i)
    if (scan.curvature[i] > scan.curvature[i - 1] && scan.curvature[i] >= scan.curvature[i + 1])
      peaks.push_back({scan.h2[i], scan.curvature[i]});
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.c != b.c) return a.c > b.c;
    return std::abs(a.h2) < std::abs(b.h2);
  });
  if (peaks.size() > 2) peaks.resize(2);
  for (const auto& p : peaks) scan.boundaries.push_back(p.h2);
  std::sort(scan.boundaries.begin(), scan.boundaries.end());
  return scan;
}

}  // namespace qpr

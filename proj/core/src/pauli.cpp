#include "qpr/pauli.hpp"

#include <bit>
#include <cctype>
#include <stdexcept>

namespace qpr {

namespace {

uint64_t bit(int site) { return uint64_t{1} << (site - 1); }

void check_site(int n, int site) {
  if (site < 1 || site > n)
    throw std::out_of_range("site " + std::to_string(site) + " outside 1.." + std::to_string(n));
}

}  // namespace

char PauliString::letter(int site) const {
  bool bx = x & bit(site), bz = z & bit(site);
  if (bx && bz) return 'Y';
  if (bx) return 'X';
  if (bz) return 'Z';
  return 'I';
}

int PauliString::weight() const { return std::popcount(x | z); }

std::string PauliString::str() const {
  if (is_identity()) return "I";
  std::string out;
  for (int j = 1; j <= n; ++j) {
    char c = letter(j);
    if (c != 'I') {
      out += c;
      out += std::to_string(j);
    }
  }
  return out;
}

PauliString PauliString::parse(int n, const std::string& s) {
  PauliString p{n, 0, 0};
  size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;  // sign handled by callers
  if (s.substr(i) == "I") return p;
  while (i < s.size()) {
    char c = s[i++];
    if (c != 'X' && c != 'Y' && c != 'Z')
      throw std::invalid_argument("bad pauli letter in '" + s + "'");
    size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (start == i) throw std::invalid_argument("missing site index in '" + s + "'");
    int site = std::stoi(s.substr(start, i - start));
    check_site(n, site);
    if ((p.x | p.z) & bit(site))
      throw std::invalid_argument("duplicate site in '" + s + "'");
    if (c != 'Z') p.x |= bit(site);
    if (c != 'X') p.z |= bit(site);
  }
  return p;
}

PauliString PauliString::from_letters(int n, const std::vector<std::pair<int, char>>& letters) {
  PauliString p{n, 0, 0};
  for (auto [site, c] : letters) {
    check_site(n, site);
    if (c == 'I') continue;
    if (c != 'Z') p.x |= bit(site);
    if (c != 'X') p.z |= bit(site);
  }
  return p;
}

PauliProduct mul(const PauliString& a, const PauliString& b) {
  // per-site: sigma_u sigma_v = i^t sigma_w, accumulate t over sites
  static constexpr int phase_tab[4][4] = {
      // columns b: I X Z Y ; rows a: I X Z Y  (index = x + 2z)
      {0, 0, 0, 0},
      {0, 0, 3, 1},
      {0, 1, 0, 3},
      {0, 3, 1, 0},
  };
  PauliProduct r;
  r.p = PauliString{a.n, a.x ^ b.x, a.z ^ b.z};
  int t = 0;
  uint64_t touched = (a.x | a.z) & (b.x | b.z);
  while (touched) {
    int i = std::countr_zero(touched);
    touched &= touched - 1;
    uint64_t m = uint64_t{1} << i;
    int ia = ((a.x & m) ? 1 : 0) + ((a.z & m) ? 2 : 0);
    int ib = ((b.x & m) ? 1 : 0) + ((b.z & m) ? 2 : 0);
    t += phase_tab[ia][ib];
  }
  r.phase_pow = t & 3;
  return r;
}

bool commutes(const PauliString& a, const PauliString& b) {
  return (std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) % 2 == 0;
}

PauliProduct conjugate_by_cz(const PauliString& p, int a, int b) {
  check_site(p.n, a);
  check_site(p.n, b);
  if (a == b) throw std::invalid_argument("conjugate_by_cz: pair sites must differ");
  uint64_t ma = bit(a), mb = bit(b);
  PauliProduct r{p, 0};
  if (p.x & ma) r.p.z ^= mb;
  if (p.x & mb) r.p.z ^= ma;
  // both sites X-like with exactly one Z bit between them: XY -> -YX
  if ((p.x & ma) && (p.x & mb) && (bool(p.z & ma) != bool(p.z & mb))) r.phase_pow = 2;
  return r;
}

namespace {

// amplitude-bit masks for a site-indexed mask (site j -> amplitude bit n-j)
uint64_t to_amp(int n, uint64_t site_mask) {
  uint64_t out = 0;
  while (site_mask) {
    int i = std::countr_zero(site_mask);
    site_mask &= site_mask - 1;
    out |= uint64_t{1} << (n - 1 - i);
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd dense(const PauliString& p) {
  const int dim = 1 << p.n;
  uint64_t xa = to_amp(p.n, p.x), za = to_amp(p.n, p.z);
  int ny = std::popcount(p.x & p.z);
  std::complex<double> iy = 1.0;
  for (int k = 0; k < (ny & 3); ++k) iy *= std::complex<double>(0, 1);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    double sgn = std::popcount(uint64_t(c) & za) % 2 ? -1.0 : 1.0;
    m(int(c ^ xa), c) = iy * sgn;
  }
  return m;
}

std::complex<double> expectation(const PauliString& p, const Eigen::VectorXcd& psi) {
  const int dim = 1 << p.n;
  uint64_t xa = to_amp(p.n, p.x), za = to_amp(p.n, p.z);
  int ny = std::popcount(p.x & p.z);
  std::complex<double> iy = 1.0;
  for (int k = 0; k < (ny & 3); ++k) iy *= std::complex<double>(0, 1);
  std::complex<double> acc = 0;
  for (int c = 0; c < dim; ++c) {
    double sgn = std::popcount(uint64_t(c) & za) % 2 ? -1.0 : 1.0;
    acc += std::conj(psi[int(c ^ xa)]) * iy * sgn * psi[c];
  }
  return acc;
}

Eigen::MatrixXcd WeightedPauliSum::dense() const {
  const int dim = 1 << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [c, p] : terms) m += c * qpr::dense(p);
  return m;
}

double WeightedPauliSum::expectation(const Eigen::VectorXcd& psi) const {
  double acc = 0;
  for (const auto& [c, p] : terms) acc += c * qpr::expectation(p, psi).real();
  return acc;
}

std::vector<MeasurementSetting> group_qubitwise(int n, const std::vector<PauliString>& strings) {
  std::vector<MeasurementSetting> settings;
  for (int i = 0; i < int(strings.size()); ++i) {
    const PauliString& p = strings[i];
    bool placed = false;
    for (auto& s : settings) {
      bool ok = true;
      for (int j = 1; j <= n && ok; ++j) {
        char a = s.basis[j - 1], b = p.letter(j);
        if (a != 'I' && b != 'I' && a != b) ok = false;
      }
      if (!ok) continue;
      for (int j = 1; j <= n; ++j)
        if (p.letter(j) != 'I') s.basis[j - 1] = p.letter(j);
      s.members.push_back(i);
      placed = true;
      break;
    }
    if (!placed) {
      MeasurementSetting s;
      s.basis.assign(n, 'I');
      for (int j = 1; j <= n; ++j) s.basis[j - 1] = p.letter(j);
      s.members = {i};
      settings.push_back(std::move(s));
    }
  }
  return settings;
}

}  // namespace qpr

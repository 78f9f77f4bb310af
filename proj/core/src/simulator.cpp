#include "qpr/simulator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qpr {

Statevector::Statevector(int n) : n_(n), amp_(Eigen::VectorXcd::Zero(int64_t{1} << n)) {
  if (n < 1 || n > 24) throw std::invalid_argument("statevector size out of range");
  amp_[0] = 1.0;
}

void Statevector::apply_1q(int site, const Eigen::Matrix2cd& u) {
  const int64_t stride = int64_t{1} << (n_ - site);
  const int64_t dim = amp_.size();
  for (int64_t base = 0; base < dim; base += 2 * stride)
    for (int64_t i = base; i < base + stride; ++i) {
      std::complex<double> a0 = amp_[i], a1 = amp_[i + stride];
      amp_[i] = u(0, 0) * a0 + u(0, 1) * a1;
      amp_[i + stride] = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

void Statevector::ry(int site, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const int64_t stride = int64_t{1} << (n_ - site);
  const int64_t dim = amp_.size();
  for (int64_t base = 0; base < dim; base += 2 * stride)
    for (int64_t i = base; i < base + stride; ++i) {
      std::complex<double> a0 = amp_[i], a1 = amp_[i + stride];
      amp_[i] = c * a0 - s * a1;
      amp_[i + stride] = s * a0 + c * a1;
    }
}

void Statevector::cz(int a, int b) {
  const int64_t ma = int64_t{1} << (n_ - a), mb = int64_t{1} << (n_ - b);
  const int64_t dim = amp_.size();
  for (int64_t i = 0; i < dim; ++i)
    if ((i & ma) && (i & mb)) amp_[i] = -amp_[i];
}

void Statevector::x(int site) {
  const int64_t m = int64_t{1} << (n_ - site);
  const int64_t dim = amp_.size();
  for (int64_t i = 0; i < dim; ++i)
    if (!(i & m)) std::swap(amp_[i], amp_[i | m]);
}

void Statevector::y(int site) {
  const int64_t m = int64_t{1} << (n_ - site);
  const int64_t dim = amp_.size();
  const std::complex<double> im(0, 1);
  for (int64_t i = 0; i < dim; ++i)
    if (!(i & m)) {
      std::complex<double> a0 = amp_[i], a1 = amp_[i | m];
      amp_[i] = -im * a1;
      amp_[i | m] = im * a0;
    }
}

void Statevector::z(int site) {
  const int64_t m = int64_t{1} << (n_ - site);
  const int64_t dim = amp_.size();
  for (int64_t i = 0; i < dim; ++i)
    if (i & m) amp_[i] = -amp_[i];
}

std::vector<double> Statevector::probabilities() const {
  std::vector<double> p(amp_.size());
  for (int64_t i = 0; i < amp_.size(); ++i) p[i] = std::norm(amp_[i]);
  return p;
}

uint64_t Statevector::sample(std::mt19937_64& rng) const {
  // explicit 53-bit uniform; keeps sampled outputs identical across platforms
  double r = double(rng() >> 11) * 0x1.0p-53, acc = 0;
  for (int64_t i = 0; i < amp_.size(); ++i) {
    acc += std::norm(amp_[i]);
    if (r < acc) return uint64_t(i);
  }
  return uint64_t(amp_.size() - 1);
}

Eigen::Matrix2cd ry_matrix(double theta) {
  Eigen::Matrix2cd u;
  double c = std::cos(theta / 2), s = std::sin(theta / 2);
  u << c, -s, s, c;
  return u;
}

void Circuit::apply_to(Statevector& sv) const {
  for (const Gate& g : gates) switch (g.kind) {
      case Gate::RY: sv.ry(g.a, g.angle); break;
      case Gate::CZ: sv.cz(g.a, g.b); break;
      case Gate::X: sv.x(g.a); break;
      case Gate::Y: sv.y(g.a); break;
      case Gate::Z: sv.z(g.a); break;
    }
}

Statevector Circuit::run() const {
  Statevector sv(n);
  apply_to(sv);
  return sv;
}

std::string Circuit::text() const {
  std::ostringstream out;
  out.precision(17);
  for (const Gate& g : gates) switch (g.kind) {
      case Gate::RY: out << "RY " << g.a << " " << g.angle << "\n"; break;
      case Gate::CZ: out << "CZ " << g.a << " " << g.b << "\n"; break;
      case Gate::X: out << "X " << g.a << "\n"; break;
      case Gate::Y: out << "Y " << g.a << "\n"; break;
      case Gate::Z: out << "Z " << g.a << "\n"; break;
    }
  return out.str();
}

Circuit Circuit::parse(int n, std::istream& in) {
  Circuit c;
  c.n = n;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op)) continue;
    auto site_ok = [&](int q) {
      if (q < 1 || q > n)
        throw std::invalid_argument("line " + std::to_string(lineno) + ": site out of range");
      return q;
    };
    if (op == "RY") {
      int q;
      double t;
      if (!(ls >> q >> t)) throw std::invalid_argument("line " + std::to_string(lineno) + ": RY needs site and angle");
      c.ry(site_ok(q), t);
    } else if (op == "CZ") {
      int a, b;
      if (!(ls >> a >> b)) throw std::invalid_argument("line " + std::to_string(lineno) + ": CZ needs two sites");
      if (a == b) throw std::invalid_argument("line " + std::to_string(lineno) + ": CZ sites must differ");
      c.cz(site_ok(a), site_ok(b));
    } else if (op == "X" || op == "Y" || op == "Z") {
      int q;
      if (!(ls >> q)) throw std::invalid_argument("line " + std::to_string(lineno) + ": " + op + " needs a site");
      site_ok(q);
      if (op == "X") c.x(q);
      else if (op == "Y") c.y(q);
      else c.z(q);
    } else {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown gate '" + op + "'");
    }
    std::string extra;
    if (ls >> extra)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": trailing '" + extra + "'");
  }
  return c;
}

Circuit Circuit::parse(int n, const std::string& text) {
  std::istringstream in(text);
  return parse(n, in);
}

double BitstringDistribution::total() const {
  double t = 0;
  for (double v : p) t += v;
  return t;
}

BitstringDistribution sample_x_basis(const Statevector& s, const std::vector<int>& sites,
                                     std::uint64_t shots, std::uint64_t seed) {
  Statevector rotated = s;
  for (int q : sites) rotated.ry(q, x_basis_angle);
  BitstringDistribution d;
  d.n = s.num_qubits();
  d.x_sites = sites;
  d.shots = shots;
  d.seed = seed;
  if (shots == 0) {
    d.p = rotated.probabilities();
    return d;
  }
  d.counts.assign(std::size_t{1} << d.n, 0);
  std::mt19937_64 rng(seed);
  for (std::uint64_t k = 0; k < shots; ++k) ++d.counts[rotated.sample(rng)];
  d.p.resize(d.counts.size());
  for (std::size_t i = 0; i < d.counts.size(); ++i)
    d.p[i] = double(d.counts[i]) / double(shots);
  return d;
}

double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::norm(a.dot(b));
}

double fidelity(const Statevector& a, const Statevector& b) {
  return fidelity(a.amps(), b.amps());
}

}  // namespace qpr

#include "qpr/msop.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <unordered_map>

namespace qpr::msop {

namespace {

int pow3(int k) {
  int v = 1;
  while (k-- > 0) v *= 3;
  return v;
}

IndexSet mask_upto(int n) {
  IndexSet s;
  for (int w = 0; w < 3; ++w) {
    int lo = 64 * w;
    if (n <= lo) break;
    int bits = std::min(64, n - lo);
    s.w[w] = (bits == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
  }
  return s;
}

IndexSet single(int site) {
  IndexSet s;
  s.set(site);
  return s;
}

IndexSet zmask_of(const IndexSet& s, int n) {
  return s.shr1() ^ (s.shl1() & mask_upto(n));
}

}  // namespace

int chain_length(int d) {
  if (d < 1 || d > 3) throw std::invalid_argument("msop depth must be in [1,3]");
  return 2 * pow3(d + 1) - 11;
}

int IndexSet::count() const {
  return std::popcount(w[0]) + std::popcount(w[1]) + std::popcount(w[2]);
}

std::vector<int> IndexSet::sites() const {
  std::vector<int> out;
  out.reserve(count());
  for (int wi = 0; wi < 3; ++wi) {
    std::uint64_t v = w[wi];
    while (v) {
      int b = std::countr_zero(v);
      out.push_back(64 * wi + b + 1);
      v &= v - 1;
    }
  }
  return out;
}

IndexSet IndexSet::shl1() const {
  return {{w[0] << 1, (w[1] << 1) | (w[0] >> 63), (w[2] << 1) | (w[1] >> 63)}};
}

IndexSet IndexSet::shr1() const {
  return {{(w[0] >> 1) | (w[1] << 63), (w[1] >> 1) | (w[2] << 63), w[2] >> 1}};
}

std::size_t IndexSetHash::operator()(const IndexSet& s) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (std::uint64_t v : s.w) {
    v ^= v >> 33;
    v *= 0xff51afd7ed558ccdull;
    v ^= v >> 33;
    h = (h ^ v) * 0xc4ceb9fe1a85ec53ull;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

// ---------------------------------------------------------------- Dyadic

namespace {

Dyadic norm_dyadic(__int128 v, int e) {
  if (v == 0) return {};
  while ((v & 1) == 0) {
    v >>= 1;
    ++e;
  }
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("dyadic mantissa overflow");
  return {static_cast<std::int64_t>(v), e};
}

std::string int128_str(__int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
  char buf[48];
  int i = 48;
  while (u) {
    buf[--i] = char('0' + int(u % 10));
    u /= 10;
  }
  std::string s(buf + i, 48 - i);
  return neg ? "-" + s : s;
}

}  // namespace

Dyadic Dyadic::integer(std::int64_t v) {
  return norm_dyadic(v, 0);
}

double Dyadic::value() const {
  return std::ldexp(static_cast<double>(m), e);
}

Dyadic Dyadic::operator*(const Dyadic& o) const {
  if (m == 0 || o.m == 0) return {};
  __int128 p = static_cast<__int128>(m) * o.m;
  return norm_dyadic(p, e + o.e);  // odd * odd stays odd; range check only
}

Dyadic Dyadic::operator+(const Dyadic& o) const {
  if (m == 0) return o;
  if (o.m == 0) return *this;
  int e0 = std::min(e, o.e);
  if (e - e0 > 100 || o.e - e0 > 100)
    throw std::overflow_error("dyadic exponent spread too large");
  __int128 v = (static_cast<__int128>(m) << (e - e0)) +
               (static_cast<__int128>(o.m) << (o.e - e0));
  return norm_dyadic(v, e0);
}

std::string Dyadic::decimal() const {
  if (m == 0) return "0";
  if (e >= 0) {
    if (e > 62) throw std::overflow_error("dyadic too large to print");
    return int128_str(static_cast<__int128>(m) << e);
  }
  int digits = -e;
  if (digits > 27) {  // 5^27 is the largest power fitting the m*5^k product
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value());
    return buf;
  }
  __int128 p5 = 1;
  for (int i = 0; i < digits; ++i) p5 *= 5;
  __int128 scaled = static_cast<__int128>(m) * p5;
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  __int128 p10 = 1;
  for (int i = 0; i < digits; ++i) p10 *= 10;
  std::string ip = int128_str(scaled / p10);
  std::string fp = int128_str(scaled % p10);
  fp.insert(fp.begin(), digits - fp.size(), '0');
  while (!fp.empty() && fp.back() == '0') fp.pop_back();
  std::string out = neg ? "-" : "";
  out += ip;
  if (!fp.empty()) {
    out += '.';
    out += fp;
  }
  return out;
}

// ---------------------------------------------------------------- expansion

namespace {

using TermMap = std::unordered_map<IndexSet, Dyadic, IndexSetHash>;

constexpr std::uint64_t kBytesPerTerm = 64;  // rough map-entry footprint

struct Piece {
  Dyadic c;
  IndexSet m;
};

std::vector<std::pair<int, int>> step_runs(const std::vector<int>& sites, int step) {
  std::vector<std::pair<int, int>> runs;
  int j = sites[0], k = sites[0];
  for (std::size_t i = 1; i < sites.size(); ++i) {
    if (sites[i] - k == step) {
      k = sites[i];
    } else {
      runs.emplace_back(j, k);
      j = k = sites[i];
    }
  }
  runs.emplace_back(j, k);
  return runs;
}

// pieces of the level f -> f-1 rewrite for one run [j..k] at step 2*3^f
std::vector<Piece> run_pieces(int j, int k, int sg, int n) {
  IndexSet prog;
  for (int p = j; p <= k; p += 2 * sg) prog.set(p);
  const Dyadic one = Dyadic::integer(1);
  const Dyadic h = Dyadic::half();
  std::vector<Piece> lops, rops;
  if (j - 4 * sg < 1) {
    lops.push_back({one, {}});
  } else {
    IndexSet ma = single(j - 4 * sg), mb = single(j - 2 * sg);
    lops.push_back({h, ma ^ mb});
    lops.push_back({-h, ma});
    lops.push_back({h, mb});
    lops.push_back({h, {}});
  }
  if (k + 4 * sg > n) {
    rops.push_back({one, {}});
  } else {
    IndexSet ma = single(k + 2 * sg), mb = single(k + 4 * sg);
    rops.push_back({h, {}});
    rops.push_back({h, ma});
    rops.push_back({-h, mb});
    rops.push_back({h, ma ^ mb});
  }
  std::vector<Piece> out;
  out.reserve(lops.size() * rops.size());
  for (const Piece& l : lops)
    for (const Piece& r : rops) out.push_back({l.c * r.c, l.m ^ r.m ^ prog});
  return out;
}

std::vector<std::pair<IndexSet, Dyadic>> sorted_terms(const TermMap& map) {
  std::vector<std::pair<IndexSet, Dyadic>> v(map.begin(), map.end());
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return v;
}

std::uint64_t count_products(const std::vector<std::pair<IndexSet, Dyadic>>& terms,
                             int f, int n) {
  int step = 2 * pow3(f), sg = pow3(f - 1);
  unsigned __int128 total = 0;
  for (const auto& [idx, c] : terms) {
    if (idx.empty()) {
      total += 1;
      continue;
    }
    unsigned __int128 prod = 1;
    for (auto [j, k] : step_runs(idx.sites(), step)) {
      int nl = (j - 4 * sg < 1) ? 1 : 4;
      int nr = (k + 4 * sg > n) ? 1 : 4;
      prod *= static_cast<unsigned>(nl * nr);
    }
    total += prod;
  }
  const auto cap = static_cast<unsigned __int128>(
      std::numeric_limits<std::uint64_t>::max());
  return total > cap ? std::numeric_limits<std::uint64_t>::max()
                     : static_cast<std::uint64_t>(total);
}

struct DescendOut {
  TermMap map;
  std::uint64_t emitted = 0;
  bool truncated = false;
};

DescendOut descend(const std::vector<std::pair<IndexSet, Dyadic>>& terms, int f,
                   int n, const ExpandOptions& opt, std::uint64_t pending) {
  int step = 2 * pow3(f), sg = pow3(f - 1);
  DescendOut out;
  std::uint64_t max_terms = opt.memory_cap_bytes / kBytesPerTerm;
  bool stop = false;

  auto emit = [&](const Dyadic& c, const IndexSet& m) {
    ++out.emitted;
    auto it = out.map.find(m);
    if (it != out.map.end()) {
      Dyadic s = it->second + c;
      if (s.is_zero())
        out.map.erase(it);
      else
        it->second = s;
      return;
    }
    if (out.map.size() >= max_terms) {
      if (!opt.allow_truncation)
        throw CapExceeded(f, out.emitted, out.map.size(), pending);
      out.truncated = true;
      stop = true;
      return;
    }
    out.map.emplace(m, c);
  };

  for (const auto& [idx, coef] : terms) {
    if (stop) break;
    if (idx.empty()) {
      emit(coef, idx);
      continue;
    }
    std::vector<std::vector<Piece>> pieces;
    for (auto [j, k] : step_runs(idx.sites(), step))
      pieces.push_back(run_pieces(j, k, sg, n));
    std::function<void(std::size_t, Dyadic, IndexSet)> rec =
        [&](std::size_t ri, Dyadic c, IndexSet m) {
          if (stop) return;
          if (ri == pieces.size()) {
            emit(c, m);
            return;
          }
          for (const Piece& p : pieces[ri]) {
            rec(ri + 1, c * p.c, m ^ p.m);
            if (stop) return;
          }
        };
    rec(0, coef, IndexSet{});
  }
  return out;
}

}  // namespace

CapExceeded::CapExceeded(int level_, std::uint64_t emitted, std::uint64_t held,
                         std::uint64_t pending)
    : std::runtime_error(
          "term cap exceeded at level " + std::to_string(level_) + ": " +
          std::to_string(held) + " merged terms held after " +
          std::to_string(emitted) + " of " + std::to_string(pending) +
          " products; rerun with a larger cap or allow truncation"),
      level(level_),
      products_emitted(emitted),
      terms_held(held),
      products_pending(pending) {}

Expansion expand(const ExpandOptions& opt) {
  Expansion ex;
  ex.d = opt.d;
  ex.n = chain_length(opt.d);
  ex.part = opt.part;
  int c = (ex.n + 1) / 2, span = pow3(opt.d);
  int a = c - span, b = c + span;

  TermMap cur;
  const Dyadic h = Dyadic::half(), one = Dyadic::integer(1);
  if (opt.part == Part::full) {
    cur.emplace(single(a), h);
    cur.emplace(single(c), h);
    cur.emplace(single(b), h);
    cur.emplace(single(a) ^ single(c) ^ single(b), -h);
  } else if (opt.part == Part::sum) {
    cur.emplace(single(a), one);
    cur.emplace(single(c), one);
    cur.emplace(single(b), one);
  } else {
    cur.emplace(single(a) ^ single(c) ^ single(b), one);
  }

  for (int f = opt.d; f >= 1; --f) {
    auto terms = sorted_terms(cur);
    std::uint64_t pending = count_products(terms, f, ex.n);
    if (f == 1) ex.final_level_products = pending;
    DescendOut step = descend(terms, f, ex.n, opt, pending);
    ex.levels.push_back({f, step.emitted, step.map.size()});
    cur = std::move(step.map);
    if (step.truncated) {
      ex.truncated = true;
      break;
    }
  }

  auto final_terms = sorted_terms(cur);
  ex.terms.reserve(final_terms.size());
  for (auto& [idx, coef] : final_terms) ex.terms.push_back({coef, idx});
  return ex;
}

Dyadic Expansion::coefficient_sum() const {
  Dyadic s;
  for (const Term& t : terms) s = s + t.coef;
  return s;
}

int Expansion::max_depth() const {
  int d0 = 0;
  for (const Term& t : terms) d0 = std::max(d0, -t.coef.e);
  return d0;
}

// ---------------------------------------------------------------- labels

std::string site_letters(const IndexSet& s, int n) {
  IndexSet zm = zmask_of(s, n);
  std::string out(n, 'I');
  for (int j = 1; j <= n; ++j) {
    bool xb = s.test(j), zb = zm.test(j);
    if (xb && zb)
      out[j - 1] = 'Y';
    else if (xb)
      out[j - 1] = 'X';
    else if (zb)
      out[j - 1] = 'Z';
  }
  return out;
}

std::string pauli_label(const IndexSet& s, int n) {
  std::string letters = site_letters(s, n);
  std::string out;
  for (int j = 1; j <= n; ++j) {
    if (letters[j - 1] == 'I') continue;
    if (!out.empty()) out += ' ';
    out += letters[j - 1];
    out += std::to_string(j);
  }
  return out.empty() ? "I" : out;
}

int canonical_sign(const IndexSet& s, int n) {
  int adj = (s & s.shr1()).count();
  int ys = (s & zmask_of(s, n)).count();
  if (ys % 2) throw std::logic_error("odd Y count in stabilizer product");
  return ((adj + ys / 2) % 2) ? -1 : 1;
}

std::string factor_label(const IndexSet& s, int n) {
  if (s.empty()) return "1";
  // Stabilizer indices split by site parity; within a parity class a maximal
  // index run [j..k] at step 2 is the string factor S_{j-1,k+1}.
  std::vector<std::pair<int, int>> ends;
  for (int par = 0; par < 2; ++par) {
    std::vector<int> part;
    for (int j : s.sites())
      if (j % 2 == par) part.push_back(j);
    if (part.empty()) continue;
    for (auto [j, k] : step_runs(part, 2)) ends.emplace_back(j - 1, k + 1);
  }
  std::sort(ends.begin(), ends.end());
  std::string out;
  for (auto [a, b] : ends) {
    if (!out.empty()) out += '*';
    out += 'S';
    if (a <= 9 && b <= 9) {
      out += std::to_string(a);
      out += std::to_string(b);
    } else {
      out += std::to_string(a);
      out += '_';
      out += std::to_string(b);
    }
  }
  return out;
}

PauliString to_pauli(const IndexSet& s, int n) {
  if (n > 64) throw std::invalid_argument("pauli form needs n <= 64");
  return {n, s.w[0], zmask_of(s, n).w[0]};
}

WeightedPauliSum to_pauli_sum(const Expansion& ex) {
  WeightedPauliSum sum;
  sum.n = ex.n;
  for (const Term& t : ex.terms)
    sum.add(t.coef.value() * canonical_sign(t.idx, ex.n), to_pauli(t.idx, ex.n));
  return sum;
}

Eigen::MatrixXcd to_matrix(const Expansion& ex) {
  if (ex.n > 12) throw std::invalid_argument("dense form needs n <= 12");
  return to_pauli_sum(ex).dense();
}

std::vector<MeasurementSetting> measurement_settings(const Expansion& ex) {
  std::vector<PauliString> ps;
  ps.reserve(ex.terms.size());
  for (const Term& t : ex.terms) ps.push_back(to_pauli(t.idx, ex.n));
  return group_qubitwise(ex.n, ps);
}

// ---------------------------------------------------------------- csv

std::string to_csv(const Expansion& ex) {
  std::string out = "coefficient,sop_factors,pauli_string\n";
  for (const Term& t : ex.terms) {
    out += t.coef.decimal();
    out += ',';
    out += factor_label(t.idx, ex.n);
    out += ',';
    out += pauli_label(t.idx, ex.n);
    out += '\n';
  }
  return out;
}

void write_csv(const Expansion& ex, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << to_csv(ex);
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace qpr::msop

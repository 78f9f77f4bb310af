#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpr/pauli.hpp"

namespace qpr::msop {

// Multi-scale string order parameter, expanded symbolically into products of
// cluster stabilizers C_j = Z_{j-1} X_j Z_{j+1} on the level-0 chain. Depth d
// acts on a chain of N = 2*3^{d+1} - 11 sites; each coarse-graining level
// rewrites a stabilizer at scale f as an operator at scale f-1 supported on a
// neighbourhood, and the final result is a signed dyadic combination of
// stabilizer products, identified by their level-0 index sets.

int chain_length(int d);  // 2*3^{d+1} - 11; d in [1,3]

// Site subset of 1..192 (enough for d <= 3). Site j is bit j-1 of w[(j-1)/64].
struct IndexSet {
  std::array<std::uint64_t, 3> w{};

  bool test(int site) const {
    return (w[(site - 1) >> 6] >> ((site - 1) & 63)) & 1u;
  }
  void set(int site) { w[(site - 1) >> 6] |= std::uint64_t{1} << ((site - 1) & 63); }
  bool empty() const { return (w[0] | w[1] | w[2]) == 0; }
  int count() const;
  std::vector<int> sites() const;  // ascending

  IndexSet operator^(const IndexSet& o) const {
    return {{w[0] ^ o.w[0], w[1] ^ o.w[1], w[2] ^ o.w[2]}};
  }
  IndexSet operator&(const IndexSet& o) const {
    return {{w[0] & o.w[0], w[1] & o.w[1], w[2] & o.w[2]}};
  }
  IndexSet shl1() const;  // site j -> j+1 (no range clamp; caller masks)
  IndexSet shr1() const;  // site j -> j-1, site 1 drops out

  bool operator==(const IndexSet&) const = default;
  bool operator<(const IndexSet& o) const {
    if (w[2] != o.w[2]) return w[2] < o.w[2];
    if (w[1] != o.w[1]) return w[1] < o.w[1];
    return w[0] < o.w[0];
  }
};

struct IndexSetHash {
  std::size_t operator()(const IndexSet& s) const;
};

// Exact dyadic rational m * 2^e with m odd (or m == 0, e == 0). All expansion
// coefficients are dyadic; keeping them exact makes golden tables byte-stable.
struct Dyadic {
  std::int64_t m = 0;
  int e = 0;

  static Dyadic integer(std::int64_t v);
  static Dyadic half() { return {1, -1}; }
  bool is_zero() const { return m == 0; }
  double value() const;
  std::string decimal() const;  // exact decimal, trailing zeros stripped

  Dyadic operator*(const Dyadic& o) const;
  Dyadic operator+(const Dyadic& o) const;
  Dyadic operator-() const { return {-m, e}; }
  bool operator==(const Dyadic&) const = default;
};

// Which half of S_M = (I - II)/2 to expand: the sum over the three top-level
// letters (I), the product of all three (II), or the full combination.
enum class Part { full, sum, product };

struct ExpandOptions {
  int d = 1;
  Part part = Part::full;
  std::uint64_t memory_cap_bytes = std::uint64_t{2} << 30;
  bool allow_truncation = false;
};

struct Term {
  Dyadic coef;   // coefficient of the stabilizer product C_S
  IndexSet idx;  // S: level-0 stabilizer indices
};

struct LevelStats {
  int level = 0;               // descended from this level
  std::uint64_t products = 0;  // branches emitted during the descend
  std::uint64_t terms = 0;     // merged terms afterwards
};

struct Expansion {
  int d = 1;
  int n = 7;
  Part part = Part::full;
  std::vector<Term> terms;  // sorted by idx ascending
  bool truncated = false;
  // exact branch count of the level-1 -> level-0 descend, computed up front;
  // equals LevelStats::products for that level unless the run was cut short
  std::uint64_t final_level_products = 0;
  std::vector<LevelStats> levels;

  Dyadic coefficient_sum() const;
  int max_depth() const;  // largest -e over coefficients
};

class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(int level, std::uint64_t emitted, std::uint64_t held,
              std::uint64_t pending);
  int level;
  std::uint64_t products_emitted;
  std::uint64_t terms_held;
  std::uint64_t products_pending;  // exact total for the level being expanded
};

// Expands top-down. Memory is metered as merged-term count times a fixed
// per-entry estimate; crossing the cap either throws CapExceeded or, with
// allow_truncation, stops and returns the partial sum flagged truncated.
// Results are deterministic: terms are processed in index order at every
// level, so a truncated prefix is reproducible.
Expansion expand(const ExpandOptions& opt);

// Presentation. A term's stabilizer product equals sign * (Hermitian Pauli
// string): Y letters absorb an i each and adjacent stabilizers share Z's.
std::string site_letters(const IndexSet& s, int n);         // "IXZY..." per site
std::string pauli_label(const IndexSet& s, int n);          // "X1 Z2", identity "I"
int canonical_sign(const IndexSet& s, int n);               // +1 or -1
std::string factor_label(const IndexSet& s, int n);         // "S08*S35", identity "1"
PauliString to_pauli(const IndexSet& s, int n);             // n <= 64
WeightedPauliSum to_pauli_sum(const Expansion& ex);         // sign folded in
Eigen::MatrixXcd to_matrix(const Expansion& ex);            // n <= 12
std::vector<MeasurementSetting> measurement_settings(const Expansion& ex);

// CSV: header "coefficient,sop_factors,pauli_string", exact decimal
// coefficients, rows in index order. Identical input -> identical bytes.
std::string to_csv(const Expansion& ex);
void write_csv(const Expansion& ex, const std::string& path);

}  // namespace qpr::msop

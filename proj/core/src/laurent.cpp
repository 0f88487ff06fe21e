#include "l2inv/laurent.hpp"

#include "l2inv/error.hpp"

#include <cmath>
#include <string>

namespace l2inv {
namespace {

constexpr double kCommuteTol = 1e-12;
constexpr double kUnimodularTol = 1e-10;
constexpr double kTorusTol = 1e-12;
constexpr double kCochainTol = 1e-10;

void require_compatible(const LaurentMatrix &a, const LaurentMatrix &b, const char *what) {
  if (a.d != b.d) fail("ShapeMismatch", std::string(what) + ": torus ranks differ");
  if (a.rows != b.rows || a.cols != b.cols)
    fail("ShapeMismatch", std::string(what) + ": block shapes differ");
}

double exponent_norm(const Exponent &g) {
  double s = 0.0;
  for (int x : g) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

CMatrix matrix_power(const CMatrix &g, const CMatrix &g_inv, int k) {
  CMatrix base = k >= 0 ? g : g_inv;
  unsigned e = static_cast<unsigned>(k >= 0 ? k : -k);
  CMatrix result = CMatrix::Identity(g.rows(), g.cols());
  while (e != 0) {
    if (e & 1U) result = result * base;
    e >>= 1U;
    if (e != 0) base = base * base;
  }
  return result;
}

} // namespace

LaurentMatrix::LaurentMatrix(int d_, Index rows_, Index cols_) : d(d_), rows(rows_), cols(cols_) {
  if (d < 0) fail("ShapeMismatch", "negative torus rank");
  if (rows < 0 || cols < 0) fail("ShapeMismatch", "negative block dimension");
}

LaurentMatrix LaurentMatrix::zero(int d, Index rows, Index cols) {
  return LaurentMatrix(d, rows, cols);
}

LaurentMatrix LaurentMatrix::constant(int d, const CMatrix &block) {
  LaurentMatrix a(d, block.rows(), block.cols());
  a.add(Exponent(static_cast<std::size_t>(d), 0), block);
  return a;
}

LaurentMatrix LaurentMatrix::identity(int d, Index n) {
  return constant(d, CMatrix::Identity(n, n));
}

LaurentMatrix &LaurentMatrix::add(const Exponent &gamma, const CMatrix &block) {
  if (static_cast<int>(gamma.size()) != d)
    fail("ShapeMismatch", "exponent has length " + std::to_string(gamma.size()) +
                              ", expected " + std::to_string(d));
  if (block.rows() != rows || block.cols() != cols)
    fail("ShapeMismatch", "coefficient block has shape " + std::to_string(block.rows()) + "x" +
                              std::to_string(block.cols()));
  auto it = terms.find(gamma);
  if (it == terms.end())
    terms.emplace(gamma, block);
  else
    it->second += block;
  return *this;
}

void LaurentMatrix::validate() const {
  if (d < 0 || rows < 0 || cols < 0) fail("ShapeMismatch", "negative dimension");
  for (const auto &[g, block] : terms) {
    if (static_cast<int>(g.size()) != d) fail("ShapeMismatch", "exponent length mismatch");
    if (block.rows() != rows || block.cols() != cols)
      fail("ShapeMismatch", "coefficient block shape mismatch");
    if (!all_finite(block)) fail("NonFiniteEntry", "coefficient block has NaN/Inf entries");
  }
}

CMatrix symbol_at_angles(const LaurentMatrix &a, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != a.d)
    fail("ShapeMismatch", "point has " + std::to_string(theta.size()) + " coordinates, expected " +
                              std::to_string(a.d));
  CMatrix out = CMatrix::Zero(a.rows, a.cols);
  for (const auto &[g, block] : a.terms) {
    double phase = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) phase += g[j] * theta[j];
    out += Complex(std::cos(phase), std::sin(phase)) * block;
  }
  return out;
}

CMatrix symbol(const LaurentMatrix &a, std::span<const Complex> z) {
  std::vector<double> theta(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!(std::abs(std::abs(z[j]) - 1.0) <= kTorusTol))
      fail("NotOnTorus", "coordinate " + std::to_string(j) + " has modulus " +
                             std::to_string(std::abs(z[j])));
    theta[j] = std::arg(z[j]);
  }
  return symbol_at_angles(a, theta);
}

CMatrix coefficient_sum(const LaurentMatrix &a) {
  CMatrix out = CMatrix::Zero(a.rows, a.cols);
  for (const auto &[g, block] : a.terms) out += block;
  return out;
}

LaurentMatrix adjoint(const LaurentMatrix &a) {
  LaurentMatrix out(a.d, a.cols, a.rows);
  for (const auto &[g, block] : a.terms) {
    Exponent neg(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) neg[j] = -g[j];
    out.add(neg, block.adjoint());
  }
  return out;
}

LaurentMatrix product(const LaurentMatrix &a, const LaurentMatrix &b) {
  if (a.d != b.d) fail("ShapeMismatch", "product: torus ranks differ");
  if (a.cols != b.rows) fail("ShapeMismatch", "product: inner dimensions differ");
  LaurentMatrix out(a.d, a.rows, b.cols);
  for (const auto &[ga, ba] : a.terms)
    for (const auto &[gb, bb] : b.terms) {
      Exponent g(ga.size());
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = ga[j] + gb[j];
      out.add(g, ba * bb);
    }
  return out;
}

LaurentMatrix sum(const LaurentMatrix &a, const LaurentMatrix &b) {
  require_compatible(a, b, "sum");
  LaurentMatrix out = a;
  for (const auto &[g, block] : b.terms) out.add(g, block);
  return out;
}

LaurentMatrix scaled(const LaurentMatrix &a, Complex s) {
  LaurentMatrix out = a;
  for (auto &[g, block] : out.terms) block *= s;
  return out;
}

LaurentMatrix direct_sum(const LaurentMatrix &a, const LaurentMatrix &b) {
  if (a.d != b.d) fail("ShapeMismatch", "direct sum: torus ranks differ");
  LaurentMatrix out(a.d, a.rows + b.rows, a.cols + b.cols);
  for (const auto &[g, block] : a.terms) {
    CMatrix m = CMatrix::Zero(out.rows, out.cols);
    m.topLeftCorner(a.rows, a.cols) = block;
    out.add(g, m);
  }
  for (const auto &[g, block] : b.terms) {
    CMatrix m = CMatrix::Zero(out.rows, out.cols);
    m.bottomRightCorner(b.rows, b.cols) = block;
    out.add(g, m);
  }
  return out;
}

LaurentMatrix pruned(const LaurentMatrix &a, double tol) {
  LaurentMatrix out(a.d, a.rows, a.cols);
  for (const auto &[g, block] : a.terms)
    if (block.size() > 0 && block.cwiseAbs().maxCoeff() > tol) out.terms.emplace(g, block);
  return out;
}

double l1_norm(const LaurentMatrix &a) {
  double s = 0.0;
  for (const auto &[g, block] : a.terms) s += spectral_norm(block);
  return s;
}

double lipschitz_bound(const LaurentMatrix &a) {
  double s = 0.0;
  for (const auto &[g, block] : a.terms) s += spectral_norm(block) * exponent_norm(g);
  return s;
}

double max_term_norm(const LaurentMatrix &a) {
  double m = 0.0;
  for (const auto &[g, block] : a.terms) m = std::max(m, spectral_norm(block));
  return m;
}

bool is_hermitian(const LaurentMatrix &a, double rel_tol) {
  if (!a.is_square()) return false;
  const LaurentMatrix diff = sum(a, scaled(adjoint(a), -1.0));
  const double scale = 1.0 + max_term_norm(a);
  for (const auto &[g, block] : diff.terms)
    if (block.size() > 0 && block.cwiseAbs().maxCoeff() > rel_tol * scale) return false;
  return true;
}

TwistedRep make_twisted_rep(std::vector<CMatrix> generators) {
  TwistedRep rho;
  rho.d = static_cast<int>(generators.size());
  if (!generators.empty()) {
    const Index m = generators.front().rows();
    rho.size = m;
    for (std::size_t i = 0; i < generators.size(); ++i) {
      const CMatrix &g = generators[i];
      if (g.rows() != m || g.cols() != m)
        fail("ShapeMismatch", "generator " + std::to_string(i) + " is not " + std::to_string(m) +
                                  "x" + std::to_string(m));
      if (!all_finite(g)) fail("NonFiniteEntry", "generator has NaN/Inf entries");
      if (numerical_rank(g) != m) fail("NotInvertible", "generator " + std::to_string(i));
    }
    for (std::size_t i = 0; i < generators.size(); ++i)
      for (std::size_t j = i + 1; j < generators.size(); ++j) {
        const CMatrix &a = generators[i];
        const CMatrix &b = generators[j];
        if (spectral_norm(a * b - b * a) > kCommuteTol * spectral_norm(a) * spectral_norm(b))
          fail("NonCommutingGenerators",
               "generators " + std::to_string(i) + " and " + std::to_string(j) + " do not commute");
      }
    for (const CMatrix &g : generators)
      if (std::abs(std::abs(g.determinant()) - 1.0) > kUnimodularTol) rho.unimodular = false;
  }
  rho.generators = std::move(generators);
  return rho;
}

TwistedRep trivial_rep(int d, Index m) {
  TwistedRep rho =
      make_twisted_rep(std::vector<CMatrix>(static_cast<std::size_t>(d), CMatrix::Identity(m, m)));
  rho.size = m;
  return rho;
}

CMatrix rep_at(const TwistedRep &rho, const Exponent &gamma) {
  if (static_cast<int>(gamma.size()) != rho.d)
    fail("RankMismatch", "exponent length does not match representation rank");
  const Index m = rho.dim();
  CMatrix out = CMatrix::Identity(m, m);
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    if (gamma[j] == 0) continue;
    const CMatrix &g = rho.generators[j];
    const CMatrix inv = gamma[j] < 0 ? CMatrix(g.inverse()) : CMatrix();
    out = out * matrix_power(g, inv, gamma[j]);
  }
  return out;
}

ZdComplex::ZdComplex(int d, std::vector<LaurentMatrix> differentials)
    : d_(d), diffs_(std::move(differentials)) {
  if (d < 0) fail("ShapeMismatch", "negative torus rank");
  if (diffs_.empty()) return;
  ranks_.assign(diffs_.size() + 1, 0);
  ranks_[0] = diffs_[0].cols;
  for (std::size_t n = 0; n < diffs_.size(); ++n) {
    const LaurentMatrix &c = diffs_[n];
    c.validate();
    if (c.d != d) fail("ShapeMismatch", "differential " + std::to_string(n) + " has wrong torus rank");
    if (c.cols != ranks_[n])
      fail("ShapeMismatch", "differential " + std::to_string(n) + " has " + std::to_string(c.cols) +
                                " columns, expected " + std::to_string(ranks_[n]));
    ranks_[n + 1] = c.rows;
  }
  for (std::size_t n = 0; n + 1 < diffs_.size(); ++n) {
    const LaurentMatrix comp = product(diffs_[n + 1], diffs_[n]);
    const double scale = l1_norm(diffs_[n + 1]) * l1_norm(diffs_[n]);
    for (const auto &[g, block] : comp.terms)
      if (spectral_norm(block) > kCochainTol * scale)
        fail("CochainViolation", "c_" + std::to_string(n + 1) + " c_" + std::to_string(n) + " != 0");
  }
}

ZdComplex ZdComplex::zero(int d, const std::vector<Index> &ranks) {
  if (ranks.size() <= 1) {
    ZdComplex x;
    x.d_ = d;
    x.ranks_ = ranks.empty() ? std::vector<Index>{0} : ranks;
    return x;
  }
  std::vector<LaurentMatrix> diffs;
  for (std::size_t n = 0; n + 1 < ranks.size(); ++n)
    diffs.push_back(LaurentMatrix::zero(d, ranks[n + 1], ranks[n]));
  return ZdComplex(d, std::move(diffs));
}

Index ZdComplex::rank(int n) const {
  if (n < 0 || n > top_degree()) return 0;
  return ranks_[static_cast<std::size_t>(n)];
}

LaurentMatrix ZdComplex::differential(int n) const {
  if (n >= 0 && n < static_cast<int>(diffs_.size())) return diffs_[static_cast<std::size_t>(n)];
  return LaurentMatrix::zero(d_, rank(n + 1), rank(n));
}

LaurentMatrix ZdComplex::laplacian(int n) const {
  if (n < 0 || n > top_degree())
    fail("DegreeOutOfRange", "degree " + std::to_string(n) + " outside [0, " +
                                 std::to_string(top_degree()) + "]");
  const LaurentMatrix out = differential(n);
  const LaurentMatrix in = differential(n - 1);
  return pruned(sum(product(adjoint(out), out), product(in, adjoint(in))));
}

} // namespace l2inv

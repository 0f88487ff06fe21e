#include "l2inv/cwcomplex.hpp"

#include "l2inv/error.hpp"
#include "l2inv/zd.hpp"

#include <cmath>
#include <set>
#include <string>

namespace l2inv {

IntLaurentMatrix::IntLaurentMatrix(int d_, Index rows_, Index cols_) : d(d_), rows(rows_), cols(cols_) {
  if (d < 0 || rows < 0 || cols < 0) fail("ShapeMismatch", "negative dimension");
}

IntLaurentMatrix &IntLaurentMatrix::add(const Exponent &gamma, Index i, Index j, std::int64_t coefficient) {
  if (static_cast<int>(gamma.size()) != d) fail("ShapeMismatch", "exponent length mismatch");
  if (i < 0 || i >= rows || j < 0 || j >= cols) fail("ShapeMismatch", "entry outside the matrix");
  auto it = terms.find(gamma);
  if (it == terms.end()) it = terms.emplace(gamma, IMatrix::Zero(rows, cols)).first;
  it->second(i, j) += coefficient;
  return *this;
}

IntLaurentMatrix &IntLaurentMatrix::add(const Exponent &gamma, const IMatrix &block) {
  if (static_cast<int>(gamma.size()) != d) fail("ShapeMismatch", "exponent length mismatch");
  if (block.rows() != rows || block.cols() != cols) fail("ShapeMismatch", "block shape mismatch");
  auto it = terms.find(gamma);
  if (it == terms.end())
    terms.emplace(gamma, block);
  else
    it->second += block;
  return *this;
}

bool IntLaurentMatrix::is_zero() const {
  for (const auto &[g, block] : terms)
    if (block.size() > 0 && (block.array() != 0).any()) return false;
  return true;
}

LaurentMatrix IntLaurentMatrix::to_complex() const {
  LaurentMatrix out(d, rows, cols);
  for (const auto &[g, block] : terms)
    if (block.size() > 0 && (block.array() != 0).any()) out.add(g, block.cast<double>().cast<Complex>());
  return out;
}

IntLaurentMatrix product(const IntLaurentMatrix &a, const IntLaurentMatrix &b) {
  if (a.d != b.d || a.cols != b.rows) fail("ShapeMismatch", "integer Laurent product shapes differ");
  IntLaurentMatrix out(a.d, a.rows, b.cols);
  for (const auto &[ga, ba] : a.terms)
    for (const auto &[gb, bb] : b.terms) {
      Exponent g(ga.size());
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = ga[j] + gb[j];
      out.add(g, ba * bb);
    }
  return out;
}

GammaCW::GammaCW(int d, std::vector<Index> cells, std::vector<IntLaurentMatrix> differentials)
    : d_(d), cells_(std::move(cells)), diffs_(std::move(differentials)) {
  if (d < 0) fail("ShapeMismatch", "negative deck-group rank");
  if (cells_.empty()) cells_ = {0};
  for (Index m : cells_)
    if (m < 0) fail("ShapeMismatch", "negative cell count");
  if (diffs_.size() + 1 != cells_.size())
    fail("ShapeMismatch", "need one differential between consecutive dimensions");
  for (std::size_t p = 0; p < diffs_.size(); ++p) {
    const IntLaurentMatrix &c = diffs_[p];
    if (c.d != d || c.rows != cells_[p + 1] || c.cols != cells_[p])
      fail("ShapeMismatch", "differential " + std::to_string(p) + " has the wrong shape");
    for (const auto &[g, block] : c.terms)
      if (static_cast<int>(g.size()) != d || block.rows() != c.rows || block.cols() != c.cols)
        fail("ShapeMismatch", "differential " + std::to_string(p) + " has a malformed term");
  }
  for (std::size_t p = 0; p + 1 < diffs_.size(); ++p)
    if (!product(diffs_[p + 1], diffs_[p]).is_zero())
      fail("CochainViolation", "c_" + std::to_string(p + 1) + " c_" + std::to_string(p) + " != 0");
}

Index GammaCW::cells(int p) const {
  if (p < 0 || p > top_dimension()) return 0;
  return cells_[static_cast<std::size_t>(p)];
}

IntLaurentMatrix GammaCW::differential(int p) const {
  if (p >= 0 && p < static_cast<int>(diffs_.size())) return diffs_[static_cast<std::size_t>(p)];
  return IntLaurentMatrix(d_, cells(p + 1), cells(p));
}

std::int64_t GammaCW::euler_characteristic() const {
  std::int64_t chi = 0;
  for (std::size_t p = 0; p < cells_.size(); ++p) chi += (p % 2 == 0 ? 1 : -1) * cells_[p];
  return chi;
}

GammaCW circle() {
  IntLaurentMatrix c(1, 1, 1);
  c.add({1}, 0, 0, 1);
  c.add({0}, 0, 0, -1);
  return GammaCW(1, {1, 1}, {c});
}

GammaCW torus(int k) {
  if (k < 1) fail("ShapeMismatch", "torus rank must be >= 1");
  GammaCW out = circle();
  for (int i = 1; i < k; ++i) out = external_product(out, circle());
  return out;
}

namespace {

IMatrix ikron(const IMatrix &a, const IMatrix &b) {
  IMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Exponent concat(const Exponent &a, const Exponent &b) {
  Exponent g = a;
  g.insert(g.end(), b.begin(), b.end());
  return g;
}

} // namespace

GammaCW external_product(const GammaCW &x, const GammaCW &y) {
  const int d = x.d() + y.d();
  const int top = x.top_dimension() + y.top_dimension();
  std::vector<Index> cells(static_cast<std::size_t>(top + 1), 0);
  // offsets[n][p]: position of the X_p (x) Y_{n-p} block inside degree n
  std::vector<std::vector<Index>> offsets(static_cast<std::size_t>(top + 1));
  for (int n = 0; n <= top; ++n) {
    Index off = 0;
    for (int p = 0; p <= n; ++p) {
      offsets[static_cast<std::size_t>(n)].push_back(off);
      off += x.cells(p) * y.cells(n - p);
    }
    cells[static_cast<std::size_t>(n)] = off;
  }
  const Exponent zx(static_cast<std::size_t>(x.d()), 0);
  const Exponent zy(static_cast<std::size_t>(y.d()), 0);
  std::vector<IntLaurentMatrix> diffs;
  for (int n = 0; n < top; ++n) {
    IntLaurentMatrix c(d, cells[static_cast<std::size_t>(n + 1)], cells[static_cast<std::size_t>(n)]);
    for (int p = 0; p <= n; ++p) {
      const int q = n - p;
      const Index mx = x.cells(p), my = y.cells(q);
      if (mx == 0 || my == 0) continue;
      const Index col = offsets[static_cast<std::size_t>(n)][static_cast<std::size_t>(p)];
      if (x.cells(p + 1) > 0) {
        const Index row = offsets[static_cast<std::size_t>(n + 1)][static_cast<std::size_t>(p + 1)];
        for (const auto &[g, block] : x.differential(p).terms) {
          IMatrix full = IMatrix::Zero(c.rows, c.cols);
          full.block(row, col, block.rows() * my, mx * my) = ikron(block, IMatrix::Identity(my, my));
          c.add(concat(g, zy), full);
        }
      }
      if (y.cells(q + 1) > 0) {
        const Index row = offsets[static_cast<std::size_t>(n + 1)][static_cast<std::size_t>(p)];
        const std::int64_t sign = p % 2 == 0 ? 1 : -1;
        for (const auto &[g, block] : y.differential(q).terms) {
          IMatrix full = IMatrix::Zero(c.rows, c.cols);
          full.block(row, col, mx * block.rows(), mx * my) = sign * ikron(IMatrix::Identity(mx, mx), block);
          c.add(concat(zx, g), full);
        }
      }
    }
    diffs.push_back(std::move(c));
  }
  return GammaCW(d, std::move(cells), std::move(diffs));
}

GammaCW product(const GammaCW &x, const FiniteComplex &f) {
  std::vector<IntLaurentMatrix> diffs;
  for (int n = 0; n < f.top_degree(); ++n) {
    const CMatrix m = f.differential(n);
    IntLaurentMatrix c(0, m.rows(), m.cols());
    IMatrix block(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) {
        const Complex v = m(i, j);
        const double r = std::round(v.real());
        if (std::abs(v.imag()) > 1e-12 || std::abs(v.real() - r) > 1e-12 || std::abs(r) > 9e15)
          fail("NonIntegralFactor", "finite factor has a non-integer entry");
        block(i, j) = static_cast<std::int64_t>(r);
      }
    c.add(Exponent{}, block);
    diffs.push_back(std::move(c));
  }
  return external_product(x, GammaCW(0, f.dims(), std::move(diffs)));
}

ZdComplex assemble(const GammaCW &x, const TwistedRep &rho) {
  if (rho.d != x.d())
    fail("RankMismatch", "representation has rank " + std::to_string(rho.d) + ", complex has " +
                             std::to_string(x.d()));
  if (x.differentials().empty()) {
    std::vector<Index> ranks = x.cells();
    for (Index &r : ranks) r *= rho.dim();
    return ZdComplex::zero(x.d(), ranks);
  }
  std::vector<LaurentMatrix> diffs;
  for (const IntLaurentMatrix &c : x.differentials()) diffs.push_back(twist(c.to_complex(), rho));
  return ZdComplex(x.d(), std::move(diffs));
}

GammaCW induce(const GammaCW &x, const std::vector<int> &embed, int d) {
  if (static_cast<int>(embed.size()) != x.d())
    fail("BadEmbedding", "embedding has " + std::to_string(embed.size()) + " coordinates, source rank is " +
                             std::to_string(x.d()));
  std::set<int> seen;
  for (int e : embed) {
    if (e < 0 || e >= d) fail("BadEmbedding", "coordinate " + std::to_string(e) + " outside the target");
    if (!seen.insert(e).second) fail("BadEmbedding", "embedding is not injective");
  }
  std::vector<IntLaurentMatrix> diffs;
  for (const IntLaurentMatrix &c : x.differentials()) {
    IntLaurentMatrix out(d, c.rows, c.cols);
    for (const auto &[g, block] : c.terms) {
      Exponent h(static_cast<std::size_t>(d), 0);
      for (std::size_t j = 0; j < g.size(); ++j) h[static_cast<std::size_t>(embed[j])] = g[j];
      out.add(h, block);
    }
    diffs.push_back(std::move(out));
  }
  return GammaCW(d, x.cells(), std::move(diffs));
}

} // namespace l2inv

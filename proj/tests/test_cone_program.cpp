#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ranslice/cone_program.hpp"

using namespace ranslice;

namespace {

CMatrix random_herm(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  return a + a.adjoint().eval();
}

// Writes a Hermitian matrix into the block's slots of x.
void store(const HermBlock& b, const CMatrix& m, Eigen::VectorXd& x) {
  for (int a = 0; a < b.n; ++a) x(b.diag(a)) = m(a, a).real();
  for (int q = 0; q < b.n; ++q)
    for (int p = 0; p < q; ++p) {
      x(b.re(p, q)) = m(p, q).real();
      x(b.im(p, q)) = m(p, q).imag();
    }
}

}  // namespace

TEST_CASE("affine expressions") {
  Eigen::VectorXd x(3);
  x << 1.0, 2.0, 3.0;
  AffineExpr e = AffineExpr::var(0, 2.0) + AffineExpr::var(2) + 1.5;
  CHECK(e.eval(x) == doctest::Approx(6.5));
  AffineExpr f = 2.0 * e - AffineExpr::var(0, 4.0);
  CHECK(f.eval(x) == doctest::Approx(9.0));
  f.compact();
  CHECK(f.terms.size() == 1);
  CHECK(f.terms[0].first == 2);
  CHECK(f.terms[0].second == doctest::Approx(2.0));
  AffineExpr g;
  g.add(1, 1.0).add(1, 2.0);
  g.compact();
  REQUIRE(g.terms.size() == 1);
  CHECK(g.terms[0].second == 3.0);
}

TEST_CASE("hermitian block layout covers n^2 distinct slots") {
  ConeProgram p;
  p.add_scalar("t");
  int b = p.add_herm("V", 4);
  const HermBlock& blk = p.blocks()[b];
  CHECK(blk.size() == 16);
  CHECK(p.num_vars() == 17);
  std::vector<int> seen;
  for (int a = 0; a < 4; ++a) seen.push_back(blk.diag(a));
  for (int q = 0; q < 4; ++q)
    for (int r = 0; r < q; ++r) {
      seen.push_back(blk.re(r, q));
      seen.push_back(blk.im(r, q));
    }
  std::sort(seen.begin(), seen.end());
  for (int k = 0; k < 16; ++k) CHECK(seen[k] == blk.offset + k);
}

TEST_CASE("trace_inner matches a direct trace") {
  std::mt19937_64 rng(2);
  ConeProgram p;
  int b = p.add_herm("V", 3);
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix h = random_herm(3, rng), m = random_herm(3, rng);
    Eigen::VectorXd x(p.num_vars());
    store(p.blocks()[b], m, x);
    CHECK(p.herm_value(b, x).isApprox(m));
    const double direct = (h * m).trace().real();
    CHECK(p.trace_inner(h, b).eval(x) == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK(p.partial_trace(b, 1, 2).terms.size() == 2);
  CHECK_THROWS(p.trace_inner(CMatrix::Identity(2, 2), b));
}

TEST_CASE("realified svec reproduces the real embedding") {
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 3, 4}) {
    ConeProgram p;
    int b = p.add_herm("G", n);
    CMatrix m = random_herm(n, rng);
    Eigen::VectorXd x(p.num_vars());
    store(p.blocks()[b], m, x);
    auto rows = p.realified_svec(b);
    REQUIRE(rows.size() == static_cast<std::size_t>(n * (2 * n + 1)));
    Eigen::MatrixXd emb(2 * n, 2 * n);
    emb << m.real(), -m.imag(), m.imag(), m.real();
    std::size_t k = 0;
    for (int q = 0; q < 2 * n; ++q)
      for (int r = 0; r <= q; ++r, ++k) {
        const double want = r == q ? emb(r, q) : std::sqrt(2.0) * emb(r, q);
        CHECK(rows[k].eval(x) == doctest::Approx(want).epsilon(1e-12));
      }
    // spectrum of the embedding is the Hermitian spectrum, doubled
    Eigen::SelfAdjointEigenSolver<CMatrix> hs(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rs(emb);
    for (int i = 0; i < n; ++i) {
      CHECK(rs.eigenvalues()(2 * i) == doctest::Approx(hs.eigenvalues()(i)).epsilon(1e-9));
      CHECK(rs.eigenvalues()(2 * i + 1) == doctest::Approx(hs.eigenvalues()(i)).epsilon(1e-9));
    }
  }
}

TEST_CASE("census counts cones and variables") {
  ConeProgram p;
  int t = p.add_scalar("t");
  int u = p.add_scalar("u");
  int b = p.add_herm("V", 2);
  p.add_nonneg(AffineExpr::var(t));
  p.add_soc(AffineExpr::var(t), {AffineExpr::var(u)});
  p.add_exp(AffineExpr::var(t), 1.0, AffineExpr::var(u));
  p.add_exp(AffineExpr::var(u), 1.0, AffineExpr::var(t));
  p.add_psd(b);
  ConeCensus c = cone_census(p);
  CHECK(c.nonneg == 1);
  CHECK(c.soc == 1);
  CHECK(c.exp == 2);
  CHECK(c.psd == 1);
  CHECK(c.rsoc == 0);
  CHECK(c.scalar_vars == 2);
  CHECK(c.psd_vars == 1);
  CHECK(std::string(cone_name(ConeKind::exp)) == "exp");
}

TEST_CASE("merge adds census and shifts indices") {
  ConeProgram a;
  int x = a.add_scalar("x");
  int va = a.add_herm("V", 2);
  a.add_nonneg(AffineExpr::var(x, 1.0) - 1.0, "lower");
  a.add_psd(va);
  a.add_objective(AffineExpr::var(x));
  a.add_quadratic(x, x, 2.0);

  ConeProgram b = a;
  ConeProgram m = a;
  m.merge(b, "b.");
  CHECK(cone_census(m) == cone_census(a) + cone_census(b));
  CHECK(m.num_vars() == 2 * a.num_vars());
  CHECK(m.block("b.V") == 1);
  CHECK(m.blocks()[1].offset == a.num_vars() + a.blocks()[0].offset);
  CHECK(m.constraints()[3].block == 1);
  const int bx = m.scalar("b.x");
  CHECK(bx == a.num_vars() + x);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(m.num_vars());
  z(x) = 2.0;
  z(bx) = 3.0;
  CHECK(m.objective_value(z) == doctest::Approx(2.0 + 4.0 + 3.0 + 9.0));
  CHECK_THROWS(m.scalar("missing"));
}

TEST_CASE("serialization round trip") {
  ConeProgram p;
  int x = p.add_scalar("x");
  int y = p.add_scalar("y");
  int b = p.add_herm("G", 3);
  p.add_zero(AffineExpr::var(x) + AffineExpr::var(y, -0.25) + 1e-17, "eq");
  p.add_rsoc(AffineExpr::var(x), 0.5, {AffineExpr::var(y)}, "r");
  p.add_exp(AffineExpr::var(x), 1.0, AffineExpr::var(y, 0.1), "e");
  p.add_psd(b, "psd");
  p.add_objective(AffineExpr::var(x, 3.0) + 0.125);
  p.add_quadratic(x, y, -0.5);
  std::stringstream ss;
  p.write(ss);
  ConeProgram q = ConeProgram::read(ss);
  CHECK(cone_census(q) == cone_census(p));
  CHECK(q.num_vars() == p.num_vars());
  std::stringstream again;
  q.write(again);
  std::stringstream first;
  p.write(first);
  CHECK(again.str() == first.str());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd z(p.num_vars());
  for (int k = 0; k < z.size(); ++k) z(k) = g(rng);
  CHECK(q.objective_value(z) == doctest::Approx(p.objective_value(z)));
  CHECK(q.max_violation(z) == doctest::Approx(p.max_violation(z)));

  std::istringstream bad("not a program");
  CHECK_THROWS(ConeProgram::read(bad));
}

TEST_CASE("constraint violation measures") {
  ConeProgram p;
  int x = p.add_scalar("x");
  int y = p.add_scalar("y");
  int z = p.add_scalar("z");
  p.add_exp(AffineExpr::var(x), AffineExpr::var(y), AffineExpr::var(z), "e");
  Eigen::VectorXd v(3);
  v << std::exp(1.0), 1.0, 1.0;  // on the boundary
  CHECK(p.max_violation(v) < 1e-12);
  v << 2.0, 1.0, 1.0;
  std::string tag;
  CHECK(p.max_violation(v, &tag) > 0.0);
  CHECK(tag == "e");

  ConeProgram s;
  int t = s.add_scalar("t");
  int a = s.add_scalar("a");
  s.add_soc(AffineExpr::var(t), {AffineExpr::var(a)});
  Eigen::VectorXd w(2);
  w << 1.0, 1.0;
  CHECK(s.max_violation(w) < 1e-15);
  w << 1.0, 3.0;
  CHECK(s.max_violation(w) == doctest::Approx(2.0 / 3.0));

  ConeProgram q;
  int b = q.add_herm("V", 2);
  q.add_psd(b);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(4);
  const HermBlock& blk = q.blocks()[b];
  m(blk.diag(0)) = 1.0;
  m(blk.diag(1)) = 1.0;
  m(blk.re(0, 1)) = 2.0;  // eigenvalues 3 and -1
  CHECK(q.max_violation(m) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("negative diagonal quadratic is rejected") {
  ConeProgram p;
  int x = p.add_scalar("x");
  CHECK_THROWS(p.add_quadratic(x, x, -1.0));
}

#include "ranslice/cone_program.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace ranslice {

AffineExpr AffineExpr::var(int index, double coeff) {
  AffineExpr e;
  e.terms.push_back({index, coeff});
  return e;
}

AffineExpr& AffineExpr::add(int index, double coeff) {
  if (coeff != 0.0) terms.push_back({index, coeff});
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  constant += o.constant;
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  return *this;
}

AffineExpr& AffineExpr::operator*=(double k) {
  constant *= k;
  for (auto& t : terms) t.second *= k;
  return *this;
}

double AffineExpr::eval(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x(i);
  return v;
}

void AffineExpr::compact() {
  std::map<int, double> acc;
  for (const auto& [i, c] : terms) acc[i] += c;
  terms.clear();
  for (const auto& [i, c] : acc)
    if (c != 0.0) terms.push_back({i, c});
}

AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
AffineExpr operator-(AffineExpr a, const AffineExpr& b) {
  AffineExpr nb = b;
  nb *= -1.0;
  return a += nb;
}
AffineExpr operator*(double k, AffineExpr a) { return a *= k; }

const char* cone_name(ConeKind k) {
  switch (k) {
    case ConeKind::zero: return "zero";
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::soc: return "soc";
    case ConeKind::rsoc: return "rsoc";
    case ConeKind::exp: return "exp";
    case ConeKind::psd: return "psd";
  }
  return "?";
}

namespace {

ConeKind cone_from_name(const std::string& s) {
  for (auto k : {ConeKind::zero, ConeKind::nonneg, ConeKind::soc, ConeKind::rsoc, ConeKind::exp, ConeKind::psd})
    if (s == cone_name(k)) return k;
  throw std::runtime_error("unknown cone kind " + s);
}

}  // namespace

int HermBlock::re(int a, int b) const {
  if (!(a < b)) throw std::out_of_range("HermBlock::re expects a < b");
  return offset + n + b * (b - 1) / 2 + a;
}

int HermBlock::im(int a, int b) const {
  if (!(a < b)) throw std::out_of_range("HermBlock::im expects a < b");
  return offset + n + n * (n - 1) / 2 + b * (b - 1) / 2 + a;
}

ConeCensus& ConeCensus::operator+=(const ConeCensus& o) {
  zero += o.zero;
  nonneg += o.nonneg;
  soc += o.soc;
  rsoc += o.rsoc;
  exp += o.exp;
  psd += o.psd;
  scalar_vars += o.scalar_vars;
  psd_vars += o.psd_vars;
  return *this;
}

ConeCensus operator+(ConeCensus a, const ConeCensus& b) { return a += b; }

int ConeProgram::add_scalar(const std::string& name) {
  scalar_names_.push_back(name);
  scalar_index_.push_back(num_vars_);
  return num_vars_++;
}

int ConeProgram::add_herm(const std::string& name, int n) {
  if (n < 1) throw std::invalid_argument("add_herm: dimension must be positive");
  blocks_.push_back({name, n, num_vars_});
  num_vars_ += n * n;
  return static_cast<int>(blocks_.size()) - 1;
}

void ConeProgram::add_constraint(ConeKind kind, std::vector<AffineExpr> rows, const std::string& tag) {
  for (auto& r : rows) {
    r.compact();
    for (const auto& [i, c] : r.terms)
      if (i < 0 || i >= num_vars_) throw std::out_of_range("constraint references undeclared variable");
  }
  std::size_t need = kind == ConeKind::exp ? 3 : kind == ConeKind::rsoc ? 2 : 1;
  if (kind != ConeKind::psd && rows.size() < need) throw std::invalid_argument("cone has too few components");
  if (kind == ConeKind::exp && rows.size() != 3) throw std::invalid_argument("exp cone needs three components");
  if ((kind == ConeKind::zero || kind == ConeKind::nonneg) && rows.size() != 1) {
    for (auto& r : rows) add_constraint(kind, {r}, tag);
    return;
  }
  constraints_.push_back({kind, std::move(rows), -1, tag});
}

void ConeProgram::add_zero(AffineExpr e, const std::string& tag) { add_constraint(ConeKind::zero, {std::move(e)}, tag); }
void ConeProgram::add_nonneg(AffineExpr e, const std::string& tag) {
  add_constraint(ConeKind::nonneg, {std::move(e)}, tag);
}

void ConeProgram::add_soc(AffineExpr t, std::vector<AffineExpr> x, const std::string& tag) {
  x.insert(x.begin(), std::move(t));
  add_constraint(ConeKind::soc, std::move(x), tag);
}

void ConeProgram::add_rsoc(AffineExpr u, AffineExpr v, std::vector<AffineExpr> x, const std::string& tag) {
  x.insert(x.begin(), std::move(v));
  x.insert(x.begin(), std::move(u));
  add_constraint(ConeKind::rsoc, std::move(x), tag);
}

void ConeProgram::add_exp(AffineExpr x1, AffineExpr x2, AffineExpr x3, const std::string& tag) {
  add_constraint(ConeKind::exp, {std::move(x1), std::move(x2), std::move(x3)}, tag);
}

void ConeProgram::add_psd(int block, const std::string& tag) {
  if (block < 0 || block >= static_cast<int>(blocks_.size())) throw std::out_of_range("add_psd: unknown block");
  constraints_.push_back({ConeKind::psd, {}, block, tag});
}

AffineExpr ConeProgram::trace_inner(const CMatrix& h, int b) const {
  const HermBlock& blk = blocks_.at(b);
  if (h.rows() != blk.n || h.cols() != blk.n) throw std::invalid_argument("trace_inner: dimension mismatch");
  AffineExpr e;
  for (int a = 0; a < blk.n; ++a) e.add(blk.diag(a), h(a, a).real());
  for (int q = 0; q < blk.n; ++q)
    for (int p = 0; p < q; ++p) {
      e.add(blk.re(p, q), 2.0 * h(p, q).real());
      e.add(blk.im(p, q), 2.0 * h(p, q).imag());
    }
  return e;
}

AffineExpr ConeProgram::partial_trace(int b, int first, int count) const {
  const HermBlock& blk = blocks_.at(b);
  AffineExpr e;
  for (int a = first; a < first + count; ++a) e.add(blk.diag(a), 1.0);
  return e;
}

void ConeProgram::add_objective(const AffineExpr& e) {
  objective_ += e;
  objective_.compact();
}

void ConeProgram::add_quadratic(int i, int j, double coeff) {
  if (i > j) std::swap(i, j);
  if (coeff < 0.0 && i == j) throw std::invalid_argument("add_quadratic: negative diagonal coefficient");
  quad_.push_back({i, j, coeff});
}

int ConeProgram::scalar(const std::string& name) const {
  for (std::size_t k = 0; k < scalar_names_.size(); ++k)
    if (scalar_names_[k] == name) return scalar_index_[k];
  throw std::out_of_range("no scalar named " + name);
}

int ConeProgram::block(const std::string& name) const {
  for (std::size_t k = 0; k < blocks_.size(); ++k)
    if (blocks_[k].name == name) return static_cast<int>(k);
  throw std::out_of_range("no block named " + name);
}

double ConeProgram::objective_value(const Eigen::VectorXd& x) const {
  double v = objective_.eval(x);
  for (const auto& [i, j, c] : quad_) v += (i == j ? 0.5 : 1.0) * c * x(i) * x(j);
  return v;
}

CMatrix ConeProgram::herm_value(int b, const Eigen::VectorXd& x) const {
  const HermBlock& blk = blocks_.at(b);
  CMatrix m(blk.n, blk.n);
  for (int a = 0; a < blk.n; ++a) m(a, a) = x(blk.diag(a));
  for (int q = 0; q < blk.n; ++q)
    for (int p = 0; p < q; ++p) {
      std::complex<double> v(x(blk.re(p, q)), x(blk.im(p, q)));
      m(p, q) = v;
      m(q, p) = std::conj(v);
    }
  return m;
}

std::vector<AffineExpr> ConeProgram::realified_svec(int b) const {
  const HermBlock& blk = blocks_.at(b);
  const int n = blk.n;
  // entry (p,q) of the real embedding as an affine expression
  auto entry = [&](int p, int q) {
    if (p > q) std::swap(p, q);
    bool pu = p < n, qu = q < n;
    if (pu == qu) {
      int a = pu ? p : p - n, c = qu ? q : q - n;
      return a == c ? AffineExpr::var(blk.diag(a)) : AffineExpr::var(blk.re(std::min(a, c), std::max(a, c)));
    }
    // p in the upper half, q in the lower half: -Im(M)(p, q-n)
    int a = p, c = q - n;
    if (a == c) return AffineExpr(0.0);
    return a < c ? AffineExpr::var(blk.im(a, c), -1.0) : AffineExpr::var(blk.im(c, a), 1.0);
  };
  std::vector<AffineExpr> rows;
  for (int q = 0; q < 2 * n; ++q)
    for (int p = 0; p <= q; ++p) {
      AffineExpr e = entry(p, q);
      if (p != q) e *= std::sqrt(2.0);
      rows.push_back(e);
    }
  return rows;
}

double ConeProgram::max_violation(const Eigen::VectorXd& x, std::string* worst_tag) const {
  double worst = 0.0;
  for (const auto& con : constraints_) {
    double v = 0.0;
    std::vector<double> s;
    for (const auto& r : con.rows) s.push_back(r.eval(x));
    double mag = 1.0;
    for (double q : s) mag = std::max(mag, std::abs(q));
    switch (con.kind) {
      case ConeKind::zero: v = std::abs(s[0]) / mag; break;
      case ConeKind::nonneg: v = std::max(0.0, -s[0]) / mag; break;
      case ConeKind::soc: {
        double nrm = 0.0;
        for (std::size_t k = 1; k < s.size(); ++k) nrm += s[k] * s[k];
        v = std::max(0.0, std::sqrt(nrm) - s[0]) / mag;
        break;
      }
      case ConeKind::rsoc: {
        double nrm = 0.0;
        for (std::size_t k = 2; k < s.size(); ++k) nrm += s[k] * s[k];
        double t = (s[0] + s[1]) / std::sqrt(2.0), u = (s[0] - s[1]) / std::sqrt(2.0);
        v = std::max({0.0, std::sqrt(nrm + u * u) - t}) / mag;
        break;
      }
      case ConeKind::exp: {
        const double x1 = s[0], x2 = s[1], x3 = s[2];
        double scale = 1.0 + std::abs(x1) + std::abs(x2) + std::abs(x3);
        if (x2 > 1e-300 && x1 > 0.0) {
          // x2 ln(x1/x2) >= x3
          v = std::max(0.0, x3 - x2 * std::log(x1 / x2)) / scale;
          // points with tiny x2 far inside are fine; report the linear gap instead when smaller
          double lin = std::max(0.0, x2 * std::exp(std::min(x3 / x2, 700.0)) - x1) / scale;
          v = std::min(v, lin);
        } else {
          v = (std::max(0.0, -x1) + std::max(0.0, -x2) + std::max(0.0, x3)) / scale;
        }
        break;
      }
      case ConeKind::psd: {
        CMatrix m = herm_value(con.block, x);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
        double lmin = es.eigenvalues().minCoeff();
        double lmax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        v = std::max(0.0, -lmin) / lmax;
        break;
      }
    }
    if (v > worst) {
      worst = v;
      if (worst_tag) *worst_tag = con.tag.empty() ? cone_name(con.kind) : con.tag;
    }
  }
  return worst;
}

void ConeProgram::merge(const ConeProgram& other, const std::string& prefix) {
  const int shift = num_vars_;
  // Preserve the relative layout of `other` so its offsets shift uniformly.
  for (std::size_t k = 0; k < other.scalar_names_.size(); ++k) {
    scalar_names_.push_back(prefix + other.scalar_names_[k]);
    scalar_index_.push_back(other.scalar_index_[k] + shift);
  }
  for (const auto& b : other.blocks_) blocks_.push_back({prefix + b.name, b.n, b.offset + shift});
  num_vars_ += other.num_vars_;
  const int block_shift = static_cast<int>(blocks_.size() - other.blocks_.size());
  auto moved = [&](AffineExpr e) {
    for (auto& t : e.terms) t.first += shift;
    return e;
  };
  for (const auto& c : other.constraints_) {
    Constraint n = c;
    for (auto& r : n.rows) r = moved(r);
    if (n.block >= 0) n.block += block_shift;
    constraints_.push_back(std::move(n));
  }
  objective_ += moved(other.objective_);
  for (const auto& [i, j, c] : other.quad_) quad_.push_back({i + shift, j + shift, c});
}

// Text format, one record per line:
//   conic-program 1 <num_vars>
//   scalar <index> <name>
//   herm <n> <offset> <name>
//   objective <constant> <nterms> (<index> <coeff>)*
//   quad <i> <j> <coeff>
//   cone <kind> <nrows> <block> <tag|->
//   row <constant> <nterms> (<index> <coeff>)*
//   end
namespace {

void write_expr(std::ostream& os, const AffineExpr& e) {
  os << e.constant << ' ' << e.terms.size();
  for (const auto& [i, c] : e.terms) os << ' ' << i << ' ' << c;
}

AffineExpr read_expr(std::istream& is) {
  AffineExpr e;
  std::size_t n = 0;
  is >> e.constant >> n;
  for (std::size_t k = 0; k < n; ++k) {
    int i;
    double c;
    is >> i >> c;
    e.terms.push_back({i, c});
  }
  return e;
}

}  // namespace

void ConeProgram::write(std::ostream& os) const {
  os << std::setprecision(17);
  os << "conic-program 1 " << num_vars_ << '\n';
  for (std::size_t k = 0; k < scalar_names_.size(); ++k)
    os << "scalar " << scalar_index_[k] << ' ' << scalar_names_[k] << '\n';
  for (const auto& b : blocks_) os << "herm " << b.n << ' ' << b.offset << ' ' << b.name << '\n';
  os << "objective ";
  write_expr(os, objective_);
  os << '\n';
  for (const auto& [i, j, c] : quad_) os << "quad " << i << ' ' << j << ' ' << c << '\n';
  for (const auto& c : constraints_) {
    os << "cone " << cone_name(c.kind) << ' ' << c.rows.size() << ' ' << c.block << ' '
       << (c.tag.empty() ? "-" : c.tag) << '\n';
    for (const auto& r : c.rows) {
      os << "row ";
      write_expr(os, r);
      os << '\n';
    }
  }
  os << "end\n";
}

ConeProgram ConeProgram::read(std::istream& is) {
  ConeProgram p;
  std::string word;
  int version = 0;
  is >> word >> version >> p.num_vars_;
  if (word != "conic-program" || version != 1) throw std::runtime_error("not a conic-program v1 stream");
  while (is >> word) {
    if (word == "end") return p;
    if (word == "scalar") {
      int i;
      std::string name;
      is >> i >> name;
      p.scalar_index_.push_back(i);
      p.scalar_names_.push_back(name);
    } else if (word == "herm") {
      HermBlock b;
      is >> b.n >> b.offset >> b.name;
      p.blocks_.push_back(b);
    } else if (word == "objective") {
      p.objective_ = read_expr(is);
    } else if (word == "quad") {
      int i, j;
      double c;
      is >> i >> j >> c;
      p.quad_.push_back({i, j, c});
    } else if (word == "cone") {
      std::string kind, tag;
      std::size_t rows;
      Constraint c;
      is >> kind >> rows >> c.block >> tag;
      c.kind = cone_from_name(kind);
      c.tag = tag == "-" ? "" : tag;
      for (std::size_t k = 0; k < rows; ++k) {
        is >> word;
        if (word != "row") throw std::runtime_error("expected row record");
        c.rows.push_back(read_expr(is));
      }
      p.constraints_.push_back(std::move(c));
    } else {
      throw std::runtime_error("unexpected record " + word);
    }
  }
  throw std::runtime_error("conic-program stream missing end record");
}

ConeCensus cone_census(const ConeProgram& p) {
  ConeCensus c;
  for (const auto& con : p.constraints()) {
    switch (con.kind) {
      case ConeKind::zero: ++c.zero; break;
      case ConeKind::nonneg: ++c.nonneg; break;
      case ConeKind::soc: ++c.soc; break;
      case ConeKind::rsoc: ++c.rsoc; break;
      case ConeKind::exp: ++c.exp; break;
      case ConeKind::psd: ++c.psd; break;
    }
  }
  c.scalar_vars = p.num_scalars();
  c.psd_vars = static_cast<int>(p.blocks().size());
  return c;
}

}  // namespace ranslice

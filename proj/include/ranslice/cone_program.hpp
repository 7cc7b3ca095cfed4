#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ranslice/scenario.hpp"

namespace ranslice {

/// Sparse affine expression: constant + sum coeff * x[var].
struct AffineExpr {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  AffineExpr() = default;
  AffineExpr(double c) : constant(c) {}  // NOLINT(google-explicit-constructor)
  static AffineExpr var(int index, double coeff = 1.0);

  AffineExpr& add(int index, double coeff);
  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator*=(double k);
  double eval(const Eigen::VectorXd& x) const;
  /// Merges duplicate indices and drops exact zeros.
  void compact();
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator*(double k, AffineExpr a);

enum class ConeKind {
  zero,    // expr == 0
  nonneg,  // expr >= 0
  soc,     // t >= ||x||, components (t, x...)
  rsoc,    // 2 u v >= ||x||^2, u,v >= 0, components (u, v, x...)
  exp,     // x1 >= x2 exp(x3/x2), x2 > 0, components (x1, x2, x3)
  psd      // Hermitian block membership
};

const char* cone_name(ConeKind k);

struct Constraint {
  ConeKind kind = ConeKind::nonneg;
  std::vector<AffineExpr> rows;  // empty for psd
  int block = -1;                // Hermitian block index for psd
  std::string tag;
};

/// Hermitian n x n matrix variable stored as n^2 reals: the n diagonal entries,
/// then Re and Im of the strict upper triangle (column-major over (a<b)).
struct HermBlock {
  std::string name;
  int n = 0;
  int offset = 0;

  int diag(int a) const { return offset + a; }
  int re(int a, int b) const;  // a < b
  int im(int a, int b) const;  // a < b
  int size() const { return n * n; }
};

struct ConeCensus {
  int zero = 0;
  int nonneg = 0;
  int soc = 0;
  int rsoc = 0;
  int exp = 0;
  int psd = 0;
  int scalar_vars = 0;  // excluding Hermitian parameters
  int psd_vars = 0;

  ConeCensus& operator+=(const ConeCensus& o);
  bool operator==(const ConeCensus& o) const = default;
};

ConeCensus operator+(ConeCensus a, const ConeCensus& b);

class ConeProgram {
 public:
  int add_scalar(const std::string& name);
  int add_herm(const std::string& name, int n);

  void add_constraint(ConeKind kind, std::vector<AffineExpr> rows, const std::string& tag = {});
  void add_zero(AffineExpr e, const std::string& tag = {});
  void add_nonneg(AffineExpr e, const std::string& tag = {});
  void add_soc(AffineExpr t, std::vector<AffineExpr> x, const std::string& tag = {});
  void add_rsoc(AffineExpr u, AffineExpr v, std::vector<AffineExpr> x, const std::string& tag = {});
  void add_exp(AffineExpr x1, AffineExpr x2, AffineExpr x3, const std::string& tag = {});
  void add_psd(int block, const std::string& tag = {});

  /// tr(H M) for Hermitian coefficient H and block M (real-valued for Hermitian H).
  AffineExpr trace_inner(const CMatrix& h, int block) const;
  /// Sum of diagonal entries a in [first, first+count).
  AffineExpr partial_trace(int block, int first, int count) const;

  void add_objective(const AffineExpr& e);
  /// Adds 0.5 * coeff * x[i] * x[j] (+ the symmetric counterpart when i != j).
  void add_quadratic(int i, int j, double coeff);

  int num_vars() const { return num_vars_; }
  int num_scalars() const { return static_cast<int>(scalar_names_.size()); }
  const std::vector<std::string>& scalar_names() const { return scalar_names_; }
  const std::vector<int>& scalar_indices() const { return scalar_index_; }
  const std::vector<HermBlock>& blocks() const { return blocks_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const AffineExpr& objective() const { return objective_; }
  /// Upper-triangular quadratic entries (i <= j) of P in 0.5 x'Px.
  const std::vector<std::tuple<int, int, double>>& quadratic() const { return quad_; }

  int scalar(const std::string& name) const;  // throws if missing
  int block(const std::string& name) const;

  double objective_value(const Eigen::VectorXd& x) const;
  /// Hermitian matrix held by block b at x.
  CMatrix herm_value(int b, const Eigen::VectorXd& x) const;
  /// Worst constraint violation at x; each cone scaled by 1 + magnitude of its entries.
  double max_violation(const Eigen::VectorXd& x, std::string* worst_tag = nullptr) const;
  /// Rows of the real 2n x 2n embedding [[Re,-Im],[Im,Re]] of block b, upper triangle
  /// stacked by columns, off-diagonal rows scaled by sqrt(2).
  std::vector<AffineExpr> realified_svec(int b) const;

  /// Adds every variable and constraint of `other`, renaming with `prefix`.
  void merge(const ConeProgram& other, const std::string& prefix = {});

  void write(std::ostream& os) const;
  static ConeProgram read(std::istream& is);

 private:
  int num_vars_ = 0;
  std::vector<std::string> scalar_names_;
  std::vector<int> scalar_index_;
  std::vector<HermBlock> blocks_;
  std::vector<Constraint> constraints_;
  AffineExpr objective_;
  std::vector<std::tuple<int, int, double>> quad_;
};

ConeCensus cone_census(const ConeProgram& program);

}  // namespace ranslice

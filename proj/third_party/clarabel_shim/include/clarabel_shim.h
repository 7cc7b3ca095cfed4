// C interface to the Clarabel interior-point conic solver.
//
// Problem form:  minimize 1/2 x'Px + q'x  s.t.  Ax + s = b,  s in K
// P is upper triangular CSC (n x n), A is CSC (m x n). K is the Cartesian
// product of the listed cones, in row order.
#pragma once

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum ClarabelShimCone {
  CLARABEL_SHIM_ZERO = 0,
  CLARABEL_SHIM_NONNEG = 1,
  CLARABEL_SHIM_SOC = 2,
  CLARABEL_SHIM_EXP = 3,      // (x, y, z): y * exp(x / y) <= z
  CLARABEL_SHIM_PSD_TRI = 4,  // dim = matrix order; upper triangle by columns, off-diagonals scaled by sqrt(2)
};

typedef struct {
  uint32_t max_iter;
  double time_limit;
  double tol_gap_abs;
  double tol_gap_rel;
  double tol_feas;
  int verbose;
  // Values <= 0 keep the Clarabel defaults.
  double equilibrate_max_scale;  // min scale is the reciprocal
  double static_reg_constant;
  double max_step_fraction;
  double reduced_tol_gap_rel;  // thresholds for the AlmostSolved status
  double reduced_tol_feas;
} ClarabelShimSettings;

typedef struct {
  int status;  // clarabel::solver::SolverStatus discriminant
  double obj_val;
  double obj_val_dual;
  uint32_t iterations;
  double solve_time;
  double r_prim;
  double r_dual;
} ClarabelShimResult;

// Returns 0 when the solver ran (inspect result->status), 1 on a setup error
// (dimension or settings mismatch), 2 if the solver panicked.
int clarabel_shim_solve(size_t n, size_t m, const size_t* p_colptr, const size_t* p_rowval,
                        const double* p_nzval, const double* q, const size_t* a_colptr,
                        const size_t* a_rowval, const double* a_nzval, const double* b,
                        size_t ncones, const int* cone_types, const size_t* cone_dims,
                        const ClarabelShimSettings* settings, double* x_out, double* s_out,
                        double* z_out, ClarabelShimResult* result);

#ifdef __cplusplus
}
#endif

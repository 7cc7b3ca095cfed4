#![allow(non_snake_case)]
//! C ABI around clarabel::solver::DefaultSolver. See include/clarabel_shim.h.

extern crate openblas_src;

use clarabel::algebra::*;
use clarabel::solver::*;
use std::panic;
use std::slice;

#[repr(C)]
pub struct ClarabelShimSettings {
    pub max_iter: u32,
    pub time_limit: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub verbose: i32,
    pub equilibrate_max_scale: f64,
    pub static_reg_constant: f64,
    pub max_step_fraction: f64,
    pub reduced_tol_gap_rel: f64,
    pub reduced_tol_feas: f64,
}

#[repr(C)]
pub struct ClarabelShimResult {
    pub status: i32,
    pub obj_val: f64,
    pub obj_val_dual: f64,
    pub iterations: u32,
    pub solve_time: f64,
    pub r_prim: f64,
    pub r_dual: f64,
}

unsafe fn csc(
    m: usize,
    n: usize,
    colptr: *const usize,
    rowval: *const usize,
    nzval: *const f64,
) -> CscMatrix<f64> {
    let colptr = slice::from_raw_parts(colptr, n + 1).to_vec();
    let nnz = colptr[n];
    let (rowval, nzval) = if nnz == 0 {
        (Vec::new(), Vec::new())
    } else {
        (
            slice::from_raw_parts(rowval, nnz).to_vec(),
            slice::from_raw_parts(nzval, nnz).to_vec(),
        )
    };
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

#[no_mangle]
pub unsafe extern "C" fn clarabel_shim_solve(
    n: usize,
    m: usize,
    p_colptr: *const usize,
    p_rowval: *const usize,
    p_nzval: *const f64,
    q: *const f64,
    a_colptr: *const usize,
    a_rowval: *const usize,
    a_nzval: *const f64,
    b: *const f64,
    ncones: usize,
    cone_types: *const i32,
    cone_dims: *const usize,
    settings: *const ClarabelShimSettings,
    x_out: *mut f64,
    s_out: *mut f64,
    z_out: *mut f64,
    result: *mut ClarabelShimResult,
) -> i32 {
    let outcome = panic::catch_unwind(|| {
        let P = csc(n, n, p_colptr, p_rowval, p_nzval);
        let A = csc(m, n, a_colptr, a_rowval, a_nzval);
        let q = slice::from_raw_parts(q, n);
        let b = if m == 0 { &[][..] } else { slice::from_raw_parts(b, m) };
        let types = if ncones == 0 { &[][..] } else { slice::from_raw_parts(cone_types, ncones) };
        let dims = if ncones == 0 { &[][..] } else { slice::from_raw_parts(cone_dims, ncones) };

        let mut cones: Vec<SupportedConeT<f64>> = Vec::with_capacity(ncones);
        for (t, d) in types.iter().zip(dims.iter()) {
            cones.push(match t {
                0 => ZeroConeT(*d),
                1 => NonnegativeConeT(*d),
                2 => SecondOrderConeT(*d),
                3 => ExponentialConeT(),
                4 => PSDTriangleConeT(*d),
                _ => return 1,
            });
        }

        let s = &*settings;
        let mut cfg = DefaultSettings::<f64>::default();
        cfg.max_iter = s.max_iter;
        if s.time_limit > 0.0 {
            cfg.time_limit = s.time_limit;
        }
        cfg.tol_gap_abs = s.tol_gap_abs;
        cfg.tol_gap_rel = s.tol_gap_rel;
        cfg.tol_feas = s.tol_feas;
        cfg.verbose = s.verbose != 0;
        if s.equilibrate_max_scale > 0.0 {
            cfg.equilibrate_max_scaling = s.equilibrate_max_scale;
            cfg.equilibrate_min_scaling = 1.0 / s.equilibrate_max_scale;
        }
        if s.static_reg_constant > 0.0 {
            cfg.static_regularization_constant = s.static_reg_constant;
        }
        if s.max_step_fraction > 0.0 {
            cfg.max_step_fraction = s.max_step_fraction;
        }
        if s.reduced_tol_gap_rel > 0.0 {
            cfg.reduced_tol_gap_rel = s.reduced_tol_gap_rel;
        }
        if s.reduced_tol_feas > 0.0 {
            cfg.reduced_tol_feas = s.reduced_tol_feas;
        }
        cfg.max_threads = 1;

        let mut solver = match DefaultSolver::new(&P, q, &A, b, &cones, cfg) {
            Ok(solver) => solver,
            Err(_) => return 1,
        };
        solver.solve();

        let sol = &solver.solution;
        slice::from_raw_parts_mut(x_out, n).copy_from_slice(&sol.x);
        if m > 0 {
            slice::from_raw_parts_mut(s_out, m).copy_from_slice(&sol.s);
            slice::from_raw_parts_mut(z_out, m).copy_from_slice(&sol.z);
        }
        let r = &mut *result;
        r.status = sol.status as i32;
        r.obj_val = sol.obj_val;
        r.obj_val_dual = sol.obj_val_dual;
        r.iterations = sol.iterations;
        r.solve_time = sol.solve_time;
        r.r_prim = sol.r_prim;
        r.r_dual = sol.r_dual;
        0
    });
    outcome.unwrap_or(2)
}

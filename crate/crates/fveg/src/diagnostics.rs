//! Error norms, experimental order of convergence, equilibrium residuals, and
//! the streamline Taylor predictor used as a consistency oracle.

use crate::evolution::{LinearizationState, PredictedPrimitive};
use crate::fv_scheme::Bathymetry;
use crate::state::{ConservedField, PhysicalParams};
use crate::SolverError;

/// L1 errors per conserved variable together with the resolution ladder data.
#[derive(Debug, Clone, Default)]
pub struct ErrorReport {
    pub resolutions: Vec<usize>,
    /// err[k] = (e_h, e_hu, e_hv) for resolutions[k].
    pub errors: Vec<[f64; 3]>,
    /// eoc[k] between resolutions k and k+1 (ratio-2 ladders only).
    pub eoc: Vec<[f64; 3]>,
    pub runtime_seconds: f64,
}

/// Restrict a finer field to the coarse grid by conservative block averaging.
/// The grids must be related by an integer refinement factor.
pub fn restrict_to(fine: &ConservedField, coarse_nx: usize, coarse_ny: usize) -> Result<ConservedField, SolverError> {
    let (fnx, fny) = (fine.grid.nx, fine.grid.ny);
    if fnx % coarse_nx != 0 || fny % coarse_ny != 0 || fnx / coarse_nx != fny / coarse_ny {
        return Err(SolverError::GridMismatch {
            what: format!("{fnx}x{fny} cannot be block-averaged to {coarse_nx}x{coarse_ny}"),
        });
    }
    let r = fnx / coarse_nx;
    let grid = crate::state::Grid::new(
        coarse_nx,
        coarse_ny,
        fine.grid.hbar * r as f64,
        fine.grid.origin,
    )?;
    let mut out = ConservedField::new(grid);
    out.time = fine.time;
    for i in 0..coarse_nx as isize {
        for j in 0..coarse_ny as isize {
            let (mut sh, mut su, mut sv) = (0.0, 0.0, 0.0);
            for a in 0..r as isize {
                for b in 0..r as isize {
                    let (fi, fj) = (i * r as isize + a, j * r as isize + b);
                    sh += fine.h.at(fi, fj);
                    su += fine.hu.at(fi, fj);
                    sv += fine.hv.at(fi, fj);
                }
            }
            let n = (r * r) as f64;
            out.h.set(i, j, sh / n);
            out.hu.set(i, j, su / n);
            out.hv.set(i, j, sv / n);
        }
    }
    Ok(out)
}

/// L1 errors Σ ħ² |q - q_ref| per conserved variable. A finer reference is
/// first restricted to the coarse grid by block averaging.
pub fn l1_error(field: &ConservedField, reference: &ConservedField) -> Result<[f64; 3], SolverError> {
    let restricted;
    let reference = if reference.grid.nx == field.grid.nx && reference.grid.ny == field.grid.ny {
        reference
    } else {
        restricted = restrict_to(reference, field.grid.nx, field.grid.ny)?;
        &restricted
    };
    let a = field.grid.hbar * field.grid.hbar;
    let mut e = [0.0; 3];
    for i in 0..field.grid.nx as isize {
        for j in 0..field.grid.ny as isize {
            e[0] += (field.h.at(i, j) - reference.h.at(i, j)).abs();
            e[1] += (field.hu.at(i, j) - reference.hu.at(i, j)).abs();
            e[2] += (field.hv.at(i, j) - reference.hv.at(i, j)).abs();
        }
    }
    Ok([e[0] * a, e[1] * a, e[2] * a])
}

/// Experimental order of convergence log2(e_N / e_2N).
pub fn eoc(e_coarse: f64, e_fine: f64) -> Result<f64, SolverError> {
    if !(e_coarse > 0.0 && e_fine > 0.0) {
        return Err(SolverError::Config(
            "EOC undefined for non-positive errors (field matches reference exactly)".into(),
        ));
    }
    Ok((e_coarse / e_fine).log2())
}

/// Deviation from the lake at rest: (max |h+b-C|, max |hu|, max |hv|) with C
/// the interior mean of h + b.
pub fn lake_at_rest_residual(field: &ConservedField, bathy: &Bathymetry) -> (f64, f64, f64) {
    let (nx, ny) = (field.grid.nx as isize, field.grid.ny as isize);
    let mut mean = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            mean += field.h.at(i, j) + bathy.cell.at(i, j);
        }
    }
    mean /= (nx * ny) as f64;
    let (mut dw, mut du, mut dv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 0..nx {
        for j in 0..ny {
            dw = dw.max((field.h.at(i, j) + bathy.cell.at(i, j) - mean).abs());
            du = du.max(field.hu.at(i, j).abs());
            dv = dv.max(field.hv.at(i, j).abs());
        }
    }
    (dw, du, dv)
}

/// L1 residual of the geostrophic balance f v = g (h+b)_x, discretized at the
/// vertical interfaces where the discrete jet construction satisfies it
/// identically: r = f μx v - g δx(h+b)/ħ.
pub fn geostrophic_residual(field: &ConservedField, bathy: &Bathymetry, params: &PhysicalParams) -> f64 {
    let (nx, ny) = (field.grid.nx as isize, field.grid.ny as isize);
    let a = field.grid.hbar * field.grid.hbar;
    let mut total = 0.0;
    for i in 0..(nx - 1) {
        for j in 0..ny {
            let vl = field.hv.at(i, j) / field.h.at(i, j);
            let vr = field.hv.at(i + 1, j) / field.h.at(i + 1, j);
            let wl = field.h.at(i, j) + bathy.cell.at(i, j);
            let wr = field.h.at(i + 1, j) + bathy.cell.at(i + 1, j);
            let r = params.f * 0.5 * (vl + vr) - params.g * (wr - wl) / field.grid.hbar;
            total += r.abs();
        }
    }
    total * a
}

/// Analytic field bundle with the derivatives the streamline Taylor expansion
/// needs. `d*` entries are (value, x, y, xx, yy, xy).
pub struct SmoothData<'a> {
    pub h: &'a dyn Fn(f64, f64) -> [f64; 6],
    pub u: &'a dyn Fn(f64, f64) -> [f64; 6],
    pub v: &'a dyn Fn(f64, f64) -> [f64; 6],
    pub b: &'a dyn Fn(f64, f64) -> [f64; 6],
}

const VAL: usize = 0;
const DX: usize = 1;
const DY: usize = 2;
const DXX: usize = 3;
const DYY: usize = 4;
const DXY: usize = 5;

/// Second-order streamline Taylor prediction at Q0 = node - (ũ, ṽ) τ:
///
///   (h, u, v)(Q0) - τ (h̃(ux+vy), Kx, Ly)(Q0)
///   + τ²/2 (h̃(Kxx+Lyy), g h̃ (ux+vy)x - g (ũ bx + ṽ by)x + f Ly,
///           g h̃ (ux+vy)y - g (ũ bx + ṽ by)y - f Kx)(Q0)
///
/// with K = g(h+b-V), L = g(h+b+U), Vx = (f/g) v, Uy = (f/g) u.
pub fn taylor_predict(
    node: (f64, f64),
    data: &SmoothData,
    lin: &LinearizationState,
    tau: f64,
    params: &PhysicalParams,
) -> PredictedPrimitive {
    let (g, f) = (params.g, params.f);
    let x0 = node.0 - lin.u * tau;
    let y0 = node.1 - lin.v * tau;
    let h = (data.h)(x0, y0);
    let u = (data.u)(x0, y0);
    let v = (data.v)(x0, y0);
    let b = (data.b)(x0, y0);

    let kx = g * (h[DX] + b[DX]) - f * v[VAL];
    let ly = g * (h[DY] + b[DY]) + f * u[VAL];
    let kxx = g * (h[DXX] + b[DXX]) - f * v[DX];
    let lyy = g * (h[DYY] + b[DYY]) + f * u[DY];
    let div = u[DX] + v[DY];
    let div_x = u[DXX] + v[DXY];
    let div_y = u[DXY] + v[DYY];
    let adv_x = lin.u * b[DXX] + lin.v * b[DXY];
    let adv_y = lin.u * b[DXY] + lin.v * b[DYY];

    let t2 = 0.5 * tau * tau;
    PredictedPrimitive {
        h: h[VAL] - tau * lin.h * div + t2 * lin.h * (kxx + lyy),
        u: u[VAL] - tau * kx + t2 * (g * lin.h * div_x - g * adv_x + f * ly),
        v: v[VAL] - tau * ly + t2 * (g * lin.h * div_y - g * adv_y - f * kx),
    }
}

//! The evolution Galerkin predictor: approximate evolution operators for
//! piecewise constant and piecewise bilinear data, evaluated at edge quadrature
//! nodes by exact sector-wise angular integration over the sonic circle.
//!
//! A bilinear cell polynomial restricted to the circle Q(θ) = Q0 + r(cos θ, sin θ)
//! is a trigonometric polynomial A + B cos θ + C sin θ + D cos θ sin θ, so every
//! mantle moment reduces to closed-form antiderivatives of cos^m θ sin^n θ per
//! sector. The sgn kernels become constants once the cardinal angles are sector
//! breakpoints.

use crate::recovery::{CellBilinear, Reconstruction, RecoveredVar};
use crate::state::{Grid, PhysicalParams, PrimitiveState, ScalarField};
use crate::SolverError;

/// Local linearization around a node: mean state and celerity c̃ = sqrt(g h̃).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationState {
    pub h: f64,
    pub u: f64,
    pub v: f64,
    pub c: f64,
}

/// Mean of the primitive states of the cells adjacent to a node (two for edge
/// midpoints, four for vertices).
pub fn linearization_state(
    cells: &[(isize, isize)],
    h: &ScalarField,
    u: &ScalarField,
    v: &ScalarField,
    params: &PhysicalParams,
) -> Result<LinearizationState, SolverError> {
    let n = cells.len() as f64;
    let (mut sh, mut su, mut sv) = (0.0, 0.0, 0.0);
    for &(i, j) in cells {
        let hc = h.at(i, j);
        if !(hc > 0.0) {
            return Err(SolverError::DryState { h: hc });
        }
        sh += hc;
        su += u.at(i, j);
        sv += v.at(i, j);
    }
    let ht = sh / n;
    Ok(LinearizationState { h: ht, u: su / n, v: sv / n, c: (params.g * ht).sqrt() })
}

/// One angular sector of the sonic circle lying inside a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub theta0: f64,
    pub theta1: f64,
    pub cell: (isize, isize),
}

/// Sonic circle trace: center Q0, radius, and sectors partitioning [0, 2π).
#[derive(Debug, Clone)]
pub struct SonicCircleTrace {
    pub center: (f64, f64),
    pub radius: f64,
    pub sectors: Vec<Sector>,
}

const SECTOR_EPS: f64 = 1e-13;

/// Partition the sonic circle around `node` into sectors by the grid lines it
/// crosses. The cardinal angles are always breakpoints so that sgn kernels are
/// sector-wise constant.
pub fn trace_sonic_circle(
    node: (f64, f64),
    lin: &LinearizationState,
    tau: f64,
    grid: &Grid,
) -> Result<SonicCircleTrace, SolverError> {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    let x0 = node.0 - lin.u * tau;
    let y0 = node.1 - lin.v * tau;
    let r = lin.c * tau;
    if !(r > 0.0) {
        return Err(SolverError::Config(format!("sonic circle radius must be positive, got {r}")));
    }

    let mut angles: Vec<f64> = vec![0.0, FRAC_PI_2, PI, 1.5 * PI, TAU];
    let m_lo = ((x0 - r - grid.origin.0) / grid.hbar).floor() as isize - 1;
    let m_hi = ((x0 + r - grid.origin.0) / grid.hbar).ceil() as isize + 1;
    for m in m_lo..=m_hi {
        let t = (grid.x_edge(m) - x0) / r;
        if t > -1.0 && t < 1.0 {
            let a = t.acos();
            angles.push(a);
            angles.push(TAU - a);
        }
    }
    let m_lo = ((y0 - r - grid.origin.1) / grid.hbar).floor() as isize - 1;
    let m_hi = ((y0 + r - grid.origin.1) / grid.hbar).ceil() as isize + 1;
    for m in m_lo..=m_hi {
        let t = (grid.y_edge(m) - y0) / r;
        if t > -1.0 && t < 1.0 {
            let a = t.asin();
            if t >= 0.0 {
                angles.push(a);
                angles.push(PI - a);
            } else {
                angles.push(PI - a);
                angles.push(TAU + a);
            }
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut sectors = Vec::with_capacity(angles.len());
    let mut start = angles[0];
    for &end in &angles[1..] {
        if end - start < SECTOR_EPS {
            continue;
        }
        let mid = 0.5 * (start + end);
        let cell = grid.cell_of(x0 + r * mid.cos(), y0 + r * mid.sin());
        if !grid.in_padded(cell.0, cell.1) {
            return Err(SolverError::CircleOutOfDomain { x: x0, y: y0, radius: r });
        }
        sectors.push(Sector { theta0: start, theta1: end, cell });
        start = end;
    }
    Ok(SonicCircleTrace { center: (x0, y0), radius: r, sectors })
}

/// Angular kernels appearing in the approximate evolution operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    One,
    Cos,
    Sin,
    CosSq,
    SinSq,
    SinCos,
    SgnCos,
    SgnSin,
    Cos2T,
    Sin2T,
}

pub const ALL_KERNELS: [Kernel; 10] = [
    Kernel::One,
    Kernel::Cos,
    Kernel::Sin,
    Kernel::CosSq,
    Kernel::SinSq,
    Kernel::SinCos,
    Kernel::SgnCos,
    Kernel::SgnSin,
    Kernel::Cos2T,
    Kernel::Sin2T,
];

/// Data on one sector: A + B cos θ + C sin θ + D cos θ sin θ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SectorData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SectorData {
    pub const fn constant(a: f64) -> Self {
        Self { a, b: 0.0, c: 0.0, d: 0.0 }
    }

    /// Restriction of a cell polynomial to the circle (q0 relative to the cell
    /// center in cell units, rho = r/ħ).
    pub fn from_bilinear(p: &CellBilinear, xi0: f64, eta0: f64, rho: f64) -> Self {
        Self {
            a: p.c00 + p.cx * xi0 + p.cy * eta0 + p.cxy * xi0 * eta0,
            b: (p.cx + p.cxy * eta0) * rho,
            c: (p.cy + p.cxy * xi0) * rho,
            d: p.cxy * rho * rho,
        }
    }

    #[inline]
    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.a + self.b * c + self.c * s + self.d * c * s
    }
}

/// Antiderivative of cos^m θ sin^n θ for the exponents the operators need.
#[inline]
fn anti(m: u32, n: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    match (m, n) {
        (0, 0) => theta,
        (1, 0) => s,
        (0, 1) => -c,
        (1, 1) => 0.5 * s * s,
        (2, 0) => 0.5 * (theta + s * c),
        (0, 2) => 0.5 * (theta - s * c),
        (2, 1) => -c * c * c / 3.0,
        (1, 2) => s * s * s / 3.0,
        (3, 0) => s - s * s * s / 3.0,
        (0, 3) => c * c * c / 3.0 - c,
        (3, 1) => -0.25 * c * c * c * c,
        (1, 3) => 0.25 * s * s * s * s,
        (2, 2) => 0.125 * (theta - s * c * (c * c - s * s)),
        _ => unreachable!("moment ({m},{n}) not in table"),
    }
}

#[inline]
fn seg(m: u32, n: u32, t0: f64, t1: f64) -> f64 {
    anti(m, n, t1) - anti(m, n, t0)
}

/// ∫ data(θ) cos^m θ sin^n θ dθ over one sector.
#[inline]
fn sector_poly_moment(d: &SectorData, m: u32, n: u32, t0: f64, t1: f64) -> f64 {
    d.a * seg(m, n, t0, t1)
        + d.b * seg(m + 1, n, t0, t1)
        + d.c * seg(m, n + 1, t0, t1)
        + d.d * seg(m + 1, n + 1, t0, t1)
}

fn sector_integral(d: &SectorData, kernel: Kernel, t0: f64, t1: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    match kernel {
        Kernel::One => sector_poly_moment(d, 0, 0, t0, t1),
        Kernel::Cos => sector_poly_moment(d, 1, 0, t0, t1),
        Kernel::Sin => sector_poly_moment(d, 0, 1, t0, t1),
        Kernel::CosSq => sector_poly_moment(d, 2, 0, t0, t1),
        Kernel::SinSq => sector_poly_moment(d, 0, 2, t0, t1),
        Kernel::SinCos => sector_poly_moment(d, 1, 1, t0, t1),
        Kernel::Cos2T => sector_poly_moment(d, 2, 0, t0, t1) - sector_poly_moment(d, 0, 2, t0, t1),
        Kernel::Sin2T => 2.0 * sector_poly_moment(d, 1, 1, t0, t1),
        Kernel::SgnCos => {
            // cardinal breakpoints guarantee a constant sign per sector
            let mid = 0.5 * (t0 + t1);
            let sgn = if mid < FRAC_PI_2 || mid > 1.5 * PI { 1.0 } else { -1.0 };
            sgn * sector_poly_moment(d, 0, 0, t0, t1)
        }
        Kernel::SgnSin => {
            let mid = 0.5 * (t0 + t1);
            let sgn = if mid < PI { 1.0 } else { -1.0 };
            sgn * sector_poly_moment(d, 0, 0, t0, t1)
        }
    }
}

/// Integration rule for angular moments. `ClosedForm` is exact to roundoff for
/// admissible sector data; `Midpoint(n)` distributes n uniform nodes over the
/// circle sector-wise and serves as the independent reference rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentRule {
    ClosedForm,
    Midpoint(usize),
}

/// (1/2π) ∮ data(θ) kernel(θ) dθ with per-sector data aligned to the trace.
pub fn angular_moment(data: &[SectorData], kernel: Kernel, trace: &SonicCircleTrace) -> f64 {
    debug_assert_eq!(data.len(), trace.sectors.len());
    let mut total = 0.0;
    for (d, s) in data.iter().zip(&trace.sectors) {
        total += sector_integral(d, kernel, s.theta0, s.theta1);
    }
    total / std::f64::consts::TAU
}

/// Same moment by the requested rule; `Midpoint` samples each sector with a
/// node count proportional to its length.
pub fn angular_moment_with_rule(
    data: &[SectorData],
    kernel: Kernel,
    trace: &SonicCircleTrace,
    rule: MomentRule,
) -> f64 {
    use std::f64::consts::TAU;
    match rule {
        MomentRule::ClosedForm => angular_moment(data, kernel, trace),
        MomentRule::Midpoint(n_total) => {
            let kf = |theta: f64| -> f64 {
                let (s, c) = theta.sin_cos();
                match kernel {
                    Kernel::One => 1.0,
                    Kernel::Cos => c,
                    Kernel::Sin => s,
                    Kernel::CosSq => c * c,
                    Kernel::SinSq => s * s,
                    Kernel::SinCos => s * c,
                    Kernel::SgnCos => {
                        if c == 0.0 { 0.0 } else { c.signum() }
                    }
                    Kernel::SgnSin => {
                        if s == 0.0 { 0.0 } else { s.signum() }
                    }
                    Kernel::Cos2T => (2.0 * theta).cos(),
                    Kernel::Sin2T => (2.0 * theta).sin(),
                }
            };
            let mut total = 0.0;
            for (d, sct) in data.iter().zip(&trace.sectors) {
                let len = sct.theta1 - sct.theta0;
                let n = ((n_total as f64) * len / TAU).ceil() as usize;
                let n = n.max(8);
                let dt = len / n as f64;
                let mut acc = 0.0;
                for k in 0..n {
                    let theta = sct.theta0 + (k as f64 + 0.5) * dt;
                    acc += d.eval(theta) * kf(theta);
                }
                total += acc * dt;
            }
            total / TAU
        }
    }
}

/// Point values (ĥ, û, v̂) predicted at a node at the half time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedPrimitive {
    pub h: f64,
    pub u: f64,
    pub v: f64,
}

impl PredictedPrimitive {
    pub fn as_primitive(&self) -> PrimitiveState {
        PrimitiveState { h: self.h, u: self.u, v: self.v }
    }
}

/// Piecewise constant cell data for the constant-data operator: the flow
/// variables, bathymetry, potential energies K = g(h+b-V) and L = g(h+b+U),
/// and optional per-cell bottom slopes for the advection term.
pub struct PwcData<'a> {
    pub h: &'a ScalarField,
    pub u: &'a ScalarField,
    pub v: &'a ScalarField,
    pub b: &'a ScalarField,
    pub kk: &'a ScalarField,
    pub ll: &'a ScalarField,
    /// Spatial slopes (per length) of the bottom, piecewise constant per cell.
    pub b_slopes: Option<(&'a ScalarField, &'a ScalarField)>,
}

fn pwc_sector_data(field: &ScalarField, trace: &SonicCircleTrace) -> Vec<SectorData> {
    trace
        .sectors
        .iter()
        .map(|s| SectorData::constant(field.at(s.cell.0, s.cell.1)))
        .collect()
}

/// Constant-data approximate evolution operator. `b_at_node` is the bottom
/// value at the node (the same value must be reused by the source term).
pub fn evolve_const(
    data: &PwcData,
    lin: &LinearizationState,
    trace: &SonicCircleTrace,
    tau: f64,
    b_at_node: f64,
    params: &PhysicalParams,
) -> Result<PredictedPrimitive, SolverError> {
    let g = params.g;
    let du = pwc_sector_data(data.u, trace);
    let dv = pwc_sector_data(data.v, trace);
    let dk = pwc_sector_data(data.kk, trace);
    let dl = pwc_sector_data(data.ll, trace);
    // (h + b)(Q): sum of the two constants per sector
    let dw: Vec<SectorData> = trace
        .sectors
        .iter()
        .map(|s| SectorData::constant(data.h.at(s.cell.0, s.cell.1) + data.b.at(s.cell.0, s.cell.1)))
        .collect();

    let mut h_hat = -b_at_node + angular_moment(&dw, Kernel::One, trace)
        - (lin.c / g)
            * (angular_moment(&du, Kernel::SgnCos, trace) + angular_moment(&dv, Kernel::SgnSin, trace));
    if let Some((bx, by)) = data.b_slopes {
        let dbx = pwc_sector_data(bx, trace);
        let dby = pwc_sector_data(by, trace);
        h_hat += tau
            * (lin.u * angular_moment(&dbx, Kernel::One, trace)
                + lin.v * angular_moment(&dby, Kernel::One, trace));
    }

    let u_hat = -angular_moment(&dk, Kernel::SgnCos, trace) / lin.c
        + angular_moment(&du, Kernel::CosSq, trace)
        + 0.5 * angular_moment(&du, Kernel::One, trace)
        + angular_moment(&dv, Kernel::SinCos, trace);

    let v_hat = -angular_moment(&dl, Kernel::SgnSin, trace) / lin.c
        + angular_moment(&du, Kernel::SinCos, trace)
        + angular_moment(&dv, Kernel::SinSq, trace)
        + 0.5 * angular_moment(&dv, Kernel::One, trace);

    if !(h_hat > 0.0) {
        return Err(SolverError::DryState { h: h_hat });
    }
    Ok(PredictedPrimitive { h: h_hat, u: u_hat, v: v_hat })
}

/// Residual cell data for the constant-data correction of the second-order
/// predictor: residuals of (h+b), u, v, K and L.
pub struct ResidualData<'a> {
    pub w: &'a ScalarField,
    pub u: &'a ScalarField,
    pub v: &'a ScalarField,
    pub kk: &'a ScalarField,
    pub ll: &'a ScalarField,
}

/// Constant-data operator applied to the residual fields. Bottom terms are
/// omitted; they are carried once by the bilinear part.
pub fn evolve_const_residual(
    data: &ResidualData,
    lin: &LinearizationState,
    trace: &SonicCircleTrace,
    params: &PhysicalParams,
) -> (f64, f64, f64) {
    let g = params.g;
    let dw = pwc_sector_data(data.w, trace);
    let du = pwc_sector_data(data.u, trace);
    let dv = pwc_sector_data(data.v, trace);
    let dk = pwc_sector_data(data.kk, trace);
    let dl = pwc_sector_data(data.ll, trace);

    let dh = angular_moment(&dw, Kernel::One, trace)
        - (lin.c / g)
            * (angular_moment(&du, Kernel::SgnCos, trace) + angular_moment(&dv, Kernel::SgnSin, trace));
    let du_hat = -angular_moment(&dk, Kernel::SgnCos, trace) / lin.c
        + angular_moment(&du, Kernel::CosSq, trace)
        + 0.5 * angular_moment(&du, Kernel::One, trace)
        + angular_moment(&dv, Kernel::SinCos, trace);
    let dv_hat = -angular_moment(&dl, Kernel::SgnSin, trace) / lin.c
        + angular_moment(&du, Kernel::SinCos, trace)
        + angular_moment(&dv, Kernel::SinSq, trace)
        + 0.5 * angular_moment(&dv, Kernel::One, trace);
    (dh, du_hat, dv_hat)
}

fn bilinear_sector_data(
    grid: &Grid,
    coef: &crate::recovery::CoefField,
    trace: &SonicCircleTrace,
) -> Vec<SectorData> {
    let rho = trace.radius / grid.hbar;
    trace
        .sectors
        .iter()
        .map(|s| {
            let p = coef.cell(s.cell.0, s.cell.1);
            let xi0 = (trace.center.0 - grid.x_center(s.cell.0)) / grid.hbar;
            let eta0 = (trace.center.1 - grid.y_center(s.cell.1)) / grid.hbar;
            SectorData::from_bilinear(&p, xi0, eta0, rho)
        })
        .collect()
}

fn combine(a: &[SectorData], b: &[SectorData], ca: f64, cb: f64) -> Vec<SectorData> {
    a.iter()
        .zip(b)
        .map(|(x, y)| SectorData {
            a: ca * x.a + cb * y.a,
            b: ca * x.b + cb * y.b,
            c: ca * x.c + cb * y.c,
            d: ca * x.d + cb * y.d,
        })
        .collect()
}

/// Bilinear-data approximate evolution operator evaluated at `node`.
/// Returns the prediction together with the recovered bottom value at the
/// node, which the corrector's source quadrature must reuse.
pub fn evolve_bilin(
    grid: &Grid,
    recon: &Reconstruction,
    node: (f64, f64),
    lin: &LinearizationState,
    trace: &SonicCircleTrace,
    tau: f64,
    params: &PhysicalParams,
) -> Result<(PredictedPrimitive, f64), SolverError> {
    use std::f64::consts::FRAC_PI_2;
    let g = params.g;
    let (x0, y0) = trace.center;

    let h_q0 = recon.eval_at(grid, RecoveredVar::H, x0, y0);
    let b_q0 = recon.eval_at(grid, RecoveredVar::B, x0, y0);
    let u_q0 = recon.eval_at(grid, RecoveredVar::U, x0, y0);
    let v_q0 = recon.eval_at(grid, RecoveredVar::V, x0, y0);
    let b_at_node = recon.eval_at(grid, RecoveredVar::B, node.0, node.1);

    let dh = bilinear_sector_data(grid, &recon.h, trace);
    let db = bilinear_sector_data(grid, &recon.b, trace);
    let du = bilinear_sector_data(grid, &recon.u, trace);
    let dv = bilinear_sector_data(grid, &recon.v, trace);
    let d_cor_u = bilinear_sector_data(grid, &recon.cor_u, trace);
    let d_cor_v = bilinear_sector_data(grid, &recon.cor_v, trace);

    let dw = combine(&dh, &db, 1.0, 1.0);
    // K = g (h + b - V), L = g (h + b + U), assembled pointwise on the circle
    let dk = combine(&dw, &d_cor_v, g, -g);
    let dl = combine(&dw, &d_cor_u, g, g);

    // per-cell constant bottom slopes for the advection term
    let slope_data = |cf: &ScalarField| -> Vec<SectorData> {
        trace
            .sectors
            .iter()
            .map(|s| SectorData::constant(cf.at(s.cell.0, s.cell.1) / grid.hbar))
            .collect()
    };
    let dbx = slope_data(&recon.b.cx);
    let dby = slope_data(&recon.b.cy);

    let w_q0 = h_q0 + b_q0;
    let m_w = angular_moment(&dw, Kernel::One, trace);
    let m_u_cos = angular_moment(&du, Kernel::Cos, trace);
    let m_v_sin = angular_moment(&dv, Kernel::Sin, trace);
    let adv = tau
        * (lin.u * angular_moment(&dbx, Kernel::One, trace)
            + lin.v * angular_moment(&dby, Kernel::One, trace));
    let h_hat = -b_at_node + w_q0 + FRAC_PI_2 * (m_w - w_q0) - 2.0 * (lin.c / g) * (m_u_cos + m_v_sin)
        + adv;

    let m_k_cos = angular_moment(&dk, Kernel::Cos, trace);
    let m_u_cos2 = angular_moment(&du, Kernel::CosSq, trace);
    let m_v_sincos = angular_moment(&dv, Kernel::SinCos, trace);
    let m_u = angular_moment(&du, Kernel::One, trace);
    let u_hat = u_q0 - 2.0 / lin.c * m_k_cos
        + FRAC_PI_2 * (3.0 * m_u_cos2 + 3.0 * m_v_sincos - m_u - 0.5 * u_q0);

    let m_l_sin = angular_moment(&dl, Kernel::Sin, trace);
    let m_u_sincos = angular_moment(&du, Kernel::SinCos, trace);
    let m_v_sin2 = angular_moment(&dv, Kernel::SinSq, trace);
    let m_v = angular_moment(&dv, Kernel::One, trace);
    let v_hat = v_q0 - 2.0 / lin.c * m_l_sin
        + FRAC_PI_2 * (3.0 * m_u_sincos + 3.0 * m_v_sin2 - m_v - 0.5 * v_q0);

    if !(h_hat > 0.0) {
        return Err(SolverError::DryState { h: h_hat });
    }
    Ok((PredictedPrimitive { h: h_hat, u: u_hat, v: v_hat }, b_at_node))
}

/// Predictor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictOrder {
    First,
    Second,
}

/// All node-independent data the predictor needs at one time level.
pub struct PredictorData<'a> {
    pub pwc: PwcData<'a>,
    /// Second order only: reconstruction and residual fields.
    pub recon: Option<&'a Reconstruction>,
    pub residual: Option<ResidualData<'a>>,
}

/// Predict the point value at a node at the half time step, first order
/// (constant data) or second order (bilinear recovery plus the constant-data
/// evolution of the residual). Returns the prediction and the bottom value
/// used at the node.
pub fn predict(
    grid: &Grid,
    data: &PredictorData,
    node: (f64, f64),
    adjacent: &[(isize, isize)],
    lin: &LinearizationState,
    tau: f64,
    order: PredictOrder,
    params: &PhysicalParams,
) -> Result<(PredictedPrimitive, f64), SolverError> {
    let trace = trace_sonic_circle(node, lin, tau, grid)?;
    match order {
        PredictOrder::First => {
            let mut b_node = 0.0;
            for &(i, j) in adjacent {
                b_node += data.pwc.b.at(i, j);
            }
            b_node /= adjacent.len() as f64;
            let p = evolve_const(&data.pwc, lin, &trace, tau, b_node, params)?;
            Ok((p, b_node))
        }
        PredictOrder::Second => {
            let recon = data
                .recon
                .ok_or_else(|| SolverError::Config("order 2 prediction requires a reconstruction".into()))?;
            let res = data
                .residual
                .as_ref()
                .ok_or_else(|| SolverError::Config("order 2 prediction requires residual fields".into()))?;
            let (pb, b_node) = evolve_bilin(grid, recon, node, lin, &trace, tau, params)?;
            let (dh, du, dv) = evolve_const_residual(res, lin, &trace, params);
            let h = pb.h + dh;
            if !(h > 0.0) {
                return Err(SolverError::DryState { h });
            }
            Ok((PredictedPrimitive { h, u: pb.u + du, v: pb.v + dv }, b_node))
        }
    }
}

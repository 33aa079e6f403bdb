//! The corrector: Simpson edge fluxes, interface-based source discretization,
//! discrete Coriolis primitives, conservative update, boundary conditions and
//! the full predictor-corrector time step.

use crate::evolution::{
    linearization_state, predict, PredictOrder, PredictorData, PwcData, ResidualData,
};
use crate::recovery::{recover, residual_field, LimiterKind, RecoveryInput};
use crate::state::{
    physical_flux, Axis, ConservedField, ConservedState, Grid, PhysicalParams, PrimitiveState,
    ScalarField, StepContext,
};
use crate::SolverError;

/// Boundary treatment per run (both axes share the kind; periodic requires the
/// matching opposite side by construction).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Zeroth-order extrapolation of all variables into the ghost frame.
    Extrapolate,
    Periodic,
}

/// Bottom topography: cell-centered values with ghost cells filled according
/// to the boundary condition (extrapolation copies the nearest interior cell,
/// so the lake at rest stays exact next to a non-flat boundary).
#[derive(Debug, Clone)]
pub struct Bathymetry {
    pub cell: ScalarField,
}

impl Bathymetry {
    pub fn from_function(grid: &Grid, bc: BoundaryCondition, b: impl Fn(f64, f64) -> f64) -> Self {
        let mut cell = ScalarField::zeros(grid);
        cell.fill_with(|i, j| b(grid.x_center(i), grid.y_center(j)));
        apply_boundary_scalar(grid, &mut cell, bc);
        Self { cell }
    }
}

/// Fill the ghost frame of one scalar field.
pub fn apply_boundary_scalar(grid: &Grid, w: &mut ScalarField, bc: BoundaryCondition) {
    let g = grid.ghost as isize;
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    match bc {
        BoundaryCondition::Extrapolate => {
            for j in 0..ny {
                for k in 1..=g {
                    w.set(-k, j, w.at(0, j));
                    w.set(nx - 1 + k, j, w.at(nx - 1, j));
                }
            }
            for i in -g..(nx + g) {
                for k in 1..=g {
                    w.set(i, -k, w.at(i, 0));
                    w.set(i, ny - 1 + k, w.at(i, ny - 1));
                }
            }
        }
        BoundaryCondition::Periodic => {
            for j in 0..ny {
                for k in 1..=g {
                    w.set(-k, j, w.at(nx - k, j));
                    w.set(nx - 1 + k, j, w.at(k - 1, j));
                }
            }
            for i in -g..(nx + g) {
                for k in 1..=g {
                    w.set(i, -k, w.at(i, ny - k));
                    w.set(i, ny - 1 + k, w.at(i, k - 1));
                }
            }
        }
    }
}

/// Fill the ghost cells of the conserved field.
pub fn apply_boundary(field: &mut ConservedField, bc: BoundaryCondition) {
    let grid = field.grid;
    apply_boundary_scalar(&grid, &mut field.h, bc);
    apply_boundary_scalar(&grid, &mut field.hu, bc);
    apply_boundary_scalar(&grid, &mut field.hv, bc);
}

/// Discrete primitives of the Coriolis force at cell centers:
/// δx V = ħ (f/g) μx v along rows, δy U = ħ (f/g) μy u along columns,
/// zero at the reference interior cell (0, 0). Computed over the full padded
/// grid so the recovery can use ghost cells.
#[derive(Debug, Clone)]
pub struct CoriolisPrimitives {
    pub cor_u: ScalarField,
    pub cor_v: ScalarField,
}

pub fn coriolis_primitives(
    grid: &Grid,
    u: &ScalarField,
    v: &ScalarField,
    params: &PhysicalParams,
) -> CoriolisPrimitives {
    let mut cor_u = ScalarField::zeros(grid);
    let mut cor_v = ScalarField::zeros(grid);
    if params.f != 0.0 {
        let fac = grid.hbar * params.f / params.g;
        let g = grid.ghost as isize;
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        for j in -g..(ny + g) {
            for i in 1..(nx + g) {
                let inc = fac * 0.5 * (v.at(i - 1, j) + v.at(i, j));
                cor_v.set(i, j, cor_v.at(i - 1, j) + inc);
            }
            for i in (-g..0).rev() {
                let inc = fac * 0.5 * (v.at(i, j) + v.at(i + 1, j));
                cor_v.set(i, j, cor_v.at(i + 1, j) - inc);
            }
        }
        for i in -g..(nx + g) {
            for j in 1..(ny + g) {
                let inc = fac * 0.5 * (u.at(i, j - 1) + u.at(i, j));
                cor_u.set(i, j, cor_u.at(i, j - 1) + inc);
            }
            for j in (-g..0).rev() {
                let inc = fac * 0.5 * (u.at(i, j) + u.at(i, j + 1));
                cor_u.set(i, j, cor_u.at(i, j + 1) - inc);
            }
        }
    }
    CoriolisPrimitives { cor_u, cor_v }
}

/// One predicted node: point values at t_{n+1/2} plus the bottom value the
/// predictor used there.
#[derive(Debug, Clone, Copy, Default)]
pub struct NodeState {
    pub h: f64,
    pub u: f64,
    pub v: f64,
    pub b: f64,
}

/// Rectangular array of node states addressed by (row, col).
#[derive(Debug, Clone)]
pub struct NodeGrid {
    pub ni: usize,
    pub nj: usize,
    data: Vec<NodeState>,
}

impl NodeGrid {
    fn new(ni: usize, nj: usize) -> Self {
        Self { ni, nj, data: vec![NodeState::default(); ni * nj] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &NodeState {
        &self.data[i * self.nj + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut NodeState {
        &mut self.data[i * self.nj + j]
    }
}

/// Plain scalar node array, used for the half-step Coriolis primitives.
#[derive(Debug, Clone)]
pub struct NodeScalar {
    pub ni: usize,
    pub nj: usize,
    data: Vec<f64>,
}

impl NodeScalar {
    fn new(ni: usize, nj: usize) -> Self {
        Self { ni, nj, data: vec![0.0; ni * nj] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.nj + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.nj + j] = v;
    }
}

/// Predicted point values at every edge quadrature node: midpoints of vertical
/// edges ((nx+1) × ny), midpoints of horizontal edges (nx × (ny+1)) and cell
/// vertices ((nx+1) × (ny+1); shared nodes computed once), plus the half-step
/// Coriolis primitives at those nodes.
#[derive(Debug, Clone)]
pub struct PredictedStates {
    pub vmid: NodeGrid,
    pub hmid: NodeGrid,
    pub vert: NodeGrid,
    /// V at vertical-edge midpoints / vertices (rows of constant y).
    pub cor_v_vmid: NodeScalar,
    pub cor_v_vert: NodeScalar,
    /// U at horizontal-edge midpoints / vertices (columns of constant x).
    pub cor_u_hmid: NodeScalar,
    pub cor_u_vert: NodeScalar,
}

/// Scheme configuration for one run.
#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    pub params: PhysicalParams,
    pub order: PredictOrder,
    pub limiter: Option<LimiterKind>,
    pub bc: BoundaryCondition,
}

/// Per-step diagnostics record.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub dt: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub mass: f64,
}

/// Run the predictor at every edge quadrature node.
pub fn predict_states(
    field: &ConservedField,
    bathy: &Bathymetry,
    cfg: &SchemeConfig,
    ctx: &StepContext,
) -> Result<PredictedStates, SolverError> {
    let grid = field.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    let g = grid.ghost as isize;
    let params = &cfg.params;

    // primitive cell fields
    let mut u = ScalarField::zeros(&grid);
    let mut v = ScalarField::zeros(&grid);
    for i in -g..(nx as isize + g) {
        for j in -g..(ny as isize + g) {
            let h = field.h.at(i, j);
            if !(h > 0.0) {
                return Err(SolverError::DryState { h });
            }
            u.set(i, j, field.hu.at(i, j) / h);
            v.set(i, j, field.hv.at(i, j) / h);
        }
    }

    let cor = coriolis_primitives(&grid, &u, &v, params);

    // potential-energy cell fields K = g(h+b-V), L = g(h+b+U)
    let mut kk = ScalarField::zeros(&grid);
    let mut ll = ScalarField::zeros(&grid);
    let mut w_surf = ScalarField::zeros(&grid);
    for i in -g..(nx as isize + g) {
        for j in -g..(ny as isize + g) {
            let w = field.h.at(i, j) + bathy.cell.at(i, j);
            w_surf.set(i, j, w);
            kk.set(i, j, params.g * (w - cor.cor_v.at(i, j)));
            ll.set(i, j, params.g * (w + cor.cor_u.at(i, j)));
        }
    }

    let recon;
    let res_w;
    let res_u;
    let res_v;
    let res_k;
    let res_l;
    let (recon_ref, residual) = match cfg.order {
        PredictOrder::First => (None, None),
        PredictOrder::Second => {
            recon = recover(
                &grid,
                &RecoveryInput { h: &field.h, u: &u, v: &v, b: &bathy.cell, cor_u: &cor.cor_u, cor_v: &cor.cor_v },
                cfg.limiter,
            );
            res_w = residual_field(&grid, &w_surf);
            res_u = residual_field(&grid, &u);
            res_v = residual_field(&grid, &v);
            res_k = residual_field(&grid, &kk);
            res_l = residual_field(&grid, &ll);
            (
                Some(&recon),
                Some(ResidualData { w: &res_w, u: &res_u, v: &res_v, kk: &res_k, ll: &res_l }),
            )
        }
    };

    let data = PredictorData {
        pwc: PwcData { h: &field.h, u: &u, v: &v, b: &bathy.cell, kk: &kk, ll: &ll, b_slopes: None },
        recon: recon_ref,
        residual,
    };

    let tau = ctx.tau;
    let mut out = PredictedStates {
        vmid: NodeGrid::new(nx + 1, ny),
        hmid: NodeGrid::new(nx, ny + 1),
        vert: NodeGrid::new(nx + 1, ny + 1),
        cor_v_vmid: NodeScalar::new(nx + 1, ny),
        cor_v_vert: NodeScalar::new(nx + 1, ny + 1),
        cor_u_hmid: NodeScalar::new(nx, ny + 1),
        cor_u_vert: NodeScalar::new(nx + 1, ny + 1),
    };

    let mut predict_at = |node: (f64, f64), cells: &[(isize, isize)]| -> Result<NodeState, SolverError> {
        let lin = linearization_state(cells, &field.h, &u, &v, params)?;
        let (p, b_node) = predict(&grid, &data, node, cells, &lin, tau, cfg.order, params)?;
        Ok(NodeState { h: p.h, u: p.u, v: p.v, b: b_node })
    };

    for ie in 0..=nx {
        let x = grid.x_edge(ie as isize);
        for j in 0..ny {
            let y = grid.y_center(j as isize);
            let cells = [(ie as isize - 1, j as isize), (ie as isize, j as isize)];
            *out.vmid.at_mut(ie, j) = predict_at((x, y), &cells)?;
        }
    }
    for i in 0..nx {
        let x = grid.x_center(i as isize);
        for je in 0..=ny {
            let y = grid.y_edge(je as isize);
            let cells = [(i as isize, je as isize - 1), (i as isize, je as isize)];
            *out.hmid.at_mut(i, je) = predict_at((x, y), &cells)?;
        }
    }
    for ie in 0..=nx {
        let x = grid.x_edge(ie as isize);
        for je in 0..=ny {
            let y = grid.y_edge(je as isize);
            let (i, j) = (ie as isize, je as isize);
            let cells = [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)];
            *out.vert.at_mut(ie, je) = predict_at((x, y), &cells)?;
        }
    }

    // half-step Coriolis primitives at the interface nodes (§4 step 4):
    // row-wise prefix sums of v̂ for V, column-wise of û for U.
    if params.f != 0.0 {
        let fac = grid.hbar * params.f / params.g;
        for j in 0..ny {
            for ie in 1..=nx {
                let inc = fac * 0.5 * (out.vmid.at(ie - 1, j).v + out.vmid.at(ie, j).v);
                let val = out.cor_v_vmid.at(ie - 1, j) + inc;
                out.cor_v_vmid.set(ie, j, val);
            }
        }
        for je in 0..=ny {
            for ie in 1..=nx {
                let inc = fac * 0.5 * (out.vert.at(ie - 1, je).v + out.vert.at(ie, je).v);
                let val = out.cor_v_vert.at(ie - 1, je) + inc;
                out.cor_v_vert.set(ie, je, val);
            }
        }
        for i in 0..nx {
            for je in 1..=ny {
                let inc = fac * 0.5 * (out.hmid.at(i, je - 1).u + out.hmid.at(i, je).u);
                let val = out.cor_u_hmid.at(i, je - 1) + inc;
                out.cor_u_hmid.set(i, je, val);
            }
        }
        for ie in 0..=nx {
            for je in 1..=ny {
                let inc = fac * 0.5 * (out.vert.at(ie, je - 1).u + out.vert.at(ie, je).u);
                let val = out.cor_u_vert.at(ie, je - 1) + inc;
                out.cor_u_vert.set(ie, je, val);
            }
        }
    }

    Ok(out)
}

pub const SIMPSON: [f64; 3] = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];

#[inline]
fn flux_of(node: &NodeState, axis: Axis, params: &PhysicalParams) -> Result<[f64; 3], SolverError> {
    if !(node.h > 0.0) {
        return Err(SolverError::DryState { h: node.h });
    }
    Ok(physical_flux(&PrimitiveState { h: node.h, u: node.u, v: node.v }, axis, params))
}

/// Simpson-averaged fluxes on every vertical edge ((nx+1) × ny) and horizontal
/// edge (nx × (ny+1)).
pub fn edge_fluxes(
    predicted: &PredictedStates,
    params: &PhysicalParams,
) -> Result<(Vec<[f64; 3]>, Vec<[f64; 3]>), SolverError> {
    let (nxe, ny) = (predicted.vmid.ni, predicted.vmid.nj);
    let (nx, nye) = (predicted.hmid.ni, predicted.hmid.nj);
    let mut fx = vec![[0.0; 3]; nxe * ny];
    let mut fy = vec![[0.0; 3]; nx * nye];
    for ie in 0..nxe {
        for j in 0..ny {
            let f0 = flux_of(predicted.vert.at(ie, j), Axis::X, params)?;
            let f1 = flux_of(predicted.vmid.at(ie, j), Axis::X, params)?;
            let f2 = flux_of(predicted.vert.at(ie, j + 1), Axis::X, params)?;
            let out = &mut fx[ie * ny + j];
            for k in 0..3 {
                out[k] = SIMPSON[0] * f0[k] + SIMPSON[1] * f1[k] + SIMPSON[2] * f2[k];
            }
        }
    }
    for i in 0..nx {
        for je in 0..nye {
            let f0 = flux_of(predicted.vert.at(i, je), Axis::Y, params)?;
            let f1 = flux_of(predicted.hmid.at(i, je), Axis::Y, params)?;
            let f2 = flux_of(predicted.vert.at(i + 1, je), Axis::Y, params)?;
            let out = &mut fy[i * nye + je];
            for k in 0..3 {
                out[k] = SIMPSON[0] * f0[k] + SIMPSON[1] * f1[k] + SIMPSON[2] * f2[k];
            }
        }
    }
    Ok((fx, fy))
}

/// Interface-based source discretization: per cell,
/// B = -g (0, Σ ω (μx ĥ)(δx(b̂ - V̂)), Σ ω (μy ĥ)(δy(b̂ + Û))).
pub fn source_term(predicted: &PredictedStates, params: &PhysicalParams, nx: usize, ny: usize) -> Vec<[f64; 3]> {
    let g = params.g;
    let mut out = vec![[0.0; 3]; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            // x-direction: rows j (midpoints) and j, j+1 (vertices)
            let mut sx = 0.0;
            {
                let l = predicted.vmid.at(i, j);
                let r = predicted.vmid.at(i + 1, j);
                let pl = l.b - predicted.cor_v_vmid.at(i, j);
                let pr = r.b - predicted.cor_v_vmid.at(i + 1, j);
                sx += SIMPSON[1] * 0.5 * (l.h + r.h) * (pr - pl);
            }
            for (je, w) in [(j, SIMPSON[0]), (j + 1, SIMPSON[2])] {
                let l = predicted.vert.at(i, je);
                let r = predicted.vert.at(i + 1, je);
                let pl = l.b - predicted.cor_v_vert.at(i, je);
                let pr = r.b - predicted.cor_v_vert.at(i + 1, je);
                sx += w * 0.5 * (l.h + r.h) * (pr - pl);
            }
            // y-direction: column i (midpoints) and i, i+1 (vertices)
            let mut sy = 0.0;
            {
                let b = predicted.hmid.at(i, j);
                let t = predicted.hmid.at(i, j + 1);
                let pb = b.b + predicted.cor_u_hmid.at(i, j);
                let pt = t.b + predicted.cor_u_hmid.at(i, j + 1);
                sy += SIMPSON[1] * 0.5 * (b.h + t.h) * (pt - pb);
            }
            for (ie, w) in [(i, SIMPSON[0]), (i + 1, SIMPSON[2])] {
                let b = predicted.vert.at(ie, j);
                let t = predicted.vert.at(ie, j + 1);
                let pb = b.b + predicted.cor_u_vert.at(ie, j);
                let pt = t.b + predicted.cor_u_vert.at(ie, j + 1);
                sy += w * 0.5 * (b.h + t.h) * (pt - pb);
            }
            out[i * ny + j] = [0.0, -g * sx, -g * sy];
        }
    }
    out
}

/// Conservative update U^{n+1} = U^n - λ (δx F1 + δy F2) + λ B.
pub fn fv_update(
    field: &mut ConservedField,
    fx: &[[f64; 3]],
    fy: &[[f64; 3]],
    source: &[[f64; 3]],
    ctx: &StepContext,
) -> Result<(), SolverError> {
    let (nx, ny) = (field.grid.nx, field.grid.ny);
    let nye = ny + 1;
    let lam = ctx.lambda;
    for i in 0..nx {
        for j in 0..ny {
            let old = field.cell(i as isize, j as isize);
            let b = source[i * ny + j];
            let mut new = [old.h, old.hu, old.hv];
            for k in 0..3 {
                let dfx = fx[(i + 1) * ny + j][k] - fx[i * ny + j][k];
                let dfy = fy[i * nye + j + 1][k] - fy[i * nye + j][k];
                new[k] += -lam * (dfx + dfy) + lam * b[k];
            }
            if !(new[0] > 0.0) {
                return Err(SolverError::DryState { h: new[0] });
            }
            field.set_cell(i as isize, j as isize, ConservedState { h: new[0], hu: new[1], hv: new[2] });
        }
    }
    Ok(())
}

/// One full FVEG step: ghost fill, predictor at all edge nodes with τ = Δt/2,
/// half-step Coriolis primitives, Simpson fluxes and interface source, update.
pub fn step(
    field: &mut ConservedField,
    bathy: &Bathymetry,
    cfg: &SchemeConfig,
    ctx: StepContext,
) -> Result<StepDiagnostics, SolverError> {
    apply_boundary(field, cfg.bc);
    let predicted = predict_states(field, bathy, cfg, &ctx)?;
    let (fx, fy) = edge_fluxes(&predicted, &cfg.params)?;
    let source = source_term(&predicted, &cfg.params, field.grid.nx, field.grid.ny);
    fv_update(field, &fx, &fy, &source, &ctx)?;
    field.time += ctx.dt;
    let (min_h, max_h) = field.min_max_h();
    Ok(StepDiagnostics { dt: ctx.dt, min_h, max_h, mass: field.total_mass() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Grid;

    fn grid(nx: usize, ny: usize, hbar: f64) -> Grid {
        Grid::new(nx, ny, hbar, (0.0, 0.0)).unwrap()
    }

    fn uniform_field(grid: Grid, h: f64, u: f64, v: f64) -> ConservedField {
        let mut f = ConservedField::new(grid);
        f.h.fill_with(|_, _| h);
        f.hu.fill_with(|_, _| h * u);
        f.hv.fill_with(|_, _| h * v);
        f
    }

    #[test]
    fn extrapolate_fills_constant() {
        let g = grid(4, 4, 0.25);
        let mut f = uniform_field(g, 2.0, 0.0, 0.0);
        f.h.set(-1, 0, -99.0);
        apply_boundary(&mut f, BoundaryCondition::Extrapolate);
        assert_eq!(f.h.at(-1, 0), 2.0);
        assert_eq!(f.h.at(-2, -2), 2.0);
        assert_eq!(f.h.at(5, 5), 2.0);
    }

    #[test]
    fn periodic_wraps_ramp() {
        let g = grid(4, 1, 0.25);
        let mut f = ConservedField::new(g);
        f.h.fill_with(|i, _| (i.rem_euclid(4) + 1) as f64);
        apply_boundary(&mut f, BoundaryCondition::Periodic);
        assert_eq!(f.h.at(-1, 0), 4.0); // ghost left = rightmost interior
        assert_eq!(f.h.at(4, 0), 1.0);
        assert_eq!(f.h.at(-2, 0), 3.0);
    }

    #[test]
    fn extrapolated_linear_profile_copies_edge_value() {
        let g = grid(4, 2, 0.25);
        let mut f = ConservedField::new(g);
        f.h.fill_with(|i, _| 1.0 + i as f64);
        apply_boundary(&mut f, BoundaryCondition::Extrapolate);
        assert_eq!(f.h.at(-1, 0), 1.0); // zeroth order, by construction
        assert_eq!(f.h.at(4, 0), 4.0);
    }

    #[test]
    fn coriolis_zero_velocity_zero_primitives() {
        let g = grid(6, 4, 0.1);
        let u = ScalarField::zeros(&g);
        let v = ScalarField::zeros(&g);
        let p = PhysicalParams::new(1.0, 1.0).unwrap();
        let c = coriolis_primitives(&g, &u, &v, &p);
        for i in 0..6isize {
            for j in 0..4isize {
                assert_eq!(c.cor_v.at(i, j), 0.0);
                assert_eq!(c.cor_u.at(i, j), 0.0);
            }
        }
    }

    #[test]
    fn coriolis_constant_v_hand_prefix_sum() {
        // constant v = v0, f = g = 1, ħ = 0.1: three cells from the reference
        // accumulate V = 0.3 v0.
        let g = grid(6, 2, 0.1);
        let u = ScalarField::zeros(&g);
        let mut v = ScalarField::zeros(&g);
        let v0 = 1.7;
        v.fill_with(|_, _| v0);
        let p = PhysicalParams::new(1.0, 1.0).unwrap();
        let c = coriolis_primitives(&g, &u, &v, &p);
        assert!((c.cor_v.at(3, 0) - 0.3 * v0).abs() < 1e-15);
        assert_eq!(c.cor_v.at(0, 0), 0.0);
    }

    #[test]
    fn coriolis_f_zero_is_identically_zero() {
        let g = grid(4, 4, 0.1);
        let mut u = ScalarField::zeros(&g);
        let mut v = ScalarField::zeros(&g);
        u.fill_with(|i, j| (i * j) as f64);
        v.fill_with(|i, j| (i + j) as f64);
        let p = PhysicalParams::new(1.0, 0.0).unwrap();
        let c = coriolis_primitives(&g, &u, &v, &p);
        for i in 0..4isize {
            for j in 0..4isize {
                assert_eq!(c.cor_u.at(i, j), 0.0);
                assert_eq!(c.cor_v.at(i, j), 0.0);
            }
        }
    }

    #[test]
    fn coriolis_defining_relations_hold_exactly() {
        let g = grid(8, 8, 0.25);
        let mut u = ScalarField::zeros(&g);
        let mut v = ScalarField::zeros(&g);
        u.fill_with(|i, j| ((0.3 * i as f64).sin() + 0.1 * j as f64).cos());
        v.fill_with(|i, j| (0.2 * (i + 2 * j) as f64).sin());
        let p = PhysicalParams::new(9.812, 10.0).unwrap();
        let c = coriolis_primitives(&g, &u, &v, &p);
        let fac = g.hbar * p.f / p.g;
        let gi = g.ghost as isize;
        for i in (-gi + 1)..(g.nx as isize + gi) {
            for j in -gi..(g.ny as isize + gi) {
                let lhs = c.cor_v.at(i, j) - c.cor_v.at(i - 1, j);
                let rhs = fac * 0.5 * (v.at(i - 1, j) + v.at(i, j));
                assert!((lhs - rhs).abs() < 1e-15);
            }
        }
        for i in -gi..(g.nx as isize + gi) {
            for j in (-gi + 1)..(g.ny as isize + gi) {
                let lhs = c.cor_u.at(i, j) - c.cor_u.at(i, j - 1);
                let rhs = fac * 0.5 * (u.at(i, j - 1) + u.at(i, j));
                assert!((lhs - rhs).abs() < 1e-15);
            }
        }
    }

    fn flat_bathy(g: &Grid) -> Bathymetry {
        Bathymetry::from_function(g, BoundaryCondition::Extrapolate, |_, _| 0.0)
    }

    fn cfg(order: PredictOrder, bc: BoundaryCondition, p: PhysicalParams) -> SchemeConfig {
        SchemeConfig { params: p, order, limiter: Some(LimiterKind::Minmod), bc }
    }

    #[test]
    fn edge_flux_identical_nodes_reproduce_pointwise_flux() {
        let g = grid(2, 2, 0.5);
        let p = PhysicalParams::new(1.0, 0.0).unwrap();
        let field = uniform_field(g, 2.0, 0.5, -0.3);
        let c = cfg(PredictOrder::First, BoundaryCondition::Extrapolate, p);
        let mut f = field.clone();
        apply_boundary(&mut f, c.bc);
        let ctx = StepContext::new(0.05, &g);
        let pred = predict_states(&f, &flat_bathy(&g), &c, &ctx).unwrap();
        let (fx, _) = edge_fluxes(&pred, &p).unwrap();
        let w = PrimitiveState { h: 2.0, u: 0.5, v: -0.3 };
        let exact = physical_flux(&w, Axis::X, &p);
        for k in 0..3 {
            assert!((fx[1 * 2 + 0][k] - exact[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn source_hand_evaluated_single_cell() {
        // ĥ = 1 on the left edge nodes, 2 on the right; b̂ = 0 and 0.5; f = 0;
        // second component = -g Σ ω μ(ĥ) δ(b̂) = -g · 1.5 · 0.5.
        let mut pred = PredictedStates {
            vmid: NodeGrid::new(2, 1),
            hmid: NodeGrid::new(1, 2),
            vert: NodeGrid::new(2, 2),
            cor_v_vmid: NodeScalar::new(2, 1),
            cor_v_vert: NodeScalar::new(2, 2),
            cor_u_hmid: NodeScalar::new(1, 2),
            cor_u_vert: NodeScalar::new(2, 2),
        };
        for j in 0..1 {
            *pred.vmid.at_mut(0, j) = NodeState { h: 1.0, u: 0.0, v: 0.0, b: 0.0 };
            *pred.vmid.at_mut(1, j) = NodeState { h: 2.0, u: 0.0, v: 0.0, b: 0.5 };
        }
        for je in 0..2 {
            *pred.vert.at_mut(0, je) = NodeState { h: 1.0, u: 0.0, v: 0.0, b: 0.0 };
            *pred.vert.at_mut(1, je) = NodeState { h: 2.0, u: 0.0, v: 0.0, b: 0.5 };
            *pred.hmid.at_mut(0, je) = NodeState { h: 1.5, u: 0.0, v: 0.0, b: 0.25 };
        }
        let p = PhysicalParams::new(9.812, 0.0).unwrap();
        let src = source_term(&pred, &p, 1, 1);
        assert!((src[0][1] - (-9.812 * 1.5 * 0.5)).abs() < 1e-12);
        assert!((src[0][2] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn update_zero_fluxes_is_identity() {
        let g = grid(3, 3, 0.5);
        let mut f = uniform_field(g, 1.0, 0.1, 0.2);
        let fx = vec![[0.0; 3]; 4 * 3];
        let fy = vec![[0.0; 3]; 3 * 4];
        let src = vec![[0.0; 3]; 9];
        let before = f.cell(1, 1);
        fv_update(&mut f, &fx, &fy, &src, &StepContext::new(0.1, &g)).unwrap();
        let after = f.cell(1, 1);
        assert_eq!(before, after);
    }

    #[test]
    fn uniform_state_step_is_identity_without_rotation() {
        let g = grid(6, 6, 0.25);
        let p = PhysicalParams::new(1.0, 0.0).unwrap();
        let mut f = uniform_field(g, 2.0, 0.3, -0.1);
        let c = cfg(PredictOrder::Second, BoundaryCondition::Periodic, p);
        let before = f.clone();
        let ctx = StepContext::new(0.05, &g);
        step(&mut f, &flat_bathy(&g), &c, ctx).unwrap();
        assert!(f.h.max_abs_diff(&before.h) < 1e-14);
        assert!(f.hu.max_abs_diff(&before.hu) < 1e-14);
        assert!(f.hv.max_abs_diff(&before.hv) < 1e-14);
    }

    #[test]
    fn uniform_rotating_state_matches_inertial_oscillation() {
        // uniform (u, v) with f ≠ 0 on a periodic domain reduces to the ODE
        // u' = f v, v' = -f u; one step should match to O(dt²).
        let g = grid(8, 8, 0.125);
        let f_cor = 2.0;
        let p = PhysicalParams::new(1.0, f_cor).unwrap();
        let (u0, v0) = (0.3, 0.1);
        let mut f = uniform_field(g, 1.0, u0, v0);
        let c = cfg(PredictOrder::Second, BoundaryCondition::Periodic, p);
        let dt = 0.02;
        step(&mut f, &flat_bathy(&g), &c, StepContext::new(dt, &g)).unwrap();
        let th = f_cor * dt;
        let ue = u0 * th.cos() + v0 * th.sin();
        let ve = -u0 * th.sin() + v0 * th.cos();
        let got_u = f.hu.at(4, 4) / f.h.at(4, 4);
        let got_v = f.hv.at(4, 4) / f.h.at(4, 4);
        assert!((got_u - ue).abs() < 2.0 * dt * dt, "u {} vs {}", got_u, ue);
        assert!((got_v - ve).abs() < 2.0 * dt * dt, "v {} vs {}", got_v, ve);
        // uniform rest state with rotation stays at rest
        let mut f2 = uniform_field(g, 1.0, 0.0, 0.0);
        step(&mut f2, &flat_bathy(&g), &c, StepContext::new(dt, &g)).unwrap();
        assert!(f2.hu.max_abs_diff(&uniform_field(g, 1.0, 0.0, 0.0).hu) < 1e-14);
    }

    #[test]
    fn discrete_product_rule_holds_exactly() {
        // δ(ab) = δ(a) μ(b) + μ(a) δ(b) for the pairwise difference/mean.
        let vals = [(1.3, 2.7), (-0.4, 0.9), (3.1, -1.2), (0.0, 5.5)];
        for &(al, ar) in &vals {
            for &(bl, br) in &vals {
                let delta_ab = ar * br - al * bl;
                let rhs = (ar - al) * 0.5 * (bl + br) + 0.5 * (al + ar) * (br - bl);
                assert!((delta_ab - rhs).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mass_conserved_on_periodic_domain() {
        let g = grid(12, 12, 1.0 / 12.0);
        let p = PhysicalParams::new(9.812, 10.0).unwrap();
        let mut f = ConservedField::new(g);
        let tp = std::f64::consts::TAU;
        f.h.fill_with(|i, j| 10.0 + (tp * g.x_center(i)).sin().exp() * (tp * g.y_center(j)).cos());
        f.hu.fill_with(|i, j| ((tp * g.x_center(i)).cos()).sin() * (tp * g.y_center(j)).sin());
        f.hv.fill_with(|i, j| (tp * g.x_center(i)).cos() * ((tp * g.y_center(j)).sin()).cos());
        let bathy = Bathymetry::from_function(&g, BoundaryCondition::Periodic, |x, y| {
            (tp * x).sin() + (tp * y).cos()
        });
        let c = cfg(PredictOrder::Second, BoundaryCondition::Periodic, p);
        let m0 = f.total_mass();
        for _ in 0..20 {
            let ctx = crate::state::compute_dt(&f, 0.5, 1e9, &p).unwrap();
            step(&mut f, &bathy, &c, ctx).unwrap();
        }
        assert!(((f.total_mass() - m0) / m0).abs() < 1e-13);
    }
}

//! Physical state representations for the shallow water system
//!
//!   h_t  + (hu)_x            + (hv)_y            = 0
//!   (hu)_t + (hu² + gh²/2)_x + (huv)_y           = -g h b_x + f h v
//!   (hv)_t + (huv)_x         + (hv² + gh²/2)_y   = -g h b_y - f h u
//!
//! together with flux functions, wave-speed estimates and time-step control.

use crate::SolverError;

/// Gravitational acceleration and Coriolis parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub g: f64,
    pub f: f64,
}

impl PhysicalParams {
    pub fn new(g: f64, f: f64) -> Result<Self, SolverError> {
        if !(g > 0.0) {
            return Err(SolverError::Config(format!("g must be positive, got {g}")));
        }
        if !(f >= 0.0) {
            return Err(SolverError::Config(format!("f must be >= 0, got {f}")));
        }
        Ok(Self { g, f })
    }
}

/// Uniform Cartesian grid with square cells of size `hbar` and a ghost frame.
///
/// Interior cells are indexed 0..nx × 0..ny; ghost cells carry negative or
/// >= nx/ny indices. Cell (i, j) covers [x_i - ħ/2, x_i + ħ/2] × [y_j - ħ/2, y_j + ħ/2]
/// with center x_i = origin.0 + (i + 1/2) ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub hbar: f64,
    pub origin: (f64, f64),
    pub ghost: usize,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, hbar: f64, origin: (f64, f64)) -> Result<Self, SolverError> {
        if nx == 0 || ny == 0 {
            return Err(SolverError::Config("nx, ny must be >= 1".into()));
        }
        if !(hbar > 0.0) {
            return Err(SolverError::Config(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { nx, ny, hbar, origin, ghost: 2 })
    }

    #[inline]
    pub fn x_center(&self, i: isize) -> f64 {
        self.origin.0 + (i as f64 + 0.5) * self.hbar
    }

    #[inline]
    pub fn y_center(&self, j: isize) -> f64 {
        self.origin.1 + (j as f64 + 0.5) * self.hbar
    }

    /// x-coordinate of the vertical edge with index e (cells e-1 | e).
    #[inline]
    pub fn x_edge(&self, e: isize) -> f64 {
        self.origin.0 + e as f64 * self.hbar
    }

    #[inline]
    pub fn y_edge(&self, e: isize) -> f64 {
        self.origin.1 + e as f64 * self.hbar
    }

    /// Cell containing (x, y); points exactly on a grid line belong to the
    /// lower-index cell.
    #[inline]
    pub fn cell_of(&self, x: f64, y: f64) -> (isize, isize) {
        let sx = (x - self.origin.0) / self.hbar;
        let sy = (y - self.origin.1) / self.hbar;
        (sx.ceil() as isize - 1, sy.ceil() as isize - 1)
    }

    /// True if (i, j) lies within the ghost-padded index range.
    #[inline]
    pub fn in_padded(&self, i: isize, j: isize) -> bool {
        let g = self.ghost as isize;
        i >= -g && i < self.nx as isize + g && j >= -g && j < self.ny as isize + g
    }
}

/// Scalar cell field over a grid, ghost cells included.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    nx: usize,
    ny: usize,
    ghost: usize,
    stride: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        let stride = grid.ny + 2 * grid.ghost;
        Self {
            nx: grid.nx,
            ny: grid.ny,
            ghost: grid.ghost,
            stride,
            data: vec![0.0; (grid.nx + 2 * grid.ghost) * stride],
        }
    }

    #[inline]
    fn idx(&self, i: isize, j: isize) -> usize {
        let g = self.ghost as isize;
        debug_assert!(i >= -g && (i + g) < (self.nx + 2 * self.ghost) as isize, "i={i} out of range");
        debug_assert!(j >= -g && (j + g) < self.stride as isize, "j={j} out of range");
        (i + g) as usize * self.stride + (j + g) as usize
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn ghost(&self) -> usize {
        self.ghost
    }

    /// Fill every cell (ghosts included) from a function of the cell index.
    pub fn fill_with(&mut self, mut f: impl FnMut(isize, isize) -> f64) {
        let g = self.ghost as isize;
        for i in -g..(self.nx as isize + g) {
            for j in -g..(self.ny as isize + g) {
                let v = f(i, j);
                self.set(i, j, v);
            }
        }
    }

    /// Maximum |self - other| over interior cells.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.nx as isize {
            for j in 0..self.ny as isize {
                m = m.max((self.at(i, j) - other.at(i, j)).abs());
            }
        }
        m
    }
}

/// Conserved variables (h, hu, hv) at a point or as a cell average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub h: f64,
    pub hu: f64,
    pub hv: f64,
}

/// Primitive variables (h, u, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub h: f64,
    pub u: f64,
    pub v: f64,
}

impl PrimitiveState {
    pub fn to_conserved(&self) -> ConservedState {
        ConservedState { h: self.h, hu: self.h * self.u, hv: self.h * self.v }
    }
}

/// Convert cell-averaged conserved variables to primitive variables.
pub fn to_primitive(s: ConservedState) -> Result<PrimitiveState, SolverError> {
    if !(s.h > 0.0) {
        return Err(SolverError::DryState { h: s.h });
    }
    Ok(PrimitiveState { h: s.h, u: s.hu / s.h, v: s.hv / s.h })
}

/// Flux direction selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Physical flux f1 (axis = X) or f2 (axis = Y) evaluated at a primitive state.
#[inline]
pub fn physical_flux(w: &PrimitiveState, axis: Axis, params: &PhysicalParams) -> [f64; 3] {
    let hydro = 0.5 * params.g * w.h * w.h;
    match axis {
        Axis::X => [w.h * w.u, w.h * w.u * w.u + hydro, w.h * w.u * w.v],
        Axis::Y => [w.h * w.v, w.h * w.u * w.v, w.h * w.v * w.v + hydro],
    }
}

/// Cell-averaged state on a grid with ghost layers.
#[derive(Debug, Clone)]
pub struct ConservedField {
    pub grid: Grid,
    pub h: ScalarField,
    pub hu: ScalarField,
    pub hv: ScalarField,
    pub time: f64,
}

impl ConservedField {
    pub fn new(grid: Grid) -> Self {
        Self {
            h: ScalarField::zeros(&grid),
            hu: ScalarField::zeros(&grid),
            hv: ScalarField::zeros(&grid),
            grid,
            time: 0.0,
        }
    }

    #[inline]
    pub fn cell(&self, i: isize, j: isize) -> ConservedState {
        ConservedState { h: self.h.at(i, j), hu: self.hu.at(i, j), hv: self.hv.at(i, j) }
    }

    #[inline]
    pub fn set_cell(&mut self, i: isize, j: isize, s: ConservedState) {
        self.h.set(i, j, s.h);
        self.hu.set(i, j, s.hu);
        self.hv.set(i, j, s.hv);
    }

    /// Total interior water volume Σ h ħ², summed row-major for determinism.
    pub fn total_mass(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.grid.nx as isize {
            for j in 0..self.grid.ny as isize {
                sum += self.h.at(i, j);
            }
        }
        sum * self.grid.hbar * self.grid.hbar
    }

    pub fn min_max_h(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.grid.nx as isize {
            for j in 0..self.grid.ny as isize {
                let h = self.h.at(i, j);
                lo = lo.min(h);
                hi = hi.max(h);
            }
        }
        (lo, hi)
    }
}

/// Time step bundle: dt, half step tau = dt/2 and mesh ratio lambda = dt/ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepContext {
    pub dt: f64,
    pub tau: f64,
    pub lambda: f64,
}

impl StepContext {
    pub fn new(dt: f64, grid: &Grid) -> Self {
        Self { dt, tau: 0.5 * dt, lambda: dt / grid.hbar }
    }
}

/// Largest characteristic speed max(|u| + c, |v| + c) over interior cells,
/// where c = sqrt(g h) is the wave celerity.
pub fn max_signal_speed(field: &ConservedField, params: &PhysicalParams) -> Result<f64, SolverError> {
    let mut speed: f64 = 0.0;
    for i in 0..field.grid.nx as isize {
        for j in 0..field.grid.ny as isize {
            let w = to_primitive(field.cell(i, j))?;
            let c = (params.g * w.h).sqrt();
            speed = speed.max(w.u.abs() + c).max(w.v.abs() + c);
        }
    }
    Ok(speed)
}

/// CFL time step dt = cfl ħ / max_signal_speed, clipped so that
/// time + dt never overshoots `t_end`.
pub fn compute_dt(
    field: &ConservedField,
    cfl: f64,
    t_end: f64,
    params: &PhysicalParams,
) -> Result<StepContext, SolverError> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(SolverError::Config(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    let speed = max_signal_speed(field, params)?;
    if speed <= 0.0 {
        return Err(SolverError::UnboundedDt);
    }
    let mut dt = cfl * field.grid.hbar / speed;
    if field.time + dt > t_end {
        dt = t_end - field.time;
    }
    Ok(StepContext::new(dt, &field.grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g: f64) -> PhysicalParams {
        PhysicalParams::new(g, 0.0).unwrap()
    }

    #[test]
    fn to_primitive_rest_state() {
        let w = to_primitive(ConservedState { h: 1.0, hu: 0.0, hv: 0.0 }).unwrap();
        assert_eq!(w, PrimitiveState { h: 1.0, u: 0.0, v: 0.0 });
    }

    #[test]
    fn to_primitive_exact_division() {
        let w = to_primitive(ConservedState { h: 2.0, hu: 4.0, hv: -2.0 }).unwrap();
        assert_eq!(w, PrimitiveState { h: 2.0, u: 2.0, v: -1.0 });
    }

    #[test]
    fn to_primitive_dry_state_rejected() {
        assert!(matches!(
            to_primitive(ConservedState { h: 0.0, hu: 1.0, hv: 0.0 }),
            Err(SolverError::DryState { .. })
        ));
    }

    #[test]
    fn flux_hydrostatic_only() {
        let w = PrimitiveState { h: 1.0, u: 0.0, v: 0.0 };
        assert_eq!(physical_flux(&w, Axis::X, &params(1.0)), [0.0, 0.5, 0.0]);
    }

    #[test]
    fn flux_direct_substitution_y() {
        let w = PrimitiveState { h: 1.0, u: 0.0, v: 3.0 };
        assert_eq!(physical_flux(&w, Axis::Y, &params(1.0)), [3.0, 0.0, 9.5]);
    }

    #[test]
    fn flux_hand_evaluated() {
        // (h=2, u=1, v=-1), axis=x, g=9.812: (2, 2 + 0.5*9.812*4, -2)
        let w = PrimitiveState { h: 2.0, u: 1.0, v: -1.0 };
        let f = physical_flux(&w, Axis::X, &params(9.812));
        assert_eq!(f[0], 2.0);
        assert!((f[1] - 21.624).abs() < 1e-12);
        assert_eq!(f[2], -2.0);
    }

    #[test]
    fn signal_speed_uniform_rest() {
        let grid = Grid::new(4, 4, 0.25, (0.0, 0.0)).unwrap();
        let mut field = ConservedField::new(grid);
        field.h.fill_with(|_, _| 1.0);
        assert!((max_signal_speed(&field, &params(1.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn signal_speed_with_velocity() {
        let grid = Grid::new(4, 4, 0.25, (0.0, 0.0)).unwrap();
        let mut field = ConservedField::new(grid);
        field.h.fill_with(|_, _| 4.0);
        field.hu.fill_with(|_, _| 12.0); // u = 3
        assert!((max_signal_speed(&field, &params(1.0)).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn signal_speed_exhaustive_scan_matches() {
        // §5.4 style data on 25x25: compare against an independent per-cell scan.
        let grid = Grid::new(25, 25, 1.0 / 25.0, (0.0, 0.0)).unwrap();
        let mut field = ConservedField::new(grid);
        let g = 9.812;
        let tp = std::f64::consts::TAU;
        field.h.fill_with(|i, j| 10.0 + (tp * grid.x_center(i)).sin().exp() * (tp * grid.y_center(j)).cos());
        field.hu.fill_with(|i, j| ((tp * grid.x_center(i)).cos()).sin() * (tp * grid.y_center(j)).sin());
        field.hv.fill_with(|i, j| (tp * grid.x_center(i)).cos() * ((tp * grid.y_center(j)).sin()).cos());
        let mut oracle: f64 = 0.0;
        for i in 0..25isize {
            for j in 0..25isize {
                let h = field.h.at(i, j);
                let u = field.hu.at(i, j) / h;
                let v = field.hv.at(i, j) / h;
                let c = (g * h).sqrt();
                oracle = oracle.max((u.abs() + c).max(v.abs() + c));
            }
        }
        let got = max_signal_speed(&field, &PhysicalParams::new(g, 10.0).unwrap()).unwrap();
        assert_eq!(got, oracle);
    }

    #[test]
    fn dt_direct_formula() {
        let grid = Grid::new(10, 1, 0.1, (0.0, 0.0)).unwrap();
        let mut field = ConservedField::new(grid);
        field.h.fill_with(|_, _| 1.0); // c = 1, g = 1
        let ctx = compute_dt(&field, 0.5, 1e9, &params(1.0)).unwrap();
        assert!((ctx.dt - 0.05).abs() < 1e-15);
        assert_eq!(ctx.tau, 0.5 * ctx.dt);
        assert!((ctx.lambda - ctx.dt / 0.1).abs() < 1e-16);
    }

    #[test]
    fn dt_cfl_08() {
        let grid = Grid::new(10, 1, 0.1, (0.0, 0.0)).unwrap();
        let mut field = ConservedField::new(grid);
        field.h.fill_with(|_, _| 4.0); // c = 2 with g = 1
        let ctx = compute_dt(&field, 0.8, 1e9, &params(1.0)).unwrap();
        assert!((ctx.dt - 0.04).abs() < 1e-15);
    }

    #[test]
    fn dt_endpoint_clamp() {
        let grid = Grid::new(10, 1, 0.1, (0.0, 0.0)).unwrap();
        let mut field = ConservedField::new(grid);
        field.h.fill_with(|_, _| 1.0);
        field.time = 0.97;
        let ctx = compute_dt(&field, 0.5, 1.0, &params(1.0)).unwrap();
        assert!((ctx.dt - 0.03).abs() < 1e-15);
    }

    #[test]
    fn dt_cfl_relation_exact() {
        let grid = Grid::new(7, 3, 0.2, (0.0, 0.0)).unwrap();
        let mut field = ConservedField::new(grid);
        field.h.fill_with(|i, j| 1.0 + 0.1 * ((i * 3 + j) % 5) as f64);
        field.hu.fill_with(|i, j| 0.03 * ((i + 2 * j) % 7) as f64);
        let p = params(9.812);
        let ctx = compute_dt(&field, 0.37, 1e9, &p).unwrap();
        let speed = max_signal_speed(&field, &p).unwrap();
        assert!((ctx.dt * speed / grid.hbar - 0.37).abs() <= 1e-14);
    }

    #[test]
    fn cell_of_breaks_ties_to_lower_index() {
        let grid = Grid::new(4, 4, 0.5, (0.0, 0.0)).unwrap();
        assert_eq!(grid.cell_of(0.5, 0.2), (0, 0));
        assert_eq!(grid.cell_of(0.4, 0.5), (0, 0));
        assert_eq!(grid.cell_of(0.6, 0.6), (1, 1));
    }
}

//! Benchmark problem constructors: stationary and quasi-stationary states,
//! the Rossby adjustment of an unbalanced jet, the smooth rotating accuracy
//! test, and exact discrete jet equilibria for well-balance tests.

use crate::fv_scheme::{coriolis_primitives, Bathymetry, BoundaryCondition};
use crate::state::{ConservedField, Grid, PhysicalParams, ScalarField};
use crate::SolverError;

/// How cell averages are initialized from the pointwise data functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Midpoint sampling (second-order consistent with cell averages).
    Midpoint,
    /// n × n midpoint sub-sampling per cell.
    Subcell(usize),
}

type FieldFn = Box<dyn Fn(f64, f64) -> f64>;

/// A fully described benchmark problem.
pub struct Scenario {
    pub name: String,
    /// x-extent of the computational domain; ħ = (x1 - x0) / nx.
    pub x_range: (f64, f64),
    pub y_origin: f64,
    pub bathymetry: FieldFn,
    pub init_h: FieldFn,
    pub init_u: FieldFn,
    pub init_v: FieldFn,
    pub params: PhysicalParams,
    pub bc: BoundaryCondition,
    pub t_end: f64,
    pub suggested_nx: usize,
    pub suggested_ny: usize,
    pub eps: f64,
}

/// Optional overrides applied on top of a scenario's defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScenarioOverrides {
    pub eps: Option<f64>,
    pub f: Option<f64>,
    pub g: Option<f64>,
    pub t_end: Option<f64>,
}

/// Smooth jet profile of the Rossby adjustment problem; N_L(0) = 1.
pub fn jet_profile(x: f64, l: f64) -> f64 {
    let denom = (1.0 + 2.0f64.tanh()) * (1.0 + 2.0f64.tanh());
    (1.0 + (4.0 * x / l + 2.0).tanh()) * (1.0 - (4.0 * x / l - 2.0).tanh()) / denom
}

pub const SCENARIO_NAMES: [&str; 5] =
    ["lake_1d", "lake_2d", "rossby_jet", "accuracy_2d", "jet_equilibrium"];

/// Build a named benchmark scenario.
pub fn make_scenario(name: &str, ov: ScenarioOverrides) -> Result<Scenario, SolverError> {
    let scenario = match name {
        "lake_1d" => {
            let eps = ov.eps.unwrap_or(0.0);
            let b = |x: f64, _y: f64| {
                if (x - 0.5).abs() < 0.1 {
                    0.25 * ((10.0 * std::f64::consts::PI * (x - 0.5)).cos() + 1.0)
                } else {
                    0.0
                }
            };
            Scenario {
                name: name.into(),
                x_range: (0.0, 1.0),
                y_origin: 0.0,
                bathymetry: Box::new(b),
                init_h: Box::new(move |x, y| {
                    let base = 1.0 - b(x, y);
                    if x > 0.1 && x < 0.2 {
                        base + eps
                    } else {
                        base
                    }
                }),
                init_u: Box::new(|_, _| 0.0),
                init_v: Box::new(|_, _| 0.0),
                params: PhysicalParams::new(ov.g.unwrap_or(1.0), ov.f.unwrap_or(0.0))?,
                bc: BoundaryCondition::Extrapolate,
                t_end: ov.t_end.unwrap_or(0.7),
                suggested_nx: 100,
                suggested_ny: 5,
                eps,
            }
        }
        "lake_2d" => {
            let eps = ov.eps.unwrap_or(0.0);
            let b = |x: f64, y: f64| {
                0.8 * (-5.0 * (x - 0.9) * (x - 0.9) - 50.0 * (y - 0.5) * (y - 0.5)).exp()
            };
            Scenario {
                name: name.into(),
                x_range: (0.0, 2.0),
                y_origin: 0.0,
                bathymetry: Box::new(b),
                init_h: Box::new(move |x, y| {
                    let base = 1.0 - b(x, y);
                    if x > 0.05 && x < 0.15 {
                        base + eps
                    } else {
                        base
                    }
                }),
                init_u: Box::new(|_, _| 0.0),
                init_v: Box::new(|_, _| 0.0),
                params: PhysicalParams::new(ov.g.unwrap_or(1.0), ov.f.unwrap_or(0.0))?,
                bc: BoundaryCondition::Extrapolate,
                t_end: ov.t_end.unwrap_or(1.0),
                suggested_nx: 200,
                suggested_ny: 100,
                eps,
            }
        }
        "rossby_jet" => Scenario {
            name: name.into(),
            x_range: (-10.0, 10.0),
            y_origin: 0.0,
            bathymetry: Box::new(|_, _| 0.0),
            init_h: Box::new(|_, _| 1.0),
            init_u: Box::new(|_, _| 0.0),
            init_v: Box::new(|x, _| 2.0 * jet_profile(x, 2.0)),
            params: PhysicalParams::new(ov.g.unwrap_or(1.0), ov.f.unwrap_or(1.0))?,
            bc: BoundaryCondition::Extrapolate,
            t_end: ov.t_end.unwrap_or(10.0),
            suggested_nx: 200,
            suggested_ny: 4,
            eps: 0.0,
        },
        "accuracy_2d" => {
            let tp = std::f64::consts::TAU;
            Scenario {
                name: name.into(),
                x_range: (0.0, 1.0),
                y_origin: 0.0,
                bathymetry: Box::new(move |x, y| (tp * x).sin() + (tp * y).cos()),
                init_h: Box::new(move |x, y| 10.0 + (tp * x).sin().exp() * (tp * y).cos()),
                // data functions specify the momenta hu, hv directly
                init_u: Box::new(move |x, y| {
                    let h = 10.0 + (tp * x).sin().exp() * (tp * y).cos();
                    ((tp * x).cos()).sin() * (tp * y).sin() / h
                }),
                init_v: Box::new(move |x, y| {
                    let h = 10.0 + (tp * x).sin().exp() * (tp * y).cos();
                    (tp * x).cos() * ((tp * y).sin()).cos() / h
                }),
                params: PhysicalParams::new(ov.g.unwrap_or(9.812), ov.f.unwrap_or(10.0))?,
                bc: BoundaryCondition::Periodic,
                t_end: ov.t_end.unwrap_or(0.05),
                suggested_nx: 100,
                suggested_ny: 100,
                eps: 0.0,
            }
        }
        "jet_equilibrium" => Scenario {
            name: name.into(),
            x_range: (-10.0, 10.0),
            y_origin: 0.0,
            bathymetry: Box::new(|_, _| 0.0),
            // placeholder pointwise data; build_field special-cases this
            // scenario through discrete_jet_equilibrium for exact balance.
            init_h: Box::new(|_, _| 1.0),
            init_u: Box::new(|_, _| 0.0),
            init_v: Box::new(|x, _| 2.0 * jet_profile(x, 2.0)),
            params: PhysicalParams::new(ov.g.unwrap_or(1.0), ov.f.unwrap_or(1.0))?,
            bc: BoundaryCondition::Extrapolate,
            t_end: ov.t_end.unwrap_or(10.0),
            suggested_nx: 200,
            suggested_ny: 4,
            eps: 0.0,
        },
        other => return Err(SolverError::Config(format!("unknown scenario '{other}'"))),
    };
    Ok(scenario)
}

impl Scenario {
    pub fn grid(&self, nx: usize, ny: usize) -> Result<Grid, SolverError> {
        let hbar = (self.x_range.1 - self.x_range.0) / nx as f64;
        Grid::new(nx, ny, hbar, (self.x_range.0, self.y_origin))
    }

    /// Initialize the cell-averaged field and bathymetry on an nx × ny grid.
    pub fn build(&self, nx: usize, ny: usize, mode: InitMode) -> Result<(ConservedField, Bathymetry), SolverError> {
        let grid = self.grid(nx, ny)?;
        if self.name == "jet_equilibrium" {
            return discrete_jet_equilibrium(&grid, &self.params, |x| 2.0 * jet_profile(x, 2.0), None, 1.0);
        }
        let bathy = Bathymetry::from_function(&grid, self.bc, |x, y| (self.bathymetry)(x, y));
        let mut field = ConservedField::new(grid);
        let sample = |f: &FieldFn, i: isize, j: isize| -> f64 {
            match mode {
                InitMode::Midpoint => f(grid.x_center(i), grid.y_center(j)),
                InitMode::Subcell(n) => {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            let x = grid.x_center(i) + ((a as f64 + 0.5) / n as f64 - 0.5) * grid.hbar;
                            let y = grid.y_center(j) + ((b as f64 + 0.5) / n as f64 - 0.5) * grid.hbar;
                            acc += f(x, y);
                        }
                    }
                    acc / (n * n) as f64
                }
            }
        };
        let g = grid.ghost as isize;
        for i in -g..(nx as isize + g) {
            for j in -g..(ny as isize + g) {
                let h = sample(&self.init_h, i, j);
                if !(h > 0.0) {
                    return Err(SolverError::DryState { h });
                }
                let u = sample(&self.init_u, i, j);
                let v = sample(&self.init_v, i, j);
                field.h.set(i, j, h);
                field.hu.set(i, j, h * u);
                field.hv.set(i, j, h * v);
            }
        }
        Ok((field, bathy))
    }
}

/// Exact discrete jet equilibrium: u = 0, v = v(x), and h built so that the
/// discrete geostrophic relation g δx(h+b) = ħ f μx v holds at every interface
/// (equivalently δx K = 0 with K = g(h+b-V)), by prefix sums from the left
/// with left surface level h0 + b(left).
pub fn discrete_jet_equilibrium(
    grid: &Grid,
    params: &PhysicalParams,
    v_profile: impl Fn(f64) -> f64,
    b_profile: Option<&dyn Fn(f64) -> f64>,
    h0: f64,
) -> Result<(ConservedField, Bathymetry), SolverError> {
    let g = grid.ghost as isize;
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let mut v = ScalarField::zeros(grid);
    v.fill_with(|i, _| v_profile(grid.x_center(i)));
    let u = ScalarField::zeros(grid);
    let cor = coriolis_primitives(grid, &u, &v, params);

    let mut bathy_cell = ScalarField::zeros(grid);
    if let Some(bf) = b_profile {
        bathy_cell.fill_with(|i, _| bf(grid.x_center(i)));
    }

    let mut field = ConservedField::new(*grid);
    let b_left = bathy_cell.at(-g, 0);
    for i in -g..(nx + g) {
        for j in -g..(ny + g) {
            // surface level w = h0 + b_left + V(i); V already encodes the
            // trapezoidal prefix relation, so delta_x K vanishes identically
            let w = h0 + b_left + (cor.cor_v.at(i, j) - cor.cor_v.at(-g, j));
            let h = w - bathy_cell.at(i, j);
            if !(h > 0.0) {
                return Err(SolverError::DryState { h });
            }
            field.h.set(i, j, h);
            field.hu.set(i, j, 0.0);
            field.hv.set(i, j, h * v.at(i, j));
        }
    }
    Ok((field, Bathymetry { cell: bathy_cell }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lake_1d_rest_surface_is_flat() {
        let sc = make_scenario("lake_1d", ScenarioOverrides::default()).unwrap();
        let (field, bathy) = sc.build(20, 20, InitMode::Midpoint).unwrap();
        for i in 0..20isize {
            for j in 0..20isize {
                let w = field.h.at(i, j) + bathy.cell.at(i, j);
                assert!((w - 1.0).abs() < 1e-15);
                assert_eq!(field.hu.at(i, j), 0.0);
                assert_eq!(field.hv.at(i, j), 0.0);
            }
        }
    }

    #[test]
    fn rossby_jet_profile_values() {
        // N_L(0) = 1, so v(0) = 2.
        assert!((jet_profile(0.0, 2.0) - 1.0).abs() < 1e-15);
        let sc = make_scenario("rossby_jet", ScenarioOverrides::default()).unwrap();
        let (field, _) = sc.build(200, 4, InitMode::Midpoint).unwrap();
        let mut vmax: f64 = 0.0;
        for i in 0..200isize {
            vmax = vmax.max(field.hv.at(i, 0) / field.h.at(i, 0));
        }
        assert!((vmax - 2.0).abs() < 1e-3);
        // Rossby and Burgers numbers of the configuration
        let (f, g, l, h) = (1.0, 1.0, 2.0, 1.0);
        assert!((vmax / (f * l) - 1.0).abs() < 1e-3);
        assert!((g * h / (f * f * l * l) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn accuracy_2d_analytic_corner_values() {
        let sc = make_scenario("accuracy_2d", ScenarioOverrides::default()).unwrap();
        // at (0,0): b = 1, h = 11, hu = 0, hv = 1
        assert!(((sc.bathymetry)(0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!(((sc.init_h)(0.0, 0.0) - 11.0).abs() < 1e-15);
        let h = (sc.init_h)(0.0, 0.0);
        assert!(((sc.init_u)(0.0, 0.0) * h).abs() < 1e-15);
        assert!(((sc.init_v)(0.0, 0.0) * h - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unknown_scenario_rejected() {
        assert!(make_scenario("nope", ScenarioOverrides::default()).is_err());
    }

    #[test]
    fn jet_equilibrium_zero_v_flat_b_is_lake_at_rest() {
        let grid = Grid::new(16, 4, 0.5, (-4.0, 0.0)).unwrap();
        let p = PhysicalParams::new(1.0, 1.0).unwrap();
        let (field, _) = discrete_jet_equilibrium(&grid, &p, |_| 0.0, None, 2.0).unwrap();
        for i in 0..16isize {
            assert_eq!(field.h.at(i, 0), 2.0);
        }
    }

    #[test]
    fn jet_equilibrium_f_zero_flat_surface() {
        let grid = Grid::new(16, 4, 0.5, (-4.0, 0.0)).unwrap();
        let p = PhysicalParams::new(1.0, 0.0).unwrap();
        let b = |x: f64| 0.1 * (0.5 * x).sin() + 0.2;
        let (field, bathy) = discrete_jet_equilibrium(&grid, &p, |x| x.cos(), Some(&b), 2.0).unwrap();
        let w0 = field.h.at(0, 0) + bathy.cell.at(0, 0);
        for i in 0..16isize {
            let w = field.h.at(i, 0) + bathy.cell.at(i, 0);
            assert!((w - w0).abs() < 1e-14);
        }
    }

    #[test]
    fn jet_equilibrium_constant_v_hand_prefix() {
        // v = 1, f = g = 1, ħ = 0.1: h increases by ħ per cell.
        let grid = Grid::new(6, 2, 0.1, (0.0, 0.0)).unwrap();
        let p = PhysicalParams::new(1.0, 1.0).unwrap();
        let (field, _) = discrete_jet_equilibrium(&grid, &p, |_| 1.0, None, 1.0).unwrap();
        for i in 0..5isize {
            let dh = field.h.at(i + 1, 0) - field.h.at(i, 0);
            assert!((dh - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn jet_equilibrium_satisfies_discrete_conditions() {
        // cc1..cc5 at the cell level: u = 0, δy v = 0, μx v δy h = 0,
        // δx K = 0, δy L = 0.
        let grid = Grid::new(40, 4, 0.5, (-10.0, 0.0)).unwrap();
        let p = PhysicalParams::new(1.0, 1.0).unwrap();
        let (field, bathy) =
            discrete_jet_equilibrium(&grid, &p, |x| 2.0 * jet_profile(x, 2.0), None, 1.0).unwrap();
        let g = grid.ghost as isize;
        let mut u = ScalarField::zeros(&grid);
        let mut v = ScalarField::zeros(&grid);
        for i in -g..(40 + g) {
            for j in -g..(4 + g) {
                u.set(i, j, field.hu.at(i, j) / field.h.at(i, j));
                v.set(i, j, field.hv.at(i, j) / field.h.at(i, j));
            }
        }
        let cor = coriolis_primitives(&grid, &u, &v, &p);
        for i in -g..(40 + g - 1) {
            for j in -g..(4 + g - 1) {
                assert_eq!(field.hu.at(i, j), 0.0); // cc1
                assert!((v.at(i, j + 1) - v.at(i, j)).abs() < 1e-15); // cc2
                assert!((field.h.at(i, j + 1) - field.h.at(i, j)).abs() < 1e-14); // cc3
                let k0 = field.h.at(i, j) + bathy.cell.at(i, j) - cor.cor_v.at(i, j);
                let k1 = field.h.at(i + 1, j) + bathy.cell.at(i + 1, j) - cor.cor_v.at(i + 1, j);
                assert!((k1 - k0).abs() < 1e-14, "delta_x K = {}", k1 - k0); // cc4
                let l0 = field.h.at(i, j) + bathy.cell.at(i, j) + cor.cor_u.at(i, j);
                let l1 = field.h.at(i, j + 1) + bathy.cell.at(i, j + 1) + cor.cor_u.at(i, j + 1);
                assert!((l1 - l0).abs() < 1e-14); // cc5
            }
        }
    }

    #[test]
    fn all_built_scenarios_have_positive_depth() {
        for name in SCENARIO_NAMES {
            let sc = make_scenario(name, ScenarioOverrides { eps: Some(0.01), ..Default::default() }).unwrap();
            let (field, _) = sc.build(24, 8, InitMode::Midpoint).unwrap();
            let (min_h, _) = field.min_max_h();
            assert!(min_h > 0.0, "{name}");
        }
    }
}

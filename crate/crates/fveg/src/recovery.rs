//! Continuous bilinear recovery with optional slope limiting, and the residual
//! field (1 - μx²μy²)U feeding the constant-data evolution operator.
//!
//! The recovery interpolates vertex values (arithmetic means of the four
//! adjacent cell averages), so the polynomial's cell mean is μx²μy²U rather
//! than U itself; the missing piece is exactly the residual that the
//! second-order predictor evolves with the constant-data operator. Limiting
//! replaces the slopes (never the center value) and is applied per cell to all
//! recovered variables at once, which keeps the discrete balance identities of
//! the equilibria intact.

use crate::state::{Grid, ScalarField};
use crate::SolverError;

/// Slope limiter kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimiterKind {
    Minmod,
    Mc,
}

/// Limited slope from the two one-sided differences a (left) and b (right).
#[inline]
pub fn limiter(kind: LimiterKind, a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        return 0.0;
    }
    let s = a.signum();
    match kind {
        LimiterKind::Minmod => s * a.abs().min(b.abs()),
        LimiterKind::Mc => s * (2.0 * a.abs()).min(2.0 * b.abs()).min(0.5 * (a + b).abs()),
    }
}

/// Bilinear polynomial on one cell in normalized coordinates ξ, η ∈ [-1/2, 1/2]:
/// p(ξ, η) = c00 + cx ξ + cy η + cxy ξη.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellBilinear {
    pub c00: f64,
    pub cx: f64,
    pub cy: f64,
    pub cxy: f64,
}

impl CellBilinear {
    #[inline]
    pub fn eval(&self, xi: f64, eta: f64) -> f64 {
        self.c00 + self.cx * xi + self.cy * eta + self.cxy * xi * eta
    }
}

/// Per-cell bilinear coefficients for one recovered variable.
#[derive(Debug, Clone)]
pub struct CoefField {
    pub c00: ScalarField,
    pub cx: ScalarField,
    pub cy: ScalarField,
    pub cxy: ScalarField,
}

impl CoefField {
    fn zeros(grid: &Grid) -> Self {
        Self {
            c00: ScalarField::zeros(grid),
            cx: ScalarField::zeros(grid),
            cy: ScalarField::zeros(grid),
            cxy: ScalarField::zeros(grid),
        }
    }

    #[inline]
    pub fn cell(&self, i: isize, j: isize) -> CellBilinear {
        CellBilinear {
            c00: self.c00.at(i, j),
            cx: self.cx.at(i, j),
            cy: self.cy.at(i, j),
            cxy: self.cxy.at(i, j),
        }
    }
}

/// The variables recovered for the predictor step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveredVar {
    H,
    U,
    V,
    B,
    CorU,
    CorV,
}

/// Cell fields entering the recovery: primitive flow variables, bathymetry and
/// the discrete Coriolis primitives.
pub struct RecoveryInput<'a> {
    pub h: &'a ScalarField,
    pub u: &'a ScalarField,
    pub v: &'a ScalarField,
    pub b: &'a ScalarField,
    pub cor_u: &'a ScalarField,
    pub cor_v: &'a ScalarField,
}

/// Piecewise bilinear reconstructions of h, u, v, b, U, V.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub h: CoefField,
    pub u: CoefField,
    pub v: CoefField,
    pub b: CoefField,
    pub cor_u: CoefField,
    pub cor_v: CoefField,
    /// Coefficients are valid for interior indices within this margin of the
    /// ghost frame (outermost ghost ring lacks the vertex stencil).
    pub valid_margin: usize,
}

impl Reconstruction {
    pub fn var(&self, v: RecoveredVar) -> &CoefField {
        match v {
            RecoveredVar::H => &self.h,
            RecoveredVar::U => &self.u,
            RecoveredVar::V => &self.v,
            RecoveredVar::B => &self.b,
            RecoveredVar::CorU => &self.cor_u,
            RecoveredVar::CorV => &self.cor_v,
        }
    }

    /// Evaluate a recovered variable at a point, using the owning cell of
    /// (x, y) (grid-line points belong to the lower-index cell).
    pub fn eval_at(&self, grid: &Grid, var: RecoveredVar, x: f64, y: f64) -> f64 {
        let (ci, cj) = grid.cell_of(x, y);
        let xi = (x - grid.x_center(ci)) / grid.hbar;
        let eta = (y - grid.y_center(cj)) / grid.hbar;
        self.var(var).cell(ci, cj).eval(xi, eta)
    }
}

/// Evaluate one cell polynomial at local coordinates, rejecting points outside
/// the closed cell.
pub fn eval_reconstruction(
    recon: &Reconstruction,
    var: RecoveredVar,
    cell: (isize, isize),
    xi: f64,
    eta: f64,
) -> Result<f64, SolverError> {
    let lim = 0.5 + 1e-12;
    if xi.abs() > lim || eta.abs() > lim {
        return Err(SolverError::Config(format!(
            "local coordinates ({xi}, {eta}) outside the closed cell"
        )));
    }
    Ok(recon.var(var).cell(cell.0, cell.1).eval(xi, eta))
}

fn continuous_coeffs(grid: &Grid, w: &ScalarField) -> CoefField {
    let g = grid.ghost as isize;
    let mut out = CoefField::zeros(grid);
    // vertex value at the (i+1/2, j+1/2) corner shared by cells (i,j)..(i+1,j+1)
    let vertex = |i: isize, j: isize| -> f64 {
        0.25 * (w.at(i, j) + w.at(i + 1, j) + w.at(i, j + 1) + w.at(i + 1, j + 1))
    };
    for i in (-g + 1)..(grid.nx as isize + g - 1) {
        for j in (-g + 1)..(grid.ny as isize + g - 1) {
            let vmm = vertex(i - 1, j - 1);
            let vpm = vertex(i, j - 1);
            let vmp = vertex(i - 1, j);
            let vpp = vertex(i, j);
            out.c00.set(i, j, 0.25 * (vmm + vpm + vmp + vpp));
            out.cx.set(i, j, 0.5 * ((vpm + vpp) - (vmm + vmp)));
            out.cy.set(i, j, 0.5 * ((vmp + vpp) - (vmm + vpm)));
            out.cxy.set(i, j, vpp - vpm - vmp + vmm);
        }
    }
    out
}

fn limited_slopes(grid: &Grid, w: &ScalarField, kind: LimiterKind) -> (ScalarField, ScalarField) {
    let g = grid.ghost as isize;
    let mut lx = ScalarField::zeros(grid);
    let mut ly = ScalarField::zeros(grid);
    for i in (-g + 1)..(grid.nx as isize + g - 1) {
        for j in (-g + 1)..(grid.ny as isize + g - 1) {
            lx.set(i, j, limiter(kind, w.at(i, j) - w.at(i - 1, j), w.at(i + 1, j) - w.at(i, j)));
            ly.set(i, j, limiter(kind, w.at(i, j) - w.at(i, j - 1), w.at(i, j + 1) - w.at(i, j)));
        }
    }
    (lx, ly)
}

/// True when a limited and a continuous slope disagree in sign or by more than
/// a factor of two. Zero pairs agree.
#[inline]
fn slopes_disagree(lim: f64, unlim: f64) -> bool {
    if lim == 0.0 && unlim == 0.0 {
        return false;
    }
    if lim * unlim <= 0.0 {
        return true;
    }
    let (lo, hi) = if lim.abs() < unlim.abs() { (lim.abs(), unlim.abs()) } else { (unlim.abs(), lim.abs()) };
    hi > 2.0 * lo
}

/// Bilinear recovery of all predictor variables.
///
/// `limiter_kind = None` yields the continuous recovery everywhere. With a
/// limiter, a per-cell switch (triggered when limited and continuous x- or
/// y-slopes of h, u or v disagree) replaces the slopes of every variable in
/// that cell by their limited values and drops the cross term.
pub fn recover(grid: &Grid, input: &RecoveryInput, limiter_kind: Option<LimiterKind>) -> Reconstruction {
    let fields: [(&ScalarField, RecoveredVar); 6] = [
        (input.h, RecoveredVar::H),
        (input.u, RecoveredVar::U),
        (input.v, RecoveredVar::V),
        (input.b, RecoveredVar::B),
        (input.cor_u, RecoveredVar::CorU),
        (input.cor_v, RecoveredVar::CorV),
    ];
    let mut coefs: Vec<CoefField> = fields.iter().map(|(w, _)| continuous_coeffs(grid, w)).collect();

    if let Some(kind) = limiter_kind {
        let g = grid.ghost as isize;
        let limited: Vec<(ScalarField, ScalarField)> =
            fields.iter().map(|(w, _)| limited_slopes(grid, w, kind)).collect();
        for i in (-g + 1)..(grid.nx as isize + g - 1) {
            for j in (-g + 1)..(grid.ny as isize + g - 1) {
                // switch decided by the flow variables h, u, v
                let mut fire = false;
                for k in 0..3 {
                    let (lx, ly) = (&limited[k].0, &limited[k].1);
                    if slopes_disagree(lx.at(i, j), coefs[k].cx.at(i, j))
                        || slopes_disagree(ly.at(i, j), coefs[k].cy.at(i, j))
                    {
                        fire = true;
                        break;
                    }
                }
                if fire {
                    for k in 0..6 {
                        coefs[k].cx.set(i, j, limited[k].0.at(i, j));
                        coefs[k].cy.set(i, j, limited[k].1.at(i, j));
                        coefs[k].cxy.set(i, j, 0.0);
                    }
                }
            }
        }
    }

    let mut it = coefs.into_iter();
    Reconstruction {
        h: it.next().unwrap(),
        u: it.next().unwrap(),
        v: it.next().unwrap(),
        b: it.next().unwrap(),
        cor_u: it.next().unwrap(),
        cor_v: it.next().unwrap(),
        valid_margin: 1,
    }
}

/// Residual (1 - μx²μy²)U with the tensor-product 1-2-1 ⊗ 1-2-1 / 16 stencil.
/// Valid one ring inside the padded field.
pub fn residual_field(grid: &Grid, w: &ScalarField) -> ScalarField {
    let g = grid.ghost as isize;
    let mut out = ScalarField::zeros(grid);
    for i in (-g + 1)..(grid.nx as isize + g - 1) {
        for j in (-g + 1)..(grid.ny as isize + g - 1) {
            let mut smooth = 0.0;
            for (di, wi) in [(-1isize, 1.0), (0, 2.0), (1, 1.0)] {
                let mut row = 0.0;
                for (dj, wj) in [(-1isize, 1.0), (0, 2.0), (1, 1.0)] {
                    row += wj * w.at(i + di, j + dj);
                }
                smooth += wi * row;
            }
            out.set(i, j, w.at(i, j) - smooth / 16.0);
        }
    }
    out
}

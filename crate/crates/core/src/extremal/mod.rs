//! Weighted extremal function `V_Q` via discrete Legendre–Fenchel
//! conjugation of the log-radial profile, and the equilibrium masses it
//! induces on annulus/sector products.
//!
//! For a multi-circular weight, `Ψ(S) = V_Q(e^{s_1}, ..., e^{s_m})` is the
//! conjugate of `Φ*` restricted to the unit simplex of slopes. Both
//! transforms are computed on uniform grids; the reported bounds are grid
//! tolerances, not proofs.

pub mod conjugate;
mod region;

pub use conjugate::{conjugate_1d, conjugate_axis, conjugate_nd, GridValues};
pub use region::{Placement, RegionSpec};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::{LogRadialProfile, WeightHandle, WeightKind};

/// Uniform grids used by [`conjugate_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugationGrid {
    pub s_lo: f64,
    pub s_hi: f64,
    pub s_points: usize,
    pub t_points: usize,
}

impl ConjugationGrid {
    /// `[−8, 8]^m`; 2048 S-points and 1024 T-points per axis for `m = 1`,
    /// 256 and 128 otherwise.
    pub fn default_for(m: usize) -> Self {
        if m == 1 {
            ConjugationGrid {
                s_lo: -8.0,
                s_hi: 8.0,
                s_points: 2048,
                t_points: 1024,
            }
        } else {
            ConjugationGrid {
                s_lo: -8.0,
                s_hi: 8.0,
                s_points: 256,
                t_points: 128,
            }
        }
    }

    pub fn s_axis(&self) -> Vec<f64> {
        uniform(self.s_lo, self.s_hi, self.s_points)
    }

    pub fn t_axis(&self) -> Vec<f64> {
        uniform(0.0, 1.0, self.t_points)
    }

    pub fn s_spacing(&self) -> f64 {
        (self.s_hi - self.s_lo) / (self.s_points - 1) as f64
    }

    pub fn t_spacing(&self) -> f64 {
        1.0 / (self.t_points - 1) as f64
    }
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Largest outward slope tolerated at the right faces of the S-box.
const FACE_SLOPE_TOL: f64 = 1e-6;
/// Largest value `sup` could still gain beyond the left faces.
const LEFT_GAIN_TOL: f64 = 1e-3;

/// `Φ*` on the slope cube `[0,1]^m`; only the simplex part feeds `V_Q`.
#[derive(Debug, Clone)]
pub struct ConjugateTable {
    dimension: usize,
    grid: ConjugationGrid,
    t_axis: Vec<f64>,
    values: GridValues,
    /// Bound on what the sup can gain beyond the left faces of the S-box.
    pub left_truncation: f64,
}

impl ConjugateTable {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn grid(&self) -> &ConjugationGrid {
        &self.grid
    }

    pub fn t_axis(&self) -> &[f64] {
        &self.t_axis
    }

    /// Φ* on the slope cube, row-major.
    pub fn cube_values(&self) -> &GridValues {
        &self.values
    }

    /// `Φ*` at the grid point with per-axis indices `idx`.
    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values.values[self.values.flat_index(idx)]
    }

    pub fn in_simplex(&self, idx: &[usize]) -> bool {
        idx.iter().map(|&i| self.t_axis[i]).sum::<f64>() <= 1.0 + 1e-12
    }

    /// `(T, Φ*(T))` for every grid point of the simplex, in lexicographic order.
    pub fn simplex_points(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = Vec::new();
        for flat in 0..self.values.len() {
            let idx = self.values.multi_index(flat);
            if self.in_simplex(&idx) {
                out.push((
                    idx.iter().map(|&i| self.t_axis[i]).collect(),
                    self.values.values[flat],
                ));
            }
        }
        out
    }

    /// Φ* with `+∞` off the simplex.
    fn masked(&self) -> GridValues {
        let mut g = self.values.clone();
        for flat in 0..g.len() {
            let idx = g.multi_index(flat);
            if !self.in_simplex(&idx) {
                g.values[flat] = f64::INFINITY;
            }
        }
        g
    }

    /// Largest difference quotient of Φ* between grid neighbours on the simplex.
    pub fn lipschitz_estimate(&self) -> f64 {
        let dt = self.grid.t_spacing();
        let mut lip: f64 = 0.0;
        for flat in 0..self.values.len() {
            let idx = self.values.multi_index(flat);
            if !self.in_simplex(&idx) {
                continue;
            }
            for k in 0..self.dimension {
                if idx[k] + 1 < self.t_axis.len() {
                    let mut nb = idx.clone();
                    nb[k] += 1;
                    if self.in_simplex(&nb) {
                        let d = (self.at(&nb) - self.values.values[flat]).abs() / dt;
                        lip = lip.max(d);
                    }
                }
            }
        }
        lip
    }
}

/// Builds the table of `Φ*(T) = sup_S (⟨S,T⟩ − Φ(S))` on the slope grid.
///
/// Fails with [`Error::SBoxTooSmall`] when the sup could still grow outside
/// the box: at the right faces `∂_kΦ` must reach 1 (the largest slope), and
/// the possible gain past the left faces must stay below `1e-3`.
pub fn conjugate_profile(profile: &LogRadialProfile, grid: ConjugationGrid) -> Result<ConjugateTable> {
    let m = profile.dimension();
    if grid.s_points < 3 || grid.t_points < 2 || !(grid.s_hi > grid.s_lo) {
        return Err(Error::InvalidArgument(format!("degenerate conjugation grid {grid:?}")));
    }
    let s_axis = grid.s_axis();
    let t_axis = grid.t_axis();
    let n = grid.s_points;
    let total = n.pow(m as u32);
    let mut phi = GridValues {
        dims: vec![n; m],
        values: Vec::with_capacity(total),
    };
    let mut s = vec![0.0; m];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..m).rev() {
            s[k] = s_axis[rem % n];
            rem /= n;
        }
        phi.values.push(profile.eval(&s));
    }

    let exempt = profile.weight().growth_exempt();
    let h = grid.s_spacing();
    let mut left_gain: f64 = 0.0;
    let face_count = n.pow(m as u32 - 1);
    for axis in 0..m {
        for f in 0..face_count {
            // face point: axis coordinate pinned, others enumerate the face
            let mut idx = vec![0usize; m];
            let mut rem = f;
            for k in (0..m).rev() {
                if k == axis {
                    continue;
                }
                idx[k] = rem % n;
                rem /= n;
            }
            idx[axis] = n - 1;
            let right = phi.values[phi.flat_index(&idx)];
            idx[axis] = n - 2;
            let inner = phi.values[phi.flat_index(&idx)];
            let slope = (right - inner) / h;
            if !exempt && slope < 1.0 - FACE_SLOPE_TOL {
                return Err(Error::SBoxTooSmall(format!(
                    "∂Φ/∂s_{axis} = {slope:.3e} < 1 on the right face s = {}",
                    grid.s_hi
                )));
            }
            idx[axis] = 0;
            let at_face = phi.values[phi.flat_index(&idx)];
            let point: Vec<f64> = (0..m)
                .map(|k| if k == axis { grid.s_lo - 40.0 } else { s_axis[idx[k]] })
                .collect();
            left_gain = left_gain.max(at_face - profile.eval(&point));
        }
    }
    if left_gain > LEFT_GAIN_TOL {
        return Err(Error::SBoxTooSmall(format!(
            "sup may gain {left_gain:.3e} beyond the left face s = {}",
            grid.s_lo
        )));
    }

    let axes_s = vec![s_axis; m];
    let axes_t = vec![t_axis.clone(); m];
    let values = conjugate_nd(&phi, &axes_s, &axes_t);
    Ok(ConjugateTable {
        dimension: m,
        grid,
        t_axis,
        values,
        left_truncation: left_gain.max(0.0),
    })
}

#[derive(Debug, Clone)]
enum Backend {
    Conjugate { table: ConjugateTable, simplex: Vec<(Vec<f64>, f64)> },
    FubiniStudy { dimension: usize },
}

/// Evaluates `V_Q`; immutable once built.
#[derive(Debug, Clone)]
pub struct ExtremalEvaluator {
    weight: WeightHandle,
    backend: Backend,
}

impl ExtremalEvaluator {
    /// Closed form for Fubini–Study, conjugation on the default grid otherwise.
    pub fn new(weight: &WeightHandle) -> Result<Self> {
        Self::with_grid(weight, ConjugationGrid::default_for(weight.dimension()))
    }

    pub fn with_grid(weight: &WeightHandle, grid: ConjugationGrid) -> Result<Self> {
        if matches!(weight.kind(), WeightKind::FubiniStudy) {
            return Ok(ExtremalEvaluator {
                weight: weight.clone(),
                backend: Backend::FubiniStudy {
                    dimension: weight.dimension(),
                },
            });
        }
        let table = conjugate_profile(&weight.log_profile(), grid)?;
        Ok(Self::from_table(weight, table))
    }

    /// Forces the conjugation route even where a closed form exists.
    pub fn conjugated(weight: &WeightHandle, grid: ConjugationGrid) -> Result<Self> {
        let table = conjugate_profile(&weight.log_profile(), grid)?;
        Ok(Self::from_table(weight, table))
    }

    pub fn from_table(weight: &WeightHandle, table: ConjugateTable) -> Self {
        let simplex = table.simplex_points();
        ExtremalEvaluator {
            weight: weight.clone(),
            backend: Backend::Conjugate { table, simplex },
        }
    }

    pub fn weight(&self) -> &WeightHandle {
        &self.weight
    }

    pub fn dimension(&self) -> usize {
        self.weight.dimension()
    }

    pub fn table(&self) -> Option<&ConjugateTable> {
        match &self.backend {
            Backend::Conjugate { table, .. } => Some(table),
            Backend::FubiniStudy { .. } => None,
        }
    }

    /// `Ψ(S)`; entries equal to `−∞` mark zero coordinates (slope pinned to 0).
    pub fn value_at_log_radii(&self, s: &[f64]) -> f64 {
        match &self.backend {
            Backend::FubiniStudy { .. } => {
                let mx = s.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(2.0 * b));
                if mx == f64::NEG_INFINITY {
                    0.0
                } else if mx > 0.0 {
                    let tail = (-mx).exp() + s.iter().map(|&x| (2.0 * x - mx).exp()).sum::<f64>();
                    0.5 * (mx + tail.ln())
                } else {
                    0.5 * s.iter().map(|&x| (2.0 * x).exp()).sum::<f64>().ln_1p()
                }
            }
            Backend::Conjugate { simplex, .. } => {
                let mut best = f64::NEG_INFINITY;
                'points: for (t, phistar) in simplex {
                    let mut dot = 0.0;
                    for (sk, tk) in s.iter().zip(t) {
                        if *sk == f64::NEG_INFINITY {
                            if *tk > 0.0 {
                                continue 'points;
                            }
                        } else {
                            dot += sk * tk;
                        }
                    }
                    let v = dot - phistar;
                    if v > best {
                        best = v;
                    }
                }
                best
            }
        }
    }

    /// `V_Q(z)`.
    pub fn value(&self, z: &[Complex64]) -> f64 {
        let s: Vec<f64> = z.iter().map(|w| w.norm().ln()).collect();
        self.value_at_log_radii(&s)
    }

    /// `V_Q` at coordinate moduli.
    pub fn value_at_radii(&self, radii: &[f64]) -> f64 {
        let s: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        self.value_at_log_radii(&s)
    }

    /// Value with a grid-tolerance bound `Δt·(‖S‖ + Lip(Φ*)) + left truncation`.
    pub fn value_with_bound(&self, z: &[Complex64]) -> (f64, f64) {
        let v = self.value(z);
        match &self.backend {
            Backend::FubiniStudy { .. } => (v, 0.0),
            Backend::Conjugate { table, .. } => {
                let s_norm = z
                    .iter()
                    .map(|w| {
                        let l = w.norm().ln();
                        if l.is_finite() {
                            l * l
                        } else {
                            0.0
                        }
                    })
                    .sum::<f64>()
                    .sqrt();
                let bound = table.grid().t_spacing() * (s_norm + table.lipschitz_estimate())
                    + table.left_truncation;
                (v, bound)
            }
        }
    }

    /// `Ψ` on a product grid of log-radii (each axis ascending).
    pub fn psi_grid(&self, axes: &[Vec<f64>]) -> GridValues {
        match &self.backend {
            Backend::Conjugate { table, .. } => {
                let masked = table.masked();
                let t_axes = vec![table.t_axis().to_vec(); table.dimension()];
                conjugate_nd(&masked, &t_axes, axes)
            }
            Backend::FubiniStudy { dimension } => {
                let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
                let total: usize = dims.iter().product();
                let mut g = GridValues {
                    dims,
                    values: Vec::with_capacity(total),
                };
                let mut s = vec![0.0; *dimension];
                for flat in 0..total {
                    let idx = g.multi_index(flat);
                    for k in 0..*dimension {
                        s[k] = axes[k][idx[k]];
                    }
                    g.values.push(self.value_at_log_radii(&s));
                }
                g
            }
        }
    }

    /// `μ_Q` of the closed disk of radius `r` (one variable only), from a
    /// symmetric difference of `Ψ` at `log r` with step equal to the S spacing.
    pub fn radial_equilibrium_cdf(&self, r: f64) -> Result<f64> {
        if self.dimension() != 1 {
            return Err(Error::Unsupported(format!(
                "radial equilibrium distribution needs m = 1, got m = {}",
                self.dimension()
            )));
        }
        if !(r > 0.0) {
            return Ok(0.0);
        }
        if let Backend::FubiniStudy { .. } = self.backend {
            return Ok(r * r / (1.0 + r * r));
        }
        // one S-cell each side: the grid Ψ interpolates Φ linearly between nodes
        let delta = self.table().map_or(1e-4, |t| t.grid().s_spacing());
        let s = r.ln();
        let up = self.value_at_log_radii(&[s + delta]);
        let down = self.value_at_log_radii(&[s - delta]);
        Ok(((up - down) / (2.0 * delta)).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassKind {
    /// `μ_Q(U)`, one variable.
    MuQ,
    /// `𝒱_U` for the weighted ensemble.
    VU,
    /// `ℳ_U` for the elliptic ensemble.
    MU,
    /// Equilibrium measure of the support of a regular measure.
    Nu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassMethod {
    RadialDerivative,
    FiniteDifferenceLaplacian,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMass {
    pub value: f64,
    pub kind: MassKind,
    pub method: MassMethod,
    /// `|M(h/2) − M(h)|` for the finite-difference route.
    pub richardson_delta: Option<f64>,
}

/// Cells per log-radius axis for the finite-difference Laplacian.
pub const LAPLACIAN_CELLS: usize = 64;

/// Limiting zero mass of `region`.
///
/// One variable: radial CDF difference times the angular fraction. Several
/// variables: `(1/2π) ∫_U ΔV_Q dV`, with the Laplacian taken by central
/// differences in log-polar coordinates (`Δ_k = r_k^{−2} ∂²/∂s_k²`).
pub fn reference_mass(ev: &ExtremalEvaluator, region: &RegionSpec, kind: MassKind) -> Result<ReferenceMass> {
    region.validate()?;
    let m = ev.dimension();
    if region.dimension() != m {
        return Err(Error::InvalidRegion(format!(
            "region has {} coordinates, weight has {m}",
            region.dimension()
        )));
    }
    let is_fs = matches!(ev.weight().kind(), WeightKind::FubiniStudy);
    match kind {
        MassKind::MU if !is_fs => {
            return Err(Error::InvalidArgument("M_U requires the Fubini–Study weight".into()))
        }
        MassKind::MuQ if m != 1 => {
            return Err(Error::InvalidArgument("μ_Q masses are one-variable".into()))
        }
        MassKind::Nu => {
            return Err(Error::InvalidArgument(
                "ν masses come from the regular-measure module".into(),
            ))
        }
        _ => {}
    }
    if region.is_degenerate() {
        return Ok(ReferenceMass {
            value: 0.0,
            kind,
            method: MassMethod::ClosedForm,
            richardson_delta: None,
        });
    }
    if m == 1 {
        let [lo, hi] = region.annuli[0];
        let frac = region.sector_fraction(0);
        let value = (ev.radial_equilibrium_cdf(hi)? - ev.radial_equilibrium_cdf(lo)?) * frac;
        let method = if is_fs {
            MassMethod::ClosedForm
        } else {
            MassMethod::RadialDerivative
        };
        return Ok(ReferenceMass {
            value: value.max(0.0),
            kind,
            method,
            richardson_delta: None,
        });
    }
    let coarse = laplacian_mass(ev, region, LAPLACIAN_CELLS);
    let fine = laplacian_mass(ev, region, 2 * LAPLACIAN_CELLS);
    Ok(ReferenceMass {
        value: fine.max(0.0),
        kind,
        method: MassMethod::FiniteDifferenceLaplacian,
        richardson_delta: Some((fine - coarse).abs()),
    })
}

/// `(1/2π) ∫_U ΔV dV` on `cells` log-radius cells per axis.
pub fn laplacian_mass(ev: &ExtremalEvaluator, region: &RegionSpec, cells: usize) -> f64 {
    let m = region.dimension();
    let mut s_lo = vec![0.0; m];
    let mut h = vec![0.0; m];
    let mut axes = Vec::with_capacity(m);
    for k in 0..m {
        let [lo, hi] = region.annuli[k];
        if hi <= lo {
            return 0.0;
        }
        // a tiny core disk stands in for r⁻ = 0; its mass is O(1e−12)
        let a = lo.max(hi * 1e-6).ln();
        let b = hi.ln();
        s_lo[k] = a;
        h[k] = (b - a) / cells as f64;
        axes.push(
            (0..cells + 2)
                .map(|i| a + (i as f64 - 0.5) * h[k])
                .collect::<Vec<f64>>(),
        );
    }
    let psi = ev.psi_grid(&axes);
    // ∫ e^{2s} ds over each cell, i.e. ∫ r dr
    let weights: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            (0..=cells + 1)
                .map(|i| {
                    if i == 0 || i > cells {
                        0.0
                    } else {
                        let lo = s_lo[k] + (i as f64 - 1.0) * h[k];
                        let hi = s_lo[k] + i as f64 * h[k];
                        0.5 * ((2.0 * hi).exp() - (2.0 * lo).exp())
                    }
                })
                .collect()
        })
        .collect();
    let stride: Vec<usize> = (0..m)
        .map(|k| psi.dims[k + 1..].iter().product())
        .collect();
    let mut total = 0.0;
    let mut idx = vec![1usize; m];
    loop {
        let flat: usize = idx.iter().zip(&stride).map(|(i, s)| i * s).sum();
        let centre = psi.values[flat];
        for k in 0..m {
            let second = psi.values[flat + stride[k]] - 2.0 * centre + psi.values[flat - stride[k]];
            let mut w = second / h[k];
            for l in 0..m {
                if l != k {
                    w *= weights[l][idx[l]];
                }
            }
            total += w;
        }
        // odometer over 1..=cells
        let mut k = m;
        loop {
            if k == 0 {
                let angular: f64 = (0..m).map(|l| 2.0 * std::f64::consts::PI * region.sector_fraction(l)).product();
                return total * angular / (2.0 * std::f64::consts::PI);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] <= cells {
                break;
            }
            idx[k] = 1;
        }
    }
}

#[cfg(test)]
mod tests;

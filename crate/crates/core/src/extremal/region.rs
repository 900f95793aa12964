use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Product of per-coordinate annuli `r⁻ < |z_k| < r⁺`, optionally cut to
/// angular sectors `θ⁻ ≤ arg z_k < θ⁺`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub annuli: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sectors: Option<Vec<[f64; 2]>>,
}

/// Where a point sits relative to a region, with a tolerance band at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Inside,
    Outside,
    Boundary,
}

impl RegionSpec {
    pub fn annulus(inner: f64, outer: f64) -> Self {
        RegionSpec {
            annuli: vec![[inner, outer]],
            sectors: None,
        }
    }

    pub fn disk(radius: f64) -> Self {
        Self::annulus(0.0, radius)
    }

    pub fn product(annuli: Vec<[f64; 2]>) -> Self {
        RegionSpec {
            annuli,
            sectors: None,
        }
    }

    pub fn with_sectors(mut self, sectors: Vec<[f64; 2]>) -> Self {
        self.sectors = Some(sectors);
        self
    }

    pub fn dimension(&self) -> usize {
        self.annuli.len()
    }

    /// Radii must satisfy `0 ≤ r⁻ ≤ r⁺ < ∞`; sectors must lie in `[0, 2π]`.
    pub fn validate(&self) -> Result<()> {
        if self.annuli.is_empty() {
            return Err(Error::InvalidRegion("region has no coordinates".into()));
        }
        for &[lo, hi] in &self.annuli {
            if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidRegion(format!(
                    "annulus [{lo}, {hi}] must satisfy 0 ≤ r⁻ ≤ r⁺ < ∞"
                )));
            }
        }
        if let Some(sectors) = &self.sectors {
            if sectors.len() != self.annuli.len() {
                return Err(Error::InvalidRegion(format!(
                    "{} sectors for {} coordinates",
                    sectors.len(),
                    self.annuli.len()
                )));
            }
            for &[lo, hi] in sectors {
                if !(lo >= 0.0 && hi >= lo && hi <= 2.0 * PI + 1e-12) {
                    return Err(Error::InvalidRegion(format!(
                        "sector [{lo}, {hi}] must lie in [0, 2π]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether every inner radius is positive, i.e. the closure avoids the coordinate axes.
    pub fn avoids_axes(&self) -> bool {
        self.annuli.iter().all(|&[lo, _]| lo > 0.0)
    }

    pub fn sector(&self, k: usize) -> [f64; 2] {
        self.sectors
            .as_ref()
            .map(|s| s[k])
            .unwrap_or([0.0, 2.0 * PI])
    }

    /// Angular fraction of coordinate `k`.
    pub fn sector_fraction(&self, k: usize) -> f64 {
        let [lo, hi] = self.sector(k);
        ((hi - lo) / (2.0 * PI)).clamp(0.0, 1.0)
    }

    pub fn total_sector_fraction(&self) -> f64 {
        (0..self.dimension()).map(|k| self.sector_fraction(k)).product()
    }

    /// Euclidean area of coordinate `k`'s factor.
    pub fn factor_area(&self, k: usize) -> f64 {
        let [lo, hi] = self.annuli[k];
        PI * (hi * hi - lo * lo) * self.sector_fraction(k)
    }

    /// Euclidean `2m`-volume.
    pub fn volume(&self) -> f64 {
        (0..self.dimension()).map(|k| self.factor_area(k)).product()
    }

    pub fn is_degenerate(&self) -> bool {
        self.volume() == 0.0
    }

    /// Placement of a single coordinate value in factor `k`; points within
    /// `tol` (absolute) of the factor's boundary are reported as `Boundary`.
    pub fn place_coordinate(&self, k: usize, z: Complex64, tol: f64) -> Placement {
        let [lo, hi] = self.annuli[k];
        let r = z.norm();
        let [a, b] = self.sector(k);
        let proper_sector = b - a < 2.0 * PI - 1e-12;
        let mut th = z.arg();
        if th < 0.0 {
            th += 2.0 * PI;
        }
        let angular_in = !proper_sector || (th >= a && th < b);
        let radial_in = r > lo && r < hi;
        let on_arc = ((r - hi).abs() <= tol || (lo > 0.0 && (r - lo).abs() <= tol)) && angular_in;
        let on_edge = proper_sector && r >= lo - tol && r <= hi + tol && {
            let near = |edge: f64| {
                let d = (th - edge).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d) * r <= tol
            };
            near(a) || near(b)
        };
        if on_arc || on_edge {
            Placement::Boundary
        } else if radial_in && angular_in {
            Placement::Inside
        } else {
            Placement::Outside
        }
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        z.iter().enumerate().all(|(k, &zk)| {
            let [lo, hi] = self.annuli[k];
            let r = zk.norm();
            if !(r > lo && r < hi) {
                return false;
            }
            if self.sectors.is_some() {
                let [a, b] = self.sector(k);
                let mut th = zk.arg();
                if th < 0.0 {
                    th += 2.0 * PI;
                }
                th >= a && th < b
            } else {
                true
            }
        })
    }

    /// Short identifier used in records.
    pub fn id(&self) -> String {
        let parts: Vec<String> = self
            .annuli
            .iter()
            .map(|[a, b]| format!("{a}<|z|<{b}"))
            .collect();
        let mut s = parts.join("x");
        if let Some(sec) = &self.sectors {
            let secs: Vec<String> = sec.iter().map(|[a, b]| format!("[{a},{b})")).collect();
            s.push_str(&format!(" arg{}", secs.join("x")));
        }
        s
    }
}

//! Discrete concentration-compactness ledger: where the critical mass of
//! a state sits (near the origin, in the bulk, near infinity), the
//! Palais-Smale threshold levels and quantization ladders, and synthetic
//! bubble trains for probing the ladder empirically.
//!
//! The partition uses C¹ smoothstep cut-offs in log-radius, one decade
//! wide (narrower when the origin and infinity windows would otherwise
//! overlap), so the three window functions sum to one at every node and
//! the ledger is additive to rounding.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::{s_lambda, sample_bubble, sobolev_constant};
use crate::energy::StatePair;
use crate::grid::{RadialField, RadialGrid};
use crate::nehari::Component;
use crate::{neumaier_sum, Error, Params, Result, Scalar};

/// Masses of one component, split by region.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentMasses {
    /// Critical mass `∫ φ_ε |w|^{2*}` near the origin.
    pub rho_origin: f64,
    /// Critical mass in the bulk window.
    pub rho_bulk: f64,
    /// Critical mass `∫ φ_R |w|^{2*}` near infinity.
    pub rho_infinity: f64,
    /// Hardy mass `∫ φ_ε w²/r²` near the origin.
    pub gamma_origin: f64,
    /// Gradient mass `∫ φ_ε |∇w|²` near the origin.
    pub mu_origin: f64,
}

/// Region-resolved mass accounting for a pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassLedger {
    pub first: ComponentMasses,
    pub second: ComponentMasses,
    /// Origin window boundary.
    pub eps: f64,
    /// Infinity window boundary.
    pub r_infinity: f64,
}

impl MassLedger {
    /// JSON document for the external report.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serialization")
    }
}

/// C¹ smoothstep: 0 below the window, 1 above, `3t²−2t³` inside.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * (3.0 - 2.0 * t)
    }
}

/// Window functions (origin, bulk, infinity) at one log-radius.
fn windows(s: f64, ln_eps: f64, ln_r: f64, width: f64) -> (f64, f64, f64) {
    // 1 on [.., ln_eps], ramps down across [ln_eps, ln_eps + width].
    let origin = 1.0 - smoothstep((s - ln_eps) / width);
    // 1 on [ln_r, ..], ramps up across [ln_r - width, ln_r].
    let infinity = smoothstep((s - (ln_r - width)) / width);
    let bulk = (1.0 - origin - infinity).max(0.0);
    (origin, bulk, infinity)
}

fn component_masses<S: Scalar>(
    w: &RadialField<S>,
    grid: &RadialGrid<S>,
    ln_eps: f64,
    ln_r: f64,
    width: f64,
) -> ComponentMasses {
    let ts = grid.two_star().to_real();
    let svals = grid.log_radii();
    let quad = grid.quad_weights();
    let hardy = grid.hardy_weights();
    let flux = grid.flux_weights();
    let vals = w.values();
    let n = grid.len();

    let mut rho = [0.0f64; 3];
    let mut gamma_origin = 0.0f64;
    for i in 0..n {
        let (o, b, inf) = windows(svals[i].to_real(), ln_eps, ln_r, width);
        let a = vals[i].to_real().abs();
        let lp = quad[i].to_real() * a.powf(ts);
        rho[0] += o * lp;
        rho[1] += b * lp;
        rho[2] += inf * lp;
        gamma_origin += o * hardy[i].to_real() * a * a;
    }
    let mu_origin = neumaier_sum((0..n - 1).map(|k| {
        let mid = 0.5 * (svals[k].to_real() + svals[k + 1].to_real());
        let (o, _, _) = windows(mid, ln_eps, ln_r, width);
        let d = (vals[k + 1] - vals[k]).to_real();
        o * flux[k].to_real() * d * d
    }));

    ComponentMasses {
        rho_origin: rho[0],
        rho_bulk: rho[1],
        rho_infinity: rho[2],
        gamma_origin,
        mu_origin,
    }
}

/// Splits each component's critical, Hardy, and gradient masses into the
/// origin window `r ≲ eps`, the bulk, and the infinity window `r ≳ R`,
/// using decade-wide C¹ cut-offs in log-radius.
pub fn mass_accounting<S: Scalar>(s: &StatePair<S>, eps: S, big_r: S) -> Result<MassLedger> {
    let grid = s.grid();
    let (rmin, rmax) = (grid.r_min().to_real(), grid.r_max().to_real());
    let (e, r) = (eps.to_real(), big_r.to_real());
    if !(e.is_finite() && r.is_finite()) || e <= rmin || r >= rmax || e >= r {
        return Err(Error::Domain(format!(
            "mass accounting needs r_min < eps < R < r_max, got eps={e:e}, R={r:e} \
             on [{rmin:e}, {rmax:e}]"
        )));
    }
    let (ln_eps, ln_r) = (e.ln(), r.ln());
    let width = (10.0f64.ln()).min(0.5 * (ln_r - ln_eps));

    Ok(MassLedger {
        first: component_masses(s.u(), grid, ln_eps, ln_r, width),
        second: component_masses(s.v(), grid, ln_eps, ln_r, width),
        eps: e,
        r_infinity: r,
    })
}

/// Palais-Smale threshold levels and quantization ladders for a
/// parameter set, all from closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsReport {
    /// Semi-trivial level `(1/N)·S(λ₁)^{N/2}`.
    pub level_first: f64,
    /// Semi-trivial level `(1/N)·S(λ₂)^{N/2}`.
    pub level_second: f64,
    /// Below this level every Palais-Smale sequence is compact:
    /// `(1/N)·min{S(λ₁), S(λ₂)}^{N/2}`.
    pub subcritical_threshold: f64,
    /// Window `((1/N)S^{N/2}(λ₂), (1/N)(S^{N/2}(λ₁)+S^{N/2}(λ₂)))`.
    pub window_second: (f64, f64),
    /// Excluded levels `ℓ/N·S^{N/2}(λ₂)` meeting the closed window.
    pub ladder_second: Vec<f64>,
    /// Mirrored window with the first component's level as the rung.
    pub window_first: (f64, f64),
    /// Excluded levels `ℓ/N·S^{N/2}(λ₁)` meeting the closed window.
    pub ladder_first: Vec<f64>,
    /// Whether `S^{N/2}(λ₁) + S^{N/2}(λ₂) < S^{N/2}` for the plain
    /// Sobolev constant.
    pub sum_below_uncut_sobolev: bool,
    /// The window's upper endpoint coincides with a ladder rung (exactly
    /// the case λ₁ = λ₂), so no margin survives at either boundary.
    pub degenerate_window: bool,
}

impl PsReport {
    /// JSON document for the external report.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("threshold serialization")
    }
}

fn ladder(rung: f64, upper: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut ell = 1.0f64;
    while ell * rung <= upper * (1.0 + 1e-12) {
        out.push(ell * rung);
        ell += 1.0;
    }
    out
}

/// Computes the compactness thresholds, the two quantization windows
/// with their excluded ladders, and the structural flags, from the
/// closed-form constants alone.
pub fn ps_thresholds<S: Scalar>(p: &Params<S>) -> Result<PsReport> {
    let nd = p.n_dim;
    let n = f64::from(nd);
    let half_n = n / 2.0;
    let s1 = s_lambda::<f64>(nd, p.lambda1.to_real())?.powf(half_n);
    let s2 = s_lambda::<f64>(nd, p.lambda2.to_real())?.powf(half_n);
    let s0 = sobolev_constant::<f64>(nd)?.powf(half_n);

    let level_first = s1 / n;
    let level_second = s2 / n;
    let upper = (s1 + s2) / n;
    let ladder_second = ladder(level_second, upper);
    let ladder_first = ladder(level_first, upper);
    let hit_rung = |rungs: &[f64]| {
        rungs
            .iter()
            .any(|&l| (l - upper).abs() <= 1e-12 * upper.abs())
    };
    let degenerate = hit_rung(&ladder_second) || hit_rung(&ladder_first);

    Ok(PsReport {
        level_first,
        level_second,
        subcritical_threshold: level_first.min(level_second),
        window_second: (level_second, upper),
        ladder_second,
        window_first: (level_first, upper),
        ladder_first,
        sum_below_uncut_sobolev: s1 + s2 < s0,
        degenerate_window: degenerate,
    })
}

/// One bubble in a train: Hardy parameter, concentration scale, sign,
/// and which component it lands in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct BubbleTrainSpec<S: Scalar> {
    pub lambda: S,
    pub mu: S,
    /// +1 or −1.
    pub sign: i8,
    pub component: Component,
}

/// Synthesizes a pair as a signed sum of dilated bubbles. At scale
/// separations of several orders of magnitude the energy of a k-bubble
/// train approximates the sum of the individual levels, exhibiting the
/// quantized ladder the compactness lemmas exclude.
pub fn bubble_train<S: Scalar>(
    grid: &Arc<RadialGrid<S>>,
    specs: &[BubbleTrainSpec<S>],
) -> Result<StatePair<S>> {
    if specs.is_empty() {
        return Err(Error::InvalidParams(
            "bubble train needs at least one bubble".into(),
        ));
    }
    let mut u = RadialField::zero(grid);
    let mut v = RadialField::zero(grid);
    for spec in specs {
        let sign = match spec.sign {
            1 => S::one(),
            -1 => -S::one(),
            other => {
                return Err(Error::InvalidParams(format!(
                    "bubble sign must be +1 or -1, got {other}"
                )))
            }
        };
        let bubble = sample_bubble(grid, spec.lambda, spec.mu)?;
        match spec.component {
            Component::First => u = u.axpy(sign, &bubble)?,
            Component::Second => v = v.axpy(sign, &bubble)?,
        }
    }
    StatePair::new(u, v)
}

//! Coupled energy functional and its metric gradient.
//!
//! States are pairs `(u, v)` on one grid; the ambient inner product is the
//! product Hardy–Dirichlet metric `⟨·,·⟩_D = ⟨·,·⟩_{λ₁} ⊕ ⟨·,·⟩_{λ₂}`.
//! The functional is
//!
//! ```text
//! J_ν(u, v) = ½ ‖(u,v)‖²_D − (1/2*) ∫ (|u|^{2*} + |v|^{2*}) dV
//!             − ν ∫ h(r) |u|^α |v|^β dV,
//! ```
//!
//! and [`StatePair::gradient`] returns its gradient *in the D metric*:
//! `(u − T₁ f_u, v − T₂ f_v)` with `T_j` the Riesz solve at `λ_j` and
//! `f_u, f_v` the nonlinearity densities. Because the Riesz operator is
//! assembled from exactly the same discrete forms as the energy, finite
//! differences of [`StatePair::j_nu`] along directions vanishing at the
//! truncation radii match the gradient pairing to roundoff, not merely to
//! discretization order.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::grid::{
    coupling_integral, grad_norm_sq, hardy_term, inner_lambda, lp_star_norm, riesz_solve,
    same_grid, RadialField, RadialGrid,
};
use crate::{pow_real, Error, Params, Result, Scalar};

/// Grid-only integrals of a state, computed once per pair.
#[derive(Clone, Copy, Debug)]
pub struct PairIntegrals<S> {
    pub grad_u: S,
    pub hardy_u: S,
    pub lp_u: S,
    pub grad_v: S,
    pub hardy_v: S,
    pub lp_v: S,
}

/// A pair `(u, v)` on a shared grid, with cached parameter-independent
/// integrals. All mutating operations build a fresh pair, so a cache can
/// never go stale.
#[derive(Clone, Debug)]
pub struct StatePair<S: Scalar> {
    u: RadialField<S>,
    v: RadialField<S>,
    cache: OnceLock<PairIntegrals<S>>,
}

impl<S: Scalar> StatePair<S> {
    /// Wraps two fields living on the same grid.
    pub fn new(u: RadialField<S>, v: RadialField<S>) -> Result<Self> {
        if !same_grid(u.grid(), v.grid()) {
            return Err(Error::GridMismatch(
                "state components live on different grids".into(),
            ));
        }
        Ok(StatePair {
            u,
            v,
            cache: OnceLock::new(),
        })
    }

    /// The zero state.
    pub fn zero(grid: &Arc<RadialGrid<S>>) -> Self {
        StatePair {
            u: RadialField::zero(grid),
            v: RadialField::zero(grid),
            cache: OnceLock::new(),
        }
    }

    /// Semi-trivial state `(z, 0)`.
    pub fn semi_trivial_first(z: RadialField<S>) -> Self {
        let zero = RadialField::zero(z.grid());
        StatePair {
            u: z,
            v: zero,
            cache: OnceLock::new(),
        }
    }

    /// Semi-trivial state `(0, z)`.
    pub fn semi_trivial_second(z: RadialField<S>) -> Self {
        let zero = RadialField::zero(z.grid());
        StatePair {
            u: zero,
            v: z,
            cache: OnceLock::new(),
        }
    }

    /// First component.
    pub fn u(&self) -> &RadialField<S> {
        &self.u
    }

    /// Second component.
    pub fn v(&self) -> &RadialField<S> {
        &self.v
    }

    /// Shared grid handle.
    pub fn grid(&self) -> &Arc<RadialGrid<S>> {
        self.u.grid()
    }

    /// Components swapped; pairs with [`Params::swapped`].
    pub fn swapped(&self) -> Self {
        StatePair {
            u: self.v.clone(),
            v: self.u.clone(),
            cache: OnceLock::new(),
        }
    }

    /// `self + c · other`, componentwise.
    pub fn axpy(&self, c: S, other: &Self) -> Result<Self> {
        StatePair::new(self.u.axpy(c, &other.u)?, self.v.axpy(c, &other.v)?)
    }

    /// `c · self`, componentwise.
    pub fn scale(&self, c: S) -> Self {
        StatePair {
            u: self.u.scale(c),
            v: self.v.scale(c),
            cache: OnceLock::new(),
        }
    }

    /// Componentwise positive part.
    pub fn positive_part(&self) -> Self {
        StatePair {
            u: self.u.positive_part(),
            v: self.v.positive_part(),
            cache: OnceLock::new(),
        }
    }

    /// Parameter-independent integrals, computed on first use.
    pub fn integrals(&self) -> &PairIntegrals<S> {
        self.cache.get_or_init(|| PairIntegrals {
            grad_u: grad_norm_sq(&self.u),
            hardy_u: hardy_term(&self.u),
            lp_u: lp_star_norm(&self.u),
            grad_v: grad_norm_sq(&self.v),
            hardy_v: hardy_term(&self.v),
            lp_v: lp_star_norm(&self.v),
        })
    }

    /// `‖(u,v)‖²_D = ‖u‖²_{λ₁} + ‖v‖²_{λ₂}`.
    pub fn norm_d_sq(&self, p: &Params<S>) -> Result<S> {
        check_dims(self.grid(), p)?;
        let c = self.integrals();
        Ok(c.grad_u - p.lambda1 * c.hardy_u + c.grad_v - p.lambda2 * c.hardy_v)
    }

    /// The coupling integral `∫ h |u|^α |v|^β dV`.
    pub fn coupling(&self, p: &Params<S>) -> Result<S> {
        check_dims(self.grid(), p)?;
        coupling_integral(&self.u, &self.v, p)
    }

    /// The energy `J_ν(u, v)`.
    pub fn j_nu(&self, p: &Params<S>) -> Result<S> {
        let half = S::real(0.5);
        let n2 = self.norm_d_sq(p)?;
        let c = self.integrals();
        let ts = self.grid().two_star();
        Ok(half * n2 - (c.lp_u + c.lp_v) / ts - p.nu * self.coupling(p)?)
    }

    /// `∫ u₊^{2*} dV + ∫ v₊^{2*} dV` over the positive parts only.
    pub fn lp_plus_sum(&self) -> S {
        let grid = self.grid();
        let ts = grid.two_star();
        let uu = self.u.values();
        let vv = self.v.values();
        grid.integrate(|i| pow_real(uu[i].max(S::zero()), ts))
            + grid.integrate(|i| pow_real(vv[i].max(S::zero()), ts))
    }

    /// `∫ h u₊^α v₊^β dV` over the positive parts only.
    pub fn coupling_plus(&self, p: &Params<S>) -> Result<S> {
        check_dims(self.grid(), p)?;
        let grid = self.grid();
        let uu = self.u.values();
        let vv = self.v.values();
        Ok(grid.integrate(|i| {
            let a = uu[i].max(S::zero());
            let b = vv[i].max(S::zero());
            if a == S::zero() || b == S::zero() {
                S::zero()
            } else {
                p.h.eval(grid.radii()[i]) * pow_real(a, p.alpha) * pow_real(b, p.beta)
            }
        }))
    }

    /// The positive-part energy: the quadratic term keeps the full fields,
    /// the nonlinear terms see `u₊ = max(u, 0)` and `v₊` only. Negative
    /// excursions then cost Dirichlet energy without any nonlinear gain,
    /// which drives descent iterates toward nonnegative profiles.
    pub fn j_nu_plus(&self, p: &Params<S>) -> Result<S> {
        let half = S::real(0.5);
        let n2 = self.norm_d_sq(p)?;
        let ts = self.grid().two_star();
        Ok(half * n2 - self.lp_plus_sum() / ts - p.nu * self.coupling_plus(p)?)
    }

    /// Nehari functional `Φ_ν = ‖(u,v)‖²_D − ∫(|u|^{2*} + |v|^{2*})
    /// − ν(α+β) ∫ h |u|^α |v|^β`; zero on the Nehari manifold.
    pub fn phi_nu(&self, p: &Params<S>) -> Result<S> {
        let n2 = self.norm_d_sq(p)?;
        let c = self.integrals();
        Ok(n2 - (c.lp_u + c.lp_v) - p.nu * (p.alpha + p.beta) * self.coupling(p)?)
    }

    /// D-metric gradient of `J_ν` (of the positive-part energy when
    /// `positive_part` is set). Errors if the Riesz solve fails.
    pub fn gradient(&self, p: &Params<S>, positive_part: bool) -> Result<Self> {
        check_dims(self.grid(), p)?;
        let f_u = nonlinearity(&self.u, &self.v, p, p.nu * p.alpha, p.alpha, p.beta, positive_part);
        let f_v = nonlinearity(&self.v, &self.u, p, p.nu * p.beta, p.beta, p.alpha, positive_part);
        let tu = riesz_solve(&f_u, p.lambda1)?;
        let tv = riesz_solve(&f_v, p.lambda2)?;
        StatePair::new(self.u.axpy(-S::one(), &tu)?, self.v.axpy(-S::one(), &tv)?)
    }

    /// Scalar diagnostics of this state under `p`, as plain `f64` for
    /// stable serialization. `grad_norm` is left empty; solvers fill it.
    pub fn report(&self, p: &Params<S>) -> Result<EnergyReport> {
        check_dims(self.grid(), p)?;
        let c = self.integrals();
        let grad_u = c.grad_u.to_real();
        let hardy_u = c.hardy_u.to_real();
        let grad_v = c.grad_v.to_real();
        let hardy_v = c.hardy_v.to_real();
        let lp_u = c.lp_u.to_real();
        let lp_v = c.lp_v.to_real();
        let coupling = self.coupling(p)?.to_real();
        let l1 = p.lambda1.to_real();
        let l2 = p.lambda2.to_real();
        let nu = p.nu.to_real();
        let ts = self.grid().two_star().to_real();
        let norm_d_sq = grad_u - l1 * hardy_u + grad_v - l2 * hardy_v;
        // Built from the report's own fields so reconstruction is exact.
        let j_value = 0.5 * norm_d_sq - (lp_u + lp_v) / ts - nu * coupling;
        let nehari_residual =
            norm_d_sq - (lp_u + lp_v) - nu * (p.alpha + p.beta).to_real() * coupling;
        Ok(EnergyReport {
            j_value,
            norm_d_sq,
            grad_u,
            hardy_u,
            grad_v,
            hardy_v,
            lp_u,
            lp_v,
            coupling,
            nehari_residual,
            grad_norm: None,
        })
    }
}

/// D-metric pairing of two states under the same parameters.
pub fn d_inner<S: Scalar>(a: &StatePair<S>, b: &StatePair<S>, p: &Params<S>) -> Result<S> {
    check_dims(a.grid(), p)?;
    Ok(inner_lambda(&a.u, &b.u, p.lambda1)? + inner_lambda(&a.v, &b.v, p.lambda2)?)
}

/// Scalar summary of a state's energy decomposition. Field values are the
/// discrete integrals; `j_value` and `nehari_residual` are recomputable
/// from the other fields exactly:
/// `j = norm_d_sq/2 − (lp_u + lp_v)/2* − ν·coupling`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub j_value: f64,
    pub norm_d_sq: f64,
    pub grad_u: f64,
    pub hardy_u: f64,
    pub grad_v: f64,
    pub hardy_v: f64,
    pub lp_u: f64,
    pub lp_v: f64,
    pub coupling: f64,
    pub nehari_residual: f64,
    pub grad_norm: Option<f64>,
}

fn check_dims<S: Scalar>(grid: &Arc<RadialGrid<S>>, p: &Params<S>) -> Result<()> {
    if p.n_dim != grid.n_dim() {
        return Err(Error::GridMismatch(format!(
            "params dimension {} does not match grid dimension {}",
            p.n_dim,
            grid.n_dim()
        )));
    }
    Ok(())
}

/// Nonlinearity density for one component: with `w` the leading and `q`
/// the partner field, exponents `(e_w, e_q)` and coupling prefactor `cf`,
///
/// ```text
/// f = |w|^{2*−2} w + cf · h(r) |w|^{e_w−2} w |q|^{e_q},
/// ```
///
/// with positive parts replacing `|·|`-powers when `plus` is set. The
/// exponents satisfy `e_w > 1`, so the density vanishes where `w` does and
/// no negative powers of zero arise.
fn nonlinearity<S: Scalar>(
    w: &RadialField<S>,
    q: &RadialField<S>,
    p: &Params<S>,
    cf: S,
    e_w: S,
    e_q: S,
    plus: bool,
) -> RadialField<S> {
    let grid = w.grid();
    let ts = grid.two_star();
    let ww = w.values();
    let qq = q.values();
    let one = S::one();
    let values = (0..grid.len())
        .map(|i| {
            let (a_signed, b_mag) = if plus {
                (ww[i].max(S::zero()), qq[i].max(S::zero()))
            } else {
                (ww[i], qq[i].abs())
            };
            let a_mag = a_signed.abs();
            if a_mag == S::zero() {
                return S::zero();
            }
            let sgn = if a_signed > S::zero() { one } else { -one };
            let mut f = sgn * pow_real(a_mag, ts - one);
            if cf != S::zero() && b_mag > S::zero() {
                f = f + cf
                    * p.h.eval(grid.radii()[i])
                    * sgn
                    * pow_real(a_mag, e_w - one)
                    * pow_real(b_mag, e_q);
            }
            f
        })
        .collect();
    RadialField::new(Arc::clone(grid), values).expect("nonlinearity density is finite")
}

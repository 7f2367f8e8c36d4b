//! Problem data for the coupled system
//! `-Δu - λ₁ u/|x|² = |u|^{2*-2} u + ν α h(|x|) |u|^{α-2} u |v|^β` (and the
//! mirrored equation for `v`) posed radially in dimension `N ≥ 3`.
//!
//! `Λ_N = (N-2)²/4` is the Hardy constant and `2* = 2N/(N-2)` the critical
//! Sobolev exponent; both are derived on demand and never stored. The
//! coupling weight `h` must be positive and bounded, and when the coupling
//! is critical (`α + β = 2*`) it must vanish at zero and at infinity.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Radial coupling weight `h(r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub enum HProfile<S: Scalar> {
    /// `h ≡ c` with `c > 0`. Bounded but does not vanish at the ends, so it
    /// is admissible only for strictly subcritical coupling.
    Constant(S),
    /// `h(r) = c · r^κ / (1 + r^{2κ})` with `c, κ > 0`: peaks at `r = 1`
    /// with value `c/2` and vanishes at zero and infinity.
    BumpRadial { c: S, kappa: S },
    /// Tabulated `(r, h(r))` samples, interpolated linearly in log-radius
    /// and clamped to the end values outside the table. Radii must be
    /// strictly increasing and positive, values nonnegative and bounded.
    Custom(Vec<(S, S)>),
}

impl<S: Scalar> HProfile<S> {
    /// Checks positivity/boundedness; `critical` additionally requires the
    /// profile to vanish at zero and at infinity.
    pub fn validate(&self, critical: bool) -> Result<()> {
        match self {
            HProfile::Constant(c) => {
                if !c.is_finite() || *c <= S::zero() {
                    return Err(Error::InvalidParams(format!(
                        "constant coupling weight must be positive, got {c}"
                    )));
                }
                if critical {
                    return Err(Error::InvalidParams(
                        "critical coupling needs a weight vanishing at zero and infinity; \
                         a constant weight does not"
                            .into(),
                    ));
                }
            }
            HProfile::BumpRadial { c, kappa } => {
                if !c.is_finite() || *c <= S::zero() || !kappa.is_finite() || *kappa <= S::zero() {
                    return Err(Error::InvalidParams(format!(
                        "bump coupling weight needs c > 0 and kappa > 0, got c={c}, kappa={kappa}"
                    )));
                }
            }
            HProfile::Custom(table) => {
                if table.len() < 2 {
                    return Err(Error::InvalidParams(
                        "custom coupling weight needs at least two samples".into(),
                    ));
                }
                let mut max = S::zero();
                for (i, &(r, h)) in table.iter().enumerate() {
                    if !r.is_finite() || r <= S::zero() {
                        return Err(Error::InvalidParams(format!(
                            "custom coupling weight sample {i} has non-positive radius {r}"
                        )));
                    }
                    if i > 0 && r <= table[i - 1].0 {
                        return Err(Error::InvalidParams(
                            "custom coupling weight radii must be strictly increasing".into(),
                        ));
                    }
                    if !h.is_finite() || h < S::zero() {
                        return Err(Error::InvalidParams(format!(
                            "custom coupling weight sample {i} has negative value {h}"
                        )));
                    }
                    max = max.max(h);
                }
                if max <= S::zero() {
                    return Err(Error::InvalidParams(
                        "custom coupling weight vanishes identically".into(),
                    ));
                }
                if critical {
                    let tail = S::real(1e-9) * max;
                    let first = table.first().expect("nonempty").1;
                    let last = table.last().expect("nonempty").1;
                    if first > tail || last > tail {
                        return Err(Error::InvalidParams(
                            "critical coupling needs the tabulated weight to vanish at both \
                             ends of the table"
                                .into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluates the weight at radius `r > 0`.
    pub fn eval(&self, r: S) -> S {
        match self {
            HProfile::Constant(c) => *c,
            HProfile::BumpRadial { c, kappa } => {
                // r^kappa / (1 + r^{2 kappa}) in log-radius for stability:
                // equals (1/2) sech(kappa * ln r).
                let t = *kappa * r.ln();
                *c / (t.exp() + (-t).exp())
            }
            HProfile::Custom(table) => {
                let s = r.ln();
                let first = table.first().expect("validated nonempty");
                let last = table.last().expect("validated nonempty");
                if s <= first.0.ln() {
                    return first.1;
                }
                if s >= last.0.ln() {
                    return last.1;
                }
                let idx = table.partition_point(|&(rk, _)| rk.ln() < s);
                let (r0, h0) = table[idx - 1];
                let (r1, h1) = table[idx];
                let (s0, s1) = (r0.ln(), r1.ln());
                let w = (s - s0) / (s1 - s0);
                h0 + w * (h1 - h0)
            }
        }
    }
}

/// Validated problem data for the coupled system.
///
/// Construct through [`Params::new`]; deserialized values must be passed
/// through [`Params::validate`] before use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct Params<S: Scalar> {
    /// Space dimension `N ≥ 3`.
    pub n_dim: u32,
    /// Hardy parameter of the first component, `0 ≤ λ₁ < Λ_N`.
    pub lambda1: S,
    /// Hardy parameter of the second component, `0 ≤ λ₂ < Λ_N`.
    pub lambda2: S,
    /// Coupling exponent on the first component, `α > 1`.
    pub alpha: S,
    /// Coupling exponent on the second component, `β > 1`.
    pub beta: S,
    /// Coupling strength `ν ≥ 0` (`ν = 0` decouples the system).
    pub nu: S,
    /// Radial coupling weight.
    pub h: HProfile<S>,
}

impl<S: Scalar> Params<S> {
    /// Builds and validates a parameter set.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_dim: u32,
        lambda1: S,
        lambda2: S,
        alpha: S,
        beta: S,
        nu: S,
        h: HProfile<S>,
    ) -> Result<Self> {
        let p = Params {
            n_dim,
            lambda1,
            lambda2,
            alpha,
            beta,
            nu,
            h,
        };
        p.validate()?;
        Ok(p)
    }

    /// Hardy constant `Λ_N = (N-2)²/4` (derived, never stored).
    pub fn lambda_cap(&self) -> S {
        lambda_cap::<S>(self.n_dim)
    }

    /// Critical Sobolev exponent `2* = 2N/(N-2)` (derived, never stored).
    pub fn two_star(&self) -> S {
        two_star::<S>(self.n_dim)
    }

    /// Whether the coupling is critical, `α + β = 2*` (up to roundoff).
    pub fn is_critical(&self) -> bool {
        (self.alpha + self.beta - self.two_star()).abs() <= S::real(1e-12)
    }

    /// Checks every structural hypothesis; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.n_dim < 3 {
            return Err(Error::InvalidParams(format!(
                "dimension must be at least 3, got {}",
                self.n_dim
            )));
        }
        let cap = self.lambda_cap();
        for (name, l) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !l.is_finite() || l < S::zero() || l >= cap {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in [0, {cap}) (the Hardy constant), got {l}"
                )));
            }
        }
        for (name, e) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !e.is_finite() || e <= S::one() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be a finite exponent greater than 1, got {e}"
                )));
            }
        }
        let sum = self.alpha + self.beta;
        let ts = self.two_star();
        if sum > ts + S::real(1e-12) {
            return Err(Error::InvalidParams(format!(
                "alpha + beta = {sum} exceeds the critical exponent {ts}"
            )));
        }
        if !self.nu.is_finite() || self.nu < S::zero() {
            return Err(Error::InvalidParams(format!(
                "coupling strength nu must be nonnegative, got {}",
                self.nu
            )));
        }
        self.h.validate(self.is_critical())
    }

    /// Same parameters with the two components exchanged:
    /// `(λ₁, λ₂, α, β) → (λ₂, λ₁, β, α)`.
    pub fn swapped(&self) -> Self {
        Params {
            n_dim: self.n_dim,
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            alpha: self.beta,
            beta: self.alpha,
            nu: self.nu,
            h: self.h.clone(),
        }
    }
}

/// Hardy constant `Λ_N = (N-2)²/4`.
pub fn lambda_cap<S: Scalar>(n_dim: u32) -> S {
    let nm2 = S::from_u32(n_dim - 2).expect("small dimension");
    nm2 * nm2 / S::real(4.0)
}

/// Critical Sobolev exponent `2* = 2N/(N-2)`.
pub fn two_star<S: Scalar>(n_dim: u32) -> S {
    let n = S::from_u32(n_dim).expect("small dimension");
    let nm2 = S::from_u32(n_dim - 2).expect("small dimension");
    S::real(2.0) * n / nm2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Params<f64> {
        Params::new(
            4,
            0.5,
            0.75,
            1.5,
            1.5,
            0.1,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("valid")
    }

    #[test]
    fn derived_constants() {
        let p = base();
        assert_eq!(p.lambda_cap(), 1.0);
        assert_eq!(p.two_star(), 4.0);
        assert_eq!(lambda_cap::<f64>(3), 0.25);
        assert_eq!(two_star::<f64>(3), 6.0);
        assert_eq!(lambda_cap::<f64>(5), 2.25);
        assert_eq!(two_star::<f64>(5), 10.0 / 3.0);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        let mut p = base();
        p.n_dim = 2;
        assert!(p.validate().is_err());

        let mut p = base();
        p.lambda1 = 1.0; // equals the Hardy constant
        assert!(p.validate().is_err());

        let mut p = base();
        p.lambda2 = -0.1;
        assert!(p.validate().is_err());

        let mut p = base();
        p.alpha = 1.0; // must be strictly greater than 1
        assert!(p.validate().is_err());

        let mut p = base();
        p.alpha = 2.6;
        p.beta = 1.5; // sum 4.1 > 2* = 4
        assert!(p.validate().is_err());

        let mut p = base();
        p.nu = -1e-9;
        assert!(p.validate().is_err());
    }

    #[test]
    fn nu_zero_is_accepted_as_decoupled_mode() {
        let mut p = base();
        p.nu = 0.0;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn critical_coupling_requires_vanishing_weight() {
        // alpha + beta = 4 = 2* in dimension 4.
        let critical = Params::new(4, 0.5, 0.5, 2.0, 2.0, 0.1, HProfile::Constant(1.0));
        assert!(matches!(critical, Err(Error::InvalidParams(_))));

        let ok = Params::new(
            4,
            0.5,
            0.5,
            2.0,
            2.0,
            0.1,
            HProfile::BumpRadial { c: 1.0, kappa: 2.0 },
        );
        assert!(ok.is_ok());

        // Subcritical sum admits a constant weight.
        let sub = Params::new(4, 0.5, 0.5, 1.5, 1.5, 0.1, HProfile::Constant(1.0));
        assert!(sub.is_ok());
    }

    #[test]
    fn bump_profile_peaks_at_one_and_vanishes_at_ends() {
        let h = HProfile::BumpRadial { c: 2.0_f64, kappa: 1.0 };
        assert!((h.eval(1.0) - 1.0).abs() < 1e-15); // c/2 at r = 1
        assert!(h.eval(1e-9) < 1e-8);
        assert!(h.eval(1e9) < 1e-8);
        // symmetric in log-radius
        assert!((h.eval(10.0) - h.eval(0.1)).abs() < 1e-15);
    }

    #[test]
    fn custom_profile_interpolates_in_log_radius() {
        let h = HProfile::Custom(vec![(0.1, 0.0), (1.0, 1.0), (10.0, 0.0)]);
        assert!(h.validate(false).is_ok());
        // halfway in log-radius between 0.1 and 1.0
        let mid = h.eval(10f64.powf(-0.5));
        assert!((mid - 0.5).abs() < 1e-12);
        // clamped outside the table
        assert_eq!(h.eval(1e-3), 0.0);
        assert_eq!(h.eval(1e3), 0.0);
    }

    #[test]
    fn custom_profile_validation_rules() {
        let unsorted = HProfile::Custom(vec![(1.0_f64, 1.0), (0.5, 1.0)]);
        assert!(unsorted.validate(false).is_err());

        let negative = HProfile::Custom(vec![(0.5_f64, -1.0), (1.0, 1.0)]);
        assert!(negative.validate(false).is_err());

        let vanishing_everywhere = HProfile::Custom(vec![(0.5_f64, 0.0), (1.0, 0.0)]);
        assert!(vanishing_everywhere.validate(false).is_err());

        // Admissible for critical coupling only when the ends vanish.
        let open_end = HProfile::Custom(vec![(0.1_f64, 0.0), (1.0, 1.0), (10.0, 0.5)]);
        assert!(open_end.validate(false).is_ok());
        assert!(open_end.validate(true).is_err());
    }

    #[test]
    fn swapped_exchanges_component_data() {
        let p = base();
        let q = p.swapped();
        assert_eq!(q.lambda1, p.lambda2);
        assert_eq!(q.lambda2, p.lambda1);
        assert_eq!(q.alpha, p.beta);
        assert_eq!(q.beta, p.alpha);
        assert_eq!(q.swapped(), p);
    }

    #[test]
    fn params_roundtrip_through_json() {
        let p = base();
        let text = serde_json::to_string(&p).expect("serialize");
        let back: Params<f64> = serde_json::from_str(&text).expect("deserialize");
        assert_eq!(back, p);
        assert!(back.validate().is_ok());
    }
}

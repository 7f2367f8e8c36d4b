//! Nehari manifold operations: the scalar projection, the restricted
//! energy, the second variation along the scaling ray, and the numerical
//! min/saddle classifier for semi-trivial states.
//!
//! The manifold is the zero set of
//! `Φ_ν(u,v) = ‖(u,v)‖²_D − ∫(|u|^{2*} + |v|^{2*}) − ν(α+β) ∫ h|u|^α|v|^β`.
//! For any nonzero pair the ray `t ↦ (tu, tv)` crosses it exactly once at
//! the root of a strictly monotone scalar equation, which [`project`]
//! solves by log-bisection plus a Newton polish. With `positive_part` set
//! the nonlinear terms are evaluated on `(u₊, v₊)` instead, giving the
//! manifold of the positive-part energy.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::analytic::sample_bubble;
use crate::energy::{d_inner, StatePair};
use crate::grid::{inner_lambda, lp_star_norm, riesz_solve, RadialField, RadialGrid};
use crate::{pow_real, Error, Params, Result, Scalar};

/// Which component of a pair carries the nonzero profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    First,
    Second,
}

/// A state on the Nehari manifold, remembering the multiplier that put it
/// there and the constraint residual at the scaled state.
#[derive(Clone, Debug)]
pub struct NehariPoint<S: Scalar> {
    state: StatePair<S>,
    t_star: S,
    phi_residual: S,
    positive_part: bool,
}

impl<S: Scalar> NehariPoint<S> {
    /// The projected state.
    pub fn state(&self) -> &StatePair<S> {
        &self.state
    }

    /// Consumes the point, returning the state.
    pub fn into_state(self) -> StatePair<S> {
        self.state
    }

    /// The scaling multiplier that was applied.
    pub fn t_star(&self) -> S {
        self.t_star
    }

    /// `Φ_ν` evaluated at the projected state (recomputed, not inferred).
    pub fn phi_residual(&self) -> S {
        self.phi_residual
    }

    /// Whether this point lies on the positive-part manifold.
    pub fn positive_part(&self) -> bool {
        self.positive_part
    }
}

/// The three scalars entering the scaling equation, on the manifold
/// matching `plus`.
fn manifold_terms<S: Scalar>(
    s: &StatePair<S>,
    p: &Params<S>,
    plus: bool,
) -> Result<(S, S, S)> {
    let n2 = s.norm_d_sq(p)?;
    let (lp, coup) = if plus {
        (s.lp_plus_sum(), s.coupling_plus(p)?)
    } else {
        let c = s.integrals();
        (c.lp_u + c.lp_v, s.coupling(p)?)
    };
    Ok((n2, lp, coup))
}

fn phi_of<S: Scalar>(s: &StatePair<S>, p: &Params<S>, plus: bool) -> Result<S> {
    let (n2, lp, coup) = manifold_terms(s, p, plus)?;
    Ok(n2 - lp - p.nu * (p.alpha + p.beta) * coup)
}

/// Scales `s` onto the Nehari manifold: finds the unique `t > 0` with
/// `‖(u,v)‖²_D = t^{2*−2} ∫(|u|^{2*}+|v|^{2*}) + ν(α+β) t^{α+β−2} C` and
/// returns `(tu, tv)`. The right side is strictly increasing in `t`
/// (all exponents positive), so the root is unique.
pub fn project<S: Scalar>(
    s: &StatePair<S>,
    p: &Params<S>,
    positive_part: bool,
) -> Result<NehariPoint<S>> {
    let (n2, lp, coup) = manifold_terms(s, p, positive_part)?;
    if !(n2 > S::zero()) {
        return Err(Error::NoRoot(
            "cannot project the zero state onto the Nehari manifold".into(),
        ));
    }
    let cc = p.nu * (p.alpha + p.beta) * coup;
    if lp <= S::zero() && cc <= S::zero() {
        return Err(Error::NoRoot(
            "nonlinear terms vanish, so the scaling equation has no root".into(),
        ));
    }

    let e1 = s.grid().two_star() - S::real(2.0);
    let e2 = p.alpha + p.beta - S::real(2.0);
    let psi = |t: S| pow_real(t, e1) * lp + pow_real(t, e2) * cc;

    // Bracket in log t: ψ is increasing, so a sign change on [1e−8, 1e8]
    // pins the root.
    let mut lo = S::real(1e-8);
    let mut hi = S::real(1e8);
    if psi(lo) - n2 >= S::zero() || psi(hi) - n2 <= S::zero() {
        return Err(Error::Convergence(
            "Nehari scaling root is outside [1e-8, 1e8]".into(),
        ));
    }
    let mut t = (lo * hi).sqrt();
    for _ in 0..90 {
        t = ((lo.ln() + hi.ln()) / S::real(2.0)).exp();
        if psi(t) < n2 {
            lo = t;
        } else {
            hi = t;
        }
        if (hi - lo) <= S::real(1e-13) * t {
            break;
        }
    }
    // Newton polish on ψ(t) − n2, safeguarded inside the bracket.
    for _ in 0..4 {
        let dpsi = e1 * pow_real(t, e1 - S::one()) * lp + e2 * pow_real(t, e2 - S::one()) * cc;
        if dpsi <= S::zero() {
            break;
        }
        let step = (psi(t) - n2) / dpsi;
        let next = t - step;
        if next <= lo || next >= hi {
            break;
        }
        t = next;
    }
    let rel = ((psi(t) - n2) / n2).abs();
    if rel > S::real(1e-11) {
        return Err(Error::Convergence(format!(
            "Nehari scaling root did not converge (relative residual {rel:e})"
        )));
    }

    let state = s.scale(t);
    let phi_residual = phi_of(&state, p, positive_part)?;
    Ok(NehariPoint {
        state,
        t_star: t,
        phi_residual,
        positive_part,
    })
}

/// The energy restricted to the manifold, in the form that makes its
/// positivity manifest:
/// `(1/N) ∫(|u|^{2*}+|v|^{2*}) + ν (α+β−2)/2 · C`.
/// Recomputes the constraint residual and refuses stale points.
pub fn restricted_energy<S: Scalar>(np: &NehariPoint<S>, p: &Params<S>) -> Result<S> {
    let (n2, lp, coup) = manifold_terms(np.state(), p, np.positive_part)?;
    let phi = n2 - lp - p.nu * (p.alpha + p.beta) * coup;
    if phi.abs() > S::real(1e-8) * n2 {
        return Err(Error::StalePoint(format!(
            "state has drifted off the Nehari manifold (|phi| = {:e} vs norm {:e})",
            phi.abs(),
            n2
        )));
    }
    let n = S::from_u32(np.state().grid().n_dim()).expect("small dimension");
    Ok(lp / n + p.nu * (p.alpha + p.beta - S::real(2.0)) / S::real(2.0) * coup)
}

/// Second derivative of `t ↦ J_ν(tu, tv)` at `t = 1` for a manifold
/// point, in the reduced form `(2−α−β)‖(u,v)‖²_D + (α+β−2*)·Σ lp`.
/// Strictly negative under the standing exponent hypotheses, which is
/// what makes the manifold a natural constraint.
pub fn second_variation_along_state<S: Scalar>(
    np: &NehariPoint<S>,
    p: &Params<S>,
) -> Result<S> {
    let (n2, lp, _) = manifold_terms(np.state(), p, np.positive_part)?;
    let ts = np.state().grid().two_star();
    Ok((S::real(2.0) - p.alpha - p.beta) * n2 + (p.alpha + p.beta - ts) * lp)
}

/// Verdict of the semi-trivial classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassifyVerdict {
    LocalMin,
    Saddle,
    Inconclusive,
}

/// One probed direction: the first energy delta that cleared the noise
/// tolerance, or the last one tried.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectionProbe {
    pub label: String,
    pub epsilon: f64,
    pub delta: f64,
    /// −1 energy decrease, +1 increase, 0 below tolerance throughout.
    pub signal: i8,
}

/// Classifier output: verdict plus the per-direction evidence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifyOutcome {
    pub verdict: ClassifyVerdict,
    pub which: Component,
    pub base_level: f64,
    pub tolerance: f64,
    pub probes: Vec<DirectionProbe>,
}

impl ClassifyOutcome {
    /// JSON document with the verdict and per-direction deltas.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("classify outcome serialization")
    }
}

/// Polishes a single-component profile to a critical point of its own
/// scalar functional `w ↦ ½‖w‖²_λ − (1/2*)∫|w|^{2*}` restricted to the
/// single-field Nehari set, by projected gradient descent. Keeping the
/// base exactly critical in the discrete sense removes the O(Δ²) profile
/// residual from the classifier's energy deltas.
pub(crate) fn polish_single_component<S: Scalar>(
    z: &RadialField<S>,
    lambda: S,
    max_iters: usize,
) -> Result<RadialField<S>> {
    let grid = Arc::clone(z.grid());
    let ts = grid.two_star();
    let one = S::one();
    let project_single = |w: &RadialField<S>| -> Result<RadialField<S>> {
        let n2 = inner_lambda(w, w, lambda)?;
        let lp = lp_star_norm(w);
        if !(n2 > S::zero()) || !(lp > S::zero()) {
            return Err(Error::NoRoot(
                "single-component polish lost the profile".into(),
            ));
        }
        let t = pow_real(n2 / lp, one / (ts - S::real(2.0)));
        Ok(w.scale(t))
    };
    let density = |w: &RadialField<S>| {
        let vals = w.values();
        let values: Vec<S> = (0..grid.len())
            .map(|i| {
                let a = vals[i].abs();
                if a == S::zero() {
                    S::zero()
                } else {
                    let sgn = if vals[i] > S::zero() { one } else { -one };
                    sgn * pow_real(a, ts - one)
                }
            })
            .collect();
        RadialField::new(Arc::clone(&grid), values).expect("density finite")
    };

    let tangential = |w: &RadialField<S>| -> Result<(RadialField<S>, S, S)> {
        let g = w.axpy(-one, &riesz_solve(&density(w), lambda)?)?;
        let n2 = inner_lambda(w, w, lambda)?;
        let gw = inner_lambda(&g, w, lambda)?;
        let gt = g.axpy(-(gw / n2), w)?;
        let gt2 = inner_lambda(&gt, &gt, lambda)?;
        Ok((gt, gt2, n2))
    };
    let level = |w: &RadialField<S>| lp_star_norm(w) / S::from_u32(grid.n_dim()).expect("dim");

    // The discrete variational space fixes the two truncation endpoints
    // at zero (riesz_solve is a Dirichlet solve), so the seed must be
    // pinned there too; otherwise `w - T(f)` carries spurious endpoint
    // components that the outer flux weight amplifies into a
    // non-descent direction.
    let zd = {
        let mut values = z.values().to_vec();
        values[0] = S::zero();
        let last = values.len() - 1;
        values[last] = S::zero();
        RadialField::new(Arc::clone(&grid), values)?
    };

    // Barzilai-Borwein steps with a non-monotone (windowed) line search:
    // the discrete dilation valley is nearly flat, and plain descent
    // crawls along it while a spectral step does not.
    let mut w = project_single(&zd)?;
    let (mut gt, mut gt2, mut n2) = tangential(&w)?;
    let mut eta = S::one();
    let mut recent: Vec<S> = vec![level(&w)];
    for _ in 0..max_iters {
        if gt2 <= S::real(1e-18) * n2 {
            return Ok(w);
        }
        let reference = recent
            .iter()
            .copied()
            .fold(S::real(f64::NEG_INFINITY), |a, b| a.max(b));
        let mut accepted = None;
        let mut trial = eta;
        for _ in 0..50 {
            let cand = project_single(&w.axpy(-trial, &gt)?)?;
            let cand_energy = level(&cand);
            if cand_energy <= reference - S::real(1e-6) * trial * gt2 {
                accepted = Some((cand, cand_energy));
                break;
            }
            trial = trial * S::real(0.25);
        }
        let Some((cand, cand_energy)) = accepted else {
            // Flat to rounding along every tested step.
            break;
        };
        let (cand_gt, cand_gt2, cand_n2) = tangential(&cand)?;
        let step_field = cand.axpy(-one, &w)?;
        let y_field = cand_gt.axpy(-one, &gt)?;
        let ss = inner_lambda(&step_field, &step_field, lambda)?;
        let sy = inner_lambda(&step_field, &y_field, lambda)?;
        eta = if sy > S::zero() {
            (ss / sy).max(S::real(1e-4)).min(S::real(1e4))
        } else {
            (trial * S::real(2.0)).min(S::real(1e4))
        };
        w = cand;
        gt = cand_gt;
        gt2 = cand_gt2;
        n2 = cand_n2;
        recent.push(cand_energy);
        if recent.len() > 8 {
            recent.remove(0);
        }
    }
    let rel = (gt2 / n2).sqrt();
    if rel > S::real(1e-8) {
        return Err(Error::Convergence(format!(
            "single-component polish stalled at relative gradient {rel:e}"
        )));
    }
    Ok(w)
}

fn log_bump_field<S: Scalar>(
    grid: &Arc<RadialGrid<S>>,
    center: f64,
    width: f64,
) -> RadialField<S> {
    let values = grid
        .radii()
        .iter()
        .map(|&r| {
            let t = (r.to_real().ln() - center.ln()) / width;
            if t.abs() < 1.0 {
                S::real((1.0 - t * t).powi(3))
            } else {
                S::zero()
            }
        })
        .collect();
    RadialField::new(Arc::clone(grid), values).expect("bump finite")
}

/// Classifies the semi-trivial state built from the `which`-component
/// bubble as a constrained local minimum or saddle: the base profile is
/// polished to a discrete critical point, then `n_directions` tangent
/// perturbations are probed through an ascending ladder of amplitudes,
/// each probe re-projected to the manifold and its restricted energy
/// compared against the base level. Any decrease beyond the noise
/// tolerance is a saddle signal; increases in every direction make a
/// local minimum; anything else is inconclusive.
pub fn classify_semitrivial<S: Scalar>(
    which: Component,
    p: &Params<S>,
    grid: &Arc<RadialGrid<S>>,
    n_directions: usize,
    step: S,
    seed: u64,
) -> Result<ClassifyOutcome> {
    if n_directions == 0 || !(step > S::zero()) {
        return Err(Error::InvalidParams(
            "classifier needs n_directions ≥ 1 and step > 0".into(),
        ));
    }
    let (lam_base, lam_other) = match which {
        Component::First => (p.lambda1, p.lambda2),
        Component::Second => (p.lambda2, p.lambda1),
    };
    let raw = sample_bubble(grid, lam_base, S::one())?;
    let polished = polish_single_component(&raw, lam_base, 500)?;
    let base = match which {
        Component::First => StatePair::semi_trivial_first(polished),
        Component::Second => StatePair::semi_trivial_second(polished),
    };
    let base_np = project(&base, p, false)?;
    let base = base_np.state().clone();
    let level0 = restricted_energy(&base_np, p)?;
    let tol = S::real(1e-8) * level0.abs();
    let base_norm_sq = base.norm_d_sq(p)?;

    // Deterministic destabilizing candidates first: bubbles and decade
    // bumps on the vanishing component; then random mixed bumps.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut directions: Vec<(String, StatePair<S>)> = Vec::new();
    let other_pair = |f: RadialField<S>| match which {
        Component::First => StatePair::semi_trivial_second(f),
        Component::Second => StatePair::semi_trivial_first(f),
    };
    for mu in [0.5, 1.0, 2.0] {
        let b = sample_bubble(grid, lam_other, S::real(mu))?;
        directions.push((format!("other_bubble_mu_{mu}"), other_pair(b)));
    }
    for k in [-2i32, -1, 0, 1, 2] {
        let center = 10f64.powi(k);
        directions.push((
            format!("other_bump_decade_{k}"),
            other_pair(log_bump_field(grid, center, 1.0)),
        ));
    }
    while directions.len() < n_directions {
        let i = directions.len();
        let c1 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let c2 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let w1 = rng.gen_range(0.5..2.0);
        let w2 = rng.gen_range(0.5..2.0);
        let a1 = S::real(rng.gen_range(-1.0..1.0f64));
        let a2 = S::real(rng.gen_range(-1.0..1.0f64));
        let d = StatePair::new(
            log_bump_field(grid, c1, w1).scale(a1),
            log_bump_field(grid, c2, w2).scale(a2),
        )?;
        directions.push((format!("random_{i}"), d));
    }
    directions.truncate(n_directions);

    let mut probes = Vec::with_capacity(directions.len());
    let mut any_negative = false;
    let mut all_positive = true;
    for (label, raw_dir) in directions {
        // D-orthogonalize against the base state, then match its norm.
        let overlap = d_inner(&raw_dir, &base, p)?;
        let d = raw_dir.axpy(-(overlap / base_norm_sq), &base)?;
        let d2 = d.norm_d_sq(p)?;
        if !(d2 > S::zero()) {
            probes.push(DirectionProbe {
                label,
                epsilon: 0.0,
                delta: 0.0,
                signal: 0,
            });
            all_positive = false;
            continue;
        }
        let d = d.scale((base_norm_sq / d2).sqrt());
        let mut signal = 0i8;
        let mut eps_used = 0.0f64;
        let mut delta_used = 0.0f64;
        for j in 0..7 {
            let eps = step * S::real(2f64.powi(j - 6));
            let probe_state = base.axpy(eps, &d)?;
            let level = restricted_energy(&project(&probe_state, p, false)?, p)?;
            let delta = level - level0;
            eps_used = eps.to_real();
            delta_used = delta.to_real();
            if delta.abs() > tol {
                signal = if delta > S::zero() { 1 } else { -1 };
                break;
            }
        }
        if signal < 0 {
            any_negative = true;
        }
        if signal <= 0 {
            all_positive = false;
        }
        probes.push(DirectionProbe {
            label,
            epsilon: eps_used,
            delta: delta_used,
            signal,
        });
    }

    let verdict = if any_negative {
        ClassifyVerdict::Saddle
    } else if all_positive {
        ClassifyVerdict::LocalMin
    } else {
        ClassifyVerdict::Inconclusive
    };
    Ok(ClassifyOutcome {
        verdict,
        which,
        base_level: level0.to_real(),
        tolerance: tol.to_real(),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::s_lambda;
    use crate::grid::build_grid;
    use crate::HProfile;
    use approx::assert_relative_eq;

    fn log_bump(grid: &Arc<RadialGrid<f64>>, center: f64, width: f64) -> RadialField<f64> {
        log_bump_field(grid, center, width)
    }

    fn params_n4() -> Params<f64> {
        Params::new(
            4,
            0.3,
            0.6,
            2.0,
            2.0,
            0.3,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params")
    }

    fn random_pair(
        grid: &Arc<RadialGrid<f64>>,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> StatePair<f64> {
        let c1 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let c2 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let u = log_bump(grid, c1, rng.gen_range(1.0..3.0)).scale(rng.gen_range(0.2..3.0));
        let v = log_bump(grid, c2, rng.gen_range(1.0..3.0)).scale(rng.gen_range(0.2..3.0));
        StatePair::new(u, v).expect("pair")
    }

    #[test]
    fn projection_lands_on_manifold() {
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        let p = params_n4();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_pair(&g, &mut rng);
            let np = project(&s, &p, false).expect("project");
            let n2 = np.state().norm_d_sq(&p).expect("norm");
            assert!(n2 > 0.0);
            assert!(
                np.phi_residual().abs() <= 1e-10 * n2,
                "residual {} too large vs norm {}",
                np.phi_residual(),
                n2
            );
        }
    }

    #[test]
    fn projection_is_idempotent_and_scale_invariant() {
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        let p = params_n4();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let s = random_pair(&g, &mut rng);
            let np = project(&s, &p, false).expect("project");
            let again = project(np.state(), &p, false).expect("re-project");
            assert_relative_eq!(again.t_star(), 1.0, max_relative = 1e-8);
            let reference = np.state().u().values().to_vec();
            for c in [0.1f64, 10.0] {
                let scaled = project(&s.scale(c), &p, false).expect("project scaled");
                assert_relative_eq!(scaled.t_star() * c, np.t_star(), max_relative = 1e-8);
                for (a, b) in scaled.state().u().values().iter().zip(&reference) {
                    assert!(
                        (a - b).abs() <= 1e-8 * np.state().u().max_abs(),
                        "scale invariance violated"
                    );
                }
            }
        }
    }

    #[test]
    fn projection_rejects_zero_state() {
        let g = build_grid::<f64>(4, 1e-6, 1e6, 128).expect("grid");
        let p = params_n4();
        let s = StatePair::zero(&g);
        assert!(matches!(project(&s, &p, false), Err(Error::NoRoot(_))));
    }

    #[test]
    fn decoupled_single_component_projection_has_closed_form() {
        // ν=0, s = (c·w, 0): t^{2*−2} = ‖w‖²/(c^{2*−2}∫|w|^{2*}) scaled, so
        // projecting c·w relates to projecting w by t(c) = t(1)/c.
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        let p = Params::new(
            4,
            0.3,
            0.6,
            2.0,
            2.0,
            0.0,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params");
        let w = log_bump(&g, 1.0, 2.0);
        let s1 = StatePair::semi_trivial_first(w.clone());
        let t1 = project(&s1, &p, false).expect("project").t_star();
        for c in [0.5f64, 2.0, 7.0] {
            let sc = StatePair::semi_trivial_first(w.scale(c));
            let tc = project(&sc, &p, false).expect("project").t_star();
            assert_relative_eq!(tc, t1 / c, max_relative = 1e-10);
        }
        // Direct closed form: t = (‖w‖²_λ / ∫|w|^{2*})^{1/(2*−2)}.
        let n2 = inner_lambda(&w, &w, p.lambda1).expect("norm");
        let lp = lp_star_norm(&w);
        assert_relative_eq!(t1, (n2 / lp).powf(1.0 / (g.two_star() - 2.0)), max_relative = 1e-10);
    }

    #[test]
    fn restricted_energy_agrees_with_j_nu_on_manifold() {
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        let p = params_n4();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let np = project(&random_pair(&g, &mut rng), &p, false).expect("project");
            let restricted = restricted_energy(&np, &p).expect("restricted");
            let direct = np.state().j_nu(&p).expect("j");
            assert_relative_eq!(restricted, direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn restricted_energy_rejects_stale_points() {
        let g = build_grid::<f64>(4, 1e-6, 1e6, 256).expect("grid");
        let p = params_n4();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let np = project(&random_pair(&g, &mut rng), &p, false).expect("project");
        let mut stale = np.clone();
        stale.state = np.state().scale(1.5);
        assert!(matches!(
            restricted_energy(&stale, &p),
            Err(Error::StalePoint(_))
        ));
    }

    #[test]
    fn restricted_coercivity_bound() {
        // restricted ≥ (1/2 − 1/(α+β))·norm_D_sq on the manifold.
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        let p = params_n4();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let mut floor: f64 = f64::INFINITY;
        for _ in 0..30 {
            let np = project(&random_pair(&g, &mut rng), &p, false).expect("project");
            let e = restricted_energy(&np, &p).expect("restricted");
            let n2 = np.state().norm_d_sq(&p).expect("norm");
            assert!(
                e >= (0.5 - 1.0 / (p.alpha + p.beta)) * n2 * (1.0 - 1e-12),
                "coercivity violated: {e} < bound for norm {n2}"
            );
            floor = floor.min(n2);
        }
        // Away-from-origin: empirical floor is strictly positive.
        assert!(floor > 0.0);
        println!("empirical norm_D_sq floor over 30 projected pairs: {floor:.6e}");
    }

    #[test]
    fn second_variation_negative_and_matches_finite_differences() {
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        // Subcritical coupling exponents to exercise both terms.
        let p = Params::new(
            4,
            0.3,
            0.6,
            1.7,
            1.9,
            0.4,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        for _ in 0..10 {
            let np = project(&random_pair(&g, &mut rng), &p, false).expect("project");
            let sv = second_variation_along_state(&np, &p).expect("second variation");
            assert!(sv < 0.0, "ray second variation must be negative, got {sv}");
            // FD oracle: second difference of t ↦ J(t·state) at t=1.
            let h = 1e-4;
            let j = |t: f64| np.state().scale(t).j_nu(&p).expect("j");
            let fd = (j(1.0 + h) - 2.0 * j(1.0) + j(1.0 - h)) / (h * h);
            assert_relative_eq!(sv, fd, max_relative = 1e-3);
        }
    }

    #[test]
    fn second_variation_critical_case_reduces_to_norm_term() {
        // α+β = 2*: the lp term drops out, value = (2−2*)‖·‖².
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        let p = params_n4();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        let np = project(&random_pair(&g, &mut rng), &p, false).expect("project");
        let sv = second_variation_along_state(&np, &p).expect("second variation");
        let n2 = np.state().norm_d_sq(&p).expect("norm");
        assert_relative_eq!(sv, (2.0 - g.two_star()) * n2, max_relative = 1e-10);
        assert!(sv < 0.0);
    }

    #[test]
    fn semi_trivial_level_matches_closed_form() {
        // (z^{λ1}, 0) projected: restricted energy = (1/N) S(λ1)^{N/2}.
        let g = build_grid::<f64>(4, 1e-6, 1e6, 2048).expect("grid");
        let cap = 1.0; // Λ₄
        let lam = 0.1 * cap;
        let p = Params::new(
            4,
            lam,
            0.2,
            2.0,
            2.0,
            0.25,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params");
        let z = sample_bubble(&g, lam, 1.0).expect("bubble");
        let np = project(&StatePair::semi_trivial_first(z), &p, false).expect("project");
        let level = restricted_energy(&np, &p).expect("restricted");
        let exact = s_lambda::<f64>(4, lam).expect("s_lambda").powf(2.0) / 4.0;
        assert_relative_eq!(level, exact, max_relative = 1e-3);
    }

    #[test]
    fn positive_part_projection_uses_plus_integrals() {
        let g = build_grid::<f64>(4, 1e-6, 1e6, 512).expect("grid");
        let p = params_n4();
        // A pair with a negative stretch: plus and plain projections land
        // at different multipliers, and each satisfies its own residual.
        let u = log_bump(&g, 1.0, 2.0).axpy(-0.8, &log_bump(&g, 40.0, 1.0)).expect("u");
        let v = log_bump(&g, 2.0, 1.5);
        let s = StatePair::new(u, v).expect("pair");
        let plain = project(&s, &p, false).expect("plain");
        let plus = project(&s, &p, true).expect("plus");
        assert!(plus.positive_part());
        assert!((plain.t_star() - plus.t_star()).abs() > 1e-6);
        let n2 = plus.state().norm_d_sq(&p).expect("norm");
        assert!(plus.phi_residual().abs() <= 1e-10 * n2);
        // For nonnegative pairs the two projections coincide.
        let s_pos = s.positive_part();
        let a = project(&s_pos, &p, false).expect("plain");
        let b = project(&s_pos, &p, true).expect("plus");
        assert_relative_eq!(a.t_star(), b.t_star(), max_relative = 1e-12);
    }

    #[test]
    fn classifier_finds_local_minimum_when_both_exponents_exceed_two() {
        // N=3, α=β=2.5 (α+β=5 < 2*=6), small ν: both semi-trivial states
        // are constrained local minima.
        let cap3 = 0.25;
        let p = Params::new(
            3,
            0.5 * cap3,
            0.5 * cap3,
            2.5,
            2.5,
            1e-3,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params");
        let g = build_grid::<f64>(3, 1e-6, 1e6, 1024).expect("grid");
        for which in [Component::First, Component::Second] {
            let out = classify_semitrivial(which, &p, &g, 12, 0.1, 97).expect("classify");
            assert_eq!(
                out.verdict,
                ClassifyVerdict::LocalMin,
                "expected LocalMin, got {:?} with probes {:#?}",
                out.verdict,
                out.probes
            );
        }
    }

    #[test]
    fn classifier_finds_saddle_when_an_exponent_is_below_two() {
        // α=1.5 < 2: perturbing the vanishing first component off
        // (0, z^{λ2}) gains a coupling term of order ε^α against a
        // quadratic cost of order ε², so the restricted energy drops.
        // ν is chosen so the crossover scale sits above the probe ladder.
        let cap3 = 0.25;
        let p = Params::new(
            3,
            0.5 * cap3,
            0.5 * cap3,
            1.5,
            2.5,
            0.5,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params");
        let g = build_grid::<f64>(3, 1e-6, 1e6, 1024).expect("grid");
        let out = classify_semitrivial(Component::Second, &p, &g, 12, 0.1, 97).expect("classify");
        assert_eq!(out.verdict, ClassifyVerdict::Saddle);
        // Mirrored: β < 2 destabilizes (z^{λ1}, 0).
        let p_mirror = Params::new(
            3,
            0.5 * cap3,
            0.5 * cap3,
            2.5,
            1.5,
            0.5,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params");
        let out =
            classify_semitrivial(Component::First, &p_mirror, &g, 12, 0.1, 97).expect("classify");
        assert_eq!(out.verdict, ClassifyVerdict::Saddle);
    }

    #[test]
    fn classifier_emits_json_with_per_direction_deltas() {
        let cap3 = 0.25;
        let p = Params::new(
            3,
            0.5 * cap3,
            0.5 * cap3,
            2.5,
            2.5,
            1e-3,
            HProfile::BumpRadial { c: 1.0, kappa: 1.0 },
        )
        .expect("params");
        let g = build_grid::<f64>(3, 1e-6, 1e6, 512).expect("grid");
        let out = classify_semitrivial(Component::First, &p, &g, 10, 0.1, 5).expect("classify");
        let text = out.to_json();
        let back: ClassifyOutcome = serde_json::from_str(&text).expect("parse");
        assert_eq!(back.probes.len(), out.probes.len());
        assert!(text.contains("\"verdict\""));
        assert!(text.contains("\"delta\""));
        assert!(out.probes.iter().any(|pr| pr.label.contains("other_bubble")));
    }
}

//! Ground-state search by Nehari-constrained descent and bound-state
//! search by a mountain-pass path algorithm between the two semi-trivial
//! bubbles.
//!
//! Descent works on the manifold: compute the Sobolev gradient, take a
//! spectral (Barzilai-Borwein) trial step, clip to nonnegative values
//! when requested, re-project with [`project`], and accept by monotone
//! Armijo backtracking on the restricted energy. All iterates live in the
//! Dirichlet subspace (both truncation endpoints pinned to zero), so seed
//! endpoint values are dropped on entry.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{s_lambda, sample_bubble};
use crate::energy::{d_inner, StatePair};
use crate::grid::{norm_lambda_sq, RadialField, RadialGrid};
use crate::nehari::{polish_single_component, project, restricted_energy, NehariPoint};
use crate::{pow_real, Error, Params, Result, Scalar};

/// Configuration for Nehari-constrained descent.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct DescentConfig<S: Scalar> {
    /// Iteration budget.
    pub max_iters: usize,
    /// First trial step length in the Sobolev-gradient metric.
    pub step0: S,
    /// Armijo sufficient-decrease fraction, in (0, 1).
    pub armijo_c: S,
    /// Termination threshold on the tangential gradient norm.
    pub grad_tol: S,
    /// Clip iterates to their positive parts before re-projection and
    /// work on the positive-part manifold.
    pub positive_part: bool,
}

impl<S: Scalar> DescentConfig<S> {
    /// Standard defaults: unit first step, classic Armijo fraction.
    pub fn with_tolerance(grad_tol: S) -> Self {
        DescentConfig {
            max_iters: 3000,
            step0: S::one(),
            armijo_c: S::real(1e-4),
            grad_tol,
            positive_part: true,
        }
    }

    /// Checks the structural constraints on the fields.
    pub fn validate(&self) -> Result<()> {
        if !(self.step0 > S::zero()) || !self.step0.is_finite() {
            return Err(Error::InvalidParams(format!(
                "descent step0 must be positive, got {}",
                self.step0
            )));
        }
        if !(self.armijo_c > S::zero()) || !(self.armijo_c < S::one()) {
            return Err(Error::InvalidParams(format!(
                "armijo_c must lie in (0, 1), got {}",
                self.armijo_c
            )));
        }
        if !(self.grad_tol > S::zero()) {
            return Err(Error::InvalidParams(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

/// Configuration for the mountain-pass path algorithm.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Serialize",
    deserialize = "S: serde::de::DeserializeOwned"
))]
pub struct MountainPassConfig<S: Scalar> {
    /// Number of path nodes including the two anchors; at least 8.
    pub path_points: usize,
    /// Relaxation sweep budget.
    pub max_sweeps: usize,
    /// Gradient steps applied to each interior node per sweep.
    pub descent_per_sweep: usize,
    /// Peak level is considered stable when consecutive sweeps agree
    /// within this tolerance.
    pub level_tol: S,
    /// Gradient norm target for the climbing refinement of the peak.
    pub grad_tol: S,
}

impl<S: Scalar> MountainPassConfig<S> {
    /// Defaults matching the classic path algorithm.
    pub fn with_tolerance(level_tol: S, grad_tol: S) -> Self {
        MountainPassConfig {
            path_points: 17,
            max_sweeps: 200,
            descent_per_sweep: 3,
            level_tol,
            grad_tol,
        }
    }

    /// Checks the structural constraints on the fields.
    pub fn validate(&self) -> Result<()> {
        if self.path_points < 8 {
            return Err(Error::InvalidParams(format!(
                "mountain pass needs at least 8 path points, got {}",
                self.path_points
            )));
        }
        if self.max_sweeps == 0 || self.descent_per_sweep == 0 {
            return Err(Error::InvalidParams(
                "mountain pass sweep counts must be positive".into(),
            ));
        }
        if !(self.level_tol > S::zero()) || !(self.grad_tol > S::zero()) {
            return Err(Error::InvalidParams(
                "mountain pass tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// How a solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// Converged with both components carrying mass: a candidate ground
    /// state (or at least a nontrivial constrained critical point).
    GroundCandidate,
    /// Converged at a mountain-pass saddle.
    BoundCandidate,
    /// Converged with one component's share of the norm below 10⁻⁴:
    /// the iteration collapsed onto a semi-trivial state.
    SemiTrivialLimit,
    /// Ran out of budget or the line search found no decrease.
    Diverged,
}

/// One history row: `(iteration, energy, grad_norm)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

/// Outcome of a descent or mountain-pass run.
#[derive(Clone, Debug)]
pub struct SolveResult<S: Scalar> {
    /// Final manifold point.
    pub state: NehariPoint<S>,
    /// Restricted energy at the final point.
    pub energy: S,
    /// Tangential gradient norm at the final point.
    pub grad_norm: S,
    /// Iterations actually taken.
    pub iterations: usize,
    /// Per-iterate `(iteration, energy, grad_norm)` trace.
    pub history: Vec<HistoryEntry>,
    /// Verdict.
    pub classification: Classification,
}

/// Pins both truncation endpoints of a field to zero.
fn dirichlet_field<S: Scalar>(f: &RadialField<S>) -> Result<RadialField<S>> {
    let mut values = f.values().to_vec();
    values[0] = S::zero();
    let last = values.len() - 1;
    values[last] = S::zero();
    RadialField::new(Arc::clone(f.grid()), values)
}

fn dirichlet_pair<S: Scalar>(s: &StatePair<S>) -> Result<StatePair<S>> {
    StatePair::new(dirichlet_field(s.u())?, dirichlet_field(s.v())?)
}

/// Sobolev gradient projected onto the manifold tangent (the component
/// along the state vanishes on the manifold up to roundoff, but removing
/// it explicitly keeps long runs well conditioned).
fn tangential_gradient<S: Scalar>(
    w: &StatePair<S>,
    p: &Params<S>,
    plus: bool,
) -> Result<(StatePair<S>, S)> {
    let g = w.gradient(p, plus)?;
    let n2 = w.norm_d_sq(p)?;
    let gw = d_inner(&g, w, p)?;
    let gt = g.axpy(-(gw / n2), w)?;
    let gt2 = d_inner(&gt, &gt, p)?;
    Ok((gt, gt2))
}

/// Relative share of the total norm carried by each component.
fn component_shares<S: Scalar>(w: &StatePair<S>, p: &Params<S>) -> (S, S) {
    let a = norm_lambda_sq(w.u(), p.lambda1);
    let b = norm_lambda_sq(w.v(), p.lambda2);
    let tot = a + b;
    if tot <= S::zero() {
        return (S::zero(), S::zero());
    }
    ((a / tot).sqrt(), (b / tot).sqrt())
}

fn converged_classification<S: Scalar>(w: &StatePair<S>, p: &Params<S>) -> Classification {
    let (su, sv) = component_shares(w, p);
    if su.min(sv) <= S::real(1e-4) {
        Classification::SemiTrivialLimit
    } else {
        Classification::GroundCandidate
    }
}

/// Minimizes the restricted energy over the Nehari manifold by projected
/// Sobolev-gradient descent from `init`. The energy history is
/// non-increasing; termination is by `grad_tol`, `max_iters`, or a line
/// search that finds no decrease in 50 consecutive backtracked steps
/// (classified [`Classification::Diverged`]).
pub fn minimize_on_nehari<S: Scalar>(
    init: &StatePair<S>,
    p: &Params<S>,
    cfg: &DescentConfig<S>,
) -> Result<SolveResult<S>> {
    cfg.validate()?;
    let seed = dirichlet_pair(init)?;
    let seed = if cfg.positive_part {
        seed.positive_part()
    } else {
        seed
    };
    let mut point = project(&seed, p, cfg.positive_part)?;
    let mut energy = restricted_energy(&point, p)?;
    let mut history: Vec<HistoryEntry> = Vec::new();
    let mut eta = cfg.step0;
    let mut previous: Option<(StatePair<S>, StatePair<S>)> = None;
    let mut iterations = 0usize;

    loop {
        let w = point.state().clone();
        let (gt, gt2) = tangential_gradient(&w, p, cfg.positive_part)?;
        let grad_norm = gt2.sqrt();
        history.push(HistoryEntry {
            iteration: iterations,
            energy: energy.to_real(),
            grad_norm: grad_norm.to_real(),
        });
        if grad_norm <= cfg.grad_tol {
            let classification = converged_classification(&w, p);
            return Ok(SolveResult {
                state: point,
                energy,
                grad_norm,
                iterations,
                history,
                classification,
            });
        }
        if iterations >= cfg.max_iters {
            return Ok(SolveResult {
                state: point,
                energy,
                grad_norm,
                iterations,
                history,
                classification: Classification::Diverged,
            });
        }

        // Spectral trial step from the previous displacement.
        if let Some((pw, pg)) = &previous {
            let s = w.axpy(-S::one(), pw)?;
            let y = gt.axpy(-S::one(), pg)?;
            let ss = d_inner(&s, &s, p)?;
            let sy = d_inner(&s, &y, p)?;
            if sy > S::zero() && ss > S::zero() {
                eta = (ss / sy).max(S::real(1e-4)).min(S::real(1e4));
            }
        }

        let mut accepted = None;
        let mut trial = eta;
        for _ in 0..50 {
            let stepped = w.axpy(-trial, &gt)?;
            let stepped = if cfg.positive_part {
                stepped.positive_part()
            } else {
                stepped
            };
            if let Ok(cand) = project(&stepped, p, cfg.positive_part) {
                let cand_energy = restricted_energy(&cand, p)?;
                if cand_energy <= energy - cfg.armijo_c * trial * gt2 {
                    accepted = Some((cand, cand_energy));
                    break;
                }
            }
            trial = trial * S::real(0.5);
        }
        let Some((cand, cand_energy)) = accepted else {
            return Ok(SolveResult {
                state: point,
                energy,
                grad_norm,
                iterations,
                history,
                classification: Classification::Diverged,
            });
        };
        previous = Some((w, gt));
        point = cand;
        energy = cand_energy;
        iterations += 1;
    }
}

/// Which separability alternative the parameters satisfy: `I` when the
/// first component's Hardy parameter is the smaller one and the level
/// ordering holds (`α ≥ 2`, `λ₂ > λ₁`,
/// `(Λ_N−λ₂)/(Λ_N−λ₁) > 2^{−2/(N−1)}`), `II` for the mirrored condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alternative {
    I,
    II,
}

/// Tests the level-ordering condition that makes the mountain-pass
/// window nonempty.
pub fn separability_check<S: Scalar>(p: &Params<S>) -> Option<Alternative> {
    let cap = p.lambda_cap();
    let n = S::from_u32(p.n_dim).expect("small dimension");
    let threshold = pow_real(S::real(2.0), -S::real(2.0) / (n - S::one()));
    let two = S::real(2.0);
    if p.alpha >= two && p.lambda2 > p.lambda1 && (cap - p.lambda2) / (cap - p.lambda1) > threshold
    {
        return Some(Alternative::I);
    }
    if p.beta >= two && p.lambda1 > p.lambda2 && (cap - p.lambda1) / (cap - p.lambda2) > threshold {
        return Some(Alternative::II);
    }
    None
}

/// Uniformly reparametrizes a path by cumulative length in the ambient
/// metric, interpolating linearly between nodes and re-projecting; the
/// anchors stay fixed. Keeps nodes from sliding down into the wells.
fn reparametrize<S: Scalar>(
    path: &[NehariPoint<S>],
    p: &Params<S>,
) -> Result<Vec<NehariPoint<S>>> {
    let m = path.len();
    let mut cumulative = vec![S::zero(); m];
    for i in 1..m {
        let diff = path[i].state().axpy(-S::one(), path[i - 1].state())?;
        cumulative[i] = cumulative[i - 1] + d_inner(&diff, &diff, p)?.sqrt();
    }
    let total = cumulative[m - 1];
    if !(total > S::zero()) {
        return Ok(path.to_vec());
    }
    let mut out = Vec::with_capacity(m);
    out.push(path[0].clone());
    let mf = S::from_usize(m - 1).expect("path length");
    for i in 1..m - 1 {
        let target = total * S::from_usize(i).expect("index") / mf;
        let j = cumulative.partition_point(|&c| c < target).clamp(1, m - 1);
        let seg = cumulative[j] - cumulative[j - 1];
        let a = if seg > S::zero() {
            (target - cumulative[j - 1]) / seg
        } else {
            S::zero()
        };
        let blended = path[j - 1]
            .state()
            .scale(S::one() - a)
            .axpy(a, path[j].state())?;
        out.push(project(&blended, p, true)?);
    }
    out.push(path[m - 1].clone());
    Ok(out)
}

/// A few monotone Armijo steps on one path node.
fn relax_node<S: Scalar>(
    node: &NehariPoint<S>,
    p: &Params<S>,
    steps: usize,
    armijo_c: S,
) -> Result<NehariPoint<S>> {
    let mut point = node.clone();
    let mut energy = restricted_energy(&point, p)?;
    for _ in 0..steps {
        let w = point.state().clone();
        let (gt, gt2) = tangential_gradient(&w, p, true)?;
        if !(gt2 > S::zero()) {
            break;
        }
        let mut trial = S::one();
        let mut moved = false;
        for _ in 0..30 {
            let stepped = w.axpy(-trial, &gt)?.positive_part();
            if let Ok(cand) = project(&stepped, p, true) {
                let cand_energy = restricted_energy(&cand, p)?;
                if cand_energy <= energy - armijo_c * trial * gt2 {
                    point = cand;
                    energy = cand_energy;
                    moved = true;
                    break;
                }
            }
            trial = trial * S::real(0.5);
        }
        if !moved {
            break;
        }
    }
    Ok(point)
}

/// Runs the mountain-pass path algorithm between the two semi-trivial
/// bubbles: initializes `ψ(t) = (√(1−t)·z^{λ1}, √t·z^{λ2})` at
/// `path_points` parameter values, projects every node to the
/// positive-part manifold, relaxes interior nodes downhill sweep by sweep
/// with uniform reparametrization, and finally refines the stabilized
/// peak by a climbing iteration that ascends along the path tangent and
/// descends transversally. Errors with a geometry violation when the
/// initial interior peak does not rise above the larger semi-trivial
/// level, or when the parameters fail [`separability_check`].
pub fn mountain_pass<S: Scalar>(
    p: &Params<S>,
    grid: &Arc<RadialGrid<S>>,
    cfg: &MountainPassConfig<S>,
) -> Result<SolveResult<S>> {
    cfg.validate()?;
    if separability_check(p).is_none() {
        return Err(Error::Geometry(
            "parameters fail the separability condition, so the two semi-trivial \
             levels are not ordered and the mountain-pass window may be empty"
                .into(),
        ));
    }
    let n = S::from_u32(p.n_dim).expect("small dimension");
    let level1 = pow_real(s_lambda::<S>(p.n_dim, p.lambda1)?, n / S::real(2.0)) / n;
    let level2 = pow_real(s_lambda::<S>(p.n_dim, p.lambda2)?, n / S::real(2.0)) / n;
    let barrier = level1.max(level2);

    let z1 = polish_single_component(&sample_bubble(grid, p.lambda1, S::one())?, p.lambda1, 500)?;
    let z2 = polish_single_component(&sample_bubble(grid, p.lambda2, S::one())?, p.lambda2, 500)?;

    let m = cfg.path_points;
    let mf = S::from_usize(m - 1).expect("path length");
    let mut path: Vec<NehariPoint<S>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let t = S::from_usize(i).expect("index") / mf;
            let pair = StatePair::new(
                z1.scale((S::one() - t).sqrt()),
                z2.scale(t.sqrt()),
            )?;
            project(&pair, p, true)
        })
        .collect::<Result<Vec<_>>>()?;

    let levels = |path: &[NehariPoint<S>]| -> Result<Vec<S>> {
        path.iter().map(|q| restricted_energy(q, p)).collect()
    };
    let initial_levels = levels(&path)?;
    let initial_peak = initial_levels[1..m - 1]
        .iter()
        .copied()
        .fold(S::real(f64::NEG_INFINITY), |a, b| a.max(b));
    if initial_peak <= barrier {
        return Err(Error::Geometry(format!(
            "initial path peak {initial_peak:e} does not rise above the larger \
             semi-trivial level {barrier:e}; the parameters are outside the \
             mountain-pass regime"
        )));
    }

    let armijo_c = S::real(1e-4);
    let mut history: Vec<HistoryEntry> = Vec::new();
    let mut previous_peak: Option<S> = None;
    let mut sweeps = 0usize;
    for sweep in 0..cfg.max_sweeps {
        sweeps = sweep + 1;
        let relaxed: Vec<NehariPoint<S>> = path[1..m - 1]
            .par_iter()
            .map(|node| relax_node(node, p, cfg.descent_per_sweep, armijo_c))
            .collect::<Result<Vec<_>>>()?;
        for (i, node) in relaxed.into_iter().enumerate() {
            path[i + 1] = node;
        }
        path = reparametrize(&path, p)?;
        let lv = levels(&path)?;
        let (peak_idx, peak) = lv
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite levels"))
            .expect("nonempty path");
        let (_, gt2) = tangential_gradient(path[peak_idx].state(), p, true)?;
        history.push(HistoryEntry {
            iteration: sweep,
            energy: peak.to_real(),
            grad_norm: gt2.sqrt().to_real(),
        });
        if let Some(prev) = previous_peak {
            if (peak - prev).abs() <= cfg.level_tol {
                break;
            }
        }
        previous_peak = Some(peak);
    }

    // Climbing refinement: ascend along the path tangent, descend in the
    // transversal directions, accepting steps that shrink the gradient.
    let lv = levels(&path)?;
    let (peak_idx, _) = lv
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite levels"))
        .expect("nonempty path");
    if peak_idx == 0 || peak_idx == m - 1 {
        return Err(Error::Geometry(
            "the relaxed path peaks at an anchor, so there is no interior \
             mountain ridge to refine"
                .into(),
        ));
    }
    let tau_raw = path[peak_idx + 1]
        .state()
        .axpy(-S::one(), path[peak_idx - 1].state())?;
    let tau_norm = d_inner(&tau_raw, &tau_raw, p)?.sqrt();
    let tau = tau_raw.scale(S::one() / tau_norm);

    let mut point = path[peak_idx].clone();
    let (mut gt, mut gt2) = tangential_gradient(point.state(), p, true)?;
    let mut climb_iters = 0usize;
    let mut eta = S::one();
    for k in 0..400 {
        if gt2.sqrt() <= cfg.grad_tol {
            break;
        }
        let overlap = d_inner(&gt, &tau, p)?;
        let direction = gt.axpy(-S::real(2.0) * overlap, &tau)?;
        let mut trial = eta;
        let mut accepted = false;
        for _ in 0..40 {
            let stepped = point.state().axpy(-trial, &direction)?.positive_part();
            if let Ok(cand) = project(&stepped, p, true) {
                let (cgt, cgt2) = tangential_gradient(cand.state(), p, true)?;
                if cgt2 < gt2 {
                    point = cand;
                    gt = cgt;
                    gt2 = cgt2;
                    eta = (trial * S::real(1.5)).min(S::real(1e3));
                    accepted = true;
                    break;
                }
            }
            trial = trial * S::real(0.5);
        }
        climb_iters = k + 1;
        let energy_now = restricted_energy(&point, p)?;
        history.push(HistoryEntry {
            iteration: sweeps + k,
            energy: energy_now.to_real(),
            grad_norm: gt2.sqrt().to_real(),
        });
        if !accepted {
            break;
        }
    }

    let energy = restricted_energy(&point, p)?;
    let grad_norm = gt2.sqrt();
    let classification = if grad_norm <= cfg.grad_tol {
        Classification::BoundCandidate
    } else {
        Classification::Diverged
    };
    Ok(SolveResult {
        state: point,
        energy,
        grad_norm,
        iterations: sweeps + climb_iters,
        history,
        classification,
    })
}

/// Summary of one start of the multi-start experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StartOutcome {
    pub label: String,
    pub classification: Classification,
    /// Restricted energy at the final point; NaN when the start errored.
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Multi-start report: winner plus the evidence for the comparison
/// against the two semi-trivial levels.
#[derive(Debug)]
pub struct GroundStateReport<S: Scalar> {
    /// Best converged run, if any start converged.
    pub winner: Option<SolveResult<S>>,
    /// Index into `outcomes` of the winner.
    pub winner_index: Option<usize>,
    /// Per-start summaries in start order.
    pub outcomes: Vec<StartOutcome>,
    /// Closed-form semi-trivial levels `(1/N)·S(λ₁)^{N/2}`, `(1/N)·S(λ₂)^{N/2}`.
    pub semi_trivial_levels: (f64, f64),
    /// Winner collapsed onto a semi-trivial state (component share ≤ 10⁻⁴).
    pub winner_is_semi_trivial: Option<bool>,
    /// Winner's energy lies strictly below both semi-trivial levels.
    pub below_both_semi_trivial: Option<bool>,
}

fn log_bump<S: Scalar>(grid: &Arc<RadialGrid<S>>, center: f64, width: f64) -> RadialField<S> {
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

/// Runs `n_starts` independent descents (perturbed semi-trivial starts,
/// a balanced start, then seeded random pairs), in parallel, and merges
/// deterministically by `(energy, start index)`. An errored start is
/// reported as diverged rather than aborting the experiment.
pub fn ground_state_experiment<S: Scalar>(
    p: &Params<S>,
    grid: &Arc<RadialGrid<S>>,
    cfg: &DescentConfig<S>,
    n_starts: usize,
    seed: u64,
) -> Result<GroundStateReport<S>> {
    cfg.validate()?;
    let z1 = sample_bubble(grid, p.lambda1, S::one())?;
    let z2 = sample_bubble(grid, p.lambda2, S::one())?;
    let bump = {
        let b = log_bump(grid, 1.0, 1.0);
        let scale = (norm_lambda_sq(&z1, p.lambda1)
            / norm_lambda_sq(&b, p.lambda1))
        .sqrt();
        b.scale(scale * S::real(0.05))
    };
    let mut starts: Vec<(String, StatePair<S>)> = vec![
        (
            "first_bubble_plus_bump".into(),
            StatePair::new(z1.clone(), bump.clone())?,
        ),
        (
            "first_bubble_minus_bump".into(),
            StatePair::new(z1.clone(), bump.scale(-S::one()))?,
        ),
        (
            "second_bubble_plus_bump".into(),
            StatePair::new(bump.clone(), z2.clone())?,
        ),
        (
            "second_bubble_minus_bump".into(),
            StatePair::new(bump.scale(-S::one()), z2.clone())?,
        ),
        (
            "balanced_pair".into(),
            StatePair::new(
                z1.scale(S::real(1.0 / std::f64::consts::SQRT_2)),
                z2.scale(S::real(1.0 / std::f64::consts::SQRT_2)),
            )?,
        ),
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    while starts.len() < n_starts {
        let i = starts.len();
        let c1 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let c2 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let a1 = S::real(rng.gen_range(0.2..2.0));
        let a2 = S::real(rng.gen_range(0.2..2.0));
        let pair = StatePair::new(
            log_bump(grid, c1, rng.gen_range(0.8..2.5)).scale(a1),
            log_bump(grid, c2, rng.gen_range(0.8..2.5)).scale(a2),
        )?;
        starts.push((format!("random_{i}"), pair));
    }
    starts.truncate(n_starts);

    let runs: Vec<(String, Result<SolveResult<S>>)> = starts
        .into_par_iter()
        .map(|(label, init)| {
            let run = minimize_on_nehari(&init, p, cfg);
            (label, run)
        })
        .collect();

    let mut outcomes = Vec::with_capacity(runs.len());
    let mut results: Vec<Option<SolveResult<S>>> = Vec::with_capacity(runs.len());
    for (label, run) in runs {
        match run {
            Ok(r) => {
                outcomes.push(StartOutcome {
                    label,
                    classification: r.classification,
                    energy: r.energy.to_real(),
                    grad_norm: r.grad_norm.to_real(),
                    iterations: r.iterations,
                });
                results.push(Some(r));
            }
            Err(_) => {
                outcomes.push(StartOutcome {
                    label,
                    classification: Classification::Diverged,
                    energy: f64::NAN,
                    grad_norm: f64::NAN,
                    iterations: 0,
                });
                results.push(None);
            }
        }
    }

    let winner_index = results
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.as_ref().is_some_and(|r| {
                matches!(
                    r.classification,
                    Classification::GroundCandidate | Classification::SemiTrivialLimit
                )
            })
        })
        .min_by(|(ia, a), (ib, b)| {
            let ea = a.as_ref().expect("filtered").energy.to_real();
            let eb = b.as_ref().expect("filtered").energy.to_real();
            ea.partial_cmp(&eb)
                .expect("finite energies")
                .then(ia.cmp(ib))
        })
        .map(|(i, _)| i);

    let n = S::from_u32(p.n_dim).expect("small dimension");
    let lv1 = pow_real(s_lambda::<S>(p.n_dim, p.lambda1)?, n / S::real(2.0)) / n;
    let lv2 = pow_real(s_lambda::<S>(p.n_dim, p.lambda2)?, n / S::real(2.0)) / n;

    let winner = winner_index.map(|i| results[i].take().expect("winner present"));
    let winner_is_semi_trivial = winner
        .as_ref()
        .map(|r| r.classification == Classification::SemiTrivialLimit);
    let below_both = winner
        .as_ref()
        .map(|r| r.energy < lv1.min(lv2) * (S::one() - S::real(1e-10)));

    Ok(GroundStateReport {
        winner,
        winner_index,
        outcomes,
        semi_trivial_levels: (lv1.to_real(), lv2.to_real()),
        winner_is_semi_trivial,
        below_both_semi_trivial: below_both,
    })
}

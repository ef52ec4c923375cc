//! Stationary points of the one- and two-component free-energy functionals.
//!
//! In one dimension every root of `g(m) = m - tanh(K m^2 + J m + h)` is
//! bracketed on a uniform grid and bisected, so unstable branches are found
//! as well as the stable ones. In two dimensions a grid of starts is run
//! through the damped fixed-point map and polished with Newton steps on the
//! gradient of `Phi`; raw Newton from the same starts picks up saddles.

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    self, check_open, grad_phi_two, hessian_phi_two, phi_one, phi_two, second_deriv_phi_one, DomainError,
    MagnetizationPair, OneComponentParams, TwoComponentParams,
};
use crate::num::{lit, tol_floor, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid solver configuration: {0}")]
    Config(&'static str),
    #[error("fixed-point start must lie strictly inside the domain")]
    StartOutsideDomain,
    #[error("no sign change of the stationarity residual on the scan grid; refine grid_resolution")]
    NoRootBracketed,
    #[error("none of the {0} starts converged to a stationary point")]
    NoConvergence(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Convergence tolerance on successive fixed-point iterates.
    pub fp_tol: T,
    pub max_iter: usize,
    /// Initial damping `lambda` in `m <- (1 - lambda) m + lambda tanh(.)`.
    pub damping: T,
    /// Starts per dimension for the two-component multi-start search.
    pub n_starts: usize,
    /// Two roots closer than this are the same root.
    pub dedup_tol: T,
    /// Step of the one-dimensional bracketing grid.
    pub grid_resolution: T,
    /// Largest accepted residual of the self-consistency equation.
    pub residual_tol: T,
    /// Points whose free energy is within this of the maximum are global maximizers.
    pub tie_tol: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            fp_tol: tol_floor(1e-12, 16.0),
            max_iter: 100_000,
            damping: T::one(),
            n_starts: 21,
            dedup_tol: tol_floor(1e-8, 128.0),
            grid_resolution: lit(1e-4),
            residual_tol: tol_floor(1e-10, 64.0),
            tie_tol: tol_floor(1e-10, 64.0),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.fp_tol > T::zero()) {
            return Err(SolveError::Config("fp_tol must be positive"));
        }
        if !(self.dedup_tol > self.fp_tol) {
            return Err(SolveError::Config("dedup_tol must exceed fp_tol"));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(SolveError::Config("damping must lie in (0, 1]"));
        }
        if self.n_starts < 3 {
            return Err(SolveError::Config("n_starts must be at least 3"));
        }
        if !(self.grid_resolution > T::zero() && self.grid_resolution < T::one()) {
            return Err(SolveError::Config("grid_resolution must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(SolveError::Config("max_iter must be positive"));
        }
        if !(self.residual_tol > T::zero() && self.tie_tol >= T::zero()) {
            return Err(SolveError::Config("residual_tol must be positive and tie_tol non-negative"));
        }
        Ok(())
    }
}

/// Stability class of a stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    /// Realizes the supremum of the functional.
    GlobalMax,
    /// Strict local maximum that is not global.
    LocalMax,
    /// Saddle or minimum.
    Unstable,
}

impl Stability {
    pub fn is_max(self) -> bool {
        matches!(self, Stability::GlobalMax | Stability::LocalMax)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::GlobalMax => "global",
            Stability::LocalMax => "local",
            Stability::Unstable => "unstable",
        }
    }
}

/// Point in the magnetization domain of a model.
pub trait Location<T: Real>: Copy + Send + Sync {
    fn distance(&self, other: &Self) -> T;
    fn order(&self, other: &Self) -> Ordering;
}

impl<T: Real> Location<T> for T {
    fn distance(&self, other: &Self) -> T {
        (*self - *other).abs()
    }

    fn order(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }
}

impl<T: Real> Location<T> for MagnetizationPair<T> {
    fn distance(&self, other: &Self) -> T {
        MagnetizationPair::distance(self, other)
    }

    fn order(&self, other: &Self) -> Ordering {
        self.m1
            .partial_cmp(&other.m1)
            .unwrap_or(Ordering::Equal)
            .then(self.m2.partial_cmp(&other.m2).unwrap_or(Ordering::Equal))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint<T, L> {
    pub location: L,
    pub phi: T,
    pub stability: Stability,
}

/// Deduplicated stationary points, sorted by location, with the global maximizers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet<T, L> {
    pub points: Vec<StationaryPoint<T, L>>,
    pub global: Vec<StationaryPoint<T, L>>,
    /// Two or more distinct global maximizers tie.
    pub coexistence: bool,
    /// Multi-start runs that did not converge (always 0 in one dimension).
    pub unconverged_starts: usize,
}

impl<T: Real, L: Location<T>> SolutionSet<T, L> {
    /// Global maximizer with the lowest location.
    pub fn primary(&self) -> &StationaryPoint<T, L> {
        &self.global[0]
    }

    pub fn maxima(&self) -> impl Iterator<Item = &StationaryPoint<T, L>> {
        self.points.iter().filter(|p| p.stability.is_max())
    }
}

pub type OneSolution<T> = SolutionSet<T, T>;
pub type TwoSolution<T> = SolutionSet<T, MagnetizationPair<T>>;

/// Marks every point within `tie_tol` of the largest free energy as `GlobalMax`.
///
/// Points are expected to carry their local classification (`LocalMax` or
/// `Unstable`). The global maximizer is taken over all stationary points,
/// so a degenerate maximum with vanishing curvature is still selected.
pub fn select_global<T: Real, L: Location<T>>(mut points: Vec<StationaryPoint<T, L>>, tie_tol: T) -> SolutionSet<T, L> {
    points.sort_by(|a, b| a.location.order(&b.location));
    let best = points.iter().map(|p| p.phi).fold(T::neg_infinity(), T::max);
    for p in points.iter_mut() {
        if p.phi >= best - tie_tol {
            p.stability = Stability::GlobalMax;
        } else if p.stability == Stability::GlobalMax {
            p.stability = Stability::LocalMax;
        }
    }
    let global: Vec<_> = points.iter().filter(|p| p.stability == Stability::GlobalMax).copied().collect();
    SolutionSet { coexistence: global.len() > 1, global, points, unconverged_starts: 0 }
}

/// Self-consistency map `m -> tanh(field(m))`.
pub trait FixedPointMap<T: Real>: Sync {
    type Point: Location<T>;

    fn apply(&self, m: Self::Point) -> Self::Point;
    fn blend(&self, from: Self::Point, to: Self::Point, damping: T) -> Self::Point;
    fn is_interior(&self, m: &Self::Point) -> bool;
    fn step_size(&self, a: &Self::Point, b: &Self::Point) -> T;
}

impl<T: Real> FixedPointMap<T> for OneComponentParams<T> {
    type Point = T;

    fn apply(&self, m: T) -> T {
        self.local_field(m).tanh()
    }

    fn blend(&self, from: T, to: T, damping: T) -> T {
        from + damping * (to - from)
    }

    fn is_interior(&self, m: &T) -> bool {
        check_open(*m).is_ok()
    }

    fn step_size(&self, a: &T, b: &T) -> T {
        (*a - *b).abs()
    }
}

impl<T: Real> FixedPointMap<T> for TwoComponentParams<T> {
    type Point = MagnetizationPair<T>;

    fn apply(&self, m: Self::Point) -> Self::Point {
        MagnetizationPair::new(self.local_field(0, m).tanh(), self.local_field(1, m).tanh())
    }

    fn blend(&self, from: Self::Point, to: Self::Point, damping: T) -> Self::Point {
        MagnetizationPair::new(from.m1 + damping * (to.m1 - from.m1), from.m2 + damping * (to.m2 - from.m2))
    }

    fn is_interior(&self, m: &Self::Point) -> bool {
        check_open(m.m1).is_ok() && check_open(m.m2).is_ok()
    }

    fn step_size(&self, a: &Self::Point, b: &Self::Point) -> T {
        (a.m1 - b.m1).abs().max((a.m2 - b.m2).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOutcome<T, P> {
    /// Limit point, or the last iterate when not converged.
    pub point: P,
    pub iterations: usize,
    pub converged: bool,
    /// Damping in effect when the iteration stopped.
    pub damping: T,
}

const MIN_DAMPING: f64 = 0.125;
const OSCILLATION_STREAK: usize = 3;

/// Damped fixed-point iteration `m <- (1 - lambda) m + lambda tanh(field(m))`.
///
/// The damping is halved (down to 1/8) whenever the step length fails to
/// shrink three times in a row.
pub fn fixed_point_iterate<T: Real, M: FixedPointMap<T>>(
    model: &M,
    start: M::Point,
    config: &SolverConfig<T>,
) -> Result<FixedPointOutcome<T, M::Point>, SolveError> {
    if !model.is_interior(&start) {
        return Err(SolveError::StartOutsideDomain);
    }
    let min_damping = lit::<T>(MIN_DAMPING);
    let mut damping = config.damping;
    let mut current = start;
    let mut last_step = T::infinity();
    let mut streak = 0;
    for iteration in 1..=config.max_iter {
        let next = model.blend(current, model.apply(current), damping);
        let step = model.step_size(&current, &next);
        current = next;
        if step < config.fp_tol {
            return Ok(FixedPointOutcome { point: current, iterations: iteration, converged: true, damping });
        }
        if step >= last_step {
            streak += 1;
            if streak >= OSCILLATION_STREAK && damping > min_damping {
                damping = (damping * lit(0.5)).max(min_damping);
                streak = 0;
            }
        } else {
            streak = 0;
        }
        last_step = step;
    }
    Ok(FixedPointOutcome { point: current, iterations: config.max_iter, converged: false, damping })
}

/// Every stationary point of the one-component functional.
pub fn find_all_stationary_one<T: Real>(
    p: &OneComponentParams<T>,
    config: &SolverConfig<T>,
) -> Result<OneSolution<T>, SolveError> {
    p.validate()?;
    config.validate()?;
    let g = |m: T| m - p.local_field(m).tanh();

    // Uniform grid over (-1 + eps, 1 - eps), plus two end cells reaching to
    // within machine precision of the boundary for roots pushed against it.
    let edge = tol_floor::<T>(1e-9, 4.0);
    let lo = -T::one() + edge;
    let hi = T::one() - edge;
    let cells = ((hi - lo) / config.grid_resolution).ceil().to_usize().unwrap_or(1).max(1);
    let mut nodes = Vec::with_capacity(cells + 3);
    nodes.push(-T::one() + T::epsilon());
    for i in 0..=cells {
        let t = lit::<T>(i as f64) / lit(cells as f64);
        nodes.push(lo + (hi - lo) * t);
    }
    nodes.push(T::one() - T::epsilon());

    let values: Vec<T> = nodes.iter().map(|&m| g(m)).collect();
    let mut roots: Vec<T> = Vec::new();
    for i in 0..nodes.len() {
        if values[i] == T::zero() {
            roots.push(nodes[i]);
        }
        if i + 1 < nodes.len() && values[i] * values[i + 1] < T::zero() {
            roots.push(bisect(&g, nodes[i], nodes[i + 1], values[i]));
        }
    }
    if roots.is_empty() {
        return Err(SolveError::NoRootBracketed);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() <= config.dedup_tol);

    let mut points = Vec::with_capacity(roots.len());
    for m in roots {
        let curvature = second_deriv_phi_one(p, m)?;
        let stability = if curvature < T::zero() { Stability::LocalMax } else { Stability::Unstable };
        points.push(StationaryPoint { location: m, phi: phi_one(p, m)?, stability });
    }
    Ok(select_global(points, config.tie_tol))
}

/// Bisects a sign change of `g` on `[a, b]` down to adjacent floating point numbers.
fn bisect<T: Real>(g: &impl Fn(T) -> T, mut a: T, mut b: T, mut ga: T) -> T {
    loop {
        let mid = a + (b - a) * lit(0.5);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return mid;
        }
        if (gm < T::zero()) == (ga < T::zero()) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    if ga.abs() <= g(b).abs() {
        a
    } else {
        b
    }
}

const NEWTON_MAX_STEPS: usize = 50;

/// Newton iteration on the gradient of `Phi`. Returns `None` if it leaves the
/// open square, meets a singular Hessian or does not settle.
fn newton_two<T: Real>(p: &TwoComponentParams<T>, start: MagnetizationPair<T>) -> Option<MagnetizationPair<T>> {
    let mut m = start;
    let settle = T::epsilon() * lit(8.0);
    for _ in 0..NEWTON_MAX_STEPS {
        let grad = grad_phi_two(p, m).ok()?;
        let h = hessian_phi_two(p, m).ok()?;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let d1 = (h[1][1] * grad[0] - h[0][1] * grad[1]) / det;
        let d2 = (h[0][0] * grad[1] - h[1][0] * grad[0]) / det;
        let next = MagnetizationPair::new(m.m1 - d1, m.m2 - d2);
        if check_open(next.m1).is_err() || check_open(next.m2).is_err() {
            return None;
        }
        m = next;
        if d1.abs().max(d2.abs()) <= settle {
            return Some(m);
        }
    }
    Some(m)
}

fn start_grid<T: Real>(n: usize) -> Vec<T> {
    (1..=n).map(|i| -T::one() + lit::<T>(2.0 * i as f64 / (n + 1) as f64)).collect()
}

/// Stationary points of the two-component functional found by multi-start
/// fixed-point iteration with Newton polishing.
///
/// At `alpha` equal to 0 or 1 the surviving group is solved exactly in one
/// dimension; the vanished group's opinion is `tanh` of its field with zero
/// weight on itself, i.e. `tanh(h_l + J_lp m_p + K_lpp m_p^2)`.
pub fn find_all_stationary_two<T: Real>(
    p: &TwoComponentParams<T>,
    config: &SolverConfig<T>,
) -> Result<TwoSolution<T>, SolveError> {
    p.validate()?;
    config.validate()?;
    if p.alpha == T::zero() || p.alpha == T::one() {
        return degenerate_two(p, config);
    }

    let grid = start_grid::<T>(config.n_starts);
    let starts: Vec<MagnetizationPair<T>> =
        grid.iter().flat_map(|&a| grid.iter().map(move |&b| MagnetizationPair::new(a, b))).collect();

    let accept = |m: MagnetizationPair<T>| p.residual(m) <= config.residual_tol;
    let results: Vec<(Vec<MagnetizationPair<T>>, bool)> = starts
        .par_iter()
        .map(|&start| {
            let mut found = Vec::with_capacity(2);
            let mut converged = false;
            if let Ok(outcome) = fixed_point_iterate(p, start, config) {
                if outcome.converged {
                    let polished = newton_two(p, outcome.point).filter(|m| accept(*m));
                    let candidate = polished.unwrap_or(outcome.point);
                    if accept(candidate) {
                        converged = true;
                        found.push(candidate);
                    }
                }
            }
            if let Some(m) = newton_two(p, start).filter(|m| accept(*m)) {
                found.push(m);
            }
            (found, converged)
        })
        .collect();

    let unconverged_starts = results.iter().filter(|(_, ok)| !*ok).count();
    let mut candidates: Vec<MagnetizationPair<T>> = results.into_iter().flat_map(|(found, _)| found).collect();
    if candidates.is_empty() {
        return Err(SolveError::NoConvergence(starts.len()));
    }
    candidates.sort_by(|a, b| a.order(b));
    let mut unique: Vec<MagnetizationPair<T>> = Vec::new();
    for c in candidates {
        if !unique.iter().any(|u| u.distance(&c) <= config.dedup_tol) {
            unique.push(c);
        }
    }

    let mut points = Vec::with_capacity(unique.len());
    for m in unique {
        let h = hessian_phi_two(p, m)?;
        let negative_definite = h[0][0] < T::zero() && h[0][0] * h[1][1] - h[0][1] * h[1][0] > T::zero();
        let stability = if negative_definite { Stability::LocalMax } else { Stability::Unstable };
        points.push(StationaryPoint { location: m, phi: phi_two(p, m)?, stability });
    }
    let mut set = select_global(points, config.tie_tol);
    set.unconverged_starts = unconverged_starts;
    Ok(set)
}

fn degenerate_two<T: Real>(p: &TwoComponentParams<T>, config: &SolverConfig<T>) -> Result<TwoSolution<T>, SolveError> {
    let survivor = if p.alpha == T::one() { 0 } else { 1 };
    let vanished = 1 - survivor;
    let reduced = find_all_stationary_one(&p.isolated(survivor), config)?;
    let points = reduced
        .points
        .iter()
        .map(|pt| {
            let mut pair = [T::zero(); 2];
            pair[survivor] = pt.location;
            let provisional = MagnetizationPair::new(pair[0], pair[1]);
            pair[vanished] = p.local_field(vanished, provisional).tanh();
            let location = MagnetizationPair::new(pair[0], pair[1]);
            Ok(StationaryPoint { location, phi: model::phi_two(p, location)?, stability: pt.stability })
        })
        .collect::<Result<Vec<_>, SolveError>>()?;
    Ok(select_global(points, config.tie_tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolverConfig<f64> {
        SolverConfig::default()
    }

    /// Independent bisection oracle on `m - tanh(field)` over a given interval.
    fn oracle_root(p: &OneComponentParams<f64>, mut a: f64, mut b: f64) -> f64 {
        let g = |m: f64| m - p.local_field(m).tanh();
        assert!(g(a) * g(b) < 0.0, "oracle bracket must change sign");
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if g(mid) * g(a) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = SolverConfig { dedup_tol: 1e-13, ..cfg() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { damping: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { n_starts: 2, ..cfg() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let p = OneComponentParams::new(0.0, 0.0, 0.5);
        let out = fixed_point_iterate(&p, 0.0, &cfg()).unwrap();
        assert!(out.converged);
        assert!((out.point - 0.5f64.tanh()).abs() < 1e-11);

        let p = OneComponentParams::new(0.0, 0.5, 0.0);
        let out = fixed_point_iterate(&p, 0.3, &cfg()).unwrap();
        assert!(out.converged && out.point.abs() < 1e-11);

        let p = OneComponentParams::new(2.1, 0.0, 0.0);
        let out = fixed_point_iterate(&p, 0.95, &cfg()).unwrap();
        let g = |m: f64| m - (2.1 * m * m).tanh();
        assert!(g(0.9) < 0.0 && g(0.96) > 0.0);
        assert!(out.converged && out.point > 0.9 && out.point < 0.96);

        assert_eq!(fixed_point_iterate(&p, 1.0, &cfg()), Err(SolveError::StartOutsideDomain));
    }

    #[test]
    fn fixed_point_reports_non_convergence() {
        let p = OneComponentParams::new(0.0, 0.9, 0.0);
        let tight = SolverConfig { max_iter: 5, ..cfg() };
        let out = fixed_point_iterate(&p, 0.5, &tight).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
    }

    #[test]
    fn oscillating_map_is_damped() {
        // Strong antiferromagnetic coupling: the undamped map has a stable 2-cycle.
        let p = OneComponentParams::new(0.0, -2.0, 0.0);
        let out = fixed_point_iterate(&p, 0.4, &cfg()).unwrap();
        assert!(out.converged, "{out:?}");
        assert!(out.damping < 1.0);
        assert!(out.point.abs() < 1e-10);
    }

    #[test]
    fn free_spins_have_single_root() {
        let set = find_all_stationary_one(&OneComponentParams::new(0.0, 0.0, 0.0), &cfg()).unwrap();
        assert_eq!(set.points.len(), 1);
        assert!(set.points[0].location.abs() < 1e-14);
        assert_eq!(set.points[0].stability, Stability::GlobalMax);
        assert!(!set.coexistence);
    }

    #[test]
    fn three_roots_above_critical_coupling() {
        let p = OneComponentParams::new(2.1, 0.0, 0.0);
        let set = find_all_stationary_one(&p, &cfg()).unwrap();
        let g = |m: f64| m - (2.1 * m * m).tanh();
        // Sign pattern pins one root in (0.5, 0.9) and one in (0.9, 0.96).
        assert!(g(0.5) < 0.0 && g(0.9) > 0.0 && g(0.96) < 0.0 || g(0.5) > 0.0 && g(0.9) < 0.0 && g(0.96) > 0.0);
        assert_eq!(set.points.len(), 3);
        let [zero, mid, top] = [set.points[0], set.points[1], set.points[2]];
        assert!(zero.location.abs() < 1e-12);
        assert_eq!(zero.stability, Stability::LocalMax);
        assert!(mid.location > 0.5 && mid.location < 0.9);
        assert_eq!(mid.stability, Stability::Unstable);
        assert!(top.location > 0.9 && top.location < 0.96);
        assert_eq!(top.stability, Stability::GlobalMax);
        assert!((top.location - oracle_root(&p, 0.9, 0.96)).abs() < 1e-12);

        // No missed global maximum on a 1e-4 grid.
        for i in 0..=20_000 {
            let m = -1.0 + i as f64 * 1e-4;
            assert!(phi_one(&p, m).unwrap() <= top.phi + 1e-10);
        }
    }

    #[test]
    fn classical_symmetric_tie() {
        let p = OneComponentParams::new(0.0, 1.2, 0.0);
        let set = find_all_stationary_one(&p, &cfg()).unwrap();
        let m_star = oracle_root(&p, 0.1, 0.99);
        assert_eq!(set.points.len(), 3);
        assert!((set.points[0].location + m_star).abs() < 1e-12);
        assert!((set.points[2].location - m_star).abs() < 1e-12);
        assert_eq!(set.points[1].stability, Stability::Unstable);
        assert!(set.coexistence);
        assert_eq!(set.global.len(), 2);
    }

    #[test]
    fn global_selection_examples() {
        let below = find_all_stationary_one(&OneComponentParams::new(1.9, 0.0, 0.0), &cfg()).unwrap();
        assert_eq!(below.global.len(), 1);
        assert!(below.primary().location.abs() < 1e-12);

        let above = find_all_stationary_one(&OneComponentParams::new(2.1, 0.0, 0.0), &cfg()).unwrap();
        assert_eq!(above.global.len(), 1);
        assert!(above.primary().location > 0.9);
    }

    #[test]
    fn select_global_marks_ties() {
        let pts = vec![
            StationaryPoint { location: 0.5, phi: 1.0, stability: Stability::LocalMax },
            StationaryPoint { location: -0.5, phi: 1.0 - 1e-12, stability: Stability::LocalMax },
            StationaryPoint { location: 0.0, phi: 0.2, stability: Stability::Unstable },
        ];
        let set = select_global(pts, 1e-10);
        assert_eq!(set.points.iter().map(|p| p.location).collect::<Vec<_>>(), vec![-0.5, 0.0, 0.5]);
        assert_eq!(set.global.len(), 2);
        assert!(set.coexistence);
        assert_eq!(set.points[1].stability, Stability::Unstable);
    }

    #[test]
    fn roots_pressed_against_the_boundary() {
        let p = OneComponentParams::new(0.0, 0.0, 12.0);
        let set = find_all_stationary_one(&p, &cfg()).unwrap();
        assert_eq!(set.points.len(), 1);
        assert!(p.residual(set.points[0].location) <= 1e-10);
        assert!(set.points[0].location > 1.0 - 1e-9);
    }

    #[test]
    fn two_component_zero_couplings() {
        let p = TwoComponentParams { alpha: 0.5, ..Default::default() };
        let set = find_all_stationary_two(&p, &cfg()).unwrap();
        assert_eq!(set.points.len(), 1);
        let pt = set.points[0];
        assert!(pt.location.m1.abs() < 1e-12 && pt.location.m2.abs() < 1e-12);
        assert_eq!(pt.stability, Stability::GlobalMax);
    }

    #[test]
    fn two_component_human_only_reduces() {
        let p = TwoComponentParams { k222: 2.1, alpha: 0.0, ..Default::default() };
        let two = find_all_stationary_two(&p, &cfg()).unwrap();
        let one = find_all_stationary_one(&OneComponentParams::new(2.1, 0.0, 0.0), &cfg()).unwrap();
        let m_total = model::total_magnetization(p.alpha, two.primary().location);
        assert!((m_total - one.primary().location).abs() < 1e-8);
        assert_eq!(two.points.len(), one.points.len());
        // Vanished group feels neither itself nor a bias here.
        assert!(two.points.iter().all(|pt| pt.location.m1 == 0.0));
    }

    #[test]
    fn vanished_group_feels_the_other() {
        let p = TwoComponentParams { k111: 0.5, j12: 0.4, k112: 0.3, h2: 0.2, alpha: 1.0, ..Default::default() };
        let set = find_all_stationary_two(&p, &cfg()).unwrap();
        let m1 = set.primary().location.m1;
        let expected = (0.4 * m1 + 0.3 * m1 * m1 + 0.2f64).tanh();
        assert!((set.primary().location.m2 - expected).abs() < 1e-14);
    }

    #[test]
    fn equal_couplings_match_one_component() {
        let one = find_all_stationary_one(&OneComponentParams::new(2.1, 0.0, 0.0), &cfg()).unwrap();
        let p = TwoComponentParams::uniform(2.1, 0.0, 0.0, 0.3);
        let two = find_all_stationary_two(&p, &cfg()).unwrap();
        let g = two.primary().location;
        assert!((g.m1 - one.primary().location).abs() < 1e-8);
        assert!((g.m2 - one.primary().location).abs() < 1e-8);
        for pt in &two.points {
            assert!(p.residual(pt.location) <= 1e-10);
        }
    }

    #[test]
    fn two_component_finds_saddles() {
        let p = TwoComponentParams::uniform(0.0, 1.5, 0.0, 0.5);
        let set = find_all_stationary_two(&p, &cfg()).unwrap();
        assert!(set.points.iter().any(|pt| pt.stability == Stability::Unstable));
        assert!(set.coexistence);
    }

    #[test]
    fn single_precision_solver() {
        let cfg32 = SolverConfig::<f32>::default();
        assert!(cfg32.validate().is_ok());
        let set = find_all_stationary_one(&OneComponentParams::<f32>::new(2.1, 0.0, 0.0), &cfg32).unwrap();
        assert_eq!(set.points.len(), 3);
        assert!(set.primary().location > 0.9);
        let two = find_all_stationary_two(&TwoComponentParams::<f32>::uniform(2.1, 0.0, 0.0, 0.4), &cfg32).unwrap();
        assert!((two.primary().location.m1 - set.primary().location).abs() < 1e-4);
    }
}

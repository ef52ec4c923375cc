//! Parameter sweeps, first-order jump detection and refinement, critical
//! couplings and phase diagrams.
//!
//! A jump is first flagged between two adjacent sweep rows whose global
//! order parameter differs by more than a threshold. It is then refined by
//! bisection on the sign of the free-energy difference between the branch
//! that is global on the left and the branch that is global on the right,
//! each branch continued through the bracket by nearest-root tracking.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    bias_from_internal_equilibrium, total_magnetization, DomainError, MagnetizationPair, OneComponentParams,
    TwoComponentParams,
};
use crate::num::{lit, Real};
use crate::solver::{find_all_stationary_one, find_all_stationary_two, SolveError, SolverConfig, Stability};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransitionError {
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{param}` does not belong to the {kind}-component model")]
    ParamNotInModel { param: Param, kind: &'static str },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("grid of {cells} cells exceeds the cap of {cap}")]
    GridTooLarge { cells: usize, cap: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("bracket [{left}, {right}] does not separate two distinct global branches")]
    NoBranchChange { left: f64, right: f64 },
    #[error("branch tracking lost both branches at {at}; the bracket is too wide")]
    BranchLost { at: f64 },
    #[error("no transition: {0}")]
    NoTransition(String),
}

/// Named model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    K,
    J,
    H,
    K111,
    K112,
    K122,
    K222,
    J11,
    J12,
    J22,
    H1,
    H2,
    /// Internal equilibrium of group 1; sets `h1` through the bias reparameterization.
    M1Star,
    M2Star,
    Alpha,
}

impl Param {
    pub const ALL: [Param; 15] = [
        Param::K,
        Param::J,
        Param::H,
        Param::K111,
        Param::K112,
        Param::K122,
        Param::K222,
        Param::J11,
        Param::J12,
        Param::J22,
        Param::H1,
        Param::H2,
        Param::M1Star,
        Param::M2Star,
        Param::Alpha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::K => "K",
            Param::J => "J",
            Param::H => "h",
            Param::K111 => "K111",
            Param::K112 => "K112",
            Param::K122 => "K122",
            Param::K222 => "K222",
            Param::J11 => "J11",
            Param::J12 => "J12",
            Param::J22 => "J22",
            Param::H1 => "h1",
            Param::H2 => "h2",
            Param::M1Star => "m1star",
            Param::M2Star => "m2star",
            Param::Alpha => "alpha",
        }
    }

    pub fn is_one_component(self) -> bool {
        matches!(self, Param::K | Param::J | Param::H)
    }

    /// Parses a comma-separated list of tied parameter names.
    pub fn parse_list(s: &str) -> Result<Vec<Param>, TransitionError> {
        s.split(',').map(|n| n.trim().parse()).collect()
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = TransitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Param::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| TransitionError::UnknownParam(s.to_string()))
    }
}

/// Either model, with optional internal equilibria standing in for the biases
/// of the two-component model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model<T> {
    One(OneComponentParams<T>),
    Two { params: TwoComponentParams<T>, m_star: [Option<T>; 2] },
}

/// Common view of a stationary point of either model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint<T> {
    pub m1: T,
    pub m2: T,
    pub m_total: T,
    pub phi: T,
    pub stability: Stability,
}

impl<T: Real> ModelPoint<T> {
    fn distance(&self, other: &Self) -> T {
        (self.m1 - other.m1).hypot(self.m2 - other.m2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSolution<T> {
    pub points: Vec<ModelPoint<T>>,
    pub global: Vec<ModelPoint<T>>,
    pub coexistence: bool,
    pub unconverged_starts: usize,
}

impl<T: Real> Model<T> {
    pub fn two(params: TwoComponentParams<T>) -> Self {
        Model::Two { params, m_star: [None, None] }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::One(_) => "one",
            Model::Two { .. } => "two",
        }
    }

    pub fn accepts(&self, param: Param) -> bool {
        match self {
            Model::One(_) => param.is_one_component(),
            Model::Two { .. } => !param.is_one_component(),
        }
    }

    fn reject(&self, param: Param) -> TransitionError {
        TransitionError::ParamNotInModel { param, kind: self.kind() }
    }

    pub fn get(&self, param: Param) -> Result<T, TransitionError> {
        match self {
            Model::One(p) => match param {
                Param::K => Ok(p.k),
                Param::J => Ok(p.j),
                Param::H => Ok(p.h),
                _ => Err(self.reject(param)),
            },
            Model::Two { params, m_star } => match param {
                Param::K111 => Ok(params.k111),
                Param::K112 => Ok(params.k112),
                Param::K122 => Ok(params.k122),
                Param::K222 => Ok(params.k222),
                Param::J11 => Ok(params.j11),
                Param::J12 => Ok(params.j12),
                Param::J22 => Ok(params.j22),
                Param::H1 => Ok(params.h1),
                Param::H2 => Ok(params.h2),
                Param::Alpha => Ok(params.alpha),
                Param::M1Star => m_star[0].ok_or_else(|| TransitionError::InvalidSpec("m1star is not set".into())),
                Param::M2Star => m_star[1].ok_or_else(|| TransitionError::InvalidSpec("m2star is not set".into())),
                _ => Err(self.reject(param)),
            },
        }
    }

    pub fn set(&mut self, param: Param, value: T) -> Result<(), TransitionError> {
        if !self.accepts(param) {
            return Err(self.reject(param));
        }
        match self {
            Model::One(p) => match param {
                Param::K => p.k = value,
                Param::J => p.j = value,
                _ => p.h = value,
            },
            Model::Two { params, m_star } => match param {
                Param::K111 => params.k111 = value,
                Param::K112 => params.k112 = value,
                Param::K122 => params.k122 = value,
                Param::K222 => params.k222 = value,
                Param::J11 => params.j11 = value,
                Param::J12 => params.j12 = value,
                Param::J22 => params.j22 = value,
                Param::H1 => params.h1 = value,
                Param::H2 => params.h2 = value,
                Param::M1Star => m_star[0] = Some(value),
                Param::M2Star => m_star[1] = Some(value),
                _ => params.alpha = value,
            },
        }
        Ok(())
    }

    /// Returns a copy with every parameter in `vary` set to `value`.
    pub fn with(&self, vary: &[Param], value: T) -> Result<Self, TransitionError> {
        let mut m = *self;
        for &p in vary {
            m.set(p, value)?;
        }
        Ok(m)
    }

    /// Two-component couplings with biases recomputed from any internal equilibria.
    pub fn resolved_two(&self) -> Result<Option<TwoComponentParams<T>>, TransitionError> {
        match self {
            Model::One(_) => Ok(None),
            Model::Two { params, m_star } => {
                let mut p = *params;
                if let Some(m) = m_star[0] {
                    p.h1 = bias_from_internal_equilibrium(m, p.k111, p.j11)?;
                }
                if let Some(m) = m_star[1] {
                    p.h2 = bias_from_internal_equilibrium(m, p.k222, p.j22)?;
                }
                Ok(Some(p))
            }
        }
    }

    /// Spin-flipped model: cubic couplings, biases and internal equilibria negated.
    pub fn flipped(&self) -> Self {
        match self {
            Model::One(p) => Model::One(p.flipped()),
            Model::Two { params, m_star } => {
                Model::Two { params: params.flipped(), m_star: m_star.map(|m| m.map(|v| -v)) }
            }
        }
    }

    pub fn solve(&self, config: &SolverConfig<T>) -> Result<ModelSolution<T>, TransitionError> {
        match self {
            Model::One(p) => {
                let set = find_all_stationary_one(p, config)?;
                let conv = |pt: &crate::solver::StationaryPoint<T, T>| ModelPoint {
                    m1: pt.location,
                    m2: pt.location,
                    m_total: pt.location,
                    phi: pt.phi,
                    stability: pt.stability,
                };
                Ok(ModelSolution {
                    points: set.points.iter().map(conv).collect(),
                    global: set.global.iter().map(conv).collect(),
                    coexistence: set.coexistence,
                    unconverged_starts: 0,
                })
            }
            Model::Two { .. } => {
                let p = self.resolved_two()?.expect("two-component model");
                let set = find_all_stationary_two(&p, config)?;
                let conv = |pt: &crate::solver::StationaryPoint<T, MagnetizationPair<T>>| ModelPoint {
                    m1: pt.location.m1,
                    m2: pt.location.m2,
                    m_total: total_magnetization(p.alpha, pt.location),
                    phi: pt.phi,
                    stability: pt.stability,
                };
                Ok(ModelSolution {
                    points: set.points.iter().map(conv).collect(),
                    global: set.global.iter().map(conv).collect(),
                    coexistence: set.coexistence,
                    unconverged_starts: set.unconverged_starts,
                })
            }
        }
    }
}

/// Tunables for jump detection and refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionOptions<T> {
    pub jump_threshold: T,
    pub transition_tol: T,
    /// Largest number of cells in a phase diagram.
    pub max_cells: usize,
}

impl<T: Real> Default for TransitionOptions<T> {
    fn default() -> Self {
        Self { jump_threshold: lit(0.1), transition_tol: lit(1e-8), max_cells: 512 * 512 }
    }
}

/// One swept axis: the tied parameters and their common range.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis<T> {
    pub vary: Vec<Param>,
    pub from: T,
    pub to: T,
    pub steps: usize,
}

impl<T: Real> Axis<T> {
    pub fn new(vary: Vec<Param>, from: T, to: T, steps: usize) -> Self {
        Self { vary, from, to, steps }
    }

    pub fn validate(&self, model: &Model<T>) -> Result<(), TransitionError> {
        if self.vary.is_empty() {
            return Err(TransitionError::InvalidSpec("no parameter to vary".into()));
        }
        if !(self.from < self.to) {
            return Err(TransitionError::InvalidSpec(format!("range [{}, {}] is empty", self.from, self.to)));
        }
        if self.steps < 2 {
            return Err(TransitionError::InvalidSpec("at least 2 steps are required".into()));
        }
        for (i, &p) in self.vary.iter().enumerate() {
            if !model.accepts(p) {
                return Err(model.reject(p));
            }
            if self.vary[..i].contains(&p) {
                return Err(TransitionError::InvalidSpec(format!("parameter `{p}` listed twice")));
            }
            if let Model::Two { m_star, .. } = model {
                let shadowed = (p == Param::H1 && m_star[0].is_some()) || (p == Param::H2 && m_star[1].is_some());
                if shadowed {
                    return Err(TransitionError::InvalidSpec(format!("`{p}` is fixed by its internal equilibrium")));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> T {
        let t = lit::<T>(i as f64) / lit((self.steps - 1) as f64);
        self.from + (self.to - self.from) * t
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }

    pub fn label(&self) -> String {
        self.vary.iter().map(|p| p.name()).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub model: Model<T>,
    pub axis: Axis<T>,
}

/// One row of a sweep. On solver failure the numeric fields are NaN and
/// `error` carries the diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub param: T,
    pub m_total: T,
    pub m1: T,
    pub m2: T,
    pub phi: T,
    pub n_roots: usize,
    pub coexistence: bool,
    /// `m_total` of the other tied global maximizers at coexistence.
    pub tied: Vec<T>,
    pub error: Option<TransitionError>,
}

impl<T: Real> SweepRow<T> {
    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }

    fn primary_point(&self) -> ModelPoint<T> {
        ModelPoint { m1: self.m1, m2: self.m2, m_total: self.m_total, phi: self.phi, stability: Stability::GlobalMax }
    }
}

/// Solves the model at every step of the axis. Solver failures are recorded
/// per row; only an invalid specification aborts the sweep.
pub fn sweep_1d<T: Real>(spec: &SweepSpec<T>, config: &SolverConfig<T>) -> Result<Vec<SweepRow<T>>, TransitionError> {
    spec.axis.validate(&spec.model)?;
    config.validate()?;
    let values = spec.axis.values();
    let solutions: Vec<Result<ModelSolution<T>, TransitionError>> =
        values.par_iter().map(|&v| spec.model.with(&spec.axis.vary, v).and_then(|m| m.solve(config))).collect();

    // Sequential pass: at coexistence keep the branch continued from the lower side.
    let mut rows = Vec::with_capacity(values.len());
    let mut previous: Option<ModelPoint<T>> = None;
    for (&param, solution) in values.iter().zip(solutions) {
        match solution {
            Ok(sol) => {
                let chosen = match previous {
                    Some(prev) if sol.global.len() > 1 => *sol
                        .global
                        .iter()
                        .min_by(|a, b| a.distance(&prev).partial_cmp(&b.distance(&prev)).unwrap())
                        .unwrap(),
                    _ => sol.global[0],
                };
                let tied = sol.global.iter().filter(|g| **g != chosen).map(|g| g.m_total).collect();
                rows.push(SweepRow {
                    param,
                    m_total: chosen.m_total,
                    m1: chosen.m1,
                    m2: chosen.m2,
                    phi: chosen.phi,
                    n_roots: sol.points.len(),
                    coexistence: sol.coexistence,
                    tied,
                    error: None,
                });
                previous = Some(chosen);
            }
            Err(e) => {
                let nan = T::nan();
                rows.push(SweepRow {
                    param,
                    m_total: nan,
                    m1: nan,
                    m2: nan,
                    phi: nan,
                    n_roots: 0,
                    coexistence: false,
                    tied: Vec::new(),
                    error: Some(e),
                });
            }
        }
    }
    Ok(rows)
}

/// Coarse bracket of a jump between two adjacent sweep rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpBracket<T> {
    pub left: T,
    pub right: T,
    pub left_point: ModelPoint<T>,
    pub right_point: ModelPoint<T>,
}

/// Flags every adjacent pair of valid rows whose order parameter differs by
/// more than `jump_threshold`.
pub fn detect_jumps<T: Real>(rows: &[SweepRow<T>], jump_threshold: T) -> Vec<JumpBracket<T>> {
    rows.windows(2)
        .filter(|w| w[0].is_valid() && w[1].is_valid())
        .filter(|w| (w[1].m_total - w[0].m_total).abs() > jump_threshold)
        .map(|w| JumpBracket {
            left: w[0].param,
            right: w[1].param,
            left_point: w[0].primary_point(),
            right_point: w[1].primary_point(),
        })
        .collect()
}

/// Refined first-order transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent<T> {
    /// Midpoint of the final bracket.
    pub location: T,
    pub width: T,
    pub m_left: T,
    pub m_right: T,
    pub delta: T,
    /// `|phi_left - phi_right|` of the two branches at `location`.
    pub phi_gap: T,
}

struct Branches<T> {
    left: Option<ModelPoint<T>>,
    right: Option<ModelPoint<T>>,
}

/// Continues both branches to a new parameter value: every local maximum is
/// attributed to the nearer of the two representatives, and each branch
/// takes the nearest root attributed to it.
fn track<T: Real>(sol: &ModelSolution<T>, rep_left: &ModelPoint<T>, rep_right: &ModelPoint<T>) -> Branches<T> {
    let mut left: Option<(T, ModelPoint<T>)> = None;
    let mut right: Option<(T, ModelPoint<T>)> = None;
    for pt in sol.points.iter().filter(|p| p.stability.is_max()) {
        let dl = pt.distance(rep_left);
        let dr = pt.distance(rep_right);
        let slot = if dl <= dr { (&mut left, dl) } else { (&mut right, dr) };
        if slot.0.is_none_or(|(d, _)| slot.1 < d) {
            *slot.0 = Some((slot.1, *pt));
        }
    }
    Branches { left: left.map(|x| x.1), right: right.map(|x| x.1) }
}

fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn nearest<T: Real>(sol: &ModelSolution<T>, target: &ModelPoint<T>) -> ModelPoint<T> {
    *sol.global
        .iter()
        .min_by(|a, b| a.distance(target).partial_cmp(&b.distance(target)).unwrap())
        .expect("solution sets carry at least one global maximizer")
}

/// Locates the crossing of the two competing branches' free energies inside
/// `bracket` by bisection, down to a bracket width of `transition_tol`.
pub fn refine_transition<T: Real>(
    model: &Model<T>,
    vary: &[Param],
    bracket: &JumpBracket<T>,
    transition_tol: T,
    config: &SolverConfig<T>,
) -> Result<JumpEvent<T>, TransitionError> {
    let solve_at = |v: T| model.with(vary, v).and_then(|m| m.solve(config));
    let (mut a, mut b) = (bracket.left, bracket.right);
    let mut rep_left = nearest(&solve_at(a)?, &bracket.left_point);
    let mut rep_right = nearest(&solve_at(b)?, &bracket.right_point);
    if rep_left.distance(&rep_right) <= config.dedup_tol {
        return Err(TransitionError::NoBranchChange { left: as_f64(a), right: as_f64(b) });
    }

    while b - a > transition_tol {
        let c = a + (b - a) * lit(0.5);
        if c <= a || c >= b {
            break;
        }
        let branches = track(&solve_at(c)?, &rep_left, &rep_right);
        match (branches.left, branches.right) {
            (None, None) => return Err(TransitionError::BranchLost { at: as_f64(c) }),
            // The right branch cannot be global where it does not exist.
            (Some(l), None) => {
                a = c;
                rep_left = l;
            }
            (None, Some(r)) => {
                b = c;
                rep_right = r;
            }
            (Some(l), Some(r)) => {
                let d = l.phi - r.phi;
                if d > T::zero() {
                    a = c;
                    rep_left = l;
                } else if d < T::zero() {
                    b = c;
                    rep_right = r;
                } else {
                    a = c;
                    b = c;
                    rep_left = l;
                    rep_right = r;
                }
            }
        }
    }

    let location = a + (b - a) * lit(0.5);
    let at = track(&solve_at(location)?, &rep_left, &rep_right);
    // A steep but continuous variation leaves a single maximum at the end, or
    // two branches that never cross: the gap of a true crossing is O(width).
    let no_change = || TransitionError::NoBranchChange { left: as_f64(bracket.left), right: as_f64(bracket.right) };
    let phi_gap = match (at.left, at.right) {
        (Some(l), Some(r)) => (l.phi - r.phi).abs(),
        _ => return Err(no_change()),
    };
    if phi_gap > lit::<T>(1e3) * (b - a) + config.tie_tol {
        return Err(no_change());
    }
    Ok(JumpEvent {
        location,
        width: b - a,
        m_left: rep_left.m_total,
        m_right: rep_right.m_total,
        delta: (rep_right.m_total - rep_left.m_total).abs(),
        phi_gap,
    })
}

/// Critical value and the width of its final bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValue<T> {
    pub value: T,
    pub width: T,
}

/// Positive cubic coupling at which the paramagnetic root `m = 0` and the
/// positive stable branch have equal free energy, for `h = 0` and `J < 1`.
/// The negative crossing is the negation of this value.
pub fn critical_k_symmetric<T: Real>(j: T, config: &SolverConfig<T>) -> Result<CriticalValue<T>, TransitionError> {
    if !(j < T::one()) {
        return Err(TransitionError::NoTransition(format!(
            "J = {j} >= 1: the paramagnetic phase is never global, no positive-branch crossing"
        )));
    }
    // phi(m+) - phi(0), or -1 when no positive stable branch exists.
    let advantage = |k: T| -> Result<T, TransitionError> {
        let p = OneComponentParams::new(k, j, T::zero());
        let set = find_all_stationary_one(&p, config)?;
        let zero = set.points.iter().find(|pt| pt.location.abs() <= config.dedup_tol).map(|pt| pt.phi);
        let top = set.points.iter().filter(|pt| pt.location > config.dedup_tol && pt.stability.is_max()).last();
        Ok(match (zero, top) {
            (Some(z), Some(t)) => t.phi - z,
            _ => -T::one(),
        })
    };

    let mut lo = T::zero();
    let mut hi = T::one();
    while advantage(hi)? <= T::zero() {
        lo = hi;
        hi = hi * lit(2.0);
        if hi > lit(1e4) {
            return Err(TransitionError::NoTransition(format!("no positive-branch crossing for J = {j}")));
        }
    }
    loop {
        let mid = lo + (hi - lo) * lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if advantage(mid)? > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalValue { value: lo + (hi - lo) * lit(0.5), width: hi - lo })
}

/// Sweep rows and the refinement result of every detected jump.
pub type SweepOutcome<T> = (Vec<SweepRow<T>>, Vec<Result<JumpEvent<T>, TransitionError>>);

/// Sweeps `axis`, detects jumps and refines each one. Refinement failures are
/// returned per bracket.
pub fn sweep_transitions<T: Real>(
    spec: &SweepSpec<T>,
    options: &TransitionOptions<T>,
    config: &SolverConfig<T>,
) -> Result<SweepOutcome<T>, TransitionError> {
    let rows = sweep_1d(spec, config)?;
    let events = detect_jumps(&rows, options.jump_threshold)
        .iter()
        .map(|br| refine_transition(&spec.model, &spec.axis.vary, br, options.transition_tol, config))
        .collect();
    Ok((rows, events))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagramSpec<T> {
    pub model: Model<T>,
    pub x: Axis<T>,
    pub y: Axis<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramCell<T> {
    pub x: T,
    pub y: T,
    pub m_total: T,
    pub phi: T,
    /// Cell borders a detected jump along x.
    pub jump: bool,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram<T> {
    /// Row-major, `y` outer, `x` inner.
    pub cells: Vec<DiagramCell<T>>,
    pub nx: usize,
    pub ny: usize,
    /// Transition lines, each a sequence of `(x, y)` vertices.
    pub polylines: Vec<Vec<(T, T)>>,
}

impl<T: Real> PhaseDiagram<T> {
    pub fn cell(&self, ix: usize, iy: usize) -> &DiagramCell<T> {
        &self.cells[iy * self.nx + ix]
    }
}

/// Global order parameter on an `x` by `y` grid plus the transition lines,
/// assembled row by row from refined jumps along `x`.
pub fn phase_diagram_2d<T: Real>(
    spec: &PhaseDiagramSpec<T>,
    options: &TransitionOptions<T>,
    config: &SolverConfig<T>,
) -> Result<PhaseDiagram<T>, TransitionError> {
    spec.x.validate(&spec.model)?;
    spec.y.validate(&spec.model)?;
    if spec.x.vary.iter().any(|p| spec.y.vary.contains(p)) {
        return Err(TransitionError::InvalidSpec("axes must vary disjoint parameter sets".into()));
    }
    let cells = spec.x.steps.saturating_mul(spec.y.steps);
    if cells > options.max_cells {
        return Err(TransitionError::GridTooLarge { cells, cap: options.max_cells });
    }

    type Row<T> = (Vec<SweepRow<T>>, Vec<(JumpBracket<T>, Option<JumpEvent<T>>)>);
    let rows: Vec<Row<T>> = spec
        .y
        .values()
        .par_iter()
        .map(|&y| -> Result<_, TransitionError> {
            let model = spec.model.with(&spec.y.vary, y)?;
            let sweep = SweepSpec { model, axis: spec.x.clone() };
            let rows = sweep_1d(&sweep, config)?;
            // Steep continuous rises are dropped; other refinement failures
            // keep the coarse bracket.
            let jumps = detect_jumps(&rows, options.jump_threshold)
                .into_iter()
                .filter_map(|br| match refine_transition(&model, &spec.x.vary, &br, options.transition_tol, config) {
                    Ok(ev) => Some((br, Some(ev))),
                    Err(TransitionError::NoBranchChange { .. }) => None,
                    Err(_) => Some((br, None)),
                })
                .collect();
            Ok((rows, jumps))
        })
        .collect::<Result<_, _>>()?;

    let ys = spec.y.values();
    let mut out = Vec::with_capacity(cells);
    let mut per_row_points: Vec<Vec<(T, T)>> = Vec::with_capacity(ys.len());
    for ((row, jumps), &y) in rows.iter().zip(&ys) {
        let mut flagged = vec![false; row.len()];
        let mut points = Vec::with_capacity(jumps.len());
        for (br, ev) in jumps {
            let i = row.iter().position(|r| r.param == br.left).expect("bracket from this row");
            flagged[i] = true;
            flagged[i + 1] = true;
            let x = ev.map_or(br.left + (br.right - br.left) * lit(0.5), |e| e.location);
            points.push((x, y));
        }
        per_row_points.push(points);
        for (r, jump) in row.iter().zip(flagged) {
            out.push(DiagramCell { x: r.param, y, m_total: r.m_total, phi: r.phi, jump, valid: r.is_valid() });
        }
    }

    let reach = (spec.x.to - spec.x.from) * lit(0.25);
    let polylines = link_rows(&per_row_points, reach);

    Ok(PhaseDiagram { cells: out, nx: spec.x.steps, ny: spec.y.steps, polylines })
}

/// Joins the jump points of consecutive rows into lines. Each point continues
/// the open line whose last vertex is nearest in `x`, closest pairs first and
/// no farther than `reach`; unpaired lines end and unpaired points start new
/// lines.
fn link_rows<T: Real>(rows: &[Vec<(T, T)>], reach: T) -> Vec<Vec<(T, T)>> {
    let mut done = Vec::new();
    let mut open: Vec<Vec<(T, T)>> = Vec::new();
    for pts in rows {
        let mut pairs = Vec::new();
        for (li, line) in open.iter().enumerate() {
            let last = line[line.len() - 1].0;
            for (pi, p) in pts.iter().enumerate() {
                let d = (p.0 - last).abs();
                if d <= reach {
                    pairs.push((d, li, pi));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut line_taken = vec![false; open.len()];
        let mut assigned = vec![None; pts.len()];
        for (_, li, pi) in pairs {
            if !line_taken[li] && assigned[pi].is_none() {
                line_taken[li] = true;
                assigned[pi] = Some(li);
            }
        }
        let mut previous: Vec<Option<Vec<(T, T)>>> = open.into_iter().map(Some).collect();
        open = pts
            .iter()
            .zip(&assigned)
            .map(|(&p, a)| {
                let mut line = a.and_then(|li| previous[li].take()).unwrap_or_default();
                line.push(p);
                line
            })
            .collect();
        done.extend(previous.into_iter().flatten());
    }
    done.extend(open);
    done
}

/// AI fraction at which the global order parameter first jumps, per coupling value.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalAlphaCurve<T> {
    pub points: Vec<(T, Option<T>)>,
}

/// For each coupling value on `coupling`, sweeps `alpha` over `[0, 1]` with
/// `alpha_steps` points and refines the first jump of the order parameter.
pub fn critical_alpha_curve<T: Real>(
    model: &Model<T>,
    coupling: &Axis<T>,
    alpha_steps: usize,
    options: &TransitionOptions<T>,
    config: &SolverConfig<T>,
) -> Result<CriticalAlphaCurve<T>, TransitionError> {
    if !matches!(model, Model::Two { .. }) {
        return Err(TransitionError::InvalidSpec("critical alpha needs the two-component model".into()));
    }
    coupling.validate(model)?;
    if coupling.vary.contains(&Param::Alpha) {
        return Err(TransitionError::InvalidSpec("alpha cannot be the coupling axis".into()));
    }
    let points = coupling
        .values()
        .into_iter()
        .map(|v| {
            let base = model.with(&coupling.vary, v)?;
            Ok((v, critical_alpha(&base, alpha_steps, options, config)?.map(|e| e.location)))
        })
        .collect::<Result<_, TransitionError>>()?;
    Ok(CriticalAlphaCurve { points })
}

/// First refined jump of the order parameter along `alpha` in `[0, 1]`.
/// Coarse brackets that turn out to hold a steep continuous rise are skipped.
pub fn critical_alpha<T: Real>(
    model: &Model<T>,
    alpha_steps: usize,
    options: &TransitionOptions<T>,
    config: &SolverConfig<T>,
) -> Result<Option<JumpEvent<T>>, TransitionError> {
    let spec = SweepSpec { model: *model, axis: Axis::new(vec![Param::Alpha], T::zero(), T::one(), alpha_steps) };
    let rows = sweep_1d(&spec, config)?;
    for br in detect_jumps(&rows, options.jump_threshold) {
        match refine_transition(model, &[Param::Alpha], &br, options.transition_tol, config) {
            Ok(ev) => return Ok(Some(ev)),
            Err(TransitionError::NoBranchChange { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::phi_one;

    const PAPER_KC: f64 = 2.016295;
    /// Independent high-precision coexistence solve at J = h = 0.
    const ORACLE_KC: f64 = 2.016_254_358_100_568_8;

    fn cfg() -> SolverConfig<f64> {
        SolverConfig::default()
    }

    fn one(k: f64, j: f64, h: f64) -> Model<f64> {
        Model::One(OneComponentParams::new(k, j, h))
    }

    /// Parametric coexistence oracle: along the positive branch, `K(m)` solves
    /// stationarity; bisect `phi(m; K(m)) = ln 2` in `m`.
    fn kc_oracle(j: f64) -> f64 {
        let k_of = |m: f64| (m.atanh() - j * m) / (m * m);
        let f = |m: f64| phi_one(&OneComponentParams::new(k_of(m), j, 0.0), m).unwrap() - std::f64::consts::LN_2;
        let (mut a, mut b) = (0.3, 0.999);
        assert!(f(a) * f(b) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if f(mid) * f(a) > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        k_of(0.5 * (a + b))
    }

    #[test]
    fn param_names_round_trip() {
        for p in Param::ALL {
            assert_eq!(p.name().parse::<Param>().unwrap(), p);
        }
        assert_eq!(Param::parse_list("K112,K122").unwrap(), vec![Param::K112, Param::K122]);
        assert!(matches!("Q".parse::<Param>(), Err(TransitionError::UnknownParam(_))));
    }

    #[test]
    fn model_rejects_foreign_params() {
        let mut m = one(0.0, 0.0, 0.0);
        assert!(m.set(Param::Alpha, 0.5).is_err());
        let spec = Axis::new(vec![Param::K111], -1.0, 1.0, 3);
        assert!(spec.validate(&m).is_err());
        m.set(Param::K, 2.0).unwrap();
        assert_eq!(m.get(Param::K).unwrap(), 2.0);
    }

    #[test]
    fn internal_equilibrium_recomputes_bias() {
        let mut m = Model::two(TwoComponentParams::<f64> { k111: 1.0, j11: 1.0, alpha: 0.5, ..Default::default() });
        m.set(Param::M1Star, 0.5).unwrap();
        let p = m.resolved_two().unwrap().unwrap();
        assert!((p.h1 - (-0.2006939)).abs() < 5e-8);
    }

    #[test]
    fn axis_validation() {
        let m = one(0.0, 0.0, 0.0);
        assert!(Axis::new(vec![Param::K], 1.0, -1.0, 5).validate(&m).is_err());
        assert!(Axis::new(vec![Param::K], -1.0, 1.0, 1).validate(&m).is_err());
        assert!(Axis::new(vec![Param::K, Param::K], -1.0, 1.0, 5).validate(&m).is_err());
        let a = Axis::new(vec![Param::K], -4.0, 4.0, 801);
        assert_eq!(a.value(0), -4.0);
        assert_eq!(a.value(800), 4.0);
        assert_eq!(a.value(400), 0.0);
    }

    #[test]
    fn critical_coupling_at_zero_binary() {
        let oracle = kc_oracle(0.0);
        assert!((oracle - ORACLE_KC).abs() < 1e-9);
        let kc = critical_k_symmetric(0.0, &cfg()).unwrap();
        assert!((kc.value - PAPER_KC).abs() < 5e-5);
        assert!((kc.value - oracle).abs() < 1e-9);
        assert!(kc.width <= 1e-6);
    }

    #[test]
    fn critical_coupling_decreases_with_binary() {
        let ks: Vec<f64> =
            [0.0, 0.25, 0.5, 0.75].iter().map(|&j| critical_k_symmetric(j, &cfg()).unwrap().value).collect();
        for (k, j) in ks.iter().zip([0.0, 0.25, 0.5, 0.75]) {
            assert!((k - kc_oracle(j)).abs() < 1e-8, "J={j}: {k}");
        }
        assert!(ks.windows(2).all(|w| w[1] < w[0]));
        assert!(ks[2] > 0.0 && ks[2] < PAPER_KC);
        assert!(matches!(critical_k_symmetric(1.2, &cfg()), Err(TransitionError::NoTransition(_))));
    }

    #[test]
    fn coexistence_at_the_critical_coupling() {
        let kc = critical_k_symmetric(0.0, &cfg()).unwrap().value;
        let set = find_all_stationary_one(&OneComponentParams::new(kc, 0.0, 0.0), &cfg()).unwrap();
        assert!(set.coexistence);
        assert_eq!(set.global.len(), 2);
        assert!(set.global[0].location.abs() < 1e-12);
        assert!(set.global[1].location > 0.9);
        for g in &set.global {
            assert!((g.phi - std::f64::consts::LN_2).abs() < 1e-10);
        }
    }

    #[test]
    fn k_sweep_has_two_jumps_at_zero_binary() {
        let spec = SweepSpec { model: one(0.0, 0.0, 0.0), axis: Axis::new(vec![Param::K], -4.0, 4.0, 801) };
        let (rows, events) = sweep_transitions(&spec, &TransitionOptions::default(), &cfg()).unwrap();
        assert_eq!(rows.len(), 801);
        assert_eq!(events.len(), 2);
        let neg = events[0].as_ref().unwrap();
        let pos = events[1].as_ref().unwrap();
        assert!((neg.location + PAPER_KC).abs() < 5e-5);
        assert!((pos.location - PAPER_KC).abs() < 5e-5);
        assert!((pos.location - ORACLE_KC).abs() < 1e-7);
        for e in [neg, pos] {
            assert!(e.width <= 1e-8);
            assert!(e.phi_gap < 1e-8);
            assert!(e.delta > 0.1);
        }
        // Plateau at zero between the jumps.
        assert!(rows.iter().filter(|r| r.param.abs() < 2.0).all(|r| r.m_total.abs() < 1e-12));
    }

    #[test]
    fn constant_sweep_has_no_jumps() {
        let spec = SweepSpec { model: one(0.0, 0.0, 0.0), axis: Axis::new(vec![Param::J], -1.0, 0.5, 50) };
        let rows = sweep_1d(&spec, &cfg()).unwrap();
        assert!(detect_jumps(&rows, 0.1).is_empty());
    }

    #[test]
    fn symmetric_field_sweep_refines_to_zero() {
        let model = one(0.0, 1.2, 0.0);
        let spec = SweepSpec { model, axis: Axis::new(vec![Param::H], -0.15, 0.25, 5) };
        let rows = sweep_1d(&spec, &cfg()).unwrap();
        let jumps = detect_jumps(&rows, 0.1);
        assert_eq!(jumps.len(), 1);
        let ev = refine_transition(&model, &[Param::H], &jumps[0], 1e-12, &cfg()).unwrap();
        assert!(ev.location.abs() < 1e-12, "{}", ev.location);
        assert!((ev.m_left + ev.m_right).abs() < 1e-9);
    }

    #[test]
    fn refine_rejects_bracket_without_branch_change() {
        let model = one(0.0, 0.0, 0.0);
        let pt = ModelPoint { m1: 0.0, m2: 0.0, m_total: 0.0, phi: 0.0, stability: Stability::GlobalMax };
        let br = JumpBracket { left: 0.0, right: 1.0, left_point: pt, right_point: pt };
        assert!(matches!(
            refine_transition(&model, &[Param::K], &br, 1e-8, &cfg()),
            Err(TransitionError::NoBranchChange { .. })
        ));
    }

    #[test]
    fn coexistence_rows_keep_lower_side_branch() {
        let spec = SweepSpec { model: one(0.0, 1.2, 0.0), axis: Axis::new(vec![Param::K], -0.02, 0.02, 3) };
        let rows = sweep_1d(&spec, &cfg()).unwrap();
        assert!(rows[1].coexistence);
        assert!(rows[1].m_total < 0.0);
        assert_eq!(rows[1].tied.len(), 1);
        assert!(rows[1].tied[0] > 0.0);
        assert!(rows[2].m_total > 0.0);
    }

    #[test]
    fn equal_coupling_alpha_has_no_transition() {
        let model = Model::two(TwoComponentParams::uniform(2.1, 0.0, 0.0, 0.5));
        let cfg = SolverConfig { n_starts: 7, ..cfg() };
        assert_eq!(critical_alpha(&model, 21, &TransitionOptions::default(), &cfg).unwrap(), None);
    }

    #[test]
    fn diagram_rejects_oversized_and_overlapping_grids() {
        let model = Model::two(TwoComponentParams::uniform(0.0, 0.0, 0.0, 0.5));
        let spec = PhaseDiagramSpec {
            model,
            x: Axis::new(vec![Param::K112, Param::K122], -1.0, 1.0, 600),
            y: Axis::new(vec![Param::Alpha], 0.0, 1.0, 600),
        };
        assert!(matches!(
            phase_diagram_2d(&spec, &TransitionOptions::default(), &cfg()),
            Err(TransitionError::GridTooLarge { .. })
        ));
        let spec = PhaseDiagramSpec {
            model,
            x: Axis::new(vec![Param::K112], -1.0, 1.0, 3),
            y: Axis::new(vec![Param::K112], 0.0, 1.0, 3),
        };
        assert!(matches!(
            phase_diagram_2d(&spec, &TransitionOptions::default(), &cfg()),
            Err(TransitionError::InvalidSpec(_))
        ));
    }

    #[test]
    fn single_precision_sweep() {
        let spec = SweepSpec {
            model: Model::One(OneComponentParams::<f32>::new(0.0, 0.0, 0.0)),
            axis: Axis::new(vec![Param::K], 1.5, 2.5, 11),
        };
        let rows = sweep_1d(&spec, &SolverConfig::default()).unwrap();
        assert_eq!(detect_jumps(&rows, 0.1).len(), 1);
    }

    #[test]
    fn rows_link_by_proximity() {
        let rows =
            vec![vec![(1.9, 0.0)], vec![(-0.6, 1.0), (1.8, 1.0)], vec![(-0.5, 2.0), (1.7, 2.0)], vec![(-0.4, 3.0)]];
        let lines = link_rows(&rows, 1.0);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], vec![(1.9, 0.0), (1.8, 1.0), (1.7, 2.0)]);
        assert_eq!(lines[1], vec![(-0.6, 1.0), (-0.5, 2.0), (-0.4, 3.0)]);
        assert_eq!(link_rows(&[vec![(0.0, 0.0)], vec![(5.0, 1.0)]], 1.0).len(), 2);
    }
}

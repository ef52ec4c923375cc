//! Exact finite-N Gibbs measure and a Metropolis sampler.
//!
//! The mean-field Hamiltonian depends on a configuration only through the
//! magnetization of each group, so the partition function is a sum over
//! sectors weighted by binomial multiplicities:
//! `Z_N = sum_k C(N, k) exp(N U(m_k))`, `m_k = (2k - N) / N`.
//! All sums are accumulated in the log domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::model::{energy_one, energy_two, MagnetizationPair, OneComponentParams, TwoComponentParams};
use crate::solver::{find_all_stationary_one, SolveError, SolverConfig};

/// Random number generator behind [`metropolis`], recorded in output metadata.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.3, seed_from_u64)";

const MAX_ONE_SIZE: u64 = 10_000_000;
const MAX_SECTOR_PAIRS: u64 = 100_000_000;
const BATCHES: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("system must contain at least {min} agent(s)")]
    TooSmall { min: u64 },
    #[error("system too large for exact enumeration: {0}")]
    TooLarge(String),
    #[error("invalid Monte Carlo configuration: {0}")]
    Config(&'static str),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Finite system of `N` agents, or `N1 + N2` agents split into two groups.
/// For two groups `alpha` is taken as `N1 / N`, overriding `params.alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiniteSystem {
    One { n: u64, params: OneComponentParams<f64> },
    Two { n1: u64, n2: u64, params: TwoComponentParams<f64> },
}

impl FiniteSystem {
    pub fn size(&self) -> u64 {
        match self {
            FiniteSystem::One { n, .. } => *n,
            FiniteSystem::Two { n1, n2, .. } => n1 + n2,
        }
    }

    /// Group sizes; the one-component system is a single group.
    fn groups(&self) -> [u64; 2] {
        match self {
            FiniteSystem::One { n, .. } => [*n, 0],
            FiniteSystem::Two { n1, n2, .. } => [*n1, *n2],
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        let invalid = |e: crate::model::DomainError| OracleError::Params(e.to_string());
        match self {
            FiniteSystem::One { params, .. } => params.validate().map_err(invalid),
            FiniteSystem::Two { params, .. } => {
                TwoComponentParams { alpha: 0.5, ..*params }.validate().map_err(invalid)
            }
        }
    }

    /// `N U(m1, m2)` for group spin sums `sums`; this is `-H` on the sector.
    fn sector_energy(&self, sums: [i64; 2]) -> f64 {
        let n = self.size() as f64;
        let mag = |s: i64, size: u64| if size == 0 { 0.0 } else { s as f64 / size as f64 };
        let u = match self {
            FiniteSystem::One { n, params } => energy_one(params, mag(sums[0], *n)),
            FiniteSystem::Two { n1, n2, params } => {
                let p = TwoComponentParams { alpha: *n1 as f64 / (n1 + n2) as f64, ..*params };
                energy_two(&p, MagnetizationPair::new(mag(sums[0], *n1), mag(sums[1], *n2)))
            }
        };
        n * u.expect("sector magnetizations lie in [-1, 1]")
    }
}

/// Exact finite-N quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactResult {
    /// `(1/N) ln Z_N`.
    pub p_n: f64,
    pub mean_m: f64,
    pub mean_abs_m: f64,
    pub mean_m2: f64,
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Log-domain accumulation of `(log weight, m)` pairs.
fn reduce(n: u64, terms: impl Iterator<Item = (f64, f64)> + Clone) -> ExactResult {
    let max = terms.clone().map(|(lw, _)| lw).fold(f64::NEG_INFINITY, f64::max);
    let (mut z, mut s1, mut sa, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for (lw, m) in terms {
        let w = (lw - max).exp();
        z += w;
        s1 += w * m;
        sa += w * m.abs();
        s2 += w * m * m;
    }
    ExactResult { p_n: (max + z.ln()) / n as f64, mean_m: s1 / z, mean_abs_m: sa / z, mean_m2: s2 / z }
}

/// Exact enumeration of the one-component model over its `N + 1` sectors.
pub fn exact_one(n: u64, params: &OneComponentParams<f64>) -> Result<ExactResult, OracleError> {
    if n == 0 {
        return Err(OracleError::TooSmall { min: 1 });
    }
    if n > MAX_ONE_SIZE {
        return Err(OracleError::TooLarge(format!("N = {n} exceeds {MAX_ONE_SIZE}")));
    }
    let system = FiniteSystem::One { n, params: *params };
    system.validate()?;
    let terms = (0..=n).map(move |k| {
        let s = 2 * k as i64 - n as i64;
        (ln_binomial(n, k) + system.sector_energy([s, 0]), s as f64 / n as f64)
    });
    Ok(reduce(n, terms))
}

/// Exact enumeration of the two-component model over its `(N1 + 1)(N2 + 1)`
/// sector pairs. Moments are those of `(N1 m1 + N2 m2) / N`.
pub fn exact_two(n1: u64, n2: u64, params: &TwoComponentParams<f64>) -> Result<ExactResult, OracleError> {
    let n = n1 + n2;
    if n == 0 {
        return Err(OracleError::TooSmall { min: 1 });
    }
    if (n1 + 1).saturating_mul(n2 + 1) > MAX_SECTOR_PAIRS {
        return Err(OracleError::TooLarge(format!(
            "(N1 + 1)(N2 + 1) for N1 = {n1}, N2 = {n2} exceeds {MAX_SECTOR_PAIRS}"
        )));
    }
    let system = FiniteSystem::Two { n1, n2, params: *params };
    system.validate()?;
    let terms = (0..=n1).flat_map(move |k1| {
        (0..=n2).map(move |k2| {
            let s1 = 2 * k1 as i64 - n1 as i64;
            let s2 = 2 * k2 as i64 - n2 as i64;
            let lw = ln_binomial(n1, k1) + ln_binomial(n2, k2) + system.sector_energy([s1, s2]);
            (lw, (s1 + s2) as f64 / n as f64)
        })
    });
    Ok(reduce(n, terms))
}

impl FiniteSystem {
    pub fn exact(&self) -> Result<ExactResult, OracleError> {
        match self {
            FiniteSystem::One { n, params } => exact_one(*n, params),
            FiniteSystem::Two { n1, n2, params } => exact_two(*n1, *n2, params),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub total_sweeps: u64,
    pub burn_in_sweeps: u64,
    pub seed: u64,
    /// Record every `thinning`-th sweep after burn-in.
    pub thinning: u64,
}

impl McConfig {
    fn validate(&self) -> Result<(), OracleError> {
        if self.burn_in_sweeps >= self.total_sweeps {
            return Err(OracleError::Config("burn_in_sweeps must be smaller than total_sweeps"));
        }
        if self.thinning == 0 {
            return Err(OracleError::Config("thinning must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub mean_m: f64,
    /// Batch-means standard error over 30 batches.
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Single-spin-flip Metropolis chain on the complete graph. One sweep is `N`
/// proposals at uniformly random sites; the energy change of a flip is the
/// difference of the closed-form sector energies.
pub fn metropolis(system: &FiniteSystem, mc: &McConfig) -> Result<McResult, OracleError> {
    let n = system.size();
    if n < 2 {
        return Err(OracleError::TooSmall { min: 2 });
    }
    mc.validate()?;
    system.validate()?;

    let [n1, _] = system.groups();
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let mut spins: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut sums = [0i64; 2];
    for (i, &s) in spins.iter().enumerate() {
        sums[usize::from(i as u64 >= n1)] += i64::from(s);
    }
    let mut energy = system.sector_energy(sums);

    let mut samples = Vec::with_capacity(((mc.total_sweeps - mc.burn_in_sweeps) / mc.thinning) as usize);
    for sweep in 1..=mc.total_sweeps {
        for _ in 0..n {
            let site = rng.gen_range(0..n) as usize;
            let group = usize::from(site as u64 >= n1);
            let mut proposed = sums;
            proposed[group] -= 2 * i64::from(spins[site]);
            let new_energy = system.sector_energy(proposed);
            // H = -N U, so dH = -(new - old).
            let delta_h = energy - new_energy;
            if delta_h <= 0.0 || rng.gen::<f64>() < (-delta_h).exp() {
                spins[site] = -spins[site];
                sums = proposed;
                energy = new_energy;
            }
        }
        if sweep > mc.burn_in_sweeps && (sweep - mc.burn_in_sweeps).is_multiple_of(mc.thinning) {
            samples.push((sums[0] + sums[1]) as f64 / n as f64);
        }
    }

    let (mean_m, std_error) = batch_means(&samples);
    Ok(McResult { mean_m, std_error, n_samples: samples.len() as u64, seed: mc.seed })
}

/// Mean of all samples and the batch-means standard error.
fn batch_means(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let batches = BATCHES.min(n);
    if batches < 2 {
        return (mean, 0.0);
    }
    let size = n / batches;
    let means: Vec<f64> =
        samples.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub p_n: f64,
    /// `p_N - p`, with `p` the variational supremum.
    pub gap: f64,
}

/// Finite-N free energies against the thermodynamic limit `sup phi`.
pub fn convergence_report(
    params: &OneComponentParams<f64>,
    sizes: &[u64],
    config: &SolverConfig<f64>,
) -> Result<Vec<ConvergenceRow>, OracleError> {
    let limit = find_all_stationary_one(params, config)?.primary().phi;
    sizes
        .iter()
        .map(|&n| {
            let p_n = exact_one(n, params)?.p_n;
            Ok(ConvergenceRow { n, p_n, gap: p_n - limit })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn single_agent() {
        let r = exact_one(1, &OneComponentParams::new(0.0, 0.0, 0.0)).unwrap();
        assert!((r.p_n - LN2).abs() < 1e-15);
        assert_eq!(r.mean_m, 0.0);

        let (k, j, h) = (3.0f64, 2.0, 1.0);
        let r = exact_one(1, &OneComponentParams::new(k, j, h)).unwrap();
        let direct = ((k / 3.0 + j / 2.0 + h).exp() + (-k / 3.0 + j / 2.0 - h).exp()).ln();
        assert!((r.p_n - direct).abs() < 1e-14);
    }

    #[test]
    fn two_free_agents() {
        let r = exact_two(1, 1, &TwoComponentParams::default()).unwrap();
        assert!((r.p_n - LN2).abs() < 1e-15);
        assert!(r.mean_m.abs() < 1e-15);
    }

    #[test]
    fn free_spins_everywhere() {
        for n in [1, 7, 100, 2000] {
            let r = exact_one(n, &OneComponentParams::new(0.0, 0.0, 0.0)).unwrap();
            assert!((r.p_n - LN2).abs() < 1e-12, "N={n}: {}", r.p_n);
        }
        let rows =
            convergence_report(&OneComponentParams::new(0.0, 0.0, 0.0), &[10, 500], &SolverConfig::default()).unwrap();
        assert!(rows.iter().all(|r| r.gap.abs() < 1e-12));
    }

    #[test]
    fn independent_spins_follow_tanh() {
        for n in [1, 5, 300] {
            let r = exact_one(n, &OneComponentParams::new(0.0, 0.0, 0.37)).unwrap();
            assert!((r.mean_m - 0.37f64.tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_groups_preserves_free_energy() {
        let p = TwoComponentParams::uniform(1.3, 0.4, -0.2, 0.0);
        let a = exact_two(300, 700, &p).unwrap();
        let b = exact_two(700, 300, &p).unwrap();
        assert!((a.p_n - b.p_n).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        let p = OneComponentParams::new(0.0, 0.0, 0.0);
        assert_eq!(exact_one(0, &p), Err(OracleError::TooSmall { min: 1 }));
        assert!(matches!(exact_one(MAX_ONE_SIZE + 1, &p), Err(OracleError::TooLarge(_))));
        assert!(exact_two(0, 0, &TwoComponentParams::default()).is_err());
        assert!(matches!(exact_two(20_000, 20_000, &TwoComponentParams::default()), Err(OracleError::TooLarge(_))));
        let mc = McConfig { total_sweeps: 10, burn_in_sweeps: 1, seed: 1, thinning: 1 };
        assert!(metropolis(&FiniteSystem::One { n: 1, params: p }, &mc).is_err());
        let bad = McConfig { burn_in_sweeps: 10, ..mc };
        assert!(metropolis(&FiniteSystem::One { n: 10, params: p }, &bad).is_err());
    }

    #[test]
    fn empty_group_is_absent() {
        let p = TwoComponentParams { k111: 5.0, j11: 2.0, h1: 1.0, k222: 1.2, j22: 0.3, h2: 0.1, ..Default::default() };
        let two = exact_two(0, 40, &p).unwrap();
        let one = exact_one(40, &p.isolated(1)).unwrap();
        assert!((two.p_n - one.p_n).abs() < 1e-13);
        assert!((two.mean_m - one.mean_m).abs() < 1e-13);
    }

    #[test]
    fn batch_means_of_constant_series() {
        let (m, se) = batch_means(&[0.25; 90]);
        assert_eq!(m, 0.25);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn sampler_is_seeded() {
        let sys = FiniteSystem::One { n: 50, params: OneComponentParams::new(0.5, 0.3, 0.1) };
        let mc = McConfig { total_sweeps: 300, burn_in_sweeps: 50, seed: 9, thinning: 2 };
        let a = metropolis(&sys, &mc).unwrap();
        let b = metropolis(&sys, &mc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_samples, 125);
        let c = metropolis(&sys, &McConfig { seed: 10, ..mc }).unwrap();
        assert_ne!(a.mean_m, c.mean_m);
    }
}

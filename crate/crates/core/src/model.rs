//! Parameters and free-energy functionals of the cubic mean-field model.
//!
//! The one-component functional is `phi(m) = U(m) - I(m)` with
//! `U(m) = K m^3 / 3 + J m^2 / 2 + h m` and the binary entropy term
//! `I(m) = (1-m)/2 ln((1-m)/2) + (1+m)/2 ln((1+m)/2)`.
//!
//! The two-component functional weighs each group's entropy by its relative
//! size `alpha_1 = alpha`, `alpha_2 = 1 - alpha`. Mixed cubic couplings are
//! stored in their canonical form (`K112`, `K122`) and expanded to a fully
//! symmetric tensor whenever the stationarity field is evaluated.

use thiserror::Error;

use crate::num::{lit, Real};

/// Invalid argument passed to a functional.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("magnetization {0} lies outside [-1, 1]")]
    OutOfRange(f64),
    #[error("magnetization {0} is not strictly inside (-1, 1)")]
    NotInterior(f64),
    #[error("alpha {0} lies outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
}

fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn check_closed<T: Real>(m: T) -> Result<(), DomainError> {
    // NaN fails both comparisons.
    if m >= -T::one() && m <= T::one() {
        Ok(())
    } else {
        Err(DomainError::OutOfRange(as_f64(m)))
    }
}

pub(crate) fn check_open<T: Real>(m: T) -> Result<(), DomainError> {
    if m > -T::one() && m < T::one() {
        Ok(())
    } else {
        Err(DomainError::NotInterior(as_f64(m)))
    }
}

fn check_finite<T: Real>(name: &'static str, x: T) -> Result<(), DomainError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(DomainError::NonFinite(name))
    }
}

/// Couplings of the one-component model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OneComponentParams<T> {
    /// Cubic coupling.
    pub k: T,
    /// Binary coupling.
    pub j: T,
    /// Uniform bias.
    pub h: T,
}

impl<T: Real> OneComponentParams<T> {
    pub fn new(k: T, j: T, h: T) -> Self {
        Self { k, j, h }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        check_finite("K", self.k)?;
        check_finite("J", self.j)?;
        check_finite("h", self.h)
    }

    /// Spin-flipped couplings `(-K, J, -h)`.
    pub fn flipped(&self) -> Self {
        Self { k: -self.k, j: self.j, h: -self.h }
    }

    /// Argument of `tanh` in the self-consistency equation `m = tanh(K m^2 + J m + h)`.
    #[inline]
    pub fn local_field(&self, m: T) -> T {
        (self.k * m + self.j) * m + self.h
    }

    /// `|m - tanh(K m^2 + J m + h)|`.
    pub fn residual(&self, m: T) -> T {
        (m - self.local_field(m).tanh()).abs()
    }
}

/// Couplings and composition of the two-component model. Component 1 is the
/// AI group with relative size `alpha`, component 2 the human group.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoComponentParams<T> {
    pub k111: T,
    pub k112: T,
    pub k122: T,
    pub k222: T,
    pub j11: T,
    pub j12: T,
    pub j22: T,
    pub h1: T,
    pub h2: T,
    pub alpha: T,
}

impl<T: Real> TwoComponentParams<T> {
    /// Every cubic coupling equal to `k`, every binary one equal to `j`, both biases `h`.
    pub fn uniform(k: T, j: T, h: T, alpha: T) -> Self {
        Self { k111: k, k112: k, k122: k, k222: k, j11: j, j12: j, j22: j, h1: h, h2: h, alpha }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        for (name, v) in [
            ("K111", self.k111),
            ("K112", self.k112),
            ("K122", self.k122),
            ("K222", self.k222),
            ("J11", self.j11),
            ("J12", self.j12),
            ("J22", self.j22),
            ("h1", self.h1),
            ("h2", self.h2),
            ("alpha", self.alpha),
        ] {
            check_finite(name, v)?;
        }
        if self.alpha < T::zero() || self.alpha > T::one() {
            return Err(DomainError::AlphaOutOfRange(as_f64(self.alpha)));
        }
        Ok(())
    }

    /// Relative group sizes `(alpha_1, alpha_2)`.
    #[inline]
    pub fn weights(&self) -> [T; 2] {
        [self.alpha, T::one() - self.alpha]
    }

    /// Symmetric cubic tensor entry; indices are 0-based group labels.
    #[inline]
    pub fn cubic(&self, l: usize, p: usize, q: usize) -> T {
        match l + p + q {
            0 => self.k111,
            1 => self.k112,
            2 => self.k122,
            _ => self.k222,
        }
    }

    /// Symmetric binary coupling matrix entry.
    #[inline]
    pub fn binary(&self, l: usize, p: usize) -> T {
        match l + p {
            0 => self.j11,
            1 => self.j12,
            _ => self.j22,
        }
    }

    #[inline]
    pub fn bias(&self, l: usize) -> T {
        if l == 0 {
            self.h1
        } else {
            self.h2
        }
    }

    /// One-component couplings felt by group `l` in isolation.
    pub fn isolated(&self, l: usize) -> OneComponentParams<T> {
        OneComponentParams::new(self.cubic(l, l, l), self.binary(l, l), self.bias(l))
    }

    /// Spin-flipped model: cubic couplings and biases negated.
    pub fn flipped(&self) -> Self {
        Self {
            k111: -self.k111,
            k112: -self.k112,
            k122: -self.k122,
            k222: -self.k222,
            h1: -self.h1,
            h2: -self.h2,
            ..*self
        }
    }

    /// Field of group `l`: `h_l + sum_{p,q} alpha_p (J_lp + alpha_q K_lpq m_q) m_p`.
    pub fn local_field(&self, l: usize, m: MagnetizationPair<T>) -> T {
        let a = self.weights();
        let mv = m.as_array();
        let mut field = self.bias(l);
        for p in 0..2 {
            let mut inner = self.binary(l, p);
            for q in 0..2 {
                inner = inner + a[q] * self.cubic(l, p, q) * mv[q];
            }
            field = field + a[p] * inner * mv[p];
        }
        field
    }

    /// Componentwise residual `max_l |m_l - tanh(field_l)|`.
    pub fn residual(&self, m: MagnetizationPair<T>) -> T {
        let r1 = (m.m1 - self.local_field(0, m).tanh()).abs();
        let r2 = (m.m2 - self.local_field(1, m).tanh()).abs();
        r1.max(r2)
    }
}

/// Average opinions of the two groups: `m1` for AI agents, `m2` for humans.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MagnetizationPair<T> {
    pub m1: T,
    pub m2: T,
}

impl<T: Real> MagnetizationPair<T> {
    pub fn new(m1: T, m2: T) -> Self {
        Self { m1, m2 }
    }

    #[inline]
    pub fn as_array(&self) -> [T; 2] {
        [self.m1, self.m2]
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Self) -> T {
        (self.m1 - other.m1).hypot(self.m2 - other.m2)
    }

    fn check_closed(&self) -> Result<(), DomainError> {
        check_closed(self.m1)?;
        check_closed(self.m2)
    }

    fn check_open(&self) -> Result<(), DomainError> {
        check_open(self.m1)?;
        check_open(self.m2)
    }
}

/// `x ln x` with the convention `0 ln 0 = 0`.
#[inline]
fn xlogx<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// Binary entropy term `I(m)`, in `[-ln 2, 0]`.
pub fn entropy_term<T: Real>(m: T) -> Result<T, DomainError> {
    check_closed(m)?;
    let half = lit::<T>(0.5);
    Ok(xlogx(half * (T::one() - m)) + xlogx(half * (T::one() + m)))
}

pub fn energy_one<T: Real>(p: &OneComponentParams<T>, m: T) -> Result<T, DomainError> {
    check_closed(m)?;
    Ok(((p.k / lit(3.0) * m + p.j / lit(2.0)) * m + p.h) * m)
}

/// `phi(m) = U(m) - I(m)`; its supremum over `[-1, 1]` is the limiting free energy.
pub fn phi_one<T: Real>(p: &OneComponentParams<T>, m: T) -> Result<T, DomainError> {
    Ok(energy_one(p, m)? - entropy_term(m)?)
}

/// `phi'(m) = K m^2 + J m + h - artanh(m)`.
pub fn grad_phi_one<T: Real>(p: &OneComponentParams<T>, m: T) -> Result<T, DomainError> {
    check_open(m)?;
    Ok(p.local_field(m) - m.atanh())
}

/// `phi''(m) = 2 K m + J - 1 / (1 - m^2)`.
pub fn second_deriv_phi_one<T: Real>(p: &OneComponentParams<T>, m: T) -> Result<T, DomainError> {
    check_open(m)?;
    Ok(lit::<T>(2.0) * p.k * m + p.j - (T::one() - m * m).recip())
}

/// Two-component energy, term by term.
pub fn energy_two<T: Real>(p: &TwoComponentParams<T>, m: MagnetizationPair<T>) -> Result<T, DomainError> {
    m.check_closed()?;
    let [a1, a2] = p.weights();
    let (m1, m2) = (m.m1, m.m2);
    let three = lit::<T>(3.0);
    let two = lit::<T>(2.0);
    let cubic = p.k111 * a1.powi(3) * m1.powi(3)
        + three * p.k112 * a1 * a1 * a2 * m1 * m1 * m2
        + three * p.k122 * a1 * a2 * a2 * m1 * m2 * m2
        + p.k222 * a2.powi(3) * m2.powi(3);
    let binary = p.j11 * a1 * a1 * m1 * m1 + two * p.j12 * a1 * a2 * m1 * m2 + p.j22 * a2 * a2 * m2 * m2;
    let bias = p.h1 * a1 * m1 + p.h2 * a2 * m2;
    Ok(cubic / three + binary / two + bias)
}

/// `Phi(m1, m2) = U(m1, m2) - alpha_1 I(m1) - alpha_2 I(m2)`.
pub fn phi_two<T: Real>(p: &TwoComponentParams<T>, m: MagnetizationPair<T>) -> Result<T, DomainError> {
    let [a1, a2] = p.weights();
    Ok(energy_two(p, m)? - a1 * entropy_term(m.m1)? - a2 * entropy_term(m.m2)?)
}

/// Gradient of `Phi`: component `l` is `alpha_l (field_l - artanh(m_l))`.
pub fn grad_phi_two<T: Real>(p: &TwoComponentParams<T>, m: MagnetizationPair<T>) -> Result<[T; 2], DomainError> {
    m.check_open()?;
    let a = p.weights();
    let mv = m.as_array();
    Ok([0, 1].map(|l| a[l] * (p.local_field(l, m) - mv[l].atanh())))
}

/// Hessian of `Phi`, symmetric by construction.
pub fn hessian_phi_two<T: Real>(
    p: &TwoComponentParams<T>,
    m: MagnetizationPair<T>,
) -> Result<[[T; 2]; 2], DomainError> {
    m.check_open()?;
    let a = p.weights();
    let mv = m.as_array();
    let two = lit::<T>(2.0);
    let mut hess = [[T::zero(); 2]; 2];
    for l in 0..2 {
        for r in l..2 {
            // d field_l / d m_r = alpha_r (J_lr + 2 sum_q alpha_q K_lrq m_q)
            let mut cubic = T::zero();
            for q in 0..2 {
                cubic = cubic + a[q] * p.cubic(l, r, q) * mv[q];
            }
            let mut entry = a[l] * a[r] * (p.binary(l, r) + two * cubic);
            if l == r {
                entry = entry - a[l] / (T::one() - mv[l] * mv[l]);
            }
            hess[l][r] = entry;
            hess[r][l] = entry;
        }
    }
    Ok(hess)
}

/// Bias that makes `m_star` a fixed point of an isolated group:
/// `h = artanh(m*) - K m*^2 - J m*`.
pub fn bias_from_internal_equilibrium<T: Real>(m_star: T, k_diag: T, j_diag: T) -> Result<T, DomainError> {
    check_open(m_star)?;
    Ok(m_star.atanh() - k_diag * m_star * m_star - j_diag * m_star)
}

/// Combined order parameter `alpha m1 + (1 - alpha) m2`.
pub fn total_magnetization<T: Real>(alpha: T, m: MagnetizationPair<T>) -> T {
    alpha * m.m1 + (T::one() - alpha) * m.m2
}

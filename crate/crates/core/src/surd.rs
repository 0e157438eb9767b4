//! Exact numbers `r + s·√d` with rational `r, s` and squarefree `d`.
//!
//! Used to decide momentum matching between cavity and lattice k-grids
//! without rounding. Arithmetic is checked: overflow yields `None`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Surd {
    rational: Rational,
    coeff: Rational,
    /// Squarefree; 1 whenever `coeff` is zero.
    radicand: u64,
}

impl Surd {
    pub fn new(rational: Rational, coeff: Rational, radicand: u64) -> Option<Self> {
        if radicand == 0 {
            return Some(Self::from_rational(rational));
        }
        let mut rest = radicand;
        let mut square_root: i128 = 1;
        let mut f: u64 = 2;
        while f.checked_mul(f)? <= rest {
            while rest.is_multiple_of(f * f) {
                rest /= f * f;
                square_root = square_root.checked_mul(f as i128)?;
            }
            f += 1;
        }
        let coeff = coeff.checked_mul(&Rational::from_integer(square_root))?;
        if rest == 1 {
            return Some(Self::from_rational(rational.checked_add(&coeff)?));
        }
        if coeff.is_zero() {
            return Some(Self::from_rational(rational));
        }
        Some(Self { rational, coeff, radicand: rest })
    }

    pub fn from_rational(rational: Rational) -> Self {
        Self { rational, coeff: Rational::zero(), radicand: 1 }
    }

    pub fn integer(n: i128) -> Self {
        Self::from_rational(Rational::from_integer(n))
    }

    pub fn ratio(numer: i128, denom: i128) -> Option<Self> {
        (denom != 0).then(|| Self::from_rational(Rational::new(numer, denom)))
    }

    pub fn rational_part(&self) -> Rational {
        self.rational
    }

    pub fn surd_part(&self) -> (Rational, u64) {
        (self.coeff, self.radicand)
    }

    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.coeff.is_zero()
    }

    fn common_radicand(&self, other: &Self) -> Option<u64> {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => Some(other.radicand),
            (_, true) => Some(self.radicand),
            _ => (self.radicand == other.radicand).then_some(self.radicand),
        }
    }

    /// `None` on overflow or when both operands carry different surds.
    pub fn checked_add(&self, other: &Self) -> Option<Self> {
        let d = self.common_radicand(other)?;
        Self::new(self.rational.checked_add(&other.rational)?, self.coeff.checked_add(&other.coeff)?, d)
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let d = self.common_radicand(other)?;
        Self::new(self.rational.checked_sub(&other.rational)?, self.coeff.checked_sub(&other.coeff)?, d)
    }

    pub fn checked_scale(&self, factor: Rational) -> Option<Self> {
        Self::new(self.rational.checked_mul(&factor)?, self.coeff.checked_mul(&factor)?, self.radicand)
    }

    /// `(r + s√d)⁻¹ = (r − s√d)/(r² − s²d)`; `None` at zero.
    pub fn checked_recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let d = Rational::from_integer(self.radicand as i128);
        let norm = self
            .rational
            .checked_mul(&self.rational)?
            .checked_sub(&self.coeff.checked_mul(&self.coeff)?.checked_mul(&d)?)?;
        Self::new(self.rational.checked_div(&norm)?, (-self.coeff).checked_div(&norm)?, self.radicand)
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.is_rational() {
            r
        } else {
            r + self.coeff.to_f64().unwrap_or(f64::NAN) * (self.radicand as f64).sqrt()
        }
    }

    /// Sign of the exact value.
    pub fn signum(&self) -> Ordering {
        let zero = Rational::zero();
        let r = self.rational.cmp(&zero);
        let s = self.coeff.cmp(&zero);
        if r == s || s == Ordering::Equal {
            return r;
        }
        if r == Ordering::Equal {
            return s;
        }
        // opposite signs: compare r² with s²d
        let d = Rational::from_integer(self.radicand as i128);
        let lhs = self.rational.checked_mul(&self.rational);
        let rhs = self.coeff.checked_mul(&self.coeff).and_then(|v| v.checked_mul(&d));
        let order = match (lhs, rhs) {
            (Some(l), Some(r)) => l.cmp(&r),
            _ => self
                .rational
                .to_f64()
                .unwrap_or(0.0)
                .abs()
                .total_cmp(&(self.coeff.to_f64().unwrap_or(0.0).abs() * (self.radicand as f64).sqrt())),
        };
        match order {
            Ordering::Greater => r,
            Ordering::Less => s,
            Ordering::Equal => Ordering::Equal,
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.coeff.is_zero()) {
            (_, true) => write!(f, "{}", self.rational),
            (true, false) => write!(f, "{}*sqrt({})", self.coeff, self.radicand),
            (false, false) => write!(f, "{}+{}*sqrt({})", self.rational, self.coeff, self.radicand),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseSurdError(pub String);

impl fmt::Display for ParseSurdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot parse exact number: {}", self.0)
    }
}

impl std::error::Error for ParseSurdError {}

fn parse_rational(s: &str) -> Result<Rational, ParseSurdError> {
    let err = || ParseSurdError(format!("{s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| err())?;
        let d: i128 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
            return Err(err());
        }
        let negative = int.trim_start().starts_with('-');
        let int: i128 = if int.is_empty() || int == "-" || int == "+" { 0 } else { int.parse().map_err(|_| err())? };
        let scale = 10i128.pow(frac.len() as u32);
        let frac: i128 = frac.parse().map_err(|_| err())?;
        let magnitude = int.abs().checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(err)?;
        return Ok(Rational::new(if negative { -magnitude } else { magnitude }, scale));
    }
    s.parse::<i128>().map(Rational::from_integer).map_err(|_| err())
}

/// Accepts `p`, `p/q`, `x.y`, `sqrt(d)`, and `<rational>*sqrt(d)`.
impl FromStr for Surd {
    type Err = ParseSurdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = || ParseSurdError(format!("{s:?}"));
        let (factor, radical) = match compact.find("sqrt(") {
            None => (compact.as_str(), None),
            Some(pos) => {
                let inner = compact[pos + 5..].strip_suffix(')').ok_or_else(err)?;
                let d: u64 = inner.parse().map_err(|_| err())?;
                let factor = compact[..pos].strip_suffix('*').unwrap_or(&compact[..pos]);
                (factor, Some(d))
            }
        };
        let factor = if factor.is_empty() { Rational::from_integer(1) } else { parse_rational(factor)? };
        match radical {
            None => Ok(Self::from_rational(factor)),
            Some(d) => Self::new(Rational::zero(), factor, d).ok_or_else(err),
        }
    }
}

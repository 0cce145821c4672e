//! Scalar mean-field fixed points and the per-spin free-energy functional.
//!
//! Everything here is a plain bisection on a guaranteed sign-changing
//! bracket; no damping heuristics, no Newton steps. Results carry their own
//! residual so downstream consumers can assert solver quality instead of
//! trusting it.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A limit constant in `[0, +inf]`. Infinite limits are represented
/// symbolically, never as large floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitConstant {
    Finite(f64),
    Infinite,
}

impl LimitConstant {
    pub fn is_infinite(&self) -> bool {
        matches!(self, LimitConstant::Infinite)
    }

    pub fn as_finite(&self) -> Option<f64> {
        match self {
            LimitConstant::Finite(x) => Some(*x),
            LimitConstant::Infinite => None,
        }
    }

    /// True for the exact zero limit.
    pub fn is_zero(&self) -> bool {
        matches!(self, LimitConstant::Finite(x) if *x == 0.0)
    }
}

impl std::fmt::Display for LimitConstant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitConstant::Finite(x) => write!(f, "{x}"),
            LimitConstant::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for LimitConstant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // JSON has no infinity literal; spell it out as a string.
        match self {
            LimitConstant::Finite(x) => s.serialize_f64(*x),
            LimitConstant::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for LimitConstant {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = LimitConstant;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a finite number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> std::result::Result<Self::Value, E> {
                Ok(LimitConstant::Finite(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> std::result::Result<Self::Value, E> {
                Ok(LimitConstant::Finite(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> std::result::Result<Self::Value, E> {
                Ok(LimitConstant::Finite(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Self::Value, E> {
                if s == "inf" {
                    Ok(LimitConstant::Infinite)
                } else {
                    Err(E::custom(format!("expected \"inf\", got \"{s}\"")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

impl From<f64> for LimitConstant {
    fn from(x: f64) -> Self {
        LimitConstant::Finite(x)
    }
}

/// Root of a scalar fixed-point equation together with solve diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FixedPointResult {
    /// The located root.
    pub value: f64,
    /// `|value - rhs(value)|` evaluated after the solve.
    pub residual: f64,
    /// Bisection steps taken (0 when the root is known in closed form).
    pub iterations: u32,
}

/// Bracket width at which bisection stops.
const BRACKET_TOL: f64 = 1e-14;

/// Bisect `f` on `[lo, hi]` assuming `f(lo) < 0 <= f(hi)`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, u32) {
    let mut iterations = 0;
    while hi - lo > BRACKET_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket no longer representable
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    (0.5 * (lo + hi), iterations)
}

/// Largest solution in `[0, 1]` of `z = tanh(gamma z)`.
///
/// Returns 0 for `gamma <= 1` (the only root) and the positive root for
/// `gamma > 1`, located by bisection to a bracket width of 1e-14.
pub fn solve_cw(gamma: f64) -> Result<FixedPointResult> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must be finite and > 0"
        )));
    }
    if gamma <= 1.0 {
        return Ok(FixedPointResult {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }
    let f = |z: f64| z - (gamma * z).tanh();
    // f < 0 just right of the origin because tanh'(0) = gamma > 1.
    let (value, iterations) = bisect(f64::MIN_POSITIVE, 1.0, f);
    Ok(FixedPointResult {
        value,
        residual: f(value).abs(),
        iterations,
    })
}

/// Largest solution of `x = tanh(beta x + h)` for a field `h >= 0`.
///
/// For `h > 0` the largest root is the unique root in `(0, 1]`; for `h = 0`
/// this reduces to [`solve_cw`].
pub fn solve_cw_field(beta: f64, h: f64) -> Result<FixedPointResult> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must be finite and > 0"
        )));
    }
    if !h.is_finite() || h < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "field h = {h} must be finite and >= 0"
        )));
    }
    if h == 0.0 {
        return solve_cw(beta);
    }
    let f = |x: f64| x - (beta * x + h).tanh();
    // f(0) = -tanh(h) < 0 and f(1) = 1 - tanh(beta + h) > 0; any negative
    // roots lie outside this bracket, so bisection lands on the largest root.
    let (value, iterations) = bisect(0.0, 1.0, f);
    Ok(FixedPointResult {
        value,
        residual: f(value).abs(),
        iterations,
    })
}

/// Middle-block limit magnetization `m(c)`: the largest solution of
/// `x = tanh(beta x + sqrt(2) c m*)` where `m* = solve_cw(beta)`.
///
/// `m(0) = m*` and `m(inf) = 1` exactly (the saturated middle block).
pub fn m_of_c(beta: f64, c: LimitConstant) -> Result<f64> {
    if !beta.is_finite() || beta <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must be finite and > 1 for a nonzero spontaneous magnetization"
        )));
    }
    match c {
        LimitConstant::Infinite => Ok(1.0),
        LimitConstant::Finite(c) => {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "c = {c} must be finite and >= 0"
                )));
            }
            let m_star = solve_cw(beta)?.value;
            Ok(solve_cw_field(beta, std::f64::consts::SQRT_2 * c * m_star)?.value)
        }
    }
}

/// Spin entropy `s(x) = -((1+x)/2) ln((1+x)/2) - ((1-x)/2) ln((1-x)/2)`,
/// with the endpoint convention `s(+-1) = 0`.
pub fn spin_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() || !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!(
            "x = {x} outside [-1, 1]"
        )));
    }
    let half = |q: f64| if q == 0.0 { 0.0 } else { -q * q.ln() };
    Ok(half(0.5 * (1.0 + x)) + half(0.5 * (1.0 - x)))
}

/// Per-spin free-energy functional `F_beta(x) = (beta/2) x^2 - ln 2 + s(x)`.
///
/// Sign convention: Gibbs block weights scale like `exp(n F_beta(m))`, so the
/// functional is *maximized* at the equilibrium magnetizations `+-m*(beta)`,
/// with `F_beta(0) = 0` at criticality of the entropy term.
pub fn free_energy(beta: f64, x: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must be finite and > 0"
        )));
    }
    Ok(0.5 * beta * x * x - std::f64::consts::LN_2 + spin_entropy(x)?)
}

//! High-precision evaluation of the probability inequalities behind the pipeline.
//!
//! Each inequality `lhs < rhs` is written once as a small expression tree over Δ and evaluated
//! in natural-log space at a working precision of at least 256 bits, so quantities such as
//! Δ^{-50/3} at Δ = 10^60 never underflow. A second route evaluates the same tree by direct
//! arithmetic and takes the log at the end; [`cross_check`] compares the two wherever the
//! direct value is representable.
//!
//! Every constant comes from [`PipelineConfig`]; the proof-structure constants (the 48 of the
//! permutation inequality, the 32 of the Azuma step, the LLL targets 1/(5Δ⁴), 1/(20Δ⁴) and
//! 1/(40Δ⁴)) are fixed by the shape of the argument and live here.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::ops;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::config::PipelineConfig;
use crate::error::BoundsError;

const RM: RoundingMode = RoundingMode::ToEven;
const MIN_PRECISION: usize = 256;
const MAX_PRECISION: usize = 1 << 14;

/// Relative tolerance between the log-space and direct evaluation routes.
pub const ROUTE_TOLERANCE: f64 = 1e-9;

fn precision_for_bits(bits: usize) -> usize {
    (bits + 128).clamp(MIN_PRECISION, MAX_PRECISION)
}

fn consts() -> Consts {
    Consts::new().expect("allocating the constants cache")
}

/// A value of Δ > 1 held at a working precision wide enough to represent it exactly when it is
/// an integer of at most about 16000 bits.
#[derive(Clone, Debug)]
pub struct Delta {
    value: BigFloat,
    ln: BigFloat,
    p: usize,
    integer: BigUint,
    label: String,
}

impl Delta {
    pub fn from_biguint(n: &BigUint) -> Result<Self, BoundsError> {
        if *n < BigUint::from(2u32) {
            return Err(BoundsError::DeltaTooSmall(n.to_string()));
        }
        let p = precision_for_bits(n.bits() as usize);
        let mut cc = consts();
        let value = BigFloat::parse(&n.to_string(), Radix::Dec, p, RM, &mut cc);
        let ln = value.ln(p, RM, &mut cc);
        Ok(Delta { value, ln, p, integer: n.clone(), label: n.to_string() })
    }

    pub fn from_u64(n: u64) -> Result<Self, BoundsError> {
        Self::from_biguint(&BigUint::from(n))
    }

    /// Δ = e^x.
    pub fn from_ln(x: f64) -> Result<Self, BoundsError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(BoundsError::DeltaTooSmall(format!("e^{x}")));
        }
        let p = precision_for_bits((x / LN_2).ceil() as usize + 1);
        let mut cc = consts();
        let ln = BigFloat::from_f64(x, p);
        let value = ln.exp(p, RM, &mut cc);
        Self::from_parts(value, ln, p, format!("e^{x}"), &mut cc)
    }

    /// Accepts an integer (`1000000`), a decimal or scientific literal (`1e60`, `2.5e9`), or
    /// `e^X` for Δ = e^X.
    pub fn parse(s: &str) -> Result<Self, BoundsError> {
        let s = s.trim();
        let bad = || BoundsError::Parse(s.to_string());
        if let Some(x) = s.strip_prefix("e^") {
            return Self::from_ln(x.parse::<f64>().map_err(|_| bad())?);
        }
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
            return Self::from_biguint(&s.parse::<BigUint>().map_err(|_| bad())?);
        }
        // Reject anything f64 would not accept as a literal, then re-parse at full width.
        if s.parse::<f64>().is_err() || s.contains(['i', 'I', 'n', 'N']) {
            return Err(bad());
        }
        let mut cc = consts();
        let rough = BigFloat::parse(s, Radix::Dec, 64, RM, &mut cc);
        if rough.is_nan() || rough.is_inf() {
            return Err(bad());
        }
        let bits = rough.exponent().unwrap_or(0).max(0) as usize;
        let p = precision_for_bits(bits);
        let value = BigFloat::parse(s, Radix::Dec, p, RM, &mut cc);
        let one = BigFloat::from_u8(1, p);
        if value.cmp(&one).is_none_or(|c| c <= 0) {
            return Err(BoundsError::DeltaTooSmall(s.to_string()));
        }
        let ln = value.ln(p, RM, &mut cc);
        Self::from_parts(value, ln, p, s.to_string(), &mut cc)
    }

    fn from_parts(
        value: BigFloat,
        ln: BigFloat,
        p: usize,
        label: String,
        cc: &mut Consts,
    ) -> Result<Self, BoundsError> {
        let floor = value.floor();
        let integer = decimal_to_biguint(&floor.format(Radix::Dec, RM, cc).map_err(|_| {
            BoundsError::Parse(label.clone())
        })?)
        .ok_or_else(|| BoundsError::Parse(label.clone()))?;
        if integer < BigUint::from(1u32) {
            return Err(BoundsError::DeltaTooSmall(label));
        }
        Ok(Delta { value, ln, p, integer, label })
    }

    /// Natural log of Δ, rounded to f64.
    pub fn ln_f64(&self) -> f64 {
        to_f64(&self.ln, &mut consts())
    }

    /// Working precision in bits.
    pub fn precision(&self) -> usize {
        self.p
    }

    /// ⌊Δ⌋ (exact for integer inputs).
    pub fn floor(&self) -> &BigUint {
        &self.integer
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Integer part of a decimal literal such as `2.6881e+43` or `17.0`.
fn decimal_to_biguint(s: &str) -> Option<BigUint> {
    let s = s.trim();
    if s.starts_with('-') {
        return None;
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: String = format!("{int_part}{frac_part}");
    let point = int_part.len() as i64 + exp;
    if point <= 0 {
        return Some(BigUint::zero());
    }
    let point = point as usize;
    let kept = if point <= digits.len() {
        digits[..point].to_string()
    } else {
        format!("{digits}{}", "0".repeat(point - digits.len()))
    };
    if kept.is_empty() {
        return Some(BigUint::zero());
    }
    kept.parse().ok()
}

/// Rounds to f64, keeping the sign of values too small to represent.
fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf() {
        return if x.is_positive() { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    if x.is_zero() {
        return 0.0;
    }
    let v = x
        .format(Radix::Dec, RM, cc)
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or(f64::NAN);
    if v == 0.0 {
        let tiny = f64::from_bits(1);
        if x.is_positive() {
            tiny
        } else {
            -tiny
        }
    } else {
        v
    }
}

fn strictly_positive(x: &BigFloat) -> bool {
    !x.is_nan() && !x.is_zero() && x.is_positive()
}

/// One inequality `lhs < rhs`, evaluated in natural-log space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    #[serde(serialize_with = "finite_or_text")]
    pub lhs_log: f64,
    #[serde(serialize_with = "finite_or_text")]
    pub rhs_log: f64,
    /// Exactly when `margin > 0`.
    pub holds: bool,
    /// `rhs_log − lhs_log`.
    #[serde(serialize_with = "finite_or_text")]
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Reported for information only; not part of the threshold search.
    pub auxiliary: bool,
}

fn finite_or_text<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&x.to_string())
    }
}

#[derive(Clone, Debug)]
enum Expr {
    Num(f64),
    Ratio(i64, i64),
    Delta,
    LnDelta,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Positive base to a scalar power.
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
    Ceil(Box<Expr>),
}

macro_rules! binop {
    ($tr:ident, $f:ident, $var:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $f(self, o: Expr) -> Expr {
                Expr::$var(Box::new(self), Box::new(o))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        num(-1.0) * self
    }
}

fn num(c: f64) -> Expr {
    Expr::Num(c)
}

fn ratio(a: i64, b: i64) -> Expr {
    Expr::Ratio(a, b)
}

fn delta() -> Expr {
    Expr::Delta
}

fn ln_delta() -> Expr {
    Expr::LnDelta
}

/// Δ^{a/b}.
fn delta_pow(a: i64, b: i64) -> Expr {
    pow(delta(), ratio(a, b))
}

fn pow(base: Expr, k: Expr) -> Expr {
    Expr::Pow(Box::new(base), Box::new(k))
}

fn exp(e: Expr) -> Expr {
    Expr::Exp(Box::new(e))
}

fn sqrt(e: Expr) -> Expr {
    Expr::Sqrt(Box::new(e))
}

fn ceil(e: Expr) -> Expr {
    Expr::Ceil(Box::new(e))
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum LnKey {
    Num(u64),
    Ratio(i64, i64),
    LnDelta,
}

/// Evaluation state: precision, constants cache and memoised logs of constants.
struct Ctx<'d> {
    p: usize,
    cc: Consts,
    d: &'d Delta,
    ln_cache: HashMap<LnKey, BigFloat>,
    pow_cache: HashMap<(i64, i64), BigFloat>,
}

impl<'d> Ctx<'d> {
    fn new(d: &'d Delta) -> Self {
        Ctx { p: d.p, cc: consts(), d, ln_cache: HashMap::new(), pow_cache: HashMap::new() }
    }

    fn big(&self, c: f64) -> BigFloat {
        BigFloat::from_f64(c, self.p)
    }

    fn neg_inf() -> BigFloat {
        astro_float::INF_NEG
    }

    fn ln_of(&mut self, x: &BigFloat) -> BigFloat {
        if x.is_zero() || x.is_negative() {
            return Self::neg_inf();
        }
        x.ln(self.p, RM, &mut self.cc)
    }

    fn cached_ln(&mut self, key: LnKey) -> BigFloat {
        if let Some(v) = self.ln_cache.get(&key) {
            return v.clone();
        }
        let value = match key {
            LnKey::Num(bits) => self.big(f64::from_bits(bits)),
            LnKey::Ratio(a, b) => self.ratio(a, b),
            LnKey::LnDelta => self.d.ln.clone(),
        };
        let l = self.ln_of(&value);
        self.ln_cache.insert(key, l.clone());
        l
    }

    fn ratio(&self, a: i64, b: i64) -> BigFloat {
        BigFloat::from_i64(a, self.p).div(&BigFloat::from_i64(b, self.p), self.p, RM)
    }

    /// Direct route: the value itself.
    fn val(&mut self, e: &Expr) -> BigFloat {
        let p = self.p;
        match e {
            Expr::Num(c) => self.big(*c),
            Expr::Ratio(a, b) => self.ratio(*a, *b),
            Expr::Delta => self.d.value.clone(),
            Expr::LnDelta => self.d.ln.clone(),
            Expr::Add(a, b) => self.val(a).add(&self.val(b), p, RM),
            Expr::Sub(a, b) => self.val(a).sub(&self.val(b), p, RM),
            Expr::Mul(a, b) => self.val(a).mul(&self.val(b), p, RM),
            Expr::Div(a, b) => self.val(a).div(&self.val(b), p, RM),
            Expr::Pow(b, k) => {
                if let (Expr::Delta, Expr::Ratio(x, y)) = (&**b, &**k) {
                    if let Some(v) = self.pow_cache.get(&(*x, *y)) {
                        return v.clone();
                    }
                    let v = match (*x, *y) {
                        (1, 3) => self.d.value.cbrt(p, RM),
                        (2, 3) => {
                            let c = self.d.value.cbrt(p, RM);
                            c.mul(&c, p, RM)
                        }
                        _ => self.d.value.pow(&self.ratio(*x, *y), p, RM, &mut self.cc),
                    };
                    self.pow_cache.insert((*x, *y), v.clone());
                    return v;
                }
                let base = self.val(b);
                let k = self.val(k);
                base.pow(&k, p, RM, &mut self.cc)
            }
            Expr::Exp(a) => self.val(a).exp(p, RM, &mut self.cc),
            Expr::Sqrt(a) => self.val(a).sqrt(p, RM),
            Expr::Ceil(a) => self.val(a).ceil(),
        }
    }

    /// Log route: the natural log of the value, or −∞ when the value is not positive.
    /// Exponents and exponential arguments are scalars and are taken from the direct route.
    fn log(&mut self, e: &Expr) -> BigFloat {
        let p = self.p;
        match e {
            Expr::Num(c) => {
                if *c <= 0.0 {
                    Self::neg_inf()
                } else {
                    self.cached_ln(LnKey::Num(c.to_bits()))
                }
            }
            Expr::Ratio(a, b) => {
                if (*a > 0) == (*b > 0) && *a != 0 {
                    self.cached_ln(LnKey::Ratio(*a, *b))
                } else {
                    Self::neg_inf()
                }
            }
            Expr::Delta => self.d.ln.clone(),
            Expr::LnDelta => self.cached_ln(LnKey::LnDelta),
            Expr::Mul(a, b) => {
                let (la, lb) = (self.log(a), self.log(b));
                if la.is_inf_neg() || lb.is_inf_neg() {
                    return Self::neg_inf();
                }
                la.add(&lb, p, RM)
            }
            Expr::Div(a, b) => {
                let la = self.log(a);
                if la.is_inf_neg() {
                    return la;
                }
                la.sub(&self.log(b), p, RM)
            }
            Expr::Add(a, b) => {
                let (la, lb) = (self.log(a), self.log(b));
                if la.is_inf_neg() {
                    return lb;
                }
                if lb.is_inf_neg() {
                    return la;
                }
                let (hi, lo) = if la.cmp(&lb).is_some_and(|c| c >= 0) { (la, lb) } else { (lb, la) };
                let gap = lo.sub(&hi, p, RM).exp(p, RM, &mut self.cc);
                let one = BigFloat::from_u8(1, p);
                hi.add(&self.ln_of(&one.add(&gap, p, RM)), p, RM)
            }
            Expr::Sub(a, b) => {
                let (la, lb) = (self.log(a), self.log(b));
                if lb.is_inf_neg() {
                    return la;
                }
                if la.cmp(&lb).is_none_or(|c| c <= 0) {
                    return Self::neg_inf();
                }
                let gap = lb.sub(&la, p, RM).exp(p, RM, &mut self.cc);
                let one = BigFloat::from_u8(1, p);
                la.add(&self.ln_of(&one.sub(&gap, p, RM)), p, RM)
            }
            Expr::Pow(b, k) => {
                let lb = self.log(b);
                let k = self.val(k);
                if lb.is_inf_neg() {
                    return Self::neg_inf();
                }
                k.mul(&lb, p, RM)
            }
            Expr::Exp(a) => self.val(a),
            Expr::Sqrt(a) => {
                let la = self.log(a);
                if la.is_inf_neg() {
                    return la;
                }
                la.div(&BigFloat::from_u8(2, p), p, RM)
            }
            // integer rounding is discontinuous, so both routes share the direct value here
            Expr::Ceil(_) => {
                let v = self.val(e);
                self.ln_of(&v)
            }
        }
    }
}

/// An inequality awaiting evaluation. `flag` attaches `note` when its value exceeds 1.
struct Ineq {
    name: &'static str,
    lhs: Expr,
    rhs: Expr,
    auxiliary: bool,
    flag: Option<(Expr, &'static str)>,
}

fn ineq(name: &'static str, lhs: Expr, rhs: Expr) -> Ineq {
    Ineq { name, lhs, rhs, auxiliary: false, flag: None }
}

impl Ineq {
    fn auxiliary(mut self) -> Self {
        self.auxiliary = true;
        self
    }

    fn flag(mut self, e: Expr, note: &'static str) -> Self {
        self.flag = Some((e, note));
        self
    }

    fn evaluate(&self, ctx: &mut Ctx<'_>) -> BoundReport {
        let lhs = ctx.log(&self.lhs);
        let rhs = ctx.log(&self.rhs);
        let margin = rhs.sub(&lhs, ctx.p, RM);
        let note = self.flag.as_ref().and_then(|(e, note)| {
            let l = ctx.log(e);
            strictly_positive(&l).then(|| note.to_string())
        });
        let holds = strictly_positive(&margin);
        let mut report = BoundReport {
            name: self.name.to_string(),
            lhs_log: to_f64(&lhs, &mut ctx.cc),
            rhs_log: to_f64(&rhs, &mut ctx.cc),
            holds,
            margin: to_f64(&margin, &mut ctx.cc),
            note,
            auxiliary: self.auxiliary,
        };
        if margin.is_nan() {
            report.margin = f64::NAN;
            report.holds = false;
        }
        report
    }
}

/// Y-sampling probability p = y_prob_num · log Δ / Δ^{1/3}.
fn y_prob(cfg: &PipelineConfig) -> Expr {
    num(cfg.y_prob_num) * ln_delta() / delta_pow(1, 3)
}

fn stage4_ineqs(cfg: &PipelineConfig) -> Vec<Ineq> {
    let x = ln_delta;
    let target4 = || num(1.0) / (num(5.0) * pow(delta(), num(4.0)));
    let target6 = || num(1.0) / (num(5.0) * pow(delta(), num(6.0)));
    let mean = || num(cfg.y_prob_num) * x();
    let mid_palette = ceil(num(cfg.mid_palette_coeff) * delta_pow(2, 3) * x());
    vec![
        ineq("stage4.Y.p_at_most_one", y_prob(cfg), num(1.0)),
        ineq("stage4.Y.y_min_positive", num(1.0), num(cfg.y_min) * x()),
        ineq("stage4.A_v", pow(y_prob(cfg), num(cfg.small_deg as f64 + 1.0)), target4())
            .flag(y_prob(cfg), "probability parameter exceeds 1"),
        ineq(
            "stage4.B_v.mean_slack",
            num(6.0) * sqrt(num(2.0) * mean()) + num(16.0),
            mean() / num(20.0),
        ),
        ineq("stage4.B_v", num(8.0) * exp(-(mean() / num(48.0))), target4()),
        ineq(
            "stage4.C_v.bad_probability",
            (num(2.0 * cfg.nstar_cap_coeff) * delta_pow(2, 3) * x() - num(1.0)) / mid_palette,
            ratio(1, 2),
        ),
        ineq(
            "stage4.C_v.exponent_link",
            num(2.0) * exp(-(num(cfg.y_min / 32.0) * x())),
            num(2.0) * exp(-(num(10.0) * x())),
        ),
        ineq("stage4.C_v.final_link", num(2.0) * exp(-(num(10.0) * x())), target6()),
        ineq("stage4.C_v", num(2.0) * exp(-(num(cfg.y_min / 32.0) * x())), target6()),
    ]
}

fn stage5_ineqs(cfg: &PipelineConfig) -> Vec<Ineq> {
    let x = ln_delta;
    let few = cfg.few_h_neighbours as f64;
    let target = |k: f64| num(1.0) / (num(k) * pow(delta(), num(4.0)));
    let t = || ceil(num(cfg.t_coeff) * delta_pow(1, 3));
    let free_parts = || num(cfg.t_coeff - 1.0) * delta_pow(1, 3);
    // 2 · (4n / ((t_coeff − 1) Δ^{1/3}))^{⌈n/4⌉}
    let a_v = |n: Expr, k: Expr| num(2.0) * pow(num(4.0) * n / free_parts(), k);
    let s = || delta_pow(1, 3) * x();
    let cap = || delta() + num(few) * delta_pow(2, 3) * x();
    let r = few;
    let c = few * cfg.nearby_common as f64;
    vec![
        ineq(
            "stage5.A_v.large_branch",
            a_v(num(20.0) * x(), ceil(num(5.0) * x())),
            target(20.0),
        ),
        ineq("stage5.A_v.fifty_witness", a_v(num(few), num((few / 4.0).ceil())), target(20.0)),
        ineq("stage5.A_v.small_branch", a_v(num(20.0) * x(), num((few / 4.0).ceil())), target(20.0)),
        ineq("stage5.B_v.mean_cap", cap() / t(), delta_pow(2, 3)),
        ineq("stage5.C_v.mean_cap", delta() / (num(2.0) * t()), delta_pow(2, 3)),
        ineq("stage5.B_v_C_v", num(2.0) * exp(-(x() * x() / num(3.0))), target(20.0)),
        ineq(
            "stage5.D_v.W_v_exponent",
            exp(-(num(few.powi(5) / 8.0) * x())),
            exp(-(num(100.0) * x())),
        ),
        ineq("stage5.D_v.W_v_tail", num(2.0) * exp(-(num(100.0) * x())), target(40.0)),
        ineq(
            "stage5.D_v.median_gap",
            s() / num(2.0) + num(2.0 * few.powi(5)) * delta_pow(1, 3),
            s(),
        )
        .auxiliary(),
        ineq(
            "stage5.D_v.talagrand",
            num(2.0)
                * exp(-((s() / num(2.0)) * (s() / num(2.0)) / (num(4.0 * r * c * c) * s()))),
            target(40.0),
        ),
    ]
}

/// Palette accounting with the common Δ term cancelled from both sides, so each margin tracks the
/// lower-order gap rather than vanishing relative to Δ.
fn palette_ineqs(cfg: &PipelineConfig) -> Vec<Ineq> {
    let x = ln_delta;
    let few = cfg.few_h_neighbours as f64;
    let t = || ceil(num(cfg.t_coeff) * delta_pow(1, 3));
    let s = || delta_pow(1, 3) * x();
    let y = || delta_pow(2, 3) * x();
    let part_coeff = few + 3.0 * cfg.t_coeff + 1.0;
    vec![
        // t · ((Δ + few·y)/t + 3s + 1) − Δ  <  part_coeff · y
        ineq("final.part_palette", num(few) * y() + num(3.0) * t() * s() + t(), num(part_coeff) * y()),
        // low + mid + part palettes − Δ  <  (mid_coeff + part_coeff + 1) · y
        ineq(
            "final.total_palette",
            (num(2.0) * delta_pow(1, 3) + num(1.0))
                + (num(cfg.mid_palette_coeff) * y() + num(1.0))
                + num(part_coeff) * y(),
            num(cfg.mid_palette_coeff + part_coeff + 1.0) * y(),
        ),
    ]
}

/// The local-lemma condition 4pd < 1, decided exactly.
pub fn lll_condition(name: &str, p: &BigRational, d: &BigUint) -> BoundReport {
    let prod = BigRational::from_integer(BigInt::from(4)) * p * BigRational::from_integer(d.clone().into());
    let holds = prod < BigRational::one();
    let note = (p.is_negative() || *p > BigRational::one())
        .then(|| "probability outside [0, 1]".to_string());
    let (lhs_log, margin) = if prod.is_zero() || prod.is_negative() {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let bits = (prod.numer().bits() + prod.denom().bits()) as usize;
        let prec = precision_for_bits(bits);
        let mut cc = consts();
        let n = BigFloat::parse(&prod.numer().to_string(), Radix::Dec, prec, RM, &mut cc);
        let dn = BigFloat::parse(&prod.denom().to_string(), Radix::Dec, prec, RM, &mut cc);
        let l = n.div(&dn, prec, RM).ln(prec, RM, &mut cc);
        (to_f64(&l, &mut cc), to_f64(&l.neg(), &mut cc))
    };
    BoundReport {
        name: name.to_string(),
        lhs_log,
        rhs_log: 0.0,
        holds,
        margin,
        note,
        auxiliary: false,
    }
}

/// A local-lemma instance p = 1/(denom · Δ^power) with d = multiplicity · Δ^power.
struct LllInstance {
    name: &'static str,
    denom: u32,
    power: u32,
    multiplicity: u32,
}

const STAGE4_LLL: [LllInstance; 2] = [
    LllInstance { name: "stage4.lll.membership", denom: 5, power: 4, multiplicity: 1 },
    LllInstance { name: "stage4.lll.colouring", denom: 5, power: 6, multiplicity: 1 },
];
const STAGE5_LLL: [LllInstance; 1] =
    [LllInstance { name: "stage5.lll.partition", denom: 20, power: 4, multiplicity: 3 }];

impl LllInstance {
    fn evaluate(&self, delta: &Delta) -> BoundReport {
        let dk = delta.integer.pow(self.power);
        let p = BigRational::new(BigInt::one(), BigInt::from(self.denom) * BigInt::from(dk.clone()));
        lll_condition(self.name, &p, &(dk * self.multiplicity))
    }
}

fn evaluate_group(
    delta: &Delta,
    ctx: &mut Ctx<'_>,
    ineqs: &[Ineq],
    lll: &[LllInstance],
) -> Vec<BoundReport> {
    let mut out: Vec<BoundReport> = ineqs.iter().map(|i| i.evaluate(ctx)).collect();
    out.extend(lll.iter().map(|l| l.evaluate(delta)));
    out
}

/// Inequalities of the Y-sampling and mid-colouring stage, including both LLL instances.
pub fn eval_stage4_bounds(delta: &Delta, cfg: &PipelineConfig) -> Vec<BoundReport> {
    evaluate_group(delta, &mut Ctx::new(delta), &stage4_ineqs(cfg), &STAGE4_LLL)
}

/// Inequalities of the partition stage, including its LLL instance.
pub fn eval_stage5_bounds(delta: &Delta, cfg: &PipelineConfig) -> Vec<BoundReport> {
    evaluate_group(delta, &mut Ctx::new(delta), &stage5_ineqs(cfg), &STAGE5_LLL)
}

/// Palette accounting for the final colouring.
pub fn eval_palette_bounds(delta: &Delta, cfg: &PipelineConfig) -> Vec<BoundReport> {
    evaluate_group(delta, &mut Ctx::new(delta), &palette_ineqs(cfg), &[])
}

/// Every report: stage 4, stage 5, then palette accounting.
pub fn all_bounds(delta: &Delta, cfg: &PipelineConfig) -> Vec<BoundReport> {
    let mut ctx = Ctx::new(delta);
    let mut out = evaluate_group(delta, &mut ctx, &stage4_ineqs(cfg), &STAGE4_LLL);
    out.extend(evaluate_group(delta, &mut ctx, &stage5_ineqs(cfg), &STAGE5_LLL));
    out.extend(evaluate_group(delta, &mut ctx, &palette_ineqs(cfg), &[]));
    out
}

/// Log-route value of one side of one inequality next to its direct-route value.
#[derive(Clone, Debug, Serialize)]
pub struct RouteCheck {
    pub name: String,
    pub log_route: f64,
    /// `None` when the direct value under- or overflows.
    pub direct_route: Option<f64>,
    pub agree: bool,
}

/// Evaluates both sides of every non-LLL inequality by both routes.
pub fn cross_check(delta: &Delta, cfg: &PipelineConfig) -> Vec<RouteCheck> {
    let mut ctx = Ctx::new(delta);
    let p = ctx.p;
    let mut out = Vec::new();
    let groups = [stage4_ineqs(cfg), stage5_ineqs(cfg), palette_ineqs(cfg)];
    for ineq in groups.iter().flatten() {
        for (side, e) in [("lhs", &ineq.lhs), ("rhs", &ineq.rhs)] {
            let l = ctx.log(e);
            let v = ctx.val(e);
            let representable = strictly_positive(&v) && !v.is_inf();
            let (direct, agree) = if representable {
                let dl = ctx.ln_of(&v);
                let gap = dl.sub(&l, p, RM).abs();
                let one = BigFloat::from_u8(1, p);
                let scale = l.abs().max(&one);
                let tol = scale.mul(&ctx.big(ROUTE_TOLERANCE), p, RM);
                let agree = gap.cmp(&tol).is_some_and(|c| c <= 0);
                (Some(to_f64(&dl, &mut ctx.cc)), agree)
            } else {
                (None, true)
            };
            out.push(RouteCheck {
                name: format!("{}/{side}", ineq.name),
                log_route: to_f64(&l, &mut ctx.cc),
                direct_route: direct,
                agree,
            });
        }
    }
    out
}

/// Result of the threshold search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Delta0 {
    Found(BigUint),
    /// No Δ up to the cap makes every non-auxiliary report hold.
    NotFound { cap: BigUint },
}

/// Upper end of the threshold search, 10^400.
pub fn delta0_cap() -> BigUint {
    BigUint::from(10u32).pow(400)
}

/// Name of the first non-auxiliary report that fails at `delta`, if any. Stops evaluating at
/// the first failure.
pub fn first_failure(delta: &Delta, cfg: &PipelineConfig) -> Option<String> {
    let mut ctx = Ctx::new(delta);
    let ineqs = stage4_ineqs(cfg).into_iter().chain(stage5_ineqs(cfg)).chain(palette_ineqs(cfg));
    for ineq in ineqs.filter(|i| !i.auxiliary) {
        if !ineq.evaluate(&mut ctx).holds {
            return Some(ineq.name.to_string());
        }
    }
    STAGE4_LLL
        .iter()
        .chain(&STAGE5_LLL)
        .map(|l| l.evaluate(delta))
        .find(|r| !r.holds)
        .map(|r| r.name)
}

fn all_hold(n: &BigUint, cfg: &PipelineConfig) -> bool {
    let delta = Delta::from_biguint(n).expect("search stays above 1");
    first_failure(&delta, cfg).is_none()
}

/// Smallest integer Δ ≥ 2 at which every non-auxiliary report holds, found by doubling from 2
/// and then bisecting. The result is its own certificate: everything holds at Δ₀ and something
/// fails at Δ₀ − 1 (when Δ₀ > 2).
pub fn find_delta0(cfg: &PipelineConfig) -> Delta0 {
    let cap = delta0_cap();
    let two = BigUint::from(2u32);
    if all_hold(&two, cfg) {
        return Delta0::Found(two);
    }
    let mut lo = two.clone();
    let mut hi = &two * 2u32;
    loop {
        if hi >= cap {
            if !all_hold(&cap, cfg) {
                return Delta0::NotFound { cap };
            }
            hi = cap.clone();
            break;
        }
        if all_hold(&hi, cfg) {
            break;
        }
        lo = hi.clone();
        hi *= 2u32;
    }
    // invariant: fails at lo, holds at hi
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) / 2u32;
        if all_hold(&mid, cfg) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Delta0::Found(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report<'a>(rs: &'a [BoundReport], name: &str) -> &'a BoundReport {
        rs.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("missing {name}"))
    }

    #[test]
    fn decimal_integer_parts() {
        assert_eq!(decimal_to_biguint("1.e+60"), Some(BigUint::from(10u32).pow(60)));
        assert_eq!(decimal_to_biguint("2.5e+1"), Some(BigUint::from(25u32)));
        assert_eq!(decimal_to_biguint("17.0"), Some(BigUint::from(17u32)));
        assert_eq!(decimal_to_biguint("9.9e-1"), Some(BigUint::zero()));
    }

    #[test]
    fn delta_parsing() {
        assert_eq!(Delta::parse("1000").unwrap().floor(), &BigUint::from(1000u32));
        assert_eq!(Delta::parse("1e60").unwrap().floor(), &BigUint::from(10u32).pow(60));
        assert!((Delta::parse("e^100").unwrap().ln_f64() - 100.0).abs() < 1e-12);
        assert!(matches!(Delta::parse("1"), Err(BoundsError::DeltaTooSmall(_))));
        assert!(matches!(Delta::parse("0.5"), Err(BoundsError::DeltaTooSmall(_))));
        assert!(matches!(Delta::parse("abc"), Err(BoundsError::Parse(_))));
        assert!(matches!(Delta::parse("inf"), Err(BoundsError::Parse(_))));
    }

    #[test]
    fn c_v_at_two() {
        let rs = eval_stage4_bounds(&Delta::from_u64(2).unwrap(), &PipelineConfig::default());
        let r = report(&rs, "stage4.C_v");
        let ln2 = LN_2;
        assert!((r.lhs_log - (ln2 - 11.25 * ln2)).abs() < 1e-12);
        assert!((r.rhs_log - (-(5f64.ln()) - 6.0 * ln2)).abs() < 1e-12);
        assert!(r.holds);
        assert!((r.margin - (4.25 * ln2 - 5f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn report_invariant_holds_iff_positive_margin() {
        for d in ["2", "10", "1e9", "1e60", "e^100", "1e300"] {
            for r in all_bounds(&Delta::parse(d).unwrap(), &PipelineConfig::default()) {
                assert_eq!(r.holds, r.margin > 0.0, "{d} {}", r.name);
            }
        }
    }
}

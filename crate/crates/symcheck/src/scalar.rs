//! Exact scalars: arbitrary-precision rationals, quadratic extensions `a + b*sqrt(d)`,
//! and prime-field reduction. Every numeric entry in the crate is one of these.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::error::{Result, SymError};

pub type Rational = BigRational;

/// An exact field element: rational, or `a + b*sqrt(d)` with `b != 0` and `d` square-free.
///
/// The `Quad` variant is normalized away whenever `b` collapses to zero, so equality
/// and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(Rational),
    Quad { a: Rational, b: Rational, d: i64 },
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(Rational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::Rat(Rational::from_integer(BigInt::from(v)))
    }

    pub fn from_frac(num: i64, den: i64) -> Self {
        assert!(den != 0);
        Scalar::Rat(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::Rat(r)
    }

    /// `a + b*sqrt(d)`, normalizing `b = 0` down to the rational variant.
    pub fn quad(a: Rational, b: Rational, d: i64) -> Self {
        if b.is_zero() {
            Scalar::Rat(a)
        } else {
            Scalar::Quad { a, b, d }
        }
    }

    pub fn sqrt_d(d: i64) -> Self {
        Scalar::quad(Rational::zero(), Rational::one(), d)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_one())
    }

    /// Discriminant of the extension this value lives in, if any.
    pub fn disc(&self) -> Option<i64> {
        match self {
            Scalar::Rat(_) => None,
            Scalar::Quad { d, .. } => Some(*d),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Quad { .. } => None,
        }
    }

    fn parts(&self, d: i64) -> (Rational, Rational) {
        match self {
            Scalar::Rat(r) => (r.clone(), Rational::zero()),
            Scalar::Quad { a, b, d: dd } => {
                assert_eq!(*dd, d, "mixed quadratic extensions in arithmetic");
                (a.clone(), b.clone())
            }
        }
    }

    fn join_disc(&self, other: &Scalar) -> Option<i64> {
        match (self.disc(), other.disc()) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d),
            (Some(d1), Some(d2)) => {
                assert_eq!(d1, d2, "mixed quadratic extensions in arithmetic");
                Some(d1)
            }
        }
    }

    pub fn inv(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => {
                assert!(!r.is_zero(), "division by zero");
                Scalar::Rat(r.recip())
            }
            Scalar::Quad { a, b, d } => {
                // 1/(a+b sqrt d) = (a - b sqrt d)/(a^2 - d b^2); the norm is nonzero
                // because d is not a rational square.
                let dd = Rational::from_integer(BigInt::from(*d));
                let norm = a * a - &dd * b * b;
                assert!(!norm.is_zero(), "zero norm in quadratic inverse");
                Scalar::quad(a / &norm, -(b / &norm), *d)
            }
        }
    }

    /// Sign of the real embedding with sqrt(d) > 0. Only meaningful for d > 0.
    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Rat(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Quad { a, b, d } => {
                assert!(*d > 0, "sign of a complex quadratic value");
                let dd = Rational::from_integer(BigInt::from(*d));
                let (sa, sb) = (a.is_positive(), b.is_positive());
                if a.is_zero() {
                    return if sb { 1 } else { -1 };
                }
                if sa == sb {
                    return if sa { 1 } else { -1 };
                }
                // a and b have opposite signs: compare a^2 with d b^2.
                let lhs = a * a;
                let rhs = &dd * b * b;
                if lhs > rhs {
                    if sa {
                        1
                    } else {
                        -1
                    }
                } else if lhs < rhs {
                    if sb {
                        1
                    } else {
                        -1
                    }
                } else {
                    0
                }
            }
        }
    }

    /// Order under the real embedding with sqrt(d) > 0.
    pub fn cmp_real(&self, other: &Scalar) -> std::cmp::Ordering {
        match (self - other).signum() {
            0 => std::cmp::Ordering::Equal,
            s if s < 0 => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Greater,
        }
    }

    /// Galois conjugate a + b sqrt(d) -> a - b sqrt(d).
    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(r.clone()),
            Scalar::Quad { a, b, d } => Scalar::quad(a.clone(), -b.clone(), *d),
        }
    }

    /// Reduce into GF(p). Errors when a denominator is divisible by p, and when the
    /// value needs sqrt(d) but `sqrt_d_mod_p` was not supplied.
    pub fn to_fp(&self, fp: &FpCtx) -> Result<u64> {
        match self {
            Scalar::Rat(r) => fp.rational(r),
            Scalar::Quad { a, b, d } => {
                let s = fp.sqrt_d.ok_or(SymError::MixedExtensions {
                    what: format!("entry in Q(sqrt {d}) but prime context has no sqrt"),
                })?;
                debug_assert_eq!(fp.disc, Some(*d));
                let av = fp.rational(a)?;
                let bv = fp.rational(b)?;
                Ok(fp.add(av, fp.mul(bv, s)))
            }
        }
    }

    /// Canonical text form, `num/den` for rationals and `num/den~num/den` for
    /// `a + b*sqrt(d)` (the discriminant travels in the matrix header).
    pub fn to_token(&self) -> String {
        fn rat(r: &Rational) -> String {
            format!("{}/{}", r.numer(), r.denom())
        }
        match self {
            Scalar::Rat(r) => rat(r),
            Scalar::Quad { a, b, .. } => format!("{}~{}", rat(a), rat(b)),
        }
    }

    pub fn parse_token(tok: &str, disc: Option<i64>) -> Result<Scalar> {
        fn rat(s: &str) -> Result<Rational> {
            let bad = || SymError::Parse(format!("bad rational `{s}`"));
            let (n, d) = match s.split_once('/') {
                Some((n, d)) => (n, d),
                None => (s, "1"),
            };
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        match tok.split_once('~') {
            None => Ok(Scalar::Rat(rat(tok)?)),
            Some((a, b)) => {
                let d = disc.ok_or_else(|| {
                    SymError::Parse("quadratic entry in a rational matrix".into())
                })?;
                Ok(Scalar::quad(rat(a)?, rat(b)?, d))
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::Quad { a, b, d } => write!(f, "{a}+{b}*sqrt({d})"),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        match self.join_disc(rhs) {
            None => Scalar::Rat(self.as_rational().unwrap() + rhs.as_rational().unwrap()),
            Some(d) => {
                let (a1, b1) = self.parts(d);
                let (a2, b2) = rhs.parts(d);
                Scalar::quad(a1 + a2, b1 + b2, d)
            }
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Quad { a, b, d } => Scalar::Quad {
                a: -a,
                b: -b,
                d: *d,
            },
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        match self.join_disc(rhs) {
            None => Scalar::Rat(self.as_rational().unwrap() * rhs.as_rational().unwrap()),
            Some(d) => {
                let (a1, b1) = self.parts(d);
                let (a2, b2) = rhs.parts(d);
                let dd = Rational::from_integer(BigInt::from(d));
                Scalar::quad(&a1 * &a2 + &dd * &b1 * &b2, &a1 * &b2 + &b1 * &a2, d)
            }
        }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv()
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

/// The field a computation runs over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    /// Exact characteristic zero. Promotes itself to Q(sqrt d) when entries demand it.
    Rational,
    /// Exact characteristic zero in Q(sqrt d), d square-free.
    Quadratic { d: i64 },
    /// GF(p), p prime > 10^9.
    PrimeField { p: u64 },
}

impl FieldSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSpec::Rational => Ok(()),
            FieldSpec::Quadratic { d } => {
                if *d == 0 || *d == 1 || !is_square_free(*d) {
                    Err(SymError::Parse(format!("discriminant {d} is not square-free")))
                } else {
                    Ok(())
                }
            }
            FieldSpec::PrimeField { p } => {
                if *p <= 1_000_000_000 || !is_prime_u64(*p) {
                    Err(SymError::Parse(format!("{p} is not a prime above 10^9")))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn token(&self) -> String {
        match self {
            FieldSpec::Rational => "qq".into(),
            FieldSpec::Quadratic { d } => format!("quad:{d}"),
            FieldSpec::PrimeField { p } => format!("gfp:{p}"),
        }
    }

    pub fn parse(tok: &str) -> Result<FieldSpec> {
        let f = if tok == "qq" {
            FieldSpec::Rational
        } else if let Some(d) = tok.strip_prefix("quad:") {
            FieldSpec::Quadratic {
                d: d.parse()
                    .map_err(|_| SymError::Parse(format!("bad field `{tok}`")))?,
            }
        } else if let Some(p) = tok.strip_prefix("gfp:") {
            FieldSpec::PrimeField {
                p: p.parse()
                    .map_err(|_| SymError::Parse(format!("bad field `{tok}`")))?,
            }
        } else {
            return Err(SymError::Parse(format!("bad field `{tok}`")));
        };
        f.validate()?;
        Ok(f)
    }
}

pub fn is_square_free(d: i64) -> bool {
    let mut m = d.unsigned_abs();
    let mut f = 2u64;
    while f * f <= m {
        if m % f == 0 {
            m /= f;
            if m % f == 0 {
                return false;
            }
        }
        f += 1;
    }
    true
}

/// Arithmetic context for GF(p).
#[derive(Clone, Debug)]
pub struct FpCtx {
    pub p: u64,
    /// A square root of the active discriminant mod p, when one is needed.
    pub sqrt_d: Option<u64>,
    pub disc: Option<i64>,
}

impl FpCtx {
    pub fn new(p: u64) -> Self {
        FpCtx {
            p,
            sqrt_d: None,
            disc: None,
        }
    }

    /// Attach sqrt(d) mod p; fails when d is a non-residue.
    pub fn with_disc(p: u64, d: i64) -> Option<Self> {
        let dm = modulo_i64(d, p);
        sqrt_mod(dm, p).map(|s| FpCtx {
            p,
            sqrt_d: Some(s),
            disc: Some(d),
        })
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "division by zero mod p");
        self.pow(a, self.p - 2)
    }

    pub fn bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let mut r = v % &m;
        if r.sign() == Sign::Minus {
            r += &m;
        }
        let (_, digits) = r.to_u64_digits();
        *digits.first().unwrap_or(&0)
    }

    pub fn rational(&self, r: &Rational) -> Result<u64> {
        let den = self.bigint(r.denom());
        if den == 0 {
            return Err(SymError::DenominatorDivisibleByPrime { p: self.p });
        }
        Ok(self.mul(self.bigint(r.numer()), self.inv(den)))
    }
}

pub fn modulo_i64(v: i64, p: u64) -> u64 {
    let r = v.rem_euclid(p as i64);
    r as u64
}

/// Deterministic Miller-Rabin, valid for all u64 below 3.3e14 with these bases;
/// our primes live in (1e9, 4e9).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let ctx = FpCtx::new(n);
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17] {
        let mut x = ctx.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = ctx.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Tonelli-Shanks square root mod an odd prime. Returns None for non-residues.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let ctx = FpCtx::new(p);
    if a == 0 {
        return Some(0);
    }
    if ctx.pow(a, (p - 1) / 2) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(ctx.pow(a, (p + 1) / 4));
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while ctx.pow(z, (p - 1) / 2) == 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = ctx.pow(z, q);
    let mut t = ctx.pow(a, q);
    let mut r = ctx.pow(a, (q + 1) / 2);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = ctx.mul(tt, tt);
            i += 1;
        }
        let b = ctx.pow(c, 1 << (m - i - 1));
        m = i;
        c = ctx.mul(b, b);
        t = ctx.mul(t, c);
        r = ctx.mul(r, b);
    }
    Some(r)
}

/// SplitMix64: every piece of seeded randomness in the crate flows through this,
/// so reports are reproducible across platforms.
#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Derive an independent stream for a named purpose.
    pub fn derive(&self, tag: &str) -> Rng {
        let mut h = 0xcbf29ce484222325u64;
        for b in tag.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        Rng {
            state: self.state ^ h,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, bound).
    pub fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }

    /// Small signed integer in [-9, 9], never all-zero-biased; handy for witnesses.
    pub fn small_int(&mut self) -> i64 {
        self.below(19) as i64 - 9
    }

    /// A random prime in (10^9, 4*10^9), optionally with (d|p) = 1.
    pub fn prime(&mut self, needs_sqrt_of: Option<i64>) -> u64 {
        loop {
            let cand = 1_000_000_001 + 2 * self.below(1_500_000_000);
            if !is_prime_u64(cand) {
                continue;
            }
            match needs_sqrt_of {
                None => return cand,
                Some(d) => {
                    if FpCtx::with_disc(cand, d).is_some() {
                        return cand;
                    }
                }
            }
        }
    }
}

/// Rational reconstruction of `v mod m` with |num|, den <= sqrt(m/2).
pub fn rational_reconstruct(v: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = {
        let half = m / BigInt::from(2);
        half.sqrt()
    };
    let (mut r0, mut r1) = (m.clone(), v.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 >= bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if t1.is_zero() {
        return None;
    }
    let num = if t1.is_negative() { -&r1 } else { r1.clone() };
    let den = t1.abs();
    if den > bound || num.magnitude() > bound.magnitude() {
        return None;
    }
    if num.gcd(&den) != BigInt::one() {
        return None;
    }
    Some(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::from_frac(n, d)
    }

    #[test]
    fn rational_arithmetic_reduces() {
        let x = &q(2, 4) + &q(1, 4);
        assert_eq!(x, q(3, 4));
        assert_eq!(&x * &x.inv(), Scalar::one());
    }

    #[test]
    fn quad_arithmetic_closes() {
        let s3 = Scalar::sqrt_d(3);
        let x = &q(1, 2) + &s3;
        let y = &x * &x; // 13/4 + sqrt(3)
        assert_eq!(y, &q(13, 4) + &s3);
        assert_eq!(&y * &y.inv(), Scalar::one());
        assert_eq!(&s3 * &s3, q(3, 1));
    }

    #[test]
    fn quad_sign() {
        let s3 = Scalar::sqrt_d(3);
        // 2 - sqrt(3) > 0, 3/2 - sqrt(3) < 0
        assert_eq!((&q(2, 1) - &s3).signum(), 1);
        assert_eq!((&q(3, 2) - &s3).signum(), -1);
        assert_eq!((&s3 - &s3).signum(), 0);
    }

    #[test]
    #[should_panic(expected = "mixed quadratic extensions")]
    fn mixed_extensions_panic_in_raw_arithmetic() {
        let _ = &Scalar::sqrt_d(2) + &Scalar::sqrt_d(3);
    }

    #[test]
    fn token_round_trip() {
        for s in [
            q(-7, 3),
            Scalar::zero(),
            &q(1, 2) + &Scalar::sqrt_d(3),
            -&Scalar::sqrt_d(3),
        ] {
            let tok = s.to_token();
            assert_eq!(Scalar::parse_token(&tok, Some(3)).unwrap(), s);
        }
    }

    #[test]
    fn primes_and_sqrt() {
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1_000_000_008));
        let mut rng = Rng::new(7);
        let p = rng.prime(Some(3));
        let ctx = FpCtx::with_disc(p, 3).unwrap();
        let s = ctx.sqrt_d.unwrap();
        assert_eq!(ctx.mul(s, s), 3 % p);
    }

    #[test]
    fn fp_reduction_and_error() {
        let p = 1_000_000_007u64;
        let ctx = FpCtx::new(p);
        let v = q(1, 3).to_fp(&ctx).unwrap();
        assert_eq!(ctx.mul(v, 3), 1);
        let bad = Scalar::Rat(Rational::new(BigInt::one(), BigInt::from(p)));
        assert!(matches!(
            bad.to_fp(&ctx),
            Err(SymError::DenominatorDivisibleByPrime { .. })
        ));
    }

    #[test]
    fn reconstructs_small_rationals() {
        let p1 = BigInt::from(1_000_000_007u64);
        let p2 = BigInt::from(1_000_000_009u64);
        let m = &p1 * &p2;
        let want = Rational::new(BigInt::from(-22), BigInt::from(7));
        // v = -22 * 7^{-1} mod m
        let seven_inv = {
            // brute via extended euclid on BigInt: 7*t == 1 mod m
            let mut t = BigInt::zero();
            let mut new_t = BigInt::one();
            let mut r = m.clone();
            let mut new_r = BigInt::from(7);
            while !new_r.is_zero() {
                let q = &r / &new_r;
                let tmp_t = &t - &q * &new_t;
                t = std::mem::replace(&mut new_t, tmp_t);
                let tmp_r = &r - &q * &new_r;
                r = std::mem::replace(&mut new_r, tmp_r);
            }
            t.mod_floor(&m)
        };
        let v = (BigInt::from(-22) * seven_inv).mod_floor(&m);
        assert_eq!(rational_reconstruct(&v, &m).unwrap(), want);
    }
}

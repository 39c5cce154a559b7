//! Exact eigenvalues and eigenspaces of symmetric exact matrices.
//!
//! Eigenvalues are located modulo a prime (distinct-degree + Cantor-Zassenhaus
//! root extraction) and lifted by rational reconstruction, then verified
//! exactly; conjugate pairs are lifted through their rational quadratic factor.
//! Anything beyond a single quadratic extension is reported as an error.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dense::DMat;
use crate::error::{Result, SymError};
use crate::scalar::{rational_reconstruct, FpCtx, Rational, Rng, Scalar};

/// Polynomial with exact coefficients, ascending degree, trimmed.
pub type Poly = Vec<Scalar>;

pub fn poly_trim(p: &mut Poly) {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

pub fn poly_eval(p: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for c in p.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub fn poly_derivative(p: &[Scalar]) -> Poly {
    if p.len() <= 1 {
        return vec![Scalar::zero()];
    }
    let mut d: Poly = p[1..]
        .iter()
        .enumerate()
        .map(|(i, c)| &Scalar::from_int(i as i64 + 1) * c)
        .collect();
    poly_trim(&mut d);
    d
}

pub fn poly_divrem(num: &[Scalar], den: &[Scalar]) -> (Poly, Poly) {
    let dd = den.len() - 1;
    assert!(!den[dd].is_zero(), "division by zero polynomial");
    let mut rem: Poly = num.to_vec();
    if num.len() < den.len() {
        return (vec![Scalar::zero()], rem);
    }
    let mut quo = vec![Scalar::zero(); num.len() - dd];
    let lead_inv = den[dd].inv();
    for i in (dd..rem.len()).rev() {
        if rem[i].is_zero() {
            continue;
        }
        let q = &rem[i] * &lead_inv;
        quo[i - dd] = q.clone();
        for (j, dc) in den.iter().enumerate() {
            let t = &rem[i - dd + j] - &(&q * dc);
            rem[i - dd + j] = t;
        }
    }
    poly_trim(&mut quo);
    rem.truncate(dd.max(1));
    poly_trim(&mut rem);
    (quo, rem)
}

pub fn poly_gcd(a: &[Scalar], b: &[Scalar]) -> Poly {
    let mut a: Poly = a.to_vec();
    let mut b: Poly = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !(b.len() == 1 && b[0].is_zero()) {
        let (_, r) = poly_divrem(&a, &b);
        a = b;
        b = r;
    }
    // monic
    let lead = a.last().unwrap().clone();
    if !lead.is_zero() && !lead.is_one() {
        for c in a.iter_mut() {
            *c = &*c / &lead;
        }
    }
    a
}

/// Characteristic polynomial det(xI - M) by Faddeev-LeVerrier.
pub fn char_poly(m: &DMat) -> Poly {
    let n = m.nrows;
    assert_eq!(n, m.ncols);
    let mut coeffs = vec![Scalar::zero(); n + 1];
    coeffs[n] = Scalar::one();
    let mut mk = DMat::identity(n);
    for k in 1..=n {
        mk = m.mul(&mk);
        let c = &(-&mk.trace()) / &Scalar::from_int(k as i64);
        coeffs[n - k] = c.clone();
        for i in 0..n {
            *mk.at_mut(i, i) = mk.at(i, i) + &c;
        }
    }
    coeffs
}

pub fn square_free_part(p: &[Scalar]) -> Poly {
    let d = poly_derivative(p);
    if d.len() == 1 && d[0].is_zero() {
        return p.to_vec();
    }
    let g = poly_gcd(p, &d);
    if g.len() == 1 {
        return p.to_vec();
    }
    let (q, r) = poly_divrem(p, &g);
    debug_assert!(r.iter().all(|c| c.is_zero()));
    q
}

// ---- GF(p) polynomial helpers -------------------------------------------------

fn pmod_trim(p: &mut Vec<u64>) {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
}

fn pmod_mul(a: &[u64], b: &[u64], f: &FpCtx) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
    }
    pmod_trim(&mut out);
    out
}

fn pmod_rem(num: &[u64], den: &[u64], f: &FpCtx) -> Vec<u64> {
    let dd = den.len() - 1;
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        pmod_trim(&mut rem);
        return rem;
    }
    let lead_inv = f.inv(den[dd]);
    for i in (dd..rem.len()).rev() {
        if rem[i] == 0 {
            continue;
        }
        let q = f.mul(rem[i], lead_inv);
        for (j, &dc) in den.iter().enumerate() {
            rem[i - dd + j] = f.sub(rem[i - dd + j], f.mul(q, dc));
        }
    }
    rem.truncate(dd.max(1));
    pmod_trim(&mut rem);
    rem
}

fn pmod_gcd(a: &[u64], b: &[u64], f: &FpCtx) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    pmod_trim(&mut a);
    pmod_trim(&mut b);
    while !(b.len() == 1 && b[0] == 0) {
        let r = pmod_rem(&a, &b, f);
        a = b;
        b = r;
    }
    if *a.last().unwrap() != 0 && *a.last().unwrap() != 1 {
        let inv = f.inv(*a.last().unwrap());
        for c in a.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
    a
}

/// x^e mod g.
fn pmod_xpow(e: u64, g: &[u64], f: &FpCtx) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut base = pmod_rem(&[0, 1], g, f);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = pmod_rem(&pmod_mul(&result, &base, f), g, f);
        }
        base = pmod_rem(&pmod_mul(&base, &base, f), g, f);
        e >>= 1;
    }
    result
}

fn pmod_pow(b: &[u64], e: u64, g: &[u64], f: &FpCtx) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut base = pmod_rem(b, g, f);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = pmod_rem(&pmod_mul(&result, &base, f), g, f);
        }
        base = pmod_rem(&pmod_mul(&base, &base, f), g, f);
        e >>= 1;
    }
    result
}

/// All roots of `poly` in GF(p), via gcd with x^p - x and Cantor-Zassenhaus.
pub fn roots_mod_p(poly: &[u64], f: &FpCtx, rng: &mut Rng) -> Vec<u64> {
    let mut g = poly.to_vec();
    pmod_trim(&mut g);
    if g.len() <= 1 {
        return vec![];
    }
    let xp = pmod_xpow(f.p, &g, f);
    // x^p - x
    let mut xpx = xp;
    if xpx.len() < 2 {
        xpx.resize(2, 0);
    }
    xpx[1] = f.sub(xpx[1], 1);
    pmod_trim(&mut xpx);
    let lin = pmod_gcd(&g, &xpx, f);
    let mut roots = Vec::new();
    let mut stack = vec![lin];
    while let Some(h) = stack.pop() {
        if h.len() <= 1 {
            continue;
        }
        if h.len() == 2 {
            // x + c => root -c / lead
            let root = f.mul(f.sub(f.p, h[0] % f.p), f.inv(h[1]));
            roots.push(root);
            continue;
        }
        // split with gcd(h, (x+a)^((p-1)/2) - 1)
        loop {
            let a = rng.below(f.p);
            let w = pmod_pow(&[a, 1], (f.p - 1) / 2, &h, f);
            let mut w1 = w;
            if w1.is_empty() {
                w1 = vec![0];
            }
            w1[0] = f.sub(w1[0], 1);
            pmod_trim(&mut w1);
            let g1 = pmod_gcd(&h, &w1, f);
            if g1.len() > 1 && g1.len() < h.len() {
                let (q, _r) = {
                    // exact division h / g1 over GF(p)
                    let dd = g1.len() - 1;
                    let mut rem = h.clone();
                    let mut quo = vec![0u64; rem.len() - dd];
                    let li = f.inv(g1[dd]);
                    for i in (dd..rem.len()).rev() {
                        if rem[i] == 0 {
                            continue;
                        }
                        let q = f.mul(rem[i], li);
                        quo[i - dd] = q;
                        for (j, &dc) in g1.iter().enumerate() {
                            rem[i - dd + j] = f.sub(rem[i - dd + j], f.mul(q, dc));
                        }
                    }
                    pmod_trim(&mut quo);
                    (quo, rem)
                };
                stack.push(g1);
                stack.push(q);
                break;
            }
        }
    }
    roots.sort_unstable();
    roots
}

// ---- eigenvalue lifting -------------------------------------------------------

/// Exact square root of a nonnegative rational, if it is a rational square.
pub fn sqrt_rational(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let sn = r.numer().sqrt();
    let sd = r.denom().sqrt();
    if &(&sn * &sn) == r.numer() && &(&sd * &sd) == r.denom() {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

/// Square-free part of a positive integer, with the square cofactor:
/// n = d * e^2. Trial division; eigenvalue discriminants stay small.
pub fn square_free_decompose(n: &BigInt) -> Option<(i64, BigInt)> {
    if n.is_zero() {
        return Some((0, BigInt::zero()));
    }
    let mut m = n.abs();
    let mut d = BigInt::one();
    let mut e = BigInt::one();
    let mut f = BigInt::from(2);
    let limit = BigInt::from(2_000_000u64);
    while &(&f * &f) <= &m {
        if f > limit {
            return None;
        }
        if (&m % &f).is_zero() {
            let mut count = 0;
            while (&m % &f).is_zero() {
                m = m / &f;
                count += 1;
            }
            for _ in 0..count / 2 {
                e = &e * &f;
            }
            if count % 2 == 1 {
                d = &d * &f;
            }
        }
        f += 1;
    }
    d = &d * &m;
    let d_i64: i64 = d.to_string().parse().ok()?;
    Some((d_i64, e))
}

/// Exact square root of a scalar inside Q or Q(sqrt d): returns (root, disc used).
pub fn sqrt_exact(x: &Scalar) -> Option<(Scalar, Option<i64>)> {
    match x {
        Scalar::Rat(r) => {
            if r.is_negative() {
                return None;
            }
            if let Some(s) = sqrt_rational(r) {
                return Some((Scalar::Rat(s), None));
            }
            // maybe sqrt(r) = y * sqrt(d) with d square-free: r = d y^2
            let num = r.numer();
            let den = r.denom();
            // r = num/den = (num*den)/den^2
            let nd = num * den;
            let (d, e) = square_free_decompose(&nd)?;
            if d <= 1 {
                return None;
            }
            // sqrt(r) = e sqrt(d) / den
            let y = Rational::new(e, den.clone());
            Some((Scalar::quad(Rational::zero(), y, d), Some(d)))
        }
        Scalar::Quad { a, b, d } => {
            // sqrt(a + b sqrt d) = x + y sqrt d needs x^2 + d y^2 = a and 2xy = b,
            // so x^2 - d y^2 = +-sqrt(a^2 - d b^2).
            let dd = Rational::from_integer(BigInt::from(*d));
            let norm = a * a - &dd * b * b;
            let r = sqrt_rational(&norm)?;
            for s in [r.clone(), -r] {
                let x2 = (a + &s) / Rational::from_integer(BigInt::from(2));
                if let Some(xr) = sqrt_rational(&x2) {
                    if !xr.is_zero() {
                        let y = b / (Rational::from_integer(BigInt::from(2)) * &xr);
                        let cand = Scalar::quad(xr, y, *d);
                        if &(&cand * &cand) == x {
                            return Some((cand, Some(*d)));
                        }
                    }
                }
            }
            None
        }
    }
}

fn bigint_poly_eval(p: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    use num_integer::Integer;
    let mut acc = BigInt::zero();
    for c in p.iter().rev() {
        acc = (&acc * x + c).mod_floor(m);
    }
    acc
}

fn bigint_inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    use num_integer::Integer;
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Newton-lift a simple root of P from mod p to mod p^(2^steps).
fn hensel_lift_root(p_int: &[BigInt], root: u64, prime: u64, steps: usize) -> Option<(BigInt, BigInt)> {
    use num_integer::Integer;
    let deriv: Vec<BigInt> = p_int
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let mut modulus = BigInt::from(prime);
    let mut r = BigInt::from(root);
    for _ in 0..steps {
        modulus = &modulus * &modulus;
        let f = bigint_poly_eval(p_int, &r, &modulus);
        let df = bigint_poly_eval(&deriv, &r, &modulus);
        let inv = bigint_inv_mod(&df, &modulus)?;
        r = (&r - f * inv).mod_floor(&modulus);
    }
    Some((r, modulus))
}

/// Clear denominators: primitive integer coefficient vector of a rational poly.
fn primitive_int_poly(p: &[Scalar]) -> Result<Vec<BigInt>> {
    use num_integer::Integer;
    let mut lcm = BigInt::one();
    for c in p {
        let r = c.as_rational().ok_or_else(|| {
            SymError::IrrationalBeyondQuadratic("norm polynomial not rational".into())
        })?;
        lcm = lcm.lcm(r.denom());
    }
    let mut out: Vec<BigInt> = p
        .iter()
        .map(|c| {
            let r = c.as_rational().unwrap();
            r.numer() * (&lcm / r.denom())
        })
        .collect();
    let mut g = BigInt::zero();
    for c in &out {
        g = g.gcd(c);
    }
    if !g.is_zero() && !g.is_one() {
        for c in out.iter_mut() {
            *c = &*c / &g;
        }
    }
    Ok(out)
}

fn conj_poly(p: &[Scalar]) -> Poly {
    p.iter().map(|c| c.conj()).collect()
}

/// All roots of the square-free exact polynomial `g` that lie in Q or in a
/// single quadratic extension. `model_d` pins the extension when the model
/// already lives in one. Errors when roots demand more.
pub fn roots_in_quadratic(g: &[Scalar], model_d: Option<i64>, rng: &mut Rng) -> Result<Vec<Scalar>> {
    let mut g: Poly = g.to_vec();
    poly_trim(&mut g);
    let deg = g.len() - 1;
    if deg == 0 {
        return Ok(vec![]);
    }
    // rational-coefficient norm polynomial
    let has_quad_coeffs = g.iter().any(|c| c.disc().is_some());
    let norm: Poly = if has_quad_coeffs {
        let prod_terms = poly_mul(&g, &conj_poly(&g));
        prod_terms
    } else {
        g.clone()
    };
    let pint = primitive_int_poly(&norm)?;

    let mut found: Vec<Scalar> = Vec::new();
    let push_if_root = |cand: Scalar, found: &mut Vec<Scalar>| {
        if poly_eval(&g, &cand).is_zero() && !found.contains(&cand) {
            found.push(cand);
        }
    };

    // Roots u + v*sqrt(d) only reduce mod p when d is a residue mod p, so a
    // single prime can come up empty; sample several (success chance 1/2 each).
    // Residues are Hensel-lifted (p^4 normally, p^16 on the last attempts)
    // before rational reconstruction, which covers every catalog height.
    let mut prng = rng.derive("eigen-primes");
    let mut stagnant = 0usize;
    let mut last_found = usize::MAX;
    for attempt in 0..10 {
        let p = if attempt < 2 {
            prng.prime(model_d)
        } else {
            prng.prime(None)
        };
        let f = FpCtx::new(p);
        let pm: Vec<u64> = pint.iter().map(|c| f.bigint(c)).collect();
        let mut pm = pm;
        pmod_trim(&mut pm);
        if pm.len() != pint.len() {
            continue; // leading coefficient vanished mod p; try another prime
        }
        let residues = roots_mod_p(&pm, &f, &mut prng.derive("cz"));
        // p^4 covers every catalog height; the last attempts escalate to p^16
        // in case a reconstruction genuinely needs more headroom
        let steps = if attempt < 8 { 2 } else { 4 };
        let lifted: Vec<(BigInt, BigInt)> = residues
            .iter()
            .filter_map(|&r0| hensel_lift_root(&pint, r0, p, steps))
            .collect();
        if lifted.len() != residues.len() {
            continue; // a repeated root mod p blocked the lift; try another prime
        }
        let m = lifted
            .first()
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| BigInt::from(p));
        // linear lifts
        for (r0, _) in &lifted {
            if let Some(q) = rational_reconstruct(r0, &m) {
                push_if_root(Scalar::Rat(q.clone()), &mut found);
            }
        }
        // conjugate-pair lifts through rational quadratic factors x^2 - s x + t
        'pairs: for (i, (r1, _)) in lifted.iter().enumerate() {
            if found.len() == deg {
                break 'pairs;
            }
            for (r2, _) in lifted.iter().skip(i) {
                use num_integer::Integer;
                let s_res = (r1 + r2).mod_floor(&m);
                let t_res = (r1 * r2).mod_floor(&m);
                let (s, t) = match (
                    rational_reconstruct(&s_res, &m),
                    rational_reconstruct(&t_res, &m),
                ) {
                    (Some(s), Some(t)) => (s, t),
                    _ => continue,
                };
                // disc = s^2 - 4t must be d * e^2 with d square-free
                let disc = &s * &s - Rational::from_integer(BigInt::from(4)) * &t;
                if disc.is_negative() || disc.is_zero() {
                    continue;
                }
                let half = Rational::new(BigInt::one(), BigInt::from(2));
                if let Some(rt) = sqrt_rational(&disc) {
                    for sign in [1i64, -1] {
                        let lam = (&s + Rational::from_integer(BigInt::from(sign)) * &rt) * &half;
                        push_if_root(Scalar::Rat(lam), &mut found);
                    }
                } else if let Some((cand, _)) = sqrt_exact(&Scalar::Rat(disc.clone())) {
                    if let Some(dd) = cand.disc() {
                        if model_d.is_some() && model_d != Some(dd) {
                            continue;
                        }
                        for sign in [1i64, -1] {
                            let lam = &(&Scalar::Rat(s.clone())
                                + &(&Scalar::from_int(sign) * &cand))
                                * &Scalar::from_frac(1, 2);
                            push_if_root(lam, &mut found);
                        }
                    }
                }
            }
        }
        if found.len() == deg {
            break;
        }
        // a stable shortfall across several primes signals roots genuinely
        // outside a single quadratic extension (e.g. a biquadratic spectrum,
        // which factors quadratically modulo every prime); stop burning primes
        if found.len() == last_found {
            stagnant += 1;
            if stagnant >= 3 && attempt >= 4 {
                break;
            }
        } else {
            stagnant = 0;
            last_found = found.len();
        }
    }
    Ok(found)
}

pub fn poly_mul(a: &[Scalar], b: &[Scalar]) -> Poly {
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += &(x * y);
            }
        }
    }
    poly_trim(&mut out);
    out
}

/// Cheap feasibility filter: the matrix char poly mod p has factor degrees
/// bounded by the exact factor degrees over the working field, so seeing a
/// factor of degree above the allowance proves the exact spectrum escapes a
/// single quadratic extension. False accepts fall through to the exact path.
fn spectrum_feasible_mod_p(m: &DMat, model_d: Option<i64>, rng: &mut Rng) -> bool {
    let n = m.nrows;
    let mut prng = rng.derive("feasibility");
    'prime: for _ in 0..3 {
        let p = prng.prime(model_d);
        let ctx = match model_d {
            None => FpCtx::new(p),
            Some(d) => match FpCtx::with_disc(p, d) {
                Some(c) => c,
                None => continue,
            },
        };
        // reduce the matrix; a denominator hit just skips the filter
        let mut a = vec![0u64; n * n];
        for r in 0..n {
            for c in 0..n {
                match m.at(r, c).to_fp(&ctx) {
                    Ok(v) => a[r * n + c] = v,
                    Err(_) => continue 'prime,
                }
            }
        }
        // Faddeev-LeVerrier mod p (p is far above n, so the divisions exist)
        let mut coeffs = vec![0u64; n + 1];
        coeffs[n] = 1;
        let mut mk: Vec<u64> = {
            let mut id = vec![0u64; n * n];
            for i in 0..n {
                id[i * n + i] = 1;
            }
            id
        };
        for k in 1..=n {
            // mk = a * mk
            let mut next = vec![0u64; n * n];
            for r in 0..n {
                for t in 0..n {
                    let v = a[r * n + t];
                    if v == 0 {
                        continue;
                    }
                    for c in 0..n {
                        next[r * n + c] =
                            ctx.add(next[r * n + c], ctx.mul(v, mk[t * n + c]));
                    }
                }
            }
            mk = next;
            let mut tr = 0u64;
            for i in 0..n {
                tr = ctx.add(tr, mk[i * n + i]);
            }
            let c = ctx.mul(ctx.sub(0, tr), ctx.inv(k as u64));
            coeffs[n - k] = c;
            for i in 0..n {
                mk[i * n + i] = ctx.add(mk[i * n + i], c);
            }
        }
        // square-free part, then distinct-degree up to the allowance
        let deriv: Vec<u64> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| ctx.mul(c, (i as u64) % ctx.p))
            .collect();
        let g = pmod_gcd(&coeffs, &deriv, &ctx);
        let sf = if g.len() <= 1 {
            coeffs.clone()
        } else {
            let dd = g.len() - 1;
            let mut rem = coeffs.clone();
            let mut quo = vec![0u64; rem.len() - dd];
            let li = ctx.inv(g[dd]);
            for i in (dd..rem.len()).rev() {
                if rem[i] == 0 {
                    continue;
                }
                let q = ctx.mul(rem[i], li);
                quo[i - dd] = q;
                for (j, &dc) in g.iter().enumerate() {
                    rem[i - dd + j] = ctx.sub(rem[i - dd + j], ctx.mul(q, dc));
                }
            }
            pmod_trim(&mut quo);
            quo
        };
        // strip factors of degree 1 (and 2 when a new extension is allowed)
        let allowance = if model_d.is_some() { 1 } else { 2 };
        let mut h = sf;
        for d in 1..=allowance {
            if h.len() <= 1 {
                return true;
            }
            let mut xpd = pmod_xpow(ctx.p, &h, &ctx);
            for _ in 1..d {
                xpd = pmod_pow(&xpd, ctx.p, &h, &ctx);
            }
            // gcd(x^{p^d} - x, h)
            if xpd.len() < 2 {
                xpd.resize(2, 0);
            }
            xpd[1] = ctx.sub(xpd[1], 1);
            pmod_trim(&mut xpd);
            let f = pmod_gcd(&h, &xpd, &ctx);
            if f.len() > 1 {
                let dd = f.len() - 1;
                let mut rem = h.clone();
                let mut quo = vec![0u64; rem.len() - dd];
                let li = ctx.inv(f[dd]);
                for i in (dd..rem.len()).rev() {
                    if rem[i] == 0 {
                        continue;
                    }
                    let q = ctx.mul(rem[i], li);
                    quo[i - dd] = q;
                    for (j, &dc) in f.iter().enumerate() {
                        rem[i - dd + j] = ctx.sub(rem[i - dd + j], ctx.mul(q, dc));
                    }
                }
                pmod_trim(&mut quo);
                h = quo;
            }
        }
        return h.len() <= 1;
    }
    true // no usable prime found; let the exact path decide
}

/// Distinct eigenvalues with exact eigenspace bases; errors unless the whole
/// spectrum lies in Q or a single quadratic extension.
pub fn eigen_decompose(
    m: &DMat,
    model_d: Option<i64>,
    rng: &mut Rng,
) -> Result<Vec<(Scalar, Vec<Vec<Scalar>>)>> {
    let n = m.nrows;
    if !spectrum_feasible_mod_p(m, model_d, rng) {
        return Err(SymError::IrrationalBeyondQuadratic(
            "a modular factor degree exceeds the quadratic allowance".into(),
        ));
    }
    let chi = char_poly(m);
    let sf = square_free_part(&chi);
    let eigs = roots_in_quadratic(&sf, model_d, rng)?;
    // one quadratic extension per computation
    let mut disc = model_d;
    for l in &eigs {
        if let Some(d) = l.disc() {
            match disc {
                None => disc = Some(d),
                Some(prev) if prev == d => {}
                Some(prev) => {
                    return Err(SymError::IrrationalBeyondQuadratic(format!(
                        "eigenvalues in Q(sqrt {prev}) and Q(sqrt {d})"
                    )))
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut total = 0usize;
    for lam in eigs {
        let shifted = DMat::from_fn(n, n, |r, c| {
            if r == c {
                m.at(r, c) - &lam
            } else {
                m.at(r, c).clone()
            }
        });
        let ker = shifted.kernel();
        if ker.is_empty() {
            continue;
        }
        total += ker.len();
        out.push((lam, ker));
    }
    if total != n {
        return Err(SymError::IrrationalBeyondQuadratic(format!(
            "found eigenspaces of total dimension {total} < {n}"
        )));
    }
    // deterministic order
    out.sort_by(|a, b| format!("{}", a.0).cmp(&format!("{}", b.0)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Scalar {
        Scalar::from_int(v)
    }

    #[test]
    fn char_poly_of_diag() {
        let m = DMat::from_fn(3, 3, |r, c| if r == c { s([1, 2, 2][r]) } else { s(0) });
        let chi = char_poly(&m);
        // (x-1)(x-2)^2 = x^3 - 5x^2 + 8x - 4
        assert_eq!(chi, vec![s(-4), s(8), s(-5), s(1)]);
        let sf = square_free_part(&chi);
        // (x-1)(x-2) = x^2 - 3x + 2
        assert_eq!(sf, vec![s(2), s(-3), s(1)]);
    }

    #[test]
    fn rational_eigen_decomposition() {
        let m = DMat::from_fn(2, 2, |r, c| s([[2, 1], [1, 2]][r][c]));
        let mut rng = Rng::new(5);
        let eig = eigen_decompose(&m, None, &mut rng).unwrap();
        let vals: Vec<String> = eig.iter().map(|(l, _)| format!("{l}")).collect();
        assert!(vals.contains(&"1".to_string()) && vals.contains(&"3".to_string()));
    }

    #[test]
    fn quadratic_eigenvalues_lift() {
        // [[0,1],[2,0]] has eigenvalues +-sqrt(2)
        let m = DMat::from_fn(2, 2, |r, c| s([[0, 1], [2, 0]][r][c]));
        let mut rng = Rng::new(5);
        let eig = eigen_decompose(&m, None, &mut rng).unwrap();
        assert_eq!(eig.len(), 2);
        for (l, basis) in &eig {
            assert_eq!(basis.len(), 1);
            assert_eq!(l.disc(), Some(2));
        }
    }

    #[test]
    fn quad_coefficient_matrix() {
        // [[sqrt3, 0], [0, 1 - sqrt3]] over Q(sqrt 3)
        let s3 = Scalar::sqrt_d(3);
        let m = DMat::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) => s3.clone(),
            (1, 1) => &s(1) - &s3,
            _ => Scalar::zero(),
        });
        let mut rng = Rng::new(9);
        let eig = eigen_decompose(&m, Some(3), &mut rng).unwrap();
        assert_eq!(eig.len(), 2);
    }

    #[test]
    fn sqrt_exact_cases() {
        assert_eq!(
            sqrt_exact(&Scalar::from_frac(9, 4)).unwrap().0,
            Scalar::from_frac(3, 2)
        );
        let (r, d) = sqrt_exact(&s(12)).unwrap();
        assert_eq!(d, Some(3));
        assert_eq!(&r * &r, s(12));
        // sqrt(7 + 4 sqrt 3) = 2 + sqrt 3
        let x = &s(7) + &(&s(4) * &Scalar::sqrt_d(3));
        let (r, _) = sqrt_exact(&x).unwrap();
        assert_eq!(&r * &r, x);
        assert!(sqrt_exact(&s(-1)).is_none());
    }
}

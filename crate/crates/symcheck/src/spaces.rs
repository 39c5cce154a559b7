//! Catalog of symmetric-space tangent models: exact Lie-triple-system structure
//! constants for real Grassmannians, complex/quaternionic projective spaces,
//! the Cayley plane, SL(3)/SO(3) and its compact dual, and G2/SO(4), plus
//! products, duals and axiom validation.

use num_bigint::BigInt;

use crate::dense::DMat;
use crate::eigen::sqrt_exact;
use crate::error::{Result, SymError};
use crate::scalar::{Rational, Scalar};

/// Grammar term for a catalog space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceSpec {
    Gr(usize, usize),
    Cp(usize),
    Hp(usize),
    Op2,
    Sl3So3,
    Su3So3,
    G2So4,
    Prod(Box<SpaceSpec>, Box<SpaceSpec>),
    Dual(Box<SpaceSpec>),
}

impl SpaceSpec {
    pub const GRAMMAR: &'static str =
        "gr(p,q) | cp(m) | hp(d) | op2 | sl3so3 | su3so3 | g2so4 | prod(s,t) | dual(s)";

    /// Parse the CLI grammar; errors echo the grammar.
    pub fn parse(s: &str) -> Result<SpaceSpec> {
        let with_grammar = |e: SymError| match e {
            SymError::InvalidSpec(msg) => {
                SymError::InvalidSpec(format!("{msg}; grammar: {}", Self::GRAMMAR))
            }
            other => other,
        };
        let (spec, rest) = Self::parse_prefix(s.trim()).map_err(with_grammar)?;
        if !rest.is_empty() {
            return Err(SymError::InvalidSpec(format!(
                "trailing input `{rest}` in `{s}`; grammar: {}",
                Self::GRAMMAR
            )));
        }
        spec.validate().map_err(with_grammar)?;
        Ok(spec)
    }

    fn parse_prefix(s: &str) -> Result<(SpaceSpec, &str)> {
        let bad = |s: &str| SymError::InvalidSpec(format!("cannot parse `{s}`"));
        let ident_len = s
            .find(|c: char| !c.is_ascii_alphanumeric())
            .unwrap_or(s.len());
        let (head, rest) = s.split_at(ident_len);
        match head {
            "op2" => Ok((SpaceSpec::Op2, rest)),
            "sl3so3" => Ok((SpaceSpec::Sl3So3, rest)),
            "su3so3" => Ok((SpaceSpec::Su3So3, rest)),
            "g2so4" => Ok((SpaceSpec::G2So4, rest)),
            "gr" | "cp" | "hp" => {
                let rest = rest.strip_prefix('(').ok_or_else(|| bad(s))?;
                let close = rest.find(')').ok_or_else(|| bad(s))?;
                let args: Vec<&str> = rest[..close].split(',').map(|a| a.trim()).collect();
                let tail = &rest[close + 1..];
                let num = |a: &str| -> Result<usize> { a.parse().map_err(|_| bad(s)) };
                match head {
                    "gr" => {
                        if args.len() != 2 {
                            return Err(bad(s));
                        }
                        Ok((SpaceSpec::Gr(num(args[0])?, num(args[1])?), tail))
                    }
                    "cp" => {
                        if args.len() != 1 {
                            return Err(bad(s));
                        }
                        Ok((SpaceSpec::Cp(num(args[0])?), tail))
                    }
                    _ => {
                        if args.len() != 1 {
                            return Err(bad(s));
                        }
                        Ok((SpaceSpec::Hp(num(args[0])?), tail))
                    }
                }
            }
            "prod" => {
                let rest = rest.strip_prefix('(').ok_or_else(|| bad(s))?;
                let (a, rest) = Self::parse_prefix(rest)?;
                let rest = rest.strip_prefix(',').ok_or_else(|| bad(s))?;
                let (b, rest) = Self::parse_prefix(rest.trim_start())?;
                let rest = rest.strip_prefix(')').ok_or_else(|| bad(s))?;
                Ok((SpaceSpec::Prod(Box::new(a), Box::new(b)), rest))
            }
            "dual" => {
                let rest = rest.strip_prefix('(').ok_or_else(|| bad(s))?;
                let (a, rest) = Self::parse_prefix(rest)?;
                let rest = rest.strip_prefix(')').ok_or_else(|| bad(s))?;
                Ok((SpaceSpec::Dual(Box::new(a)), rest))
            }
            _ => Err(bad(s)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::Gr(p, q) => {
                if *p >= *q && *q >= 1 {
                    Ok(())
                } else {
                    Err(SymError::InvalidSpec(format!(
                        "gr({p},{q}) needs p >= q >= 1"
                    )))
                }
            }
            SpaceSpec::Cp(m) => {
                if *m >= 2 {
                    Ok(())
                } else {
                    Err(SymError::InvalidSpec("cp(m) needs m >= 2".into()))
                }
            }
            SpaceSpec::Hp(d) => {
                if *d >= 2 {
                    Ok(())
                } else {
                    Err(SymError::InvalidSpec("hp(d) needs d >= 2".into()))
                }
            }
            SpaceSpec::Prod(a, b) => {
                a.validate()?;
                b.validate()
            }
            SpaceSpec::Dual(a) => a.validate(),
            _ => Ok(()),
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            SpaceSpec::Gr(p, q) => format!("gr({p},{q})"),
            SpaceSpec::Cp(m) => format!("cp({m})"),
            SpaceSpec::Hp(d) => format!("hp({d})"),
            SpaceSpec::Op2 => "op2".into(),
            SpaceSpec::Sl3So3 => "sl3so3".into(),
            SpaceSpec::Su3So3 => "su3so3".into(),
            SpaceSpec::G2So4 => "g2so4".into(),
            SpaceSpec::Prod(a, b) => format!("prod({},{})", a.canonical(), b.canonical()),
            SpaceSpec::Dual(a) => format!("dual({})", a.canonical()),
        }
    }
}

/// A symmetric-space tangent algebra: dimension, sign, and the exact triple
/// bracket c[i][j][k][l] = <[[e_i,e_j],e_k], e_l> over an orthonormal basis.
#[derive(Clone)]
pub struct SpaceModel {
    pub name: String,
    pub n: usize,
    /// +1 compact, -1 noncompact.
    pub sign: i8,
    /// Discriminant of the quadratic extension the constants live in, if any.
    pub disc: Option<i64>,
    triple: Vec<Scalar>,
    pub factor_blocks: Vec<Vec<usize>>,
    pub complex_j: Option<DMat>,
    pub quaternion_j: Option<Vec<DMat>>,
    /// so(7) representatives of the basis, kept for the G2/SO(4) closure check.
    pub embedding: Option<Vec<DMat>>,
}

impl SpaceModel {
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize, l: usize) -> &Scalar {
        let n = self.n;
        &self.triple[((i * n + j) * n + k) * n + l]
    }

    /// [[e_i, e_j], e_k] as a coordinate vector.
    pub fn bracket3_basis(&self, i: usize, j: usize, k: usize) -> Vec<Scalar> {
        (0..self.n).map(|l| self.c(i, j, k, l).clone()).collect()
    }

    /// Matrix of ad_{[e_i,e_j]} (entry (l,k) = <[[e_i,e_j],e_k], e_l>).
    pub fn ad_pair(&self, i: usize, j: usize) -> DMat {
        DMat::from_fn(self.n, self.n, |l, k| self.c(i, j, k, l).clone())
    }

    /// Matrix of ad_{[x,y]} for arbitrary exact vectors.
    pub fn ad_of(&self, x: &[Scalar], y: &[Scalar]) -> DMat {
        let n = self.n;
        let mut m = DMat::zeros(n, n);
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let coef = &x[i] * &y[j];
                for k in 0..n {
                    for l in 0..n {
                        let c = self.c(i, j, k, l);
                        if !c.is_zero() {
                            *m.at_mut(l, k) += &(&coef * c);
                        }
                    }
                }
            }
        }
        m
    }

    /// [[x, y], z] for arbitrary exact vectors.
    pub fn bracket3(&self, x: &[Scalar], y: &[Scalar], z: &[Scalar]) -> Vec<Scalar> {
        let n = self.n;
        let mut out = vec![Scalar::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let cij = &x[i] * &y[j];
                for k in 0..n {
                    if z[k].is_zero() {
                        continue;
                    }
                    let co = &cij * &z[k];
                    for l in 0..n {
                        let c = self.c(i, j, k, l);
                        if !c.is_zero() {
                            out[l] += &(&co * c);
                        }
                    }
                }
            }
        }
        out
    }

    /// True when [x,y] = 0 in h, i.e. ad_{[x,y]} vanishes on m.
    pub fn commutes(&self, x: &[Scalar], y: &[Scalar]) -> bool {
        self.ad_of(x, y).is_zero()
    }

    pub fn block_of(&self, idx: usize) -> usize {
        self.factor_blocks
            .iter()
            .position(|b| b.contains(&idx))
            .expect("basis index outside factor blocks")
    }

    pub fn is_irreducible(&self) -> bool {
        self.factor_blocks.len() == 1
    }

    /// Same model with the triple bracket scaled by t (Gram matrix unchanged).
    pub fn scale_bracket(&self, t: &Scalar) -> SpaceModel {
        let mut m = self.clone();
        m.name = format!("scaled({})", self.name);
        for c in m.triple.iter_mut() {
            *c = &*c * t;
        }
        m
    }

    /// Dual model: triple bracket negated, sign flipped.
    pub fn dual(&self) -> SpaceModel {
        let mut m = self.clone();
        m.name = format!("dual({})", self.name);
        m.sign = -self.sign;
        for c in m.triple.iter_mut() {
            *c = -&*c;
        }
        m
    }

    /// Nonzero structure constants as (i, j, k, l, value) rows.
    pub fn nonzero_constants(&self) -> Vec<(usize, usize, usize, usize, Scalar)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    for l in 0..self.n {
                        let c = self.c(i, j, k, l);
                        if !c.is_zero() {
                            out.push((i, j, k, l, c.clone()));
                        }
                    }
                }
            }
        }
        out
    }
}

fn from_table(
    name: String,
    n: usize,
    sign: i8,
    triple: Vec<Scalar>,
) -> SpaceModel {
    let disc = triple.iter().find_map(|c| c.disc());
    SpaceModel {
        name,
        n,
        sign,
        disc,
        triple,
        factor_blocks: vec![(0..n).collect()],
        complex_j: None,
        quaternion_j: None,
        embedding: None,
    }
}

/// Fill the triple table from a closure producing ad_{[e_i,e_j]} matrices.
fn table_from_ad(n: usize, mut ad: impl FnMut(usize, usize) -> DMat) -> Vec<Scalar> {
    let mut triple = vec![Scalar::zero(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let m = if i < j { ad(i, j) } else { ad(j, i).neg() };
            for k in 0..n {
                for l in 0..n {
                    triple[((i * n + j) * n + k) * n + l] = m.at(l, k).clone();
                }
            }
        }
    }
    triple
}

/// (x wedge y) as a matrix: z -> <x,z> y - <y,z> x.
pub fn wedge(x: &[Scalar], y: &[Scalar]) -> DMat {
    let n = x.len();
    DMat::from_fn(n, n, |r, c| &(&x[c] * &y[r]) - &(&y[c] * &x[r]))
}

fn basis_vec(n: usize, i: usize) -> Vec<Scalar> {
    let mut v = vec![Scalar::zero(); n];
    v[i] = Scalar::one();
    v
}

// ---- real Grassmannian ---------------------------------------------------------

/// gr(p,q): m = M_{p,q}(R) with ad_{[X,Y]}Z = YX^tZ - XY^tZ + ZX^tY - ZY^tX,
/// orthonormal basis E_{a,alpha} under Tr(XY^t), index a*q + alpha.
fn build_gr(p: usize, q: usize) -> SpaceModel {
    let n = p * q;
    type M = Vec<Vec<i64>>;
    let unit = |a: usize, al: usize| -> M {
        let mut m = vec![vec![0i64; q]; p];
        m[a][al] = 1;
        m
    };
    let mul = |x: &M, y: &M, xr: usize, xc: usize, yc: usize| -> M {
        // x: xr x xc, y: xc x yc
        let mut out = vec![vec![0i64; yc]; xr];
        for r in 0..xr {
            for k in 0..xc {
                if x[r][k] == 0 {
                    continue;
                }
                for c in 0..yc {
                    out[r][c] += x[r][k] * y[k][c];
                }
            }
        }
        out
    };
    let tr = |x: &M| -> M {
        let mut out = vec![vec![0i64; x.len()]; x[0].len()];
        for (r, row) in x.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                out[c][r] = v;
            }
        }
        out
    };
    let ad_apply = |x: &M, y: &M, z: &M| -> M {
        // YX^tZ - XY^tZ + ZX^tY - ZY^tX
        let xt = tr(x);
        let yt = tr(y);
        let t1 = mul(y, &mul(&xt, z, q, p, q), p, q, q);
        let t2 = mul(x, &mul(&yt, z, q, p, q), p, q, q);
        let t3 = mul(z, &mul(&xt, y, q, p, q), p, q, q);
        let t4 = mul(z, &mul(&yt, x, q, p, q), p, q, q);
        let mut out = vec![vec![0i64; q]; p];
        for r in 0..p {
            for c in 0..q {
                out[r][c] = t1[r][c] - t2[r][c] + t3[r][c] - t4[r][c];
            }
        }
        out
    };
    let mats: Vec<M> = (0..p)
        .flat_map(|a| (0..q).map(move |al| (a, al)))
        .map(|(a, al)| unit(a, al))
        .collect();
    let triple = table_from_ad(n, |i, j| {
        DMat::from_fn(n, n, |l, k| {
            let img = ad_apply(&mats[i], &mats[j], &mats[k]);
            let (a, al) = (l / q, l % q);
            Scalar::from_int(img[a][al])
        })
    });
    from_table(format!("gr({p},{q})"), n, 1, triple)
}

// ---- complex projective space ---------------------------------------------------

fn cp_j(n: usize) -> DMat {
    // J e_{2k} = e_{2k+1}, J e_{2k+1} = -e_{2k}
    DMat::from_fn(n, n, |r, c| {
        if c % 2 == 0 && r == c + 1 {
            Scalar::one()
        } else if c % 2 == 1 && r + 1 == c {
            Scalar::from_int(-1)
        } else {
            Scalar::zero()
        }
    })
}

/// cp(m): ad_{[X,Y]} = X ^ Y + 2<JX,Y> J + (JX) ^ (JY) on R^{2m}.
fn build_cp(m: usize) -> SpaceModel {
    let n = 2 * m;
    let j = cp_j(n);
    let triple = table_from_ad(n, |a, b| {
        let x = basis_vec(n, a);
        let y = basis_vec(n, b);
        let jx = j.apply(&x);
        let jy = j.apply(&y);
        let coef = &crate::dense::dot(&jx, &y) * &Scalar::from_int(2);
        wedge(&x, &y).add(&j.scale(&coef)).add(&wedge(&jx, &jy))
    });
    let mut model = from_table(format!("cp({m})"), n, 1, triple);
    model.complex_j = Some(j);
    model
}

// ---- quaternionic projective space ----------------------------------------------

fn hp_js(n: usize) -> Vec<DMat> {
    // left multiplication by i, j, k on H^d with basis (1, i, j, k) per coordinate:
    // L_i: 1->i, i->-1, j->k,  k->-j
    // L_j: 1->j, i->-k, j->-1, k->i
    // L_k: 1->k, i->j,  j->-i, k->-1
    let tbl_i: [(usize, i64); 4] = [(1, 1), (0, -1), (3, 1), (2, -1)];
    let tbl_j: [(usize, i64); 4] = [(2, 1), (3, -1), (0, -1), (1, 1)];
    let tbl_k: [(usize, i64); 4] = [(3, 1), (2, 1), (1, -1), (0, -1)];
    [tbl_i, tbl_j, tbl_k]
        .iter()
        .map(|t| {
            DMat::from_fn(n, n, |r, c| {
                let (block, off) = (c / 4, c % 4);
                let (img, sgn) = t[off];
                if r == block * 4 + img {
                    Scalar::from_int(sgn)
                } else {
                    Scalar::zero()
                }
            })
        })
        .collect()
}

/// hp(d): ad_{[X,Y]} = X ^ Y + sum_i (2<J_iX,Y> J_i + (J_iX) ^ (J_iY)).
fn build_hp(d: usize) -> SpaceModel {
    let n = 4 * d;
    let js = hp_js(n);
    let triple = table_from_ad(n, |a, b| {
        let x = basis_vec(n, a);
        let y = basis_vec(n, b);
        let mut m = wedge(&x, &y);
        for j in &js {
            let jx = j.apply(&x);
            let jy = j.apply(&y);
            let coef = &crate::dense::dot(&jx, &y) * &Scalar::from_int(2);
            m = m.add(&j.scale(&coef)).add(&wedge(&jx, &jy));
        }
        m
    });
    let mut model = from_table(format!("hp({d})"), n, 1, triple);
    model.quaternion_j = Some(js);
    model
}

// ---- SL(3)/SO(3) ----------------------------------------------------------------

/// Unnormalized integer basis of the symmetric traceless 3x3 matrices,
/// in the order e1..e5 with squared norms [2, 2, 2, 2, 6].
pub(crate) fn sl3_raw_basis() -> (Vec<DMat>, Vec<i64>) {
    let e = |entries: &[(usize, usize, i64)]| {
        let mut m = DMat::zeros(3, 3);
        for &(r, c, v) in entries {
            *m.at_mut(r, c) = Scalar::from_int(v);
        }
        m
    };
    let basis = vec![
        e(&[(0, 1, 1), (1, 0, 1)]),
        e(&[(0, 2, 1), (2, 0, 1)]),
        e(&[(1, 2, 1), (2, 1, 1)]),
        e(&[(0, 0, 1), (1, 1, -1)]),
        e(&[(0, 0, 1), (1, 1, 1), (2, 2, -2)]),
    ];
    (basis, vec![2, 2, 2, 2, 6])
}

/// Structure constants from an embedded integer-matrix basis with squared
/// norms `sq`: c[i][j][k][l] = Tr([[T_i,T_j],T_k] T_l^t) / sqrt(prod of norms).
/// The square root lands in Q or Q(sqrt 3) for both embedded catalog models.
fn table_from_embedding(basis: &[DMat], sq: &[i64], n: usize) -> Result<Vec<Scalar>> {
    let mut triple = vec![Scalar::zero(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let bij = basis[i].commutator(&basis[j]);
            for k in 0..n {
                let img = bij.commutator(&basis[k]);
                for l in 0..n {
                    let t = img.frob(&basis[l]);
                    if t.is_zero() {
                        continue;
                    }
                    let prod = BigInt::from(sq[i]) * sq[j] * sq[k] * sq[l];
                    let (root, _) = sqrt_exact(&Scalar::Rat(Rational::from_integer(prod)))
                        .ok_or_else(|| {
                            SymError::ConstructionInvalid(
                                "norm product without exact square root".into(),
                            )
                        })?;
                    triple[((i * n + j) * n + k) * n + l] = &t / &root;
                }
            }
        }
    }
    Ok(triple)
}

fn build_sl3so3() -> Result<SpaceModel> {
    let (basis, sq) = sl3_raw_basis();
    let triple = table_from_embedding(&basis, &sq, 5)?;
    Ok(from_table("sl3so3".into(), 5, -1, triple))
}

// ---- G2/SO(4) -------------------------------------------------------------------

/// so(7) matrix G_{ij} with +1 at (i,j), -1 at (j,i); 1-based indices.
fn g_mat(i: usize, j: usize) -> DMat {
    let mut m = DMat::zeros(7, 7);
    *m.at_mut(i - 1, j - 1) = Scalar::one();
    *m.at_mut(j - 1, i - 1) = Scalar::from_int(-1);
    m
}

/// Root-vector basis T_1..T_8 of m = g_1 + g_2 + g_5 + g_7 inside so(7),
/// with the amended sign of T_6; squared norms alternate 12 and 4.
fn g2_raw_basis() -> (Vec<DMat>, Vec<i64>) {
    let lin = |terms: &[(i64, (usize, usize))]| {
        let mut m = DMat::zeros(7, 7);
        for &(c, (i, j)) in terms {
            m = m.add(&g_mat(i, j).scale(&Scalar::from_int(c)));
        }
        m
    };
    let t1 = lin(&[(1, (2, 6)), (1, (4, 5)), (-2, (1, 3))]);
    let t2 = lin(&[(1, (4, 7)), (1, (2, 3))]);
    let t3 = lin(&[(1, (3, 5)), (1, (6, 7)), (2, (1, 4))]);
    let t4 = lin(&[(1, (2, 6)), (-1, (4, 5))]);
    let t5 = lin(&[(1, (4, 7)), (-1, (2, 3)), (-2, (1, 6))]);
    let t6 = lin(&[(1, (3, 5)), (-1, (6, 7))]);
    let t7 = lin(&[(1, (2, 4)), (1, (3, 7)), (-2, (5, 6))]);
    let t8 = lin(&[(1, (2, 4)), (-1, (3, 7))]);
    (
        vec![t1, t2, t3, t4, t5, t6, t7, t8],
        vec![12, 4, 12, 4, 12, 4, 12, 4],
    )
}

fn build_g2so4() -> Result<SpaceModel> {
    let (basis, sq) = g2_raw_basis();
    // closure check: every double commutator must project back exactly
    for i in 0..8 {
        for j in 0..8 {
            for k in 0..8 {
                let m = basis[i].commutator(&basis[j]).commutator(&basis[k]);
                let mut recon = DMat::zeros(7, 7);
                for (l, b) in basis.iter().enumerate() {
                    let coef = &m.frob(b) / &Scalar::from_int(sq[l]);
                    recon = recon.add(&b.scale(&coef));
                }
                if recon != m {
                    return Err(SymError::ConstructionInvalid(format!(
                        "[[T{},T{}],T{}] escapes span(T1..T8)",
                        i + 1,
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
    }
    let triple = table_from_embedding(&basis, &sq, 8)?;
    let mut model = from_table("g2so4".into(), 8, 1, triple);
    // normalized embedding e_i = T_i / ||T_i||; 1/sqrt(12) and 1/2 stay in Q(sqrt 3)
    let emb = basis
        .iter()
        .zip(sq.iter())
        .map(|(b, &s)| {
            let (root, _) = sqrt_exact(&Scalar::from_int(s)).unwrap();
            b.scale(&root.inv())
        })
        .collect();
    model.embedding = Some(emb);
    Ok(model)
}

// ---- products and the public builder --------------------------------------------

/// Block-diagonal product: mixed structure constants vanish.
pub fn product(a: &SpaceModel, b: &SpaceModel) -> Result<SpaceModel> {
    if a.sign != b.sign {
        return Err(SymError::SignMismatch);
    }
    if let (Some(da), Some(db)) = (a.disc, b.disc) {
        if da != db {
            return Err(SymError::MixedExtensions {
                what: format!("product of Q(sqrt {da}) and Q(sqrt {db}) models"),
            });
        }
    }
    let n = a.n + b.n;
    let mut triple = vec![Scalar::zero(); n * n * n * n];
    let mut set = |i: usize, j: usize, k: usize, l: usize, v: Scalar| {
        triple[((i * n + j) * n + k) * n + l] = v;
    };
    for i in 0..a.n {
        for j in 0..a.n {
            for k in 0..a.n {
                for l in 0..a.n {
                    set(i, j, k, l, a.c(i, j, k, l).clone());
                }
            }
        }
    }
    for i in 0..b.n {
        for j in 0..b.n {
            for k in 0..b.n {
                for l in 0..b.n {
                    set(a.n + i, a.n + j, a.n + k, a.n + l, b.c(i, j, k, l).clone());
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = a.factor_blocks.clone();
    for blk in &b.factor_blocks {
        blocks.push(blk.iter().map(|&i| i + a.n).collect());
    }
    let disc = a.disc.or(b.disc);
    Ok(SpaceModel {
        name: format!("prod({},{})", a.name, b.name),
        n,
        sign: a.sign,
        disc,
        triple,
        factor_blocks: blocks,
        complex_j: None,
        quaternion_j: None,
        embedding: None,
    })
}

/// Build the exact model for a space spec.
pub fn build_model(spec: &SpaceSpec) -> Result<SpaceModel> {
    spec.validate()?;
    match spec {
        SpaceSpec::Gr(p, q) => Ok(build_gr(*p, *q)),
        SpaceSpec::Cp(m) => Ok(build_cp(*m)),
        SpaceSpec::Hp(d) => Ok(build_hp(*d)),
        SpaceSpec::Op2 => crate::spin9::op2_model(),
        SpaceSpec::Sl3So3 => build_sl3so3(),
        SpaceSpec::Su3So3 => {
            let mut m = build_sl3so3()?.dual();
            m.name = "su3so3".into();
            Ok(m)
        }
        SpaceSpec::G2So4 => build_g2so4(),
        SpaceSpec::Prod(a, b) => {
            let ma = build_model(a)?;
            let mb = build_model(b)?;
            product(&ma, &mb)
        }
        SpaceSpec::Dual(a) => Ok(build_model(a)?.dual()),
    }
}

pub(crate) fn from_table_pub(name: String, n: usize, sign: i8, triple: Vec<Scalar>) -> SpaceModel {
    from_table(name, n, sign, triple)
}

/// Catalog listed by the CLI and exercised by the verification suites.
pub fn catalog() -> Vec<&'static str> {
    vec![
        "gr(2,1)",
        "gr(3,1)",
        "gr(4,1)",
        "gr(5,1)",
        "gr(3,2)",
        "gr(4,2)",
        "gr(4,3)",
        "gr(5,3)",
        "cp(2)",
        "cp(3)",
        "hp(2)",
        "op2",
        "sl3so3",
        "su3so3",
        "g2so4",
    ]
}

// ---- validation ------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckEntry>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn add(&mut self, name: &str, pass: bool, witness: Option<String>) {
        self.checks.push(CheckEntry {
            name: name.into(),
            pass,
            witness,
        });
    }
}

/// Check every Lie-triple-system axiom on the stored structure constants,
/// reporting a witness index tuple on the first failure of each axiom.
pub fn validate(model: &SpaceModel) -> ValidationReport {
    let n = model.n;
    let mut rep = ValidationReport::default();

    let mut anti = None;
    let mut skew = None;
    'anti: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if *model.c(i, j, k, l) != -model.c(j, i, k, l) {
                        anti = Some(format!("(i,j,k,l)=({i},{j},{k},{l})"));
                        break 'anti;
                    }
                }
            }
        }
    }
    'skew: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if *model.c(i, j, k, l) != -model.c(i, j, l, k) {
                        skew = Some(format!("(i,j,k,l)=({i},{j},{k},{l})"));
                        break 'skew;
                    }
                }
            }
        }
    }
    rep.add("antisymmetry_first_pair", anti.is_none(), anti);
    rep.add("operator_skewness", skew.is_none(), skew);

    let mut bianchi = None;
    'bianchi: for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in 0..n {
                    let s = &(model.c(i, j, k, l) + model.c(j, k, i, l)) + model.c(k, i, j, l);
                    if !s.is_zero() {
                        bianchi = Some(format!("(i,j,k)=({i},{j},{k})"));
                        break 'bianchi;
                    }
                }
            }
        }
    }
    rep.add("first_bianchi", bianchi.is_none(), bianchi);

    let mut pair = None;
    'pair: for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if model.c(i, j, k, l) != model.c(k, l, i, j) {
                        pair = Some(format!("(i,j,k,l)=({i},{j},{k},{l})"));
                        break 'pair;
                    }
                }
            }
        }
    }
    rep.add("pair_symmetry", pair.is_none(), pair);

    // ad_{[e_a,e_b]} is a derivation of the triple bracket
    let mut deriv = None;
    'deriv: for a in 0..n {
        for b in a + 1..n {
            let ad = model.ad_pair(a, b);
            for x in 0..n {
                for y in x + 1..n {
                    for z in 0..n {
                        let lhs = ad.apply(&model.bracket3_basis(x, y, z));
                        let mut rhs = model.bracket3(
                            &ad_col(&ad, x),
                            &basis_vec(n, y),
                            &basis_vec(n, z),
                        );
                        let t2 =
                            model.bracket3(&basis_vec(n, x), &ad_col(&ad, y), &basis_vec(n, z));
                        let t3 =
                            model.bracket3(&basis_vec(n, x), &basis_vec(n, y), &ad_col(&ad, z));
                        for l in 0..n {
                            rhs[l] += &t2[l];
                            rhs[l] += &t3[l];
                        }
                        if lhs != rhs {
                            deriv = Some(format!("(a,b;x,y,z)=({a},{b};{x},{y},{z})"));
                            break 'deriv;
                        }
                    }
                }
            }
        }
    }
    rep.add("derivation_axiom", deriv.is_none(), deriv);

    if model.factor_blocks.len() > 1 {
        let mut cross = None;
        'cross: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if !model.c(i, j, k, l).is_zero() {
                            let blk = model.block_of(i);
                            if model.block_of(j) != blk
                                || model.block_of(k) != blk
                                || model.block_of(l) != blk
                            {
                                cross = Some(format!("(i,j,k,l)=({i},{j},{k},{l})"));
                                break 'cross;
                            }
                        }
                    }
                }
            }
        }
        rep.add("cross_block_brackets_vanish", cross.is_none(), cross);
    }

    if let Some(emb) = &model.embedding {
        // closure inside the ambient algebra: the abstract constants reproduce
        // the embedded double commutators
        let mut closure = None;
        'closure: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let m = emb[i].commutator(&emb[j]).commutator(&emb[k]);
                    let mut recon = DMat::zeros(emb[0].nrows, emb[0].ncols);
                    for l in 0..n {
                        let c = model.c(i, j, k, l);
                        if !c.is_zero() {
                            recon = recon.add(&emb[l].scale(c));
                        }
                    }
                    if recon != m {
                        closure = Some(format!("(i,j,k)=({i},{j},{k})"));
                        break 'closure;
                    }
                }
            }
        }
        rep.add("ambient_closure", closure.is_none(), closure);
    }

    rep
}

fn ad_col(ad: &DMat, k: usize) -> Vec<Scalar> {
    (0..ad.nrows).map(|l| ad.at(l, k).clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::dot;

    #[test]
    fn parse_grammar() {
        assert_eq!(
            SpaceSpec::parse("prod(gr(3,2), dual(cp(2)))").unwrap().canonical(),
            "prod(gr(3,2),dual(cp(2)))"
        );
        assert!(SpaceSpec::parse("gr(2,3)").is_err());
        assert!(SpaceSpec::parse("cp(1)").is_err());
        assert!(SpaceSpec::parse("nosuchspace").is_err());
        assert!(SpaceSpec::parse("gr(3,2)x").is_err());
    }

    #[test]
    fn gr32_matches_displayed_formula() {
        let m = build_model(&SpaceSpec::parse("gr(3,2)").unwrap()).unwrap();
        assert_eq!(m.n, 6);
        // <[[E11, E21], E21], E11> evaluated from YX^tZ - XY^tZ + ZX^tY - ZY^tX
        // with X = E11 (index 0), Y = E21 (index 2): X^tZ = 0, Y^tZ = E11(2x2),
        // XY^tZ = E11, ZX^tY = 0, ZY^tX = 0, so the bracket is -E11.
        assert_eq!(*m.c(0, 2, 2, 0), Scalar::from_int(-1));
        let rep = validate(&m);
        assert!(rep.all_pass(), "{:?}", rep.checks);
    }

    #[test]
    fn cp_unit_vector_identity() {
        // ad_{[X,JX]}X = 4 JX for unit X, from the three summands evaluated directly
        let m = build_model(&SpaceSpec::parse("cp(3)").unwrap()).unwrap();
        let j = m.complex_j.clone().unwrap();
        // X = basis e0 and a rational unit combination (3/5, 4/5) in the e0,e2 plane
        let mut x = vec![Scalar::zero(); m.n];
        x[0] = Scalar::from_frac(3, 5);
        x[2] = Scalar::from_frac(4, 5);
        for x in [basis_vec(m.n, 0), x] {
            assert!(dot(&x, &x).is_one());
            let jx = j.apply(&x);
            let lhs = m.ad_of(&x, &jx).apply(&x);
            let want: Vec<Scalar> = jx.iter().map(|v| &Scalar::from_int(4) * v).collect();
            assert_eq!(lhs, want);
        }
    }

    #[test]
    fn cp_hp_structure_matrices() {
        let m = build_model(&SpaceSpec::parse("cp(2)").unwrap()).unwrap();
        let j = m.complex_j.clone().unwrap();
        assert!(j.is_skew());
        assert_eq!(j.mul(&j), DMat::identity(m.n).neg());
        // ad_{[X,Y]} commutes with J
        for a in 0..m.n {
            for b in a + 1..m.n {
                let ad = m.ad_pair(a, b);
                assert!(ad.commutator(&j).is_zero());
            }
        }
        let h = build_model(&SpaceSpec::parse("hp(2)").unwrap()).unwrap();
        let js = h.quaternion_j.clone().unwrap();
        for j in &js {
            assert!(j.is_skew());
            assert_eq!(j.mul(j), DMat::identity(h.n).neg());
        }
        assert_eq!(js[0].mul(&js[1]), js[2]);
        assert!(validate(&h).all_pass());
    }

    #[test]
    fn dual_of_su3so3_is_sl3so3() {
        let sl = build_model(&SpaceSpec::parse("sl3so3").unwrap()).unwrap();
        let su = build_model(&SpaceSpec::parse("su3so3").unwrap()).unwrap();
        let back = build_model(&SpaceSpec::parse("dual(su3so3)").unwrap()).unwrap();
        assert_eq!(sl.sign, -1);
        assert_eq!(su.sign, 1);
        assert_eq!(back.sign, -1);
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    for l in 0..5 {
                        assert_eq!(back.c(i, j, k, l), sl.c(i, j, k, l));
                        assert_eq!(*su.c(i, j, k, l), -sl.c(i, j, k, l));
                    }
                }
            }
        }
        assert!(validate(&sl).all_pass());
    }

    #[test]
    fn sl3so3_lives_in_sqrt3() {
        let sl = build_model(&SpaceSpec::parse("sl3so3").unwrap()).unwrap();
        assert_eq!(sl.disc, Some(3));
        // <[[e1,e2],e3], e5> = sqrt(3)/2 from the embedded computation
        let v = sl.c(0, 1, 2, 4).clone();
        assert_eq!(
            v,
            Scalar::quad(
                Rational::from_integer(0.into()),
                Rational::new(1.into(), 2.into()),
                3
            )
        );
    }

    #[test]
    fn g2so4_builds_and_validates() {
        let g = build_model(&SpaceSpec::parse("g2so4").unwrap()).unwrap();
        assert_eq!(g.n, 8);
        assert_eq!(g.disc, Some(3));
        let rep = validate(&g);
        assert!(rep.all_pass(), "{:?}", rep.checks);
        assert!(rep.checks.iter().any(|c| c.name == "ambient_closure"));
    }

    #[test]
    fn product_blocks_and_cross_brackets() {
        let a = build_model(&SpaceSpec::parse("gr(3,2)").unwrap()).unwrap();
        let p = product(&a, &a).unwrap();
        assert_eq!(p.n, 12);
        assert_eq!(p.factor_blocks.len(), 2);
        // any X in block 1, Y in block 2: [[X,Y],Z] = 0 for all Z
        for i in 0..6 {
            for j in 6..12 {
                assert!(p.ad_pair(i, j).is_zero());
            }
        }
        assert!(validate(&p).all_pass());
        let sl = build_model(&SpaceSpec::parse("sl3so3").unwrap()).unwrap();
        assert!(matches!(product(&a, &sl), Err(SymError::SignMismatch)));
    }

    #[test]
    fn gr_p1_constant_curvature() {
        // [[X,Y],Z] = kappa (X ^ Y)Z entrywise with the single kappa = +1
        for p in [2usize, 3, 4, 5] {
            let m = build_model(&SpaceSpec::Gr(p, 1)).unwrap();
            for i in 0..m.n {
                for j in 0..m.n {
                    let ad = m.ad_pair(i, j);
                    let w = wedge(&basis_vec(m.n, i), &basis_vec(m.n, j));
                    assert_eq!(ad, w);
                }
            }
        }
    }

    #[test]
    fn perturbed_constant_fails_validation() {
        let mut m = build_model(&SpaceSpec::parse("gr(3,2)").unwrap()).unwrap();
        let n = m.n;
        // perturb c[0][1][2][3] by +1
        let idx = ((0 * n + 1) * n + 2) * n + 3;
        m.triple[idx] = &m.triple[idx] + &Scalar::one();
        let rep = validate(&m);
        assert!(!rep.all_pass());
        let failed: Vec<&CheckEntry> = rep.checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.iter().all(|c| c.witness.is_some()));
    }

    #[test]
    fn dual_is_involutive() {
        let m = build_model(&SpaceSpec::parse("cp(2)").unwrap()).unwrap();
        let dd = m.dual().dual();
        for i in 0..m.n {
            for j in 0..m.n {
                for k in 0..m.n {
                    for l in 0..m.n {
                        assert_eq!(dd.c(i, j, k, l), m.c(i, j, k, l));
                    }
                }
            }
        }
        assert_eq!(dd.sign, m.sign);
    }
}

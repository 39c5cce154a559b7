//! Assembly and solution of the linear systems constraining connection maps K
//! and Cotton-York maps Phi: the cyclic operator identity in scalar-row form,
//! the cyclic trace rows, the orthogonality rows against ad(h), the cyclic
//! pairing system on Hom(m, h), the boundary/coboundary operators,
//! decomposable spans, and the nabla-W evaluation.

use std::collections::BTreeMap;

use crate::curvature::schouten;
use crate::dense::{solve_exact, DMat};
use crate::error::{Result, SymError};
use crate::roots::RootDatum;
use crate::scalar::{rational_reconstruct, FieldSpec, FpCtx, Rng, Scalar};
use crate::sparse::{dense_to_sparse, Echelon, Fp, SparseMatrix, SparseVec};
use crate::spaces::SpaceModel;

/// K as n skew matrices, Z -> K_Z linear in Z.
#[derive(Clone)]
pub struct ConnectionMap {
    pub mats: Vec<DMat>,
}

impl ConnectionMap {
    pub fn zero(n: usize) -> Self {
        ConnectionMap {
            mats: (0..n).map(|_| DMat::zeros(n, n)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.mats {
            if !m.is_skew() {
                return Err(SymError::ConstructionInvalid("K_Z not skew".into()));
            }
        }
        Ok(())
    }
}

/// Phi as the antisymmetric 3-index array <Phi(e_i,e_j), e_k>.
#[derive(Clone)]
pub struct CottonMap {
    pub n: usize,
    v: Vec<Scalar>, // (pair index) * n + k
}

impl CottonMap {
    pub fn zero(n: usize) -> Self {
        CottonMap {
            n,
            v: vec![Scalar::zero(); n * (n - 1) / 2 * n],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, val: Scalar) {
        assert!(i < j);
        let idx = crate::curvature::pair_index(self.n, i, j) * self.n + k;
        self.v[idx] = val;
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Scalar {
        if i == j {
            return Scalar::zero();
        }
        let (a, b, sgn) = if i < j { (i, j, 1) } else { (j, i, -1) };
        let idx = crate::curvature::pair_index(self.n, a, b) * self.n + k;
        if sgn > 0 {
            self.v[idx].clone()
        } else {
            -&self.v[idx]
        }
    }
}

/// Column layout of the stacked (K, Phi) unknown vector.
#[derive(Clone, Copy)]
pub struct Layout {
    pub n: usize,
    pub npairs: usize,
}

impl Layout {
    pub fn new(n: usize) -> Self {
        Layout {
            n,
            npairs: n * (n - 1) / 2,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.n * self.npairs + self.npairs * self.n
    }

    pub fn k_cols(&self) -> usize {
        self.n * self.npairs
    }

    /// Column and sign of <K_{e_z} e_a, e_b>.
    pub fn k_entry(&self, z: usize, a: usize, b: usize) -> Option<(u32, i64)> {
        if a == b {
            return None;
        }
        let (lo, hi, sgn) = if a < b { (a, b, 1) } else { (b, a, -1) };
        Some((
            (z * self.npairs + crate::curvature::pair_index(self.n, lo, hi)) as u32,
            sgn,
        ))
    }

    /// Column and sign of <Phi(e_i, e_j), e_k>.
    pub fn phi_entry(&self, i: usize, j: usize, k: usize) -> Option<(u32, i64)> {
        if i == j {
            return None;
        }
        let (lo, hi, sgn) = if i < j { (i, j, 1) } else { (j, i, -1) };
        Some((
            (self.k_cols() + crate::curvature::pair_index(self.n, lo, hi) * self.n + k) as u32,
            sgn,
        ))
    }

    pub fn phi_block(&self) -> Vec<usize> {
        (self.k_cols()..self.unknowns()).collect()
    }

    /// Stack (K, Phi) into the unknown-vector coordinates.
    pub fn pack(&self, k: &ConnectionMap, phi: &CottonMap) -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); self.unknowns()];
        for z in 0..self.n {
            for a in 0..self.n {
                for b in a + 1..self.n {
                    let (col, _) = self.k_entry(z, a, b).unwrap();
                    v[col as usize] = k.mats[z].at(b, a).clone();
                }
            }
        }
        for i in 0..self.n {
            for j in i + 1..self.n {
                for kk in 0..self.n {
                    let (col, _) = self.phi_entry(i, j, kk).unwrap();
                    v[col as usize] = phi.get(i, j, kk);
                }
            }
        }
        v
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SystemKind {
    /// Cyclic identity with Phi directly (irreducible models).
    Prop3,
    /// Cyclic identity with Psi eliminated through the Schouten commutators.
    Prop1,
}

#[derive(Clone, Copy, Debug)]
pub struct AssembleOpts {
    pub system: SystemKind,
    pub orth: bool,
    pub phi_zero: bool,
}

/// Linearly independent spanning subset of the curvature operators
/// ad_{[e_i, e_j]}; this realizes ad(h) since h = [m, m].
pub fn adh_basis(model: &SpaceModel) -> Vec<DMat> {
    let n = model.n;
    let mut ech = Echelon::<Scalar>::new(n * (n - 1) / 2);
    let mut basis = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let m = model.ad_pair(i, j);
            if m.is_zero() {
                continue;
            }
            if ech.offer(dense_to_sparse(&m.skew_coords())) {
                basis.push(m);
            }
        }
    }
    basis
}

/// Stream every row of the requested system into the sink as
/// (provenance label, sparse row). Rows are not deduplicated here.
pub fn stream_rows(
    model: &SpaceModel,
    adh: &[DMat],
    rho0: Option<&DMat>,
    opts: AssembleOpts,
    mut sink: impl FnMut(String, SparseVec<Scalar>),
) {
    let n = model.n;
    let lay = Layout::new(n);
    let mut row: BTreeMap<u32, Scalar> = BTreeMap::new();
    let mut add = |row: &mut BTreeMap<u32, Scalar>, col: u32, sgn: i64, val: &Scalar| {
        if val.is_zero() {
            return;
        }
        let add = if sgn >= 0 { val.clone() } else { -val };
        let e = row.entry(col).or_insert_with(Scalar::zero);
        *e += &add;
    };
    // Psi entry: <Phi(X,Y), e_w> plus the Schouten commutator terms under Prop1
    let psi_terms = |row: &mut BTreeMap<u32, Scalar>,
                     add: &mut dyn FnMut(&mut BTreeMap<u32, Scalar>, u32, i64, &Scalar),
                     x: usize,
                     y: usize,
                     w: usize,
                     outer: i64| {
        if let Some((col, sgn)) = lay.phi_entry(x, y, w) {
            add(row, col, sgn * outer, &Scalar::one());
        }
        if let Some(r) = rho0 {
            // + <[rho0, K_X] Y, e_w> - <[rho0, K_Y] X, e_w>
            for a in 0..n {
                let rw = r.at(a, w);
                if !rw.is_zero() {
                    if let Some((col, sgn)) = lay.k_entry(x, y, a) {
                        add(row, col, sgn * outer, rw);
                    }
                    if let Some((col, sgn)) = lay.k_entry(y, x, a) {
                        add(row, col, -sgn * outer, rw);
                    }
                }
                let ry = r.at(a, y);
                if !ry.is_zero() {
                    if let Some((col, sgn)) = lay.k_entry(x, a, w) {
                        add(row, col, -sgn * outer, ry);
                    }
                }
                let rx = r.at(a, x);
                if !rx.is_zero() {
                    if let Some((col, sgn)) = lay.k_entry(y, a, w) {
                        add(row, col, sgn * outer, rx);
                    }
                }
            }
        }
    };

    let tag = match opts.system {
        SystemKind::Prop3 => "op3",
        SystemKind::Prop1 => "op1",
    };
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in 0..n {
                    for m in l + 1..n {
                        row.clear();
                        for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                            // -<[[X,Y],V], K_Z U> with V = e_l, U = e_m
                            for a in 0..n {
                                let c = model.c(x, y, l, a);
                                if !c.is_zero() {
                                    if let Some((col, sgn)) = lay.k_entry(z, m, a) {
                                        add(&mut row, col, -sgn, c);
                                    }
                                }
                                // +<[[X,Y],U], K_Z V>
                                let c = model.c(x, y, m, a);
                                if !c.is_zero() {
                                    if let Some((col, sgn)) = lay.k_entry(z, l, a) {
                                        add(&mut row, col, sgn, c);
                                    }
                                }
                                // +<[[V,U],Y], K_Z X>
                                let c = model.c(l, m, y, a);
                                if !c.is_zero() {
                                    if let Some((col, sgn)) = lay.k_entry(z, x, a) {
                                        add(&mut row, col, sgn, c);
                                    }
                                }
                                // -<[[V,U],X], K_Z Y>
                                let c = model.c(l, m, x, a);
                                if !c.is_zero() {
                                    if let Some((col, sgn)) = lay.k_entry(z, y, a) {
                                        add(&mut row, col, -sgn, c);
                                    }
                                }
                            }
                            // +<Psi(X,Y), U> <Z, V>  and  -<Psi(X,Y), V> <Z, U>
                            if z == l {
                                psi_terms(&mut row, &mut add, x, y, m, 1);
                            }
                            if z == m {
                                psi_terms(&mut row, &mut add, x, y, l, -1);
                            }
                        }
                        let out: SparseVec<Scalar> = row
                            .iter()
                            .filter(|(_, v)| !v.is_zero())
                            .map(|(c, v)| (*c, v.clone()))
                            .collect();
                        sink(format!("{tag}|{i},{j},{k}|{l},{m}"), out);
                    }
                }
            }
        }
    }
    // cyclic trace rows (equal for both systems: the Schouten commutator terms
    // cancel pairwise under the cyclic sum because [rho0, K_X] is symmetric)
    let cyc_tag = match opts.system {
        SystemKind::Prop3 => "tr3",
        SystemKind::Prop1 => "tr1",
    };
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                row.clear();
                for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                    if let Some((col, sgn)) = lay.phi_entry(x, y, z) {
                        add(&mut row, col, sgn, &Scalar::one());
                    }
                }
                let out: SparseVec<Scalar> =
                    row.iter().map(|(c, v)| (*c, v.clone())).collect();
                sink(format!("{cyc_tag}|{i},{j},{k}"), out);
            }
        }
    }
    if opts.orth {
        for z in 0..n {
            for (b, u) in adh.iter().enumerate() {
                row.clear();
                for a in 0..n {
                    for c in a + 1..n {
                        let v = u.at(c, a);
                        if !v.is_zero() {
                            let (col, sgn) = lay.k_entry(z, a, c).unwrap();
                            add(&mut row, col, sgn, v);
                        }
                    }
                }
                let out: SparseVec<Scalar> =
                    row.iter().map(|(c, v)| (*c, v.clone())).collect();
                sink(format!("orth|{z}|{b}"), out);
            }
        }
    }
    if opts.phi_zero {
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let (col, _) = lay.phi_entry(i, j, k).unwrap();
                    sink(format!("pin|{i},{j}|{k}"), vec![(col, Scalar::one())]);
                }
            }
        }
    }
}

/// Re-create a single row from its provenance label.
pub fn reassemble_row(
    model: &SpaceModel,
    adh: &[DMat],
    rho0: Option<&DMat>,
    opts: AssembleOpts,
    label: &str,
) -> Option<SparseVec<Scalar>> {
    let mut found = None;
    stream_rows(model, adh, rho0, opts, |l, row| {
        if l == label {
            found = Some(row);
        }
    });
    found
}

/// Materialized system with provenance labels; exact duplicates and zero rows
/// dropped.
pub fn assemble(model: &SpaceModel, opts: AssembleOpts) -> Result<SparseMatrix> {
    if opts.system == SystemKind::Prop3 && !model.is_irreducible() {
        return Err(SymError::NotIrreducible);
    }
    let adh = adh_basis(model);
    let rho0 = match opts.system {
        SystemKind::Prop3 => None,
        SystemKind::Prop1 => Some(schouten(model)?.rho0),
    };
    let lay = Layout::new(model.n);
    let mut mat = SparseMatrix::new(lay.unknowns());
    let mut seen: std::collections::HashSet<SparseVec<Scalar>> = std::collections::HashSet::new();
    let mut col_labels = Vec::new();
    for z in 0..model.n {
        for p in 0..lay.npairs {
            col_labels.push(format!("K|{z}|{p}"));
        }
    }
    for p in 0..lay.npairs {
        for k in 0..model.n {
            col_labels.push(format!("F|{p}|{k}"));
        }
    }
    stream_rows(model, &adh, rho0.as_ref(), opts, |label, row| {
        if row.is_empty() {
            return;
        }
        if seen.insert(row.clone()) {
            mat.push_row(row, Some(label));
        }
    });
    mat.col_labels = Some(col_labels);
    Ok(mat)
}

/// Nullspace basis plus the two analysis ranks of the module's solution space.
pub struct SolutionSpace {
    pub unknowns: usize,
    pub rows: usize,
    pub dim: usize,
    pub phi_block_rank: usize,
    pub k_adh_complement_rank: usize,
    pub field_used: String,
    pub certified: bool,
    pub primes: Option<(u64, u64)>,
    pub basis: SolvedBasis,
}

pub enum SolvedBasis {
    Exact(Vec<Vec<Scalar>>),
    Modular { p: u64, vectors: Vec<Vec<u64>> },
}

#[derive(Clone, Copy, Debug)]
pub enum FieldChoice {
    Exact,
    Modular { prime: Option<u64>, certify: bool },
}

/// Embed each adh operator into the K-block coordinates of one z-slot.
fn adh_embedded_rows(model: &SpaceModel, adh: &[DMat]) -> Vec<SparseVec<Scalar>> {
    let lay = Layout::new(model.n);
    let mut out = Vec::new();
    for z in 0..model.n {
        for u in adh {
            let coords = u.skew_coords();
            let row: SparseVec<Scalar> = coords
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(p, v)| ((z * lay.npairs + p) as u32, v.clone()))
                .collect();
            out.push(row);
        }
    }
    out
}

/// Solve the assembled system over the chosen field (streaming: the full
/// system is never materialized).
pub fn solve_constraints(
    model: &SpaceModel,
    opts: AssembleOpts,
    field: FieldChoice,
    seed: u64,
) -> Result<SolutionSpace> {
    if opts.system == SystemKind::Prop3 && !model.is_irreducible() {
        return Err(SymError::NotIrreducible);
    }
    let adh = adh_basis(model);
    let rho0 = match opts.system {
        SystemKind::Prop3 => None,
        SystemKind::Prop1 => Some(schouten(model)?.rho0),
    };
    let lay = Layout::new(model.n);
    let nu = lay.unknowns();
    match field {
        FieldChoice::Exact => {
            let mut ech = Echelon::<Scalar>::new(nu);
            let mut rows = 0usize;
            stream_rows(model, &adh, rho0.as_ref(), opts, |_, row| {
                rows += 1;
                ech.offer(row);
            });
            let basis = ech.nullspace();
            let dim = basis.len();
            // exact residual certification against a re-stream
            let mut certified = true;
            stream_rows(model, &adh, rho0.as_ref(), opts, |_, row| {
                for v in &basis {
                    let mut acc = Scalar::zero();
                    for (c, a) in &row {
                        if !v[*c as usize].is_zero() {
                            acc += &(a * &v[*c as usize]);
                        }
                    }
                    if !acc.is_zero() {
                        certified = false;
                    }
                }
            });
            let phi_block: Vec<usize> = lay.phi_block();
            let phi_block_rank =
                crate::sparse::block_projection_rank(&basis, &phi_block, &FieldSpec::Rational)?;
            let k_adh_complement_rank = {
                let embedded = adh_embedded_rows(model, &adh);
                let mut ech = Echelon::<Scalar>::new(lay.k_cols());
                for r in &embedded {
                    ech.offer(r.clone());
                }
                let base = ech.rank();
                for v in &basis {
                    let row: SparseVec<Scalar> = v[..lay.k_cols()]
                        .iter()
                        .enumerate()
                        .filter(|(_, x)| !x.is_zero())
                        .map(|(c, x)| (c as u32, x.clone()))
                        .collect();
                    ech.offer(row);
                }
                ech.rank() - base
            };
            let field_used = model
                .disc
                .map(|d| format!("quad:{d}"))
                .unwrap_or_else(|| "qq".into());
            Ok(SolutionSpace {
                unknowns: nu,
                rows,
                dim,
                phi_block_rank,
                k_adh_complement_rank,
                field_used,
                certified,
                primes: None,
                basis: SolvedBasis::Exact(basis),
            })
        }
        FieldChoice::Modular { prime, certify } => {
            let mut rng = Rng::new(seed).derive("solve-primes");
            let p1 = match prime {
                Some(p) => p,
                None => rng.prime(model.disc),
            };
            let mut p2 = rng.prime(model.disc);
            while p2 == p1 {
                p2 = rng.prime(model.disc);
            }
            let ctx1 = fp_ctx_for(model, p1)?;
            let ctx2 = fp_ctx_for(model, p2)?;
            let mut rows = 0usize;
            let mut err: Option<SymError> = None;
            let mut ech1 = Echelon::<Fp>::new(nu);
            let mut ech2 = Echelon::<Fp>::new(nu);
            stream_rows(model, &adh, rho0.as_ref(), opts, |_, row| {
                rows += 1;
                if err.is_some() {
                    return;
                }
                let conv = |ctx: &FpCtx, row: &SparseVec<Scalar>| -> Result<SparseVec<Fp>> {
                    row.iter()
                        .map(|(c, v)| Ok((*c, Fp { v: v.to_fp(ctx)?, p: ctx.p })))
                        .collect()
                };
                match (conv(&ctx1, &row), conv(&ctx2, &row)) {
                    (Ok(r1), Ok(r2)) => {
                        ech1.offer(r1);
                        ech2.offer(r2);
                    }
                    (Err(e), _) | (_, Err(e)) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            let dim1 = nu - ech1.rank();
            let dim2 = nu - ech2.rank();
            if dim1 != dim2 {
                return Err(SymError::ModularDisagreement(dim1, dim2));
            }
            let basis1 = ech1.nullspace();
            let basis2 = ech2.nullspace();
            let phi_block: Vec<usize> = lay.phi_block();
            let to_scalar =
                |v: &Vec<Fp>| -> Vec<Scalar> { v.iter().map(|x| Scalar::from_int(x.v as i64)).collect() };
            let sb1: Vec<Vec<Scalar>> = basis1.iter().map(to_scalar).collect();
            let phi_block_rank = crate::sparse::block_projection_rank(
                &sb1,
                &phi_block,
                &FieldSpec::PrimeField { p: p1 },
            )
            .map(|r| {
                // agreement with the second prime guards accidental rank drop
                let sb2: Vec<Vec<Scalar>> = basis2.iter().map(to_scalar).collect();
                let r2 = crate::sparse::block_projection_rank(
                    &sb2,
                    &phi_block,
                    &FieldSpec::PrimeField { p: p2 },
                )
                .unwrap_or(r);
                r.max(r2)
            })?;
            let k_adh_complement_rank = {
                let embedded = adh_embedded_rows(model, &adh);
                let mut best = 0usize;
                for (ech_basis, ctx) in [(&basis1, &ctx1), (&basis2, &ctx2)] {
                    let mut ech = Echelon::<Fp>::new(lay.k_cols());
                    for r in &embedded {
                        let row: Result<SparseVec<Fp>> = r
                            .iter()
                            .map(|(c, v)| Ok((*c, Fp { v: v.to_fp(ctx)?, p: ctx.p })))
                            .collect();
                        ech.offer(row?);
                    }
                    let base = ech.rank();
                    for v in ech_basis.iter() {
                        let row: SparseVec<Fp> = v[..lay.k_cols()]
                            .iter()
                            .enumerate()
                            .filter(|(_, x)| x.v != 0)
                            .map(|(c, x)| (c as u32, *x))
                            .collect();
                        ech.offer(row);
                    }
                    best = best.max(ech.rank() - base);
                }
                best
            };
            // dim 0 is certified outright: rank over GF(p) bounds rank over the
            // entry field from below, so full column rank mod p is exact.
            let mut certified = dim1 == 0;
            if certify && dim1 > 0 {
                // quadratic models additionally need the conjugate embeddings
                // (sqrt(d) -> -sqrt(d) mod p) to separate a and b in a + b sqrt(d)
                let conj_bases = match model.disc {
                    None => None,
                    Some(_) => {
                        let flip = |ctx: &FpCtx| FpCtx {
                            p: ctx.p,
                            sqrt_d: ctx.sqrt_d.map(|s| ctx.p - s),
                            disc: ctx.disc,
                        };
                        let mut bases = Vec::new();
                        for ctx in [flip(&ctx1), flip(&ctx2)] {
                            let mut ech = Echelon::<Fp>::new(nu);
                            let mut err2: Option<SymError> = None;
                            stream_rows(model, &adh, rho0.as_ref(), opts, |_, row| {
                                if err2.is_some() {
                                    return;
                                }
                                let conv: Result<SparseVec<Fp>> = row
                                    .iter()
                                    .map(|(c, v)| {
                                        Ok((*c, Fp { v: v.to_fp(&ctx)?, p: ctx.p }))
                                    })
                                    .collect();
                                match conv {
                                    Ok(r) => {
                                        ech.offer(r);
                                    }
                                    Err(e) => err2 = Some(e),
                                }
                            });
                            if let Some(e) = err2 {
                                return Err(e);
                            }
                            bases.push(ech.nullspace());
                        }
                        Some(bases)
                    }
                };
                certified = certify_modular(
                    model,
                    &adh,
                    rho0.as_ref(),
                    opts,
                    &basis1,
                    &basis2,
                    conj_bases.as_deref(),
                    p1,
                    p2,
                )?;
            }
            Ok(SolutionSpace {
                unknowns: nu,
                rows,
                dim: dim1,
                phi_block_rank,
                k_adh_complement_rank,
                field_used: format!("gfp:{p1},{p2}"),
                certified,
                primes: Some((p1, p2)),
                basis: SolvedBasis::Modular {
                    p: p1,
                    vectors: basis1.iter().map(|v| v.iter().map(|x| x.v).collect()).collect(),
                },
            })
        }
    }
}

fn fp_ctx_for(model: &SpaceModel, p: u64) -> Result<FpCtx> {
    match model.disc {
        None => Ok(FpCtx::new(p)),
        Some(d) => FpCtx::with_disc(p, d).ok_or(SymError::MixedExtensions {
            what: format!("{d} is not a residue mod {p}"),
        }),
    }
}

/// CRT + rational reconstruction of the modular basis, then exact residual
/// verification; a success certifies the nullity exactly. Quadratic models
/// pass the conjugate-embedding bases so a and b in a + b sqrt(d) separate.
#[allow(clippy::too_many_arguments)]
fn certify_modular(
    model: &SpaceModel,
    adh: &[DMat],
    rho0: Option<&DMat>,
    opts: AssembleOpts,
    basis1: &[Vec<Fp>],
    basis2: &[Vec<Fp>],
    conj_bases: Option<&[Vec<Vec<Fp>>]>,
    p1: u64,
    p2: u64,
) -> Result<bool> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    if basis1.len() != basis2.len() {
        return Ok(false);
    }
    let m1 = BigInt::from(p1);
    let m2 = BigInt::from(p2);
    let m = &m1 * &m2;
    // CRT lift: the pivot-normalized bases enumerate free columns in the same
    // order for generic primes, so vectors pair up positionally.
    let inv = |a: &BigInt, md: &BigInt| -> BigInt {
        let e = a.extended_gcd(md);
        e.x.mod_floor(md)
    };
    let c2 = inv(&m1, &m2);
    let crt = |x1: u64, x2: u64| -> BigInt {
        let x1 = BigInt::from(x1);
        let x2 = BigInt::from(x2);
        let t = ((&x2 - &x1) * &c2).mod_floor(&m2);
        (&x1 + &m1 * t).mod_floor(&m)
    };
    let mut lifted: Vec<Vec<Scalar>> = Vec::new();
    match (model.disc, conj_bases) {
        (None, _) => {
            for (v1, v2) in basis1.iter().zip(basis2.iter()) {
                let mut out = Vec::with_capacity(v1.len());
                for (a, b) in v1.iter().zip(v2.iter()) {
                    match rational_reconstruct(&crt(a.v, b.v), &m) {
                        Some(q) => out.push(Scalar::Rat(q)),
                        None => return Ok(false),
                    }
                }
                lifted.push(out);
            }
        }
        (Some(d), Some(conj)) => {
            if conj.len() != 2
                || conj[0].len() != basis1.len()
                || conj[1].len() != basis2.len()
            {
                return Ok(false);
            }
            let f1 = FpCtx::with_disc(p1, d).expect("residue checked at solve time");
            let f2 = FpCtx::with_disc(p2, d).expect("residue checked at solve time");
            let (s1, s2) = (f1.sqrt_d.unwrap(), f2.sqrt_d.unwrap());
            let half1 = f1.inv(2);
            let half2 = f2.inv(2);
            let inv2s1 = f1.inv(f1.mul(2, s1));
            let inv2s2 = f2.inv(f2.mul(2, s2));
            for k in 0..basis1.len() {
                let mut out = Vec::with_capacity(basis1[k].len());
                for i in 0..basis1[k].len() {
                    // x = a + b s, x' = a - b s per prime
                    let (x1, x1c) = (basis1[k][i].v, conj[0][k][i].v);
                    let (x2, x2c) = (basis2[k][i].v, conj[1][k][i].v);
                    let a1 = f1.mul(f1.add(x1, x1c), half1);
                    let b1 = f1.mul(f1.sub(x1, x1c), inv2s1);
                    let a2 = f2.mul(f2.add(x2, x2c), half2);
                    let b2 = f2.mul(f2.sub(x2, x2c), inv2s2);
                    let a = match rational_reconstruct(&crt(a1, a2), &m) {
                        Some(q) => q,
                        None => return Ok(false),
                    };
                    let b = match rational_reconstruct(&crt(b1, b2), &m) {
                        Some(q) => q,
                        None => return Ok(false),
                    };
                    out.push(Scalar::quad(a, b, d));
                }
                lifted.push(out);
            }
        }
        (Some(_), None) => return Ok(false),
    }
    let mut ok = true;
    stream_rows(model, adh, rho0, opts, |_, row| {
        if !ok {
            return;
        }
        for v in &lifted {
            let mut acc = Scalar::zero();
            for (c, a) in &row {
                if !v[*c as usize].is_zero() {
                    acc += &(a * &v[*c as usize]);
                }
            }
            if !acc.is_zero() {
                ok = false;
            }
        }
    });
    Ok(ok)
}

/// Exact residual of a candidate (K, Phi) against every cyclic-identity and
/// cyclic-trace row; returns the first violated label when nonzero.
pub fn residual(
    model: &SpaceModel,
    k: &ConnectionMap,
    phi: &CottonMap,
    system: SystemKind,
) -> Result<Option<String>> {
    k.validate()?;
    let adh = adh_basis(model);
    let rho0 = match system {
        SystemKind::Prop3 => None,
        SystemKind::Prop1 => Some(schouten(model)?.rho0),
    };
    let lay = Layout::new(model.n);
    let vec = lay.pack(k, phi);
    let opts = AssembleOpts {
        system,
        orth: false,
        phi_zero: false,
    };
    let mut bad = None;
    stream_rows(model, &adh, rho0.as_ref(), opts, |label, row| {
        if bad.is_some() {
            return;
        }
        let mut acc = Scalar::zero();
        for (c, a) in &row {
            if !vec[*c as usize].is_zero() {
                acc += &(a * &vec[*c as usize]);
            }
        }
        if !acc.is_zero() {
            bad = Some(label);
        }
    });
    Ok(bad)
}

/// Frobenius orthogonality of every K_Z against ad(h); the ad(h)-valued
/// family fails this for any nonzero member.
pub fn orth_residual(model: &SpaceModel, k: &ConnectionMap) -> bool {
    let adh = adh_basis(model);
    for kz in &k.mats {
        for u in &adh {
            if !kz.frob(u).is_zero() {
                return false;
            }
        }
    }
    true
}

// ---- cyclic pairing system on Hom(m, h) --------------------------------------------

pub struct Lemma3Outcome {
    pub dim: usize,
    pub ad_m_dim: usize,
    pub contains_ad_m: bool,
    pub unknowns: usize,
    pub rows: usize,
}

/// System matrix of sigma_XYZ <[X,Y], A Z>_h = 0 over A in Hom(m, h), with h
/// coordinatized in the adh basis and the h-pairing realized through wedge
/// preimages: <[e_x, e_y], u_b>_h = <u_b e_x, e_y>.
pub fn lemma3_matrix(model: &SpaceModel, adh: &[DMat]) -> SparseMatrix {
    let n = model.n;
    let nb = adh.len();
    let col = |z: usize, b: usize| (z * nb + b) as u32;
    let mut mat = SparseMatrix::new(n * nb);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let mut row: BTreeMap<u32, Scalar> = BTreeMap::new();
                for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for (b, u) in adh.iter().enumerate() {
                        let v = u.at(y, x);
                        if !v.is_zero() {
                            let e = row.entry(col(z, b)).or_insert_with(Scalar::zero);
                            *e += v;
                        }
                    }
                }
                let out: SparseVec<Scalar> = row
                    .into_iter()
                    .filter(|(_, v)| !v.is_zero())
                    .collect();
                mat.push_row(out, Some(format!("cyc|{i},{j},{k}")));
            }
        }
    }
    mat
}

pub fn lemma3_solve(model: &SpaceModel) -> Result<Lemma3Outcome> {
    let n = model.n;
    let adh = adh_basis(model);
    let nb = adh.len();
    let unknowns = n * nb;
    let col = |z: usize, b: usize| (z * nb + b) as u32;
    let mat = lemma3_matrix(model, &adh);
    let field = mat.entry_field()?;
    let basis = mat.nullspace(&field)?;
    let dim = basis.len();
    // the family A_T : Z -> [T, Z], coordinatized in the adh basis
    let npairs = n * (n - 1) / 2;
    let adh_cols = DMat::from_fn(npairs, nb, |r, c| adh[c].skew_coords()[r].clone());
    let mut family: Vec<Vec<Scalar>> = Vec::new();
    let mut contains = true;
    for t in 0..n {
        let mut vec_a = vec![Scalar::zero(); unknowns];
        for z in 0..n {
            let et: Vec<Scalar> = (0..n)
                .map(|r| if r == t { Scalar::one() } else { Scalar::zero() })
                .collect();
            let ez: Vec<Scalar> = (0..n)
                .map(|r| if r == z { Scalar::one() } else { Scalar::zero() })
                .collect();
            let target = model.ad_of(&et, &ez);
            let coords = solve_exact(&adh_cols, &target.skew_coords()).ok_or_else(|| {
                SymError::ConstructionInvalid("ad_[T,Z] escapes span(adh)".into())
            })?;
            for (b, cc) in coords.iter().enumerate() {
                vec_a[col(z, b) as usize] = cc.clone();
            }
        }
        // membership: exact residual of the family element in every row
        for (ri, rrow) in mat.rows.iter().enumerate() {
            let mut acc = Scalar::zero();
            for (c, a) in rrow {
                if !vec_a[*c as usize].is_zero() {
                    acc += &(a * &vec_a[*c as usize]);
                }
            }
            if !acc.is_zero() {
                contains = false;
                let _ = ri;
            }
        }
        family.push(vec_a);
    }
    let ad_m_dim = crate::sparse::dense_span_rank(&family);
    Ok(Lemma3Outcome {
        dim,
        ad_m_dim,
        contains_ad_m: contains,
        unknowns,
        rows: mat.nrows,
    })
}

// ---- boundary operator and decomposable span --------------------------------------

pub struct BoundaryData {
    pub adh_dim: usize,
    pub m_dim: usize,
    /// Kernel basis in wedge coordinates (upper triangle, r < c).
    pub m_basis: Vec<Vec<Scalar>>,
    pub orthogonal_split: bool,
}

/// boundary(e_i ^ e_j) = [e_i, e_j]; the kernel M is the Frobenius-orthogonal
/// complement of ad(h) in so(m).
pub fn boundary(model: &SpaceModel) -> Result<BoundaryData> {
    let n = model.n;
    let npairs = n * (n - 1) / 2;
    // rows = ambient coordinates of the image operators, columns = wedges
    let mut mat = SparseMatrix::new(npairs);
    let cols: Vec<Vec<Scalar>> = {
        let mut v = Vec::with_capacity(npairs);
        for i in 0..n {
            for j in i + 1..n {
                v.push(model.ad_pair(i, j).a);
            }
        }
        v
    };
    for r in 0..n * n {
        let row: SparseVec<Scalar> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| !c[r].is_zero())
            .map(|(ci, c)| (ci as u32, c[r].clone()))
            .collect();
        mat.push_row(row, None);
    }
    let field = mat.entry_field()?;
    let m_basis = mat.nullspace(&field)?;
    let adh_dim = npairs - m_basis.len();
    // orthogonality of the split: every kernel element is Frobenius-orthogonal
    // to every curvature operator
    let adh = adh_basis(model);
    let mut orthogonal = true;
    for kvec in &m_basis {
        for u in &adh {
            let mut acc = Scalar::zero();
            let mut idx = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if !kvec[idx].is_zero() {
                        // <e_i ^ e_j, U>_Tr = 2 <U e_i, e_j>
                        acc += &(&kvec[idx] * &(&Scalar::from_int(2) * u.at(j, i)));
                    }
                    idx += 1;
                }
            }
            if !acc.is_zero() {
                orthogonal = false;
            }
        }
    }
    Ok(BoundaryData {
        adh_dim,
        m_dim: m_basis.len(),
        m_basis,
        orthogonal_split: orthogonal,
    })
}

/// Closed form boundary(K) = -1/2 sum_i [K e_i, e_i] as an ad-operator matrix.
pub fn boundary_closed_form(model: &SpaceModel, k: &DMat) -> DMat {
    let n = model.n;
    let mut acc = DMat::zeros(n, n);
    for i in 0..n {
        let kei: Vec<Scalar> = (0..n).map(|r| k.at(r, i).clone()).collect();
        let ei: Vec<Scalar> = (0..n)
            .map(|r| if r == i { Scalar::one() } else { Scalar::zero() })
            .collect();
        acc = acc.add(&model.ad_of(&kei, &ei));
    }
    acc.scale(&Scalar::from_frac(-1, 2))
}

pub struct DecomposableOutcome {
    pub dim_d: usize,
    pub dim_m: usize,
    pub equals_m: bool,
    pub plateaued: bool,
    pub cartans_used: usize,
}

/// Span of wedges X ^ Y over harvested commuting pairs: all pairs inside
/// `budget` seeded Cartan subspaces plus the pairs (H, X_alpha) with
/// alpha(H) = 0 from the root datum.
pub fn decomposable_span(
    model: &SpaceModel,
    datum: &RootDatum,
    budget: usize,
    seed: u64,
) -> Result<DecomposableOutcome> {
    let n = model.n;
    let npairs = n * (n - 1) / 2;
    let bnd = boundary(model)?;
    let mut ech = Echelon::<Scalar>::new(npairs);
    let wedge_coords = |x: &[Scalar], y: &[Scalar]| -> SparseVec<Scalar> {
        let mut out = Vec::new();
        let mut idx = 0u32;
        for i in 0..n {
            for j in i + 1..n {
                let v = &(&x[i] * &y[j]) - &(&x[j] * &y[i]);
                if !v.is_zero() {
                    out.push((idx, v));
                }
                idx += 1;
            }
        }
        out
    };
    // root-datum pairs (H, X_alpha) with alpha(H) = 0
    for root in &datum.roots {
        // kernel of alpha inside the Cartan via the t0 functional
        let mut kmat = SparseMatrix::new(datum.rank);
        let row: SparseVec<Scalar> = root
            .t0
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i as u32, v.clone()))
            .collect();
        kmat.push_row(row, None);
        for coefs in kmat.nullspace(&kmat.entry_field()?)? {
            let mut h = vec![Scalar::zero(); n];
            for (c, hv) in coefs.iter().zip(datum.cartan.iter()) {
                if !c.is_zero() {
                    for l in 0..n {
                        h[l] += &(c * &hv[l]);
                    }
                }
            }
            for x in &root.space {
                if model.commutes(&h, x) {
                    ech.offer(wedge_coords(&h, x));
                }
            }
        }
    }
    // seeded Cartan subspaces; each contributes its internal wedges plus the
    // wedges of small singular combinations against their full centralizers
    let mut plateau = 0usize;
    let mut plateaued = false;
    let mut used = 0usize;
    let mut last = ech.rank();
    for t in 0..budget {
        let sub = seed
            .wrapping_add(1 + t as u64)
            .wrapping_mul(0x9e3779b97f4a7c15);
        let cartan = match cartan_sub_quiet(model, sub) {
            Some(c) => c,
            None => continue,
        };
        used += 1;
        let r = cartan.len();
        for i in 0..r {
            for j in i + 1..r {
                ech.offer(wedge_coords(&cartan[i], &cartan[j]));
            }
        }
        // candidate singular elements: basis vectors and small pair combos;
        // whenever one lands on a root hyperplane its centralizer grows past
        // the Cartan and the extra wedges are decomposable by construction
        let mut combos: Vec<Vec<Scalar>> = cartan.clone();
        for i in 0..r {
            for j in i + 1..r {
                for (ci, cj) in [(1i64, 1i64), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1)] {
                    let mut h = vec![Scalar::zero(); n];
                    for l in 0..n {
                        h[l] = &(&Scalar::from_int(ci) * &cartan[i][l])
                            + &(&Scalar::from_int(cj) * &cartan[j][l]);
                    }
                    combos.push(h);
                }
            }
        }
        for h in &combos {
            for x in centralizer_of(model, h) {
                if model.commutes(h, &x) {
                    ech.offer(wedge_coords(h, &x));
                }
            }
        }
        if ech.rank() == last {
            plateau += 1;
            plateaued = plateau >= 8;
        } else {
            plateau = 0;
            plateaued = false;
            last = ech.rank();
        }
        if ech.rank() == bnd.m_dim {
            plateaued = true;
            break; // D is contained in M, so saturation cannot go further
        }
    }
    let dim_d = ech.rank();
    Ok(DecomposableOutcome {
        dim_d,
        dim_m: bnd.m_dim,
        equals_m: dim_d == bnd.m_dim,
        plateaued,
        cartans_used: used,
    })
}

fn cartan_sub_quiet(model: &SpaceModel, seed: u64) -> Option<Vec<Vec<Scalar>>> {
    crate::roots::cartan_subspace(model, seed).ok()
}

/// Basis of {Y : [H, Y] = 0}.
fn centralizer_of(model: &SpaceModel, h: &[Scalar]) -> Vec<Vec<Scalar>> {
    let n = model.n;
    let mut ech = Echelon::<Scalar>::new(n);
    for k in 0..n {
        for l in k + 1..n {
            let mut row: SparseVec<Scalar> = Vec::new();
            for j in 0..n {
                let mut coef = Scalar::zero();
                for (i, hi) in h.iter().enumerate() {
                    if !hi.is_zero() {
                        let c = model.c(i, j, k, l);
                        if !c.is_zero() {
                            coef += &(hi * c);
                        }
                    }
                }
                if !coef.is_zero() {
                    row.push((j as u32, coef));
                }
            }
            ech.offer(row);
        }
    }
    ech.nullspace()
}

// ---- Lie-triple cochain machinery ---------------------------------------------------

/// (delta L)(X1, X2, X3) = -L[[X1,X2],X3] + [[LX1,X2],X3] + [[X1,LX2],X3]
/// + [[X1,X2],LX3], exact on all basis triples.
pub fn coboundary_delta1(model: &SpaceModel, l: &DMat) -> Vec<((usize, usize, usize), Vec<Scalar>)> {
    let n = model.n;
    let basis = |k: usize| -> Vec<Scalar> {
        (0..n)
            .map(|r| if r == k { Scalar::one() } else { Scalar::zero() })
            .collect()
    };
    let lcol = |k: usize| -> Vec<Scalar> { (0..n).map(|r| l.at(r, k).clone()).collect() };
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                let mut v: Vec<Scalar> = l
                    .apply(&model.bracket3_basis(i, j, k))
                    .iter()
                    .map(|x| -x)
                    .collect();
                let t1 = model.bracket3(&lcol(i), &basis(j), &basis(k));
                let t2 = model.bracket3(&basis(i), &lcol(j), &basis(k));
                let t3 = model.bracket3(&basis(i), &basis(j), &lcol(k));
                for r in 0..n {
                    v[r] += &t1[r];
                    v[r] += &t2[r];
                    v[r] += &t3[r];
                }
                out.push(((i, j, k), v));
            }
        }
    }
    out
}

pub struct DerivationsOutcome {
    pub dim: usize,
    pub adh_action_dim: usize,
    pub equals_adh_action: bool,
}

/// Nullspace of L -> delta L over End(m), compared with the span of the
/// restrictions of ad(h).
pub fn derivations(model: &SpaceModel) -> Result<DerivationsOutcome> {
    if !model.is_irreducible() {
        return Err(SymError::NotIrreducible);
    }
    let n = model.n;
    let mut mat = SparseMatrix::new(n * n);
    // unknown L_{rc} at column r*n + c; rows indexed by (i<j, k, component)
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                for comp in 0..n {
                    let mut row: BTreeMap<u32, Scalar> = BTreeMap::new();
                    let mut add = |col: u32, v: &Scalar| {
                        if !v.is_zero() {
                            let e = row.entry(col).or_insert_with(Scalar::zero);
                            *e += v;
                        }
                    };
                    // -L [[e_i,e_j],e_k]: component comp depends on L_{comp, a}
                    for a in 0..n {
                        let c = model.c(i, j, k, a);
                        if !c.is_zero() {
                            add((comp * n + a) as u32, &-c);
                        }
                    }
                    // [[L e_i, e_j], e_k]: L e_i = sum_a L_{a,i} e_a
                    for a in 0..n {
                        let c = model.c(a, j, k, comp);
                        if !c.is_zero() {
                            add((a * n + i) as u32, c);
                        }
                        let c = model.c(i, a, k, comp);
                        if !c.is_zero() {
                            add((a * n + j) as u32, c);
                        }
                        let c = model.c(i, j, a, comp);
                        if !c.is_zero() {
                            add((a * n + k) as u32, c);
                        }
                    }
                    let out: SparseVec<Scalar> = row
                        .into_iter()
                        .filter(|(_, v)| !v.is_zero())
                        .collect();
                    mat.push_row(out, None);
                }
            }
        }
    }
    let field = mat.entry_field()?;
    let ns = mat.nullspace(&field)?;
    let dim = ns.len();
    let adh = adh_basis(model);
    let adh_vecs: Vec<Vec<Scalar>> = adh.iter().map(|u| u.a.clone()).collect();
    let adh_action_dim = crate::sparse::dense_span_rank(&adh_vecs);
    let mut union = adh_vecs;
    union.extend(ns.iter().cloned());
    let union_rank = crate::sparse::dense_span_rank(&union);
    Ok(DerivationsOutcome {
        dim,
        adh_action_dim,
        equals_adh_action: dim == adh_action_dim && union_rank == adh_action_dim,
    })
}

// ---- nabla W -----------------------------------------------------------------------

/// (nabla_Z W)(X, Y) for basis Z = e_z, X = e_i, Y = e_j:
/// [ad_{[X,Y]}, K_Z] + ad_{[K_Z X, Y] - [K_Z Y, X]}
/// + ([rho0, K_Z] X) ^ Y + X ^ ([rho0, K_Z] Y).
pub fn nabla_w(model: &SpaceModel, k: &ConnectionMap) -> Result<Vec<((usize, usize, usize), DMat)>> {
    let n = model.n;
    let sch = schouten(model)?;
    let basis = |q: usize| -> Vec<Scalar> {
        (0..n)
            .map(|r| if r == q { Scalar::one() } else { Scalar::zero() })
            .collect()
    };
    let mut out = Vec::new();
    for z in 0..n {
        let kz = &k.mats[z];
        let rho_comm = sch.rho0.mul(kz).sub(&kz.mul(&sch.rho0));
        for i in 0..n {
            for j in i + 1..n {
                let adij = model.ad_pair(i, j);
                let t1 = adij.mul(kz).sub(&kz.mul(&adij));
                let kzx: Vec<Scalar> = (0..n).map(|r| kz.at(r, i).clone()).collect();
                let kzy: Vec<Scalar> = (0..n).map(|r| kz.at(r, j).clone()).collect();
                let t2 = model.ad_of(&kzx, &basis(j)).sub(&model.ad_of(&kzy, &basis(i)));
                let t3 = crate::spaces::wedge(&rho_comm.apply(&basis(i)), &basis(j));
                let t4 = crate::spaces::wedge(&basis(i), &rho_comm.apply(&basis(j)));
                out.push(((z, i, j), t1.add(&t2).add(&t3).add(&t4)));
            }
        }
    }
    Ok(out)
}

// ---- explicit solution families on sl3so3 / su3so3 --------------------------------

/// The three-dimensional trace family on the symmetric-traceless-3x3 model:
/// <K_X Y, Z> = Tr((X[Z,Y]/5 - ZXY) L) and <Phi(Y,Z), X> = Tr((X[Z,Y] + 2ZXY) L)
/// for L running over a basis of so(3). Values are computed on the raw integer
/// basis and rescaled by sqrt(2), which lands every entry in Q(sqrt 3); the
/// rescaling is harmless since the constraint rows are linear.
pub fn sl3so3_trace_family() -> Result<Vec<(ConnectionMap, CottonMap)>> {
    let (raw, sq) = crate::spaces::sl3_raw_basis();
    let n = 5usize;
    let so3 = |i: usize, j: usize| -> DMat {
        let mut m = DMat::zeros(3, 3);
        *m.at_mut(i, j) = Scalar::one();
        *m.at_mut(j, i) = Scalar::from_int(-1);
        m
    };
    let ls = [so3(0, 1), so3(0, 2), so3(1, 2)];
    let factor = |a: usize, b: usize, c: usize| -> Scalar {
        // sqrt(2 / (sq_a sq_b sq_c)) is exact in Q or Q(sqrt 3)
        let prod = Scalar::from_frac(2, sq[a] * sq[b] * sq[c]);
        crate::eigen::sqrt_exact(&prod).expect("norm factor has exact root").0
    };
    let mut out = Vec::new();
    for l in &ls {
        let mut k = ConnectionMap::zero(n);
        let mut phi = CottonMap::zero(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    // X = e_a, Y = e_b, Z = e_c
                    let comm = raw[c].mul(&raw[b]).sub(&raw[b].mul(&raw[c])); // [Z, Y]
                    let kmat = raw[a]
                        .mul(&comm)
                        .scale(&Scalar::from_frac(1, 5))
                        .sub(&raw[c].mul(&raw[a]).mul(&raw[b]));
                    let val = &kmat.mul(l).trace() * &factor(a, b, c);
                    *k.mats[a].at_mut(c, b) = val;
                    if b < c {
                        let pm = raw[a].mul(&comm).add(
                            &raw[c].mul(&raw[a]).mul(&raw[b]).scale(&Scalar::from_int(2)),
                        );
                        let pval = &pm.mul(l).trace() * &factor(a, b, c);
                        phi.set(b, c, a, pval);
                    }
                }
            }
        }
        k.validate()?;
        out.push((k, phi));
    }
    Ok(out)
}

/// The displayed highest-weight element: K_{e_1} and K_{e_4} as given, the
/// other K_{e_i} zero, and <Phi(Y,Z), X> = (3/2) <K_X Y, Z>.
pub fn sl3so3_highest_weight() -> (ConnectionMap, CottonMap) {
    let n = 5usize;
    let mut k = ConnectionMap::zero(n);
    let k1 = [
        [0i64, 0, -1, 0, 0],
        [0, 0, 0, -1, 0],
        [1, 0, 0, 0, 0],
        [0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0],
    ];
    let k4 = [
        [0i64, 1, 0, 0, 0],
        [-1, 0, 0, 0, 0],
        [0, 0, 0, -1, 0],
        [0, 0, 1, 0, 0],
        [0, 0, 0, 0, 0],
    ];
    for r in 0..n {
        for c in 0..n {
            *k.mats[0].at_mut(r, c) = Scalar::from_int(k1[r][c]);
            *k.mats[3].at_mut(r, c) = Scalar::from_int(k4[r][c]);
        }
    }
    let mut phi = CottonMap::zero(n);
    for i in 0..n {
        for j in i + 1..n {
            for x in 0..n {
                // <Phi(e_i, e_j), e_x> = 3/2 <K_{e_x} e_i, e_j>
                let v = &Scalar::from_frac(3, 2) * k.mats[x].at(j, i);
                if !v.is_zero() {
                    phi.set(i, j, x, v);
                }
            }
        }
    }
    (k, phi)
}

/// Connection map K_Z = ad_{P Z} for a seeded random linear P into h.
pub fn random_adh_valued_k(model: &SpaceModel, adh: &[DMat], rng: &mut Rng) -> ConnectionMap {
    let n = model.n;
    let mats = (0..n)
        .map(|_| {
            let mut m = DMat::zeros(n, n);
            for u in adh {
                let c = Scalar::from_int(rng.small_int());
                if !c.is_zero() {
                    m = m.add(&u.scale(&c));
                }
            }
            m
        })
        .collect();
    ConnectionMap { mats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{build_model, SpaceSpec};

    fn model(s: &str) -> SpaceModel {
        build_model(&SpaceSpec::parse(s).unwrap()).unwrap()
    }

    fn opts3(orth: bool) -> AssembleOpts {
        AssembleOpts {
            system: SystemKind::Prop3,
            orth,
            phi_zero: false,
        }
    }

    #[test]
    fn adh_dimensions() {
        assert_eq!(adh_basis(&model("sl3so3")).len(), 3);
        assert_eq!(adh_basis(&model("gr(3,2)")).len(), 4);
        assert_eq!(adh_basis(&model("cp(2)")).len(), 4);
        assert_eq!(adh_basis(&model("hp(2)")).len(), 13);
    }

    #[test]
    fn op2_adh_is_36_spanned_by_clifford_pairs() {
        let m = model("op2");
        let adh = adh_basis(&m);
        assert_eq!(adh.len(), 36);
        let cs = crate::spin9::clifford9().unwrap();
        let mut vecs: Vec<Vec<Scalar>> = adh.iter().map(|u| u.a.clone()).collect();
        let base = crate::sparse::dense_span_rank(&vecs);
        for i in 0..9 {
            for j in i + 1..9 {
                vecs.push(cs.s[i].mul(&cs.s[j]).a.clone());
            }
        }
        assert_eq!(base, 36);
        assert_eq!(crate::sparse::dense_span_rank(&vecs), 36);
    }

    #[test]
    fn sl3so3_dim_14() {
        let m = model("sl3so3");
        let sol = solve_constraints(&m, opts3(true), FieldChoice::Exact, 0).unwrap();
        assert_eq!(sol.unknowns, 100);
        assert_eq!(sol.dim, 14);
        assert!(sol.certified);
    }

    #[test]
    fn zero_pair_is_solution_and_random_is_not() {
        let m = model("gr(3,2)");
        let k = ConnectionMap::zero(6);
        let phi = CottonMap::zero(6);
        assert!(residual(&m, &k, &phi, SystemKind::Prop3).unwrap().is_none());
        // a generic (K, Phi) misses the solution variety
        let mut k2 = ConnectionMap::zero(6);
        *k2.mats[0].at_mut(0, 1) = Scalar::one();
        *k2.mats[0].at_mut(1, 0) = Scalar::from_int(-1);
        let mut phi2 = CottonMap::zero(6);
        phi2.set(0, 1, 2, Scalar::one());
        assert!(residual(&m, &k2, &phi2, SystemKind::Prop3)
            .unwrap()
            .is_some());
    }

    #[test]
    fn remark2_family_solves_orth_free_system() {
        let mut rng = Rng::new(5);
        for s in ["gr(3,2)", "cp(2)", "sl3so3", "g2so4"] {
            let m = model(s);
            let adh = adh_basis(&m);
            let k = random_adh_valued_k(&m, &adh, &mut rng);
            let phi = CottonMap::zero(m.n);
            assert!(
                residual(&m, &k, &phi, SystemKind::Prop3).unwrap().is_none(),
                "{s}"
            );
            // with orth rows, any nonzero family member violates orthogonality
            let nonzero = k.mats.iter().any(|mm| !mm.is_zero());
            if nonzero {
                assert!(!orth_residual(&m, &k), "{s}");
            }
        }
    }

    #[test]
    fn gr32_prop3_orth_dim_zero() {
        let m = model("gr(3,2)");
        let sol = solve_constraints(&m, opts3(true), FieldChoice::Exact, 0).unwrap();
        assert_eq!(sol.dim, 0);
        // dual has the same orth dim, and without the orthogonality rows the
        // whole solution space is the ad(h)-valued family: the Phi-block
        // projection and the K-complement projection both vanish
        let d = m.dual();
        let sol_d = solve_constraints(&d, opts3(true), FieldChoice::Exact, 0).unwrap();
        assert_eq!(sol_d.dim, 0);
        let free = solve_constraints(&m, opts3(false), FieldChoice::Exact, 0).unwrap();
        assert_eq!(free.dim, 6 * 4);
        assert_eq!(free.phi_block_rank, 0);
        assert_eq!(free.k_adh_complement_rank, 0);
    }

    #[test]
    fn modular_certify_reconstructs_sl3so3() {
        let m = model("sl3so3");
        let sol = solve_constraints(
            &m,
            opts3(true),
            FieldChoice::Modular {
                prime: None,
                certify: true,
            },
            0,
        )
        .unwrap();
        assert_eq!(sol.dim, 14);
        assert!(sol.certified, "rational reconstruction + residuals");
    }

    #[test]
    fn cp2_phi_free_dim_positive() {
        let m = model("cp(2)");
        let sol = solve_constraints(&m, opts3(true), FieldChoice::Exact, 0).unwrap();
        assert!(sol.dim > 0);
        // pinning Phi = 0 kills everything
        let mut o = opts3(true);
        o.phi_zero = true;
        let sol0 = solve_constraints(&m, o, FieldChoice::Exact, 0).unwrap();
        assert_eq!(sol0.dim, 0);
    }

    #[test]
    fn prop1_equals_prop3_for_irreducible_einstein() {
        let m = model("gr(3,2)");
        let a3 = assemble(&m, opts3(false)).unwrap();
        let a1 = assemble(
            &m,
            AssembleOpts {
                system: SystemKind::Prop1,
                orth: false,
                phi_zero: false,
            },
        )
        .unwrap();
        // row spaces coincide: ranks equal and the union adds nothing
        let f = FieldSpec::Rational;
        let r3 = a3.rank(&f).unwrap();
        let r1 = a1.rank(&f).unwrap();
        assert_eq!(r3, r1);
        let mut ech = Echelon::<Scalar>::new(a3.ncols);
        for r in &a3.rows {
            ech.offer(r.clone());
        }
        for r in &a1.rows {
            ech.offer(r.clone());
        }
        assert_eq!(ech.rank(), r3);
    }

    #[test]
    fn product_prop1_without_orth() {
        let g = model("gr(3,2)");
        let p = crate::spaces::product(&g, &g).unwrap();
        let sol = solve_constraints(
            &p,
            AssembleOpts {
                system: SystemKind::Prop1,
                orth: false,
                phi_zero: false,
            },
            FieldChoice::Modular {
                prime: None,
                certify: false,
            },
            0,
        )
        .unwrap();
        // ad(h)-valued maps m -> h_1 + h_2: dim = n * dim(adh) = 12 * 8
        assert_eq!(sol.dim, 96);
        assert_eq!(sol.phi_block_rank, 0);
        assert_eq!(sol.k_adh_complement_rank, 0);
    }

    #[test]
    fn mixed_product_prop1_exercises_schouten_commutators() {
        // different Einstein constants per factor make rho0 non-scalar, so the
        // substituted commutator terms genuinely enter the rows; the solution
        // space must still be exactly the blockwise ad(h)-valued family
        let a = model("gr(3,2)");
        let b = model("gr(4,2)");
        let la = crate::curvature::einstein_constants(&a).unwrap();
        let lb = crate::curvature::einstein_constants(&b).unwrap();
        assert_ne!(la[0], lb[0]);
        let p = crate::spaces::product(&a, &b).unwrap();
        let adh_dim = adh_basis(&p).len();
        assert_eq!(adh_dim, adh_basis(&a).len() + adh_basis(&b).len());
        let sol = solve_constraints(
            &p,
            AssembleOpts {
                system: SystemKind::Prop1,
                orth: false,
                phi_zero: false,
            },
            FieldChoice::Modular {
                prime: None,
                certify: false,
            },
            0,
        )
        .unwrap();
        assert_eq!(sol.dim, p.n * adh_dim);
        assert_eq!(sol.phi_block_rank, 0);
        assert_eq!(sol.k_adh_complement_rank, 0);
    }

    #[test]
    fn product_prop1_with_orth_dim_zero() {
        let g = model("gr(3,2)");
        let p = crate::spaces::product(&g, &g).unwrap();
        let sol = solve_constraints(
            &p,
            AssembleOpts {
                system: SystemKind::Prop1,
                orth: true,
                phi_zero: false,
            },
            FieldChoice::Modular {
                prime: None,
                certify: false,
            },
            0,
        )
        .unwrap();
        assert_eq!(sol.dim, 0);
        assert!(sol.certified);
    }

    #[test]
    fn lemma3_dimensions() {
        for (s, n) in [("gr(3,2)", 6), ("sl3so3", 5), ("g2so4", 8)] {
            let m = model(s);
            let out = lemma3_solve(&m).unwrap();
            assert_eq!(out.dim, n, "{s}");
            assert_eq!(out.ad_m_dim, n, "{s}");
            assert!(out.contains_ad_m, "{s}");
        }
        for s in ["cp(2)", "cp(3)", "hp(2)"] {
            let m = model(s);
            let out = lemma3_solve(&m).unwrap();
            assert!(out.dim > m.n, "{s}");
            assert!(out.contains_ad_m, "{s}");
        }
    }

    #[test]
    fn boundary_matches_definition_and_closed_form() {
        let m = model("gr(3,2)");
        let n = m.n;
        // boundary(e_i ^ e_j) computed by the closed form equals ad_{[e_i,e_j]}
        for i in 0..n {
            for j in i + 1..n {
                let mut w = DMat::zeros(n, n);
                *w.at_mut(j, i) = Scalar::one();
                *w.at_mut(i, j) = Scalar::from_int(-1);
                assert_eq!(boundary_closed_form(&m, &w), m.ad_pair(i, j));
            }
        }
        let b = boundary(&m).unwrap();
        assert_eq!(b.adh_dim, 4);
        assert_eq!(b.m_dim, 15 - 4);
        assert!(b.orthogonal_split);
    }

    #[test]
    fn gr43_boundary_dims() {
        let m = model("gr(4,3)");
        let b = boundary(&m).unwrap();
        assert_eq!(b.adh_dim, 9);
        assert_eq!(b.m_dim, 66 - 9);
    }

    #[test]
    fn decomposable_span_gr43_saturates() {
        let m = model("gr(4,3)");
        let d = crate::roots::root_datum(&m, 0).unwrap();
        let out = decomposable_span(&m, &d, 64, 0).unwrap();
        assert_eq!(out.dim_m, 57);
        assert_eq!(out.dim_d, 57);
        assert!(out.equals_m);
    }

    #[test]
    fn single_cartan_gives_at_least_r_choose_2() {
        let m = model("gr(3,2)");
        let d = crate::roots::root_datum(&m, 0).unwrap();
        let out = decomposable_span(&m, &d, 1, 0).unwrap();
        assert!(out.dim_d >= 1); // r(r-1)/2 with r = 2
    }

    #[test]
    fn delta_of_identity_doubles_bracket() {
        let m = model("gr(3,2)");
        let id = DMat::identity(m.n);
        for ((i, j, k), v) in coboundary_delta1(&m, &id) {
            let want: Vec<Scalar> = m
                .bracket3_basis(i, j, k)
                .iter()
                .map(|x| &Scalar::from_int(2) * x)
                .collect();
            assert_eq!(v, want);
        }
    }

    #[test]
    fn inner_derivations_have_zero_coboundary() {
        let m = model("gr(3,2)");
        let adh = adh_basis(&m);
        for u in adh.iter().take(2) {
            for ((_, _, _), v) in coboundary_delta1(&m, u) {
                assert!(v.iter().all(|x| x.is_zero()));
            }
        }
        // a random non-derivation has nonzero coboundary
        let mut l = DMat::zeros(m.n, m.n);
        *l.at_mut(0, 0) = Scalar::one();
        let any_nonzero = coboundary_delta1(&m, &l)
            .iter()
            .any(|(_, v)| v.iter().any(|x| !x.is_zero()));
        assert!(any_nonzero);
    }

    #[test]
    fn derivation_spaces() {
        for (s, dim) in [("sl3so3", 3), ("gr(3,2)", 4), ("cp(2)", 4)] {
            let m = model(s);
            let out = derivations(&m).unwrap();
            assert_eq!(out.dim, dim, "{s}");
            assert!(out.equals_adh_action, "{s}");
        }
    }

    #[test]
    fn nabla_w_vanishes_for_adh_valued_k() {
        let mut rng = Rng::new(17);
        for s in ["gr(3,2)", "cp(2)"] {
            let m = model(s);
            let k0 = ConnectionMap::zero(m.n);
            assert!(nabla_w(&m, &k0).unwrap().iter().all(|(_, v)| v.is_zero()));
            let adh = adh_basis(&m);
            let k = random_adh_valued_k(&m, &adh, &mut rng);
            assert!(
                nabla_w(&m, &k).unwrap().iter().all(|(_, v)| v.is_zero()),
                "{s}"
            );
        }
    }

    #[test]
    fn nabla_w_vanishes_on_product_with_block_k() {
        let g = model("gr(3,2)");
        let p = crate::spaces::product(&g, &g).unwrap();
        let adh = adh_basis(&p);
        let mut rng = Rng::new(3);
        let k = random_adh_valued_k(&p, &adh, &mut rng);
        assert!(nabla_w(&p, &k).unwrap().iter().all(|(_, v)| v.is_zero()));
    }

    #[test]
    fn provenance_labels_reassemble() {
        let m = model("sl3so3");
        let adh = adh_basis(&m);
        let a = assemble(&m, opts3(true)).unwrap();
        let labels = a.row_labels.clone().unwrap();
        let mut rng = Rng::new(9);
        for _ in 0..10 {
            let idx = rng.below(a.nrows as u64) as usize;
            let row = reassemble_row(&m, &adh, None, opts3(true), &labels[idx]).unwrap();
            assert_eq!(row, a.rows[idx]);
        }
    }

    #[test]
    fn phi_trace_identity_on_solutions() {
        // every solution of the orth-free system has sum_i <Phi(X, e_i), e_i> = 0
        let m = model("sl3so3");
        let sol = solve_constraints(&m, opts3(false), FieldChoice::Exact, 0).unwrap();
        let lay = Layout::new(m.n);
        if let SolvedBasis::Exact(basis) = &sol.basis {
            assert!(!basis.is_empty());
            for v in basis {
                for x in 0..m.n {
                    let mut acc = Scalar::zero();
                    for i in 0..m.n {
                        if let Some((col, sgn)) = lay.phi_entry(x, i, i) {
                            let val = &v[col as usize];
                            if sgn > 0 {
                                acc += val;
                            } else {
                                acc += &(-val);
                            }
                        }
                    }
                    assert!(acc.is_zero());
                }
            }
        }
    }

    #[test]
    fn scale_invariance_of_solution_dim() {
        let m = model("sl3so3");
        let scaled = m.scale_bracket(&Scalar::from_int(2));
        let sol = solve_constraints(&m, opts3(true), FieldChoice::Exact, 0).unwrap();
        let sol2 = solve_constraints(&scaled, opts3(true), FieldChoice::Exact, 0).unwrap();
        assert_eq!(sol.dim, sol2.dim);
        // (K, Phi) -> (K, 2 Phi) carries solutions onto solutions
        if let (SolvedBasis::Exact(b1), SolvedBasis::Exact(_)) = (&sol.basis, &sol2.basis) {
            let lay = Layout::new(m.n);
            let adh = adh_basis(&scaled);
            for v in b1 {
                let mut w = v.clone();
                for c in lay.k_cols()..lay.unknowns() {
                    w[c] = &w[c] * &Scalar::from_int(2);
                }
                let mut ok = true;
                stream_rows(&scaled, &adh, None, opts3(true), |_, row| {
                    let mut acc = Scalar::zero();
                    for (c, a) in &row {
                        if !w[*c as usize].is_zero() {
                            acc += &(a * &w[*c as usize]);
                        }
                    }
                    if !acc.is_zero() {
                        ok = false;
                    }
                });
                assert!(ok);
            }
        }
    }

    #[test]
    fn explicit_families_have_zero_residual() {
        let m = model("sl3so3");
        let fam = sl3so3_trace_family().unwrap();
        assert_eq!(fam.len(), 3);
        for (k, phi) in &fam {
            assert!(residual(&m, k, phi, SystemKind::Prop3).unwrap().is_none());
            assert!(orth_residual(&m, k));
        }
        let (k, phi) = sl3so3_highest_weight();
        assert!(residual(&m, &k, &phi, SystemKind::Prop3).unwrap().is_none());
        assert!(orth_residual(&m, &k));
        // both families lie in the span of the solved basis
        let sol = solve_constraints(
            &m,
            opts3(true),
            FieldChoice::Exact,
            0,
        )
        .unwrap();
        if let SolvedBasis::Exact(basis) = &sol.basis {
            let lay = Layout::new(m.n);
            let mut ech = Echelon::<Scalar>::new(lay.unknowns());
            for v in basis {
                ech.offer(crate::sparse::dense_to_sparse(v));
            }
            let rank = ech.rank();
            assert_eq!(rank, 14);
            for (kk, pp) in fam.iter().chain(std::iter::once(&(k, phi))) {
                let vec = lay.pack(kk, pp);
                assert!(!ech.offer(crate::sparse::dense_to_sparse(&vec)));
            }
        }
    }

    #[test]
    fn cp2_duality_preserves_solution_dim() {
        let m = model("cp(2)");
        let d = m.dual();
        let sol = solve_constraints(&m, opts3(true), FieldChoice::Exact, 0).unwrap();
        let sol_d = solve_constraints(&d, opts3(true), FieldChoice::Exact, 0).unwrap();
        assert_eq!(sol.dim, 8);
        assert_eq!(sol_d.dim, 8);
        // (K, Phi) -> (K, -Phi) carries the basis across
        if let SolvedBasis::Exact(basis) = &sol.basis {
            let lay = Layout::new(m.n);
            let adh = adh_basis(&d);
            for v in basis {
                let mut w = v.clone();
                for c in lay.k_cols()..lay.unknowns() {
                    w[c] = -&w[c];
                }
                let mut ok = true;
                stream_rows(&d, &adh, None, opts3(true), |_, row| {
                    let mut acc = Scalar::zero();
                    for (c, a) in &row {
                        if !w[*c as usize].is_zero() {
                            acc += &(a * &w[*c as usize]);
                        }
                    }
                    if !acc.is_zero() {
                        ok = false;
                    }
                });
                assert!(ok);
            }
        }
    }

    #[test]
    fn duality_carries_solutions() {
        // (K, Phi) -> (K, -Phi) maps sl3so3 solutions onto su3so3 solutions
        let m = model("sl3so3");
        let d = model("su3so3");
        let sol = solve_constraints(&m, opts3(true), FieldChoice::Exact, 0).unwrap();
        let sol_d = solve_constraints(&d, opts3(true), FieldChoice::Exact, 0).unwrap();
        assert_eq!(sol.dim, sol_d.dim);
        let lay = Layout::new(m.n);
        let adh = adh_basis(&d);
        if let SolvedBasis::Exact(basis) = &sol.basis {
            for v in basis {
                let mut w = v.clone();
                for c in lay.k_cols()..lay.unknowns() {
                    w[c] = -&w[c];
                }
                let mut ok = true;
                stream_rows(&d, &adh, None, opts3(true), |_, row| {
                    let mut acc = Scalar::zero();
                    for (c, a) in &row {
                        if !w[*c as usize].is_zero() {
                            acc += &(a * &w[*c as usize]);
                        }
                    }
                    if !acc.is_zero() {
                        ok = false;
                    }
                });
                assert!(ok);
            }
        }
    }
}

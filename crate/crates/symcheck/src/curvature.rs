//! Curvature, Ricci, scalar, Schouten and Weyl tensors of a space model,
//! the operator S_A on so(m), and the Casimir-type trace identities.

use crate::dense::DMat;
use crate::error::{Result, SymError};
use crate::scalar::Scalar;
use crate::spaces::{wedge, SpaceModel};

/// R(X,Y) = -[[X,Y], .] stored per basis pair i < j.
pub struct CurvatureTensor {
    pub n: usize,
    r: Vec<DMat>,
}

impl CurvatureTensor {
    pub fn at_pair(&self, i: usize, j: usize) -> DMat {
        assert!(i != j);
        let idx = pair_index(self.n, i.min(j), i.max(j));
        if i < j {
            self.r[idx].clone()
        } else {
            self.r[idx].neg()
        }
    }
}

pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

pub fn curvature(model: &SpaceModel) -> CurvatureTensor {
    let n = model.n;
    let mut r = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            r.push(model.ad_pair(i, j).neg());
        }
    }
    CurvatureTensor { n, r }
}

/// Ricci operator, scalar curvature, and the Schouten operator
/// rho_0 = Ric/(n-2) - scal id / (2(n-1)(n-2)).
pub struct SchoutenData {
    pub ric: DMat,
    pub scal: Scalar,
    pub rho0: DMat,
}

/// Ric(X) = sum_i R(e_i, X) e_i = sum_i [[X, e_i], e_i]; this is the unique
/// trace convention under which the Schouten formula of SchoutenData makes
/// the Weyl tensor trace-free, given R = -ad.
pub fn ricci(model: &SpaceModel) -> DMat {
    let n = model.n;
    DMat::from_fn(n, n, |l, k| {
        let mut acc = Scalar::zero();
        for i in 0..n {
            acc += model.c(k, i, i, l);
        }
        acc
    })
}

pub fn schouten(model: &SpaceModel) -> Result<SchoutenData> {
    let n = model.n;
    if n < 4 {
        return Err(SymError::DimensionTooSmall { n });
    }
    let ric = ricci(model);
    let scal = ric.trace();
    let a = Scalar::from_int((n as i64) - 2).inv();
    let b = &scal / &Scalar::from_int(2 * (n as i64 - 1) * (n as i64 - 2));
    let mut rho0 = ric.scale(&a);
    for i in 0..n {
        *rho0.at_mut(i, i) = rho0.at(i, i) - &b;
    }
    Ok(SchoutenData { ric, scal, rho0 })
}

/// W(X,Y) = R(X,Y) - (rho X) ^ Y - X ^ (rho Y), per basis pair i < j.
pub struct WeylTensor {
    pub n: usize,
    w: Vec<DMat>,
}

impl WeylTensor {
    pub fn at_pair(&self, i: usize, j: usize) -> DMat {
        assert!(i != j);
        let idx = pair_index(self.n, i.min(j), i.max(j));
        if i < j {
            self.w[idx].clone()
        } else {
            self.w[idx].neg()
        }
    }
}

pub fn weyl(model: &SpaceModel) -> Result<WeylTensor> {
    let n = model.n;
    let sch = schouten(model)?;
    let r = curvature(model);
    let mut w = Vec::with_capacity(n * (n - 1) / 2);
    let basis = |k: usize| -> Vec<Scalar> {
        let mut v = vec![Scalar::zero(); n];
        v[k] = Scalar::one();
        v
    };
    for i in 0..n {
        for j in i + 1..n {
            let ei = basis(i);
            let ej = basis(j);
            let rij = r.at_pair(i, j);
            let m = rij
                .sub(&wedge(&sch.rho0.apply(&ei), &ej))
                .sub(&wedge(&ei, &sch.rho0.apply(&ej)));
            w.push(m);
        }
    }
    Ok(WeylTensor { n, w })
}

/// Trace of the Weyl tensor in the Ricci slot: sum_i W(X ^ e_i) e_i, which
/// must vanish for every X.
pub fn weyl_ricci_trace(wt: &WeylTensor, x_idx: usize) -> Vec<Scalar> {
    let n = wt.n;
    let mut acc = vec![Scalar::zero(); n];
    for i in 0..n {
        if i == x_idx {
            continue;
        }
        let m = wt.at_pair(x_idx, i);
        for l in 0..n {
            acc[l] += m.at(l, i);
        }
    }
    acc
}

/// S_A T = AT + TA as a matrix on so(m) in upper-triangle coordinates.
pub fn s_operator(a: &DMat) -> Result<DMat> {
    if !a.is_symmetric() {
        return Err(SymError::NotSymmetric);
    }
    let n = a.nrows;
    let dim = n * (n - 1) / 2;
    let mut out = DMat::zeros(dim, dim);
    for i in 0..n {
        for j in i + 1..n {
            // image of the basis element e_i ^ e_j (matrix E_ji - E_ij)
            let mut m = DMat::zeros(n, n);
            *m.at_mut(j, i) = Scalar::one();
            *m.at_mut(i, j) = Scalar::from_int(-1);
            let img = a.mul(&m).add(&m.mul(a));
            let col = pair_index(n, i, j);
            for r in 0..n {
                for c in r + 1..n {
                    // coordinate of img at e_r ^ e_c is its (c, r) entry
                    *out.at_mut(pair_index(n, r, c), col) = img.at(c, r).clone();
                }
            }
        }
    }
    Ok(out)
}

/// Per-block Casimir constants c with sum_i [[X, e_i], e_i] = c X on the block.
pub fn casimir(model: &SpaceModel) -> Result<Vec<Scalar>> {
    let n = model.n;
    let mut out = Vec::new();
    for (bi, block) in model.factor_blocks.iter().enumerate() {
        let mut c: Option<Scalar> = None;
        for &k in block {
            // sum_i [[e_k, e_i], e_i]
            let mut v = vec![Scalar::zero(); n];
            for i in 0..n {
                for l in 0..n {
                    v[l] += model.c(k, i, i, l);
                }
            }
            for (l, val) in v.iter().enumerate() {
                if l == k {
                    match &c {
                        None => c = Some(val.clone()),
                        Some(prev) => {
                            if prev != val {
                                return Err(SymError::NotScalarOnBlock { block: bi });
                            }
                        }
                    }
                } else if !val.is_zero() {
                    return Err(SymError::NotScalarOnBlock { block: bi });
                }
            }
        }
        out.push(c.expect("nonempty block"));
    }
    Ok(out)
}

/// sum_i ([[X, Ke_i], e_i] + [[X, e_i], Ke_i]) for an arbitrary K in so(m);
/// vanishes identically.
pub fn casimir_perturbation(model: &SpaceModel, k: &DMat, x_idx: usize) -> Vec<Scalar> {
    let n = model.n;
    let mut acc = vec![Scalar::zero(); n];
    let x: Vec<Scalar> = (0..n)
        .map(|r| if r == x_idx { Scalar::one() } else { Scalar::zero() })
        .collect();
    for i in 0..n {
        let ei: Vec<Scalar> = (0..n)
            .map(|r| if r == i { Scalar::one() } else { Scalar::zero() })
            .collect();
        let kei: Vec<Scalar> = (0..n).map(|r| k.at(r, i).clone()).collect();
        let t1 = model.bracket3(&x, &kei, &ei);
        let t2 = model.bracket3(&x, &ei, &kei);
        for l in 0..n {
            acc[l] += &t1[l];
            acc[l] += &t2[l];
        }
    }
    acc
}

/// Is the Ricci operator a multiple of the identity on every factor block?
/// Returns the per-block Einstein constants when so.
pub fn einstein_constants(model: &SpaceModel) -> Option<Vec<Scalar>> {
    let ric = ricci(model);
    let mut out = Vec::new();
    for block in &model.factor_blocks {
        let mut lam: Option<Scalar> = None;
        for &k in block {
            for l in 0..model.n {
                let v = ric.at(l, k);
                if l == k {
                    match &lam {
                        None => lam = Some(v.clone()),
                        Some(prev) if prev == v => {}
                        _ => return None,
                    }
                } else if !v.is_zero() {
                    return None;
                }
            }
        }
        out.push(lam.unwrap());
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rng;
    use crate::spaces::{build_model, SpaceSpec};

    fn model(s: &str) -> SpaceModel {
        build_model(&SpaceSpec::parse(s).unwrap()).unwrap()
    }

    fn random_skew(n: usize, rng: &mut Rng) -> DMat {
        let mut m = DMat::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = Scalar::from_int(rng.small_int());
                *m.at_mut(i, j) = v.clone();
                *m.at_mut(j, i) = -&v;
            }
        }
        m
    }

    #[test]
    fn sphere_curvature_is_constant() {
        let m = model("gr(3,1)");
        let r = curvature(&m);
        for i in 0..3 {
            for j in i + 1..3 {
                let basis = |k: usize| -> Vec<Scalar> {
                    let mut v = vec![Scalar::zero(); 3];
                    v[k] = Scalar::one();
                    v
                };
                // R(X,Y) = kappa X ^ Y with kappa = -1 under R = -ad
                assert_eq!(
                    r.at_pair(i, j),
                    wedge(&basis(i), &basis(j)).neg()
                );
            }
        }
    }

    #[test]
    fn product_curvature_block_diagonal() {
        let g = model("gr(3,2)");
        let p = crate::spaces::product(&g, &g).unwrap();
        let r = curvature(&p);
        for i in 0..6 {
            for j in 6..12 {
                assert!(r.at_pair(i, j).is_zero());
            }
        }
    }

    #[test]
    fn gr32_r_matches_direct_bracket() {
        let m = model("gr(3,2)");
        let r = curvature(&m);
        // R(E11, E21)E21 = -[[E11,E21],E21] = +E11 from the displayed formula
        let rm = r.at_pair(0, 2);
        let col: Vec<Scalar> = (0..6).map(|l| rm.at(l, 2).clone()).collect();
        let direct: Vec<Scalar> = (0..6)
            .map(|l| -m.c(0, 2, 2, l))
            .collect();
        assert_eq!(col, direct);
        assert_eq!(col[0], Scalar::one());
    }

    #[test]
    fn catalog_models_are_einstein() {
        // The displayed catalog brackets orient compact models with negative
        // Casimir, so under the trace-free-consistent Ricci convention the
        // compact models carry scal < 0 and the noncompact duals scal > 0.
        for s in ["gr(3,2)", "gr(4,2)", "cp(2)", "cp(3)", "hp(2)", "sl3so3", "su3so3", "g2so4"] {
            let m = model(s);
            let lam = einstein_constants(&m).unwrap_or_else(|| panic!("{s} not Einstein"));
            assert_eq!(lam.len(), 1);
            if m.n >= 4 {
                let sch = schouten(&m).unwrap();
                assert_eq!(sch.scal.signum() as i64, -(m.sign as i64), "{s} scal sign");
            }
        }
    }

    #[test]
    fn gr32_einstein_constant_golden() {
        // Ric coincides with the Casimir operator: each diagonal entry of
        // gr(3,2) sums three unit contributions with the compact orientation.
        let m = model("gr(3,2)");
        let lam = einstein_constants(&m).unwrap();
        assert_eq!(lam[0], Scalar::from_int(-3));
        let c = casimir(&m).unwrap();
        assert_eq!(c[0], Scalar::from_int(-3));
    }

    #[test]
    fn product_of_equal_models_is_einstein_same_lambda() {
        let g = model("gr(3,2)");
        let p = crate::spaces::product(&g, &g).unwrap();
        let lam = einstein_constants(&p).unwrap();
        assert_eq!(lam.len(), 2);
        assert_eq!(lam[0], lam[1]);
        let c = casimir(&p).unwrap();
        assert_eq!(c[0], c[1]);
    }

    #[test]
    fn weyl_vanishes_on_spheres() {
        for s in ["gr(4,1)", "gr(5,1)"] {
            let m = model(s);
            let w = weyl(&m).unwrap();
            for i in 0..m.n {
                for j in i + 1..m.n {
                    assert!(w.at_pair(i, j).is_zero(), "{s} W({i},{j})");
                }
            }
        }
    }

    #[test]
    fn cp2_weyl_nonzero_and_trace_free() {
        let m = model("cp(2)");
        let w = weyl(&m).unwrap();
        let nonzero = (0..m.n)
            .flat_map(|i| (i + 1..m.n).map(move |j| (i, j)))
            .any(|(i, j)| !w.at_pair(i, j).is_zero());
        assert!(nonzero);
        for x in 0..m.n {
            assert!(weyl_ricci_trace(&w, x).iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn weyl_inherits_curvature_symmetries() {
        // first Bianchi and pair symmetry hold entrywise for W
        for s in ["cp(2)", "gr(3,2)", "sl3so3"] {
            let m = model(s);
            let w = weyl(&m).unwrap();
            let n = m.n;
            let entry = |i: usize, j: usize, k: usize, l: usize| -> Scalar {
                if i == j {
                    return Scalar::zero();
                }
                w.at_pair(i, j).at(l, k).clone()
            };
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if i == j || j == k || i == k {
                            continue;
                        }
                        for l in 0..n {
                            let cyc = &(&entry(i, j, k, l) + &entry(j, k, i, l))
                                + &entry(k, i, j, l);
                            assert!(cyc.is_zero(), "{s} bianchi ({i},{j},{k},{l})");
                        }
                    }
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    for k in 0..n {
                        for l in k + 1..n {
                            assert_eq!(
                                entry(i, j, k, l),
                                entry(k, l, i, j),
                                "{s} pair symmetry"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dual_weyl_is_negated() {
        let m = model("cp(2)");
        let d = m.dual();
        let w = weyl(&m).unwrap();
        let wd = weyl(&d).unwrap();
        for i in 0..m.n {
            for j in i + 1..m.n {
                assert_eq!(wd.at_pair(i, j), w.at_pair(i, j).neg());
            }
        }
    }

    #[test]
    fn s_operator_examples() {
        let id = DMat::identity(4);
        let s = s_operator(&id).unwrap();
        assert_eq!(s, DMat::identity(6).scale(&Scalar::from_int(2)));
        // diagonal A: e_i ^ e_j eigenvector with eigenvalue lambda_i + lambda_j
        let a = DMat::from_fn(4, 4, |r, c| {
            if r == c {
                Scalar::from_int([2, 3, 5, 7][r])
            } else {
                Scalar::zero()
            }
        });
        let s = s_operator(&a).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                let idx = pair_index(4, i, j);
                for q in 0..6 {
                    let want = if q == idx {
                        Scalar::from_int([2, 3, 5, 7][i] + [2, 3, 5, 7][j])
                    } else {
                        Scalar::zero()
                    };
                    assert_eq!(*s.at(q, idx), want);
                }
            }
        }
        let skew = DMat::from_fn(2, 2, |r, c| Scalar::from_int([[0, 1], [-1, 0]][r][c]));
        assert!(matches!(s_operator(&skew), Err(SymError::NotSymmetric)));
    }

    #[test]
    fn r_equals_w_plus_s_rho_on_catalog() {
        for s in ["gr(3,2)", "cp(2)", "hp(2)", "sl3so3", "g2so4"] {
            let m = model(s);
            let r = curvature(&m);
            let w = weyl(&m).unwrap();
            let sch = schouten(&m).unwrap();
            let srho = s_operator(&sch.rho0).unwrap();
            for i in 0..m.n {
                for j in i + 1..m.n {
                    // S_rho applied to the pair basis element, read back as a matrix
                    let col = pair_index(m.n, i, j);
                    let mut srho_mat = DMat::zeros(m.n, m.n);
                    for a in 0..m.n {
                        for b in a + 1..m.n {
                            let v = srho.at(pair_index(m.n, a, b), col);
                            if !v.is_zero() {
                                *srho_mat.at_mut(b, a) = v.clone();
                                *srho_mat.at_mut(a, b) = -v;
                            }
                        }
                    }
                    assert_eq!(
                        r.at_pair(i, j),
                        w.at_pair(i, j).add(&srho_mat),
                        "{s} at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn casimir_perturbation_identity_holds() {
        let mut rng = Rng::new(31);
        for s in ["gr(3,2)", "cp(2)", "sl3so3"] {
            let m = model(s);
            for _ in 0..100 {
                let k = random_skew(m.n, &mut rng);
                for x in 0..m.n {
                    assert!(casimir_perturbation(&m, &k, x).iter().all(|v| v.is_zero()));
                }
            }
        }
    }

    #[test]
    fn casimir_rejects_merged_blocks() {
        let g = model("gr(3,2)");
        let mut p = crate::spaces::product(&g, &model("gr(3,1)")).unwrap();
        // pretend the product is a single block: the Casimir is not scalar on it
        p.factor_blocks = vec![(0..p.n).collect()];
        assert!(matches!(
            casimir(&p),
            Err(SymError::NotScalarOnBlock { .. })
        ));
    }

    #[test]
    fn schouten_needs_dimension_four() {
        let m = model("gr(2,1)");
        assert!(matches!(
            schouten(&m),
            Err(SymError::DimensionTooSmall { n: 2 })
        ));
    }
}

//! Kac-Takesaki (multiplicative unitary) operators of a finite abelian group
//! and its dual, their represented forms, and residual checks of the
//! pentagonal and intertwining relations.
//!
//! Everything is additive: `(W eta)(u, v) = eta(u - v, v)`, i.e.
//! `W delta_(a,b) = delta_(a+b, b)`, and `V (|a> (x) |b>) = |a> (x) |a+b>`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::hilbert::{word_residual, DenseOperator, LegSpace, LocalAction, MAX_DENSE_DIM};
use crate::measurement::SpectralRepresentation;

/// Largest space on which the column-by-column residual checks run.
pub const MAX_CHECK_DIM: usize = 1 << 18;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which way round the relations are written.
///
/// W-type: `W12 W23 = W23 W13 W12` and `W (1 (x) l_u) = (l_u (x) l_u) W`.
/// V-type: `V23 V12 = V12 V13 V23` and `V (l_g (x) 1) = (l_g (x) l_g) V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    WType,
    VType,
}

fn check_pair_dim(g: &FiniteAbelianGroup) -> Result<usize> {
    let n = g.size();
    let d = n * n;
    if d > MAX_DENSE_DIM {
        return Err(Error::CapExceeded { size: d, cap: MAX_DENSE_DIM });
    }
    Ok(n)
}

/// `W` on `l2(G) (x) l2(G)`.
pub fn build_w(g: &FiniteAbelianGroup) -> Result<DenseOperator> {
    let n = check_pair_dim(g)?;
    let mut m = Array2::zeros((n * n, n * n));
    for a in 0..n {
        for b in 0..n {
            m[[g.add(a, b) * n + b, a * n + b]] = ONE;
        }
    }
    DenseOperator::new(LegSpace::new([("u", n), ("v", n)])?, m)
}

/// `V` on `l2(G^) (x) l2(G^)`.
pub fn build_v(g: &FiniteAbelianGroup) -> Result<DenseOperator> {
    let n = check_pair_dim(g)?;
    let mut m = Array2::zeros((n * n, n * n));
    for a in 0..n {
        for b in 0..n {
            m[[a * n + g.add(a, b), a * n + b]] = ONE;
        }
    }
    DenseOperator::new(LegSpace::new([("gamma", n), ("chi", n)])?, m)
}

/// `(F (x) F) W^* (F (x) F)^{-1}`, computed densely from `W`.
pub fn fourier_conjugate_w(g: &FiniteAbelianGroup, w: &DenseOperator) -> Result<DenseOperator> {
    let n = check_pair_dim(g)?;
    if w.dim() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, found: w.dim() });
    }
    let f = DenseOperator::new(LegSpace::single("a", n), g.fourier_matrix())?;
    let ff = f.kron(&f.clone().relabel(LegSpace::single("b", n))?)?;
    let wd = w.dagger().relabel(ff.space().clone())?;
    ff.matmul(&wd)?.matmul(&ff.dagger())?.relabel(LegSpace::new([("gamma", n), ("chi", n)])?)
}

/// `W` and `V` for one group.
#[derive(Debug, Clone)]
pub struct KtOperatorPair {
    pub group: FiniteAbelianGroup,
    pub w: DenseOperator,
    pub v: DenseOperator,
}

impl KtOperatorPair {
    pub fn new(group: FiniteAbelianGroup) -> Result<Self> {
        let w = build_w(&group)?;
        let v = build_v(&group)?;
        Ok(Self { group, w, v })
    }

    /// `||V - (F (x) F) W^* (F (x) F)^{-1}||`.
    pub fn fourier_residual(&self) -> Result<f64> {
        fourier_conjugate_w(&self.group, &self.w)?.distance(&self.v)
    }

    pub fn unitarity_residuals(&self) -> (f64, f64) {
        (self.w.unitarity_residual(), self.v.unitarity_residual())
    }
}

fn three_leg_space(d: usize) -> Result<LegSpace> {
    let dim = d.checked_pow(3).filter(|&x| x <= MAX_CHECK_DIM);
    match dim {
        Some(_) => LegSpace::new([("1", d), ("2", d), ("3", d)]),
        None => Err(Error::CapExceeded { size: d.saturating_pow(3), cap: MAX_CHECK_DIM }),
    }
}

fn square_leg_dim(op: &DenseOperator) -> Result<usize> {
    let dims = op.space().dims();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::Precondition(format!(
            "pentagonal check needs an operator on two legs of equal dimension, got {dims:?}"
        )));
    }
    Ok(dims[0])
}

/// Frobenius norm of `LHS - RHS` of the pentagonal relation on the 3-fold
/// tensor space.
pub fn verify_pentagonal(op: &DenseOperator, orientation: Orientation) -> Result<f64> {
    let d = square_leg_dim(op)?;
    let space = three_leg_space(d)?;
    let at = |a: &str, b: &str| LocalAction::new(op, &[a, b], &space);
    let (o12, o23, o13) = (at("1", "2")?, at("2", "3")?, at("1", "3")?);
    let r = match orientation {
        Orientation::WType => word_residual(space.dim(), &[o12.clone(), o23.clone()], &[o23, o13, o12]),
        Orientation::VType => word_residual(space.dim(), &[o23.clone(), o12.clone()], &[o12, o13, o23]),
    };
    Ok(r)
}

/// Largest residual of the intertwining relation over all group elements
/// (W-type) or all characters (V-type).
pub fn verify_intertwining(op: &DenseOperator, g: &FiniteAbelianGroup, orientation: Orientation) -> Result<f64> {
    let n = g.size();
    if op.space().dims() != [n, n] {
        return Err(Error::DimensionMismatch { expected: n * n, found: op.dim() });
    }
    let space = LegSpace::new([("1", n), ("2", n)])?;
    let core = LocalAction::new(op, &["1", "2"], &space)?;
    let mut worst: f64 = 0.0;
    for s in 0..n {
        let lam = g.translation(s, "t");
        let l1 = LocalAction::new(&lam, &["1"], &space)?;
        let l2 = LocalAction::new(&lam, &["2"], &space)?;
        let r = match orientation {
            Orientation::WType => word_residual(space.dim(), &[core.clone(), l2.clone()], &[l1, l2, core.clone()]),
            Orientation::VType => word_residual(space.dim(), &[core.clone(), l1.clone()], &[l1, l2, core.clone()]),
        };
        worst = worst.max(r);
    }
    Ok(worst)
}

fn coupling_space(rep: &SpectralRepresentation, second: &str) -> Result<LegSpace> {
    let d = rep.system_dim() * rep.group().size();
    if d > MAX_DENSE_DIM {
        return Err(Error::CapExceeded { size: d, cap: MAX_DENSE_DIM });
    }
    LegSpace::new([("sys", rep.system_dim()), (second, rep.group().size())])
}

/// `(U(W) xi)(u) = U_u xi(u)` on `H_M (x) l2(G)`, legs `sys`, `g`.
pub fn build_uw(rep: &SpectralRepresentation) -> Result<DenseOperator> {
    let space = coupling_space(rep, "g")?;
    let (d, n) = (rep.system_dim(), rep.group().size());
    let mut m = Array2::zeros((d * n, d * n));
    for u in 0..n {
        let uu = rep.unitary_at(u);
        for s in 0..d {
            for t in 0..d {
                m[[s * n + u, t * n + u]] = uu.matrix()[[s, t]];
            }
        }
    }
    DenseOperator::new(space, m)
}

/// `U~(V) = sum_chi E(chi) (x) lambda_chi` on `H_M (x) l2(G^)`, legs `sys`,
/// `probe`.
pub fn build_utilde_v(rep: &SpectralRepresentation) -> Result<DenseOperator> {
    let space = coupling_space(rep, "probe")?;
    let (d, n) = (rep.system_dim(), rep.group().size());
    let g = rep.group();
    let mut m = Array2::zeros((d * n, d * n));
    for chi in rep.spectrum() {
        let e = rep.projection_at(chi);
        for b in 0..n {
            let row_probe = g.add(chi, b);
            for s in 0..d {
                for t in 0..d {
                    m[[s * n + row_probe, t * n + b]] += e.matrix()[[s, t]];
                }
            }
        }
    }
    DenseOperator::new(space, m)
}

/// `(id (x) F) U(W)^* (id (x) F)^{-1}`.
pub fn utilde_v_by_conjugation(rep: &SpectralRepresentation) -> Result<DenseOperator> {
    let space = coupling_space(rep, "probe")?;
    let n = rep.group().size();
    let id = DenseOperator::identity(LegSpace::single("sys", rep.system_dim()));
    let f = DenseOperator::new(LegSpace::single("probe", n), rep.group().fourier_matrix())?;
    let idf = id.kron(&f)?;
    let uwd = build_uw(rep)?.dagger().relabel(space)?;
    idf.matmul(&uwd)?.matmul(&idf.dagger())
}

/// Residual of `U(W)12 W23 = W23 U(W)13 U(W)12` on `H_M (x) l2(G) (x) l2(G)`.
pub fn represented_pentagonal_residual(rep: &SpectralRepresentation) -> Result<f64> {
    let (d, n) = (rep.system_dim(), rep.group().size());
    if d * n * n > MAX_CHECK_DIM {
        return Err(Error::CapExceeded { size: d * n * n, cap: MAX_CHECK_DIM });
    }
    let space = LegSpace::new([("sys", d), ("2", n), ("3", n)])?;
    let uw = build_uw(rep)?;
    let w = build_w(rep.group())?;
    let u12 = LocalAction::new(&uw, &["sys", "2"], &space)?;
    let u13 = LocalAction::new(&uw, &["sys", "3"], &space)?;
    let w23 = LocalAction::new(&w, &["2", "3"], &space)?;
    Ok(word_residual(space.dim(), &[u12.clone(), w23.clone()], &[w23, u13, u12]))
}

/// Largest residual over `u` of `U(W)(1 (x) l_u) = (U_u (x) l_u) U(W)`.
pub fn represented_intertwining_residual(rep: &SpectralRepresentation) -> Result<f64> {
    let space = coupling_space(rep, "g")?;
    let uw = build_uw(rep)?;
    let core = LocalAction::new(&uw, &["sys", "g"], &space)?;
    let mut worst: f64 = 0.0;
    for u in 0..rep.group().size() {
        let lam = LocalAction::new(&rep.group().translation(u, "g"), &["g"], &space)?;
        let uu = LocalAction::new(&rep.unitary_at(u), &["sys"], &space)?;
        let r = word_residual(space.dim(), &[core.clone(), lam.clone()], &[uu, lam, core.clone()]);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `pi_alpha(M) = U(W)^* (M (x) 1) U(W)`.
pub fn heisenberg_embed(m: &DenseOperator, rep: &SpectralRepresentation) -> Result<DenseOperator> {
    if m.dim() != rep.system_dim() {
        return Err(Error::DimensionMismatch { expected: rep.system_dim(), found: m.dim() });
    }
    let uw = build_uw(rep)?;
    let lifted = m
        .clone()
        .relabel(LegSpace::single("sys", rep.system_dim()))?
        .kron(&DenseOperator::identity(LegSpace::single("g", rep.group().size())))?;
    uw.dagger().matmul(&lifted)?.matmul(&uw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{apply, StateVector};

    fn z(n: usize) -> FiniteAbelianGroup {
        FiniteAbelianGroup::cyclic(n).unwrap()
    }

    fn image_of_basis(op: &DenseOperator, index: usize) -> usize {
        let out = apply(op, &StateVector::basis(op.space().clone(), index)).unwrap();
        let hits: Vec<usize> =
            out.amplitudes().iter().enumerate().filter(|(_, a)| a.norm() > 0.5).map(|(i, _)| i).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(out.amplitudes()[hits[0]], ONE);
        hits[0]
    }

    #[test]
    fn w_on_z2_basis() {
        let w = build_w(&z(2)).unwrap();
        // (a,b) -> (a+b, b), index 2a+b
        assert_eq!(image_of_basis(&w, 0), 0);
        assert_eq!(image_of_basis(&w, 1), 3);
        assert_eq!(image_of_basis(&w, 2), 2);
        assert_eq!(image_of_basis(&w, 3), 1);
    }

    #[test]
    fn w_fixes_identity_second_slot() {
        let g = FiniteAbelianGroup::new(&[2, 3]).unwrap();
        let n = g.size();
        let w = build_w(&g).unwrap();
        for a in 0..n {
            assert_eq!(image_of_basis(&w, a * n), a * n);
        }
    }

    #[test]
    fn w_on_z3_example() {
        let w = build_w(&z(3)).unwrap();
        // (1,2) -> (0,2)
        assert_eq!(image_of_basis(&w, 3 + 2), 2);
    }

    #[test]
    fn v_copies_into_neutral_slot() {
        let g = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        let n = g.size();
        let v = build_v(&g).unwrap();
        for a in 0..n {
            assert_eq!(image_of_basis(&v, a * n), a * n + a);
            assert_eq!(image_of_basis(&v, a), a);
        }
        let v2 = build_v(&z(2)).unwrap();
        assert_eq!(image_of_basis(&v2, 3), 2);
    }

    #[test]
    fn pentagonal_examples() {
        assert!(verify_pentagonal(&build_w(&z(2)).unwrap(), Orientation::WType).unwrap() <= 1e-12);
        assert!(verify_pentagonal(&build_v(&z(3)).unwrap(), Orientation::VType).unwrap() <= 1e-12);
    }

    #[test]
    fn orientations_are_not_interchangeable() {
        // W written in V-orientation fails for a nontrivial group
        assert!(verify_pentagonal(&build_w(&z(3)).unwrap(), Orientation::VType).unwrap() > 0.1);
        assert!(verify_pentagonal(&build_v(&z(3)).unwrap(), Orientation::WType).unwrap() > 0.1);
    }

    #[test]
    fn intertwining_examples() {
        assert!(verify_intertwining(&build_w(&z(2)).unwrap(), &z(2), Orientation::WType).unwrap() <= 1e-12);
        let k4 = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        assert!(verify_intertwining(&build_v(&k4).unwrap(), &k4, Orientation::VType).unwrap() <= 1e-12);
        let id = DenseOperator::identity(LegSpace::new([("a", 2), ("b", 2)]).unwrap());
        assert!(verify_intertwining(&id, &z(2), Orientation::WType).unwrap() > 0.0);
        let id1 = DenseOperator::identity(LegSpace::new([("a", 1), ("b", 1)]).unwrap());
        assert_eq!(verify_intertwining(&id1, &z(1), Orientation::WType).unwrap(), 0.0);
    }

    #[test]
    fn pentagonal_rejects_bad_shapes() {
        let op = DenseOperator::identity(LegSpace::new([("a", 2), ("b", 3)]).unwrap());
        assert!(matches!(verify_pentagonal(&op, Orientation::WType), Err(Error::Precondition(_))));
        let g = FiniteAbelianGroup::with_cap(&[100], 100).unwrap();
        assert!(matches!(build_w(&g), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn fourier_conjugation_gives_v() {
        for orders in [vec![1], vec![2], vec![3], vec![4], vec![2, 2], vec![6], vec![2, 3]] {
            let pair = KtOperatorPair::new(FiniteAbelianGroup::new(&orders).unwrap()).unwrap();
            assert!(pair.fourier_residual().unwrap() <= 1e-10, "{orders:?}");
            let (uw, uv) = pair.unitarity_residuals();
            assert_eq!((uw, uv), (0.0, 0.0));
        }
    }

    #[test]
    fn trivial_rep_gives_identity_coupling() {
        let rep = SpectralRepresentation::trivial(z(3), 2, 0).unwrap();
        assert_eq!(build_uw(&rep).unwrap().identity_residual(), 0.0);
        // one-term sum: I (x) lambda_chi0
        let rep = SpectralRepresentation::trivial(z(3), 2, 1).unwrap();
        let ut = build_utilde_v(&rep).unwrap();
        let expected = DenseOperator::identity(LegSpace::single("sys", 2))
            .kron(&z(3).regular_representation(&z(3).character(&[1]).unwrap()).unwrap())
            .unwrap();
        assert_eq!(ut.distance(&expected).unwrap(), 0.0);
    }

    #[test]
    fn sigma_z_uw_is_block_diagonal() {
        // U_0 = I, U_1 = E(iota) - E(chi_1) = sigma_z; blocks indexed by the group leg
        let rep = SpectralRepresentation::sigma_z();
        let uw = build_uw(&rep).unwrap();
        let m = uw.matrix();
        let expect = |s: usize, u: usize, t: usize, v: usize| -> Complex64 {
            if u != v || s != t {
                Complex64::new(0.0, 0.0)
            } else if u == 1 && s == 1 {
                Complex64::new(-1.0, 0.0)
            } else {
                ONE
            }
        };
        for s in 0..2 {
            for u in 0..2 {
                for t in 0..2 {
                    for v in 0..2 {
                        assert!((m[[s * 2 + u, t * 2 + v]] - expect(s, u, t, v)).norm() < 1e-15);
                    }
                }
            }
        }
        assert!(represented_pentagonal_residual(&rep).unwrap() <= 1e-12);
        assert!(represented_intertwining_residual(&rep).unwrap() <= 1e-12);
    }

    #[test]
    fn utilde_v_matches_conjugation() {
        for rep in [
            SpectralRepresentation::sigma_z(),
            SpectralRepresentation::clock(3).unwrap(),
            SpectralRepresentation::clock(4).unwrap(),
        ] {
            let direct = build_utilde_v(&rep).unwrap();
            let conj = utilde_v_by_conjugation(&rep).unwrap();
            assert!(direct.distance(&conj).unwrap() <= 1e-10);
            assert!(direct.is_unitary());
            assert!(build_uw(&rep).unwrap().is_unitary());
        }
    }

    #[test]
    fn sigma_z_coupling_moves_probe() {
        let rep = SpectralRepresentation::sigma_z();
        let ut = build_utilde_v(&rep).unwrap();
        // |up> (x) |iota> -> |up> (x) |chi_+>; chi_+ = iota here
        assert_eq!(image_of_basis(&ut, 0), 0);
        // |down> (x) |iota> -> |down> (x) |chi_1>
        assert_eq!(image_of_basis(&ut, 2), 3);
    }

    #[test]
    fn heisenberg_embedding_examples() {
        let rep = SpectralRepresentation::sigma_z();
        let id = DenseOperator::identity(LegSpace::single("sys", 2));
        assert_eq!(heisenberg_embed(&id, &rep).unwrap().identity_residual(), 0.0);
        // sigma_z commutes with every U_u
        let sz = DenseOperator::diagonal(LegSpace::single("sys", 2), &[ONE, -ONE]).unwrap();
        let lifted = sz.kron(&DenseOperator::identity(LegSpace::single("g", 2))).unwrap();
        assert!(heisenberg_embed(&sz, &rep).unwrap().distance(&lifted).unwrap() < 1e-15);
        assert!(heisenberg_embed(&DenseOperator::identity(LegSpace::single("sys", 3)), &rep).is_err());
    }
}

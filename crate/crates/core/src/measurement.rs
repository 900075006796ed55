//! Spectral (SNAG) representations of a finite abelian group, the
//! perfect-correlation coupling, and the projective instrument
//! `I(D|w_xi)(B) = sum_{chi in D} <xi| E(chi) B E(chi) |xi>`.

use std::collections::BTreeSet;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{Character, FiniteAbelianGroup};
use crate::hilbert::{apply, expectation, DenseOperator, LegSpace, StateVector, FLAG_TOL};
use crate::kt::build_utilde_v;

/// Normalization tolerance for input states.
pub const NORM_TOL: f64 = 1e-10;

/// Below this, an outcome is treated as having probability zero and no
/// post-measurement state is produced.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `chi -> E(chi)`: a resolution of the identity on `H_M` by orthogonal
/// projections indexed by the characters of `G`.
///
/// Characters without an assignment carry the zero projection and are not
/// part of [`Self::spectrum`].
#[derive(Debug, Clone)]
pub struct SpectralRepresentation {
    group: FiniteAbelianGroup,
    system_dim: usize,
    projections: Vec<DenseOperator>,
}

impl SpectralRepresentation {
    pub fn new(
        group: FiniteAbelianGroup,
        system_dim: usize,
        assignments: Vec<(Character, DenseOperator)>,
    ) -> Result<Self> {
        if system_dim == 0 {
            return Err(Error::InvalidRepresentation("system dimension must be positive".into()));
        }
        let space = LegSpace::single("sys", system_dim);
        let mut projections = vec![DenseOperator::zeros(space.clone()); group.size()];
        let mut seen = BTreeSet::new();
        for (chi, e) in assignments {
            if !group.contains_character(&chi) {
                return Err(Error::InvalidRepresentation(format!("character {:?} is not in {group}", chi.exponents())));
            }
            if !seen.insert(chi.index()) {
                return Err(Error::InvalidRepresentation(format!("character {:?} assigned twice", chi.exponents())));
            }
            if e.dim() != system_dim {
                return Err(Error::DimensionMismatch { expected: system_dim, found: e.dim() });
            }
            if !e.is_projection() {
                return Err(Error::InvalidRepresentation(format!(
                    "E({:?}) is not an orthogonal projection (idempotency {:.3e}, hermiticity {:.3e})",
                    chi.exponents(),
                    e.idempotency_residual(),
                    e.hermiticity_residual()
                )));
            }
            projections[chi.index()] = e.relabel(space.clone())?;
        }
        let rep = Self { group, system_dim, projections };
        rep.validate_family()?;
        Ok(rep)
    }

    fn validate_family(&self) -> Result<()> {
        let spec = self.spectrum();
        for (i, &a) in spec.iter().enumerate() {
            for &b in &spec[i + 1..] {
                let overlap = self.projections[a].matmul(&self.projections[b])?.frobenius_norm();
                if overlap > FLAG_TOL {
                    return Err(Error::InvalidRepresentation(format!(
                        "E({a}) and E({b}) are not orthogonal (||E E'|| = {overlap:.3e})"
                    )));
                }
            }
        }
        let sum = self.projections.iter().try_fold(DenseOperator::zeros(self.system_space()), |acc, e| acc.add(e))?;
        let defect = sum.identity_residual();
        if defect > FLAG_TOL {
            return Err(Error::InvalidRepresentation(format!(
                "projections do not sum to the identity (defect {defect:.3e})"
            )));
        }
        Ok(())
    }

    /// `sigma_z` on `C^2` over `Z_2`: `E(iota) = |up><up|`, `E(chi_1) = |down><down|`,
    /// so that `U_1 = sigma_z`.
    pub fn sigma_z() -> Self {
        Self::clock(2).expect("Z_2 clock representation is valid")
    }

    /// The clock representation of `Z_n` on `C^n`: `E(chi_k) = |k><k|`.
    pub fn clock(n: usize) -> Result<Self> {
        let group = FiniteAbelianGroup::cyclic(n)?;
        let assignments = (0..n)
            .map(|k| {
                let p = DenseOperator::from_fn(
                    LegSpace::single("sys", n),
                    |i, j| if i == k && j == k { ONE } else { ZERO },
                );
                (group.character_at(k), p)
            })
            .collect();
        Self::new(group, n, assignments)
    }

    /// `E(chi_0) = I`, everything else zero.
    pub fn trivial(group: FiniteAbelianGroup, system_dim: usize, chi0: usize) -> Result<Self> {
        if chi0 >= group.size() {
            return Err(Error::InvalidRepresentation(format!("character index {chi0} out of range")));
        }
        let chi = group.character_at(chi0);
        Self::new(group, system_dim, vec![(chi, DenseOperator::identity(LegSpace::single("sys", system_dim)))])
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn system_space(&self) -> LegSpace {
        LegSpace::single("sys", self.system_dim)
    }

    pub fn projection(&self, chi: &Character) -> Result<&DenseOperator> {
        if !self.group.contains_character(chi) {
            return Err(Error::GroupMismatch {
                orders: self.group.orders().to_vec(),
                coords: chi.exponents().to_vec(),
            });
        }
        Ok(&self.projections[chi.index()])
    }

    pub fn projection_at(&self, chi_index: usize) -> &DenseOperator {
        &self.projections[chi_index]
    }

    /// `Spec(A)`: indices of the characters with a nonzero projection.
    pub fn spectrum(&self) -> Vec<usize> {
        (0..self.group.size()).filter(|&k| self.projections[k].frobenius_norm() > FLAG_TOL).collect()
    }

    /// `U_u = sum_chi conj(chi(u)) E(chi)`.
    pub fn unitary_at(&self, u_index: usize) -> DenseOperator {
        let mut m = Array2::zeros((self.system_dim, self.system_dim));
        for chi in self.spectrum() {
            let phase = self.group.char_value_at(chi, u_index).conj();
            m.scaled_add(phase, self.projections[chi].matrix());
        }
        DenseOperator::new(self.system_space(), m).expect("system-sized matrix")
    }

    /// Largest of `||U_{a+b} - U_a U_b||` over all pairs and `||U_e - I||`.
    pub fn homomorphism_residual(&self) -> f64 {
        let n = self.group.size();
        let us: Vec<DenseOperator> = (0..n).map(|u| self.unitary_at(u)).collect();
        let mut worst = us[0].identity_residual();
        for a in 0..n {
            for b in 0..n {
                let prod = us[a].matmul(&us[b]).expect("same space");
                worst = worst.max(prod.distance(&us[self.group.add(a, b)]).expect("same space"));
            }
        }
        worst
    }

    /// `xi = sum_chi c_chi xi_chi` with `c_chi = ||E(chi) xi||` and
    /// `xi_chi = E(chi) xi / c_chi`. Sectors with `c_chi = 0` are omitted.
    pub fn sector_decomposition(&self, xi: &StateVector) -> Result<Vec<Sector>> {
        self.check_system_vector(xi)?;
        let mut out = Vec::new();
        for chi in self.spectrum() {
            let part = apply(&self.projections[chi], xi)?;
            let c = part.norm();
            if c > 0.0 {
                out.push(Sector { character: chi, weight: c, state: part.normalized()? });
            }
        }
        Ok(out)
    }

    pub(crate) fn check_system_vector(&self, xi: &StateVector) -> Result<()> {
        if xi.amplitudes().len() != self.system_dim {
            return Err(Error::DimensionMismatch { expected: self.system_dim, found: xi.amplitudes().len() });
        }
        Ok(())
    }

    pub(crate) fn check_system_operator(&self, b: &DenseOperator) -> Result<()> {
        if b.dim() != self.system_dim {
            return Err(Error::DimensionMismatch { expected: self.system_dim, found: b.dim() });
        }
        Ok(())
    }
}

/// One term `c_chi xi_chi` of a state's expansion over the spectrum.
#[derive(Debug, Clone)]
pub struct Sector {
    pub character: usize,
    pub weight: f64,
    pub state: StateVector,
}

/// A set `D` of characters (the read-out set).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Outcome {
    characters: BTreeSet<usize>,
}

impl Outcome {
    pub fn new(group: &FiniteAbelianGroup, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&k| k >= group.size()) {
            return Err(Error::GroupMismatch { orders: group.orders().to_vec(), coords: vec![bad] });
        }
        Ok(Self { characters: indices.iter().copied().collect() })
    }

    pub fn from_characters(group: &FiniteAbelianGroup, chars: &[Character]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for chi in chars {
            if !group.contains_character(chi) {
                return Err(Error::GroupMismatch { orders: group.orders().to_vec(), coords: chi.exponents().to_vec() });
            }
            set.insert(chi.index());
        }
        Ok(Self { characters: set })
    }

    pub fn empty() -> Self {
        Self { characters: BTreeSet::new() }
    }

    /// `D = Spec(A)`.
    pub fn spectrum(rep: &SpectralRepresentation) -> Self {
        Self { characters: rep.spectrum().into_iter().collect() }
    }

    pub fn contains(&self, chi: usize) -> bool {
        self.characters.contains(&chi)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.characters.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    /// Indicator `chi_D` as a diagonal operator on `l2(G^)`.
    pub fn indicator(&self, group: &FiniteAbelianGroup, label: &str) -> DenseOperator {
        let diag: Vec<Complex64> = (0..group.size()).map(|k| if self.contains(k) { ONE } else { ZERO }).collect();
        DenseOperator::diagonal(LegSpace::single(label, group.size()), &diag).expect("group-sized diagonal")
    }

    pub fn union(&self, other: &Outcome) -> Outcome {
        Outcome { characters: self.characters.union(&other.characters).copied().collect() }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.characters.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", parts.join(";"))
    }
}

#[derive(Debug, Clone)]
pub struct InstrumentResult {
    /// `p(D|w) = I(D|w)(1)`.
    pub probability: f64,
    /// `I(D|w)(B)`.
    pub conditional_expectation: Complex64,
    /// `I(D|w) / p(D|w)` as a density operator; absent for zero-probability
    /// outcomes.
    pub post_state: Option<DenseOperator>,
}

fn check_normalized(xi: &StateVector) -> Result<()> {
    let n = xi.norm();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// `U~(V) (xi (x) |probe_init>)`, legs `sys`, `probe`.
pub fn couple(rep: &SpectralRepresentation, xi: &StateVector, probe_init: &Character) -> Result<StateVector> {
    rep.check_system_vector(xi)?;
    check_normalized(xi)?;
    let g = rep.group();
    if !g.contains_character(probe_init) {
        return Err(Error::GroupMismatch { orders: g.orders().to_vec(), coords: probe_init.exponents().to_vec() });
    }
    let probe = StateVector::basis(LegSpace::single("probe", g.size()), probe_init.index());
    let start = StateVector::new(rep.system_space(), xi.amplitudes().clone())?.tensor(&probe)?;
    apply(&build_utilde_v(rep)?, &start)
}

/// The projective instrument on a vector state.
pub fn instrument(
    rep: &SpectralRepresentation,
    delta: &Outcome,
    xi: &StateVector,
    b: &DenseOperator,
) -> Result<InstrumentResult> {
    rep.check_system_vector(xi)?;
    rep.check_system_operator(b)?;
    check_normalized(xi)?;
    let xi = StateVector::new(rep.system_space(), xi.amplitudes().clone())?;
    let b = b.clone().relabel(rep.system_space())?;
    let mut probability = 0.0;
    let mut value = ZERO;
    let mut rho = DenseOperator::zeros(rep.system_space());
    for chi in delta.iter().filter(|&k| k < rep.group().size()) {
        let part = apply(rep.projection_at(chi), &xi)?;
        probability += part.norm().powi(2);
        value += expectation(&part, &b)?;
        rho = rho.add(&part.projector())?;
    }
    let post_state = (probability > PROBABILITY_FLOOR).then(|| rho.scale(Complex64::new(probability.recip(), 0.0)));
    Ok(InstrumentResult { probability, conditional_expectation: value, post_state })
}

/// The projective instrument on a density operator:
/// `I(D|rho)(B) = sum_{chi in D} Tr(rho E B E)`.
pub fn instrument_density(
    rep: &SpectralRepresentation,
    delta: &Outcome,
    rho: &DenseOperator,
    b: &DenseOperator,
) -> Result<InstrumentResult> {
    rep.check_system_operator(rho)?;
    rep.check_system_operator(b)?;
    let rho = rho.clone().relabel(rep.system_space())?;
    let b = b.clone().relabel(rep.system_space())?;
    let mut probability = 0.0;
    let mut value = ZERO;
    let mut post = DenseOperator::zeros(rep.system_space());
    for chi in delta.iter().filter(|&k| k < rep.group().size()) {
        let e = rep.projection_at(chi);
        let ere = e.matmul(&rho)?.matmul(e)?;
        probability += ere.trace().re;
        value += ere.matmul(&b)?.trace();
        post = post.add(&ere)?;
    }
    let post_state = (probability > PROBABILITY_FLOOR).then(|| post.scale(Complex64::new(probability.recip(), 0.0)));
    Ok(InstrumentResult { probability, conditional_expectation: value, post_state })
}

/// `(<xi| (x) <iota|) U~(V)^* (B (x) chi_D) U~(V) (|xi> (x) |iota>)`, computed
/// with the explicit coupling operator.
pub fn coupled_expectation(
    rep: &SpectralRepresentation,
    delta: &Outcome,
    xi: &StateVector,
    b: &DenseOperator,
) -> Result<Complex64> {
    rep.check_system_operator(b)?;
    let coupled = couple(rep, xi, &rep.group().trivial_character())?;
    let observable = b.clone().relabel(rep.system_space())?.kron(&delta.indicator(rep.group(), "probe"))?;
    expectation(&coupled, &observable)
}

/// `|coupled_expectation - instrument|`.
pub fn verify_instrument_equals_coupled_expectation(
    rep: &SpectralRepresentation,
    delta: &Outcome,
    xi: &StateVector,
    b: &DenseOperator,
) -> Result<f64> {
    let direct = instrument(rep, delta, xi, b)?.conditional_expectation;
    let coupled = coupled_expectation(rep, delta, xi, b)?;
    Ok((direct - coupled).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubit(a: Complex64, b: Complex64) -> StateVector {
        StateVector::from_vec(LegSpace::single("sys", 2), vec![a, b]).unwrap()
    }

    fn identity(d: usize) -> DenseOperator {
        DenseOperator::identity(LegSpace::single("sys", d))
    }

    #[test]
    fn sigma_z_rep_is_valid() {
        let rep = SpectralRepresentation::sigma_z();
        assert_eq!(rep.spectrum(), vec![0, 1]);
        let sz = DenseOperator::diagonal(LegSpace::single("sys", 2), &[c(1.0), c(-1.0)]).unwrap();
        assert_eq!(rep.unitary_at(1).distance(&sz).unwrap(), 0.0);
        assert_eq!(rep.unitary_at(0).identity_residual(), 0.0);
        assert!(rep.homomorphism_residual() < 1e-12);
        assert!(SpectralRepresentation::clock(5).unwrap().homomorphism_residual() < 1e-12);
    }

    #[test]
    fn trivial_rep_is_valid() {
        let rep = SpectralRepresentation::trivial(FiniteAbelianGroup::cyclic(2).unwrap(), 3, 0).unwrap();
        assert_eq!(rep.spectrum(), vec![0]);
        assert!(rep.homomorphism_residual() == 0.0);
    }

    #[test]
    fn overlapping_projections_rejected() {
        let g = FiniteAbelianGroup::cyclic(2).unwrap();
        let h = 0.5;
        let plus = DenseOperator::from_fn(LegSpace::single("sys", 2), |_, _| c(h));
        let up = DenseOperator::diagonal(LegSpace::single("sys", 2), &[c(1.0), c(0.0)]).unwrap();
        let err =
            SpectralRepresentation::new(g.clone(), 2, vec![(g.character_at(0), up.clone()), (g.character_at(1), plus)]);
        assert!(matches!(err, Err(Error::InvalidRepresentation(_))));
    }

    #[test]
    fn incomplete_and_non_projection_rejected() {
        let g = FiniteAbelianGroup::cyclic(2).unwrap();
        let up = DenseOperator::diagonal(LegSpace::single("sys", 2), &[c(1.0), c(0.0)]).unwrap();
        assert!(matches!(
            SpectralRepresentation::new(g.clone(), 2, vec![(g.character_at(0), up.clone())]),
            Err(Error::InvalidRepresentation(_))
        ));
        let half = DenseOperator::diagonal(LegSpace::single("sys", 2), &[c(0.5), c(1.0)]).unwrap();
        assert!(matches!(
            SpectralRepresentation::new(g.clone(), 2, vec![(g.character_at(0), half)]),
            Err(Error::InvalidRepresentation(_))
        ));
        assert!(matches!(
            SpectralRepresentation::new(g.clone(), 2, vec![(g.character_at(0), up.clone()), (g.character_at(0), up)]),
            Err(Error::InvalidRepresentation(_))
        ));
    }

    #[test]
    fn couple_examples() {
        let rep = SpectralRepresentation::sigma_z();
        let iota = rep.group().trivial_character();
        // |up> -> |up> (x) |chi_+> with chi_+ = iota (index 0)
        let out = couple(&rep, &qubit(c(1.0), c(0.0)), &iota).unwrap();
        assert_eq!(out.amplitudes()[0], c(1.0));
        assert!((out.norm() - 1.0).abs() < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let out = couple(&rep, &qubit(c(h), c(h)), &iota).unwrap();
        // (|up>|0> + |down>|1>)/sqrt 2 -> indices 0 and 3
        let amps = out.amplitudes();
        assert!((amps[0] - c(h)).norm() < 1e-15 && (amps[3] - c(h)).norm() < 1e-15);
        assert!(amps[1].norm() < 1e-15 && amps[2].norm() < 1e-15);

        let triv = SpectralRepresentation::trivial(FiniteAbelianGroup::cyclic(3).unwrap(), 2, 2).unwrap();
        let out = couple(&triv, &qubit(c(0.6), c(0.8)), &triv.group().trivial_character()).unwrap();
        let expect = qubit(c(0.6), c(0.8)).tensor(&StateVector::basis(LegSpace::single("probe", 3), 2)).unwrap();
        assert!(out.distance(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn couple_rejects_unnormalized() {
        let rep = SpectralRepresentation::sigma_z();
        let err = couple(&rep, &qubit(c(1.0), c(1.0)), &rep.group().trivial_character());
        assert!(matches!(err, Err(Error::NotNormalized(_))));
    }

    #[test]
    fn instrument_examples() {
        let rep = SpectralRepresentation::sigma_z();
        let (cp, cm) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let xi = qubit(cp, cm);
        let plus = Outcome::new(rep.group(), &[0]).unwrap();
        let r = instrument(&rep, &plus, &xi, &identity(2)).unwrap();
        assert!((r.probability - 0.36).abs() < 1e-15);
        assert!((r.conditional_expectation - c(0.36)).norm() < 1e-15);

        let all = Outcome::spectrum(&rep);
        assert!((instrument(&rep, &all, &xi, &identity(2)).unwrap().probability - 1.0).abs() < 1e-15);

        let xi = qubit(c(1.0 / 3f64.sqrt()), c(2f64.sqrt() / 3f64.sqrt()));
        let r = instrument(&rep, &plus, &xi, &identity(2)).unwrap();
        assert!((r.probability - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_probability_outcome_has_no_post_state() {
        let rep = SpectralRepresentation::sigma_z();
        let r =
            instrument(&rep, &Outcome::new(rep.group(), &[1]).unwrap(), &qubit(c(1.0), c(0.0)), &identity(2)).unwrap();
        assert_eq!(r.probability, 0.0);
        assert!(r.post_state.is_none());
    }

    #[test]
    fn post_state_is_a_density_operator() {
        let rep = SpectralRepresentation::clock(3).unwrap();
        let xi =
            StateVector::from_vec(LegSpace::single("sys", 3), vec![c(0.6), c(0.0), Complex64::new(0.0, 0.8)]).unwrap();
        let r = instrument(&rep, &Outcome::new(rep.group(), &[0, 2]).unwrap(), &xi, &identity(3)).unwrap();
        let rho = r.post_state.unwrap();
        assert!((rho.trace() - c(1.0)).norm() < 1e-15);
        assert!(rho.is_hermitian());
        // mixture diag(0.36, 0, 0.64)
        assert!((rho.matrix()[[0, 0]] - c(0.36)).norm() < 1e-15);
        assert!(rho.matrix()[[0, 2]].norm() < 1e-15);
    }

    #[test]
    fn coupled_expectation_empty_and_trivial() {
        let rep = SpectralRepresentation::sigma_z();
        let xi = qubit(c(0.6), c(0.8));
        let empty = Outcome::empty();
        assert_eq!(coupled_expectation(&rep, &empty, &xi, &identity(2)).unwrap(), ZERO);
        assert_eq!(instrument(&rep, &empty, &xi, &identity(2)).unwrap().conditional_expectation, ZERO);

        let triv = SpectralRepresentation::trivial(FiniteAbelianGroup::cyclic(2).unwrap(), 2, 1).unwrap();
        let b = DenseOperator::from_fn(LegSpace::single("sys", 2), |i, j| c((i + 2 * j) as f64));
        let plain = expectation(&xi, &b).unwrap();
        for (set, factor) in [(vec![1], 1.0), (vec![0], 0.0)] {
            let d = Outcome::new(triv.group(), &set).unwrap();
            let v = coupled_expectation(&triv, &d, &xi, &b).unwrap();
            assert!((v - plain * factor).norm() < 1e-14);
            assert!(verify_instrument_equals_coupled_expectation(&triv, &d, &xi, &b).unwrap() < 1e-14);
        }
    }

    #[test]
    fn density_instrument_agrees_with_vector_instrument() {
        let rep = SpectralRepresentation::clock(3).unwrap();
        let xi = StateVector::from_vec(LegSpace::single("sys", 3), vec![c(0.6), Complex64::new(0.0, 0.48), c(0.64)])
            .unwrap();
        let b = DenseOperator::from_fn(LegSpace::single("sys", 3), |i, j| {
            Complex64::new((i * j) as f64, i as f64 - j as f64)
        });
        let d = Outcome::new(rep.group(), &[1, 2]).unwrap();
        let v = instrument(&rep, &d, &xi, &b).unwrap();
        let r = instrument_density(&rep, &d, &xi.projector(), &b).unwrap();
        assert!((v.probability - r.probability).abs() < 1e-15);
        assert!((v.conditional_expectation - r.conditional_expectation).norm() < 1e-14);
    }

    #[test]
    fn outcome_validation_and_display() {
        let g = FiniteAbelianGroup::cyclic(2).unwrap();
        assert!(Outcome::new(&g, &[2]).is_err());
        let d = Outcome::new(&g, &[1, 0]).unwrap();
        assert_eq!(d.to_string(), "{0;1}");
        assert_eq!(Outcome::empty().to_string(), "{}");
    }
}

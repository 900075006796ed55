//! The amplification cascade `U_N = V_{N,N+1} ... V_23 U~(V)_12`, which
//! copies the probe label onto `N` pointer legs, and the quantities built on
//! it: the amplified instrument, the intertwiner chain, and the
//! Heisenberg-picture map `T_N`.
//!
//! Leg layout is `sys, p1, ..., pN` with the system leg most significant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{Character, FiniteAbelianGroup};
use crate::hilbert::{expectation, word_residual, DenseOperator, LegSpace, LocalAction, StateVector, MAX_DENSE_DIM};
use crate::kt::{build_utilde_v, build_v, MAX_CHECK_DIM};
use crate::measurement::{instrument, InstrumentResult, Outcome, SpectralRepresentation, NORM_TOL, PROBABILITY_FLOOR};

/// Probe count from which a pointer is reported as macroscopic. Nothing
/// numerical depends on it.
pub const N_MACRO: usize = 8;

pub const DEFAULT_LAZY_THRESHOLD: usize = 6;

/// Largest cascade state, in amplitudes, that [`cascade_apply`] will allocate.
pub const DEFAULT_AMPLITUDE_BUDGET: usize = 1 << 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct CascadeConfig {
    pub rep: SpectralRepresentation,
    pub probes: usize,
    /// Above this many legs (system included) the cascade is never
    /// materialized as a matrix.
    pub lazy_threshold: usize,
    pub amplitude_budget: usize,
}

impl CascadeConfig {
    pub fn new(rep: SpectralRepresentation, probes: usize) -> Result<Self> {
        let cfg =
            Self { rep, probes, lazy_threshold: DEFAULT_LAZY_THRESHOLD, amplitude_budget: DEFAULT_AMPLITUDE_BUDGET };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_budget(mut self, amplitude_budget: usize) -> Result<Self> {
        self.amplitude_budget = amplitude_budget;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lazy_threshold(mut self, legs: usize) -> Self {
        self.lazy_threshold = legs;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.probes == 0 {
            return Err(Error::Precondition("the cascade needs at least one probe".into()));
        }
        self.dim().map(|_| ())
    }

    pub fn is_macroscopic(&self) -> bool {
        self.probes >= N_MACRO
    }

    /// `system_dim * |G|^N`, checked against the amplitude budget.
    pub fn dim(&self) -> Result<usize> {
        let n = self.rep.group().size();
        let needed = u32::try_from(self.probes)
            .ok()
            .and_then(|p| n.checked_pow(p))
            .and_then(|x| x.checked_mul(self.rep.system_dim()));
        match needed {
            Some(d) if d <= self.amplitude_budget => Ok(d),
            Some(d) => Err(Error::MemoryBudget { needed: d, budget: self.amplitude_budget }),
            None => Err(Error::MemoryBudget { needed: usize::MAX, budget: self.amplitude_budget }),
        }
    }

    pub fn space(&self) -> Result<LegSpace> {
        let n = self.rep.group().size();
        let mut legs = vec![("sys".to_string(), self.rep.system_dim())];
        legs.extend((1..=self.probes).map(|k| (format!("p{k}"), n)));
        LegSpace::new(legs)
    }

    /// The stages of `U_N` in formula order (leftmost first).
    fn stages(&self, space: &LegSpace) -> Result<Vec<LocalAction>> {
        let v = build_v(self.rep.group())?;
        let mut word = Vec::with_capacity(self.probes);
        for k in (1..self.probes).rev() {
            let (a, b) = (format!("p{k}"), format!("p{}", k + 1));
            word.push(LocalAction::new(&v, &[&a, &b], space)?);
        }
        word.push(LocalAction::new(&build_utilde_v(&self.rep)?, &["sys", "p1"], space)?);
        Ok(word)
    }

    /// The stages of `U_N^*` in formula order.
    fn inverse_stages(&self, space: &LegSpace) -> Result<Vec<LocalAction>> {
        let vd = build_v(self.rep.group())?.dagger();
        let mut word = vec![LocalAction::new(&build_utilde_v(&self.rep)?.dagger(), &["sys", "p1"], space)?];
        for k in 1..self.probes {
            let (a, b) = (format!("p{k}"), format!("p{}", k + 1));
            word.push(LocalAction::new(&vd, &[&a, &b], space)?);
        }
        Ok(word)
    }
}

fn run_word(word: &[LocalAction], state: &mut StateVector) {
    let amps = state.amplitudes_mut().as_slice_mut().expect("contiguous amplitudes");
    for stage in word.iter().rev() {
        stage.apply_dense(amps);
    }
}

fn lift_to_cascade(cfg: &CascadeConfig, xi: &StateVector) -> Result<StateVector> {
    cfg.rep.check_system_vector(xi)?;
    let n = xi.norm();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    let space = cfg.space()?;
    let stride = cfg.dim()? / cfg.rep.system_dim();
    let mut out = StateVector::zeros(space);
    for (s, &a) in xi.amplitudes().iter().enumerate() {
        out.amplitudes_mut()[s * stride] = a;
    }
    Ok(out)
}

/// `xi (x) |iota>^N`.
pub fn cascade_input(cfg: &CascadeConfig, xi: &StateVector) -> Result<StateVector> {
    lift_to_cascade(cfg, xi)
}

/// `U_N (xi (x) |iota>^N)`, one stage at a time.
pub fn cascade_apply(cfg: &CascadeConfig, xi: &StateVector) -> Result<StateVector> {
    let mut state = lift_to_cascade(cfg, xi)?;
    let word = cfg.stages(state.space())?;
    run_word(&word, &mut state);
    Ok(state)
}

/// `U_N^* psi` for a state on the cascade space.
pub fn cascade_inverse(cfg: &CascadeConfig, psi: &StateVector) -> Result<StateVector> {
    let space = cfg.space()?;
    if psi.amplitudes().len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: psi.amplitudes().len() });
    }
    let mut state = StateVector::new(space, psi.amplitudes().clone())?;
    let word = cfg.inverse_stages(state.space())?;
    run_word(&word, &mut state);
    Ok(state)
}

/// `U_N` as a matrix. Refused once the leg count passes the lazy threshold.
pub fn cascade_matrix(cfg: &CascadeConfig) -> Result<DenseOperator> {
    let legs = cfg.probes + 1;
    if legs > cfg.lazy_threshold {
        return Err(Error::Precondition(format!(
            "{legs} legs exceeds the lazy threshold {}; apply the cascade stage-wise instead",
            cfg.lazy_threshold
        )));
    }
    let space = cfg.space()?;
    if space.dim() > MAX_DENSE_DIM {
        return Err(Error::CapExceeded { size: space.dim(), cap: MAX_DENSE_DIM });
    }
    crate::hilbert::word_matrix(&space, &cfg.stages(&space)?)
}

/// `I^_N(D|w_xi)(B)`: the expectation of `B (x) chi_D^(x)N` in the cascade
/// output, with the post-measurement system state obtained by tracing out the
/// probes on the event.
pub fn amplified_instrument(
    cfg: &CascadeConfig,
    delta: &Outcome,
    xi: &StateVector,
    b: &DenseOperator,
) -> Result<InstrumentResult> {
    cfg.rep.check_system_operator(b)?;
    let psi = cascade_apply(cfg, xi)?;
    let d = cfg.rep.system_dim();
    let stride = psi.amplitudes().len() / d;
    let n = cfg.rep.group().size();
    let sys = cfg.rep.system_space();
    let b = b.clone().relabel(sys.clone())?;

    let mut probability = 0.0;
    let mut value = ZERO;
    let mut post = DenseOperator::zeros(sys.clone());
    for p in 0..stride {
        if !probe_word_in(p, n, cfg.probes, delta) {
            continue;
        }
        let slice: Vec<Complex64> = (0..d).map(|s| psi.amplitudes()[s * stride + p]).collect();
        if slice.iter().all(|z| *z == ZERO) {
            continue;
        }
        let v = StateVector::from_vec(sys.clone(), slice)?;
        probability += v.norm().powi(2);
        value += expectation(&v, &b)?;
        post = post.add(&v.projector())?;
    }
    let post_state = (probability > PROBABILITY_FLOOR).then(|| post.scale(Complex64::new(probability.recip(), 0.0)));
    Ok(InstrumentResult { probability, conditional_expectation: value, post_state })
}

fn probe_word_in(mut p: usize, n: usize, probes: usize, delta: &Outcome) -> bool {
    for _ in 0..probes {
        if !delta.contains(p % n) {
            return false;
        }
        p /= n;
    }
    true
}

/// `|I(D|w)(B) - I^_N(D|w)(B)|`, maxed with the gap in probabilities.
pub fn check_instrument_equality(
    cfg: &CascadeConfig,
    delta: &Outcome,
    xi: &StateVector,
    b: &DenseOperator,
) -> Result<f64> {
    let direct = instrument(&cfg.rep, delta, xi, b)?;
    let amplified = amplified_instrument(cfg, delta, xi, b)?;
    Ok((direct.conditional_expectation - amplified.conditional_expectation)
        .norm()
        .max((direct.probability - amplified.probability).abs()))
}

/// Residual of `V_{N,N+1} ... V_12 (l_g (x) 1^N) = l_g^(x)(N+1) V_{N,N+1} ... V_12`
/// on `N + 1` copies of `l2(G^)`.
pub fn intertwiner_chain_check(g: &FiniteAbelianGroup, gamma: &Character, probes: usize) -> Result<f64> {
    if !g.contains_character(gamma) {
        return Err(Error::GroupMismatch { orders: g.orders().to_vec(), coords: gamma.exponents().to_vec() });
    }
    if probes == 0 {
        return Err(Error::Precondition("the chain needs at least one probe".into()));
    }
    let n = g.size();
    let legs = probes + 1;
    let dim = u32::try_from(legs).ok().and_then(|l| n.checked_pow(l)).filter(|&d| d <= MAX_CHECK_DIM);
    let Some(dim) = dim else {
        return Err(Error::MemoryBudget { needed: n.saturating_pow(legs as u32), budget: MAX_CHECK_DIM });
    };
    let labels: Vec<String> = (1..=legs).map(|k| k.to_string()).collect();
    let space = LegSpace::new(labels.iter().map(|l| (l.clone(), n)))?;
    let v = build_v(g)?;
    let lam = g.regular_representation(gamma)?;

    let chain: Vec<LocalAction> = (0..probes)
        .rev()
        .map(|k| LocalAction::new(&v, &[&labels[k], &labels[k + 1]], &space))
        .collect::<Result<_>>()?;
    let mut lhs = chain.clone();
    lhs.push(LocalAction::new(&lam, &[&labels[0]], &space)?);
    let mut rhs = labels.iter().map(|l| LocalAction::new(&lam, &[l], &space)).collect::<Result<Vec<_>>>()?;
    rhs.extend(chain);
    Ok(word_residual(dim, &lhs, &rhs))
}

/// `T_N(A (x) f_1 (x) ... (x) f_N) = U_N^* (A (x) f_1 (x) ... ) U_N`. Every
/// `f_k` must be diagonal in the character basis.
pub fn heisenberg_t(cfg: &CascadeConfig, a: &DenseOperator, f: &[DenseOperator]) -> Result<DenseOperator> {
    cfg.rep.check_system_operator(a)?;
    if f.len() != cfg.probes {
        return Err(Error::DimensionMismatch { expected: cfg.probes, found: f.len() });
    }
    let n = cfg.rep.group().size();
    for (k, fk) in f.iter().enumerate() {
        if fk.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: fk.dim() });
        }
        if fk.off_diagonal_max() > 0.0 {
            return Err(Error::NotDiagonal(k + 1));
        }
    }
    let space = cfg.space()?;
    if space.dim() > MAX_DENSE_DIM {
        return Err(Error::CapExceeded { size: space.dim(), cap: MAX_DENSE_DIM });
    }
    let mut obs = a.clone().relabel(cfg.rep.system_space())?;
    for (k, fk) in f.iter().enumerate() {
        obs = obs.kron(&fk.clone().relabel(LegSpace::single(&format!("p{}", k + 1), n))?)?;
    }
    let obs = obs.relabel(space.clone())?;
    let u = crate::hilbert::word_matrix(&space, &cfg.stages(&space)?)?;
    u.dagger().matmul(&obs)?.matmul(&u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::couple;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubit(a: Complex64, b: Complex64) -> StateVector {
        StateVector::from_vec(LegSpace::single("sys", 2), vec![a, b]).unwrap()
    }

    #[test]
    fn up_copies_into_every_probe() {
        let cfg = CascadeConfig::new(SpectralRepresentation::sigma_z(), 3).unwrap();
        let out = cascade_apply(&cfg, &qubit(c(1.0), c(0.0))).unwrap();
        // |up> |0>|0>|0>
        assert_eq!(out.amplitudes()[0], c(1.0));
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_probe_matches_couple() {
        let rep = SpectralRepresentation::clock(3).unwrap();
        let xi = StateVector::from_vec(LegSpace::single("sys", 3), vec![c(0.6), Complex64::new(0.0, 0.48), c(0.64)])
            .unwrap();
        let cfg = CascadeConfig::new(rep.clone(), 1).unwrap();
        let a = cascade_apply(&cfg, &xi).unwrap();
        let b = couple(&rep, &xi, &rep.group().trivial_character()).unwrap();
        let diff: f64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).sum();
        assert!(diff < 1e-15);
    }

    #[test]
    fn superposition_gives_ghz_form() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let cfg = CascadeConfig::new(SpectralRepresentation::sigma_z(), 2).unwrap();
        let out = cascade_apply(&cfg, &qubit(c(h), c(h))).unwrap();
        // index = s*4 + p1*2 + p2: |up,0,0> = 0, |down,1,1> = 7
        for (k, z) in out.amplitudes().iter().enumerate() {
            let want = if k == 0 || k == 7 { h } else { 0.0 };
            assert!((z - c(want)).norm() < 1e-15, "amplitude {k}");
        }
        let m = cascade_matrix(&cfg).unwrap();
        let dense = crate::hilbert::apply(&m, &cascade_input(&cfg, &qubit(c(h), c(h))).unwrap()).unwrap();
        assert!(dense.distance(&out).unwrap() < 1e-15);
    }

    #[test]
    fn inverse_restores_input() {
        let cfg = CascadeConfig::new(SpectralRepresentation::clock(3).unwrap(), 3).unwrap();
        let xi = StateVector::from_vec(LegSpace::single("sys", 3), vec![c(0.6), Complex64::new(0.0, 0.48), c(0.64)])
            .unwrap();
        let back = cascade_inverse(&cfg, &cascade_apply(&cfg, &xi).unwrap()).unwrap();
        assert!(back.distance(&cascade_input(&cfg, &xi).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn probability_is_independent_of_n() {
        let rep = SpectralRepresentation::sigma_z();
        let xi = qubit(c(0.6), Complex64::new(0.0, 0.8));
        let id = DenseOperator::identity(LegSpace::single("sys", 2));
        for n in 1..=6 {
            let cfg = CascadeConfig::new(rep.clone(), n).unwrap();
            let plus = Outcome::new(rep.group(), &[0]).unwrap();
            let r = amplified_instrument(&cfg, &plus, &xi, &id).unwrap();
            assert!((r.probability - 0.36).abs() < 1e-14);
            let all = Outcome::spectrum(&rep);
            assert!((amplified_instrument(&cfg, &all, &xi, &id).unwrap().probability - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn budget_and_threshold_are_enforced() {
        let rep = SpectralRepresentation::sigma_z();
        assert!(matches!(CascadeConfig::new(rep.clone(), 0), Err(Error::Precondition(_))));
        let cfg = CascadeConfig::new(rep.clone(), 10).unwrap();
        assert!(matches!(cfg.clone().with_budget(1000), Err(Error::MemoryBudget { needed: 2048, budget: 1000 })));
        assert!(matches!(cascade_matrix(&cfg), Err(Error::Precondition(_))));
        assert!(!cfg.is_macroscopic() || cfg.probes >= N_MACRO);
        assert!(CascadeConfig::new(rep, 8).unwrap().is_macroscopic());
    }

    #[test]
    fn chain_examples() {
        let z2 = FiniteAbelianGroup::cyclic(2).unwrap();
        assert!(intertwiner_chain_check(&z2, &z2.character_at(1), 2).unwrap() < 1e-12);
        for n in 1..=4 {
            assert_eq!(intertwiner_chain_check(&z2, &z2.trivial_character(), n).unwrap(), 0.0);
        }
        let z4 = FiniteAbelianGroup::cyclic(4).unwrap();
        assert!(intertwiner_chain_check(&z4, &z4.character_at(1), 2).unwrap() < 1e-12);
    }

    #[test]
    fn heisenberg_examples() {
        let rep = SpectralRepresentation::sigma_z();
        let cfg = CascadeConfig::new(rep.clone(), 2).unwrap();
        let id2 = DenseOperator::identity(LegSpace::single("x", 2));
        let t = heisenberg_t(&cfg, &id2, &[id2.clone(), id2.clone()]).unwrap();
        assert!(t.identity_residual() < 1e-15);

        let not_diag = DenseOperator::from_fn(LegSpace::single("x", 2), |i, j| c((i + j) as f64));
        assert_eq!(heisenberg_t(&cfg, &id2, &[id2.clone(), not_diag]).unwrap_err(), Error::NotDiagonal(2));
    }

    #[test]
    fn heisenberg_single_probe_is_instrument_kernel() {
        let rep = SpectralRepresentation::sigma_z();
        let cfg = CascadeConfig::new(rep.clone(), 1).unwrap();
        let b = DenseOperator::from_fn(LegSpace::single("sys", 2), |i, j| {
            Complex64::new((i + j) as f64, i as f64 - j as f64)
        });
        let d = Outcome::new(rep.group(), &[1]).unwrap();
        let t = heisenberg_t(&cfg, &b, &[d.indicator(rep.group(), "p")]).unwrap();
        let xi = qubit(c(0.6), Complex64::new(0.0, 0.8));
        let lhs = expectation(&cascade_input(&cfg, &xi).unwrap(), &t).unwrap();
        let rhs = instrument(&rep, &d, &xi, &b).unwrap().conditional_expectation;
        assert!((lhs - rhs).norm() < 1e-14);
    }
}

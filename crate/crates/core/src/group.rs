//! Finite abelian groups `Z_{n_1} x ... x Z_{n_k}`, their characters and the
//! unitary Fourier transform between `l2(G)` and `l2(G^)`.
//!
//! Groups are written additively. Elements and characters are enumerated
//! lexicographically with the first cyclic factor most significant, and the
//! character with exponents `m` sits at the same index as the element with
//! coordinates `m`. That index identification is the concrete self-duality
//! `G ~ G^` used everywhere else in the crate.

use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{DenseOperator, LegSpace};

/// Default cap on `|G|`.
pub const DEFAULT_SIZE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    orders: Vec<usize>,
    size: usize,
    // index stride of each cyclic factor
    strides: Vec<usize>,
    // lcm of the orders; phases are computed as exact fractions of it
    period: u64,
}

/// A group element, carried with the orders of the group it came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    orders: Vec<usize>,
    coords: Vec<usize>,
    index: usize,
}

/// A character `u -> exp(2 pi i sum_j m_j a_j / n_j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Character {
    orders: Vec<usize>,
    exponents: Vec<usize>,
    index: usize,
}

impl Element {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

impl Character {
    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_trivial(&self) -> bool {
        self.index == 0
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FiniteAbelianGroup {
    pub fn new(orders: &[usize]) -> Result<Self> {
        Self::with_cap(orders, DEFAULT_SIZE_CAP)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn with_cap(orders: &[usize], cap: usize) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::EmptyGroup);
        }
        if orders.contains(&0) {
            return Err(Error::ZeroOrder(orders.to_vec()));
        }
        let mut size: usize = 1;
        for &n in orders {
            size = size.checked_mul(n).ok_or(Error::CapExceeded { size: usize::MAX, cap })?;
            if size > cap {
                return Err(Error::CapExceeded { size, cap });
            }
        }
        let mut strides = vec![1; orders.len()];
        for j in (0..orders.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * orders[j + 1];
        }
        let period = orders.iter().fold(1u64, |l, &n| l / gcd(l, n as u64) * n as u64);
        Ok(Self { orders: orders.to_vec(), size, strides, period })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_trivial(&self) -> bool {
        self.size == 1
    }

    pub fn coords(&self, index: usize) -> Vec<usize> {
        self.orders.iter().zip(&self.strides).map(|(&n, &s)| (index / s) % n).collect()
    }

    fn check_coords(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.orders.len() || coords.iter().zip(&self.orders).any(|(&a, &n)| a >= n) {
            return Err(Error::GroupMismatch { orders: self.orders.clone(), coords: coords.to_vec() });
        }
        Ok(coords.iter().zip(&self.strides).map(|(&a, &s)| a * s).sum())
    }

    pub fn element(&self, coords: &[usize]) -> Result<Element> {
        let index = self.check_coords(coords)?;
        Ok(Element { orders: self.orders.clone(), coords: coords.to_vec(), index })
    }

    pub fn element_at(&self, index: usize) -> Element {
        assert!(index < self.size, "element index {index} out of range");
        Element { orders: self.orders.clone(), coords: self.coords(index), index }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.size).map(|i| self.element_at(i))
    }

    pub fn character(&self, exponents: &[usize]) -> Result<Character> {
        let index = self.check_coords(exponents)?;
        Ok(Character { orders: self.orders.clone(), exponents: exponents.to_vec(), index })
    }

    pub fn character_at(&self, index: usize) -> Character {
        assert!(index < self.size, "character index {index} out of range");
        Character { orders: self.orders.clone(), exponents: self.coords(index), index }
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        (0..self.size).map(|i| self.character_at(i))
    }

    /// The trivial character `iota`.
    pub fn trivial_character(&self) -> Character {
        self.character_at(0)
    }

    pub fn contains_element(&self, u: &Element) -> bool {
        u.orders == self.orders
    }

    pub fn contains_character(&self, chi: &Character) -> bool {
        chi.orders == self.orders
    }

    /// Index of `a + b`.
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.orders.iter().zip(&self.strides).map(|(&n, &s)| ((a / s % n + b / s % n) % n) * s).sum()
    }

    /// Index of `a - b`.
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.orders.iter().zip(&self.strides).map(|(&n, &s)| ((a / s % n + n - b / s % n) % n) * s).sum()
    }

    pub fn neg(&self, a: usize) -> usize {
        self.sub(0, a)
    }

    /// Value of character `chi_index` at element `u_index`.
    pub fn char_value_at(&self, chi_index: usize, u_index: usize) -> Complex64 {
        let l = self.period;
        let mut num: u64 = 0;
        for (&n, &s) in self.orders.iter().zip(&self.strides) {
            let m = (chi_index / s % n) as u64;
            let a = (u_index / s % n) as u64;
            num = (num + m * a % n as u64 * (l / n as u64)) % l;
        }
        unit_root(num, l)
    }

    pub fn char_value(&self, chi: &Character, u: &Element) -> Result<Complex64> {
        if !self.contains_character(chi) {
            return Err(Error::GroupMismatch { orders: self.orders.clone(), coords: chi.exponents.clone() });
        }
        if !self.contains_element(u) {
            return Err(Error::GroupMismatch { orders: self.orders.clone(), coords: u.coords.clone() });
        }
        Ok(self.char_value_at(chi.index, u.index))
    }

    /// `(F xi)(gamma) = |G|^{-1/2} sum_u conj(gamma(u)) xi(u)`.
    pub fn fourier_transform(&self, xi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(xi.len())?;
        let norm = (self.size as f64).sqrt().recip();
        Ok((0..self.size)
            .map(|g| xi.iter().enumerate().map(|(u, &x)| self.char_value_at(g, u).conj() * x).sum::<Complex64>() * norm)
            .collect())
    }

    /// Inverse (= adjoint) of [`Self::fourier_transform`].
    pub fn inverse_fourier_transform(&self, eta: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(eta.len())?;
        let norm = (self.size as f64).sqrt().recip();
        Ok((0..self.size)
            .map(|u| eta.iter().enumerate().map(|(g, &y)| self.char_value_at(g, u) * y).sum::<Complex64>() * norm)
            .collect())
    }

    /// Matrix of the Fourier transform, rows indexed by characters.
    pub fn fourier_matrix(&self) -> Array2<Complex64> {
        let norm = (self.size as f64).sqrt().recip();
        Array2::from_shape_fn((self.size, self.size), |(g, u)| self.char_value_at(g, u).conj() * norm)
    }

    /// `lambda_gamma |chi> = |gamma chi>` on `l2(G^)`.
    pub fn regular_representation(&self, gamma: &Character) -> Result<DenseOperator> {
        if !self.contains_character(gamma) {
            return Err(Error::GroupMismatch { orders: self.orders.clone(), coords: gamma.exponents.clone() });
        }
        Ok(self.translation(gamma.index, "chi"))
    }

    /// Left-regular `lambda_u delta_v = delta_{u v}` on `l2(G)`.
    pub fn left_regular(&self, u: &Element) -> Result<DenseOperator> {
        if !self.contains_element(u) {
            return Err(Error::GroupMismatch { orders: self.orders.clone(), coords: u.coords.clone() });
        }
        Ok(self.translation(u.index, "u"))
    }

    pub(crate) fn translation(&self, shift: usize, label: &str) -> DenseOperator {
        let n = self.size;
        let mut m = Array2::zeros((n, n));
        for b in 0..n {
            m[[self.add(shift, b), b]] = Complex64::new(1.0, 0.0);
        }
        DenseOperator::from_matrix(LegSpace::single(label, n), m)
    }

    /// Index of the character of `G^` (with `G^` enumerated like `G`) that
    /// evaluates characters at `u`, i.e. the Pontryagin map `G -> G^^`.
    ///
    /// Found by search, so it doubles as a check of the index convention.
    pub fn double_dual_index(&self, u_index: usize) -> Option<usize> {
        (0..self.size).find(|&psi| {
            (0..self.size).all(|chi| (self.char_value_at(psi, chi) - self.char_value_at(chi, u_index)).norm() < 1e-12)
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: len });
        }
        Ok(())
    }
}

impl std::fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.orders.iter().map(|n| format!("Z{n}")).collect();
        f.write_str(&parts.join("x"))
    }
}

/// `exp(2 pi i num / period)`, exact on quarter turns.
fn unit_root(num: u64, period: u64) -> Complex64 {
    if (4 * num) % period == 0 {
        return match 4 * num / period {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, TAU * num as f64 / period as f64)
}

/// One representative of every isomorphism class of abelian groups of order
/// `n`, as products of cyclic groups of prime-power order.
pub fn abelian_groups_of_order(n: usize) -> Vec<Vec<usize>> {
    // factor n, then take all partitions of each prime exponent
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2;
    while m > 1 {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        p += 1;
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for (p, e) in factors {
        let mut next = Vec::new();
        for part in partitions(e, e) {
            for prefix in &out {
                let mut orders = prefix.clone();
                orders.extend(part.iter().map(|&k| p.pow(k as u32)));
                next.push(orders);
            }
        }
        out = next;
    }
    for orders in &mut out {
        if orders.is_empty() {
            orders.push(1);
        }
    }
    out
}

fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - k, k) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

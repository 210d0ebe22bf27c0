//! Sparse multimode Fock states.
//!
//! Kets are stored as sparse maps from occupation assignments to scalar
//! coefficients. Two basis conventions are supported:
//!
//! * **Divided power** — the basis vector for occupation `n` is `(a†)ⁿ/n!`
//!   applied to vacuum. Ladder coefficients stay rational (`a†: ×(n+1)`,
//!   `a: ×1`) and the inner product carries a metric weight `1/n!` per mode,
//!   so physical overlaps agree with the normalized convention.
//! * **Normalized** — ordinary unit-norm number states; ladder coefficients
//!   are `√(n+1)`/`√n`, which only exist in float mode.

use std::collections::BTreeMap;
use std::fmt;


use crate::error::Error;
use crate::scalar::{factorial, Scalar};

/// A short mode label such as `a_x`, `u_y` or a cascade leaf `x3`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    label: [u8; 4],
}

impl ModeId {
    /// Creates a label from at most four ASCII bytes.
    pub fn new(name: &str) -> Self {
        let bytes = name.as_bytes();
        assert!(
            !bytes.is_empty() && bytes.len() <= 4 && bytes.is_ascii(),
            "mode label must be 1..=4 ASCII bytes, got `{name}`"
        );
        let mut label = [0u8; 4];
        label[..bytes.len()].copy_from_slice(bytes);
        ModeId { label }
    }

    /// Label of the k-th cascade leaf (1-based).
    pub fn cascade_leaf(k: usize) -> Self {
        assert!((1..=99).contains(&k));
        ModeId::new(&format!("x{k}"))
    }

    pub fn as_str(&self) -> &str {
        let len = self.label.iter().position(|&b| b == 0).unwrap_or(4);
        std::str::from_utf8(&self.label[..len]).unwrap()
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModeId({})", self.as_str())
    }
}

/// The standard mode labels of the unfolded experiment.
pub mod modes {
    use super::ModeId;

    pub fn a_x() -> ModeId {
        ModeId::new("a_x")
    }
    pub fn a_y() -> ModeId {
        ModeId::new("a_y")
    }
    pub fn b_x() -> ModeId {
        ModeId::new("b_x")
    }
    pub fn b_y() -> ModeId {
        ModeId::new("b_y")
    }
    pub fn c_x() -> ModeId {
        ModeId::new("c_x")
    }
    pub fn c_y() -> ModeId {
        ModeId::new("c_y")
    }
    pub fn d_x() -> ModeId {
        ModeId::new("d_x")
    }
    pub fn d_y() -> ModeId {
        ModeId::new("d_y")
    }
    pub fn u_x() -> ModeId {
        ModeId::new("u_x")
    }
    pub fn u_y() -> ModeId {
        ModeId::new("u_y")
    }
    pub fn v_x() -> ModeId {
        ModeId::new("v_x")
    }
    pub fn v_y() -> ModeId {
        ModeId::new("v_y")
    }
}

/// One Fock basis vector: a finite occupation assignment. Absent modes carry
/// occupation zero; zero occupations are never stored, so equality of the map
/// is equality of the physical basis vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisKet {
    occ: BTreeMap<ModeId, u32>,
}

impl BasisKet {
    pub fn vacuum() -> Self {
        BasisKet::default()
    }

    pub fn from_occupations<I: IntoIterator<Item = (ModeId, u32)>>(iter: I) -> Self {
        let mut occ = BTreeMap::new();
        for (m, n) in iter {
            if n > 0 {
                occ.insert(m, n);
            }
        }
        BasisKet { occ }
    }

    pub fn occupation(&self, mode: ModeId) -> u32 {
        self.occ.get(&mode).copied().unwrap_or(0)
    }

    pub fn total_photons(&self) -> u32 {
        self.occ.values().sum()
    }

    pub fn modes(&self) -> impl Iterator<Item = (&ModeId, &u32)> {
        self.occ.iter()
    }

    pub fn is_vacuum(&self) -> bool {
        self.occ.is_empty()
    }

    #[must_use]
    pub fn raised(&self, mode: ModeId) -> Self {
        let mut occ = self.occ.clone();
        *occ.entry(mode).or_insert(0) += 1;
        BasisKet { occ }
    }

    /// Lowered occupation, or `None` when the mode is empty.
    #[must_use]
    pub fn lowered(&self, mode: ModeId) -> Option<Self> {
        let n = self.occupation(mode);
        if n == 0 {
            return None;
        }
        let mut occ = self.occ.clone();
        if n == 1 {
            occ.remove(&mode);
        } else {
            occ.insert(mode, n - 1);
        }
        Some(BasisKet { occ })
    }

    #[must_use]
    pub fn with_occupation(&self, mode: ModeId, n: u32) -> Self {
        let mut occ = self.occ.clone();
        if n == 0 {
            occ.remove(&mode);
        } else {
            occ.insert(mode, n);
        }
        BasisKet { occ }
    }

    /// Splits into (occupations of `modes` in their given order, remainder).
    pub fn split(&self, modes: &[ModeId]) -> (Vec<u32>, BasisKet) {
        let occs: Vec<u32> = modes.iter().map(|&m| self.occupation(m)).collect();
        let mut rest = self.occ.clone();
        for m in modes {
            rest.remove(m);
        }
        (occs, BasisKet { occ: rest })
    }

    /// Divided-power metric weight `Π 1/n_m!` of this occupation pattern.
    pub fn metric_weight<S: Scalar>(&self) -> S {
        let mut w = S::one();
        for (_, &n) in self.modes() {
            w = w / factorial::<S>(n);
        }
        w
    }
}

impl fmt::Debug for BasisKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        let mut first = true;
        for (m, n) in &self.occ {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{m}:{n}")?;
            first = false;
        }
        write!(f, "⟩")
    }
}

/// Basis convention of a [`Ket`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Convention {
    DividedPower,
    Normalized,
}

/// A sparse linear combination of [`BasisKet`]s. Zero coefficients are never
/// stored.
#[derive(Clone, PartialEq, Debug)]
pub struct Ket<S: Scalar> {
    terms: BTreeMap<BasisKet, S>,
    convention: Convention,
}

impl<S: Scalar> Ket<S> {
    pub fn zero(convention: Convention) -> Self {
        Ket {
            terms: BTreeMap::new(),
            convention,
        }
    }

    pub fn vacuum(convention: Convention) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(BasisKet::vacuum(), S::one());
        Ket { terms, convention }
    }

    pub fn basis_state(ket: BasisKet, convention: Convention) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(ket, S::one());
        Ket { terms, convention }
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisKet, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, ket: &BasisKet) -> S {
        self.terms.get(ket).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_photons(&self) -> u32 {
        self.terms.keys().map(|k| k.total_photons()).max().unwrap_or(0)
    }

    /// All modes occupied by at least one term.
    pub fn occupied_modes(&self) -> std::collections::BTreeSet<ModeId> {
        self.terms
            .keys()
            .flat_map(|k| k.modes().map(|(m, _)| *m))
            .collect()
    }

    pub fn add_term(&mut self, ket: BasisKet, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(ket);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    o.insert(sum);
                }
            }
        }
    }

    #[must_use]
    pub fn scaled(&self, factor: &S) -> Self {
        if factor.is_zero() {
            return Ket::zero(self.convention);
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), c.clone() * factor.clone()))
            .collect();
        Ket {
            terms,
            convention: self.convention,
        }
    }

    #[must_use]
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.convention, other.convention, "convention mismatch");
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    /// Applies the creation operator on `mode`.
    pub fn apply_creation(&self, mode: ModeId) -> Result<Self, Error> {
        let mut out = Ket::zero(self.convention);
        for (ket, coeff) in self.terms() {
            let n = ket.occupation(mode);
            let factor = match self.convention {
                Convention::DividedPower => S::from_int(i64::from(n) + 1),
                Convention::Normalized => {
                    if S::EXACT {
                        return Err(Error::NormalizedLadderInExactMode);
                    }
                    S::from_int(i64::from(n) + 1).try_sqrt()?
                }
            };
            out.add_term(ket.raised(mode), coeff.clone() * factor);
        }
        Ok(out)
    }

    /// Applies the annihilation operator on `mode`; empty modes annihilate.
    pub fn apply_annihilation(&self, mode: ModeId) -> Result<Self, Error> {
        let mut out = Ket::zero(self.convention);
        for (ket, coeff) in self.terms() {
            let n = ket.occupation(mode);
            if n == 0 {
                continue;
            }
            let factor = match self.convention {
                Convention::DividedPower => S::one(),
                Convention::Normalized => {
                    if S::EXACT {
                        return Err(Error::NormalizedLadderInExactMode);
                    }
                    S::from_int(i64::from(n)).try_sqrt()?
                }
            };
            out.add_term(ket.lowered(mode).unwrap(), coeff.clone() * factor);
        }
        Ok(out)
    }

    /// Bra-ket pairing. In the divided-power convention the metric weight
    /// `Π 1/n!` restores the physical overlap; coefficients are real, so no
    /// conjugation is involved.
    pub fn inner_product(&self, other: &Self) -> Result<S, Error> {
        if self.convention != other.convention {
            return Err(Error::ConventionMismatch);
        }
        let mut acc = S::zero();
        for (ket, c1) in self.terms() {
            if let Some(c2) = other.terms.get(ket) {
                let w = match self.convention {
                    Convention::DividedPower => ket.metric_weight::<S>(),
                    Convention::Normalized => S::one(),
                };
                acc = acc + c1.clone() * c2.clone() * w;
            }
        }
        Ok(acc)
    }

    pub fn squared_norm(&self) -> S {
        self.inner_product(self).expect("same convention")
    }

    /// Renames `from` to `to` in every term. `to` must be unoccupied.
    pub fn relabel_mode(&self, from: ModeId, to: ModeId) -> Result<Self, Error> {
        if from == to {
            return Ok(self.clone());
        }
        let mut out = Ket::zero(self.convention);
        for (ket, coeff) in self.terms() {
            if ket.occupation(to) > 0 {
                return Err(Error::ModeCollision(to));
            }
            let n = ket.occupation(from);
            let moved = ket.with_occupation(from, 0).with_occupation(to, n);
            out.add_term(moved, coeff.clone());
        }
        Ok(out)
    }

    /// Asserts the photon hard cap; exceeding it is a logic error upstream.
    pub fn check_photon_cap(&self, cap: u32) -> Result<(), Error> {
        let found = self.max_photons();
        if found > cap {
            return Err(Error::PhotonCapExceeded { cap, found });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    #[allow(unused_imports)]
    use num::traits::{One, Zero};
    use crate::scalar::ExactScalar;
    use proptest::prelude::*;

    type K = Ket<ExactScalar>;

    fn one_photon(mode: ModeId) -> K {
        K::vacuum(Convention::DividedPower).apply_creation(mode).unwrap()
    }

    #[test]
    fn creation_divided_power_rule() {
        // a† e₁ = 2 e₂
        let m = modes::a_x();
        let e1 = one_photon(m);
        let e2 = e1.apply_creation(m).unwrap();
        let target = BasisKet::vacuum().raised(m).raised(m);
        assert_eq!(e2.coefficient(&target), ExactScalar::from_int(2));
        assert_eq!(e2.num_terms(), 1);
    }

    #[test]
    fn creation_on_vacuum() {
        let m = modes::b_y();
        let e1 = one_photon(m);
        assert_eq!(
            e1.coefficient(&BasisKet::vacuum().raised(m)),
            ExactScalar::from_int(1)
        );
    }

    #[test]
    fn annihilation_rules() {
        let m = modes::a_x();
        let e1 = one_photon(m);
        let e0 = e1.apply_annihilation(m).unwrap();
        assert_eq!(e0, K::vacuum(Convention::DividedPower));
        // and on vacuum: zero ket
        let z = K::vacuum(Convention::DividedPower).apply_annihilation(m).unwrap();
        assert!(z.is_zero());
        // a(a†(vacuum)) = vacuum
        let round = K::vacuum(Convention::DividedPower)
            .apply_creation(m)
            .unwrap()
            .apply_annihilation(m)
            .unwrap();
        assert_eq!(round, K::vacuum(Convention::DividedPower));
    }

    #[test]
    fn normalized_ladders_error_in_exact_mode() {
        let m = modes::a_x();
        let v: K = Ket::vacuum(Convention::Normalized);
        assert_eq!(
            v.apply_creation(m).unwrap_err(),
            Error::NormalizedLadderInExactMode
        );
    }

    #[test]
    fn normalized_ladders_in_float_mode() {
        let m = modes::a_x();
        let v: Ket<f64> = Ket::vacuum(Convention::Normalized);
        let e2 = v
            .apply_creation(m)
            .unwrap()
            .apply_creation(m)
            .unwrap();
        // |2⟩ with amplitude √2
        assert!((e2.squared_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn metric_restores_physical_overlap() {
        // ⟨e₂, e₂⟩ = (2!)²·(1/2!) applied to coefficient 2... e₂ built via two
        // creations has coefficient 2, weight 1/2: physical norm² = 2.
        let m = modes::a_x();
        let e2 = one_photon(m).apply_creation(m).unwrap();
        assert_eq!(e2.squared_norm(), ExactScalar::from_int(2));
        // A bare divided-power basis vector e₂ has ⟨e₂,e₂⟩ = 1/2!.
        let bare = K::basis_state(BasisKet::vacuum().raised(m).raised(m), Convention::DividedPower);
        assert_eq!(bare.squared_norm(), ExactScalar::from_ratio(1, 2));
    }

    #[test]
    fn orthogonal_occupations() {
        let p = one_photon(modes::a_x());
        let q = one_photon(modes::a_y());
        assert!(p.inner_product(&q).unwrap().is_zero());
    }

    #[test]
    fn convention_mismatch_is_error() {
        let p: K = Ket::vacuum(Convention::DividedPower);
        let q: K = Ket::vacuum(Convention::Normalized);
        assert_eq!(p.inner_product(&q).unwrap_err(), Error::ConventionMismatch);
    }

    #[test]
    fn relabel_collision() {
        let m = modes::a_x();
        let n = modes::a_y();
        let ket = one_photon(m).apply_creation(n).unwrap();
        assert_eq!(ket.relabel_mode(m, n).unwrap_err(), Error::ModeCollision(n));
        let moved = one_photon(m).relabel_mode(m, n).unwrap();
        assert_eq!(moved, one_photon(n));
    }

    proptest! {
        /// (a a† − a† a) acts as the identity on any basis occupation.
        #[test]
        fn ladder_commutator_is_identity(n in 0u32..6) {
            let m = modes::c_x();
            let mut ket: K = Ket::vacuum(Convention::DividedPower);
            for _ in 0..n {
                ket = ket.apply_creation(m).unwrap();
            }
            let lhs = ket
                .apply_creation(m).unwrap()
                .apply_annihilation(m).unwrap()
                .plus(&ket.apply_annihilation(m).unwrap().apply_creation(m).unwrap().scaled(&ExactScalar::from_int(-1)));
            prop_assert_eq!(lhs, ket);
        }

        /// Divided-power norms agree with normalized-convention norms.
        #[test]
        fn metric_consistency(seq in proptest::collection::vec(0usize..4, 0..6)) {
            let ms = [modes::a_x(), modes::a_y(), modes::b_x(), modes::b_y()];
            let mut exact: K = Ket::vacuum(Convention::DividedPower);
            let mut float: Ket<f64> = Ket::vacuum(Convention::Normalized);
            for &i in &seq {
                exact = exact.apply_creation(ms[i]).unwrap();
                float = float.apply_creation(ms[i]).unwrap();
            }
            let a = exact.squared_norm().to_f64();
            let b = float.squared_norm();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }
}

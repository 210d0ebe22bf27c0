//! Sparse Hermitian operators over the Fock basis.
//!
//! All coefficients are real, so Hermiticity reduces to symmetry of the entry
//! map. Operators inherit the basis convention of the kets they were built
//! from; trace-like operations apply the divided-power metric weights so that
//! physical values agree with the normalized convention.

use std::collections::BTreeMap;


use crate::error::Error;
use crate::fock::{BasisKet, Convention, Ket, ModeId};
use crate::scalar::Scalar;

/// Bookkeeping tag: conditional operators out of a measurement are kept
/// unnormalized, their trace being the probability of the conditioning event.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Normalization {
    UnnormalizedConditional,
    TraceOne,
}

/// A sparse real symmetric operator `Σ c_{k,k'} |k⟩⟨k'|`.
#[derive(Clone, PartialEq, Debug)]
pub struct DensityOperator<S: Scalar> {
    entries: BTreeMap<(BasisKet, BasisKet), S>,
    convention: Convention,
    normalization: Normalization,
}

impl<S: Scalar> DensityOperator<S> {
    pub fn zero(convention: Convention) -> Self {
        DensityOperator {
            entries: BTreeMap::new(),
            convention,
            normalization: Normalization::UnnormalizedConditional,
        }
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn with_normalization(mut self, tag: Normalization) -> Self {
        self.normalization = tag;
        self
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(BasisKet, BasisKet), &S)> {
        self.entries.iter()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, ket: &BasisKet, bra: &BasisKet) -> S {
        self.entries
            .get(&(ket.clone(), bra.clone()))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn add_entry(&mut self, ket: BasisKet, bra: BasisKet, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        let key = (ket, bra);
        let cur = self.entries.remove(&key).unwrap_or_else(S::zero);
        let sum = cur + coeff;
        if !sum.is_zero() {
            self.entries.insert(key, sum);
        }
    }

    #[must_use]
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.convention, other.convention, "convention mismatch");
        let mut out = self.clone();
        for ((k, b), c) in other.entries() {
            out.add_entry(k.clone(), b.clone(), c.clone());
        }
        out
    }

    #[must_use]
    pub fn scaled(&self, factor: &S) -> Self {
        if factor.is_zero() {
            return DensityOperator::zero(self.convention);
        }
        let entries = self
            .entries
            .iter()
            .map(|(k, c)| (k.clone(), c.clone() * factor.clone()))
            .collect();
        DensityOperator {
            entries,
            convention: self.convention,
            normalization: self.normalization,
        }
    }

    /// Outer product `|ket⟩⟨ket|`.
    pub fn outer(ket: &Ket<S>) -> Self {
        Self::outer_pair(ket, ket)
    }

    /// Outer product `|left⟩⟨right|` plus nothing; callers wanting Hermitian
    /// results must symmetrize.
    pub fn outer_pair(left: &Ket<S>, right: &Ket<S>) -> Self {
        assert_eq!(left.convention(), right.convention(), "convention mismatch");
        let mut out = DensityOperator::zero(left.convention());
        for (k, ck) in left.terms() {
            for (b, cb) in right.terms() {
                out.add_entry(k.clone(), b.clone(), ck.clone() * cb.clone());
            }
        }
        out
    }

    fn weight(&self, ket: &BasisKet) -> S {
        match self.convention {
            Convention::DividedPower => ket.metric_weight::<S>(),
            Convention::Normalized => S::one(),
        }
    }

    pub fn trace(&self) -> S {
        let mut acc = S::zero();
        for ((k, b), c) in self.entries() {
            if k == b {
                acc = acc + c.clone() * self.weight(k);
            }
        }
        acc
    }

    /// Traces out `modes`, keeping entries diagonal in the traced occupations
    /// and weighting them with the divided-power metric.
    pub fn partial_trace(&self, modes: &[ModeId]) -> Self {
        let mut out = DensityOperator::zero(self.convention);
        out.normalization = self.normalization;
        for ((k, b), c) in self.entries() {
            let (k_traced, k_rest) = k.split(modes);
            let (b_traced, b_rest) = b.split(modes);
            if k_traced != b_traced {
                continue;
            }
            let w = match self.convention {
                Convention::DividedPower => {
                    BasisKet::from_occupations(modes.iter().copied().zip(k_traced))
                        .metric_weight::<S>()
                }
                Convention::Normalized => S::one(),
            };
            out.add_entry(k_rest, b_rest, c.clone() * w);
        }
        out
    }

    /// `⟨φ|ρ|φ⟩` with metric weights on both sides.
    pub fn expectation(&self, phi: &Ket<S>) -> Result<S, Error> {
        if phi.convention() != self.convention {
            return Err(Error::ConventionMismatch);
        }
        let mut acc = S::zero();
        for ((k, b), c) in self.entries() {
            let ck = phi.coefficient(k);
            if ck.is_zero() {
                continue;
            }
            let cb = phi.coefficient(b);
            if cb.is_zero() {
                continue;
            }
            acc = acc + ck * cb * c.clone() * self.weight(k) * self.weight(b);
        }
        Ok(acc)
    }

    pub fn is_hermitian(&self) -> bool {
        self.entries().all(|((k, b), c)| {
            self.entries
                .get(&(b.clone(), k.clone()))
                .is_some_and(|c2| c.approx_eq(c2))
        })
    }

    pub fn diagonal_nonnegative(&self) -> bool {
        self.entries()
            .all(|((k, b), c)| k != b || !c.is_negative())
    }

    /// All modes occupied by at least one entry.
    pub fn occupied_modes(&self) -> std::collections::BTreeSet<ModeId> {
        self.entries
            .keys()
            .flat_map(|(k, b)| {
                k.modes()
                    .map(|(m, _)| *m)
                    .chain(b.modes().map(|(m, _)| *m))
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

//! Finite-efficiency detector models and conditional measurement.
//!
//! A detector that cannot resolve photon number is modeled by a beam splitter
//! diverting part of the signal into a loss mode; the resulting POVM elements
//! are diagonal in the occupation basis with coefficients `(1−η²)ⁿ` for "no
//! click" and `1 − (1−η²)ⁿ` for "click", where `η²` is the detector
//! efficiency.
//!
//! A cascade distributes one mode over `n` detectors with a splitting tree so
//! that multi-photon bundles reveal themselves as coincidences. Only the
//! "exactly one detector clicked" outcome is accepted; coincidences are
//! dismissed. Summed over the single-click patterns and conjugated back
//! through the tree, the cascade acts diagonally on the occupation of the
//! original mode, which is how the pipeline applies it.

use std::collections::BTreeSet;

use crate::density::DensityOperator;
use crate::error::Error;
use crate::fock::{BasisKet, Convention, Ket, ModeId};
use crate::optics::{beam_splitter, BeamSplitterSpec};
use crate::scalar::{factorial, Scalar};

/// What happens to the undetected polarization branch of the cascade mode.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum YModePolicy {
    /// Accept only if the branch detector saw no click.
    ConditionNoClick,
    /// Leave the branch undetected and trace it out.
    TraceOut,
}

/// How the cascade splits its mode over the detectors.
///
/// `Uniform` distributes equal weight `1/n` to every detector (a chain of
/// `n−1` splitters with tuned reflectivities); the two 50:50 variants are
/// binary trees of symmetric splitters, which coincide with `Uniform` when
/// `n` is a power of two.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CascadeTopology {
    Uniform,
    Balanced,
    LeftLeaning,
}

impl CascadeTopology {
    /// Probability weights `q_k` with which a single photon reaches each of
    /// the `n` detectors; they sum to one.
    pub fn leaf_weights<S: Scalar>(self, n: usize) -> Vec<S> {
        assert!(n >= 1);
        match self {
            CascadeTopology::Uniform => {
                vec![S::from_ratio(1, n as i64); n]
            }
            CascadeTopology::Balanced => {
                let mut out = Vec::with_capacity(n);
                fn rec<S: Scalar>(n: usize, weight: S, out: &mut Vec<S>) {
                    if n == 1 {
                        out.push(weight);
                        return;
                    }
                    let left = n.div_ceil(2);
                    rec(left, weight.half(), out);
                    rec(n - left, weight.half(), out);
                }
                rec(n, S::one(), &mut out);
                out
            }
            CascadeTopology::LeftLeaning => {
                let mut out = Vec::with_capacity(n);
                let mut weight = S::one();
                for _ in 0..n - 1 {
                    weight = weight.half();
                    out.push(weight.clone());
                }
                out.push(weight);
                out
            }
        }
    }
}

/// A detector cascade: `n_detectors` equal-efficiency detectors on the
/// x-polarized branch, plus a policy for the y branch.
#[derive(Clone, Debug)]
pub struct CascadeSpec<S: Scalar> {
    pub n_detectors: usize,
    pub eta_c_sq: S,
    pub y_policy: YModePolicy,
    pub topology: CascadeTopology,
}

impl<S: Scalar> CascadeSpec<S> {
    pub fn new(n_detectors: usize, eta_c_sq: S, y_policy: YModePolicy) -> Result<Self, Error> {
        if !(1..=16).contains(&n_detectors) {
            return Err(Error::invalid("cascade_n", "need 1..=16 detectors"));
        }
        check_efficiency("eta_c_sq", &eta_c_sq)?;
        Ok(CascadeSpec {
            n_detectors,
            eta_c_sq,
            y_policy,
            topology: CascadeTopology::Uniform,
        })
    }

    pub fn with_topology(mut self, topology: CascadeTopology) -> Self {
        self.topology = topology;
        self
    }
}

fn check_efficiency<S: Scalar>(key: &str, eta_sq: &S) -> Result<(), Error> {
    if eta_sq.is_negative() || (S::one() - eta_sq.clone()).is_negative() {
        return Err(Error::invalid(key, "efficiency must lie in [0, 1]"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
enum PovmKind<S: Scalar> {
    /// `loss^N` over the total occupation `N` of the listed modes.
    NoClick { loss: S },
    /// `1 − loss^N` over the total occupation of the listed modes.
    Click { loss: S },
    /// Exactly one of the listed detector modes clicked:
    /// `Σ_k (1 − loss^{n_k}) Π_{j≠k} loss^{n_j}`.
    ExactlyOneClick { loss: S },
    /// The cascade summed over single-click patterns and conjugated back
    /// through its splitting tree; diagonal on the root-mode occupation.
    CascadeOneClick {
        n_detectors: usize,
        loss: S,
        topology: CascadeTopology,
    },
}

/// An occupation-diagonal measurement element over an ordered list of modes.
#[derive(Clone, Debug)]
pub struct DiagonalPovm<S: Scalar> {
    modes: Vec<ModeId>,
    kind: PovmKind<S>,
}

impl<S: Scalar> DiagonalPovm<S> {
    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    /// The diagonal coefficient for the given occupations of `self.modes()`.
    pub fn coefficient(&self, occs: &[u32]) -> S {
        debug_assert_eq!(occs.len(), self.modes.len());
        match &self.kind {
            PovmKind::NoClick { loss } => loss.powi(occs.iter().sum()),
            PovmKind::Click { loss } => S::one() - loss.powi(occs.iter().sum()),
            PovmKind::ExactlyOneClick { loss } => one_click_pattern(occs, loss),
            PovmKind::CascadeOneClick {
                n_detectors,
                loss,
                topology,
            } => cascade_one_click_coefficient(*n_detectors, occs[0], loss, *topology),
        }
    }
}

/// No-click element of one inefficient detector: coefficient `(1−η²)ⁿ`.
pub fn povm_no_click<S: Scalar>(mode: ModeId, eta_sq: S) -> Result<DiagonalPovm<S>, Error> {
    check_efficiency("eta_sq", &eta_sq)?;
    Ok(DiagonalPovm {
        modes: vec![mode],
        kind: PovmKind::NoClick {
            loss: S::one() - eta_sq,
        },
    })
}

/// Click element of one inefficient detector: coefficient `1 − (1−η²)ⁿ`.
pub fn povm_click<S: Scalar>(mode: ModeId, eta_sq: S) -> Result<DiagonalPovm<S>, Error> {
    check_efficiency("eta_sq", &eta_sq)?;
    Ok(DiagonalPovm {
        modes: vec![mode],
        kind: PovmKind::Click {
            loss: S::one() - eta_sq,
        },
    })
}

/// Click element of a polarization-insensitive detector watching both
/// polarization modes: coefficient `1 − (1−η²)^{n+m}`.
pub fn povm_click_unpolarized<S: Scalar>(
    mode_x: ModeId,
    mode_y: ModeId,
    eta_sq: S,
) -> Result<DiagonalPovm<S>, Error> {
    check_efficiency("eta_sq", &eta_sq)?;
    Ok(DiagonalPovm {
        modes: vec![mode_x, mode_y],
        kind: PovmKind::Click {
            loss: S::one() - eta_sq,
        },
    })
}

/// Exactly-one-click element over explicit detector (leaf) modes.
pub fn povm_exactly_one_click<S: Scalar>(
    modes: Vec<ModeId>,
    eta_sq: S,
) -> Result<DiagonalPovm<S>, Error> {
    check_efficiency("eta_sq", &eta_sq)?;
    Ok(DiagonalPovm {
        modes,
        kind: PovmKind::ExactlyOneClick {
            loss: S::one() - eta_sq,
        },
    })
}

/// The cascade acceptance element acting diagonally on the root mode.
pub fn povm_cascade_one_click<S: Scalar>(
    mode: ModeId,
    spec: &CascadeSpec<S>,
) -> Result<DiagonalPovm<S>, Error> {
    Ok(DiagonalPovm {
        modes: vec![mode],
        kind: PovmKind::CascadeOneClick {
            n_detectors: spec.n_detectors,
            loss: S::one() - spec.eta_c_sq.clone(),
            topology: spec.topology,
        },
    })
}

fn one_click_pattern<S: Scalar>(occs: &[u32], loss: &S) -> S {
    let total: u32 = occs.iter().sum();
    let mut acc = S::zero();
    for &nk in occs {
        if nk == 0 {
            continue;
        }
        let survive_others = loss.powi(total - nk);
        acc = acc + (S::one() - loss.powi(nk)) * survive_others;
    }
    acc
}

/// All occupation patterns of `total` photons over `bins` detectors.
fn compositions(total: u32, bins: usize) -> Vec<Vec<u32>> {
    if bins == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, bins - 1) {
            let mut v = Vec::with_capacity(bins);
            v.push(first);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

fn cascade_one_click_coefficient<S: Scalar>(
    n_detectors: usize,
    photons: u32,
    loss: &S,
    topology: CascadeTopology,
) -> S {
    if photons == 0 {
        return S::zero();
    }
    let weights: Vec<S> = topology.leaf_weights(n_detectors);
    let mut acc = S::zero();
    for pattern in compositions(photons, n_detectors) {
        // multinomial routing probability: photons!/(Π m_k!)·Π q_k^{m_k}
        let mut prob = factorial::<S>(photons);
        for (&mk, qk) in pattern.iter().zip(&weights) {
            prob = prob / factorial::<S>(mk) * qk.powi(mk);
        }
        acc = acc + prob * one_click_pattern(&pattern, loss);
    }
    acc
}

/// Effective diagonal coefficient of an `n`-detector uniform cascade on a
/// root-mode occupation: the probability that the routed photons trigger
/// exactly one detector click.
pub fn cascade_effective_coefficient<S: Scalar>(
    n_detectors: usize,
    photons: u32,
    eta_c_sq: &S,
) -> S {
    cascade_one_click_coefficient(
        n_detectors,
        photons,
        &(S::one() - eta_c_sq.clone()),
        CascadeTopology::Uniform,
    )
}

/// As [`cascade_effective_coefficient`] for an explicit topology.
pub fn cascade_effective_coefficient_with_topology<S: Scalar>(
    n_detectors: usize,
    photons: u32,
    eta_c_sq: &S,
    topology: CascadeTopology,
) -> S {
    cascade_one_click_coefficient(n_detectors, photons, &(S::one() - eta_c_sq.clone()), topology)
}

/// Expands the cascade's splitting tree explicitly: the root mode is replaced
/// by the given leaf modes via `n−1` beam splitters. Exact arithmetic only
/// admits splitting ratios whose amplitudes live in `Q(√2)`; uniform trees
/// with `n` not a power of two need float mode.
pub fn cascade_tree_unitary<S: Scalar>(
    ket: &Ket<S>,
    root: ModeId,
    leaves: &[ModeId],
    topology: CascadeTopology,
) -> Result<Ket<S>, Error> {
    assert!(!leaves.is_empty());
    if leaves.len() == 1 {
        return ket.relabel_mode(root, leaves[0]);
    }
    let left_count = match topology {
        CascadeTopology::Uniform | CascadeTopology::Balanced => leaves.len().div_ceil(2),
        CascadeTopology::LeftLeaning => 1,
    };
    let (left, right) = leaves.split_at(left_count);
    let eta_sq = match topology {
        CascadeTopology::Uniform => S::from_ratio(left_count as i64, leaves.len() as i64),
        CascadeTopology::Balanced | CascadeTopology::LeftLeaning => S::from_ratio(1, 2),
    };
    let eta = eta_sq.clone().try_sqrt()?;
    let eta_tilde = (S::one() - eta_sq).try_sqrt()?;
    // Route through a fresh pair of intermediate labels: the leading leaf of
    // each group stands in for the whole group until its own split.
    let spec = BeamSplitterSpec::new(root, intermediate_vacuum(), left[0], right[0], eta, eta_tilde)?;
    let split = beam_splitter(ket, &spec)?;
    let split = cascade_tree_unitary(&split, left[0], left, topology)?;
    cascade_tree_unitary(&split, right[0], right, topology)
}

fn intermediate_vacuum() -> ModeId {
    // a dedicated always-empty second input port for splitting trees
    ModeId::new("~in")
}

/// Conditional unnormalized density operator
/// `Tr_traced[(Π POVMs) |left⟩⟨right|]` on the remaining modes.
///
/// The trace applies the divided-power metric weights of the traced
/// occupations; the operator's trace equals the probability of the
/// conditioning event when `left == right` is normalized.
pub fn conditioned_outer<S: Scalar>(
    left: &Ket<S>,
    right: &Ket<S>,
    povms: &[DiagonalPovm<S>],
    traced: &BTreeSet<ModeId>,
) -> Result<DensityOperator<S>, Error> {
    if left.convention() != right.convention() {
        return Err(Error::ConventionMismatch);
    }
    let mut seen: BTreeSet<ModeId> = BTreeSet::new();
    for povm in povms {
        for &m in povm.modes() {
            if !traced.contains(&m) {
                return Err(Error::PovmOutsideTrace(m));
            }
            if !seen.insert(m) {
                return Err(Error::PovmOverlap(m));
            }
        }
    }

    let traced_modes: Vec<ModeId> = traced.iter().copied().collect();
    let group = |ket: &Ket<S>| {
        let mut map: std::collections::BTreeMap<BasisKet, Vec<(BasisKet, S)>> =
            std::collections::BTreeMap::new();
        for (basis, coeff) in ket.terms() {
            let (occs, rest) = basis.split(&traced_modes);
            let traced_basis =
                BasisKet::from_occupations(traced_modes.iter().copied().zip(occs));
            map.entry(traced_basis).or_default().push((rest, coeff.clone()));
        }
        map
    };
    let left_groups = group(left);
    let right_groups = group(right);

    let mut out = DensityOperator::zero(left.convention());
    for (traced_basis, left_terms) in &left_groups {
        let Some(right_terms) = right_groups.get(traced_basis) else {
            continue;
        };
        let mut factor = match left.convention() {
            Convention::DividedPower => traced_basis.metric_weight::<S>(),
            Convention::Normalized => S::one(),
        };
        for povm in povms {
            let occs: Vec<u32> = povm.modes().iter().map(|&m| traced_basis.occupation(m)).collect();
            factor = factor * povm.coefficient(&occs);
            if factor.is_zero() {
                break;
            }
        }
        if factor.is_zero() {
            continue;
        }
        for (kl, cl) in left_terms {
            for (kr, cr) in right_terms {
                out.add_entry(
                    kl.clone(),
                    kr.clone(),
                    cl.clone() * cr.clone() * factor.clone(),
                );
            }
        }
    }
    Ok(out)
}

/// Measurement of a pure state: POVMs applied on (a subset of) the traced
/// modes, everything else kept coherent.
pub fn apply_measurement<S: Scalar>(
    state: &Ket<S>,
    povms: &[DiagonalPovm<S>],
    traced: &BTreeSet<ModeId>,
) -> Result<DensityOperator<S>, Error> {
    conditioned_outer(state, state, povms, traced)
}

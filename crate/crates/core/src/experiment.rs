//! The full generalized teleportation pipeline.
//!
//! Two photon-pair sources feed the unfolded setup: source 1 on modes
//! `(a, b)` prepares the input state (mode `a` goes through a polarization
//! rotation into Victor's detector cascade), source 2 on `(c, d)` supplies
//! the entanglement channel (mode `d` is Bob's output). A 50:50 beam splitter
//! mixes `b` and `c` into `u` and `v`; coincidence clicks in `u` and `v`
//! together with an accepted cascade event condition the state of `d`.
//!
//! Everything is truncated at a total pair number (2 or 3). Because the
//! overall constants are dropped, only coefficient ratios within the
//! conditional output are meaningful; the returned blocks are tagged by the
//! pair counts `(i, j)` of the two sources, which is also the power of
//! `p1^i p2^j` they carry and the photon number (`j`) in Bob's mode.

use std::collections::BTreeSet;

use crate::density::{DensityOperator, Normalization};
use crate::detection::{
    cascade_effective_coefficient_with_topology, conditioned_outer, povm_cascade_one_click,
    povm_click_unpolarized, povm_no_click, CascadeSpec, CascadeTopology, DiagonalPovm, YModePolicy,
};
use crate::error::Error;
use crate::fock::{modes, BasisKet, Convention, Ket};
use crate::optics::{beam_splitter, l_plus, polarization_rotation, BeamSplitterSpec, PolarizationRotation};
use crate::scalar::{factorial, Scalar};

/// All free parameters of the generalized experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig<S: Scalar> {
    /// Pair probability of the state-preparation source, `p1 = 2r1²`.
    pub p1: S,
    /// Pair probability of the entanglement-channel source.
    pub p2: S,
    /// Preparation angle as an exact (cos θ, sin θ) pair.
    pub theta_cos: S,
    pub theta_sin: S,
    /// Efficiencies of the two coincidence detectors.
    pub eta_u_sq: S,
    pub eta_v_sq: S,
    pub cascade: CascadeSpec<S>,
    /// Total pair number kept in the truncated source expansions: 2 or 3.
    pub truncation_order: u32,
}

impl<S: Scalar> ExperimentConfig<S> {
    /// The historical single-detector configuration: no cascade (n = 1),
    /// undetected y branch, equal sources.
    pub fn single_detector(p: S, eta_c_sq: S) -> Result<Self, Error> {
        Ok(ExperimentConfig {
            p1: p.clone(),
            p2: p,
            theta_cos: S::one(),
            theta_sin: S::zero(),
            eta_u_sq: eta_c_sq.clone(),
            eta_v_sq: eta_c_sq.clone(),
            cascade: CascadeSpec::new(1, eta_c_sq, YModePolicy::TraceOut)?,
            truncation_order: 2,
        })
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.truncation_order != 2 && self.truncation_order != 3 {
            return Err(Error::invalid("order", "truncation order must be 2 or 3"));
        }
        for (key, p) in [("p1", &self.p1), ("p2", &self.p2)] {
            if p.sign() <= 0 || (S::one() - p.clone()).sign() <= 0 {
                return Err(Error::invalid(key, "pair probability must lie in (0, 1)"));
            }
        }
        for (key, eta) in [("eta_u_sq", &self.eta_u_sq), ("eta_v_sq", &self.eta_v_sq)] {
            if eta.is_negative() || (S::one() - eta.clone()).is_negative() {
                return Err(Error::invalid(key, "efficiency must lie in [0, 1]"));
            }
        }
        let unit = self.theta_cos.clone() * self.theta_cos.clone()
            + self.theta_sin.clone() * self.theta_sin.clone();
        if !unit.approx_eq(&S::one()) {
            return Err(Error::invalid("theta", "requires cos² + sin² = 1"));
        }
        Ok(())
    }

    pub fn ideal_state(&self) -> Result<IdealState<S>, Error> {
        IdealState::new(self.theta_cos.clone(), self.theta_sin.clone())
    }
}

/// The ideally prepared single-photon state on Bob's modes and its
/// orthogonal complement:
/// `|Ψ⟩ = cos|0,1⟩ + sin|1,0⟩`, `|Ψ⊥⟩ = sin|0,1⟩ − cos|1,0⟩`.
#[derive(Clone, Debug)]
pub struct IdealState<S: Scalar> {
    pub cos: S,
    pub sin: S,
    psi: Ket<S>,
    psi_perp: Ket<S>,
}

impl<S: Scalar> IdealState<S> {
    pub fn new(cos: S, sin: S) -> Result<Self, Error> {
        let unit = cos.clone() * cos.clone() + sin.clone() * sin.clone();
        if !unit.approx_eq(&S::one()) {
            return Err(Error::invalid("theta", "requires cos² + sin² = 1"));
        }
        let dx = BasisKet::vacuum().raised(modes::d_x());
        let dy = BasisKet::vacuum().raised(modes::d_y());
        let mut psi = Ket::zero(Convention::DividedPower);
        psi.add_term(dy.clone(), cos.clone());
        psi.add_term(dx.clone(), sin.clone());
        let mut psi_perp = Ket::zero(Convention::DividedPower);
        psi_perp.add_term(dy, sin.clone());
        psi_perp.add_term(dx, -cos.clone());
        Ok(IdealState {
            cos,
            sin,
            psi,
            psi_perp,
        })
    }

    pub fn psi(&self) -> &Ket<S> {
        &self.psi
    }

    pub fn psi_perp(&self) -> &Ket<S> {
        &self.psi_perp
    }
}

/// The conditional output decomposed into blocks by source pair counts.
///
/// Block `(i, j)` collects everything of order `p1^i p2^j`; its entries hold
/// `j` photons in Bob's modes. `coherences` retains any nonzero cross-sector
/// contribution the partial trace failed to kill — photon-number
/// superselection of the conditioning makes this empty for every pipeline
/// output, which [`cross_term_check`] verifies.
/// A surviving coherence between two source sectors; never produced by the
/// pipeline, kept so the block structure stays falsifiable.
pub type SectorCoherence<S> = ((u32, u32), (u32, u32), DensityOperator<S>);

#[derive(Clone, Debug)]
pub struct OrderedDensity<S: Scalar> {
    blocks: std::collections::BTreeMap<(u32, u32), DensityOperator<S>>,
    coherences: Vec<SectorCoherence<S>>,
}

impl<S: Scalar> OrderedDensity<S> {
    pub fn empty() -> Self {
        OrderedDensity {
            blocks: Default::default(),
            coherences: Vec::new(),
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(u32, u32), &DensityOperator<S>)> {
        self.blocks.iter()
    }

    pub fn block(&self, i: u32, j: u32) -> Option<&DensityOperator<S>> {
        self.blocks.get(&(i, j))
    }

    pub fn block_tags(&self) -> Vec<(u32, u32)> {
        self.blocks.keys().copied().collect()
    }

    pub fn coherences(&self) -> &[SectorCoherence<S>] {
        &self.coherences
    }

    pub fn insert_block(&mut self, tag: (u32, u32), dm: DensityOperator<S>) {
        if !dm.is_zero() {
            let entry = self
                .blocks
                .entry(tag)
                .or_insert_with(|| DensityOperator::zero(dm.convention()));
            *entry = entry.plus(&dm);
        }
    }

    /// Sum of all blocks: the conditional (unnormalized) output state.
    pub fn total(&self) -> DensityOperator<S> {
        let mut acc = DensityOperator::zero(Convention::DividedPower);
        for dm in self.blocks.values() {
            acc = acc.plus(dm);
        }
        acc.with_normalization(Normalization::UnnormalizedConditional)
    }
}

/// Builds the conditional output state of the configured experiment.
pub fn build_output_state<S: Scalar>(
    config: &ExperimentConfig<S>,
) -> Result<OrderedDensity<S>, Error> {
    config.validate()?;
    let order = config.truncation_order;
    let cap = 2 * order;

    // Pair-count sectors of the two truncated sources, each evolved through
    // beam splitter, rotation and (effectively) the cascade tree.
    let mut sectors: Vec<((u32, u32), Ket<S>)> = Vec::new();
    for l1 in 0..=order {
        for l2 in 0..=(order - l1) {
            let ket = sector_ket(config, l1, l2)?;
            ket.check_photon_cap(cap)?;
            sectors.push(((l1, l2), ket));
        }
    }

    let povms = conditioning_povms(config)?;
    let traced: BTreeSet<_> = [
        modes::a_x(),
        modes::a_y(),
        modes::u_x(),
        modes::u_y(),
        modes::v_x(),
        modes::v_y(),
    ]
    .into();

    let mut out = OrderedDensity::empty();
    for (idx, ((l1, l2), ket)) in sectors.iter().enumerate() {
        // diagonal sector: carries (p1/2)^l1 (p2/2)^l2
        let dm = conditioned_outer(ket, ket, &povms, &traced)?;
        if !dm.is_zero() {
            let weight = config.p1.half().powi(*l1) * config.p2.half().powi(*l2);
            out.insert_block((*l1, *l2), dm.scaled(&weight));
        }
        // cross sectors: killed by the trace over the detected modes; kept
        // only if anything survives, so the block structure stays honest
        for ((m1, m2), other) in sectors.iter().skip(idx + 1) {
            let cross = conditioned_outer(ket, other, &povms, &traced)?;
            if !cross.is_zero() {
                out.coherences.push(((*l1, *l2), (*m1, *m2), cross));
            }
        }
    }
    Ok(out)
}

fn sector_ket<S: Scalar>(
    config: &ExperimentConfig<S>,
    l1: u32,
    l2: u32,
) -> Result<Ket<S>, Error> {
    let mut ket = Ket::vacuum(Convention::DividedPower);
    for _ in 0..l1 {
        ket = l_plus(&ket, (modes::a_x(), modes::a_y()), (modes::b_x(), modes::b_y()))?;
    }
    for _ in 0..l2 {
        ket = l_plus(&ket, (modes::c_x(), modes::c_y()), (modes::d_x(), modes::d_y()))?;
    }
    let norm = (factorial::<S>(l1) * factorial::<S>(l2)).inv()?;
    ket = ket.scaled(&norm);

    // Coincidence beam splitter b, c → u, v (per polarization).
    let bs_x = BeamSplitterSpec::fifty_fifty(modes::b_x(), modes::c_x(), modes::u_x(), modes::v_x());
    let bs_y = BeamSplitterSpec::fifty_fifty(modes::b_y(), modes::c_y(), modes::u_y(), modes::v_y());
    ket = beam_splitter(&ket, &bs_x)?;
    ket = beam_splitter(&ket, &bs_y)?;

    // Preparation-side polarization rotation.
    let rot = PolarizationRotation::new(
        modes::a_x(),
        modes::a_y(),
        config.theta_cos.clone(),
        config.theta_sin.clone(),
    )?;
    polarization_rotation(&ket, &rot)
}

fn conditioning_povms<S: Scalar>(
    config: &ExperimentConfig<S>,
) -> Result<Vec<DiagonalPovm<S>>, Error> {
    let mut povms = vec![
        povm_cascade_one_click(modes::a_x(), &config.cascade)?,
        povm_click_unpolarized(modes::u_x(), modes::u_y(), config.eta_u_sq.clone())?,
        povm_click_unpolarized(modes::v_x(), modes::v_y(), config.eta_v_sq.clone())?,
    ];
    if config.cascade.y_policy == YModePolicy::ConditionNoClick {
        povms.push(povm_no_click(modes::a_y(), config.cascade.eta_c_sq.clone())?);
    }
    Ok(povms)
}

/// Overlap of the conditional state with the ideal state, normalized by the
/// trace: `⟨Ψ|ρ|Ψ⟩ / Tr ρ`.
pub fn fidelity_dm<S: Scalar>(
    rho: &DensityOperator<S>,
    ideal: &IdealState<S>,
) -> Result<S, Error> {
    let trace = rho.trace();
    if trace.sign() <= 0 {
        return Err(Error::ZeroTrace);
    }
    let overlap = rho.expectation(ideal.psi())?;
    Ok(overlap / trace)
}

/// Fidelity of a block-decomposed output.
pub fn fidelity<S: Scalar>(rho: &OrderedDensity<S>, ideal: &IdealState<S>) -> Result<S, Error> {
    fidelity_dm(&rho.total(), ideal)
}

/// Vacuum coefficient over ideal-state coefficient of the conditional
/// output; the figure the second-order closed forms are written in.
pub fn vacuum_signal_ratio<S: Scalar>(
    rho: &OrderedDensity<S>,
    ideal: &IdealState<S>,
) -> Result<S, Error> {
    let total = rho.total();
    let vac = total.entry(&BasisKet::vacuum(), &BasisKet::vacuum());
    let signal = total.expectation(ideal.psi())?;
    if signal.sign() <= 0 {
        return Err(Error::ZeroTrace);
    }
    Ok(vac / signal)
}

/// Second-order fidelity closed form for an n-detector cascade with a
/// no-click condition on the y branch:
/// `F = n·p2 / (p1·[1 + (5n−3)(1−η²)] + n·p2)`.
pub fn f2_formula<S: Scalar>(n: u32, p1: &S, p2: &S, eta_c_sq: &S) -> S {
    let bracket = S::one()
        + S::from_int(5 * i64::from(n) - 3) * (S::one() - eta_c_sq.clone());
    let np2 = S::from_int(i64::from(n)) * p2.clone();
    np2.clone() / (p1.clone() * bracket + np2)
}

/// Cascade efficiency needed to reach fidelity 3/4 at second order:
/// `η² ≥ ((15n−6)p1 − n·p2) / ((15n−9)p1)`.
pub fn f2_threshold<S: Scalar>(n: u32, p1: &S, p2: &S) -> S {
    let n = i64::from(n);
    let num = S::from_int(15 * n - 6) * p1.clone() - S::from_int(n) * p2.clone();
    let den = S::from_int(15 * n - 9) * p1.clone();
    num / den
}

/// The `n → ∞` limit of [`f2_threshold`]: `(15·p1 − p2) / (15·p1)`.
pub fn f2_threshold_limit<S: Scalar>(p1: &S, p2: &S) -> S {
    (S::from_int(15) * p1.clone() - p2.clone()) / (S::from_int(15) * p1.clone())
}

/// Second-order output of the single-detector experiment with the y branch
/// undetected: the conditional state is proportional to
/// `(3−η²)|0⟩⟨0| + |Ψ⟩⟨Ψ|` and the fidelity is `1/(4−η²)`.
pub fn single_detector_undetected_y<S: Scalar>(
    p: &S,
    eta_c_sq: &S,
) -> Result<(DensityOperator<S>, S), Error> {
    let config = ExperimentConfig::single_detector(p.clone(), eta_c_sq.clone())?;
    let rho = build_output_state(&config)?;
    let ideal = config.ideal_state()?;
    let f = fidelity(&rho, &ideal)?;
    Ok((rho.total(), f))
}

/// Third-order fidelity closed form for equal detector efficiencies and
/// equal sources (single detector, y branch undetected):
/// `F = [4 + p(2−η²)²] / [4(4−η²) + p(80 − 76η² + 34η⁴ − 3η⁶)]`.
pub fn f3_formula<S: Scalar>(p: &S, eta_sq: &S) -> S {
    let e = eta_sq.clone();
    let e2 = e.clone() * e.clone();
    let e3 = e2.clone() * e.clone();
    let two_minus = S::from_int(2) - e.clone();
    let num = S::from_int(4) + p.clone() * two_minus.clone() * two_minus;
    let den_poly = S::from_int(80) - S::from_int(76) * e.clone() + S::from_int(34) * e2
        - S::from_int(3) * e3;
    let den = S::from_int(4) * (S::from_int(4) - e) + p.clone() * den_poly;
    num / den
}

/// Relative fidelity change between two cascade efficiencies at second
/// order: `(F(η₊²) − F(η₋²)) / F(η₊²) = Δη² / (2 − η₋²)`.
pub fn efficiency_sensitivity<S: Scalar>(eta_minus_sq: &S, eta_plus_sq: &S) -> S {
    (eta_plus_sq.clone() - eta_minus_sq.clone()) / (S::from_int(2) - eta_minus_sq.clone())
}

/// Source imbalance needed for fidelity 3/4 in the single-detector,
/// undetected-y setup: `p2 ≥ 3(3−η²)·p1`.
pub fn required_p2<S: Scalar>(p1: &S, eta_c_sq: &S) -> S {
    S::from_int(3) * (S::from_int(3) - eta_c_sq.clone()) * p1.clone()
}

/// Pump amplitude ratio realizing `p2 = x·p1`: `tanh(κ2·t)/tanh(κ1·t) = √x`.
pub fn pump_ratio<S: Scalar>(x: &S) -> Result<S, Error> {
    x.try_sqrt()
}

/// The vacuum/signal ratio implied by the constructive cascade model at
/// second order; agrees with the pipeline for every cascade configuration.
pub fn second_order_vacuum_signal_constructive<S: Scalar>(
    n: u32,
    p1: &S,
    p2: &S,
    eta_c_sq: &S,
    y_policy: YModePolicy,
    topology: CascadeTopology,
) -> S {
    let two_photon =
        cascade_effective_coefficient_with_topology(n as usize, 2, eta_c_sq, topology);
    let y_factor = match y_policy {
        YModePolicy::ConditionNoClick => S::one() - eta_c_sq.clone(),
        YModePolicy::TraceOut => S::one(),
    };
    let vac = two_photon + eta_c_sq.clone() * y_factor;
    p1.clone() * vac / (eta_c_sq.clone() * p2.clone())
}

/// Demonstrates that a mixture has no privileged decomposition: the vacuum
/// partition `α²|0⟩⟨0| + β²|Ψ⟩⟨Ψ|` and the vacuum-free partition
/// `½|ψ₁⟩⟨ψ₁| + ½|ψ₂⟩⟨ψ₂|` with `ψ₁,₂ = α|0⟩ ± β|Ψ⟩` are the same operator.
///
/// The cross terms `αβ(|0⟩⟨Ψ| + |Ψ⟩⟨0|)` are tracked with `αβ` as a formal
/// symbol, so the cancellation is verified without leaving the exact ring
/// even when `αβ` itself is irrational.
pub fn partition_demo<S: Scalar>(
    alpha_sq: &S,
    beta_sq: &S,
    ideal: &IdealState<S>,
) -> Result<(DensityOperator<S>, DensityOperator<S>, bool), Error> {
    if alpha_sq.is_negative() || beta_sq.is_negative() {
        return Err(Error::invalid("alpha_sq", "weights must be non-negative"));
    }
    if !(alpha_sq.clone() + beta_sq.clone()).approx_eq(&S::one()) {
        return Err(Error::invalid("alpha_sq", "weights must sum to one"));
    }
    let vac = Ket::vacuum(Convention::DividedPower);
    let psi = ideal.psi().clone();
    let o_vac = DensityOperator::outer(&vac);
    let o_psi = DensityOperator::outer(&psi);
    let cross = DensityOperator::outer_pair(&vac, &psi).plus(&DensityOperator::outer_pair(&psi, &vac));

    let rho = o_vac
        .scaled(alpha_sq)
        .plus(&o_psi.scaled(beta_sq))
        .with_normalization(Normalization::TraceOne);

    // ½|ψ₁⟩⟨ψ₁| + ½|ψ₂⟩⟨ψ₂| expanded bilinearly; the αβ coefficient of each
    // component is ±1, mixed with weight ½ each.
    let half = S::from_ratio(1, 2);
    let pure_part = o_vac
        .scaled(&(alpha_sq.clone() * (half.clone() + half.clone())))
        .plus(&o_psi.scaled(&(beta_sq.clone() * (half.clone() + half.clone()))));
    let cross_coeff = half.clone() * S::one() + half * (-S::one());
    let rho_prime = pure_part
        .plus(&cross.scaled(&cross_coeff))
        .with_normalization(Normalization::TraceOne);

    let equal = rho_prime == rho && cross_coeff.is_zero();
    Ok((rho, rho_prime, equal))
}

/// True when the output carries no coherence between different photon
/// numbers: no cross-sector remnants survived the trace and every block
/// `(i, j)` holds only `j`-photon entries on both sides.
pub fn cross_term_check<S: Scalar>(rho: &OrderedDensity<S>) -> bool {
    if !rho.coherences().is_empty() {
        return false;
    }
    rho.blocks().all(|(&(_, j), dm)| {
        dm.entries().all(|((ket, bra), _)| {
            ket.total_photons() == j && bra.total_photons() == j
        })
    })
}

//! Photon-pair source statistics.
//!
//! A weak down-conversion source emits `n` pairs with probability
//! `P(n) = (n+1) r^{2n} (1−r²)²` where `r = tanh τ` and τ is the scaled
//! interaction time. Exact arithmetic parametrizes the source directly by a
//! rational `r`; the vacuum prefactor `e^{−2q}` with `q = 2 ln cosh τ` is
//! carried through the identity `e^{−2q} = (1−r²)²`, which keeps the whole
//! distribution rational.


use crate::error::Error;
use crate::fock::{Convention, Ket, ModeId};
use crate::optics::l_plus;
use crate::scalar::{factorial, Scalar};

/// Derived source parameters in float mode, all functions of the scaled
/// interaction time τ.
#[derive(Clone, Copy, Debug)]
pub struct PdcParams {
    pub tau: f64,
    /// `tanh τ`, the pair amplitude.
    pub r: f64,
    /// `2 ln cosh τ`.
    pub q: f64,
    /// `2r²`, the single-pair probability.
    pub p: f64,
}

impl PdcParams {
    pub fn from_tau(tau: f64) -> Self {
        let r = tau.tanh();
        PdcParams {
            tau,
            r,
            q: 2.0 * tau.cosh().ln(),
            p: 2.0 * r * r,
        }
    }

    /// Recovers τ from a pair probability `p = 2 tanh² τ`.
    pub fn from_pair_probability(p: f64) -> Self {
        let r = (p / 2.0).sqrt();
        PdcParams::from_tau(r.atanh())
    }
}

/// One down-conversion source: a pair of polarization modes on each side and
/// a pair amplitude `r`, truncated at `max_pairs`.
#[derive(Clone, Debug)]
pub struct SourceSpec<S: Scalar> {
    pub pair_a: (ModeId, ModeId),
    pub pair_b: (ModeId, ModeId),
    pub r: S,
    pub max_pairs: u32,
}

/// The truncated source state `Σ_{l≤K} (r^l/l!) L₊^l |0⟩`.
///
/// The overall factor `e^{−q}` is dropped; it is common to every branch and
/// cancels in all conditional quantities.
pub fn pdc_state<S: Scalar>(spec: &SourceSpec<S>, cap: u32) -> Result<Ket<S>, Error> {
    if 2 * spec.max_pairs > cap {
        return Err(Error::PhotonCapExceeded {
            cap,
            found: 2 * spec.max_pairs,
        });
    }
    let mut out = Ket::zero(Convention::DividedPower);
    let mut level = Ket::vacuum(Convention::DividedPower);
    let mut weight = S::one();
    out = out.plus(&level);
    for l in 1..=spec.max_pairs {
        level = l_plus(&level, spec.pair_a, spec.pair_b)?;
        weight = weight * spec.r.clone() / S::from_int(i64::from(l));
        out = out.plus(&level.scaled(&weight));
    }
    Ok(out)
}

/// `P(n) = (n+1)·r^{2n}·(1−r²)²`, the probability of `n` pairs.
pub fn p_pdc<S: Scalar>(n: u32, r: &S) -> Result<S, Error> {
    let r_abs_ok = r.clone() * r.clone();
    if (S::one() - r_abs_ok.clone()).sign() <= 0 {
        return Err(Error::invalid("r", "pair amplitude requires r² < 1"));
    }
    let vac = (S::one() - r_abs_ok.clone()) * (S::one() - r_abs_ok.clone());
    Ok(S::from_int(i64::from(n) + 1) * r_abs_ok.powi(n) * vac)
}

/// Poisson weight `pⁿ/n!`, times `e^{−p}` in float mode. Exact mode leaves
/// the transcendental `e^{−p}` as an implicit common prefactor.
pub fn p_poisson<S: Scalar>(n: u32, p: &S) -> Result<S, Error> {
    if p.is_negative() {
        return Err(Error::invalid("p", "probability must be non-negative"));
    }
    let base = p.powi(n) / factorial::<S>(n);
    match S::from_f64((-p.to_f64()).exp()) {
        Some(damping) => Ok(base * damping),
        None => Ok(base),
    }
}

/// Small-`p` squared statistical distance between the pair distribution and
/// the Poisson distribution with the same mean, summed over `n = 1..=n_max`
/// with the Poisson weights as base measure:
/// `ds² = Σ (P_pair(n) − P_poisson(n))² / P_poisson(n)`.
///
/// Uses the small-`p` forms `P_pair(n) = (n+1)(p/2)ⁿ e^{−p}` and
/// `P_poisson(n) = pⁿ e^{−p}/n!`; in exact mode the common `e^{−p}` factor is
/// dropped, in float mode it is included.
pub fn statistical_distance_sq<S: Scalar>(p: &S, n_max: u32) -> Result<S, Error> {
    if p.sign() <= 0 {
        return Err(Error::invalid("p", "pair probability must be positive"));
    }
    let mut acc = S::zero();
    for n in 1..=n_max {
        let pair = S::from_int(i64::from(n) + 1) * p.half().powi(n);
        let poisson = p.powi(n) / factorial::<S>(n);
        let diff = pair - poisson.clone();
        acc = acc + diff.clone() * diff / poisson;
    }
    if let Some(damping) = S::from_f64((-p.to_f64()).exp()) {
        acc = acc * damping;
    }
    Ok(acc)
}

/// Samplings needed to tell the two distributions apart: `8/p²`.
pub fn distinguishability_trials<S: Scalar>(p: &S) -> Result<S, Error> {
    let p2 = p.clone() * p.clone();
    Ok(S::from_int(8) * p2.inv()?)
}

/// Average trials for a simultaneous pair from both sources: `1/p²`.
pub fn expected_trials<S: Scalar>(p: &S) -> Result<S, Error> {
    let p2 = p.clone() * p.clone();
    p2.inv()
}

#[cfg(test)]
mod tests {
    use super::*;
    #[allow(unused_imports)]
    use num::traits::{One, Zero};
    use crate::fock::modes;
    use crate::optics::{pair_state_norm_sq, pair_state_unnormalized};
    use crate::scalar::ExactScalar;

    fn ex(n: i64, d: i64) -> ExactScalar {
        ExactScalar::from_ratio(n, d)
    }

    fn source(r: ExactScalar, k: u32) -> SourceSpec<ExactScalar> {
        SourceSpec {
            pair_a: (modes::a_x(), modes::a_y()),
            pair_b: (modes::b_x(), modes::b_y()),
            r,
            max_pairs: k,
        }
    }

    #[test]
    fn zero_pairs_is_vacuum() {
        let s = pdc_state(&source(ex(1, 10), 0), 6).unwrap();
        assert_eq!(s, Ket::vacuum(Convention::DividedPower));
    }

    #[test]
    fn single_pair_overlap_is_two_r_squared() {
        // |⟨Φ¹|state⟩|² = 2r² (for any truncation ≥ 1)
        let r = ex(1, 10);
        let s = pdc_state(&source(r.clone(), 1), 6).unwrap();
        let phi1 = pair_state_unnormalized::<ExactScalar>(
            1,
            (modes::a_x(), modes::a_y()),
            (modes::b_x(), modes::b_y()),
        )
        .unwrap();
        // ⟨Φ¹| = L₊|0⟩/√2 ⟹ |⟨Φ¹|s⟩|² = ⟨L₊0|s⟩²/2
        let ip = phi1.inner_product(&s).unwrap();
        let overlap_sq = ip.clone() * ip / pair_state_norm_sq::<ExactScalar>(1);
        assert_eq!(overlap_sq, ex(2, 1) * r.clone() * r);
    }

    #[test]
    fn second_order_coefficient_is_r_sq_half() {
        // the L₊²|0⟩ component enters with weight r²/2
        let r = ex(1, 7);
        let s = pdc_state(&source(r.clone(), 2), 6).unwrap();
        let l2 = pair_state_unnormalized::<ExactScalar>(
            2,
            (modes::a_x(), modes::a_y()),
            (modes::b_x(), modes::b_y()),
        )
        .unwrap();
        // project: ⟨L₊²0|s⟩ / ‖L₊²0‖² = r²/2
        let proj = l2.inner_product(&s).unwrap() / pair_state_norm_sq::<ExactScalar>(2);
        assert_eq!(proj, r.clone() * r / ex(2, 1));
    }

    #[test]
    fn cap_exceeded() {
        assert!(matches!(
            pdc_state(&source(ex(1, 10), 4), 6).unwrap_err(),
            Error::PhotonCapExceeded { .. }
        ));
    }

    #[test]
    fn pair_distribution_values() {
        assert_eq!(p_pdc::<ExactScalar>(0, &ex(0, 1)).unwrap(), ex(1, 1));
        // P(1)/P(0) = 2r²; at r² = 1/100 the ratio is 1/50
        let r = ex(1, 10);
        let ratio = p_pdc(1, &r).unwrap() / p_pdc(0, &r).unwrap();
        assert_eq!(ratio, ex(1, 50));
        assert!(p_pdc::<ExactScalar>(0, &ex(1, 1)).is_err());
    }

    #[test]
    fn pair_distribution_sums_to_one() {
        // closed form: Σ (n+1)xⁿ = (1−x)⁻², so the partial sum approaches 1
        // with tail x^{N+1}[(N+2)−(N+1)x]
        let r = ex(1, 10);
        let mut sum = ExactScalar::zero();
        for n in 0..=200 {
            sum = sum + p_pdc(n, &r).unwrap();
        }
        let defect = ExactScalar::from_int(1) - sum;
        assert!(defect.is_positive());
        // far below 10⁻³⁰
        let bound = ExactScalar::from_int(10).powi(30).inv().unwrap();
        assert!((bound - defect).is_positive());
    }

    #[test]
    fn consistency_of_state_and_distribution() {
        // |⟨Φⁿ|pdc_state⟩|²·(1−r²)² = P(n) for n ≤ 3
        let r = ex(1, 5);
        let s = pdc_state(&source(r.clone(), 3), 6).unwrap();
        let pair_a = (modes::a_x(), modes::a_y());
        let pair_b = (modes::b_x(), modes::b_y());
        let vac = (ExactScalar::from_int(1) - r.clone() * r.clone())
            * (ExactScalar::from_int(1) - r.clone() * r.clone());
        for n in 0..=3u32 {
            let phi = pair_state_unnormalized::<ExactScalar>(n, pair_a, pair_b).unwrap();
            let ip = phi.inner_product(&s).unwrap();
            let overlap_sq = ip.clone() * ip / pair_state_norm_sq::<ExactScalar>(n);
            assert_eq!(overlap_sq * vac.clone(), p_pdc(n, &r).unwrap());
        }
    }

    #[test]
    fn poisson_values() {
        assert_eq!(p_poisson::<ExactScalar>(0, &ex(0, 1)).unwrap(), ex(1, 1));
        // float mode: n = 2, p = 1/10 → (1/200)·e^{−1/10} ≈ 0.004524
        let v = p_poisson::<f64>(2, &0.1).unwrap();
        assert!((v - 0.004524187090179798).abs() < 1e-15);
        // partial sums approach 1 in float mode
        let p = 0.3;
        let total: f64 = (0..40).map(|n| p_poisson::<f64>(n, &p).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn statistical_distance_leading_order() {
        // ds²·8/p² → 1 for small p; within 1% at p = 10⁻³
        let p = 1e-3_f64;
        let ds2 = statistical_distance_sq(&p, 10).unwrap();
        let scaled = ds2 * 8.0 / (p * p);
        assert!((scaled - 1.0).abs() < 0.01, "got {scaled}");
        // n_max = 1: the first-order differences vanish identically
        let zero = statistical_distance_sq(&p, 1).unwrap();
        assert_eq!(zero, 0.0);
        // exact mode agrees (without the e^{−p} prefactor)
        let ds2_exact = statistical_distance_sq(&ex(1, 1000), 10).unwrap();
        let scaled_exact = ds2_exact * ex(8, 1) * ex(1000 * 1000, 1);
        assert!((scaled_exact.to_f64() - 1.0).abs() < 0.01);
    }

    #[test]
    fn statistical_distance_stabilizes() {
        let p = 1e-3_f64;
        let d3 = statistical_distance_sq(&p, 3).unwrap();
        let d10 = statistical_distance_sq(&p, 10).unwrap();
        assert!(((d10 - d3) / d10).abs() < 1e-3);
    }

    #[test]
    fn trial_counts() {
        assert_eq!(
            distinguishability_trials(&ex(1, 100)).unwrap(),
            ExactScalar::from_int(80000)
        );
        assert_eq!(
            distinguishability_trials(&ex(1, 1)).unwrap(),
            ExactScalar::from_int(8)
        );
        assert_eq!(expected_trials(&ex(1, 100)).unwrap(), ExactScalar::from_int(10000));
        assert_eq!(expected_trials(&ex(1, 1)).unwrap(), ExactScalar::from_int(1));
        // the ratio is 8 for every p
        for p in [ex(1, 3), ex(1, 50), ex(9, 10)] {
            let ratio = distinguishability_trials(&p).unwrap() / expected_trials(&p).unwrap();
            assert_eq!(ratio, ExactScalar::from_int(8));
        }
    }

    #[test]
    fn tau_parametrization_roundtrip() {
        let params = PdcParams::from_pair_probability(1e-2);
        assert!((params.p - 1e-2).abs() < 1e-15);
        assert!((params.r - params.tau.tanh()).abs() < 1e-15);
        assert!((params.q - 2.0 * params.tau.cosh().ln()).abs() < 1e-15);
    }
}

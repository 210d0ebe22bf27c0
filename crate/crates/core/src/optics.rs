//! Linear-optical elements acting on kets.
//!
//! Elements are implemented as substitutions on creation operators applied
//! term by term (binomial expansion); with a dozen modes in play, reified
//! matrices would be hopeless while every element used here is a low-degree
//! polynomial in ladder operators.

use crate::error::Error;
use crate::fock::{Convention, Ket, ModeId};
use crate::scalar::{binomial, factorial, Scalar};

/// A two-mode beam splitter with amplitude transmission `eta`:
/// `out_c = η·in_a + η̃·in_b`, `out_d = η̃·in_a − η·in_b`, `η² + η̃² = 1`.
#[derive(Clone, Debug)]
pub struct BeamSplitterSpec<S: Scalar> {
    pub in_a: ModeId,
    pub in_b: ModeId,
    pub out_c: ModeId,
    pub out_d: ModeId,
    pub eta: S,
    pub eta_tilde: S,
}

impl<S: Scalar> BeamSplitterSpec<S> {
    pub fn new(
        in_a: ModeId,
        in_b: ModeId,
        out_c: ModeId,
        out_d: ModeId,
        eta: S,
        eta_tilde: S,
    ) -> Result<Self, Error> {
        let sum = eta.clone() * eta.clone() + eta_tilde.clone() * eta_tilde.clone();
        if !sum.approx_eq(&S::one()) {
            return Err(Error::invalid("eta", "beam splitter requires η² + η̃² = 1"));
        }
        Ok(BeamSplitterSpec {
            in_a,
            in_b,
            out_c,
            out_d,
            eta,
            eta_tilde,
        })
    }

    pub fn fifty_fifty(in_a: ModeId, in_b: ModeId, out_c: ModeId, out_d: ModeId) -> Self {
        let h = S::sqrt2().half(); // 1/√2
        BeamSplitterSpec::new(in_a, in_b, out_c, out_d, h.clone(), h).expect("unit")
    }
}

/// A polarization rotation on a mode pair `(x, y)` by an angle with the given
/// cosine/sine, `cos² + sin² = 1`.
#[derive(Clone, Debug)]
pub struct PolarizationRotation<S: Scalar> {
    pub mode_x: ModeId,
    pub mode_y: ModeId,
    pub cos: S,
    pub sin: S,
}

impl<S: Scalar> PolarizationRotation<S> {
    pub fn new(mode_x: ModeId, mode_y: ModeId, cos: S, sin: S) -> Result<Self, Error> {
        let sum = cos.clone() * cos.clone() + sin.clone() * sin.clone();
        if !sum.approx_eq(&S::one()) {
            return Err(Error::invalid("theta", "rotation requires cos² + sin² = 1"));
        }
        Ok(PolarizationRotation {
            mode_x,
            mode_y,
            cos,
            sin,
        })
    }
}

fn check_output_modes<S: Scalar>(
    ket: &Ket<S>,
    inputs: [ModeId; 2],
    outputs: [ModeId; 2],
) -> Result<(), Error> {
    let occupied = ket.occupied_modes();
    for out in outputs {
        if !inputs.contains(&out) && occupied.contains(&out) {
            return Err(Error::ModeCollision(out));
        }
    }
    Ok(())
}

/// Rewrites each basis term under a linear substitution on two creation
/// operators: `a† → m00·c† + m01·d†`, `b† → m10·c† + m11·d†`.
fn substitute_pair<S: Scalar>(
    ket: &Ket<S>,
    in_a: ModeId,
    in_b: ModeId,
    out_c: ModeId,
    out_d: ModeId,
    m: [[S; 2]; 2],
) -> Ket<S> {
    assert_eq!(
        ket.convention(),
        Convention::DividedPower,
        "optical elements act on divided-power kets"
    );
    let mut out = Ket::zero(ket.convention());
    for (basis, coeff) in ket.terms() {
        let na = basis.occupation(in_a);
        let nb = basis.occupation(in_b);
        let rest = basis.with_occupation(in_a, 0).with_occupation(in_b, 0);
        // (m00 c† + m01 d†)^na (m10 c† + m11 d†)^nb / (na! nb!)
        for i in 0..=na {
            let part_a = binomial::<S>(na, i)
                * m[0][0].powi(i)
                * m[0][1].powi(na - i);
            if part_a.is_zero() {
                continue;
            }
            for j in 0..=nb {
                let part_b = binomial::<S>(nb, j)
                    * m[1][0].powi(j)
                    * m[1][1].powi(nb - j);
                if part_b.is_zero() {
                    continue;
                }
                let nc = i + j;
                let nd = na - i + nb - j;
                // c†^nc d†^nd = nc! nd! · e_nc e_nd
                let conv = factorial::<S>(nc) * factorial::<S>(nd)
                    / (factorial::<S>(na) * factorial::<S>(nb));
                let target = rest
                    .with_occupation(out_c, rest.occupation(out_c) + nc)
                    .with_occupation(out_d, rest.occupation(out_d) + nd);
                out.add_term(
                    target,
                    coeff.clone() * part_a.clone() * part_b * conv,
                );
            }
        }
    }
    out
}

/// Applies the beam splitter to a ket, relabeling the input modes to the
/// output modes. Unitary: the squared norm is preserved.
pub fn beam_splitter<S: Scalar>(ket: &Ket<S>, spec: &BeamSplitterSpec<S>) -> Result<Ket<S>, Error> {
    check_output_modes(ket, [spec.in_a, spec.in_b], [spec.out_c, spec.out_d])?;
    // Inverting out = M·in for the involutory M of the splitter gives the
    // same matrix acting on creation operators.
    let m = [
        [spec.eta.clone(), spec.eta_tilde.clone()],
        [spec.eta_tilde.clone(), -spec.eta.clone()],
    ];
    Ok(substitute_pair(
        ket, spec.in_a, spec.in_b, spec.out_c, spec.out_d, m,
    ))
}

/// Rotates the polarization pair in place:
/// `x† → cos·x† + sin·y†`, `y† → −sin·x† + cos·y†`.
pub fn polarization_rotation<S: Scalar>(
    ket: &Ket<S>,
    rot: &PolarizationRotation<S>,
) -> Result<Ket<S>, Error> {
    let m = [
        [rot.cos.clone(), rot.sin.clone()],
        [-rot.sin.clone(), rot.cos.clone()],
    ];
    Ok(substitute_pair(
        ket, rot.mode_x, rot.mode_y, rot.mode_x, rot.mode_y, m,
    ))
}

/// Applies the pair-creation operator `a_x†b_y† − a_y†b_x†` for the two
/// polarization pairs `pair_a = (a_x, a_y)` and `pair_b = (b_x, b_y)`.
pub fn l_plus<S: Scalar>(
    ket: &Ket<S>,
    pair_a: (ModeId, ModeId),
    pair_b: (ModeId, ModeId),
) -> Result<Ket<S>, Error> {
    let all = [pair_a.0, pair_a.1, pair_b.0, pair_b.1];
    for (i, m) in all.iter().enumerate() {
        if all[i + 1..].contains(m) {
            return Err(Error::invalid("modes", "pair creation needs four distinct modes"));
        }
    }
    let t1 = ket.apply_creation(pair_a.0)?.apply_creation(pair_b.1)?;
    let t2 = ket.apply_creation(pair_a.1)?.apply_creation(pair_b.0)?;
    Ok(t1.plus(&t2.scaled(&-S::one())))
}

/// `L₊ⁿ|0⟩`, unnormalized.
pub fn pair_state_unnormalized<S: Scalar>(
    n: u32,
    pair_a: (ModeId, ModeId),
    pair_b: (ModeId, ModeId),
) -> Result<Ket<S>, Error> {
    let mut ket = Ket::vacuum(Convention::DividedPower);
    for _ in 0..n {
        ket = l_plus(&ket, pair_a, pair_b)?;
    }
    Ok(ket)
}

/// The squared norm of `L₊ⁿ|0⟩`, which is `n!(n+1)!` (the inverse of the
/// normalization constant squared of the n-pair state).
pub fn pair_state_norm_sq<S: Scalar>(n: u32) -> S {
    factorial::<S>(n) * factorial::<S>(n + 1)
}

/// The normalized n-pair state. In exact arithmetic the normalizer
/// `1/√(n!(n+1)!)` is only representable for some `n` (0, 1, 3, ...); other
/// orders report an error and callers fall back to the unnormalized state
/// plus [`pair_state_norm_sq`].
pub fn phi_n<S: Scalar>(
    n: u32,
    pair_a: (ModeId, ModeId),
    pair_b: (ModeId, ModeId),
    cap: u32,
) -> Result<Ket<S>, Error> {
    if 2 * n > cap {
        return Err(Error::PhotonCapExceeded {
            cap,
            found: 2 * n,
        });
    }
    let raw = pair_state_unnormalized::<S>(n, pair_a, pair_b)?;
    let norm = pair_state_norm_sq::<S>(n).inv()?.try_sqrt()?;
    Ok(raw.scaled(&norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    #[allow(unused_imports)]
    use num::traits::{One, Zero};
    use crate::fock::BasisKet;
    use crate::fock::modes;
    use crate::scalar::ExactScalar;

    type K = Ket<ExactScalar>;

    fn ax_ay() -> (ModeId, ModeId) {
        (modes::a_x(), modes::a_y())
    }
    fn bx_by() -> (ModeId, ModeId) {
        (modes::b_x(), modes::b_y())
    }

    fn half_sqrt2() -> ExactScalar {
        use crate::scalar::Scalar;
        ExactScalar::sqrt2().half()
    }

    #[test]
    fn single_photon_splits_evenly() {
        let a = modes::a_x();
        let spec = BeamSplitterSpec::fifty_fifty(a, modes::b_x(), modes::c_x(), modes::d_x());
        let one = K::vacuum(Convention::DividedPower).apply_creation(a).unwrap();
        let out = beam_splitter(&one, &spec).unwrap();
        let c1 = BasisKet::vacuum().raised(modes::c_x());
        let d1 = BasisKet::vacuum().raised(modes::d_x());
        assert_eq!(out.coefficient(&c1), half_sqrt2());
        assert_eq!(out.coefficient(&d1), half_sqrt2());
        assert_eq!(out.squared_norm(), ExactScalar::from_int(1));
    }

    #[test]
    fn two_photon_interference_cancels_coincidence() {
        // One photon per input port: the coincidence term vanishes and the
        // output is (|2,0⟩ − |0,2⟩)/√2.
        let spec = BeamSplitterSpec::fifty_fifty(
            modes::a_x(),
            modes::b_x(),
            modes::c_x(),
            modes::d_x(),
        );
        let ket = K::vacuum(Convention::DividedPower)
            .apply_creation(modes::a_x())
            .unwrap()
            .apply_creation(modes::b_x())
            .unwrap();
        let out = beam_splitter(&ket, &spec).unwrap();
        let coincidence = BasisKet::vacuum().raised(modes::c_x()).raised(modes::d_x());
        assert!(out.coefficient(&coincidence).is_zero());
        let two_c = BasisKet::vacuum().raised(modes::c_x()).raised(modes::c_x());
        let two_d = BasisKet::vacuum().raised(modes::d_x()).raised(modes::d_x());
        // divided-power coefficient 1 on e₂ means physical amplitude 1/√2
        assert_eq!(out.coefficient(&two_c), ExactScalar::from_int(1));
        assert_eq!(out.coefficient(&two_d), ExactScalar::from_int(-1));
        assert_eq!(out.squared_norm(), ExactScalar::from_int(1));
    }

    #[test]
    fn vacuum_passes_through() {
        let spec = BeamSplitterSpec::fifty_fifty(
            modes::a_x(),
            modes::b_x(),
            modes::c_x(),
            modes::d_x(),
        );
        let v = K::vacuum(Convention::DividedPower);
        assert_eq!(beam_splitter(&v, &spec).unwrap(), v);
    }

    #[test]
    fn non_unit_splitter_rejected() {
        let r = BeamSplitterSpec::new(
            modes::a_x(),
            modes::b_x(),
            modes::c_x(),
            modes::d_x(),
            ExactScalar::from_ratio(1, 2),
            ExactScalar::from_ratio(1, 2),
        );
        assert!(r.is_err());
    }

    #[test]
    fn output_collision_rejected() {
        let spec = BeamSplitterSpec::fifty_fifty(
            modes::a_x(),
            modes::b_x(),
            modes::c_x(),
            modes::d_x(),
        );
        let ket = K::vacuum(Convention::DividedPower)
            .apply_creation(modes::a_x())
            .unwrap()
            .apply_creation(modes::c_x())
            .unwrap();
        assert_eq!(
            beam_splitter(&ket, &spec).unwrap_err(),
            Error::ModeCollision(modes::c_x())
        );
    }

    #[test]
    fn rotation_identity_and_inverse() {
        let one = ExactScalar::from_int(1);
        let zero = ExactScalar::from_int(0);
        let id = PolarizationRotation::new(modes::a_x(), modes::a_y(), one, zero).unwrap();
        let ket = K::vacuum(Convention::DividedPower)
            .apply_creation(modes::a_x())
            .unwrap()
            .apply_creation(modes::a_y())
            .unwrap()
            .apply_creation(modes::a_y())
            .unwrap();
        assert_eq!(polarization_rotation(&ket, &id).unwrap(), ket);

        let rot = PolarizationRotation::new(
            modes::a_x(),
            modes::a_y(),
            ExactScalar::from_ratio(3, 5),
            ExactScalar::from_ratio(4, 5),
        )
        .unwrap();
        let inv = PolarizationRotation::new(
            modes::a_x(),
            modes::a_y(),
            ExactScalar::from_ratio(3, 5),
            ExactScalar::from_ratio(-4, 5),
        )
        .unwrap();
        let there = polarization_rotation(&ket, &rot).unwrap();
        assert_eq!(there.squared_norm(), ket.squared_norm());
        let back = polarization_rotation(&there, &inv).unwrap();
        assert_eq!(back, ket);
    }

    #[test]
    fn rotation_of_single_photon() {
        let rot = PolarizationRotation::new(
            modes::a_x(),
            modes::a_y(),
            ExactScalar::from_ratio(3, 5),
            ExactScalar::from_ratio(4, 5),
        )
        .unwrap();
        let ket = K::vacuum(Convention::DividedPower)
            .apply_creation(modes::a_x())
            .unwrap();
        let out = polarization_rotation(&ket, &rot).unwrap();
        let x1 = BasisKet::vacuum().raised(modes::a_x());
        let y1 = BasisKet::vacuum().raised(modes::a_y());
        assert_eq!(out.coefficient(&x1), ExactScalar::from_ratio(3, 5));
        assert_eq!(out.coefficient(&y1), ExactScalar::from_ratio(4, 5));
    }

    #[test]
    fn pair_creation_makes_singlet() {
        let out = l_plus(
            &K::vacuum(Convention::DividedPower),
            ax_ay(),
            bx_by(),
        )
        .unwrap();
        let t1 = BasisKet::vacuum().raised(modes::a_x()).raised(modes::b_y());
        let t2 = BasisKet::vacuum().raised(modes::a_y()).raised(modes::b_x());
        assert_eq!(out.coefficient(&t1), ExactScalar::from_int(1));
        assert_eq!(out.coefficient(&t2), ExactScalar::from_int(-1));
        assert_eq!(out.num_terms(), 2);
    }

    #[test]
    fn pair_creation_is_linear() {
        let alpha = ExactScalar::from_ratio(3, 7);
        let base = K::vacuum(Convention::DividedPower)
            .apply_creation(modes::a_x())
            .unwrap();
        let lhs = l_plus(&base.scaled(&alpha), ax_ay(), bx_by()).unwrap();
        let rhs = l_plus(&base, ax_ay(), bx_by()).unwrap().scaled(&alpha);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn repeated_modes_rejected() {
        let r = l_plus(
            &K::vacuum(Convention::DividedPower),
            (modes::a_x(), modes::a_y()),
            (modes::a_x(), modes::b_y()),
        );
        assert!(r.is_err());
    }

    #[test]
    fn pair_state_norms() {
        // ‖L₊ⁿ|0⟩‖² = n!(n+1)!
        for n in 0..=3u32 {
            let raw = pair_state_unnormalized::<ExactScalar>(n, ax_ay(), bx_by()).unwrap();
            assert_eq!(raw.squared_norm(), pair_state_norm_sq::<ExactScalar>(n));
        }
    }

    #[test]
    fn normalized_pair_states() {
        // n = 0: vacuum
        let p0 = phi_n::<ExactScalar>(0, ax_ay(), bx_by(), 6).unwrap();
        assert_eq!(p0, K::vacuum(Convention::DividedPower));
        // n = 1: singlet/√2
        let p1 = phi_n::<ExactScalar>(1, ax_ay(), bx_by(), 6).unwrap();
        assert_eq!(p1.squared_norm(), ExactScalar::from_int(1));
        // n = 2: the normalizer 1/√12 leaves the ring
        assert_eq!(
            phi_n::<ExactScalar>(2, ax_ay(), bx_by(), 6).unwrap_err(),
            Error::IrrationalSqrt
        );
        // n = 3: 1/√(3!·4!) = 1/12 is rational again
        let p3 = phi_n::<ExactScalar>(3, ax_ay(), bx_by(), 6).unwrap();
        assert_eq!(p3.squared_norm(), ExactScalar::from_int(1));
        // cap enforcement
        assert!(matches!(
            phi_n::<ExactScalar>(4, ax_ay(), bx_by(), 6).unwrap_err(),
            Error::PhotonCapExceeded { .. }
        ));
    }

    #[test]
    fn pair_states_orthonormal() {
        // ⟨Φⁿ|Φᵐ⟩ = δₙₘ for n,m ≤ 3, checked through the rational route
        // N_n N_m ⟨L₊ⁿ0|L₊ᵐ0⟩ with N² = 1/(n!(n+1)!).
        let states: Vec<K> = (0..=3)
            .map(|n| pair_state_unnormalized(n, ax_ay(), bx_by()).unwrap())
            .collect();
        for n in 0..=3usize {
            for m in 0..=3usize {
                let ip = states[n].inner_product(&states[m]).unwrap();
                if n == m {
                    assert_eq!(ip, pair_state_norm_sq::<ExactScalar>(n as u32));
                } else {
                    assert!(ip.is_zero(), "⟨Φ{n}|Φ{m}⟩ ≠ 0");
                }
            }
        }
    }

    /// `L₋ = a_x b_y − a_y b_x`, the adjoint of the pair creation.
    fn l_minus(ket: &K) -> K {
        let t1 = ket
            .apply_annihilation(modes::a_x())
            .unwrap()
            .apply_annihilation(modes::b_y())
            .unwrap();
        let t2 = ket
            .apply_annihilation(modes::a_y())
            .unwrap()
            .apply_annihilation(modes::b_x())
            .unwrap();
        t1.plus(&t2.scaled(&ExactScalar::from_int(-1)))
    }

    #[test]
    fn su11_closure_on_small_kets() {
        // [L₋, L₊] = N̂ + 2 on every basis occupation of the four modes
        let ms = [modes::a_x(), modes::a_y(), modes::b_x(), modes::b_y()];
        for ax in 0..=2u32 {
            for ay in 0..=2u32 {
                for bx in 0..=2u32 {
                    for by in 0..=2u32 {
                        let total = ax + ay + bx + by;
                        if total > 4 {
                            continue;
                        }
                        let basis = BasisKet::from_occupations(
                            ms.iter().copied().zip([ax, ay, bx, by]),
                        );
                        let ket = K::basis_state(basis, Convention::DividedPower);
                        let raised = l_plus(&ket, (ms[0], ms[1]), (ms[2], ms[3])).unwrap();
                        let lowered = l_minus(&ket);
                        let commutator = l_minus(&raised).plus(
                            &l_plus(&lowered, (ms[0], ms[1]), (ms[2], ms[3]))
                                .unwrap()
                                .scaled(&ExactScalar::from_int(-1)),
                        );
                        let expect = ket.scaled(&ExactScalar::from_int(i64::from(total) + 2));
                        assert_eq!(commutator, expect, "occupations {ax},{ay},{bx},{by}");
                    }
                }
            }
        }
    }

    #[test]
    fn normal_ordered_form_matches_direct_exponential() {
        // Series oracle in the scaled time τ: term-by-term to order τ⁴,
        //   exp[τ(L₊ − L₋)]|0⟩  =  e^{−q(τ)} Σ_l r(τ)^l/l! L₊^l|0⟩
        // with r = τ − τ³/3 + …  and  e^{−q} = 1 − τ² + (2/3)τ⁴ + …
        const ORDER: usize = 5;
        let pair_a = (modes::a_x(), modes::a_y());
        let pair_b = (modes::b_x(), modes::b_y());
        let zero_ket = || K::zero(Convention::DividedPower);

        // left side: c_k = (L₊ − L₋)^k |0⟩ / k!
        let mut lhs: Vec<K> = vec![zero_ket(); ORDER];
        lhs[0] = K::vacuum(Convention::DividedPower);
        for k in 1..ORDER {
            let prev = &lhs[k - 1];
            let applied = l_plus(prev, pair_a, pair_b)
                .unwrap()
                .plus(&l_minus(prev).scaled(&ExactScalar::from_int(-1)));
            lhs[k] = applied.scaled(&ExactScalar::from_ratio(1, k as i64));
        }

        // scalar series arithmetic over τ
        let mul = |a: &[ExactScalar], b: &[ExactScalar]| -> Vec<ExactScalar> {
            let mut out = vec![ExactScalar::zero(); ORDER];
            for (i, ai) in a.iter().enumerate() {
                for (j, bj) in b.iter().enumerate() {
                    if i + j < ORDER {
                        out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
                    }
                }
            }
            out
        };
        let mut r = vec![ExactScalar::zero(); ORDER];
        r[1] = ExactScalar::from_int(1);
        r[3] = ExactScalar::from_ratio(-1, 3);
        let mut exp_neg_q = vec![ExactScalar::zero(); ORDER];
        exp_neg_q[0] = ExactScalar::from_int(1);
        exp_neg_q[2] = ExactScalar::from_int(-1);
        exp_neg_q[4] = ExactScalar::from_ratio(2, 3);

        // right side: e^{−q} Σ_l (r^l/l!) L₊^l|0⟩ as a ket-valued series
        let mut rhs: Vec<K> = vec![zero_ket(); ORDER];
        let mut r_power = vec![ExactScalar::zero(); ORDER];
        r_power[0] = ExactScalar::from_int(1);
        let mut l_power = K::vacuum(Convention::DividedPower);
        for l in 0..ORDER {
            if l > 0 {
                r_power = mul(&r_power, &r);
                l_power = l_plus(&l_power, pair_a, pair_b).unwrap();
            }
            let weight = mul(&r_power, &exp_neg_q);
            let inv_fact = factorial::<ExactScalar>(l as u32).inv().unwrap();
            for (k, w) in weight.iter().enumerate() {
                rhs[k] = rhs[k].plus(&l_power.scaled(&(w.clone() * inv_fact.clone())));
            }
        }

        for k in 0..ORDER {
            assert_eq!(lhs[k], rhs[k], "series order {k}");
        }
    }

    #[test]
    fn three_pair_expansion_matches_closed_form() {
        // Independent oracle: expanding (a_x†b_y† − a_y†b_x†)ⁿ binomially
        // gives the basis term (a_x=m, a_y=n−m, b_x=n−m, b_y=m) with
        // divided-power coefficient (−1)^{n−m}·n!·m!·(n−m)!.
        let n = 3u32;
        let raw = pair_state_unnormalized::<ExactScalar>(n, ax_ay(), bx_by()).unwrap();
        let mut expected = K::zero(Convention::DividedPower);
        for m in 0..=n {
            let basis = BasisKet::from_occupations([
                (modes::a_x(), m),
                (modes::a_y(), n - m),
                (modes::b_x(), n - m),
                (modes::b_y(), m),
            ]);
            let sign = if (n - m).is_multiple_of(2) {
                ExactScalar::from_int(1)
            } else {
                ExactScalar::from_int(-1)
            };
            let coeff = sign
                * factorial::<ExactScalar>(n)
                * factorial::<ExactScalar>(m)
                * factorial::<ExactScalar>(n - m);
            expected.add_term(basis, coeff);
        }
        assert_eq!(raw, expected);
        // and its norm² agrees with 3!·4! = 144 (N₃² = 1/144)
        assert_eq!(raw.squared_norm(), ExactScalar::from_int(144));
    }
}

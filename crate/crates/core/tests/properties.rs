use faer::Mat;
use proptest::prelude::*;

use tlcell::diagram::{
    binomial, enumerate_dense, enumerate_dilute, enumerate_open, glue, standard_dim, DiluteSector, LinkState,
    OpenSector,
};
use tlcell::forms::{diagram_form, dilute_form, formal_q_form, gram_defect, selfadjointness_defect};
use tlcell::linalg::{Matrix, Vector};
use tlcell::models::{build_dilute_t, build_dilute_t_in, build_percolation_h, build_xxz, critical_x, Convention};
use tlcell::observables::{extrapolate_b, fit_inverse_powers, xxz_q};
use tlcell::spectral::{
    extract_jordan_cell, full_spectrum, LevelSelector, SpectrumOrder, CLUSTER_TOL,
};
use tlcell::tl::{build_deformed_rep, build_geometric_rep, build_spin_rep, check_tl_relations, SpinSector};
use tlcell::C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn geometric_reps_satisfy_tl(half in 1usize..4, n in -2.0f64..2.0) {
        let rep = build_geometric_rep(2 * half, c(n)).unwrap();
        prop_assert!(check_tl_relations(&rep).max() < 1e-12);
    }

    #[test]
    fn deformed_reps_satisfy_tl(half in 1usize..4, y in -3.0f64..3.0) {
        let rep = build_deformed_rep(2 * half, c(y)).unwrap();
        prop_assert!(check_tl_relations(&rep).max() < 1e-12);
    }

    #[test]
    fn spin_reps_satisfy_tl(l in 2usize..7, theta in 0.05f64..3.0) {
        let rep = build_spin_rep(l, C64::from_polar(1.0, theta), SpinSector::All).unwrap();
        prop_assert!(check_tl_relations(&rep).max() < 1e-11);
    }

    #[test]
    fn xxz_self_adjoint_under_formal_q(half in 1usize..4, theta in 0.1f64..3.0, seed in 0u64..1000) {
        let m = build_xxz(2 * half, C64::from_polar(1.0, theta), SpinSector::TwiceSz(0)).unwrap();
        let f = formal_q_form(m.operator.basis.clone(), m.dim());
        prop_assert!(selfadjointness_defect(&m.operator, None, &f, 4, seed).unwrap() < 1e-10);
    }

    #[test]
    fn deformed_chain_self_adjoint(half in 1usize..4, y in -3.0f64..3.0) {
        let p = build_percolation_h(2 * half, Some(y)).unwrap();
        let f = diagram_form(p.links().unwrap(), p.operator.basis.clone(), 1.0, y);
        prop_assert!(gram_defect(&p.operator, None, &f).unwrap() < 1e-11);
    }

    #[test]
    fn dilute_left_right_intertwined(l in 1usize..6, x in 0.2f64..0.9) {
        let d = build_dilute_t(l, x).unwrap();
        let f = dilute_form(d.links().unwrap(), d.operator.basis.clone(), 1.0);
        prop_assert!(gram_defect(&d.operator, d.left_operator.as_ref(), &f).unwrap() < 1e-12);
    }

    #[test]
    fn standard_module_dims_sum(half in 1usize..8) {
        let l = 2 * half;
        let open = enumerate_open(l, OpenSector::All).unwrap();
        prop_assert_eq!(open.len() as u64, binomial(l, half));
        let sum: u64 = (0..=half).map(|j| standard_dim(l, 2 * j)).sum();
        prop_assert_eq!(sum, binomial(l, half));
        for j in 0..=half {
            let k = enumerate_open(l, OpenSector::Defects(2 * j)).unwrap().len() as u64;
            prop_assert_eq!(k, standard_dim(l, 2 * j));
        }
    }

    #[test]
    fn parse_display_roundtrip(half in 1usize..6, pick in any::<prop::sample::Index>()) {
        let states = enumerate_dilute(2 * half, DiluteSector::ALL).unwrap();
        let s = pick.get(&states);
        let back = LinkState::parse(&s.to_string()).unwrap();
        prop_assert_eq!(&back, s);
        prop_assert_eq!(&s.reflect().reflect(), s);
    }

    #[test]
    fn gluing_is_symmetric(half in 1usize..5, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), n in 0.1f64..2.0) {
        let states = enumerate_dense(2 * half).unwrap();
        let (a, b) = (i.get(&states), j.get(&states));
        let w1 = glue(a, b).unwrap().weight(n, 1.0);
        let w2 = glue(b, a).unwrap().weight(n, 1.0);
        prop_assert!((w1 - w2).abs() < 1e-12 * w1.abs().max(1.0));
    }

    #[test]
    fn strings_never_increase(l in 1usize..6, x in 0.2f64..0.9) {
        let d = build_dilute_t_in(l, x, DiluteSector::ALL).unwrap();
        let b = d.links().unwrap();
        for (i, j, _) in d.operator.matrix.triplets() {
            prop_assert!(b.get(i).string_count() <= b.get(j).string_count());
        }
    }

    #[test]
    fn spectrum_invariant_under_conjugation(seed in 0u64..500) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = build_xxz(4, xxz_q(), SpinSector::TwiceSz(0)).unwrap();
        let a = h.operator.matrix.to_dense();
        let s = Mat::<C64>::from_fn(6, 6, |i, j| {
            C64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)) + if i == j { c(1.0) } else { c(0.0) }
        });
        let sinv = tlcell::linalg::inverse(s.as_ref()).unwrap();
        let conj = &s * &a * &sinv;
        let r0 = full_spectrum(&Matrix::Dense(a), SpectrumOrder::AscendingReal).unwrap();
        let r1 = full_spectrum(&Matrix::Dense(conj), SpectrumOrder::AscendingReal).unwrap();
        prop_assert_eq!(r0.clusters.len(), r1.clusters.len());
        for (x, y) in r0.clusters.iter().zip(r1.clusters.iter()) {
            prop_assert!((x.value - y.value).norm() < 1e-8);
            prop_assert_eq!(x.eigenvalues.len(), y.eigenvalues.len());
            prop_assert_eq!(x.geometric, y.geometric);
        }
    }

    #[test]
    fn extrapolation_recovers_exact_data(b in -2.0f64..2.0, a in -5.0f64..5.0) {
        let pts: Vec<(usize, f64)> = [4usize, 8, 12, 16].iter().map(|&l| (l, b + a / l as f64)).collect();
        let f = extrapolate_b(&pts).unwrap();
        prop_assert!((f.value - b).abs() < 1e-10);
    }

    #[test]
    fn interpolation_is_exact(cs in prop::collection::vec(-3.0f64..3.0, 4)) {
        let sizes = [6usize, 8, 10, 12];
        let f: Vec<f64> = sizes
            .iter()
            .map(|&l| { let l = l as f64; cs[0] * l + cs[1] + cs[2] / l + cs[3] / (l * l) })
            .collect();
        let fit = fit_inverse_powers(&sizes, &f).unwrap();
        prop_assert!((fit.value - cs[1]).abs() < 1e-9);
        prop_assert!(fit.residual < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    /// Cell equations hold and the pairing of v with w is unchanged by
    /// w -> w + beta v, since v is null under the form.
    #[test]
    fn cell_equations_and_beta_freedom(br in -3.0f64..3.0, bi in -3.0f64..3.0, quarter in 1usize..3) {
        let l = 4 * quarter;
        let m = build_xxz(l, xxz_q(), SpinSector::TwiceSz(0)).unwrap();
        let cell = extract_jordan_cell(&m, LevelSelector::FirstDoublet, None).unwrap();
        let a = &m.operator.matrix;
        let Convention::Hamiltonian { v_f } = m.convention else { unreachable!() };
        let s = C64::new(std::f64::consts::PI * v_f / l as f64, 0.0);
        let (v, w) = (&cell.right.v, &cell.right.w);
        let lam = cell.lambda;
        let r1 = (a.apply(v.as_ref()) - v * faer::Scale(lam)).norm_l2();
        let r2 = (a.apply(w.as_ref()) - w * faer::Scale(lam) - v * faer::Scale(s)).norm_l2();
        prop_assert!(r1 < 1e-10 * a.norm());
        prop_assert!(r2 < 1e-8);
        let f = formal_q_form(m.operator.basis.clone(), m.dim());
        let beta = C64::new(br, bi);
        let shifted: Vector = w + v * faer::Scale(beta);
        let p0 = f.pairing(v.as_ref(), w.as_ref());
        let p1 = f.pairing(v.as_ref(), shifted.as_ref());
        prop_assert!((p0 - p1).norm() < 1e-9 * p0.norm().max(1.0));
        prop_assert!(f.pairing(v.as_ref(), v.as_ref()).norm() < 1e-10);
    }

    #[test]
    fn dilute_cell_left_right_consistent(half in 1usize..4) {
        let m = build_dilute_t(2 * half, critical_x()).unwrap();
        let cell = extract_jordan_cell(&m, LevelSelector::FirstDoublet, None).unwrap();
        let left = cell.left.as_ref().unwrap();
        let lo = &m.left_operator.as_ref().unwrap().matrix;
        let r = (lo.apply(left.v.as_ref()) - &left.v * faer::Scale(cell.lambda)).norm_l2();
        prop_assert!(r < 1e-10 * lo.norm());
    }
}

#[test]
fn cluster_tolerance_is_relative() {
    let t = vec![(0, 0, c(1e6)), (1, 1, c(1e6 * (1.0 + 0.1 * CLUSTER_TOL)))];
    let r = full_spectrum(&Matrix::from_triplets(2, &t), SpectrumOrder::AscendingReal).unwrap();
    assert_eq!(r.clusters.len(), 1);
}

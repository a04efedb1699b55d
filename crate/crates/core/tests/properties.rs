use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::strategy::Strategy as PropStrategy;

use kslab::cluster::series::{exp, log};
use kslab::cluster::{density_series, log_series, SignPattern};
use kslab::configint::{
    anchored_integral, build_table, exact_hardrod_z, quadrature_z, sampled_z, Method, SpatialBox, Strategy,
};
use kslab::ksop::{apply_ks_function, build_ks_matrix};
use kslab::numeric::{xf, Precision};
use kslab::oracle::{tonks_density, tonks_pressure, TonksModel};
use kslab::partition::{zeros, PartitionPolynomial};
use kslab::potential::{Configuration, PairPotential};
use kslab::spectral::{power_convergence, riesz_projection, spectrum, Operator};

fn rods(a: f64, l: f64) -> PartitionPolynomial {
    let m = (l / a).floor() as usize + 1;
    let t = build_table(&PairPotential::hard_core(a), &SpatialBox::interval(l), m, &Strategy::default(), None).unwrap();
    PartitionPolynomial::assemble(&t, None)
}

/// Coefficients of prod_i (1 + z / r_i), r_i > 0.
fn from_roots(r: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for ri in r {
        let mut next = vec![0.0; c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 1] += ck / ri;
        }
        c = next;
    }
    c
}

fn potentials() -> impl PropStrategy<Value = PairPotential> {
    prop_oneof![
        (0.2f64..2.0).prop_map(PairPotential::hard_core),
        Just(PairPotential::ideal()),
        (0.1f64..3.0, 0.2f64..2.0, 0.1f64..2.0).prop_map(|(e, a, b)| PairPotential::positive_step(e, a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mayer_f_range(p in potentials(), r in 0.0f64..5.0) {
        let f = p.mayer_f(r);
        prop_assert!(f >= -1.0);
        if p.is_positive() {
            prop_assert!(f <= 0.0);
        }
    }

    #[test]
    fn energy_is_symmetric_and_stable(
        p in potentials(),
        pts in prop::collection::vec(0.0f64..6.0, 1..8),
        seed in any::<u64>(),
    ) {
        let c = Configuration::line(&pts);
        let mut perm: Vec<usize> = (0..pts.len()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let u = p.total_energy(&c);
        prop_assert_eq!(u, p.total_energy(&c.permuted(&perm)));
        let b = p.stability().unwrap().b;
        prop_assert!(u >= -b * pts.len() as f64);
    }

    #[test]
    fn hard_core_regularity(a in 0.05f64..5.0) {
        prop_assert!((PairPotential::hard_core(a).regularity_c().unwrap().c - 2.0 * a).abs() <= 1e-12 * a);
    }

    #[test]
    fn routes_agree_with_closed_form(a in 0.3f64..1.5, l in 1.0f64..6.0, m in 1usize..=4, seed in 0u64..1000) {
        let p = PairPotential::hard_core(a);
        let bx = SpatialBox::interval(l);
        let exact = exact_hardrod_z(l, a, m);
        let (q, qe) = quadrature_z(&p, &bx, m, 64).unwrap();
        prop_assert!((q - exact).abs() <= qe + 1e-12 * exact.max(1.0), "quadrature {} vs {} (bound {})", q, exact, qe);
        // the Monte Carlo error bar only means something once hits are expected
        prop_assume!(exact / l.powi(m as i32) * f64::from(1 << 14) >= 50.0);
        let (s, se) = sampled_z(&p, &bx, m, 1 << 14, seed).unwrap();
        prop_assert!((s - exact).abs() <= 5.0 * se + 1e-12 * exact.max(1.0), "sampling {} vs {} (se {})", s, exact, se);
    }

    #[test]
    fn hard_rod_integrals_grow_with_length(a in 0.3f64..1.5, l in 0.5f64..8.0, dl in 0.0f64..2.0, m in 0usize..8) {
        prop_assert!(exact_hardrod_z(l + dl, a, m) >= exact_hardrod_z(l, a, m));
        if (m as f64 - 1.0) * a > l {
            prop_assert_eq!(exact_hardrod_z(l, a, m), 0.0);
        }
    }

    #[test]
    fn empty_anchor_reproduces_table(a in 0.3f64..1.5, l in 1.0f64..6.0, m in 0usize..4, quad in any::<bool>()) {
        let p = PairPotential::hard_core(a);
        let bx = SpatialBox::interval(l);
        let s = if quad { Strategy::with(Method::Quadrature) } else { Strategy::default() };
        let t = build_table(&p, &bx, m, &s, None).unwrap();
        let ai = anchored_integral(&p, &bx, &Configuration::empty(1), m, &s).unwrap();
        prop_assert_eq!(ai.value_f64().to_bits(), t.z(m).to_bits());
    }

    #[test]
    fn hard_rod_zeros_are_polished_and_negative(a in 0.4f64..1.5, l in 1.0f64..12.0) {
        let poly = rods(a, l);
        prop_assert!(poly.coeffs_f64().iter().all(|c| *c >= 0.0));
        let zs = zeros(&poly).unwrap();
        for z in &zs.zeros {
            prop_assert!(z.residual <= 1e-12);
            prop_assert!(!(z.z.im == 0.0 && z.z.re >= 0.0));
        }
    }

    #[test]
    fn shift_action(c in prop::collection::vec(0.01f64..3.0, 2..9), m in 0usize..8) {
        let mut coeffs = vec![1.0];
        coeffs.extend(&c);
        let k = build_ks_matrix(&PartitionPolynomial::from_coeffs(&coeffs)).unwrap();
        let dim = k.dim();
        let m = m % dim;
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[m] = C64::new(1.0, 0.0);
        let ke = k.apply(&e);
        prop_assert!((ke[0].re + c[m]).abs() <= 1e-15 * c[m]);
        for i in 1..dim {
            prop_assert_eq!(ke[i], if i == m + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        }
    }

    #[test]
    fn vanishing_kernel_keeps_only_the_removal_term(pts in prop::collection::vec(0.0f64..1.0, 1..4), z in 0.05f64..0.9) {
        let ideal = PairPotential::ideal();
        let bx = SpatialBox::interval(1.0);
        let phi = |c: &Configuration| C64::new(z.powi(c.len() as i32) * (1.0 + c.coords.iter().sum::<f64>()), 0.0);
        let anchor = Configuration::line(&pts);
        let (k, _) = apply_ks_function(&ideal, &bx, &phi, &anchor, 6, &Strategy::default()).unwrap();
        let expect = if pts.len() == 1 { C64::new(0.0, 0.0) } else { phi(&Configuration::line(&pts[1..])) };
        prop_assert!((k - expect).norm() <= 1e-15 * expect.norm().max(1.0));
    }

    #[test]
    fn projection_algebra_and_residue(a in 0.5f64..1.5, l in 2.0f64..12.0) {
        let poly = rods(a, l);
        let op = Operator::Companion(build_ks_matrix(&poly).unwrap());
        let rep = spectrum(&op).unwrap();
        let d = riesz_projection(&op, &rep, None, Precision::Auto).unwrap();
        let def = &d.defects;
        for v in [def.idempotency, def.ps, def.sp, def.resolvent, def.commutator, def.pd, def.dp] {
            prop_assert!(v <= 1e-10, "{:?}", def);
        }
        // P alpha against nu_c* (alpha) nu_c, alpha = e_1
        let (nu, star) = (d.nu_c.clone().unwrap(), d.nu_c_star.clone().unwrap());
        let p_alpha = d.p.col(0);
        let scale = p_alpha.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (pa, n) in p_alpha.iter().zip(&nu) {
            prop_assert!((pa - star[0] * n).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn pole_order_tracks_simplicity(
        inv in prop::collection::btree_set(2u32..40, 1..6),
        double in any::<bool>(),
    ) {
        // dyadic inverse roots keep the coefficients exact, so a double root stays double
        let mut r: Vec<f64> = inv.iter().map(|k| 8.0 / *k as f64).collect();
        if double {
            r.push(8.0 / *inv.last().unwrap() as f64);
        }
        let poly = PartitionPolynomial::from_coeffs(&from_roots(&r));
        let zs = zeros(&poly).unwrap();
        let passes = zs.certificate.as_ref().unwrap().passes;
        prop_assert_eq!(passes, !double);
        let op = Operator::Companion(build_ks_matrix(&poly).unwrap());
        let rep = spectrum(&op).unwrap();
        let d = riesz_projection(&op, &rep, None, Precision::Auto).unwrap();
        prop_assert_eq!(d.pole_order == 1, passes);
    }

    #[test]
    fn power_norms_sit_under_a_geometric_envelope(a in 0.6f64..1.4, l in 3.0f64..10.0) {
        let poly = rods(a, l);
        let op = Operator::Companion(build_ks_matrix(&poly).unwrap());
        let rep = spectrum(&op).unwrap();
        let d = riesz_projection(&op, &rep, None, Precision::Auto).unwrap();
        let pc = power_convergence(&op, &rep, &d, 40);
        prop_assert!(pc.envelope.is_finite());
        for n in 1..=40 {
            prop_assert!(pc.norms[n] <= pc.envelope * pc.expected_ratio.powi(n as i32) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn log_exp_roundtrip(c in prop::collection::vec(-2.0f64..2.0, 1..10)) {
        let mut a = vec![xf(1.0)];
        a.extend(c.iter().map(|x| xf(*x)));
        let e = exp(&log(&a, 24).unwrap(), 24);
        for k in 0..24 {
            let want = a.get(k).map_or(0.0, |x| x.to_f64());
            let got = e[k].to_f64();
            prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "k={} {} vs {}", k, got, want);
        }
    }

    #[test]
    fn hard_rod_density_alternates(a in 0.5f64..1.5, l in 8.0f64..30.0) {
        let poly = rods(a, l);
        let d = density_series(&log_series(&poly, 12).unwrap(), l);
        prop_assert_eq!(kslab::cluster::sign_pattern(&d), SignPattern::Alternating);
    }

    #[test]
    fn ideal_density_is_exact(v in 0.5f64..4.0, m in 12usize..30) {
        let poly = PartitionPolynomial::assemble(&kslab::configint::IntegralTable::ideal(&SpatialBox::interval(v), m), None);
        let d = density_series(&log_series(&poly, m / 2).unwrap(), v);
        prop_assert!((d.value(1) - 1.0).abs() < 1e-14);
        for k in 2..m / 2 {
            prop_assert!(d.value(k).abs() < 1e-12);
        }
    }

    #[test]
    fn pressure_back_substitution(a in 0.1f64..3.0, z in 0.0f64..50.0) {
        let model = TonksModel::new(a).unwrap();
        let w = tonks_pressure(&model, z).unwrap();
        prop_assert!((w * (a * w).exp() - z).abs() <= 1e-13 * z.max(1e-300));
        prop_assert!(tonks_density(&model, z).unwrap() < 1.0 / a);
    }
}

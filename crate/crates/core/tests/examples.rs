//! Worked examples per module, checked against oracles computed here.

use num_complex::Complex64 as C64;

use kslab::cluster::{
    density_bound_check, density_series, log_series, pressure_series, radius_estimate, virial_reversion,
    OracleModel, PowerSeries, RadiusMethod, SignPattern, Variable,
};
use kslab::configint::{
    anchored_integral, build_table, exact_hardrod_z, quadrature_z, sampled_z, IntegralTable, SpatialBox, Strategy,
};
use kslab::ksop::{apply_ks_function, build_ks_matrix, dxi_norm, ks_residual, CoefficientVector};
use kslab::numeric::Precision;
use kslab::oracle::{
    ideal_truncated_zeros, tonks_density, tonks_mayer_coefficients, tonks_pressure, IdealModel, TonksModel,
};
use kslab::partition::{
    correlation, correlation_numerator, smallest_zero, taylor_coefficients, zeros, NumeratorTruncation,
    PartitionPolynomial,
};
use kslab::potential::{Configuration, PairPotential};
use kslab::spectral::{
    coefficient_asymptotics, leading_asymptotics, nilpotent_and_pole, power_convergence, resolvent_apply,
    riesz_projection, spectral_radius_check, spectrum, Operator, PacmanParams,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn tonks(l: f64, m: usize) -> PartitionPolynomial {
    let t = build_table(&PairPotential::hard_core(1.0), &SpatialBox::interval(l), m, &Strategy::default(), None).unwrap();
    PartitionPolynomial::assemble(&t, None)
}

/// Z_m = (L - (m-1) a)_+^m from the ordered-gap substitution.
fn gap_formula(l: f64, a: f64, m: usize) -> f64 {
    (l - (m as f64 - 1.0) * a).max(0.0).powi(m as i32)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

// potential

#[test]
fn potential_values() {
    let hc = PairPotential::hard_core(1.0);
    assert_eq!(hc.phi(0.5), f64::INFINITY);
    assert_eq!(hc.phi(2.0), 0.0);
    assert_eq!(PairPotential::ideal().phi(0.3), 0.0);
    assert_eq!(hc.mayer_f(0.5), -1.0);
    assert_eq!(hc.mayer_f(2.0), 0.0);
    let step = PairPotential::positive_step(0.7, 1.0, 1.3);
    assert!((step.mayer_f(0.4) - ((-1.3f64 * 0.7).exp() - 1.0)).abs() < 1e-15);
    assert_eq!(hc.total_energy(&Configuration::line(&[0.0, 0.4])), f64::INFINITY);
    assert_eq!(hc.total_energy(&Configuration::line(&[0.0, 3.0, 6.0])), 0.0);
    assert_eq!(PairPotential::ideal().total_energy(&Configuration::line(&[0.1, 0.1, 0.2, 0.9, 0.3])), 0.0);
}

#[test]
fn stability_and_regularity() {
    for p in [PairPotential::hard_core(1.0), PairPotential::ideal(), PairPotential::positive_step(1.0, 1.0, 1.0)] {
        assert_eq!(p.stability().unwrap().b, 0.0);
    }
    assert!((PairPotential::hard_core(1.0).regularity_c().unwrap().c - 2.0).abs() < 1e-12);
    assert!((PairPotential::hard_core(0.35).regularity_c().unwrap().c - 0.7).abs() < 1e-12);
    assert_eq!(PairPotential::ideal().regularity_c().unwrap().c, 0.0);
    // C = 2a (1 - e^{-beta eps}) for the step
    let c = PairPotential::positive_step(1.0, 1.0, 1.0).regularity_c().unwrap().c;
    assert!(rel(c, 2.0 * (1.0 - (-1.0f64).exp())) < 1e-10);
}

// configint

#[test]
fn hard_rod_integrals_against_grid_oracle() {
    // midpoint grid over [0,2]^2 of the indicator |x - y| >= 1
    let n = 2000;
    let h = 2.0 / n as f64;
    let mut count = 0usize;
    for i in 0..n {
        for j in 0..n {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            if (x - y).abs() >= 1.0 {
                count += 1;
            }
        }
    }
    let grid = count as f64 * h * h;
    assert!((exact_hardrod_z(2.0, 1.0, 2) - grid).abs() < 5e-3);
    assert!(rel(exact_hardrod_z(5.0, 1.0, 3), 27.0) < 1e-14);
    assert_eq!(exact_hardrod_z(5.0, 1.0, 7), 0.0);
    for m in 0..8 {
        assert!((exact_hardrod_z(5.0, 1.0, m) - gap_formula(5.0, 1.0, m)).abs() < 1e-12 * gap_formula(5.0, 1.0, m).max(1.0));
    }
}

#[test]
fn quadrature_and_sampling_examples() {
    let (v, e) = quadrature_z(&PairPotential::ideal(), &SpatialBox::interval(1.0), 3, 8).unwrap();
    assert!((v - 1.0).abs() < 1e-14 && e < 1e-12);
    let hc = PairPotential::hard_core(1.0);
    for (l, want) in [(2.0, 1.0), (5.0, 16.0)] {
        let (v, e) = quadrature_z(&hc, &SpatialBox::interval(l), 2, 64).unwrap();
        assert!((v - want).abs() <= e.max(1e-12), "L={l}: {v} vs {want} (bound {e})");
    }
    let (v, _) = sampled_z(&PairPotential::ideal(), &SpatialBox::interval(2.0), 2, 1000, 3).unwrap();
    assert!((v - 4.0).abs() < 1e-12);
    let (v, se) = sampled_z(&hc, &SpatialBox::interval(5.0), 3, 100_000, 11).unwrap();
    assert!((v - 27.0).abs() <= 3.0 * se, "{v} +- {se}");
    assert_eq!(sampled_z(&hc, &SpatialBox::interval(2.0), 4, 1000, 1).unwrap().0, 0.0);
}

#[test]
fn tables_and_anchored_integrals() {
    let hc = PairPotential::hard_core(1.0);
    let bx = SpatialBox::interval(5.0);
    let t = build_table(&hc, &bx, 6, &Strategy::default(), None).unwrap();
    let want = [1.0, 5.0, 16.0, 27.0, 16.0, 1.0, 0.0];
    assert_eq!(t.entries.len(), 7);
    for (m, w) in want.iter().enumerate() {
        assert!((t.z(m) - w).abs() < 1e-12 * w.max(1.0));
    }
    assert_eq!(IntegralTable::ideal(&SpatialBox::interval(1.0), 4).values(), vec![1.0; 5]);

    let dir = tempfile::tempdir().unwrap();
    let first = build_table(&hc, &bx, 6, &Strategy::default(), Some(dir.path())).unwrap();
    let second = build_table(&hc, &bx, 6, &Strategy::default(), Some(dir.path())).unwrap();
    assert_eq!(first, second);

    let ideal = anchored_integral(&PairPotential::ideal(), &SpatialBox::interval(1.0), &Configuration::line(&[0.3]), 2, &Strategy::default()).unwrap();
    assert!((ideal.value_f64() - 1.0).abs() < 1e-14);
    let mid = anchored_integral(&hc, &bx, &Configuration::line(&[2.5]), 1, &Strategy::default()).unwrap();
    assert!((mid.value_f64() - 3.0).abs() < 1e-12);
    let edge = anchored_integral(&hc, &bx, &Configuration::line(&[0.0]), 1, &Strategy::default()).unwrap();
    assert!((edge.value_f64() - 4.0).abs() < 1e-12);
}

// partition

#[test]
fn assembled_coefficients() {
    let poly = tonks(5.0, 6);
    let want = [1.0, 5.0, 8.0, 4.5, 2.0 / 3.0, 1.0 / 120.0, 0.0];
    for (m, w) in want.iter().enumerate() {
        assert!((poly.coeffs_f64()[m] - w).abs() < 1e-14 * w.max(1.0), "c_{m}");
        assert!((poly.coeffs_f64()[m] - gap_formula(5.0, 1.0, m) / factorial(m)).abs() < 1e-14 * w.max(1.0));
    }
    let ideal = PartitionPolynomial::assemble(&IntegralTable::ideal(&SpatialBox::interval(1.0), 3), None);
    assert_eq!(ideal.coeffs_f64().len(), 4);
    for (m, c) in ideal.coeffs_f64().iter().enumerate() {
        assert!((c - 1.0 / factorial(m)).abs() < 1e-16);
    }
    let empty = PartitionPolynomial::assemble(&IntegralTable::ideal(&SpatialBox::interval(1.0), 0), None);
    assert_eq!(empty.degree(), 0);
    assert_eq!(empty.evaluate(C64::new(3.0, 1.0)).value, C64::new(1.0, 0.0));
}

#[test]
fn evaluation_examples() {
    let ideal = PartitionPolynomial::assemble(&IntegralTable::ideal(&SpatialBox::interval(1.0), 3), None);
    assert_eq!(ideal.evaluate(C64::new(0.0, 0.0)).value, C64::new(1.0, 0.0));
    let poly = tonks(5.0, 6);
    for k in 1..50 {
        let z = k as f64 * 0.1;
        assert!(poly.evaluate(C64::new(z, 0.0)).value.re > 0.0);
    }
    assert!((poly.evaluate(C64::new(0.0, 0.0)).derivative.re - 5.0).abs() < 1e-14);
}

#[test]
fn zero_examples() {
    let z = zeros(&PartitionPolynomial::from_coeffs(&[1.0, 1.0])).unwrap();
    let (zc, cert) = smallest_zero(&z).unwrap();
    assert!((zc - C64::new(-1.0, 0.0)).norm() < 1e-15);
    assert!((cert.derivative - 1.0).abs() < 1e-14);

    let double = zeros(&PartitionPolynomial::from_coeffs(&[1.0, 2.0, 1.0])).unwrap();
    assert!(double.certificate.as_ref().unwrap().min_gap < 1e-6);
    assert!(!double.certificate.unwrap().passes);

    let pair = zeros(&PartitionPolynomial::from_coeffs(&[1.0, 1.5, 0.5])).unwrap();
    assert!((pair.z_c().unwrap() - C64::new(-1.0, 0.0)).norm() < 1e-14);

    let t5 = zeros(&tonks(5.0, 6)).unwrap();
    assert_eq!(t5.zeros.len(), 5);
    assert!(t5.zeros.iter().all(|w| w.z.re < 0.0 && w.z.im == 0.0));

    let t20 = zeros(&tonks(20.0, 21)).unwrap();
    let (zc, cert) = smallest_zero(&t20).unwrap();
    assert!(zc.re < 0.0 && zc.im == 0.0 && cert.passes && cert.scaled_derivative > 0.0);
}

#[test]
fn correlation_examples() {
    let ideal = PairPotential::ideal();
    let bx = SpatialBox::interval(1.0);
    let z = C64::new(0.4, 0.0);
    for m in 1..6 {
        let poly = PartitionPolynomial::assemble(&build_table(&ideal, &bx, m, &Strategy::default(), None).unwrap(), None);
        let c = correlation(&ideal, &bx, &poly, z, &Configuration::line(&[0.3]), NumeratorTruncation::TotalParticles, &Strategy::default()).unwrap();
        let partial = |k: usize| (0..=k).map(|j| z.powu(j as u32) / factorial(j)).sum::<C64>();
        assert!((c.value - z * partial(m - 1) / partial(m)).norm() < 1e-14);
    }
    let hc = PairPotential::hard_core(1.0);
    let bx5 = SpatialBox::interval(5.0);
    let poly = tonks(5.0, 6);
    let outside = correlation(&hc, &bx5, &poly, z, &Configuration::line(&[7.0]), NumeratorTruncation::TotalParticles, &Strategy::default());
    assert!(outside.map(|c| c.value == C64::new(0.0, 0.0)).unwrap_or(true));

    // sum rule: integral of rho_1 over the box = z Xi'(z) / Xi(z)
    let z = C64::new(0.05, 0.0);
    let n = 400;
    let h = 5.0 / n as f64;
    let integral: f64 = (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) * h;
            correlation(&hc, &bx5, &poly, z, &Configuration::line(&[x]), NumeratorTruncation::Uniform, &Strategy::default())
                .unwrap()
                .value
                .re
                * h
        })
        .sum();
    let ev = poly.evaluate(z);
    let mean = (z * ev.derivative / ev.value).re;
    assert!(rel(integral, mean) < 1e-3, "{integral} vs {mean}");
}

#[test]
fn taylor_examples() {
    let ideal = PairPotential::ideal();
    let bx = SpatialBox::interval(1.0);
    let poly = PartitionPolynomial::assemble(&build_table(&ideal, &bx, 8, &Strategy::default(), None).unwrap(), None);
    let num = correlation_numerator(&ideal, &bx, &Configuration::line(&[0.5]), Some(7), &Strategy::default()).unwrap();
    assert!((taylor_coefficients(&num.coeffs, 1, &poly, 5)[0] - 1.0).abs() < 1e-15);

    let geo = taylor_coefficients(&[1.0], 1, &PartitionPolynomial::from_coeffs(&[1.0, 1.0]), 12);
    for (k, c) in geo.iter().enumerate() {
        assert!((c - if k % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-15);
    }
}

// ksop

#[test]
fn ks_matrix_examples() {
    let k = build_ks_matrix(&PartitionPolynomial::from_coeffs(&[1.0, 0.3, 0.02])).unwrap();
    assert_eq!(k.rows_f64(), vec![vec![-0.3, -0.02], vec![1.0, 0.0]]);
    let ideal = PartitionPolynomial::assemble(&IntegralTable::ideal(&SpatialBox::interval(1.0), 3), None);
    let r = build_ks_matrix(&ideal).unwrap().row_f64();
    for (got, want) in r.iter().zip([-1.0, -0.5, -1.0 / 6.0]) {
        assert!((got - want).abs() < 1e-16);
    }
    let r = build_ks_matrix(&tonks(5.0, 5)).unwrap().row_f64();
    for (got, want) in r.iter().zip([-5.0, -8.0, -4.5, -2.0 / 3.0, -1.0 / 120.0]) {
        assert!((got - want).abs() < 1e-14 * want.abs());
    }
}

#[test]
fn ks_application_examples() {
    let ideal = PairPotential::ideal();
    let bx = SpatialBox::interval(1.0);
    let z = C64::new(0.3, 0.0);
    let phi = |c: &Configuration| z.powu(c.len() as u32);
    let (k1, _) = apply_ks_function(&ideal, &bx, &phi, &Configuration::line(&[0.4]), 6, &Strategy::default()).unwrap();
    assert_eq!(k1, C64::new(0.0, 0.0));
    let (k2, _) = apply_ks_function(&ideal, &bx, &phi, &Configuration::line(&[0.4, 0.7]), 6, &Strategy::default()).unwrap();
    assert!((k2 - z).norm() < 1e-15);

    let hc = PairPotential::hard_core(1.0);
    let bx5 = SpatialBox::interval(5.0);
    let rho = |_: &Configuration| C64::new(0.1, 0.0);
    let (k, _) = apply_ks_function(&hc, &bx5, &rho, &Configuration::line(&[2.5]), 2, &Strategy::default()).unwrap();
    assert!(k.re <= 0.0);
}

#[test]
fn ks_residual_examples() {
    let ideal = PairPotential::ideal();
    let bx = SpatialBox::interval(1.0);
    for z in [0.1, 0.6] {
        let r = ks_residual(&ideal, &bx, C64::new(z, 0.0), 5, 3, &Strategy::default()).unwrap();
        assert!(r.sup_residual <= 1e-12);
    }
    let r0 = ks_residual(&ideal, &bx, C64::new(0.0, 0.0), 4, 2, &Strategy::default()).unwrap();
    assert_eq!(r0.levels[0].residual, 0.0);
    let t = ks_residual(&PairPotential::hard_core(1.0), &SpatialBox::interval(5.0), C64::new(0.1, 0.0), 6, 3, &Strategy::default()).unwrap();
    assert!(t.sup_residual <= t.sup_error_bound, "{} vs {}", t.sup_residual, t.sup_error_bound);
}

#[test]
fn dxi_norm_examples() {
    let hc = PairPotential::hard_core(1.0);
    let bx = SpatialBox::interval(5.0);
    let xi: f64 = 0.4;
    let a = CoefficientVector { entries: (1..=5).map(|m| C64::new(xi.powi(m), 0.0)).collect(), xi };
    assert!((dxi_norm(&a, &hc, &bx, 5).unwrap() - 1.0).abs() < 1e-14);
    let g = CoefficientVector::geometric(C64::new(0.1, 0.0), 5, xi);
    assert!((dxi_norm(&g, &hc, &bx, 5).unwrap() - 0.25).abs() < 1e-14);
    assert!(dxi_norm(&CoefficientVector { xi: 0.0, ..g }, &hc, &bx, 5).is_err());
}

// spectral

#[test]
fn spectrum_examples() {
    let diag = Operator::dense_real(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
    let rep = spectrum(&diag).unwrap();
    assert!((rep.lambda_c - C64::new(2.0, 0.0)).norm() < 1e-14);
    assert!((rep.margin - 0.5).abs() < 1e-14);
    let lin = Operator::Companion(build_ks_matrix(&PartitionPolynomial::from_coeffs(&[1.0, 0.7])).unwrap());
    assert!((spectrum(&lin).unwrap().lambda_c - C64::new(-0.7, 0.0)).norm() < 1e-15);
    let check = spectral_radius_check(&spectrum(&Operator::Companion(build_ks_matrix(&PartitionPolynomial::from_coeffs(&[1.0, 1.0])).unwrap())).unwrap(), 1.0);
    assert!((check.spectral_radius - 1.0).abs() < 1e-14 && check.holds);
}

#[test]
fn resolvent_examples() {
    let zero = Operator::dense_real(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
    let e1 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let r = resolvent_apply(&zero, C64::new(1.0, 0.0), &e1).unwrap();
    assert!((r.x[0] + 1.0).norm() < 1e-15 && r.x[1].norm() < 1e-15);
    let op = Operator::dense_real(&[vec![2.0, 1.0], vec![0.0, 1.0]]);
    let far = resolvent_apply(&op, C64::new(1e8, 0.0), &e1).unwrap();
    assert!(rel(far.x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(), 1e-8) < 1e-6);
    let near = resolvent_apply(&op, C64::new(2.0 + 1e-6, 0.0), &e1).unwrap();
    assert!(rel(near.x[0].norm(), 1e6) < 1e-6);
}

#[test]
fn projection_examples() {
    let diag = Operator::dense_real(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
    let rep = spectrum(&diag).unwrap();
    let d = riesz_projection(&diag, &rep, None, Precision::Auto).unwrap();
    assert_eq!((d.rank_p, d.pole_order), (1, 1));
    assert!((d.p.row(0)[0] - 1.0).norm() < 1e-12 && d.p.row(1)[1].norm() < 1e-12);
    let pc = power_convergence(&diag, &rep, &d, 20);
    for n in 1..=20 {
        assert!((pc.norms[n] - 0.5f64.powi(n as i32)).abs() < 1e-12);
    }
    assert!(pc.norms[0] >= 1.0 - 1e-12);

    let jordan = Operator::dense_real(&[vec![2.0, 1.0], vec![0.0, 2.0]]);
    let jr = spectrum(&jordan).unwrap();
    let jd = riesz_projection(&jordan, &jr, None, Precision::Auto).unwrap();
    assert_eq!(jd.rank_p, 2);
    assert!((jd.p.row(0)[0] - 1.0).norm() < 1e-10 && jd.p.row(0)[1].norm() < 1e-10);
    let (dm, order) = nilpotent_and_pole(&jordan, &jr, &jd, false);
    assert_eq!(order, 2);
    assert!((dm.norm1() - 1.0).abs() < 1e-10);

    let t20 = Operator::Companion(build_ks_matrix(&tonks(20.0, 21)).unwrap());
    let tr = spectrum(&t20).unwrap();
    let td = riesz_projection(&t20, &tr, None, Precision::Auto).unwrap();
    assert_eq!((td.rank_p, td.pole_order), (1, 1));
    assert!(td.norm_d <= 1e-8 * td.norm_k);
    let pc = power_convergence(&t20, &tr, &td, 60);
    assert!(pc.ratio_error <= 0.05);
}

#[test]
fn asymptotics_examples() {
    let ideal = PairPotential::ideal();
    let bx = SpatialBox::interval(1.0);
    let poly = PartitionPolynomial::assemble(&build_table(&ideal, &bx, 1, &Strategy::default(), None).unwrap(), None);
    let zs = zeros(&poly).unwrap();
    let pr = leading_asymptotics(&ideal, &bx, &poly, &zs, &Configuration::line(&[0.5]), NumeratorTruncation::TotalParticles, &PacmanParams::default(), &Strategy::default()).unwrap();
    assert!((pr.z_c - C64::new(-1.0, 0.0)).norm() < 1e-15);
    assert!((pr.m_n - C64::new(1.0, 0.0)).norm() < 1e-12);

    let lam = C64::new(-0.8, 0.0);
    let geo: Vec<f64> = (0..20).map(|k| lam.re.powi(k)).collect();
    let r = coefficient_asymptotics(&geo, lam).unwrap();
    assert!(r.ratios.iter().all(|q| (q - lam).norm() < 1e-14));
    assert_eq!(r.within_one_percent_from, Some(0));

    let hc = PairPotential::hard_core(1.0);
    let bx5 = SpatialBox::interval(5.0);
    let poly = tonks(5.0, 6);
    let zs = zeros(&poly).unwrap();
    let pr = leading_asymptotics(&hc, &bx5, &poly, &zs, &Configuration::line(&[1.7]), NumeratorTruncation::TotalParticles, &PacmanParams::default(), &Strategy::default()).unwrap();
    assert!(pr.residue_agreement <= 1e-6 && pr.simple);
}

// cluster

#[test]
fn log_series_examples() {
    let s = log_series(&PartitionPolynomial::from_coeffs(&[1.0, 1.0]), 10).unwrap();
    for k in 1..10 {
        let want = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        assert!((s.value(k) - want).abs() < 1e-16);
    }
    let ideal = PartitionPolynomial::assemble(&IntegralTable::ideal(&SpatialBox::interval(1.0), 16), None);
    let s = log_series(&ideal, 9).unwrap();
    assert!((s.value(1) - 1.0).abs() < 1e-15);
    assert!((2..9).all(|k| s.value(k).abs() < 1e-12));

    // log(1 + u) = u - u^2/2 + u^3/3 - u^4/4, u = 5z + 8z^2 + 4.5z^3 + (2/3)z^4
    let u = [0.0, 5.0, 8.0, 4.5, 2.0 / 3.0];
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        (0..5).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
    };
    let u2 = mul(&u, &u);
    let u3 = mul(&u2, &u);
    let u4 = mul(&u3, &u);
    let s = log_series(&tonks(5.0, 6), 5).unwrap();
    for k in 1..5 {
        let want = u[k] - u2[k] / 2.0 + u3[k] / 3.0 - u4[k] / 4.0;
        assert!((s.value(k) - want).abs() < 1e-12 * want.abs(), "k={k}: {} vs {want}", s.value(k));
    }
}

#[test]
fn density_and_radius_examples() {
    let ideal = PartitionPolynomial::assemble(&IntegralTable::ideal(&SpatialBox::interval(1.0), 20), None);
    let d = density_series(&log_series(&ideal, 10).unwrap(), 1.0);
    assert!((d.value(1) - 1.0).abs() < 1e-15 && (2..10).all(|k| d.value(k).abs() < 1e-12));
    assert_eq!(radius_estimate(&d, RadiusMethod::Ratio).unwrap().radius, f64::INFINITY);

    let (_, dens) = tonks_mayer_coefficients(&TonksModel::new(1.0).unwrap(), 6);
    for (n, want) in [(1, 1.0), (2, -2.0), (3, 4.5)] {
        assert!((dens.value(n) - want).abs() < 1e-14);
    }

    let r = 0.7;
    let geo: Vec<f64> = (0..30).map(|n| if n == 0 { 0.0 } else { (-1.0 / r as f64).powi(n) }).collect();
    let est = radius_estimate(&PowerSeries::from_f64(&geo, Variable::Z), RadiusMethod::Ratio).unwrap();
    assert!(rel(est.radius, r) < 1e-12);
    assert_eq!(est.sign_pattern, SignPattern::Alternating);

    let n = 30;
    let oracle: Vec<f64> = (0..=n)
        .map(|k| if k == 0 { 0.0 } else { (if k % 2 == 1 { 1.0 } else { -1.0 }) * (k as f64).powi(k as i32) / factorial(k) })
        .collect();
    let est = radius_estimate(&PowerSeries::from_f64(&oracle, Variable::Z), RadiusMethod::Root).unwrap();
    assert!(rel(est.radius, (-1.0f64).exp()) < 0.02);
}

#[test]
fn virial_examples() {
    let ideal = PartitionPolynomial::assemble(&IntegralTable::ideal(&SpatialBox::interval(1.0), 20), None);
    let log = log_series(&ideal, 10).unwrap();
    let v = virial_reversion(&density_series(&log, 1.0), &pressure_series(&log, 1.0), 0.0, RadiusMethod::Ratio).unwrap();
    assert!((v.series.value(1) - 1.0).abs() < 1e-14 && (2..10).all(|k| v.series.value(k).abs() < 1e-12));

    for a in [1.0, 0.6] {
        let model = TonksModel::new(a).unwrap();
        let (pres, dens) = tonks_mayer_coefficients(&model, 20);
        let v = virial_reversion(&dens, &pres, model.c(), RadiusMethod::Ratio).unwrap();
        for k in 1..15 {
            assert!(rel(v.series.value(k), a.powi(k as i32 - 1)) < 1e-10, "a={a} k={k}");
        }
        assert!(rel(v.radius.radius, 1.0 / a) < 1e-6);
        assert!(v.satisfies_bound && v.radius.radius >= 1.0 / (2.0 * model.c()));
    }
}

#[test]
fn density_bound_examples() {
    let ideal = density_bound_check(&OracleModel::Ideal(IdealModel::new(1.0).unwrap()), 0.0, &[0.1, 0.5, 1.0]).unwrap();
    assert!(ideal.holds && ideal.min_margin.abs() < 1e-15);
    let model = TonksModel::new(1.0).unwrap();
    let rho = tonks_density(&model, 0.1).unwrap();
    assert!(rho >= 0.1 / 1.2);
    let grid: Vec<f64> = (1..=100).map(|i| 0.02 * i as f64).collect();
    let r = density_bound_check(&OracleModel::Tonks(model), 2.0, &grid).unwrap();
    assert!(r.holds && r.monotonicity_violations.is_empty());
}

// oracle

#[test]
fn tonks_oracle_examples() {
    let m = TonksModel::new(1.0).unwrap();
    assert_eq!(tonks_pressure(&m, 0.0).unwrap(), 0.0);
    let e = std::f64::consts::E;
    assert!((tonks_pressure(&m, e).unwrap() - 1.0).abs() < 1e-14);
    let w = tonks_pressure(&m, 0.1).unwrap();
    assert!((w * w.exp() - 0.1).abs() <= 1e-13 * 0.1);
    assert_eq!(tonks_density(&m, 0.0).unwrap(), 0.0);
    assert!((tonks_density(&m, e).unwrap() - 0.5).abs() < 1e-14);
    assert!((1..200).all(|k| tonks_density(&m, k as f64 * 0.5).unwrap() < 1.0));
    let (pres, dens) = tonks_mayer_coefficients(&m, 4);
    assert!((pres.value(1) - 1.0).abs() < 1e-15 && (pres.value(2) + 1.0).abs() < 1e-15);
    assert!((dens.value(2) + 2.0).abs() < 1e-15);
}

#[test]
fn ideal_oracle_examples() {
    let m = IdealModel::new(1.0).unwrap();
    let z1 = ideal_truncated_zeros(&m, 1).unwrap();
    assert!((z1.z_c().unwrap() - C64::new(-1.0, 0.0)).norm() < 1e-15);
    let z2 = ideal_truncated_zeros(&m, 2).unwrap();
    assert!(z2.zeros.iter().all(|w| (w.z.norm() - 2f64.sqrt()).abs() < 1e-14 && (w.z.re + 1.0).abs() < 1e-14));
    let half = ideal_truncated_zeros(&IdealModel::new(2.0).unwrap(), 1).unwrap();
    assert!((half.z_c().unwrap() - C64::new(-0.5, 0.0)).norm() < 1e-15);
}

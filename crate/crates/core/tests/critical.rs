mod common;

use proptest::prelude::*;
use stratwave::background::{background_from_branches, StratifiedBackground};
use stratwave::profile::Branch;
use stratwave::reduced_model::{elevation_seed, sech_seed, Normalization, ReducedModel};
use stratwave::sturm_liouville::{critical_data, eval_a, find_mu_cr, zero_count};

/// Positive roots of tan k = k by Newton from (n + ½)π − small.
fn tan_roots(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|n| {
            let mut k = (n as f64 + 0.5) * std::f64::consts::PI - 0.1;
            for _ in 0..50 {
                let g = k.tan() - k;
                let dg = 1.0 / k.cos().powi(2) - 1.0;
                k -= g / dg;
            }
            k
        })
        .collect()
}

#[test]
fn uniform_spectrum_is_minus_tan_roots_squared() {
    // with ρ ≡ 1, H_p ≡ 1 and μ = 1 the eigenfunctions are sin(k(p + 1)) with tan k = k
    let bg = StratifiedBackground::uniform(-0.5).unwrap();
    let c = critical_data(&bg, 5).unwrap();
    let ks = tan_roots(4);
    for (n, k) in ks.iter().enumerate() {
        let nu = c.spectrum[n + 1];
        assert!(
            (nu + k * k).abs() < 1e-8 * k * k,
            "ν_{} = {nu}, k = {k}",
            n + 1
        );
    }
}

#[test]
fn eigenfunction_zero_counts_follow_index() {
    let bg = common::stratified_two_layer();
    let c = critical_data(&bg, 4).unwrap();
    for (n, nu) in c.spectrum.iter().enumerate().skip(1) {
        // just above ν_n the shooting solution has n interior zeros
        assert_eq!(zero_count(&bg, c.mu_cr, nu + 1e-6 * nu.abs()).unwrap(), n);
    }
}

#[test]
fn critical_value_is_first_sign_change() {
    let bg = common::stratified_two_layer();
    let mu = find_mu_cr(&bg).unwrap().mu_cr;
    assert!(eval_a(&bg, 0.5 * mu).unwrap() < 0.0);
    assert!(eval_a(&bg, mu).unwrap().abs() < 1e-10);
}

#[test]
fn normalizations_rescale_consistently() {
    // B1 is invariant; B2 scales with the normalization of Φ at p̂
    let bg = StratifiedBackground::two_layer(1.02, 0.5).unwrap();
    let c = find_mu_cr(&bg).unwrap();
    let a = ReducedModel::new(&bg, &c, Normalization::BedSlope).unwrap();
    let b = ReducedModel::new(&bg, &c, Normalization::InterfaceUnit).unwrap();
    assert!((a.b1 - b.b1).abs() < 1e-9 * a.b1.abs());
    let s = a.phi.at(bg.p_hat);
    assert!((a.b2 - s * b.b2).abs() < 1e-8 * a.b2.abs());
}

fn random_two_layer(r_lo: f64, gap: f64, frac: f64, shear: f64) -> StratifiedBackground {
    let lo = format!("{} - 0.01*(y+{frac})", r_lo + gap);
    let up = format!("{r_lo} - 0.01*(y+{frac})");
    let us = format!("1 + {shear}*y");
    background_from_branches(
        frac,
        (
            Branch::expr(&lo, "y").unwrap(),
            Branch::expr(&up, "y").unwrap(),
        ),
        (
            Branch::expr(&us, "y").unwrap(),
            Branch::expr(&us, "y").unwrap(),
        ),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shooting_matches_fem_oracle(
        r in 1.0f64..1.05,
        gap in 0.001f64..0.05,
        frac in 0.2f64..0.8,
        shear in -0.3f64..0.3,
    ) {
        let bg = random_two_layer(r, gap, frac, shear);
        let shoot = find_mu_cr(&bg).unwrap().mu_cr;
        let (fem, _) = common::fem_mu_cr_richardson(&bg, 256);
        prop_assert!((shoot - fem).abs() < 1e-6 * fem, "shoot {shoot} fem {fem}");
    }

    #[test]
    fn principal_eigenvalue_vanishes_and_spectrum_descends(
        r in 1.0f64..1.05,
        gap in 0.001f64..0.05,
        frac in 0.2f64..0.8,
    ) {
        let bg = random_two_layer(r, gap, frac, 0.1);
        let c = critical_data(&bg, 4).unwrap();
        prop_assert!(c.spectrum[0].abs() < 1e-8);
        prop_assert!(c.spectrum.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn sech_orbits_solve_their_odes(
        b1 in 0.1f64..10.0,
        b2 in -20.0f64..-0.01,
        eps in 0.01f64..0.5,
    ) {
        let bg = StratifiedBackground::uniform(-0.5).unwrap();
        let c = find_mu_cr(&bg).unwrap();
        let mut m = ReducedModel::new(&bg, &c, Normalization::BedSlope).unwrap();
        m.b1 = b1;
        m.b2 = b2;
        let s = sech_seed(&m, eps).unwrap();
        let e = elevation_seed(&m, eps).unwrap();
        prop_assert!(e.amplitude > 0.0);
        let e2 = eps * eps;
        let scale = b1 * e2 * e.amplitude;
        for k in 0..=400 {
            let q = -50.0 + 0.25 * k as f64;
            let rs = s.second(q) - (b1 * e2 * s.value(q) - b2 * s.value(q).powi(2));
            let re = e.second(q) - (b1 * e2 * e.value(q) + b2 * e.value(q).powi(2));
            prop_assert!(rs.abs() <= 1e-12 * scale.max(1e-300) + 1e-15);
            prop_assert!(re.abs() <= 1e-12 * scale.max(1e-300) + 1e-15);
        }
    }
}

use std::sync::OnceLock;

use binls::config::{parse_config, Command, RunConfig};
use binls::dynamics::step_strang;
use binls::functionals::{
    energy, energy_along_dilation, fourier_rearrangement, optimal_dilation, pohozaev, pohozaev_along_dilation,
    triple, weinstein_quotient,
};
use binls::grid::{dilate, mass_centroid, translate};
use binls::ground_state::{critical_mass, SolverConfig};
use binls::io::{decode_checkpoint, encode_checkpoint, render_csv};
use binls::random::{band_limited_field, localized_field, rng_from_seed};
use binls::report::{fmt_f64, Table};
use binls::{Field, GridSpec, ModelParams};
use proptest::prelude::*;

fn grid(dim: usize) -> GridSpec {
    if dim == 1 {
        GridSpec::new(1, 32.0, 256).unwrap()
    } else {
        GridSpec::new(2, 24.0, 96).unwrap()
    }
}

fn localized(dim: usize, seed: u64) -> Field {
    localized_field(&grid(dim), &mut rng_from_seed(seed), 1.5, 1.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn dilation_preserves_mass_and_scales_the_triple(
        dim in 1usize..=2, seed in any::<u64>(), lambda in 0.6f64..1.6, sigma in 1u32..=3,
    ) {
        // integer sigma keeps |u|^{2 sigma + 2} smooth, so the quadrature stays spectral
        let sigma = sigma as f64;
        let g = if dim == 1 { grid(1) } else { GridSpec::new(2, 24.0, 192).unwrap() };
        let u = localized_field(&g, &mut rng_from_seed(seed), 1.5, 1.0);
        let p = ModelParams::new(1.0, sigma, dim).unwrap();
        let d = dilate(&u, lambda).unwrap();
        prop_assert!(rel(d.field.norm_sq(), u.norm_sq()) < 1e-12);
        prop_assert!((d.renormalization - 1.0).abs() < 1e-8);
        let t = triple(&u, &p);
        let s = triple(&d.field, &p);
        prop_assert!(rel(s.lap_sq, lambda * lambda * t.lap_sq) < 1e-10);
        prop_assert!(rel(s.grad_sq, lambda * t.grad_sq) < 1e-10);
        prop_assert!(rel(s.power, lambda.powf(0.5 * sigma * dim as f64) * t.power) < 1e-8);
        let e = energy_along_dilation(&t, lambda, &p);
        let scale = 0.5 * s.lap_sq + 0.5 * s.grad_sq + s.power / p.power();
        prop_assert!((energy(&d.field, &p) - e).abs() < 1e-8 * scale);
    }

    #[test]
    fn pohozaev_is_the_log_derivative_of_the_fibering_map(
        a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0, lambda in 0.1f64..5.0,
        sigma in 0.5f64..4.0, dim in 1usize..=2, gamma in 0.2f64..3.0,
    ) {
        let p = ModelParams::new(gamma, sigma, dim).unwrap();
        let t = binls::ScalarTriple { lap_sq: a, grad_sq: b, power: c };
        let h = 1e-5;
        let fd = (energy_along_dilation(&t, lambda * (1.0 + h), &p) - energy_along_dilation(&t, lambda * (1.0 - h), &p))
            / (2.0 * h);
        let scale = gamma * lambda * lambda * a + lambda * b + lambda.powf(0.5 * sigma * dim as f64) * c;
        prop_assert!((fd - pohozaev_along_dilation(&t, lambda, &p)).abs() < 1e-8 * scale);
    }

    #[test]
    fn optimal_dilation_lands_on_the_pohozaev_manifold(
        a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0, sigma in 4.2f64..8.0,
    ) {
        // sigma N > 4 in 1D: a maximizer always exists
        let p = ModelParams::new(1.0, sigma, 1).unwrap();
        let t = binls::ScalarTriple { lap_sq: a, grad_sq: b, power: c };
        let r = optimal_dilation(&t, &p).unwrap();
        let l = r.lambda_star;
        let scale = l * l * a + l * b + l.powf(0.5 * sigma) * c;
        prop_assert!(pohozaev_along_dilation(&t, l, &p).abs() < 1e-10 * scale);
        for f in [0.9, 1.1] {
            prop_assert!(energy_along_dilation(&t, f * l, &p) <= r.max_energy);
        }
    }

    #[test]
    fn translation_is_an_isometry_and_round_trips(
        dim in 1usize..=2, seed in any::<u64>(), sx in -3.0f64..3.0, sy in -3.0f64..3.0,
    ) {
        let u = localized(dim, seed);
        let p = ModelParams::new(1.0, 1.0, dim).unwrap();
        let v = translate(&u, [sx, sy]);
        prop_assert!(rel(v.norm_sq(), u.norm_sq()) < 1e-12);
        let (t, s) = (triple(&u, &p), triple(&v, &p));
        prop_assert!(rel(s.lap_sq, t.lap_sq) < 1e-10);
        prop_assert!(rel(s.power, t.power) < 1e-6);
        let ca = mass_centroid(&u);
        let cb = mass_centroid(&v);
        prop_assert!((cb[0] - (ca[0] - sx)).abs() < 1e-6);
        let back = translate(&v, [-sx, -sy]);
        prop_assert!(back.l2_distance(&u).unwrap() < 1e-10 * u.l2_norm());
    }

    #[test]
    fn rearrangement_inequalities(dim in 1usize..=2, seed in any::<u64>(), sigma in 1u32..=4, localized_input in any::<bool>()) {
        let g = grid(dim);
        let mut rng = rng_from_seed(seed);
        let u = if localized_input { localized_field(&g, &mut rng, 2.0, 1.0) } else { band_limited_field(&g, &mut rng, 1.0) };
        let p = ModelParams::new(1.0, sigma as f64, dim).unwrap();
        let r = fourier_rearrangement(&u);
        prop_assert!(rel(r.norm_sq(), u.norm_sq()) < 1e-12);
        let (t, s) = (triple(&u, &p), triple(&r, &p));
        prop_assert!(s.lap_sq <= t.lap_sq * (1.0 + 1e-12));
        prop_assert!(s.grad_sq <= t.grad_sq * (1.0 + 1e-12));
        prop_assert!(s.power >= t.power * (1.0 - 1e-12));
        prop_assert!(r.values().iter().all(|v| v.im.abs() < 1e-12 * r.max_abs()));
    }

    #[test]
    fn weinstein_quotient_never_exceeds_the_sharp_constant(seed in any::<u64>(), localized_input in any::<bool>()) {
        static B: OnceLock<f64> = OnceLock::new();
        let g = GridSpec::new(1, 32.0, 512).unwrap();
        let p = ModelParams::new(1.0, 4.0, 1).unwrap();
        let b = *B.get_or_init(|| critical_mass(&p, &g, &SolverConfig::default()).unwrap().b_crit);
        let mut rng = rng_from_seed(seed);
        let u = if localized_input { localized_field(&g, &mut rng, 1.0, 1.0) } else { band_limited_field(&g, &mut rng, 1.0) };
        prop_assert!(weinstein_quotient(&u, &p).unwrap() <= b);
    }

    #[test]
    fn strang_step_conserves_mass(dim in 1usize..=2, seed in any::<u64>(), tau in 1e-4f64..1e-2, sigma in 0.5f64..4.0) {
        let g = grid(dim);
        let u = band_limited_field(&g, &mut rng_from_seed(seed), 2.0);
        let p = ModelParams::new(1.0, sigma, dim).unwrap();
        let mut v = u.clone();
        for _ in 0..10 {
            v = step_strang(&v, tau, &p);
        }
        prop_assert!(rel(v.norm_sq(), u.norm_sq()) < 1e-13);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact(dim in 1usize..=2, seed in any::<u64>(), gamma in 0.1f64..5.0, sigma in 0.1f64..5.0) {
        let u = band_limited_field(&grid(dim), &mut rng_from_seed(seed), 3.0);
        let bytes = encode_checkpoint(&u, gamma, sigma);
        let (v, meta) = decode_checkpoint(&bytes).unwrap();
        prop_assert_eq!(meta.gamma.to_bits(), gamma.to_bits());
        prop_assert_eq!(meta.sigma.to_bits(), sigma.to_bits());
        prop_assert_eq!(v.grid(), u.grid());
        for (a, b) in u.values().iter().zip(v.values()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_f64(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        let mut t = Table::new("t", &["x"]);
        t.push(vec![x]);
        let text = render_csv(&t);
        let cell = text.lines().nth(1).unwrap();
        prop_assert_eq!(cell.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn config_serialization_round_trips(
        cmd in 0usize..Command::ALL.len(), excess in proptest::option::of(0.1f64..4.0), dim in 1usize..=2,
        gamma in 0.1f64..4.0, extent in 4.0f64..100.0, points in 4usize..600, horizon in 0.1f64..100.0,
        seed in any::<u64>(), ratio in 1.0f64..3.0, lambda in proptest::option::of(0.2f64..2.0),
        masses in proptest::collection::vec(0.5f64..20.0, 1..5),
    ) {
        let command = Command::ALL[cmd];
        let critical_only = matches!(command, Command::GnConstant | Command::Threshold | Command::Concentration);
        let excess = if critical_only { None } else { excess };
        let sigma = (4.0 + excess.unwrap_or(0.0)) / dim as f64;
        let mut cfg = RunConfig::new(command, sigma, dim);
        cfg.model.gamma = gamma;
        cfg.extent = extent;
        cfg.points = 2 * points;
        cfg.dynamics.horizon = horizon;
        cfg.dynamics.lambda = lambda;
        cfg.rng_seed = seed;
        if excess.is_none() {
            cfg.mass_ratio = Some(ratio);
        } else {
            cfg.model.mass_target = Some(2.0 * ratio);
        }
        let mut masses = masses;
        masses.sort_by(f64::total_cmp);
        masses.dedup();
        cfg.experiment.masses = masses;
        let back = parse_config(&cfg.serialize()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn pohozaev_matches_dilation_derivative_of_a_field() {
    let u = localized(1, 3);
    let p = ModelParams::new(1.0, 3.0, 1).unwrap();
    let h = 1e-4;
    let up = dilate(&u, 1.0 + h).unwrap().field;
    let um = dilate(&u, 1.0 - h).unwrap().field;
    let fd = (energy(&up, &p) - energy(&um, &p)) / (2.0 * h);
    let q = pohozaev(&u, &p);
    let t = triple(&u, &p);
    assert!((fd - q).abs() < 1e-7 * (t.lap_sq + t.grad_sq + t.power), "{fd} vs {q}");
}

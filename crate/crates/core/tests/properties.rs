//! Property tests for the structural invariants of the model and pipeline.

use num_complex::Complex64;
use proptest::prelude::*;
use setscope::classify::{periodicity_residual, run_sector, Branch};
use setscope::cli::{CommandKind, DetectChoice, RunArgs, RunConfig};
use setscope::model::{build_site_tensor, PepsTensors};
use setscope::momentum::shift;
use setscope::oracle::{brute_wavefunction, compare_spectra};
use setscope::spectra::{analyze, Epsilon, Kx, SclCurve, SclPoint, SpectrumSet, Tolerances};
use setscope::transfer::{build_transfer, Workspace};
use setscope::{ModelParams, Sector, Sign};

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn weight() -> impl Strategy<Value = f64> {
    0.05f64..=1.0
}

fn params(km: Sign, ke: Sign, w: f64) -> ModelParams {
    ModelParams::new(km, ke, w, Sector::E).unwrap()
}

const LEG_PERMUTATIONS: [[usize; 4]; 24] = [
    [0, 1, 2, 3],
    [0, 1, 3, 2],
    [0, 2, 1, 3],
    [0, 2, 3, 1],
    [0, 3, 1, 2],
    [0, 3, 2, 1],
    [1, 0, 2, 3],
    [1, 0, 3, 2],
    [1, 2, 0, 3],
    [1, 2, 3, 0],
    [1, 3, 0, 2],
    [1, 3, 2, 0],
    [2, 0, 1, 3],
    [2, 0, 3, 1],
    [2, 1, 0, 3],
    [2, 1, 3, 0],
    [2, 3, 0, 1],
    [2, 3, 1, 0],
    [3, 0, 1, 2],
    [3, 0, 2, 1],
    [3, 1, 0, 2],
    [3, 1, 2, 0],
    [3, 2, 0, 1],
    [3, 2, 1, 0],
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn site_tensor_is_symmetric_under_leg_permutations(
        km in sign(),
        perm in prop::sample::select(LEG_PERMUTATIONS.to_vec()),
        legs in prop::array::uniform4(0u8..2),
    ) {
        let t = build_site_tensor(km);
        let p: Vec<u8> = perm.iter().map(|&i| legs[i]).collect();
        prop_assert_eq!(t.get(legs[0], legs[1], legs[2], legs[3]), t.get(p[0], p[1], p[2], p[3]));
    }

    #[test]
    fn dual_sector_swaps_the_signs(km in sign(), ke in sign(), w in weight()) {
        let dual = ModelParams::new(ke, km, w, Sector::M).unwrap();
        let primal = ModelParams::new(km, ke, w, Sector::E).unwrap();
        prop_assert_eq!(PepsTensors::build(&dual).unwrap(), PepsTensors::build(&primal).unwrap());
    }

    #[test]
    fn amplitudes_scale_with_the_number_of_up_spins(
        km in sign(),
        ke in sign(),
        w in 0.2f64..=1.0,
        c in 0.2f64..=1.0,
    ) {
        let table = brute_wavefunction(&params(km, ke, 1.0), 2, 2).unwrap();
        let spins = table.torus.spins() as u32;
        for (&config, amp) in &table.amplitudes {
            let ups = spins - config.count_ones();
            let lhs = amp.eval(c * w);
            let rhs = c.powi(ups as i32) * amp.eval(w);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }
    }

    #[test]
    fn transfer_obeys_the_parity_selection_rule(
        km in sign(),
        ke in sign(),
        w in weight(),
        ly in 2usize..=7,
        a_raw in any::<u32>(),
    ) {
        let op = build_transfer(&params(km, ke, w), ly).unwrap();
        let a = (a_raw as usize) & ((1 << ly) - 1);
        let col = op.column(a, &mut Workspace::new(ly));
        // every column flips the ring parity by L_y when the plaquette sign is negative
        let flips = km == Sign::Minus && (ly * op.multiplicity()) % 2 == 1;
        for (b, &x) in col.iter().enumerate() {
            let same = (a.count_ones() + b.count_ones()).is_multiple_of(2);
            if same == flips {
                prop_assert_eq!(x, 0.0);
            }
        }
    }

    #[test]
    fn transfer_commutes_with_ring_translation(
        km in sign(),
        ke in sign(),
        w in weight(),
        ly in 2usize..=8,
        seed in prop::collection::vec(-1.0f64..1.0, 256),
    ) {
        let op = build_transfer(&params(km, ke, w), ly).unwrap();
        let n = 1usize << ly;
        let v: Vec<f64> = (0..n).map(|i| seed[i % seed.len()] + i as f64 * 1e-3).collect();
        let translate = |x: &[f64]| {
            let mut out = vec![0.0; n];
            for (c, &xc) in x.iter().enumerate() {
                out[shift(c as u32, ly) as usize] = xc;
            }
            out
        };
        let lhs = op.apply(&translate(&v)).unwrap();
        let rhs = translate(&op.apply(&v).unwrap());
        let scale = rhs.iter().map(|x| x.abs()).fold(1.0, f64::max);
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() <= 1e-12 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn two_column_spectrum_is_the_square_of_the_one_column_spectrum(
        km in sign(),
        w in weight(),
        ly in 2usize..=6,
    ) {
        let one = SpectrumSet::compute(&params(km, Sign::Plus, w), ly).unwrap();
        let two = SpectrumSet::compute(&params(km, Sign::Minus, w), ly).unwrap();
        prop_assert_eq!(two.multiplicity, 2);
        let squared: Vec<Complex64> = one.all_eigenvalues().map(|z| z * z).collect();
        let got: Vec<Complex64> = two.all_eigenvalues().collect();
        let cmp = compare_spectra(&squared, &got, 1e-9);
        prop_assert!(cmp.passed(), "{:?}", cmp.mismatches.first());
        prop_assert!(got.iter().all(|z| z.re >= -1e-9 * cmp.lambda0 && z.im.abs() <= 1e-9 * cmp.lambda0));
    }

    #[test]
    fn block_spectra_are_closed_under_conjugation(
        km in sign(),
        ke in sign(),
        w in weight(),
        ly in 2usize..=7,
    ) {
        let set = SpectrumSet::compute(&params(km, ke, w), ly).unwrap();
        for b in &set.blocks {
            let conj: Vec<Complex64> = b.eigenvalues.iter().map(|z| z.conj()).collect();
            let cmp = compare_spectra(&b.eigenvalues, &conj, 1e-9);
            prop_assert!(cmp.passed(), "k={} {:?}", b.momentum.index(), cmp.mismatches.first());
        }
    }

    #[test]
    fn scl_values_are_non_negative(
        km in sign(),
        ke in sign(),
        w in weight(),
        ly in 2usize..=7,
    ) {
        let a = analyze(&params(km, ke, w), ly, &Tolerances::default()).unwrap();
        for p in &a.curve.points {
            if let Epsilon::Finite(e) = p.epsilon {
                prop_assert!(e >= 0.0, "ε={e} at k={}", p.k_index);
            }
        }
        for g in &a.gaps {
            prop_assert!(g.gamma.as_f64() >= 0.0);
        }
    }

    #[test]
    fn residual_is_invariant_under_half_turn_relabeling(
        half in 1usize..=6,
        eps in prop::collection::vec(0.0f64..5.0, 12),
    ) {
        let ly = 2 * half;
        let curve = |offset: usize| SclCurve {
            ly,
            multiplicity: 1,
            lambda0: 1.0,
            points: (0..ly)
                .map(|k| SclPoint {
                    k_index: (k + offset) % ly,
                    kx: Kx::Zero,
                    epsilon: Epsilon::Finite(eps[k]),
                    lambda: Complex64::new((-eps[k]).exp(), 0.0),
                    is_ground: false,
                })
                .collect(),
        };
        let r0 = periodicity_residual(&curve(0), Branch::Zero).unwrap().residual;
        let r1 = periodicity_residual(&curve(half), Branch::Zero).unwrap().residual;
        prop_assert_eq!(r0, r1);
    }

    #[test]
    fn config_echo_round_trips(
        km in sign(),
        ke in sign(),
        ws in prop::collection::vec(0.01f64..=1.0, 1..4),
        lys in prop::collection::vec(1usize..=8, 1..4),
        deg in 1e-9f64..1e-2,
        threshold in 0.001f64..1.0,
    ) {
        let args = RunArgs {
            km: Some(km),
            ke: Some(ke),
            w: Some(ws),
            ly: Some(lys.into_iter().map(|l| 2 * l).collect()),
            detect: Some(DetectChoice::E),
            deg_tol: Some(deg),
            period_threshold: Some(threshold),
            ..RunArgs::default()
        };
        let cfg = args.resolve(CommandKind::Sweep).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &RunConfig { jobs: None, ..cfg.clone() });
        let reparsed = RunArgs::from_config_text(&cfg.to_config_text())
            .unwrap()
            .resolve(CommandKind::Sweep)
            .unwrap();
        prop_assert_eq!(reparsed, RunConfig { jobs: None, ..cfg });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn dual_run_matches_primal_run_with_swapped_signs(km in sign(), ke in sign(), w in 0.3f64..=1.0) {
        let tol = Tolerances::default();
        let dual = run_sector(&params(ke, km, w), Sector::M, &[4, 6, 8], &tol);
        let primal = run_sector(&params(km, ke, w), Sector::E, &[4, 6, 8], &tol);
        match (dual, primal) {
            (Ok(d), Ok(p)) => {
                prop_assert_eq!(d.branch, p.branch);
                prop_assert_eq!(d.splittings, p.splittings);
                let rd: Vec<f64> = d.residuals.iter().map(|r| r.residual).collect();
                let rp: Vec<f64> = p.residuals.iter().map(|r| r.residual).collect();
                prop_assert_eq!(rd, rp);
            }
            (Err(d), Err(p)) => prop_assert_eq!(d.to_string(), p.to_string()),
            (d, p) => prop_assert!(false, "dual {:?} vs primal {:?}", d.is_ok(), p.is_ok()),
        }
    }
}

mod common;

use common::{on_grid_coefficients, rel_err, Small};
use mmw_chanest::channel::{PathSet, PulseShape};
use mmw_chanest::estimators::{ls_estimate, omp, LsSolver, OmpConfig, StopRule};
use mmw_chanest::linalg::{vectorize, LinearOperator, C64};
use mmw_chanest::sensing::{build_dictionary, vectorize_channel, MeasurementOperator, SparseSensingOperator};
use proptest::prelude::*;

#[test]
fn square_grid_on_grid_noiseless_recovery_rate() {
    let pulse = PulseShape::default();
    let n = 500;
    let mut failures = Vec::new();
    for seed in 0..n {
        let s = Small {
            n_tx: 8,
            n_rx: 8,
            n_taps: 2,
            n_paths: 2,
            chains: 2,
            n_streams: 2,
            frame_len: 8,
            n_frames: 16,
            seed,
        };
        let paths = s.on_grid_paths(&pulse, 8, 8);
        let ch = s.channel(&paths, &pulse);
        let dict = build_dictionary(&s.tx(), &s.rx(), 8, 8, 2).unwrap();
        let truth = on_grid_coefficients(&s, &paths, &dict);
        let true_support: Vec<usize> = (0..truth.len()).filter(|&j| truth[j].norm() > 0.0).collect();
        let phi = MeasurementOperator::new(&s.frames(), 2).unwrap();
        let rho: f64 = 3.0;
        let y: Vec<C64> = phi.apply(&vectorize_channel(&ch)).iter().map(|v| v * rho.sqrt()).collect();
        let a = SparseSensingOperator::new(&phi, &dict, rho);
        let y_norm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let cfg = OmpConfig {
            max_atoms: s.n_paths,
            residual_tol: 1e-9 * y_norm,
            stop_rule: StopRule::Hybrid,
        };
        let ok = match omp(&y, &a, &cfg, &dict) {
            Ok(est) => {
                let mut got = est.support.clone();
                got.sort();
                let mut dense = vec![C64::new(0.0, 0.0); dict.n_atoms()];
                for (&j, &c) in est.support.iter().zip(&est.h_hat) {
                    dense[j] = c;
                }
                got == true_support && rel_err(&dense, &truth) <= 1e-6
            }
            Err(_) => false,
        };
        if !ok {
            failures.push(seed);
        }
    }
    let rate = 1.0 - failures.len() as f64 / n as f64;
    eprintln!("exact recovery {:.1}% of {n}; failed seeds {failures:?}", 100.0 * rate);
    assert!(rate >= 0.99);
}

#[test]
fn single_on_grid_path_spreads_over_all_taps_and_is_found() {
    let s = Small {
        n_tx: 8,
        n_rx: 4,
        n_taps: 3,
        n_paths: 1,
        chains: 2,
        n_streams: 2,
        frame_len: 8,
        n_frames: 6,
        seed: 4,
    };
    let pulse = PulseShape::default();
    let tx = s.tx();
    let rx = s.rx();
    let (gt, gr) = (16, 8);
    let (bt, br) = (5, 2);
    let aod = tx.angle_for_spatial_frequency(-0.5 + bt as f64 / gt as f64).unwrap();
    let aoa = rx.angle_for_spatial_frequency(-0.5 + br as f64 / gr as f64).unwrap();
    let paths = PathSet::new(vec![C64::new(0.8, -0.3)], vec![0.6], vec![aoa], vec![aod]).unwrap();
    let ch = s.channel(&paths, &pulse);
    let dict = build_dictionary(&tx, &rx, gt, gr, s.n_taps).unwrap();
    let phi = MeasurementOperator::new(&s.frames(), s.n_taps).unwrap();
    let y = phi.apply(&vectorize_channel(&ch));
    let a = SparseSensingOperator::new(&phi, &dict, 1.0);
    // exhaustive correlation oracle for the first pick
    let first = (0..dict.n_atoms())
        .map(|j| {
            let col = a.column(j);
            (j, col.iter().zip(&y).map(|(c, v)| c.conj() * v).sum::<C64>().norm())
        })
        .fold((0, -1.0), |best, (j, m)| if m > best.1 { (j, m) } else { best });
    let est = omp(&y, &a, &OmpConfig::fixed(s.n_taps), &dict).unwrap();
    assert_eq!(est.support[0], first.0);
    let mut got = est.support.clone();
    got.sort();
    let want: Vec<usize> = (0..s.n_taps).map(|d| dict.atom_index(d, bt, br)).collect();
    assert_eq!(got, want);
    assert!(est.residual_norms.last().unwrap() < &1e-8);
}

fn ls_case() -> impl Strategy<Value = Small> {
    (1usize..=3, 1usize..=3, 1usize..=2, 1usize..=2, any::<u64>(), 2usize..=5).prop_flat_map(
        |(n_tx, n_rx, n_taps, n_paths, seed, frame_len)| {
            (1..=n_tx.min(n_rx)).prop_map(move |chains| {
                let cols = n_taps * n_tx * n_rx;
                let n_frames = cols.div_ceil(frame_len * chains) + 1;
                Small {
                    n_tx,
                    n_rx,
                    n_taps,
                    n_paths,
                    chains,
                    n_streams: chains,
                    frame_len,
                    n_frames,
                    seed,
                }
            })
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn noiseless_ls_is_exact_when_full_rank(s in ls_case(), rho in 0.1f64..50.0) {
        let pulse = PulseShape::default();
        let ch = s.channel(&s.paths(&pulse), &pulse);
        let frames = s.frames();
        let phi = MeasurementOperator::new(&frames, s.n_taps).unwrap();
        prop_assume!(LsSolver::new(&phi).is_ok());
        let y: Vec<C64> = phi.apply(&vectorize_channel(&ch)).iter().map(|v| v * rho.sqrt()).collect();
        let est = ls_estimate(&y, &phi, rho).unwrap();
        let truth = vectorize(ch.concatenated.as_ref());
        let nmse = rel_err(&vectorize(est.channel_hat.as_ref()), &truth).powi(2);
        prop_assert!(nmse < 1e-10, "nmse {nmse}");
    }
}

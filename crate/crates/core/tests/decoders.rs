use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stc_lab::channel::{apply_channel, complex_normal, ChannelParams, FadingMode, FadingRealization, ReceivedFrame};
use stc_lab::demod::{ml_exhaustive, sphere_decode, word_metric};
use stc_lab::mathcore::{ComplexMatrix, Constellation};
use stc_lab::stcodes::BlockCode;

type Mat = [[Complex64; 2]; 2];

/// Golden codeword from the textbook definition, energy one per use.
fn golden(s: [Complex64; 4]) -> Mat {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let tb = 1.0 - t;
    let a = Complex64::new(1.0, 1.0 - t);
    let ab = Complex64::new(1.0, 1.0 - tb);
    let i = Complex64::i();
    let k = 1.0 / 10f64.sqrt();
    [
        [a * (s[0] + s[1] * t) * k, a * (s[2] + s[3] * t) * k],
        [i * ab * (s[2] + s[3] * tb) * k, ab * (s[0] + s[1] * tb) * k],
    ]
}

/// Brute-force ML over all 256 QPSK quadruples with plain loops.
fn brute_force(y: &Mat, h: &Mat, es: f64, q: &Constellation) -> Vec<u8> {
    let mut best = (f64::INFINITY, 0usize);
    for idx in 0..256usize {
        let s = [0, 1, 2, 3].map(|p| q.point((idx >> (6 - 2 * p)) & 3));
        let x = golden(s);
        let mut d = 0.0;
        for r in 0..2 {
            for k in 0..2 {
                let hx = h[r][0] * x[0][k] + h[r][1] * x[1][k];
                d += (y[r][k] - hx * es.sqrt()).norm_sqr();
            }
        }
        if d < best.0 {
            best = (d, idx);
        }
    }
    (0..8).rev().map(|b| ((best.1 >> b) & 1) as u8).collect()
}

fn to_mat(m: &ComplexMatrix) -> Mat {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn random_h(lr: usize, lt: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_vec(lr, lt, (0..lr * lt).map(|_| complex_normal(rng)).collect()).unwrap()
}

fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

fn noisy_frame(code: &BlockCode, lr: usize, es: f64, rng: &mut ChaCha8Rng) -> (Vec<u8>, ReceivedFrame, FadingRealization) {
    let bits = random_bits(code.bits_per_codeword(), rng);
    let x = code.encode_bits(&bits).unwrap();
    let h = FadingRealization::constant(random_h(lr, code.lt(), rng), code.n_uses());
    let p = ChannelParams::new(code.lt(), lr, 0.0, es, 1.0, FadingMode::QuasiStatic).unwrap();
    let y = apply_channel(&x, &h, &p, rng).unwrap();
    (bits, y, h)
}

#[test]
fn golden_sphere_matches_independent_brute_force() {
    let q = Constellation::qpsk();
    let code = BlockCode::Golden(q.clone());
    let disp = code.dispersion();
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for trial in 0..1000 {
        let es = [1.0, 5.0, 30.0][trial % 3];
        let (_, y, h) = noisy_frame(&code, 2, es, &mut rng);
        let s = sphere_decode(&y, &h, &disp, es).unwrap();
        let oracle = brute_force(&to_mat(&y.y), &to_mat(h.at(0)), es, &q);
        assert_eq!(s.bits, oracle, "trial {trial}");
    }
}

#[test]
fn metric_is_reproducible() {
    let code = BlockCode::Golden(Constellation::qpsk());
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let (bits, y, h) = noisy_frame(&code, 2, 4.0, &mut rng);
    let x = code.encode_bits(&bits).unwrap();
    let a = word_metric(&y, &h, &x, 4.0);
    let b = word_metric(&y.clone(), &h.clone(), &x.clone(), 4.0);
    assert_eq!(a.to_bits(), b.to_bits());
    let r = ml_exhaustive(&y, &h, &code.codebook(), 4.0).unwrap();
    assert!(r.metric <= a + 1e-12);
}

#[test]
fn sphere_visits_fewer_nodes_at_high_snr() {
    let code = BlockCode::Golden(Constellation::qam16());
    let disp = code.dispersion();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mean_nodes = |snr_db: f64, rng: &mut ChaCha8Rng| {
        let es = 10f64.powf(snr_db / 10.0);
        let total: u64 = (0..300)
            .map(|_| {
                let (_, y, h) = noisy_frame(&code, 2, es, rng);
                sphere_decode(&y, &h, &disp, es).unwrap().nodes
            })
            .sum();
        total as f64 / 300.0
    };
    let low = mean_nodes(0.0, &mut rng);
    let high = mean_nodes(30.0, &mut rng);
    assert!(high <= low, "30 dB {high} vs 0 dB {low}");
}

#[test]
fn noiseless_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(304);
    for code in [
        BlockCode::Golden(Constellation::qam16()),
        BlockCode::Alamouti(Constellation::qam16()),
        BlockCode::SpatialMultiplex {
            constellation: Constellation::qam16(),
            lt: 3,
            uses: 1,
        },
    ] {
        for _ in 0..50 {
            let (bits, y, h) = noisy_frame(&code, 3, 1e12, &mut rng);
            assert_eq!(sphere_decode(&y, &h, &code.dispersion(), 1e12).unwrap().bits, bits, "{}", code.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decision_invariant_to_common_scaling(seed in any::<u64>(), c in 0.05f64..20.0) {
        let code = BlockCode::Golden(Constellation::qpsk());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, y, h) = noisy_frame(&code, 2, 3.0, &mut rng);
        let ys = ReceivedFrame { y: y.y.scale_real(c), ..y.clone() };
        let hs = FadingRealization::new(h.gains().iter().map(|g| g.scale_real(c)).collect()).unwrap();
        let a = sphere_decode(&y, &h, &code.dispersion(), 3.0).unwrap();
        let b = sphere_decode(&ys, &hs, &code.dispersion(), 3.0).unwrap();
        prop_assert_eq!(a.bits, b.bits);
        prop_assert!((b.metric - c * c * a.metric).abs() <= 1e-9 * (1.0 + b.metric));
    }
}

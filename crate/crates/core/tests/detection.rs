use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scopt::channel::{
    detect_ml_bruteforce, detect_rank, detect_threshold, simulate, Channel, ChannelConfig, Detector,
};
use scopt::scopt::ScoptParams;

#[test]
fn rank_matches_brute_force_ml_per_trial() {
    for (k, q, rho) in [
        (1usize, 2usize, 0.5f64),
        (1, 2, 4.0),
        (2, 1, 1.0),
        (2, 1, 8.0),
        (1, 4, 2.0),
    ] {
        let p = ScoptParams::new(k, q).unwrap();
        let ch = Channel::new(&p, rho, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64 * 1000 + q as u64);
        for _ in 0..2_000 {
            let msg = ch.sample_message(&mut rng).unwrap();
            let rx = ch.transmit(&mut rng, &msg).unwrap();
            let a = detect_rank(rx.as_slice(), &p).unwrap();
            let b = detect_ml_bruteforce(rx.as_slice(), &p, rho).unwrap();
            assert_eq!(a.levels(), b.levels());
            assert!(a.is_valid());
        }
    }
}

#[test]
fn decisions_recover_the_message_at_high_snr() {
    let p = ScoptParams::new(2, 3).unwrap();
    let rho = 1e4;
    let ch = Channel::new(&p, rho, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let msg = ch.sample_message(&mut rng).unwrap();
        let rx = ch.transmit(&mut rng, &msg).unwrap();
        for d in [
            detect_threshold(rx.as_slice(), &p, rho).unwrap(),
            detect_rank(rx.as_slice(), &p).unwrap(),
        ] {
            assert_eq!(d.to_message(&p).unwrap(), msg);
        }
    }
}

#[test]
fn all_detectors_agree_on_counts_at_high_snr() {
    let p = ScoptParams::new(1, 3).unwrap();
    for det in [Detector::Threshold, Detector::Rank, Detector::MlBruteforce] {
        let r = simulate(&p, &ChannelConfig::new(1e4, 3_000, 1, det)).unwrap();
        assert_eq!(r.message_errors, 0, "{det}");
    }
}

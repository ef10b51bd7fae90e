use std::time::Duration;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xrsim_audio::{
    accumulate_source, binauralize, direction, psychoacoustic_filter, zoom_soundfield, AmbisonicBlock, AudioBlock,
    AudioConfig, AudioEncoder, AudioError, AudioPlayback, Binauralizer, HrtfSet, PsychoacousticFilter, SourceSpec,
    BLOCK_DEADLINE,
};
use xrsim_core::geometry::{quat_from_yaw_pitch, Quat, Vec3};
use xrsim_core::Timestamp;

const RATE: u32 = 48_000;

fn direct_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, xv) in x.iter().enumerate() {
        for (j, hv) in h.iter().enumerate() {
            y[i + j] += xv * hv;
        }
    }
    y
}

fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn ambi(order: usize, samples: Vec<Vec<f64>>, ts: u64) -> AmbisonicBlock {
    AmbisonicBlock::new(order, AudioBlock::new(samples, RATE, Timestamp::from_nanos(ts)).unwrap()).unwrap()
}

fn random_hrtf(rng: &mut ChaCha8Rng, channels: usize, taps: usize) -> HrtfSet {
    let filters = (0..channels).map(|_| [noise(rng, taps), noise(rng, taps)]).collect();
    HrtfSet::new(filters, RATE).unwrap()
}

#[test]
fn delta_left_and_silent_right_pass_w_through() {
    let taps = 32;
    let mut left = vec![0.0; taps];
    left[0] = 1.0;
    let mut filters = vec![[left, vec![0.0; taps]]];
    filters.extend((1..4).map(|_| [vec![0.0; taps], vec![0.0; taps]]));
    let hrtf = HrtfSet::new(filters, RATE).unwrap();
    let mut state = Binauralizer::new(&hrtf, 4, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 {
        let w = noise(&mut rng, 256);
        let mut ch = vec![w.clone()];
        ch.extend((1..4).map(|_| vec![0.0; 256]));
        let out = binauralize(&ambi(1, ch, 0), &mut state).unwrap();
        let dl = out.samples[0].iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dr = out.samples[1].iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(dl < 1e-6 && dr < 1e-6, "left {dl:e} right {dr:e}");
    }
}

#[test]
fn fft_path_matches_direct_convolution_across_blocks() {
    let (block, taps, blocks, order) = (1024, 256, 4, 2);
    let channels = 9;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let hrtf = random_hrtf(&mut rng, channels, taps);
    let inputs: Vec<Vec<f64>> = (0..channels).map(|_| noise(&mut rng, block * blocks)).collect();
    let mut expected = [vec![0.0; block * blocks + taps - 1], vec![0.0; block * blocks + taps - 1]];
    for (c, x) in inputs.iter().enumerate() {
        for (ear, acc) in expected.iter_mut().enumerate() {
            for (a, v) in acc.iter_mut().zip(direct_convolve(x, hrtf.filter(c, ear))) {
                *a += v;
            }
        }
    }
    let mut state = Binauralizer::new(&hrtf, channels, block).unwrap();
    let mut worst = 0.0f64;
    for k in 0..blocks {
        let chunk = inputs.iter().map(|x| x[k * block..(k + 1) * block].to_vec()).collect();
        let out = state.process(&ambi(order, chunk, 0)).unwrap();
        for (got, want) in out.samples.iter().zip(&expected) {
            for (g, w) in got.iter().zip(&want[k * block..]) {
                worst = worst.max((g - w).abs());
            }
        }
    }
    println!("binaural FFT vs direct convolution: max abs diff {worst:.3e}");
    assert!(worst < 1e-5);
}

#[test]
fn long_filters_carry_tails_over_several_blocks() {
    let (block, taps) = (64, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fir = noise(&mut rng, taps);
    let x = noise(&mut rng, block * 6);
    let mut f = PsychoacousticFilter::new(vec![fir.clone(); 4], block).unwrap();
    let expected = direct_convolve(&x, &fir);
    for k in 0..6 {
        let ch = vec![x[k * block..(k + 1) * block].to_vec(); 4];
        let out = f.process(&ambi(1, ch, 0)).unwrap();
        for i in 0..block {
            assert!((out.block.samples[2][i] - expected[k * block + i]).abs() < 1e-9);
        }
    }
}

#[test]
fn consecutive_sine_blocks_join_smoothly() {
    let block = 1024;
    let hrtf = HrtfSet::synthetic(2, RATE, 256).unwrap();
    let mut state = Binauralizer::new(&hrtf, 9, block).unwrap();
    let sine: Vec<f64> = (0..2 * block).map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / RATE as f64).sin() * 0.5).collect();
    let mut src = vec![0.0; 2 * block];
    src.copy_from_slice(&sine);
    let mut out = [Vec::new(), Vec::new()];
    // warm up so the filter transient is out of the way
    let mut warm = AmbisonicBlock::silent(2, block, RATE, Timestamp::ZERO).unwrap();
    let pre: Vec<f64> = (0..block).map(|i| (2.0 * std::f64::consts::PI * 440.0 * (i as f64 - block as f64) / RATE as f64).sin() * 0.5).collect();
    accumulate_source(&mut warm, &pre, &direction(0.6, 0.2), 1.0);
    state.process(&warm).unwrap();
    for k in 0..2 {
        let mut b = AmbisonicBlock::silent(2, block, RATE, Timestamp::ZERO).unwrap();
        accumulate_source(&mut b, &src[k * block..(k + 1) * block], &direction(0.6, 0.2), 1.0);
        let o = state.process(&b).unwrap();
        for (acc, s) in out.iter_mut().zip(&o.samples) {
            acc.extend_from_slice(s);
        }
    }
    for ear in out {
        let d2: Vec<f64> = ear.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).collect();
        let boundary = d2[block - 2].max(d2[block - 1]);
        let interior = d2[..block - 3].iter().chain(&d2[block + 1..]).fold(0.0f64, |a, &b| a.max(b));
        assert!(boundary <= 2.0 * interior, "boundary {boundary} interior {interior}");
    }
}

#[test]
fn psychoacoustic_filter_identities() {
    let (block, taps) = (128, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ch: Vec<Vec<f64>> = (0..9).map(|_| noise(&mut rng, block)).collect();
    let input = ambi(2, ch.clone(), 0);
    let mut delta = vec![0.0; taps];
    delta[0] = 1.0;
    let mut id = PsychoacousticFilter::new(vec![delta; 9], block).unwrap();
    let out = psychoacoustic_filter(&input, &mut id).unwrap();
    for (a, b) in out.block.samples.iter().flatten().zip(ch.iter().flatten()) {
        assert!((a - b).abs() < 1e-6);
    }
    let mut zero = PsychoacousticFilter::new(vec![vec![0.0; taps]; 9], block).unwrap();
    let out = zero.process(&input).unwrap();
    assert!(out.block.samples.iter().flatten().all(|v| v.abs() < 1e-12));
}

#[test]
fn psychoacoustic_filter_matches_direct_convolution() {
    let (block, taps) = (1024, 256);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let firs: Vec<Vec<f64>> = (0..4).map(|_| noise(&mut rng, taps)).collect();
    let x: Vec<Vec<f64>> = (0..4).map(|_| noise(&mut rng, 2 * block)).collect();
    let mut f = PsychoacousticFilter::new(firs.clone(), block).unwrap();
    let mut worst = 0.0f64;
    for k in 0..2 {
        let chunk = x.iter().map(|c| c[k * block..(k + 1) * block].to_vec()).collect();
        let out = f.process(&ambi(1, chunk, 0)).unwrap();
        for c in 0..4 {
            let e = direct_convolve(&x[c], &firs[c]);
            for i in 0..block {
                worst = worst.max((out.block.samples[c][i] - e[k * block + i]).abs());
            }
        }
    }
    assert!(worst < 1e-5, "{worst:e}");
}

#[test]
fn mismatches_are_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let small = random_hrtf(&mut rng, 4, 8);
    assert!(matches!(Binauralizer::new(&small, 9, 64), Err(AudioError::Mismatch { .. })));
    let mut st = Binauralizer::new(&small, 4, 64).unwrap();
    let mut wrong_rate = ambi(1, vec![vec![0.0; 64]; 4], 0);
    wrong_rate.block.sample_rate = 44_100;
    assert!(matches!(st.process(&wrong_rate), Err(AudioError::Mismatch { what: "sample rate", .. })));
    assert!(st.process(&ambi(1, vec![vec![0.0; 32]; 4], 0)).is_err());
    assert!(PsychoacousticFilter::new(vec![vec![1.0; 4], vec![1.0; 5]], 64).is_err());
}

#[test]
fn zero_zoom_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let b = ambi(2, (0..9).map(|_| noise(&mut rng, 64)).collect(), 0);
    let z = zoom_soundfield(&b, 0.0);
    assert_eq!(z.block, b);
    assert!(!z.clamped);
}

#[test]
fn forward_zoom_raises_the_frontal_share() {
    let mut b = AmbisonicBlock::silent(2, 1, RATE, Timestamp::ZERO).unwrap();
    accumulate_source(&mut b, &[1.0], &Vec3::x(), 1.0);
    let ratio = |b: &AmbisonicBlock| b.block.samples[3][0].powi(2) / b.energy_at(0);
    let mut last = ratio(&b);
    for z in [0.1, 0.3, 0.5, 0.8, 1.0] {
        let r = ratio(&zoom_soundfield(&b, z).block);
        assert!(r > last, "zoom {z}: {r} <= {last}");
        last = r;
    }
}

#[test]
fn out_of_range_zoom_is_clamped_and_flagged() {
    let mut b = AmbisonicBlock::silent(1, 1, RATE, Timestamp::ZERO).unwrap();
    accumulate_source(&mut b, &[1.0], &Vec3::x(), 1.0);
    let z = zoom_soundfield(&b, 3.0);
    assert!(z.clamped);
    assert_eq!(z.block, zoom_soundfield(&b, 1.0).block);
    assert!(zoom_soundfield(&b, f64::NAN).clamped);
}

#[test]
fn one_block_chain_fits_the_budget() {
    let config = AudioConfig::default();
    let src = SourceSpec::new(xrsim_audio::wav::sine_pcm16(440.0, 0.5, RATE, 8192), direction(0.5, 0.1), 1.0).unwrap();
    let mut enc = AudioEncoder::new(config.clone(), vec![src]).unwrap();
    let mut play = AudioPlayback::with_synthetic_hrtf(&config).unwrap();
    let mut best = Duration::MAX;
    for _ in 0..5 {
        let block = enc.next_block().unwrap();
        let out = play.process(&block, &quat_from_yaw_pitch(0.3, 0.1)).unwrap();
        assert_eq!(out.stereo.channels(), 2);
        assert_eq!(out.stereo.len(), 1024);
        best = best.min(out.elapsed);
    }
    println!("1024-sample playback block: {:.3} ms (budget {:.1} ms)", best.as_secs_f64() * 1e3, BLOCK_DEADLINE.as_secs_f64() * 1e3);
    assert!(best < BLOCK_DEADLINE);
}

fn chain(x: &[f64], y: &[f64], a: f64, b: f64, q: &Quat, zoom: f64) -> Vec<Vec<f64>> {
    let config = AudioConfig {
        order: 2,
        block_size: 256,
        hrtf_taps: 64,
        zoom,
        ..AudioConfig::default()
    };
    let mut play = AudioPlayback::with_synthetic_hrtf(&config).unwrap();
    let mut field = AmbisonicBlock::silent(2, 256, RATE, Timestamp::ZERO).unwrap();
    accumulate_source(&mut field, x, &direction(0.4, 0.0), a);
    accumulate_source(&mut field, y, &direction(-1.2, 0.5), b);
    play.process(&field, q).unwrap().stereo.samples
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn whole_chain_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0, yaw in -3.0f64..3.0, zoom in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = noise(&mut rng, 256);
        let y = noise(&mut rng, 256);
        let q = quat_from_yaw_pitch(yaw, 0.2);
        let mixed = chain(&x, &y, a, b, &q, zoom);
        let only_x = chain(&x, &y, 1.0, 0.0, &q, zoom);
        let only_y = chain(&x, &y, 0.0, 1.0, &q, zoom);
        for ear in 0..2 {
            for i in 0..256 {
                let e = a * only_x[ear][i] + b * only_y[ear][i];
                prop_assert!((mixed[ear][i] - e).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zoom_output_stays_finite(z in -1.0f64..=1.0, az in -3.1f64..3.1, el in -1.5f64..1.5) {
        let mut b = AmbisonicBlock::silent(3, 4, RATE, Timestamp::ZERO).unwrap();
        accumulate_source(&mut b, &[1.0, -1.0, 0.5, 0.0], &direction(az, el), 1.0);
        let out = zoom_soundfield(&b, z);
        prop_assert!(!out.clamped);
        prop_assert!(out.block.block.samples.iter().flatten().all(|v| v.is_finite() && v.abs() <= 2.0));
    }
}

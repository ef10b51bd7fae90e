use hound::{SampleFormat, WavSpec, WavWriter};
use xrsim_audio::wav::{read_mono_pcm16, sine_pcm16, write_pcm16};
use xrsim_audio::{AudioError, HrtfSet};

#[test]
fn mono_pcm16_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tone.wav");
    let tone = sine_pcm16(1000.0, 0.25, 48_000, 480);
    let as_float: Vec<f64> = tone.iter().map(|&s| s as f64 / 32768.0).collect();
    write_pcm16(&path, &[as_float], 48_000).unwrap();
    let (back, rate) = read_mono_pcm16(&path).unwrap();
    assert_eq!(rate, 48_000);
    assert_eq!(back, tone);
}

#[test]
fn stereo_files_are_not_sources_and_output_clips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("st.wav");
    write_pcm16(&path, &[vec![2.0, -2.0], vec![0.0, 0.5]], 48_000).unwrap();
    assert!(matches!(read_mono_pcm16(&path), Err(AudioError::Input(_))));
    let mut r = hound::WavReader::open(&path).unwrap();
    let s: Vec<i16> = r.samples::<i16>().map(Result::unwrap).collect();
    assert_eq!(s, vec![32767, 0, -32768, 16384]);
}

#[test]
fn external_fir_sets_load_from_float_wav() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hrtf.wav");
    let spec = WavSpec {
        channels: 8,
        sample_rate: 48_000,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(&path, spec).unwrap();
    for tap in 0..16 {
        for ch in 0..8 {
            w.write_sample((ch * 100 + tap) as f32 / 1000.0).unwrap();
        }
    }
    w.finalize().unwrap();
    let h = HrtfSet::load_wav(&path).unwrap();
    assert_eq!((h.channels(), h.taps(), h.sample_rate()), (4, 16, 48_000));
    assert!((h.filter(2, 1)[3] - 0.503).abs() < 1e-6);
    assert!((h.filter(0, 0)[15] - 0.015).abs() < 1e-6);
}

//! Block FFT convolution with overlap-add.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::AudioError;

/// One filter from input channel `input` to output channel `output`.
#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    pub input: usize,
    pub output: usize,
    pub fir: Vec<f64>,
}

/// A fixed matrix of FIR filters applied block by block.
///
/// Every output is `Σ_routes IFFT(FFT(input)·FFT(fir))`, with the tail past
/// the block carried into the next call. The FFT size is the next power of
/// two at or above `block_size + taps − 1`.
pub struct Convolver {
    block_size: usize,
    taps: usize,
    fft_len: usize,
    inputs: usize,
    outputs: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    routes: Vec<(usize, usize, Vec<Complex<f64>>)>,
    tails: Vec<Vec<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver")
            .field("block_size", &self.block_size)
            .field("taps", &self.taps)
            .field("fft_len", &self.fft_len)
            .field("inputs", &self.inputs)
            .field("outputs", &self.outputs)
            .field("routes", &self.routes.len())
            .finish()
    }
}

impl Convolver {
    pub fn new(block_size: usize, inputs: usize, outputs: usize, routes: Vec<Route>) -> Result<Self, AudioError> {
        if block_size == 0 {
            return Err(AudioError::Config("block size must be positive".into()));
        }
        let taps = routes.first().map_or(1, |r| r.fir.len());
        if taps == 0 {
            return Err(AudioError::Config("filters must have at least one tap".into()));
        }
        for r in &routes {
            if r.fir.len() != taps {
                return Err(AudioError::Mismatch {
                    what: "filter length",
                    expected: taps,
                    actual: r.fir.len(),
                });
            }
            if r.input >= inputs || r.output >= outputs {
                return Err(AudioError::Config(format!(
                    "route {}->{} outside {inputs}x{outputs}",
                    r.input, r.output
                )));
            }
            if r.fir.iter().any(|v| !v.is_finite()) {
                return Err(AudioError::Input("non-finite filter tap".into()));
            }
        }
        let fft_len = (block_size + taps - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let routes = routes
            .into_iter()
            .map(|r| {
                let mut buf: Vec<Complex<f64>> = r.fir.iter().map(|&v| Complex::new(v, 0.0)).collect();
                buf.resize(fft_len, Complex::default());
                forward.process(&mut buf);
                (r.input, r.output, buf)
            })
            .collect();
        Ok(Self {
            block_size,
            taps,
            fft_len,
            inputs,
            outputs,
            forward,
            inverse,
            routes,
            tails: vec![vec![0.0; taps - 1]; outputs],
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Clears the overlap state.
    pub fn reset(&mut self) {
        self.tails.iter_mut().for_each(|t| t.iter_mut().for_each(|v| *v = 0.0));
    }

    pub fn process(&mut self, input: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, AudioError> {
        if input.len() != self.inputs {
            return Err(AudioError::Mismatch {
                what: "input channel count",
                expected: self.inputs,
                actual: input.len(),
            });
        }
        if let Some(bad) = input.iter().find(|c| c.len() != self.block_size) {
            return Err(AudioError::Mismatch {
                what: "block size",
                expected: self.block_size,
                actual: bad.len(),
            });
        }
        let n = self.fft_len;
        let mut spectra: Vec<Option<Vec<Complex<f64>>>> = vec![None; self.inputs];
        let mut acc = vec![vec![Complex::default(); n]; self.outputs];
        for (i, o, h) in &self.routes {
            let x = spectra[*i].get_or_insert_with(|| {
                let mut buf: Vec<Complex<f64>> = input[*i].iter().map(|&v| Complex::new(v, 0.0)).collect();
                buf.resize(n, Complex::default());
                self.forward.process(&mut buf);
                buf
            });
            for ((a, xv), hv) in acc[*o].iter_mut().zip(x.iter()).zip(h) {
                *a += xv * hv;
            }
        }
        let scale = 1.0 / n as f64;
        let b = self.block_size;
        let tail_len = self.taps - 1;
        let mut out = Vec::with_capacity(self.outputs);
        for (spec, tail) in acc.iter_mut().zip(self.tails.iter_mut()) {
            self.inverse.process(spec);
            let y: Vec<f64> = spec.iter().map(|c| c.re * scale).collect();
            let block: Vec<f64> = (0..b).map(|k| y[k] + tail.get(k).copied().unwrap_or(0.0)).collect();
            let next: Vec<f64> = (0..tail_len)
                .map(|j| y[b + j] + tail.get(b + j).copied().unwrap_or(0.0))
                .collect();
            *tail = next;
            out.push(block);
        }
        Ok(out)
    }
}

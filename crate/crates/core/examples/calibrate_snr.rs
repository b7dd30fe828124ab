//! Recompute the per-size SNR floors frozen in `golden::snr_floor_db`.
//!
//! For each size the floor is the 1st percentile of the SNR of the
//! fixed-point transform over a batch of seeded random inputs, measured
//! against a double-precision FFT.

use rustfft::{num_complex::Complex64, FftPlanner};
use ttafft::golden::{fft_fixed, snr_db, FloatSpectrum};
use ttafft::{FftPlan, SampleVector};

fn reference(x: &SampleVector) -> FloatSpectrum {
    let mut buf: Vec<Complex64> = x.as_slice().iter().map(|w| {
        let (re, im) = w.to_f64();
        Complex64::new(re, im)
    }).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    FloatSpectrum { bins: buf.iter().map(|c| (c.re, c.im)).collect() }
}

fn main() {
    for plan in FftPlan::all() {
        let n = plan.n_points();
        let seeds = ttafft::golden::snr_calibration_seeds(n);
        let mut snrs: Vec<f64> = seeds
            .map(|seed| {
                let x = SampleVector::random(n, seed);
                snr_db(&fft_fixed(&plan, &x).unwrap(), &reference(&x), &plan).unwrap()
            })
            .collect();
        snrs.sort_by(f64::total_cmp);
        let p1 = snrs[snrs.len() / 100];
        let mean = snrs.iter().sum::<f64>() / snrs.len() as f64;
        println!("N={n:>5} seeds={:>4} min={:.4} p1={p1:.6} floor={:.2} mean={mean:.3}", snrs.len(), snrs[0], (p1 * 100.0).floor() / 100.0);
    }
}

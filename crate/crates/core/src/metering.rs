//! Cycle-synchronous power metering.
//!
//! Converts sampled voltage and current waveforms into electrical records
//! (RMS voltage and current, active, reactive and apparent power, power
//! factor and frequency). All quantities are averaged over windows spanning
//! a whole number of mains cycles, which is what makes the averaged products
//! exact for periodic signals.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of whole mains cycles averaged for every report tick.
pub const ASSP_WINDOW_CYCLES: usize = 2;

/// Minimum number of samples per mains cycle accepted by the meter.
pub const MIN_SAMPLES_PER_CYCLE: usize = 40;

/// Zero-crossing hysteresis as a fraction of the window peak.
const HYSTERESIS_FRACTION: f64 = 0.05;

/// Relative spread allowed between crossing intervals of an aligned window.
const ALIGNMENT_TOLERANCE: f64 = 0.05;

/// A fixed-rate buffer of instantaneous samples (volts or amperes).
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    sample_rate: u32,
    samples: Vec<f64>,
    start_time: f64,
}

impl Waveform {
    pub fn new(sample_rate: u32, samples: Vec<f64>, start_time: f64) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("waveform has no samples"));
        }
        if let Some(idx) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {idx}")));
        }
        if !start_time.is_finite() {
            return Err(Error::invalid("start time is not finite"));
        }
        Ok(Self {
            sample_rate,
            samples,
            start_time,
        })
    }

    /// Samples `f(t)` at `sample_rate` for `len` samples starting at `start_time`.
    pub fn from_fn(
        sample_rate: u32,
        len: usize,
        start_time: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let dt = 1.0 / sample_rate as f64;
        let samples = (0..len).map(|n| f(start_time + n as f64 * dt)).collect();
        Self::new(sample_rate, samples, start_time)
    }

    pub fn zeros(sample_rate: u32, len: usize, start_time: f64) -> Result<Self> {
        Self::new(sample_rate, vec![0.0; len], start_time)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    pub fn rms(&self) -> f64 {
        mean_square(&self.samples).sqrt()
    }

    /// Sub-window `[from, to)` in sample indices.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.samples.len() {
            return Err(Error::invalid(format!(
                "slice [{from}, {to}) out of range for {} samples",
                self.samples.len()
            )));
        }
        Self::new(
            self.sample_rate,
            self.samples[from..to].to_vec(),
            self.start_time + from as f64 / self.sample_rate as f64,
        )
    }

    /// Same rate and timing, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::invalid("replacement samples differ in length"));
        }
        Self::new(self.sample_rate, samples, self.start_time)
    }

    fn check_compatible(&self, other: &Waveform) -> Result<()> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::invalid(format!(
                "sample rates differ: {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        if self.samples.len() != other.samples.len() {
            return Err(Error::invalid(format!(
                "waveform lengths differ: {} vs {}",
                self.samples.len(),
                other.samples.len()
            )));
        }
        Ok(())
    }
}

/// One report tick of metered quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricalRecord {
    /// Tick time in seconds from the simulation origin.
    pub t: f64,
    pub v_rms: f64,
    pub i_rms: f64,
    /// Active power, W.
    pub p: f64,
    /// Reactive power, var. Positive when the current lags.
    pub q: f64,
    /// Apparent power, VA.
    pub s_va: f64,
    pub pf: f64,
    pub freq: f64,
}

/// Sign applied to reactive power: lagging (inductive) currents are positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeadLagSign {
    Lead,
    Lag,
}

impl LeadLagSign {
    pub fn value(self) -> f64 {
        match self {
            LeadLagSign::Lead => -1.0,
            LeadLagSign::Lag => 1.0,
        }
    }

    pub fn from_value(v: i32) -> Result<Self> {
        match v {
            -1 => Ok(LeadLagSign::Lead),
            1 => Ok(LeadLagSign::Lag),
            other => Err(Error::invalid(format!("lead/lag sign must be -1 or +1, got {other}"))),
        }
    }
}

fn mean_square(samples: &[f64]) -> f64 {
    samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64
}

/// True RMS of a sample buffer.
pub fn rms(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("rms of an empty waveform"));
    }
    Ok(mean_square(samples).sqrt())
}

fn hysteresis(samples: &[f64]) -> f64 {
    samples.iter().fold(0.0_f64, |m, v| m.max(v.abs())) * HYSTERESIS_FRACTION
}

/// Fractional sample positions of upward zero crossings, with hysteresis so
/// that a noisy crossing is counted once.
fn rising_crossings(samples: &[f64]) -> Vec<f64> {
    let h = hysteresis(samples);
    let mut out = Vec::new();
    if h == 0.0 {
        return out;
    }
    let mut armed = false;
    for k in 1..samples.len() {
        let (prev, cur) = (samples[k - 1], samples[k]);
        if prev < -h {
            armed = true;
        }
        if armed && prev < 0.0 && cur >= 0.0 {
            out.push((k - 1) as f64 + (-prev) / (cur - prev));
            armed = false;
        }
    }
    out
}

/// Mains frequency from upward zero crossings of `u`, interpolating each
/// crossing instant linearly between its bracketing samples.
pub fn measure_frequency(u: &Waveform) -> Result<f64> {
    let crossings = rising_crossings(u.samples());
    if crossings.len() < 2 {
        return Err(Error::MeasurementUnavailable(format!(
            "{} rising zero crossing(s) found, need at least 2",
            crossings.len()
        )));
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Ok((crossings.len() - 1) as f64 * u.sample_rate() as f64 / span)
}

/// Cycle layout of a window that is assumed to be periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleInfo {
    pub cycles: usize,
    pub freq: f64,
}

/// Treats the window as one period of a periodic signal and counts upward
/// crossings around the loop, including the wrap from the last sample back
/// to the first. A whole-cycle window has evenly spaced crossings around the
/// loop; anything else is rejected.
pub fn cycle_structure(u: &Waveform) -> Result<CycleInfo> {
    let x = u.samples();
    let n = x.len();
    let h = hysteresis(x);
    if h == 0.0 || n < 2 {
        return Err(Error::WindowAlignment("voltage window has no zero crossings".into()));
    }
    let start = x
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v < x[best] { k } else { best });
    let mut positions = Vec::new();
    let mut armed = x[start] < -h;
    for j in 1..=n {
        let prev = x[(start + j - 1) % n];
        let cur = x[(start + j) % n];
        if prev < -h {
            armed = true;
        }
        if armed && prev < 0.0 && cur >= 0.0 {
            positions.push((start + j - 1) as f64 + (-prev) / (cur - prev));
            armed = false;
        }
    }
    let cycles = positions.len();
    if cycles == 0 {
        return Err(Error::WindowAlignment(
            "no rising zero crossing of voltage in window".into(),
        ));
    }
    if n / cycles < MIN_SAMPLES_PER_CYCLE {
        return Err(Error::invalid(format!(
            "{} samples per cycle, need at least {MIN_SAMPLES_PER_CYCLE}",
            n / cycles
        )));
    }
    let rate = u.sample_rate() as f64;
    if cycles == 1 {
        return Ok(CycleInfo {
            cycles,
            freq: rate / n as f64,
        });
    }
    let expected = n as f64 / cycles as f64;
    let wrap = positions[0] + n as f64 - positions[cycles - 1];
    let intervals = positions.windows(2).map(|w| w[1] - w[0]).chain(std::iter::once(wrap));
    for gap in intervals {
        if ((gap - expected) / expected).abs() > ALIGNMENT_TOLERANCE {
            return Err(Error::WindowAlignment(format!(
                "window of {n} samples is not a whole number of cycles \
                 (crossing interval {gap:.2} vs {expected:.2} samples)"
            )));
        }
    }
    let span = positions[cycles - 1] - positions[0];
    Ok(CycleInfo {
        cycles,
        freq: (cycles - 1) as f64 * rate / span,
    })
}

type Basis = Rc<(Vec<f64>, Vec<f64>)>;

thread_local! {
    static BASIS_CACHE: RefCell<HashMap<(usize, usize), Basis>> = RefCell::new(HashMap::new());
}

/// Cosine and sine tables for `cycles` periods over `len` samples.
fn basis(len: usize, cycles: usize) -> Basis {
    BASIS_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, cycles))
            .or_insert_with(|| {
                let step = 2.0 * PI * cycles as f64 / len as f64;
                let cos = (0..len).map(|n| (step * n as f64).cos()).collect();
                let sin = (0..len).map(|n| (step * n as f64).sin()).collect();
                Rc::new((cos, sin))
            })
            .clone()
    })
}

/// Peak-amplitude phasor `X` of the fundamental, such that the fundamental
/// component is `Re{X·exp(jθ)}` with θ advancing `2π·cycles` over the window.
pub fn fundamental_phasor(samples: &[f64], cycles: usize) -> Complex64 {
    let b = basis(samples.len(), cycles);
    let (mut re, mut im) = (0.0, 0.0);
    for ((x, c), s) in samples.iter().zip(&b.0).zip(&b.1) {
        re += x * c;
        im -= x * s;
    }
    let scale = 2.0 / samples.len() as f64;
    Complex64::new(re * scale, im * scale)
}

/// Inverse of [`fundamental_phasor`]: samples `Re{X·exp(jθ)}`.
pub fn synthesize(phasor: Complex64, len: usize, cycles: usize) -> Vec<f64> {
    let b = basis(len, cycles);
    b.0.iter()
        .zip(&b.1)
        .map(|(c, s)| phasor.re * c - phasor.im * s)
        .collect()
}

/// Whether the fundamental of `i` lags (+1) or leads (−1) the fundamental of
/// `u`, from the sign of the correlation between `i` and the 90°-delayed
/// voltage fundamental. A zero current is reported as lagging.
pub fn lead_lag_sign(u: &Waveform, i: &Waveform) -> Result<LeadLagSign> {
    u.check_compatible(i)?;
    let info = cycle_structure(u)?;
    if i.rms() == 0.0 {
        return Ok(LeadLagSign::Lag);
    }
    let quadrature = fundamental_phasor(u.samples(), info.cycles) * Complex64::new(0.0, -1.0);
    let reference = synthesize(quadrature, u.len(), info.cycles);
    let corr: f64 = i.samples().iter().zip(&reference).map(|(a, b)| a * b).sum();
    let scale = (mean_square(i.samples()) * mean_square(&reference)).sqrt() * u.len() as f64;
    // an in-phase current leaves only rounding noise in the correlation
    Ok(if corr >= -1e-9 * scale {
        LeadLagSign::Lag
    } else {
        LeadLagSign::Lead
    })
}

/// Electrical record for one whole-cycle window.
pub fn compute_record(
    u: &Waveform,
    i: &Waveform,
    sign: LeadLagSign,
    t: f64,
) -> Result<ElectricalRecord> {
    u.check_compatible(i)?;
    let info = cycle_structure(u)?;
    Ok(record_from_samples(u.samples(), i.samples(), sign, t, info.freq))
}

fn record_from_samples(u: &[f64], i: &[f64], sign: LeadLagSign, t: f64, freq: f64) -> ElectricalRecord {
    let n = u.len() as f64;
    let v_rms = mean_square(u).sqrt();
    let i_rms = mean_square(i).sqrt();
    let p = u.iter().zip(i).map(|(a, b)| a * b).sum::<f64>() / n;
    let s_va = v_rms * i_rms;
    // rounding can leave s² a hair below p² for purely resistive windows
    let q = sign.value() * (s_va * s_va - p * p).max(0.0).sqrt();
    let pf = if s_va > 0.0 { (p / s_va).clamp(-1.0, 1.0) } else { 0.0 };
    ElectricalRecord {
        t,
        v_rms,
        i_rms,
        p,
        q,
        s_va,
        pf,
        freq,
    }
}

/// Determines the reactive sign for the window and meters it.
pub fn meter_window(u: &Waveform, i: &Waveform, t: f64) -> Result<ElectricalRecord> {
    let sign = lead_lag_sign(u, i)?;
    compute_record(u, i, sign, t)
}

/// Sample indices at which whole voltage cycles start: the first sample at or
/// after each upward crossing. A waveform that starts on a rising zero counts
/// as starting a cycle at index 0.
fn cycle_starts(u: &[f64]) -> Vec<usize> {
    let mut starts = Vec::new();
    let h = hysteresis(u);
    if u.len() > 1 && u[0] >= 0.0 && u[0] < h && u[1] > u[0] {
        starts.push(0);
    }
    starts.extend(
        rising_crossings(u)
            .into_iter()
            .map(|pos| (pos - 1e-6).ceil().max(0.0) as usize),
    );
    starts.dedup();
    starts
}

/// Meters a pair of long waveforms at `report_rate` ticks. Each tick ends at
/// `start + k / report_rate` and averages the [`ASSP_WINDOW_CYCLES`] complete
/// voltage cycles that end at the last upward crossing at or before it.
///
/// The outer error covers unusable inputs; the inner one is per tick, e.g. a
/// tick too early in the waveform to have two complete cycles behind it.
pub fn assp_stream(
    u: &Waveform,
    i: &Waveform,
    report_rate: f64,
) -> Result<Vec<Result<ElectricalRecord>>> {
    u.check_compatible(i)?;
    if !(report_rate > 0.0 && report_rate.is_finite()) {
        return Err(Error::invalid("report rate must be positive"));
    }
    let ticks_f = u.duration() * report_rate;
    let ticks = ticks_f.round();
    if (ticks_f - ticks).abs() > 1e-6 || ticks < 1.0 {
        return Err(Error::invalid(format!(
            "duration {:.6} s is not a whole number of {report_rate} Hz ticks",
            u.duration()
        )));
    }
    let rate = u.sample_rate() as f64;
    let starts = cycle_starts(u.samples());
    let mut out = Vec::with_capacity(ticks as usize);
    for k in 1..=ticks as usize {
        let end = (k as f64 * rate / report_rate).round() as usize;
        let t = u.start_time() + k as f64 / report_rate;
        let last = starts.iter().rposition(|&s| s <= end);
        let record = match last {
            Some(idx) if idx >= ASSP_WINDOW_CYCLES => {
                let (from, to) = (starts[idx - ASSP_WINDOW_CYCLES], starts[idx]);
                u.slice(from, to)
                    .and_then(|uw| i.slice(from, to).map(|iw| (uw, iw)))
                    .and_then(|(uw, iw)| meter_window(&uw, &iw, t))
            }
            _ => Err(Error::WindowAlignment(format!(
                "tick at {t:.4} s has fewer than {ASSP_WINDOW_CYCLES} complete cycles behind it"
            ))),
        };
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const RATE: u32 = 10_000;
    const F: f64 = 50.0;
    const V: f64 = 235.0;

    fn sine(amp_rms: f64, phase: f64, cycles: f64) -> Waveform {
        let len = (cycles * RATE as f64 / F).round() as usize;
        Waveform::from_fn(RATE, len, 0.0, |t| {
            amp_rms * 2f64.sqrt() * (2.0 * PI * F * t - phase).sin()
        })
        .unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rms_of_sine_square_and_zero() {
        assert!(rel(sine(V, 0.0, 3.0).rms(), V) < 1e-12);
        assert_eq!(rms(&[0.0; 64]).unwrap(), 0.0);
        let square: Vec<f64> = (0..400).map(|n| if n % 2 == 0 { 10.0 } else { -10.0 }).collect();
        assert_eq!(rms(&square).unwrap(), 10.0);
    }

    #[test]
    fn empty_waveform_is_rejected() {
        assert!(matches!(rms(&[]), Err(Error::InvalidInput(_))));
        assert!(matches!(
            Waveform::new(RATE, vec![], 0.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(Waveform::new(RATE, vec![1.0, f64::NAN], 0.0).is_err());
    }

    #[test]
    fn resistive_load_has_unity_power_factor() {
        let u = sine(V, 0.0, 2.0);
        let r = 55.225;
        let i = u.with_samples(u.samples().iter().map(|v| v / r).collect()).unwrap();
        let rec = meter_window(&u, &i, 0.04).unwrap();
        assert!(rel(rec.p, 1000.0) < 1e-9, "p = {}", rec.p);
        assert!(rec.q.abs() < 1e-3, "q = {}", rec.q);
        assert!(rel(rec.pf, 1.0) < 1e-12);
        assert!((rec.freq - 50.0).abs() < 1e-9);
    }

    #[test]
    fn zero_current_gives_zero_power_and_pf() {
        let u = sine(V, 0.0, 2.0);
        let i = Waveform::zeros(RATE, u.len(), 0.0).unwrap();
        let rec = meter_window(&u, &i, 0.0).unwrap();
        assert_eq!((rec.p, rec.q, rec.i_rms, rec.pf), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(lead_lag_sign(&u, &i).unwrap(), LeadLagSign::Lag);
    }

    #[test]
    fn sign_follows_phase_relationship() {
        let u = sine(V, 0.0, 2.0);
        let deg = PI / 180.0;
        assert_eq!(lead_lag_sign(&u, &sine(5.0, 30.0 * deg, 2.0)).unwrap(), LeadLagSign::Lag);
        assert_eq!(lead_lag_sign(&u, &sine(5.0, -30.0 * deg, 2.0)).unwrap(), LeadLagSign::Lead);
        assert_eq!(lead_lag_sign(&u, &sine(5.0, 0.0, 2.0)).unwrap(), LeadLagSign::Lag);
    }

    #[test]
    fn mismatched_inputs_are_invalid() {
        let u = sine(V, 0.0, 2.0);
        let short = sine(5.0, 0.0, 1.0);
        assert!(matches!(compute_record(&u, &short, LeadLagSign::Lag, 0.0), Err(Error::InvalidInput(_))));
        let other_rate = Waveform::zeros(RATE / 2, u.len(), 0.0).unwrap();
        assert!(matches!(compute_record(&u, &other_rate, LeadLagSign::Lag, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn fractional_cycle_window_is_rejected() {
        let u = sine(V, 0.0, 2.5);
        let i = sine(5.0, 0.3, 2.5);
        assert!(matches!(compute_record(&u, &i, LeadLagSign::Lag, 0.0), Err(Error::WindowAlignment(_))));
    }

    #[test]
    fn frequency_of_clean_sine() {
        let f = measure_frequency(&sine(V, 0.0, 5.0)).unwrap();
        assert!((f - 50.0).abs() < 0.01, "{f}");
    }

    #[test]
    fn frequency_with_amplitude_noise_stays_in_band() {
        // 1 % gaussian perturbation of each cycle's amplitude
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let per_cycle = (RATE as f64 / F) as usize;
        for _ in 0..20 {
            let gains: Vec<f64> = (0..5).map(|_| 1.0 + noise.sample(&mut rng)).collect();
            let clean = sine(V, 0.0, 5.0);
            let noisy: Vec<f64> = clean
                .samples()
                .iter()
                .enumerate()
                .map(|(n, v)| v * gains[n / per_cycle])
                .collect();
            let f = measure_frequency(&clean.with_samples(noisy).unwrap()).unwrap();
            assert!((f - 50.0).abs() < 0.05, "{f}");
        }
    }

    #[test]
    fn white_noise_does_not_double_count_crossings() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let peak = V * 2f64.sqrt();
        let noise = Normal::new(0.0, 0.01 * peak).unwrap();
        let clean = sine(V, 0.0, 5.0);
        let noisy: Vec<f64> = clean.samples().iter().map(|v| v + noise.sample(&mut rng)).collect();
        assert_eq!(rising_crossings(&noisy).len(), 4);
        let f = measure_frequency(&clean.with_samples(noisy).unwrap()).unwrap();
        assert!((f - 50.0).abs() < 0.25, "{f}");
    }

    #[test]
    fn frequency_of_dc_is_unavailable() {
        let dc = Waveform::new(RATE, vec![12.0; 1000], 0.0).unwrap();
        assert!(matches!(measure_frequency(&dc), Err(Error::MeasurementUnavailable(_))));
    }

    #[test]
    fn phasor_round_trip() {
        let x = Complex64::new(3.0, -4.0);
        let back = fundamental_phasor(&synthesize(x, 400, 2), 2);
        assert!((back - x).norm() < 1e-12);
    }

    #[test]
    fn stream_of_steady_load_is_stationary() {
        let u = sine(V, 0.0, 50.0);
        let i = u.with_samples(u.samples().iter().map(|v| v / 55.225).collect()).unwrap();
        let recs: Vec<_> = assp_stream(&u, &i, 20.0).unwrap().into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(recs.len(), 20);
        for r in &recs {
            assert!(rel(r.p, recs[0].p) < 1e-9);
            assert!(rel(r.i_rms, recs[0].i_rms) < 1e-9);
        }
        assert!((recs[19].t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stream_tracks_a_load_step() {
        let u = sine(V, 0.0, 50.0);
        let step_at = 5000;
        let i: Vec<f64> = u
            .samples()
            .iter()
            .enumerate()
            .map(|(n, v)| if n < step_at { v / 100.0 } else { v / 50.0 })
            .collect();
        let i = u.with_samples(i).unwrap();
        let recs: Vec<_> = assp_stream(&u, &i, 20.0).unwrap().into_iter().map(|r| r.unwrap()).collect();
        let pre = V * V / 100.0;
        let post = V * V / 50.0;
        for r in &recs {
            if r.t <= 0.5 + 1e-9 {
                assert!(rel(r.p, pre) < 1e-9, "t={} p={}", r.t, r.p);
            } else if r.t >= 0.55 - 1e-9 {
                assert!(rel(r.p, post) < 1e-9, "t={} p={}", r.t, r.p);
            }
        }
    }

    #[test]
    fn stream_with_no_current() {
        let u = sine(V, 0.0, 50.0);
        let i = Waveform::zeros(RATE, u.len(), 0.0).unwrap();
        let recs = assp_stream(&u, &i, 20.0).unwrap();
        assert_eq!(recs.len(), 20);
        assert!(recs.into_iter().all(|r| r.unwrap().i_rms == 0.0));
    }

    #[test]
    fn stream_too_short_for_a_window() {
        let u = sine(V, 0.0, 2.5);
        let i = sine(1.0, 0.0, 2.5);
        let recs = assp_stream(&u, &i, 20.0).unwrap();
        assert_eq!(recs.len(), 1);
        // 2.5 cycles: the tick sees crossings at 0, 200 and 400 samples
        assert!(recs[0].is_ok());
        let u = sine(V, 0.0, 1.5);
        let i = sine(1.0, 0.0, 1.5);
        let recs = assp_stream(&u, &i, 1.0 / 0.03).unwrap();
        assert!(matches!(recs[0], Err(Error::WindowAlignment(_))));
    }
}

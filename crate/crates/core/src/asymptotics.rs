//! Level sweeps and their large-k analysis: phase spectra, the
//! zero-frequency component, power-series fits in 1/k and the pillowcase
//! Bohr–Sommerfeld orbits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mtc::{mtc_for, Family, NumericMtc};
use crate::numeric::Precision;
use crate::surgery::{rt_invariant, rt_invariant_numeric, PlumbingGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    DividedByS3,
}

/// How each Z(k) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// Closed-form double-precision modular data and f64 contraction.
    Numeric,
    /// Exact cyclotomic sum embedded at the given precision.
    Exact(Precision),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSweep {
    pub manifold: PlumbingGraph,
    pub family: Family,
    pub k_values: Vec<u32>,
    pub values: Vec<Complex64>,
    pub normalization: Normalization,
}

fn z_at(family: Family, g: &PlumbingGraph, k: u32, eval: Evaluation) -> Result<(Complex64, f64)> {
    match eval {
        Evaluation::Numeric => {
            let m = NumericMtc::new(family, k)?;
            Ok((rt_invariant_numeric(&m, g)?, m.total_dim))
        }
        Evaluation::Exact(prec) => {
            let m = mtc_for(family, k)?;
            Ok((rt_invariant(&m, g, prec)?.to_c64(), m.total_dim()))
        }
    }
}

/// Z(k) for k in [k_min, k_max] (even k only for u1), assembled in k order.
pub fn k_sweep(
    family: Family,
    graph: &PlumbingGraph,
    k_min: u32,
    k_max: u32,
    normalization: Normalization,
    eval: Evaluation,
) -> Result<KSweep> {
    if k_min == 0 || k_max < k_min {
        return Err(Error::BadSweep(format!("invalid window {k_min}..{k_max}")));
    }
    graph.validate()?;
    let k_values: Vec<u32> = (k_min..=k_max)
        .filter(|k| family == Family::Su2 || k % 2 == 0)
        .collect();
    if k_values.is_empty() {
        return Err(Error::BadSweep("window contains no admissible level".into()));
    }
    let values = k_values
        .par_iter()
        .map(|&k| {
            let (z, d) = z_at(family, graph, k, eval)?;
            Ok(match normalization {
                Normalization::Raw => z,
                Normalization::DividedByS3 => z * d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KSweep { manifold: graph.clone(), family, k_values, values, normalization })
}

impl KSweep {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "Re Z", "Im Z"]).expect("in-memory csv");
        for (k, z) in self.k_values.iter().zip(&self.values) {
            w.write_record([k.to_string(), z.re.to_string(), z.im.to_string()])
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    /// Reads the `k, Re Z, Im Z` table; manifold and family are not stored
    /// in the file and are left as given.
    pub fn from_csv(text: &str, manifold: PlumbingGraph, family: Family, normalization: Normalization) -> Result<KSweep> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut k_values = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::BadSweep(e.to_string()))?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::BadSweep("missing column".into()));
            let k: u32 = field(0)?.parse().map_err(|_| Error::BadSweep(format!("bad k '{}'", &rec[0])))?;
            let re: f64 = field(1)?.parse().map_err(|_| Error::BadSweep("bad Re Z".into()))?;
            let im: f64 = field(2)?.parse().map_err(|_| Error::BadSweep("bad Im Z".into()))?;
            if k_values.last().is_some_and(|&last| k <= last) {
                return Err(Error::BadSweep("k values must be strictly increasing".into()));
            }
            k_values.push(k);
            values.push(Complex64::new(re, im));
        }
        Ok(KSweep { manifold, family, k_values, values, normalization })
    }

    fn step(&self) -> Result<u32> {
        let step = match self.k_values.as_slice() {
            [a, b, ..] => b - a,
            _ => return Err(Error::BadSweep("need at least two samples".into())),
        };
        if self.k_values.windows(2).any(|w| w[1] - w[0] != step) {
            return Err(Error::BadSweep("k values must be equally spaced".into()));
        }
        Ok(step)
    }
}

/// Unitary-normalized DFT c_j = (1/N) Σ_n z_n e^{−2πi jn/N}, so that
/// Σ|c_j|² equals the mean of |z_n|².
pub fn dft(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    if n == 0 {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Frequency per unit k, in [0, 1).
    pub freq: f64,
    /// (numerator, denominator) when snapped.
    pub rational: Option<(i64, i64)>,
    pub amp: f64,
}

impl Peak {
    pub fn loc_string(&self) -> String {
        match self.rational {
            Some((a, b)) => format!("{a}/{b}"),
            None => format!("{}", self.freq),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpectrum {
    pub peaks: Vec<Peak>,
    pub window: (u32, u32),
    pub threshold: f64,
    /// Resolution 1/(k_max − k_min).
    pub bin_width: f64,
}

#[derive(Serialize, Deserialize)]
struct PeakJson {
    loc: String,
    amp: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    peaks: Vec<PeakJson>,
    window: [u32; 2],
}

impl PhaseSpectrum {
    pub fn to_json(&self) -> String {
        let j = SpectrumJson {
            peaks: self.peaks.iter().map(|p| PeakJson { loc: p.loc_string(), amp: p.amp }).collect(),
            window: [self.window.0, self.window.1],
        };
        serde_json::to_string_pretty(&j).expect("spectrum serializes")
    }

    pub fn from_json(text: &str) -> Result<PhaseSpectrum> {
        let j: SpectrumJson = serde_json::from_str(text)?;
        let peaks = j
            .peaks
            .into_iter()
            .map(|p| {
                let (freq, rational) = parse_loc(&p.loc)?;
                Ok(Peak { freq, rational, amp: p.amp })
            })
            .collect::<Result<Vec<_>>>()?;
        let span = j.window[1].saturating_sub(j.window[0]).max(1);
        Ok(PhaseSpectrum {
            peaks,
            window: (j.window[0], j.window[1]),
            threshold: 0.0,
            bin_width: 1.0 / span as f64,
        })
    }

    pub fn locations(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.freq).collect()
    }
}

fn parse_loc(s: &str) -> Result<(f64, Option<(i64, i64)>)> {
    let bad = || Error::BadSpec(format!("bad peak location '{s}'"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b <= 0 {
                return Err(bad());
            }
            Ok((a as f64 / b as f64, Some((a, b))))
        }
        None => Ok((s.trim().parse().map_err(|_| bad())?, None)),
    }
}

/// Nearest a/b in [0,1) with b ≤ max_den, if within `tol` of x (mod 1).
pub fn snap_rational(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let mut best: Option<(f64, i64, i64)> = None;
    for b in 1..=max_den {
        let a = (x * b as f64).round();
        let d = (x - a / b as f64).abs();
        if best.is_none_or(|(bd, _, _)| d < bd - 1e-12) {
            best = Some((d, (a as i64).rem_euclid(b), b));
        }
    }
    let (d, a, b) = best?;
    if d > tol {
        return None;
    }
    let g = num_integer::gcd(a, b);
    Some((a / g, b / g))
}

const PAD: usize = 8;

/// Hann-windowed, zero-padded spectrum of k ↦ Z(k). Peaks are local
/// maxima of |c(ν)| at or above `threshold` times the largest.
pub fn phase_spectrum(sweep: &KSweep, threshold: f64, snap_den: Option<i64>) -> Result<PhaseSpectrum> {
    let n = sweep.values.len();
    if n < 32 {
        return Err(Error::BadSweep(format!("{n} samples; the spectrum needs at least 32")));
    }
    let step = sweep.step()? as f64;
    let k0 = sweep.k_values[0];
    let k1 = *sweep.k_values.last().unwrap();
    let hann: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos())
        .collect();
    let wsum: f64 = hann.iter().sum();
    let len = n * PAD;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for i in 0..n {
        buf[i] = sweep.values[i] * hann[i];
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let amps: Vec<f64> = buf.iter().map(|c| c.norm() / wsum).collect();
    let max = amps.iter().cloned().fold(0.0, f64::max);
    let bin = 1.0 / (n as f64 * step);
    let mut peaks: Vec<Peak> = Vec::new();
    if max > 0.0 {
        for j in 0..len {
            let a = amps[j];
            let left = amps[(j + len - 1) % len];
            let right = amps[(j + 1) % len];
            if a >= threshold * max && a >= left && a > right {
                // bin j of the padded transform is ν = j/(len·step), with
                // k measured from k0; the k0 offset only rotates the phase
                let freq = (j as f64 / (len as f64 * step)).rem_euclid(1.0);
                let rational = snap_den.and_then(|d| snap_rational(freq, d, bin));
                let freq = rational.map_or(freq, |(a, b)| a as f64 / b as f64);
                peaks.push(Peak { freq, rational, amp: a });
            }
        }
    }
    peaks.sort_by(|a, b| b.amp.total_cmp(&a.amp));
    // merge peaks closer than the resolution, keeping the stronger
    let mut kept: Vec<Peak> = Vec::new();
    for p in peaks {
        let close = kept.iter().any(|q| {
            let d = (p.freq - q.freq).rem_euclid(1.0);
            d.min(1.0 - d) < bin
        });
        if !close {
            kept.push(p);
        }
    }
    Ok(PhaseSpectrum { peaks: kept, window: (k0, k1), threshold, bin_width: 1.0 / (k1 - k0).max(1) as f64 })
}

/// Hann-weighted mean of Z over each window of `width` consecutive
/// samples, i.e. the zero-frequency DFT coefficient; paired with the
/// window's central k.
pub fn trivial_coeff(sweep: &KSweep, width: usize) -> Result<Vec<(f64, Complex64)>> {
    let n = sweep.values.len();
    if width < 2 || width > n {
        return Err(Error::BadSweep(format!("window width {width} for {n} samples")));
    }
    let hann: Vec<f64> = (0..width)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / (width - 1) as f64).cos())
        .collect();
    let wsum: f64 = hann.iter().sum();
    Ok((0..=n - width)
        .map(|s| {
            let c: Complex64 = (0..width).map(|i| sweep.values[s + i] * hann[i]).sum::<Complex64>() / wsum;
            let kc = (sweep.k_values[s] as f64 + sweep.k_values[s + width - 1] as f64) / 2.0;
            (kc, c)
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbativeFit {
    /// Leading constant A.
    pub leading: Complex64,
    /// a_1..a_n, relative to A.
    pub coeffs: Vec<Complex64>,
    pub shift: f64,
    pub residual: f64,
    pub condition: f64,
    /// max_n |a_n(first half) − a_n(second half)| / max(|a_n|, 1).
    pub drift: f64,
    pub stable: bool,
}

const MAX_CONDITION: f64 = 1e13;

/// Least-squares coefficients of Σ_{n ≤ n_max} b_n (k+s)^{−n}, with columns
/// scaled by k_ref^n; returns (b, residual, condition).
fn lsq_powers(data: &[(f64, Complex64)], n_max: usize, shift: f64) -> Result<(Vec<Complex64>, f64, f64)> {
    let kref = data.iter().map(|d| d.0 + shift).fold(f64::INFINITY, f64::min);
    let rows = data.len();
    let a = DMatrix::from_fn(rows, n_max + 1, |i, j| {
        Complex64::new((kref / (data[i].0 + shift)).powi(j as i32), 0.0)
    });
    let y = DVector::from_iterator(rows, data.iter().map(|d| d.1));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Numerical(format!("ill-conditioned power fit, condition number {condition:.3e}")));
    }
    let x = svd
        .solve(&y, smax * 1e-15)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = (&a * &x - &y).norm() / (rows as f64).sqrt();
    let b = x.iter().enumerate().map(|(j, c)| c * kref.powi(j as i32)).collect();
    Ok((b, residual, condition))
}

fn relative(b: &[Complex64]) -> (Complex64, Vec<Complex64>) {
    let lead = b[0];
    let rel = if lead.norm() > 0.0 {
        b[1..].iter().map(|c| c / lead).collect()
    } else {
        b[1..].to_vec()
    };
    (lead, rel)
}

/// Fit c(k) = A(1 + Σ a_n (k+s)^{−n}) and check stability across halves.
pub fn perturbative_fit(data: &[(f64, Complex64)], n_max: usize, shift: f64) -> Result<PerturbativeFit> {
    if data.len() < 3 * n_max.max(1) {
        return Err(Error::BadSweep(format!("{} samples for order {n_max}; need {}", data.len(), 3 * n_max)));
    }
    let (b, residual, condition) = lsq_powers(data, n_max, shift)?;
    let (leading, coeffs) = relative(&b);
    let half = data.len() / 2;
    let drift = match (lsq_powers(&data[..half], n_max, shift), lsq_powers(&data[half..], n_max, shift)) {
        (Ok((b1, _, _)), Ok((b2, _, _))) => {
            let (l1, r1) = relative(&b1);
            let (l2, r2) = relative(&b2);
            let lead_drift = (l1 - l2).norm() / leading.norm().max(1e-300);
            r1.iter()
                .zip(&r2)
                .zip(&coeffs)
                .map(|((x, y), a)| (x - y).norm() / a.norm().max(1.0))
                .fold(lead_drift, f64::max)
        }
        _ => f64::INFINITY,
    };
    Ok(PerturbativeFit { leading, coeffs, shift, residual, condition, drift, stable: drift < 0.02 })
}

/// Fits with s = 0 and s = h∨ and returns both, better residual first.
pub fn compare_shifts(data: &[(f64, Complex64)], n_max: usize, h_dual: f64) -> Result<[PerturbativeFit; 2]> {
    let a = perturbative_fit(data, n_max, 0.0)?;
    let b = perturbative_fit(data, n_max, h_dual)?;
    Ok(if a.residual <= b.residual { [a, b] } else { [b, a] })
}

/// Angles jπ/(k+2), j = 1..k+1.
pub fn bohr_sommerfeld_orbits(k: u32) -> Vec<f64> {
    (1..=k + 1)
        .map(|j| j as f64 * std::f64::consts::PI / (k + 2) as f64)
        .collect()
}

/// One exponential sector e^{2πi k ν} Σ_j c_j (k+s)^{−p_j} of a trans-series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sector {
    pub phase: f64,
    pub powers: Vec<f64>,
}

/// Joint least-squares fit of Z(k) over the given sectors.
#[derive(Debug, Clone, Serialize)]
pub struct TransSeriesFit {
    pub sectors: Vec<Sector>,
    pub shift: f64,
    /// coeffs[A][j] multiplies (k+s)^{−p_j} in sector A.
    pub coeffs: Vec<Vec<Complex64>>,
    pub residual: f64,
    pub condition: f64,
}

pub fn transseries_fit(data: &[(f64, Complex64)], sectors: &[Sector], shift: f64) -> Result<TransSeriesFit> {
    let cols: Vec<(usize, usize)> = sectors
        .iter()
        .enumerate()
        .flat_map(|(a, s)| (0..s.powers.len()).map(move |j| (a, j)))
        .collect();
    if cols.is_empty() || data.len() < cols.len() {
        return Err(Error::BadSweep(format!("{} samples for {} unknowns", data.len(), cols.len())));
    }
    let kref = data.iter().map(|d| d.0 + shift).fold(f64::INFINITY, f64::min);
    let a = DMatrix::from_fn(data.len(), cols.len(), |i, c| {
        let (sa, sj) = cols[c];
        let k = data[i].0;
        Complex64::from_polar(
            (kref / (k + shift)).powf(sectors[sa].powers[sj]),
            std::f64::consts::TAU * sectors[sa].phase * k,
        )
    });
    let y = DVector::from_iterator(data.len(), data.iter().map(|d| d.1));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let x = svd.solve(&y, smax * 1e-15).map_err(|e| Error::Numerical(e.to_string()))?;
    let residual = (&a * &x - &y).norm() / (data.len() as f64).sqrt();
    let mut coeffs: Vec<Vec<Complex64>> = sectors.iter().map(|s| Vec::with_capacity(s.powers.len())).collect();
    for (c, &(sa, sj)) in cols.iter().enumerate() {
        coeffs[sa].push(x[c] * kref.powf(sectors[sa].powers[sj]));
    }
    Ok(TransSeriesFit {
        sectors: sectors.to_vec(),
        shift,
        coeffs,
        residual,
        condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
    })
}

impl KSweep {
    pub fn samples(&self) -> Vec<(f64, Complex64)> {
        self.k_values.iter().map(|&k| k as f64).zip(self.values.iter().copied()).collect()
    }
}

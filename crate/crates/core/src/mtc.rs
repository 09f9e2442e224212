//! Modular data for su(2)_k and U(1)_k: exact quantum dimensions, twists
//! and Hopf-link values, plus fusion rules, Verlinde counts and the
//! SL(2,Z) relations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Su2,
    U1,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su2" => Ok(Family::Su2),
            "u1" => Ok(Family::U1),
            other => Err(Error::BadSpec(format!("unknown family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MtcData {
    pub family: Family,
    /// Spins 2j for su2, residues a mod k for u1; index 0 is the unit.
    pub labels: Vec<u32>,
    pub level: u32,
    pub root_order: usize,
    pub qdims: Vec<Cyclotomic>,
    pub twists: Vec<Cyclotomic>,
    /// S̃_ij, the Hopf link coloured by i and j.
    pub s_unnorm: Vec<Vec<Cyclotomic>>,
    pub t_diag: Vec<Complex64>,
    pub total_dim_sq: Cyclotomic,
    /// Σ dim² θ.
    pub kappa_unnorm: Cyclotomic,
    pub central_charge: Rational64,
    pub duals: Vec<usize>,
}

/// [n]_q at q = ζ_N^2, N = 4(k+2): Σ_{l<n} ζ_N^{2(n-1-2l)}.
pub fn q_integer(n: i64, order: usize) -> Cyclotomic {
    if n == 0 {
        return Cyclotomic::zero(order);
    }
    let (sign, n) = if n < 0 { (-1, -n) } else { (1, n) };
    Cyclotomic::from_terms(order, (0..n).map(|l| (2 * (n - 1 - 2 * l), sign)))
}

fn sum_dim_sq_twist(qdims: &[Cyclotomic], twists: &[Cyclotomic], inverse: bool) -> Cyclotomic {
    let order = qdims[0].order();
    qdims
        .iter()
        .zip(twists)
        .fold(Cyclotomic::zero(order), |acc, (d, t)| {
            let t = if inverse { t.conj() } else { t.clone() };
            &acc + &(&(d * d) * &t)
        })
}

pub fn mtc_su2(k: u32) -> Result<MtcData> {
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    let kk = (k + 2) as i64;
    let n = 4 * kk as usize;
    let labels: Vec<u32> = (0..=k).collect();
    let qdims: Vec<Cyclotomic> = (0..=k as i64).map(|j| q_integer(j + 1, n)).collect();
    let twists: Vec<Cyclotomic> = (0..=k as i64)
        .map(|j| Cyclotomic::root(n, j * (j + 2)))
        .collect();
    let s_unnorm: Vec<Vec<Cyclotomic>> = (0..=k as i64)
        .map(|i| (0..=k as i64).map(|j| q_integer((i + 1) * (j + 1), n)).collect())
        .collect();
    let t_diag = (0..=k as i64)
        .map(|j| {
            let x = (j * (j + 2)) as f64 / (4 * kk) as f64 - 0.125;
            Complex64::from_polar(1.0, std::f64::consts::TAU * x)
        })
        .collect();
    let total_dim_sq = qdims
        .iter()
        .fold(Cyclotomic::zero(n), |acc, d| &acc + &(d * d));
    let kappa_unnorm = sum_dim_sq_twist(&qdims, &twists, false);
    Ok(MtcData {
        family: Family::Su2,
        labels,
        level: k,
        root_order: n,
        qdims,
        twists,
        s_unnorm,
        t_diag,
        total_dim_sq,
        kappa_unnorm,
        central_charge: Rational64::new(3 * k as i64, kk),
        duals: (0..=k as usize).collect(),
    })
}

pub fn mtc_u1(k: u32) -> Result<MtcData> {
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    if k % 2 == 1 {
        return Err(Error::OddU1Level(k));
    }
    let n = 2 * k as usize;
    let ki = k as i64;
    let qdims = vec![Cyclotomic::one(n); k as usize];
    let twists: Vec<Cyclotomic> = (0..ki).map(|a| Cyclotomic::root(n, a * a)).collect();
    let s_unnorm = (0..ki)
        .map(|a| (0..ki).map(|b| Cyclotomic::root(n, 2 * a * b)).collect())
        .collect();
    let anomaly = Complex64::from_polar(1.0, -std::f64::consts::TAU / 8.0);
    let t_diag = twists.iter().map(|t| t.to_c64() * anomaly).collect();
    let kappa_unnorm = sum_dim_sq_twist(&qdims, &twists, false);
    Ok(MtcData {
        family: Family::U1,
        labels: (0..k).collect(),
        level: k,
        root_order: n,
        qdims,
        twists,
        s_unnorm,
        t_diag,
        total_dim_sq: Cyclotomic::from_integer(n, ki),
        kappa_unnorm,
        central_charge: Rational64::from_integer(1),
        duals: (0..ki).map(|a| ((ki - a) % ki) as usize).collect(),
    })
}

pub fn mtc_for(family: Family, k: u32) -> Result<MtcData> {
    match family {
        Family::Su2 => mtc_su2(k),
        Family::U1 => mtc_u1(k),
    }
}

impl MtcData {
    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    /// Σ dim² θ^{-1}, the twist sum of a −1 framed unknot.
    pub fn kappa_unnorm_conj(&self) -> Cyclotomic {
        sum_dim_sq_twist(&self.qdims, &self.twists, true)
    }

    pub fn total_dim(&self) -> f64 {
        self.total_dim_sq.to_c64().re.sqrt()
    }

    pub fn kappa(&self) -> Complex64 {
        self.kappa_unnorm.to_c64() / self.total_dim()
    }

    /// Normalized S = S̃ / D.
    pub fn s_matrix(&self) -> DMatrix<Complex64> {
        let d = self.total_dim();
        let n = self.rank();
        DMatrix::from_fn(n, n, |i, j| self.s_unnorm[i][j].to_c64() / d)
    }

    /// S_{i* j}, the matrix of the modular representation. Equal to
    /// [`Self::s_matrix`] for su2; its complex conjugate for u1.
    pub fn s_modular(&self) -> DMatrix<Complex64> {
        let s = self.s_matrix();
        let n = self.rank();
        DMatrix::from_fn(n, n, |i, j| s[(self.duals[i], j)])
    }

    pub fn t_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.t_diag.clone()))
    }

    pub fn numeric(&self) -> NumericMtc {
        let n = self.rank();
        NumericMtc {
            family: self.family,
            level: self.level,
            qdims: self.qdims.iter().map(Cyclotomic::to_c64).collect(),
            twists: self.twists.iter().map(Cyclotomic::to_c64).collect(),
            s_unnorm: DMatrix::from_fn(n, n, |i, j| self.s_unnorm[i][j].to_c64()),
            total_dim: self.total_dim(),
            kappa: self.kappa(),
        }
    }
}

/// Closed-form double-precision modular data, for levels where the exact
/// field arithmetic is too slow (sweeps up to k in the hundreds).
#[derive(Debug, Clone)]
pub struct NumericMtc {
    pub family: Family,
    pub level: u32,
    pub qdims: Vec<Complex64>,
    pub twists: Vec<Complex64>,
    pub s_unnorm: DMatrix<Complex64>,
    pub total_dim: f64,
    pub kappa: Complex64,
}

impl NumericMtc {
    pub fn su2(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLevel);
        }
        let kk = (k + 2) as f64;
        let pi = std::f64::consts::PI;
        let s1 = (pi / kk).sin();
        let n = (k + 1) as usize;
        // sin((i+1)(j+1)π/(k+2)) with the product reduced mod 2(k+2) first
        let period = 2 * (k as usize + 2);
        let sines: Vec<f64> = (0..period).map(|m| (m as f64 * pi / kk).sin()).collect();
        let s_unnorm =
            DMatrix::from_fn(n, n, |i, j| Complex64::new(sines[((i + 1) * (j + 1)) % period] / s1, 0.0));
        let qdims: Vec<Complex64> = (0..n).map(|j| s_unnorm[(0, j)]).collect();
        let twists: Vec<Complex64> = (0..n)
            .map(|j| {
                let e = ((j * (j + 2)) % (4 * (k as usize + 2))) as f64;
                Complex64::from_polar(1.0, pi * e / (2.0 * kk))
            })
            .collect();
        let total_dim = (kk / 2.0).sqrt() / s1;
        let kappa = Complex64::from_polar(1.0, std::f64::consts::TAU * 3.0 * k as f64 / kk / 8.0);
        Ok(NumericMtc {
            family: Family::Su2,
            level: k,
            qdims,
            twists,
            s_unnorm,
            total_dim,
            kappa,
        })
    }

    pub fn u1(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLevel);
        }
        if k % 2 == 1 {
            return Err(Error::OddU1Level(k));
        }
        let n = k as usize;
        let pi = std::f64::consts::PI;
        let s_unnorm = DMatrix::from_fn(n, n, |a, b| {
            Complex64::from_polar(1.0, 2.0 * pi * ((a * b) % n) as f64 / k as f64)
        });
        let twists = (0..n)
            .map(|a| Complex64::from_polar(1.0, pi * ((a * a) % (2 * n)) as f64 / k as f64))
            .collect();
        Ok(NumericMtc {
            family: Family::U1,
            level: k,
            qdims: vec![Complex64::new(1.0, 0.0); n],
            twists,
            s_unnorm,
            total_dim: (k as f64).sqrt(),
            kappa: Complex64::from_polar(1.0, pi / 4.0),
        })
    }

    pub fn new(family: Family, k: u32) -> Result<Self> {
        match family {
            Family::Su2 => Self::su2(k),
            Family::U1 => Self::u1(k),
        }
    }

    pub fn rank(&self) -> usize {
        self.qdims.len()
    }
}

fn round_checked(z: Complex64, what: &'static str) -> Result<i64> {
    let r = z.re.round();
    let residual = (z - Complex64::new(r, 0.0)).norm();
    if residual.is_finite() && residual < 1e-6 {
        Ok(r as i64)
    } else {
        Err(Error::Residual { what, residual })
    }
}

/// N_ij^l indexed as `[i][j][l]`.
pub type FusionTensor = Vec<Vec<Vec<i64>>>;

pub fn fusion(mtc: &MtcData) -> Result<FusionTensor> {
    let s = mtc.s_matrix();
    let n = mtc.rank();
    if (0..n).any(|m| s[(0, m)].norm() < 1e-12) {
        return Err(Error::Residual {
            what: "fusion (vanishing S_0m)",
            residual: f64::INFINITY,
        });
    }
    let mut out = vec![vec![vec![0i64; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let z: Complex64 = (0..n)
                    .map(|m| s[(i, m)] * s[(j, m)] * s[(l, m)].conj() / s[(0, m)])
                    .sum();
                out[i][j][l] = round_checked(z, "fusion")?;
            }
        }
    }
    Ok(out)
}

/// Σ_i S_0i^{2−2g}.
pub fn verlinde_dim(mtc: &MtcData, genus: u32) -> Result<i64> {
    let s = mtc.s_matrix();
    let e = 2 - 2 * genus as i32;
    let z: Complex64 = (0..mtc.rank()).map(|i| s[(0, i)].powi(e)).sum();
    round_checked(z, "verlinde_dim")
}

/// Σ_m S_0m^{2−2g−n} Π_j S_{i_j m}, cross-checked against the pants oracle.
pub fn conformal_block_dim(mtc: &MtcData, genus: u32, labels: &[usize]) -> Result<i64> {
    let n = mtc.rank();
    if let Some(&bad) = labels.iter().find(|&&l| l >= n) {
        return Err(Error::BadLabel(bad));
    }
    let s = mtc.s_matrix();
    let e = 2 - 2 * genus as i32 - labels.len() as i32;
    let z: Complex64 = (0..n)
        .map(|m| {
            labels
                .iter()
                .fold(s[(0, m)].powi(e), |acc, &i| acc * s[(i, m)])
        })
        .sum();
    let formula = round_checked(z, "conformal_block_dim")?;
    let oracle = pants_dim(&fusion(mtc)?, &mtc.duals, genus, labels);
    if formula != oracle {
        return Err(Error::PantsMismatch { formula, oracle });
    }
    Ok(formula)
}

/// Block dimension from the fusion tensor alone: fuse the marked points in
/// order, glue g handles, and read off the unit channel.
pub fn pants_dim(n_tensor: &FusionTensor, duals: &[usize], genus: u32, labels: &[usize]) -> i64 {
    let n = n_tensor.len();
    let mut v = vec![0i64; n];
    v[0] = 1;
    for &i in labels {
        let mut next = vec![0i64; n];
        for (a, &va) in v.iter().enumerate() {
            if va == 0 {
                continue;
            }
            for (b, nb) in next.iter_mut().enumerate() {
                *nb += va * n_tensor[a][i][b];
            }
        }
        v = next;
    }
    // handle operator W_bc = Σ_x Σ_y N_{x b}^y N_{x* y}^c
    let mut w = vec![vec![0i64; n]; n];
    for x in 0..n {
        let xd = duals[x];
        for b in 0..n {
            for y in 0..n {
                let f = n_tensor[x][b][y];
                if f == 0 {
                    continue;
                }
                for c in 0..n {
                    w[b][c] += f * n_tensor[xd][y][c];
                }
            }
        }
    }
    for _ in 0..genus {
        let mut next = vec![0i64; n];
        for b in 0..n {
            if v[b] == 0 {
                continue;
            }
            for c in 0..n {
                next[c] += v[b] * w[b][c];
            }
        }
        v = next;
    }
    v[0]
}

#[derive(Debug, Clone, Serialize)]
pub struct ModularReport {
    pub unitarity_defect: f64,
    pub symmetry_defect: f64,
    pub s4_defect: f64,
    pub lambda: Complex64,
    pub st3_residual: f64,
    pub det_s: Complex64,
    pub kappa: Complex64,
    pub kappa_abs_defect: f64,
    /// Distance of arg κ from 2πc/8, reduced mod 2π.
    pub kappa_arg_defect: f64,
}

impl ModularReport {
    pub fn passes(&self, tol: f64) -> bool {
        [
            self.unitarity_defect,
            self.symmetry_defect,
            self.s4_defect,
            self.st3_residual,
            self.kappa_abs_defect,
            self.kappa_arg_defect,
        ]
        .iter()
        .all(|&x| x < tol)
    }
}

fn max_dev_from_identity(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - id).norm());
        }
    }
    worst
}

pub(crate) fn angle_distance(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d)
}

pub fn check_modular(mtc: &MtcData) -> ModularReport {
    let s = mtc.s_modular();
    let t = mtc.t_matrix();
    let s2 = &s * &s;
    let st = &s * &t;
    let st3 = &st * &st * &st;
    let (lambda, st3_residual) = crate::rootsys::global_scalar(&st3, &s2);
    let kappa = mtc.kappa();
    let c = mtc.central_charge.to_f64().unwrap();
    ModularReport {
        unitarity_defect: crate::rootsys::unitarity_defect(&s),
        symmetry_defect: crate::rootsys::symmetry_defect(&s),
        s4_defect: max_dev_from_identity(&(&s2 * &s2)),
        lambda,
        st3_residual,
        det_s: s.clone().determinant(),
        kappa,
        kappa_abs_defect: (kappa.norm() - 1.0).abs(),
        kappa_arg_defect: angle_distance(kappa.arg(), std::f64::consts::TAU * c / 8.0),
    }
}

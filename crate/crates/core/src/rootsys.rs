//! Type A_n root data (n ≤ 3), Weyl groups, level-k alcoves and the
//! Kac–Peterson S-matrix.
//!
//! Weights live in the hyperplane Σx_i = 0 of Q^{n+1} with the standard
//! dot product, so every root has squared length 2.

use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type Weight = Vec<Rational64>;

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub rank: usize,
    pub simple_roots: Vec<Weight>,
    pub positive_roots: Vec<Weight>,
    pub fundamental_weights: Vec<Weight>,
    pub rho: Weight,
    pub dual_coxeter: u32,
    pub highest_root: Weight,
}

pub fn inner_product(a: &[Rational64], b: &[Rational64]) -> Rational64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(dim: usize, i: usize) -> Weight {
    let mut v = vec![Rational64::zero(); dim];
    v[i] = Rational64::from_integer(1);
    v
}

fn vsub(a: &[Rational64], b: &[Rational64]) -> Weight {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vadd(a: &[Rational64], b: &[Rational64]) -> Weight {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn vscale(a: &[Rational64], s: Rational64) -> Weight {
    a.iter().map(|x| x * s).collect()
}

/// Root data for A_n.
pub fn root_system_a(n: usize) -> Result<RootSystem> {
    if !(1..=3).contains(&n) {
        return Err(Error::RankOutOfRange(n));
    }
    let dim = n + 1;
    let simple_roots: Vec<Weight> = (0..n)
        .map(|i| vsub(&unit(dim, i), &unit(dim, i + 1)))
        .collect();
    let mut positive_roots = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            positive_roots.push(vsub(&unit(dim, i), &unit(dim, j)));
        }
    }
    let fundamental_weights: Vec<Weight> = (1..=n)
        .map(|i| {
            let frac = Rational64::new(i as i64, dim as i64);
            (0..dim)
                .map(|c| {
                    let e = if c < i { Rational64::from_integer(1) } else { Rational64::zero() };
                    e - frac
                })
                .collect()
        })
        .collect();
    let rho = positive_roots
        .iter()
        .fold(vec![Rational64::zero(); dim], |acc, a| vadd(&acc, a));
    let rho = vscale(&rho, Rational64::new(1, 2));
    let highest_root = vsub(&unit(dim, 0), &unit(dim, n));
    Ok(RootSystem {
        rank: n,
        simple_roots,
        positive_roots,
        fundamental_weights,
        rho,
        dual_coxeter: dim as u32,
        highest_root,
    })
}

impl RootSystem {
    pub fn ambient_dim(&self) -> usize {
        self.rank + 1
    }

    /// ρ as the sum of fundamental weights.
    pub fn rho_from_fundamentals(&self) -> Weight {
        self.fundamental_weights
            .iter()
            .fold(vec![Rational64::zero(); self.ambient_dim()], |acc, w| vadd(&acc, w))
    }

    pub fn weight_from_labels(&self, labels: &[u32]) -> Weight {
        labels
            .iter()
            .zip(&self.fundamental_weights)
            .fold(vec![Rational64::zero(); self.ambient_dim()], |acc, (&a, w)| {
                vadd(&acc, &vscale(w, Rational64::from_integer(a as i64)))
            })
    }

    fn is_root_positive(&self, v: &[Rational64]) -> Option<bool> {
        if self.positive_roots.iter().any(|a| a.as_slice() == v) {
            Some(true)
        } else if self
            .positive_roots
            .iter()
            .any(|a| a.iter().zip(v).all(|(x, y)| *x == -*y))
        {
            Some(false)
        } else {
            None
        }
    }
}

/// Integer matrix acting on ambient coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeylElement {
    pub matrix: Vec<Vec<i64>>,
    pub length: usize,
}

impl WeylElement {
    pub fn apply(&self, v: &[Rational64]) -> Weight {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .map(|(&m, x)| Rational64::from_integer(m) * x)
                    .sum()
            })
            .collect()
    }

    pub fn sign(&self) -> i64 {
        if self.length.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeylGroup {
    pub elements: Vec<WeylElement>,
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

fn reflection_matrix(alpha: &[Rational64]) -> Vec<Vec<i64>> {
    // s(v) = v - <v,α> α for <α,α> = 2
    let n = alpha.len();
    let a: Vec<i64> = alpha.iter().map(|x| x.to_integer()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i64::from(i == j) - a[i] * a[j])
                .collect()
        })
        .collect()
}

/// Breadth-first closure of the simple reflections; lengths count the
/// positive roots sent to negative roots.
pub fn weyl_group(rs: &RootSystem) -> WeylGroup {
    let dim = rs.ambient_dim();
    let identity: Vec<Vec<i64>> = (0..dim)
        .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
        .collect();
    let gens: Vec<Vec<Vec<i64>>> = rs.simple_roots.iter().map(|a| reflection_matrix(a)).collect();
    let mut seen: HashSet<Vec<Vec<i64>>> = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(identity.clone());
    queue.push_back(identity);
    while let Some(m) = queue.pop_front() {
        for g in &gens {
            let next = mat_mul(g, &m);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
        order.push(m);
    }
    let elements = order
        .into_iter()
        .map(|matrix| {
            let probe = WeylElement { matrix, length: 0 };
            let length = rs
                .positive_roots
                .iter()
                .filter(|a| rs.is_root_positive(&probe.apply(a)) == Some(false))
                .count();
            WeylElement {
                matrix: probe.matrix,
                length,
            }
        })
        .collect();
    WeylGroup { elements }
}

/// Dynkin labels of the level-k alcove in lexicographic order.
pub fn alcove_labels(rank: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(rank: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == rank {
            out.push(prefix.clone());
            return;
        }
        for a in 0..=budget {
            prefix.push(a);
            rec(rank, budget - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(rank, k, &mut Vec::new(), &mut out);
    out
}

/// Dominant integral weights λ with ⟨λ, θ⟩ ≤ k; index 0 is the zero weight.
pub fn alcove_weights(rs: &RootSystem, k: u32) -> Vec<Weight> {
    alcove_labels(rs.rank, k)
        .iter()
        .map(|l| rs.weight_from_labels(l))
        .collect()
}

const MAX_ALCOVE: usize = 200;

fn weyl_sum(
    rs: &RootSystem,
    weyl: &WeylGroup,
    lambda: &Weight,
    mu: &Weight,
    level_shift: f64,
) -> Complex64 {
    let lr = vadd(lambda, &rs.rho);
    let mr = vadd(mu, &rs.rho);
    weyl.elements
        .iter()
        .map(|w| {
            let ip = inner_product(&w.apply(&lr), &mr).to_f64().unwrap();
            let phase = -std::f64::consts::TAU * ip / level_shift;
            Complex64::from_polar(w.sign() as f64, phase)
        })
        .sum()
}

fn kp_matrix<F>(rs: &RootSystem, k: u32, prefactor: Complex64, entry: F) -> Result<DMatrix<Complex64>>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let weights = alcove_weights(rs, k);
    if weights.len() > MAX_ALCOVE {
        return Err(Error::AlcoveTooLarge(weights.len()));
    }
    let weyl = weyl_group(rs);
    let shift = (k + rs.dual_coxeter) as f64;
    let n = weights.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| entry(prefactor * weyl_sum(rs, &weyl, &weights[i], &weights[j], shift)))
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn i_power(e: usize) -> Complex64 {
    match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Kac–Peterson S-matrix in alcove order, normalized by
/// |P/(k+h∨)Q∨|^{-1/2} = ((n+1)(k+h∨)^n)^{-1/2} so that it is unitary.
pub fn kac_peterson_s(rs: &RootSystem, k: u32) -> Result<DMatrix<Complex64>> {
    let shift = (k + rs.dual_coxeter) as f64;
    let volume = (rs.rank as f64 + 1.0) * shift.powi(rs.rank as i32);
    let pre = i_power(rs.positive_roots.len()) / volume.sqrt();
    kp_matrix(rs, k, pre, |z| z)
}

/// The variant with prefactor (k+h∨)^{-rank/2} and the denominator
/// Π_{α>0} 2 sin(π⟨α,ρ⟩/(k+h∨)). Not unitary; kept for comparison.
pub fn kac_peterson_s_printed(rs: &RootSystem, k: u32) -> Result<DMatrix<Complex64>> {
    let shift = (k + rs.dual_coxeter) as f64;
    let denom: f64 = rs
        .positive_roots
        .iter()
        .map(|a| {
            let ip = inner_product(a, &rs.rho).to_f64().unwrap();
            2.0 * (std::f64::consts::PI * ip / shift).sin()
        })
        .product();
    let pre = i_power(rs.positive_roots.len()) / shift.powf(rs.rank as f64 / 2.0) / denom;
    kp_matrix(rs, k, pre, |z| z)
}

/// √(2/(k+2)) sin((j+1)(j'+1)π/(k+2)).
pub fn su2_closed_form_s(k: u32) -> DMatrix<Complex64> {
    let n = (k + 1) as usize;
    let kk = (k + 2) as f64;
    DMatrix::from_fn(n, n, |i, j| {
        let x = ((i + 1) * (j + 1)) as f64 * std::f64::consts::PI / kk;
        Complex64::new((2.0 / kk).sqrt() * x.sin(), 0.0)
    })
}

/// max |(S S†) - 1|.
pub fn unitarity_defect(s: &DMatrix<Complex64>) -> f64 {
    let prod = s * s.adjoint();
    let n = s.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn symmetry_defect(s: &DMatrix<Complex64>) -> f64 {
    let n = s.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((s[(i, j)] - s[(j, i)]).norm());
        }
    }
    worst
}

/// Entrywise ratio a/b when it is one constant; returns (scalar, max deviation).
pub fn global_scalar(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> (Complex64, f64) {
    let mut num = Complex64::zero();
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        num += x * y.conj();
        den += y.norm_sqr();
    }
    let c = num / den;
    let dev = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - c * y).norm())
        .fold(0.0, f64::max);
    (c, dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_counts() {
        for (n, roots, h) in [(1, 1, 2), (2, 3, 3), (3, 6, 4)] {
            let rs = root_system_a(n).unwrap();
            assert_eq!(rs.positive_roots.len(), roots);
            assert_eq!(rs.positive_roots.len(), n * (n + 1) / 2);
            assert_eq!(rs.dual_coxeter, h);
            assert_eq!(
                inner_product(&rs.highest_root, &rs.highest_root),
                Rational64::from_integer(2)
            );
            assert_eq!(rs.rho, rs.rho_from_fundamentals());
        }
        assert!(matches!(root_system_a(0), Err(Error::RankOutOfRange(0))));
        assert!(root_system_a(4).is_err());
    }

    #[test]
    fn weyl_orders_and_signs() {
        for (n, order) in [(1, 2), (2, 6), (3, 24)] {
            let rs = root_system_a(n).unwrap();
            let w = weyl_group(&rs);
            assert_eq!(w.elements.len(), order);
            assert_eq!(w.elements.iter().map(WeylElement::sign).sum::<i64>(), 0);
            // each element permutes the root system
            let all_roots: Vec<Weight> = rs
                .positive_roots
                .iter()
                .cloned()
                .chain(rs.positive_roots.iter().map(|a| vscale(a, Rational64::from_integer(-1))))
                .collect();
            for e in &w.elements {
                let mut image: Vec<Weight> = all_roots.iter().map(|a| e.apply(a)).collect();
                let mut orig = all_roots.clone();
                image.sort();
                orig.sort();
                assert_eq!(image, orig);
            }
        }
        let a1 = weyl_group(&root_system_a(1).unwrap());
        let mut lens: Vec<usize> = a1.elements.iter().map(|e| e.length).collect();
        lens.sort();
        assert_eq!(lens, vec![0, 1]);
    }

    #[test]
    fn alcove_sizes() {
        let a1 = root_system_a(1).unwrap();
        for k in 0..8 {
            assert_eq!(alcove_weights(&a1, k).len(), k as usize + 1);
        }
        assert_eq!(alcove_weights(&a1, 0), vec![vec![Rational64::zero(); 2]]);
        let a2 = root_system_a(2).unwrap();
        let w = alcove_weights(&a2, 1);
        assert_eq!(w.len(), 3);
        assert!(w[0].iter().all(Zero::is_zero));
        assert_eq!(w[1], a2.fundamental_weights[1]);
        assert_eq!(w[2], a2.fundamental_weights[0]);
    }

    #[test]
    fn alcove_matches_brute_force() {
        // every dominant integral weight with <λ,θ> ≤ k, found from a box of labels
        let rs = root_system_a(2).unwrap();
        for k in 0..5u32 {
            let mut brute = 0;
            for a in 0..=6u32 {
                for b in 0..=6u32 {
                    let w = rs.weight_from_labels(&[a, b]);
                    if inner_product(&w, &rs.highest_root) <= Rational64::from_integer(k as i64) {
                        brute += 1;
                    }
                }
            }
            assert_eq!(alcove_weights(&rs, k).len(), brute);
        }
    }

    #[test]
    fn a1_matches_closed_form() {
        let rs = root_system_a(1).unwrap();
        let s = kac_peterson_s(&rs, 1).unwrap();
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 1.0, 1.0, -1.0].map(|x| Complex64::new(x / 2f64.sqrt(), 0.0)),
        );
        let (c, dev) = global_scalar(&s, &expect);
        assert!((c.norm() - 1.0).abs() < 1e-12);
        assert!(dev < 1e-12);
    }

    #[test]
    fn a2_level_one() {
        let rs = root_system_a(2).unwrap();
        let s = kac_peterson_s(&rs, 1).unwrap();
        assert!(unitarity_defect(&s) < 1e-12);
        for j in 0..3 {
            assert!((s[(0, j)].norm() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_symmetric_and_quantum_dims() {
        let check = |rs: &RootSystem, k: u32| {
            let s = kac_peterson_s(rs, k).unwrap();
            assert!(unitarity_defect(&s) < 1e-10, "rank {} k={k}", rs.rank);
            assert!(symmetry_defect(&s) < 1e-10, "rank {} k={k}", rs.rank);
            for j in 0..s.nrows() {
                let d = s[(j, 0)] / s[(0, 0)];
                assert!(d.im.abs() < 1e-10 && d.re > 1.0 - 1e-10);
            }
        };
        let a1 = root_system_a(1).unwrap();
        for k in 1..=12 {
            check(&a1, k);
            let (c, dev) = global_scalar(&kac_peterson_s(&a1, k).unwrap(), &su2_closed_form_s(k));
            assert!(dev < 1e-10 && (c - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        }
        let a2 = root_system_a(2).unwrap();
        for k in 1..=6 {
            check(&a2, k);
        }
        check(&root_system_a(3).unwrap(), 2);
    }

    #[test]
    fn printed_variant_is_not_unitary() {
        let rs = root_system_a(1).unwrap();
        for k in 1..6 {
            let printed = kac_peterson_s_printed(&rs, k).unwrap();
            let closed = su2_closed_form_s(k);
            let (c, dev) = global_scalar(&printed, &closed);
            assert!(dev < 1e-12);
            let expect = 1.0 / (2f64.sqrt() * (std::f64::consts::PI / (k + 2) as f64).sin());
            assert!((c.re - expect).abs() < 1e-10 && c.im.abs() < 1e-12);
        }
    }
}

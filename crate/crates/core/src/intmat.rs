//! Exact integer matrix routines: fraction-free determinant, inertia of a
//! symmetric matrix and Smith normal form with unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<i64>>;
pub type BigMatrix = Vec<Vec<BigInt>>;

pub fn is_square(a: &[Vec<i64>]) -> bool {
    a.iter().all(|r| r.len() == a.len())
}

pub fn is_symmetric(a: &[Vec<i64>]) -> bool {
    is_square(a) && (0..a.len()).all(|i| (0..i).all(|j| a[i][j] == a[j][i]))
}

fn to_big(a: &[Vec<i64>]) -> BigMatrix {
    a.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

/// Bareiss fraction-free elimination.
pub fn determinant(a: &[Vec<i64>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = to_big(a);
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    &m[n - 1][n - 1] * sign
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn signature(&self) -> i64 {
        self.positive as i64 - self.negative as i64
    }
}

/// Sylvester inertia by congruence diagonalization over Q.
pub fn inertia(a: &[Vec<i64>]) -> Inertia {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let mut out = Inertia { positive: 0, negative: 0, zero: 0 };
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !m[i][i].is_zero());
        let p = match pivot {
            Some(p) => p,
            None => {
                let off = active.iter().copied().find_map(|i| {
                    active.iter().copied().find(|&j| j != i && !m[i][j].is_zero()).map(|j| (i, j))
                });
                match off {
                    Some((i, j)) => {
                        // row_i += row_j, col_i += col_j gives m_ii = 2 m_ij ≠ 0
                        for c in 0..n {
                            let v = m[j][c].clone();
                            m[i][c] += v;
                        }
                        for r in 0..n {
                            let v = m[r][j].clone();
                            m[r][i] += v;
                        }
                        i
                    }
                    None => {
                        out.zero += active.len();
                        break;
                    }
                }
            }
        };
        let d = m[p][p].clone();
        if d.is_positive() {
            out.positive += 1;
        } else {
            out.negative += 1;
        }
        active.retain(|&i| i != p);
        for &i in &active {
            if m[i][p].is_zero() {
                continue;
            }
            let f = &m[i][p] / &d;
            for &j in &active {
                let v = &f * &m[p][j];
                m[i][j] -= v;
            }
        }
        for &i in &active {
            m[i][p] = BigRational::zero();
            m[p][i] = BigRational::zero();
        }
    }
    out
}

/// U·A·V = diag(d) with U, V unimodular and d_1 | d_2 | … (zeros last).
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: BigMatrix,
    pub v: BigMatrix,
    pub diagonal: Vec<BigInt>,
}

fn identity(n: usize) -> BigMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

fn row_axpy(m: &mut BigMatrix, dst: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    let row = m[src].clone();
    for (x, y) in m[dst].iter_mut().zip(row) {
        *x -= f * y;
    }
}

fn col_axpy(m: &mut BigMatrix, dst: usize, src: usize, f: &BigInt) {
    if f.is_zero() {
        return;
    }
    for r in m.iter_mut() {
        let y = r[src].clone();
        r[dst] -= f * y;
    }
}

fn swap_cols(m: &mut BigMatrix, a: usize, b: usize) {
    for r in m.iter_mut() {
        r.swap(a, b);
    }
}

pub fn smith_form(a: &[Vec<i64>]) -> Smith {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m = to_big(a);
    let mut u = identity(rows);
    let mut v = identity(cols);
    let size = rows.min(cols);
    for t in 0..size {
        loop {
            // smallest nonzero entry of the trailing block goes to (t, t)
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !m[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            m.swap(t, bi);
            u.swap(t, bi);
            swap_cols(&mut m, t, bj);
            swap_cols(&mut v, t, bj);
            let p = m[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t].div_floor(&p);
                row_axpy(&mut m, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                clean &= m[i][t].is_zero();
            }
            for j in t + 1..cols {
                let q = m[t][j].div_floor(&p);
                col_axpy(&mut m, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                clean &= m[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !m[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut m, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if m[t][t].is_negative() {
            for x in m[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
    }
    let diagonal = (0..size).map(|i| m[i][i].clone()).collect();
    Smith { u, v, diagonal }
}

pub fn mat_mul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &r[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &BigMatrix) -> BigMatrix {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Inverse of a unimodular integer matrix via rational Gauss–Jordan.
pub fn unimodular_inverse(a: &BigMatrix) -> BigMatrix {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .chain((0..n).map(|j| BigRational::from_integer(BigInt::from(u8::from(i == j)))))
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero()).expect("unimodular matrix is invertible");
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                let row = m[c].clone();
                for (x, y) in m[r].iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
    }
    m.into_iter()
        .map(|r| r[n..].iter().map(|x| x.to_integer()).collect())
        .collect()
}

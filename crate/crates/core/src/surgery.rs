//! Plumbing graphs as surgery presentations and their RT invariants.
//!
//! A plumbing graph is a framed forest: each vertex is an unknot with the
//! given framing and each edge is a Hopf clasp. The coloured link invariant
//! then factorizes over the forest,
//!
//!   F = Σ_c Π_v θ_{c_v}^{f_v} dim(c_v)^{2−deg v} Π_{(u,v)} S̃_{c_u c_v},
//!
//! and is evaluated by passing messages from the leaves to a root.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};
use crate::intmat::{self, IntMatrix};
use crate::mtc::{MtcData, NumericMtc};
use crate::numeric::{Ctx, HpComplex, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: i64,
    pub framing: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlumbingGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<[i64; 2]>,
}

impl PlumbingGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(framing: i64) -> Self {
        PlumbingGraph {
            vertices: vec![Vertex { id: 0, framing }],
            edges: vec![],
        }
    }

    /// Linear chain with ids 0, 1, … in order.
    pub fn chain(framings: &[i64]) -> Self {
        PlumbingGraph {
            vertices: framings
                .iter()
                .enumerate()
                .map(|(i, &framing)| Vertex { id: i as i64, framing })
                .collect(),
            edges: (1..framings.len() as i64).map(|i| [i - 1, i]).collect(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: PlumbingGraph = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plumbing graph serializes")
    }

    fn index(&self) -> HashMap<i64, usize> {
        self.vertices.iter().enumerate().map(|(i, v)| (v.id, i)).collect()
    }

    /// Checks unique ids, valid endpoints, no loops or repeated edges, and
    /// acyclicity.
    pub fn validate(&self) -> Result<()> {
        let idx = self.index();
        if idx.len() != self.vertices.len() {
            return Err(Error::InvalidGraph("duplicate vertex id".into()));
        }
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &[a, b] in &self.edges {
            let (Some(&ia), Some(&ib)) = (idx.get(&a), idx.get(&b)) else {
                return Err(Error::InvalidGraph(format!("edge [{a}, {b}] references a missing vertex")));
            };
            if ia == ib {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
            if ra == rb {
                return Err(Error::InvalidGraph(format!(
                    "edge [{a}, {b}] closes a cycle; plumbing graphs must be forests"
                )));
            }
            parent[ra] = rb;
        }
        Ok(())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let idx = self.index();
        let mut deg = vec![0; self.vertices.len()];
        for &[a, b] in &self.edges {
            deg[idx[&a]] += 1;
            deg[idx[&b]] += 1;
        }
        deg
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let idx = self.index();
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &[a, b] in &self.edges {
            adj[idx[&a]].push(idx[&b]);
            adj[idx[&b]].push(idx[&a]);
        }
        adj
    }

    pub fn framing(&self, id: i64) -> Option<i64> {
        self.vertices.iter().find(|v| v.id == id).map(|v| v.framing)
    }

    fn next_id(&self) -> i64 {
        self.vertices.iter().map(|v| v.id + 1).max().unwrap_or(0)
    }

    /// Disjoint union; ids of `other` are shifted past those of `self`.
    pub fn disjoint_union(&self, other: &PlumbingGraph) -> PlumbingGraph {
        let shift = self.next_id() - other.vertices.iter().map(|v| v.id).min().unwrap_or(0);
        let mut g = self.clone();
        g.vertices.extend(other.vertices.iter().map(|v| Vertex { id: v.id + shift, framing: v.framing }));
        g.edges.extend(other.edges.iter().map(|&[a, b]| [a + shift, b + shift]));
        g
    }

    /// Same graph with ids replaced through `f` and vertices reordered by `order`.
    pub fn relabel(&self, order: &[usize], f: impl Fn(i64) -> i64) -> PlumbingGraph {
        PlumbingGraph {
            vertices: order
                .iter()
                .map(|&i| Vertex { id: f(self.vertices[i].id), framing: self.vertices[i].framing })
                .collect(),
            edges: self.edges.iter().map(|&[a, b]| [f(b), f(a)]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkingData {
    pub matrix: IntMatrix,
    pub signature: i64,
    pub m: usize,
    pub b1: usize,
    /// |det| of the nondegenerate part: the order of the torsion of H_1.
    pub torsion_order: BigInt,
}

/// Linking data of an arbitrary symmetric integer matrix.
pub fn linking_data_of_matrix(b: &[Vec<i64>]) -> Result<LinkingData> {
    if !intmat::is_square(b) {
        return Err(Error::NotSquare);
    }
    if !intmat::is_symmetric(b) {
        return Err(Error::NotSymmetric);
    }
    let inertia = intmat::inertia(b);
    let smith = intmat::smith_form(b);
    let torsion_order = smith
        .diagonal
        .iter()
        .filter(|d| !d.is_zero())
        .fold(BigInt::one(), |acc, d| acc * d.abs());
    Ok(LinkingData {
        matrix: b.to_vec(),
        signature: inertia.signature(),
        m: b.len(),
        b1: inertia.zero,
        torsion_order,
    })
}

pub fn linking_matrix(g: &PlumbingGraph) -> Result<LinkingData> {
    g.validate()?;
    let idx = g.index();
    let n = g.vertices.len();
    let mut b = vec![vec![0i64; n]; n];
    for (i, v) in g.vertices.iter().enumerate() {
        b[i][i] = v.framing;
    }
    for &[x, y] in &g.edges {
        let (i, j) = (idx[&x], idx[&y]);
        b[i][j] = 1;
        b[j][i] = 1;
    }
    linking_data_of_matrix(&b)
}

/// Operations needed by the leaf-to-root contraction.
pub trait Scalar: Clone + Send + Sync
where
    for<'a> &'a Self: Add<&'a Self, Output = Self> + Mul<&'a Self, Output = Self>,
{
}

impl Scalar for Cyclotomic {}
impl Scalar for Complex64 {}

/// Σ over colourings of the forest, given per-vertex label weights and
/// the edge matrix.
pub fn contract_forest<T: Scalar>(
    g: &PlumbingGraph,
    weights: &[Vec<T>],
    edge: &[Vec<T>],
    zero: &T,
    one: &T,
) -> T
where
    for<'a> &'a T: Add<&'a T, Output = T> + Mul<&'a T, Output = T>,
{
    let adj = g.adjacency();
    let n = g.vertices.len();
    let labels = edge.len();
    let mut visited = vec![false; n];
    let mut total = one.clone();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        // iterative DFS order, parents before children
        let mut order = Vec::new();
        let mut parent = vec![usize::MAX; n];
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = v;
                    stack.push(w);
                }
            }
        }
        // incoming[v][x]: product of children messages at label x
        let mut incoming: HashMap<usize, Vec<T>> = HashMap::new();
        for &v in order.iter().rev() {
            let local: Vec<T> = match incoming.remove(&v) {
                Some(inc) => weights[v].iter().zip(&inc).map(|(w, m)| w * m).collect(),
                None => weights[v].clone(),
            };
            if v == root {
                let comp = local.iter().fold(zero.clone(), |acc, x| &acc + x);
                total = &total * &comp;
                break;
            }
            let msg: Vec<T> = (0..labels)
                .map(|y| {
                    local
                        .iter()
                        .enumerate()
                        .fold(zero.clone(), |acc, (x, lx)| &acc + &(lx * &edge[x][y]))
                })
                .collect();
            let p = parent[v];
            match incoming.get_mut(&p) {
                Some(acc) => {
                    for (a, m) in acc.iter_mut().zip(&msg) {
                        *a = &*a * m;
                    }
                }
                None => {
                    incoming.insert(p, msg);
                }
            }
        }
    }
    total
}

fn unit_pow(t: &Cyclotomic, e: i64) -> Cyclotomic {
    if e >= 0 {
        t.pow(e as u64)
    } else {
        t.conj().pow(e.unsigned_abs())
    }
}

fn exact_weights(mtc: &MtcData, g: &PlumbingGraph) -> Vec<Vec<Cyclotomic>> {
    let deg = g.degrees();
    let mut inverse_dims: Option<Vec<Cyclotomic>> = None;
    g.vertices
        .iter()
        .zip(&deg)
        .map(|(v, &d)| {
            (0..mtc.rank())
                .map(|x| {
                    let tw = unit_pow(&mtc.twists[x], v.framing);
                    let dim = &mtc.qdims[x];
                    let factor = match d {
                        0 => dim * dim,
                        1 => dim.clone(),
                        2 => return tw,
                        _ => {
                            let inv = inverse_dims.get_or_insert_with(|| {
                                mtc.qdims
                                    .iter()
                                    .map(|q| q.inverse().expect("quantum dimensions are nonzero"))
                                    .collect()
                            });
                            inv[x].pow(d as u64 - 2)
                        }
                    };
                    &tw * &factor
                })
                .collect()
        })
        .collect()
}

/// The coloured invariant F as an exact element of Q(ζ_N).
pub fn colored_sum(mtc: &MtcData, g: &PlumbingGraph) -> Result<Cyclotomic> {
    g.validate()?;
    let n = mtc.root_order;
    Ok(contract_forest(
        g,
        &exact_weights(mtc, g),
        &mtc.s_unnorm,
        &Cyclotomic::zero(n),
        &Cyclotomic::one(n),
    ))
}

pub fn colored_sum_numeric(mtc: &NumericMtc, g: &PlumbingGraph) -> Result<Complex64> {
    g.validate()?;
    let deg = g.degrees();
    let weights: Vec<Vec<Complex64>> = g
        .vertices
        .iter()
        .zip(&deg)
        .map(|(v, &d)| {
            (0..mtc.rank())
                .map(|x| mtc.twists[x].powi(v.framing as i32) * mtc.qdims[x].powi(2 - d as i32))
                .collect()
        })
        .collect();
    let n = mtc.rank();
    let edge: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| mtc.s_unnorm[(i, j)]).collect())
        .collect();
    Ok(contract_forest(
        g,
        &weights,
        &edge,
        &Complex64::new(0.0, 0.0),
        &Complex64::new(1.0, 0.0),
    ))
}

/// Z = κ^{−σ} D^{−(m+1)} F in the complex embedding.
pub fn rt_invariant_in(mtc: &MtcData, g: &PlumbingGraph, ctx: &mut Ctx) -> Result<HpComplex> {
    let link = linking_matrix(g)?;
    let f = colored_sum(mtc, g)?;
    Ok(normalize_in(mtc, &f, link.signature, link.m, ctx))
}

pub fn rt_invariant(mtc: &MtcData, g: &PlumbingGraph, prec: Precision) -> Result<HpComplex> {
    rt_invariant_in(mtc, g, &mut Ctx::new(prec))
}

/// κ^{−σ} D^{−(m+1)} · F for an exact F.
pub fn normalize_in(mtc: &MtcData, f: &Cyclotomic, sigma: i64, m: usize, ctx: &mut Ctx) -> HpComplex {
    let d2 = mtc.total_dim_sq.eval_in(ctx);
    let d = ctx.sqrt(&d2.re);
    let d = HpComplex::from_real(d, ctx);
    let kappa = mtc.kappa_unnorm.eval_in(ctx).div(&d, ctx);
    let fv = f.eval_in(ctx);
    kappa
        .powi(-sigma, ctx)
        .mul(&d.powi(-(m as i64 + 1), ctx), ctx)
        .mul(&fv, ctx)
}

pub fn rt_invariant_numeric(mtc: &NumericMtc, g: &PlumbingGraph) -> Result<Complex64> {
    let link = linking_matrix(g)?;
    let f = colored_sum_numeric(mtc, g)?;
    Ok(mtc.kappa.powi(-link.signature as i32) * mtc.total_dim.powi(-(link.m as i32 + 1)) * f)
}

/// Adds an isolated ±1 framed unknot.
pub fn stabilize(g: &PlumbingGraph, sign: i64) -> Result<PlumbingGraph> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidMove(format!("stabilization sign must be ±1, got {sign}")));
    }
    let mut out = g.clone();
    out.vertices.push(Vertex { id: g.next_id(), framing: sign });
    Ok(out)
}

/// Blow down a ±1 vertex of degree at most two.
pub fn blow_down(g: &PlumbingGraph, id: i64) -> Result<PlumbingGraph> {
    g.validate()?;
    let Some(eps) = g.framing(id) else {
        return Err(Error::InvalidMove(format!("no vertex {id}")));
    };
    if eps.abs() != 1 {
        return Err(Error::InvalidMove(format!("vertex {id} has framing {eps}, need ±1")));
    }
    let nbrs: Vec<i64> = g
        .edges
        .iter()
        .filter_map(|&[a, b]| if a == id { Some(b) } else if b == id { Some(a) } else { None })
        .collect();
    if nbrs.len() > 2 {
        return Err(Error::InvalidMove(format!("vertex {id} has degree {}", nbrs.len())));
    }
    let mut out = PlumbingGraph {
        vertices: g
            .vertices
            .iter()
            .filter(|v| v.id != id)
            .map(|v| {
                let framing = if nbrs.contains(&v.id) { v.framing - eps } else { v.framing };
                Vertex { id: v.id, framing }
            })
            .collect(),
        edges: g.edges.iter().copied().filter(|e| !e.contains(&id)).collect(),
    };
    if let [u, w] = nbrs[..] {
        out.edges.push([u, w]);
    }
    Ok(out)
}

/// Negative continued fraction x = b_1 − 1/(b_2 − …), rounding up.
pub fn negative_continued_fraction(num: i64, den: i64) -> Vec<i64> {
    let (mut p, mut q) = if den < 0 { (-num, -den) } else { (num, den) };
    let mut out = Vec::new();
    while q != 0 {
        let b = Integer::div_ceil(&p, &q);
        out.push(b);
        let r = b * q - p;
        p = q;
        q = r;
    }
    out
}

pub fn lens_graph(p: i64, q: i64) -> Result<PlumbingGraph> {
    let valid = p >= 1 && q >= 1 && p.gcd(&q) == 1 && (q < p || (p == 1 && q == 1));
    if !valid {
        return Err(Error::BadSpec(format!(
            "lens space L({p},{q}) needs p ≥ 1, 0 < q < p (or p = q = 1) and gcd(p,q) = 1"
        )));
    }
    Ok(PlumbingGraph::chain(&negative_continued_fraction(p, q)))
}

/// Star-shaped plumbing: centre framed e0, one leg per fibre framed by
/// the negated continued fraction of α/β.
pub fn seifert_graph(e0: i64, fibers: &[(i64, i64)]) -> Result<PlumbingGraph> {
    let mut g = PlumbingGraph::single(e0);
    for &(a, b) in fibers {
        if a < 2 || b == 0 || a.gcd(&b) != 1 {
            return Err(Error::BadSpec(format!(
                "exceptional fibre ({a},{b}) needs α ≥ 2, β ≠ 0 and gcd(α,β) = 1"
            )));
        }
        let mut prev = 0;
        for c in negative_continued_fraction(a, b) {
            let id = g.next_id();
            g.vertices.push(Vertex { id, framing: -c });
            g.edges.push([prev, id]);
            prev = id;
        }
    }
    Ok(g)
}

/// The E8 plumbing (all framings −2) of the Poincaré homology sphere.
pub fn poincare_sphere() -> PlumbingGraph {
    PlumbingGraph {
        vertices: (0..8).map(|id| Vertex { id, framing: -2 }).collect(),
        edges: vec![[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [4, 7]],
    }
}

/// Σ(2,3,5) as the star with centre +1 and legs +2, +3, +5.
pub fn poincare_star() -> PlumbingGraph {
    seifert_graph(1, &[(2, -1), (3, -1), (5, -1)]).expect("valid fibres")
}

static MANIFOLDS_JSON: &str = include_str!("../data/manifolds.json");

/// The builtin library, keyed by name.
pub fn builtin_manifolds() -> BTreeMap<String, PlumbingGraph> {
    serde_json::from_str(MANIFOLDS_JSON).expect("builtin manifolds.json is valid")
}

pub fn builtin(name: &str) -> Option<PlumbingGraph> {
    builtin_manifolds().remove(name)
}

/// Parses `s3`, `s1xs2`, `poincare`, `lens:p,q`, `seifert:e0;a/b,...`,
/// `@file.json`, or any builtin name.
pub fn parse_manifold(spec: &str) -> Result<PlumbingGraph> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)?;
        return PlumbingGraph::from_json(&text);
    }
    let bad = |why: &str| Error::BadSpec(format!("'{spec}': {why}"));
    let int = |s: &str| s.trim().parse::<i64>().map_err(|_| bad(&format!("'{s}' is not an integer")));
    let lower = spec.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("lens:") {
        let (p, q) = rest.split_once(',').ok_or_else(|| bad("expected lens:p,q"))?;
        return lens_graph(int(p)?, int(q)?);
    }
    if let Some(rest) = lower.strip_prefix("seifert:") {
        let (e0, fibers) = rest.split_once(';').unwrap_or((rest, ""));
        let fibers = fibers
            .split(',')
            .filter(|f| !f.trim().is_empty())
            .map(|f| {
                let (a, b) = f.split_once('/').ok_or_else(|| bad("fibres are written a/b"))?;
                Ok((int(a)?, int(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        return seifert_graph(int(e0)?, &fibers);
    }
    match lower.as_str() {
        "s3" => Ok(PlumbingGraph::empty()),
        "s1xs2" => Ok(PlumbingGraph::single(0)),
        "poincare" | "e8" => Ok(poincare_sphere()),
        name => builtin(name).ok_or_else(|| bad("unknown manifold")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    S,
    T,
    TInv,
}

impl std::str::FromStr for Letter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" | "s" => Ok(Letter::S),
            "T" | "t" => Ok(Letter::T),
            "T-1" | "t-1" | "Ti" | "TInv" | "T^-1" => Ok(Letter::TInv),
            other => Err(Error::BadSpec(format!("unknown SL(2,Z) letter '{other}'"))),
        }
    }
}

/// Trace of the product of S and T^{±1} along the word.
pub fn torus_bundle_trace(mtc: &MtcData, word: &[Letter]) -> Complex64 {
    let s = mtc.s_modular();
    let t = mtc.t_matrix();
    let tinv = t.map(|z| z.conj());
    let n = mtc.rank();
    let mut acc = nalgebra::DMatrix::<Complex64>::identity(n, n);
    for l in word {
        acc = match l {
            Letter::S => &acc * &s,
            Letter::T => &acc * &t,
            Letter::TInv => &acc * &tinv,
        };
    }
    acc.trace()
}

/// √(2/(p(k+2))) Σ_j sin²((j+1)π/(k+2)) e^{−πi j(j+2)p/(2(k+2))}.
pub fn lens_closed_form(p: i64, k: u32) -> Complex64 {
    let kk = (k + 2) as f64;
    let pi = std::f64::consts::PI;
    let sum: Complex64 = (0..=k as i64)
        .map(|j| {
            let s = ((j + 1) as f64 * pi / kk).sin();
            let e = ((j * (j + 2) * p).rem_euclid(4 * (k as i64 + 2))) as f64;
            Complex64::from_polar(s * s, -pi * e / (2.0 * kk))
        })
        .sum();
    sum * (2.0 / (p as f64 * kk)).sqrt()
}

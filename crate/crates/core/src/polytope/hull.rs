//! Convex hull of a finite point set by the double description method.
//!
//! Points are first projected onto coordinates that parametrize their affine
//! hull, so the remaining polytope is full-dimensional. Facets are the
//! extreme rays of the cone `{(b, a) : b - a·p >= 0 for every point p}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{dot, inverse, rref, IndependentRows};
use crate::rational::{denominator_lcm, Q};

/// `normal · x <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfSpace {
    pub normal: Vec<Q>,
    pub bound: Q,
}

impl HalfSpace {
    pub fn contains(&self, x: &[Q]) -> bool {
        dot(&self.normal, x) <= self.bound
    }
}

/// `normal · x = value`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineEquality {
    pub normal: Vec<Q>,
    pub value: Q,
}

impl AffineEquality {
    pub fn holds(&self, x: &[Q]) -> bool {
        dot(&self.normal, x) == self.value
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullDescription {
    pub ambient_dimension: usize,
    pub dimension: usize,
    pub equalities: Vec<AffineEquality>,
    pub facets: Vec<HalfSpace>,
}

impl HullDescription {
    pub fn contains(&self, x: &[Q]) -> bool {
        self.equalities.iter().all(|e| e.holds(x)) && self.facets.iter().all(|f| f.contains(x))
    }
}

pub fn convex_hull(points: &[Vec<Q>]) -> Result<HullDescription> {
    let Some(p0) = points.first() else {
        return Err(Error::InvalidConstraint(
            "convex hull of an empty point set".into(),
        ));
    };
    let d = p0.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidConstraint(
            "points of differing dimension".into(),
        ));
    }

    let (equalities, pivots) = affine_hull(points);
    let r = pivots.len();

    if r == 0 {
        return Ok(HullDescription {
            ambient_dimension: d,
            dimension: 0,
            equalities,
            facets: Vec::new(),
        });
    }

    let rows: Vec<Vec<Q>> = points
        .iter()
        .map(|p| {
            let mut h = Vec::with_capacity(r + 1);
            h.push(Q::one());
            h.extend(pivots.iter().map(|&c| -p[c].clone()));
            h
        })
        .collect();
    let rays = double_description(&rows, r + 1)?;

    let mut facets: Vec<HalfSpace> = rays
        .into_iter()
        .map(|ray| {
            let mut normal = vec![Q::zero(); d];
            for (k, &c) in pivots.iter().enumerate() {
                normal[c] = ray[k + 1].clone();
            }
            HalfSpace {
                normal,
                bound: ray[0].clone(),
            }
        })
        .collect();
    facets.sort();
    facets.dedup();
    Ok(HullDescription {
        ambient_dimension: d,
        dimension: r,
        equalities,
        facets,
    })
}

/// Equalities cutting out the affine hull of `points` (non-empty, equal
/// lengths), plus the coordinates that parametrize it.
pub fn affine_hull(points: &[Vec<Q>]) -> (Vec<AffineEquality>, Vec<usize>) {
    let p0 = &points[0];
    let d = p0.len();
    let diffs: Vec<Vec<Q>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let (basis, pivots) = rref(&diffs, d);

    // Every non-pivot coordinate is an affine function of the pivot ones.
    let mut equalities = Vec::new();
    for c in (0..d).filter(|c| !pivots.contains(c)) {
        let mut normal = vec![Q::zero(); d];
        normal[c] = Q::one();
        for (row, &pc) in basis.iter().zip(&pivots) {
            normal[pc] -= &row[c];
        }
        let value = dot(&normal, p0);
        equalities.push(AffineEquality { normal, value });
    }
    (equalities, pivots)
}

struct Ray {
    v: Vec<Q>,
    zeros: Bits,
}

/// Extreme rays of the pointed cone `{y : h·y >= 0 for h in rows}` in
/// dimension `dim`, each scaled to a primitive integer vector.
fn double_description(rows: &[Vec<Q>], dim: usize) -> Result<Vec<Vec<Q>>> {
    let n = rows.len();
    let mut tracker = IndependentRows::new(dim);
    let mut initial = Vec::with_capacity(dim);
    for (k, h) in rows.iter().enumerate() {
        if tracker.try_insert(h) {
            initial.push(k);
            if initial.len() == dim {
                break;
            }
        }
    }
    if initial.len() < dim {
        return Err(Error::InvalidConstraint("cone is not pointed".into()));
    }
    let m: Vec<Vec<Q>> = initial.iter().map(|&k| rows[k].clone()).collect();
    let inv = inverse(&m).expect("independent rows form an invertible matrix");

    // Column l of the inverse is tight on every initial row except row l.
    let mut rays: Vec<Ray> = (0..dim)
        .map(|l| {
            let mut zeros = Bits::new(n);
            for (idx, &k) in initial.iter().enumerate() {
                if idx != l {
                    zeros.set(k);
                }
            }
            Ray {
                v: primitive((0..dim).map(|i| inv[i][l].clone()).collect()),
                zeros,
            }
        })
        .collect();

    let mut processed = vec![false; n];
    for &k in &initial {
        processed[k] = true;
    }
    for k in 0..n {
        if processed[k] {
            continue;
        }
        processed[k] = true;
        let h = &rows[k];
        let values: Vec<Q> = rays.iter().map(|ray| dot(h, &ray.v)).collect();
        let plus: Vec<usize> = (0..rays.len())
            .filter(|&i| values[i].is_positive())
            .collect();
        let minus: Vec<usize> = (0..rays.len())
            .filter(|&i| values[i].is_negative())
            .collect();
        if minus.is_empty() {
            for (ray, value) in rays.iter_mut().zip(&values) {
                if value.is_zero() {
                    ray.zeros.set(k);
                }
            }
            continue;
        }

        let mut created = Vec::new();
        for &p in &plus {
            for &q in &minus {
                let common = rays[p].zeros.and(&rays[q].zeros);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(w, ray)| w == p || w == q || !common.is_subset(&ray.zeros));
                if !adjacent {
                    continue;
                }
                let v: Vec<Q> = rays[q]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(vq, vp)| &values[p] * vq - &values[q] * vp)
                    .collect();
                let mut zeros = common;
                zeros.set(k);
                created.push(Ray {
                    v: primitive(v),
                    zeros,
                });
            }
        }

        let mut next: Vec<Ray> = Vec::with_capacity(plus.len() + created.len());
        for (i, mut ray) in rays.into_iter().enumerate() {
            if values[i].is_negative() {
                continue;
            }
            if values[i].is_zero() {
                ray.zeros.set(k);
            }
            next.push(ray);
        }
        next.extend(created);
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}

/// Positive multiple of `v` with coprime integer entries.
fn primitive(v: Vec<Q>) -> Vec<Q> {
    let l = denominator_lcm(&v);
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Q::from_integer(l.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    ints.into_iter().map(|x| Q::from_integer(x / &g)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

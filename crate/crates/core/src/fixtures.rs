//! Named example spaces and cocycles shared by tests and the command line.
//!
//! Everything here is small enough to brute-force, which is the point: each
//! fixture pins a behaviour of the main algorithms against an exhaustive
//! check.

use crate::cube::{Configuration, Vertex};
use crate::error::Result;
use crate::groups::make_heisenberg;
use crate::host_kra::{dk_space, nilmanifold_space, NilmanifoldSpace};
use crate::space::{Config, CubeSpace, Point};
use crate::values::{ValueGroup, ValuePoint};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::HashSet;
use std::sync::Arc;

/// The Heisenberg group over `Z/n` as a cubespace of degree 2 on its own
/// carrier (trivial lattice).
pub fn heisenberg_full(n: u32, max_dim: usize) -> Result<NilmanifoldSpace> {
    let filt = make_heisenberg(n)?;
    nilmanifold_space(filt, &[], max_dim, &format!("heis{n}"))
}

/// The quotient of the Heisenberg group over `Z/n` by its center: an abelian
/// coset space still carrying the degree-2 cube structure.
pub fn heisenberg_central_quotient(n: u32, max_dim: usize) -> Result<NilmanifoldSpace> {
    let filt = make_heisenberg(n)?;
    let center = filt.group().center();
    nilmanifold_space(filt, &center, max_dim, &format!("heis{n}/center"))
}

/// A two-point table space whose square set misses one completion orbit:
/// fails the completion axiom at dimension 2, everything below is intact.
pub fn broken_completion_space() -> Result<Arc<CubeSpace>> {
    let points = 2;
    let mut squares: HashSet<Config> = HashSet::new();
    for c in every_config(2, points) {
        let alt: i32 = Vertex::all(2)
            .map(|v| v.sign() as i32 * c.vals()[v.bits() as usize] as i32)
            .sum();
        if alt.rem_euclid(2) == 0 {
            squares.insert(c);
        }
    }
    // Remove a reflection-closed orbit so the corner (0, 1, 1, .) has no
    // completion left.
    squares.remove(&Configuration::new(2, vec![0, 1, 1, 0]));
    squares.remove(&Configuration::new(2, vec![1, 0, 0, 1]));
    let edges: HashSet<Config> = every_config(1, points).into_iter().collect();
    CubeSpace::from_sets(
        "broken-completion",
        points,
        vec![HashSet::new(), edges, squares],
        Some(1),
    )
}

/// A four-point degree-2 space fibered over the two-point degree-1 space
/// with fiber `Z/2`, whose three-dimensional cubes are twisted: the
/// alternating fiber sum must equal the product of the three base edge
/// differences.  The base swap is a 1-translation downstairs with no
/// translation lifting it; the linear lifting system is inconsistent, and
/// brute force over all 24 bijections of the carrier confirms it.
///
/// Point encoding: `id = base + 2 * fiber` with both coordinates in `Z/2`.
pub fn twisted_extension_space() -> Arc<CubeSpace> {
    let base = |p: Point| (p & 1) as i32;
    let fiber = |p: Point| ((p >> 1) & 1) as i32;
    CubeSpace::from_oracle(
        "twisted-extension",
        4,
        3,
        Some(2),
        Arc::new(move |c: &Config| {
            match c.dim() {
                0 | 1 => true,
                2 => {
                    let alt: i32 = Vertex::all(2)
                        .map(|v| v.sign() as i32 * base(*c.get(v)))
                        .sum();
                    alt.rem_euclid(2) == 0
                }
                3 => {
                    // The base must be affine: every 2-face has alternating
                    // sum zero, i.e. the full configuration is determined by
                    // a basepoint and three edge differences.
                    let y0 = base(c.vals()[0]);
                    let h: Vec<i32> = (0..3)
                        .map(|i| (base(c.vals()[1 << i]) - y0).rem_euclid(2))
                        .collect();
                    for v in Vertex::all(3) {
                        let mut want = y0;
                        for (i, hi) in h.iter().enumerate() {
                            if v.bits() & (1 << i) != 0 {
                                want += hi;
                            }
                        }
                        if base(*c.get(v)) != want.rem_euclid(2) {
                            return false;
                        }
                    }
                    let alt: i32 = Vertex::all(3)
                        .map(|v| v.sign() as i32 * fiber(*c.get(v)))
                        .sum();
                    alt.rem_euclid(2) == (h[0] * h[1] * h[2]).rem_euclid(2)
                }
                _ => false,
            }
        }),
    )
}

/// A 2-cocycle on the degree-1 space over `Z/2` that is not a coboundary:
/// the value is the product of the two edge differences of an affine square.
/// Returned as the right-hand-side table over `Z/2` (one entry per 2-cube in
/// enumeration order) together with the space.
pub fn nonzero_class_table() -> Result<(Arc<CubeSpace>, Vec<Vec<u64>>)> {
    let space = dk_space(&[2], 1, 2)?;
    let rhs = space
        .cubes(2)?
        .cubes
        .iter()
        .map(|c| {
            let v = c.vals();
            let h1 = (v[1] as i32 - v[0] as i32).rem_euclid(2);
            let h2 = (v[2] as i32 - v[0] as i32).rem_euclid(2);
            vec![(h1 * h2).rem_euclid(2) as u64]
        })
        .collect();
    Ok((space, rhs))
}

/// The same class as a torus-valued cocycle (values in `{0, 1/2}`).
pub fn nonzero_class_cocycle() -> Result<crate::cocycle::Cocycle> {
    let (space, rhs) = nonzero_class_table()?;
    let group = ValueGroup::torus_only(1);
    let values = rhs
        .iter()
        .map(|r| {
            ValuePoint::from_rationals(vec![BigRational::new(
                BigInt::from(r[0] as i64),
                BigInt::from(2),
            )])
        })
        .collect();
    crate::cocycle::Cocycle::new(space, 2, group, values)
}

/// All configurations of dimension `d` over `m` points.
pub fn every_config(d: usize, m: usize) -> Vec<Config> {
    let verts = 1usize << d;
    let mut out = Vec::new();
    let mut vals = vec![0 as Point; verts];
    loop {
        out.push(Configuration::new(d, vals.clone()));
        let mut i = 0;
        loop {
            if i == verts {
                return out;
            }
            vals[i] += 1;
            if (vals[i] as usize) < m {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
    }
}

/// All bijections of `m` points.
pub fn every_bijection(m: usize) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    let mut current: Vec<Point> = (0..m as Point).collect();
    heap_permutations(&mut current, m, &mut out);
    out.sort();
    out
}

fn heap_permutations(current: &mut Vec<Point>, k: usize, out: &mut Vec<Vec<Point>>) {
    if k <= 1 {
        out.push(current.clone());
        return;
    }
    for i in 0..k {
        heap_permutations(current, k - 1, out);
        if k % 2 == 0 {
            current.swap(i, k - 1);
        } else {
            current.swap(0, k - 1);
        }
    }
}

//! Combinatorics of discrete-cube configurations.
//!
//! A configuration of dimension `n` is a total map `{0,1}^n -> T`.  Vertices
//! are encoded as bit patterns with coordinate `i` (1-based) stored in bit
//! `i - 1`, and configurations store their values in increasing order of that
//! encoding, i.e. lexicographically with coordinate 1 varying fastest.  All
//! operations below are pure; configurations are cheap to clone at the scales
//! this crate targets.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Hard limit on cube dimension imposed by the `u32` vertex encoding.
pub const MAX_SUPPORTED_DIM: usize = 16;

/// Vertices in increasing `(weight, bits)` order together with, for each
/// vertex, the encodings of the vertices strictly above it.  This is the
/// iteration plan shared by every peeling-style membership test; it is built
/// once per dimension and cached.
pub(crate) fn peel_plan(n: usize) -> &'static [(Vertex, Vec<u32>)] {
    static PLANS: OnceLock<[OnceLock<Vec<(Vertex, Vec<u32>)>>; MAX_SUPPORTED_DIM + 1]> =
        OnceLock::new();
    let plans = PLANS.get_or_init(|| std::array::from_fn(|_| OnceLock::new()));
    plans[n].get_or_init(|| {
        let mut order: Vec<Vertex> = Vertex::all(n).collect();
        order.sort_by_key(|v| (v.weight(), v.bits()));
        order
            .into_iter()
            .map(|w| {
                let above: Vec<u32> = (0..1u32 << n)
                    .filter(|&b| b & w.bits() == w.bits() && b != w.bits())
                    .collect();
                (w, above)
            })
            .collect()
    })
}

/// Default cap on cube dimension used by spaces that do not override it.
pub const DEFAULT_MAX_DIM: usize = 4;

/// A vertex of the discrete cube `{0,1}^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    dim: usize,
    bits: u32,
}

impl Vertex {
    pub fn new(dim: usize, bits: u32) -> Self {
        debug_assert!(dim <= MAX_SUPPORTED_DIM);
        debug_assert!(bits < (1u32 << dim));
        Vertex { dim, bits }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Value of coordinate `i` (1-based).
    pub fn coord(&self, i: usize) -> bool {
        debug_assert!(1 <= i && i <= self.dim);
        (self.bits >> (i - 1)) & 1 == 1
    }

    /// Number of coordinates equal to 1.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Sign `(-1)^{|omega|}` used in alternating sums.
    pub fn sign(&self) -> i8 {
        if self.weight() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All vertices of `{0,1}^n` in encoding order.
    pub fn all(dim: usize) -> impl Iterator<Item = Vertex> {
        (0..(1u32 << dim)).map(move |bits| Vertex { dim, bits })
    }
}

/// A face of `{0,1}^n`: the set of vertices agreeing with `fixed_vals` on the
/// coordinates selected by `fixed_mask`.  Its codimension is the number of
/// fixed coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    dim: usize,
    fixed_mask: u32,
    fixed_vals: u32,
}

impl Face {
    pub fn new(dim: usize, fixed_mask: u32, fixed_vals: u32) -> Self {
        debug_assert!(dim <= MAX_SUPPORTED_DIM);
        debug_assert!(fixed_mask < (1u32 << dim));
        debug_assert_eq!(fixed_vals & !fixed_mask, 0);
        Face {
            dim,
            fixed_mask,
            fixed_vals,
        }
    }

    /// The face of `{0,1}^n` on which the last `k` coordinates are 1.
    pub fn upper(dim: usize, k: usize) -> Self {
        debug_assert!(k <= dim);
        let mask = ((1u32 << k) - 1) << (dim - k);
        Face::new(dim, mask, mask)
    }

    /// The face `{omega : omega >= base}` fixing to 1 exactly the coordinates
    /// where `base` is 1.
    pub fn above(base: Vertex) -> Self {
        Face::new(base.dim, base.bits, base.bits)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn codim(&self) -> usize {
        self.fixed_mask.count_ones() as usize
    }

    pub fn fixed_mask(&self) -> u32 {
        self.fixed_mask
    }

    pub fn fixed_vals(&self) -> u32 {
        self.fixed_vals
    }

    pub fn contains(&self, v: Vertex) -> bool {
        debug_assert_eq!(v.dim, self.dim);
        v.bits & self.fixed_mask == self.fixed_vals
    }

    /// Vertices of the face in encoding order of the ambient cube.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        Vertex::all(self.dim).filter(move |v| self.contains(*v))
    }

    /// Intersection, if non-empty (faces with conflicting fixed values are
    /// disjoint).
    pub fn intersect(&self, other: &Face) -> Option<Face> {
        debug_assert_eq!(self.dim, other.dim);
        let common = self.fixed_mask & other.fixed_mask;
        if self.fixed_vals & common != other.fixed_vals & common {
            return None;
        }
        Some(Face::new(
            self.dim,
            self.fixed_mask | other.fixed_mask,
            self.fixed_vals | other.fixed_vals,
        ))
    }
}

/// All faces of `{0,1}^n` of codimension `k`, ordered lexicographically by
/// fixed-coordinate set and then by fixed values.
pub fn faces(n: usize, k: usize) -> Result<Vec<Face>> {
    if n > MAX_SUPPORTED_DIM {
        return Err(Error::DimensionCap {
            dim: n,
            cap: MAX_SUPPORTED_DIM,
        });
    }
    if k > n {
        return Err(Error::InvalidCodimension { dim: n, codim: k });
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        // Spread the value pattern onto the fixed coordinates in increasing
        // coordinate order.
        for pattern in 0u32..(1 << k) {
            let mut vals = 0u32;
            let mut bit = 0;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    if pattern >> bit & 1 == 1 {
                        vals |= 1 << i;
                    }
                    bit += 1;
                }
            }
            out.push(Face::new(n, mask, vals));
        }
    }
    Ok(out)
}

/// A total map `{0,1}^n -> T`, stored in vertex encoding order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration<T> {
    dim: usize,
    vals: Vec<T>,
}

impl<T: Clone> Configuration<T> {
    pub fn new(dim: usize, vals: Vec<T>) -> Self {
        debug_assert!(dim <= MAX_SUPPORTED_DIM);
        debug_assert_eq!(vals.len(), 1 << dim);
        Configuration { dim, vals }
    }

    /// The constant configuration `[]^n(x)`.
    pub fn constant(dim: usize, x: T) -> Self {
        Configuration::new(dim, vec![x; 1 << dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vals(&self) -> &[T] {
        &self.vals
    }

    pub fn get(&self, v: Vertex) -> &T {
        debug_assert_eq!(v.dim, self.dim);
        &self.vals[v.bits as usize]
    }

    pub fn set(&mut self, v: Vertex, x: T) {
        debug_assert_eq!(v.dim, self.dim);
        self.vals[v.bits as usize] = x;
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Configuration<U> {
        Configuration::new(self.dim, self.vals.iter().map(f).collect())
    }

    /// Restriction to a face, read off in the face's own coordinates (the
    /// free coordinates of the face, in increasing order).
    pub fn restrict(&self, face: &Face) -> Result<Configuration<T>> {
        if face.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: face.dim(),
            });
        }
        let free: Vec<usize> = (0..self.dim)
            .filter(|i| face.fixed_mask() >> i & 1 == 0)
            .collect();
        let sub_dim = free.len();
        let mut vals = Vec::with_capacity(1 << sub_dim);
        for sub in 0u32..(1 << sub_dim) {
            let mut bits = face.fixed_vals();
            for (j, &i) in free.iter().enumerate() {
                if sub >> j & 1 == 1 {
                    bits |= 1 << i;
                }
            }
            vals.push(self.vals[bits as usize].clone());
        }
        Ok(Configuration::new(sub_dim, vals))
    }

    /// Concatenation `[c1, c2]_k`: the `(n+1)`-dimensional configuration that
    /// restricts to `c1` where coordinate `k` is 0 and to `c2` where it is 1.
    /// The coordinate must lie in `1..=n+1`; `n + 1` appends at the end.
    pub fn concat(c1: &Self, c2: &Self, k: usize) -> Result<Configuration<T>> {
        if c1.dim != c2.dim {
            return Err(Error::DimensionMismatch {
                left: c1.dim,
                right: c2.dim,
            });
        }
        let n = c1.dim;
        if k == 0 || k > n + 1 {
            return Err(Error::InvalidCoordinate { dim: n, coord: k });
        }
        if n + 1 > MAX_SUPPORTED_DIM {
            return Err(Error::DimensionCap {
                dim: n + 1,
                cap: MAX_SUPPORTED_DIM,
            });
        }
        let low_mask = (1u32 << (k - 1)) - 1;
        let mut vals = Vec::with_capacity(1 << (n + 1));
        for idx in 0u32..(1 << (n + 1)) {
            let side = idx >> (k - 1) & 1;
            let sub = (idx & low_mask) | (idx >> k << (k - 1));
            let half = if side == 0 { c1 } else { c2 };
            vals.push(half.vals[sub as usize].clone());
        }
        Ok(Configuration::new(n + 1, vals))
    }

    /// Inverse of [`Configuration::concat`]: the two restrictions obtained by
    /// fixing coordinate `k` to 0 and to 1.
    pub fn split(&self, k: usize) -> Result<(Configuration<T>, Configuration<T>)> {
        if k == 0 || k > self.dim {
            return Err(Error::InvalidCoordinate {
                dim: self.dim,
                coord: k,
            });
        }
        let mask = 1u32 << (k - 1);
        let f0 = Face::new(self.dim, mask, 0);
        let f1 = Face::new(self.dim, mask, mask);
        Ok((self.restrict(&f0)?, self.restrict(&f1)?))
    }

    /// The corner configuration: `y` at the all-ones vertex, `x` everywhere
    /// else.  A corner needs at least one coordinate.
    pub fn corner(x: T, y: T, n: usize) -> Result<Configuration<T>> {
        if n == 0 {
            return Err(Error::InvalidCodimension { dim: 0, codim: 1 });
        }
        let mut c = Configuration::constant(n, x);
        c.vals[(1usize << n) - 1] = y;
        Ok(c)
    }

    /// The corner with configuration arguments: `c2` on the vertices whose
    /// last `k` coordinates are all 1, the duplicate of `c1` elsewhere.  Both
    /// inputs have dimension `n`; the result has dimension `n + k`.
    pub fn corner_config(c1: &Self, c2: &Self, k: usize) -> Result<Configuration<T>> {
        if c1.dim != c2.dim {
            return Err(Error::DimensionMismatch {
                left: c1.dim,
                right: c2.dim,
            });
        }
        if k == 0 {
            return Err(Error::InvalidCodimension { dim: 0, codim: 1 });
        }
        let n = c1.dim;
        if n + k > MAX_SUPPORTED_DIM {
            return Err(Error::DimensionCap {
                dim: n + k,
                cap: MAX_SUPPORTED_DIM,
            });
        }
        let top = ((1u32 << k) - 1) << n;
        let base_mask = (1u32 << n) - 1;
        let mut vals = Vec::with_capacity(1 << (n + k));
        for idx in 0u32..(1 << (n + k)) {
            let half = if idx & top == top { c2 } else { c1 };
            vals.push(half.vals[(idx & base_mask) as usize].clone());
        }
        Ok(Configuration::new(n + k, vals))
    }

    /// Duplication `[]^m(c)`: the `(n+m)`-dimensional configuration ignoring
    /// its last `m` coordinates.
    pub fn duplicate(&self, m: usize) -> Result<Configuration<T>> {
        let n = self.dim;
        if n + m > MAX_SUPPORTED_DIM {
            return Err(Error::DimensionCap {
                dim: n + m,
                cap: MAX_SUPPORTED_DIM,
            });
        }
        let base_mask = (1u32 << n) - 1;
        let vals = (0u32..(1 << (n + m)))
            .map(|idx| self.vals[(idx & base_mask) as usize].clone())
            .collect();
        Ok(Configuration::new(n + m, vals))
    }

    /// Reindex by a permutation of the coordinates: `perm[i]` is the source
    /// coordinate (0-based) feeding result coordinate `i`.
    pub fn permute(&self, perm: &[usize]) -> Result<Configuration<T>> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: perm.len(),
            });
        }
        let mut vals = Vec::with_capacity(1 << self.dim);
        for idx in 0u32..(1 << self.dim) {
            let mut src = 0u32;
            for (i, &p) in perm.iter().enumerate() {
                if idx >> i & 1 == 1 {
                    src |= 1 << p;
                }
            }
            vals.push(self.vals[src as usize].clone());
        }
        Ok(Configuration::new(self.dim, vals))
    }

    /// Reflect coordinate `k` (1-based).
    pub fn reflect(&self, k: usize) -> Result<Configuration<T>> {
        if k == 0 || k > self.dim {
            return Err(Error::InvalidCoordinate {
                dim: self.dim,
                coord: k,
            });
        }
        let bit = 1u32 << (k - 1);
        let vals = (0u32..(1 << self.dim))
            .map(|idx| self.vals[(idx ^ bit) as usize].clone())
            .collect();
        Ok(Configuration::new(self.dim, vals))
    }
}

/// Proper faces (codimension between 1 and `max_codim`) grouped by the
/// encoding index of their last vertex.  Used by depth-first searches that
/// assign vertices in encoding order and want to test a face as soon as it is
/// fully assigned.
pub fn faces_by_last_vertex(n: usize, max_codim: usize) -> Result<Vec<Vec<Face>>> {
    let mut out = vec![Vec::new(); 1 << n];
    for k in 1..=max_codim.min(n) {
        for f in faces(n, k)? {
            // The last vertex sets every free coordinate to 1.
            let full = (1u32 << n) - 1;
            let last = f.fixed_vals() | (full & !f.fixed_mask());
            out[last as usize].push(f);
        }
    }
    Ok(out)
}

/// Carriers supporting the alternating sum.
pub trait AbelianCarrier: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl AbelianCarrier for i64 {
    fn zero_like(&self) -> Self {
        0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// The alternating vertex sum `sum_omega (-1)^{|omega|} c(omega)`.
pub fn alternating_sum<T: AbelianCarrier>(c: &Configuration<T>) -> T {
    let mut acc = c.vals[0].zero_like();
    for v in Vertex::all(c.dim()) {
        let term = c.get(v);
        acc = if v.sign() > 0 {
            acc.add(term)
        } else {
            acc.add(&term.neg())
        };
    }
    acc
}

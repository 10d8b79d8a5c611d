//! Cube groups of filtered groups, and the standard cubespaces they induce.
//!
//! For a filtration `G_0 >= G_1 >= ...` the cube group at dimension `n` is
//! generated by the face configurations `[g]_F`: the configuration equal to
//! `g` on the face `F` and to the identity elsewhere, with `g` ranging over
//! `G_{codim F}`.  Every member factors uniquely through the upper faces
//! `F_omega = {omega' >= omega}` taken in increasing weight order, which gives
//! a linear-time membership test by peeling; a breadth-first closure over the
//! generators provides an independent (and much slower) oracle for tests.
//!
//! Two space constructors live here: the degree-`s` abelian space on a finite
//! abelian group (cubes of dimension above `s` are exactly the configurations
//! whose `(s+1)`-dimensional faces have vanishing alternating sum), and the
//! coset space of a filtered group by a finite subgroup, with cube membership
//! decided by searching for a cube-group lift.

use crate::cube::{faces, Configuration, Face, Vertex, MAX_SUPPORTED_DIM};
use crate::error::{Error, Result};
use crate::groups::{alternating_sum_in, Elem, Filtration, FiniteGroup};
use crate::space::{CubeSpace, Point};
use std::collections::HashMap;
use std::sync::Arc;

/// A group-valued configuration.
pub type GroupConfig = Configuration<Elem>;

/// The cube group of a filtration at a fixed dimension.
#[derive(Debug, Clone)]
pub struct HKCubeGroup {
    filtration: Filtration,
    dim: usize,
}

impl HKCubeGroup {
    pub fn new(filtration: Filtration, dim: usize) -> Result<HKCubeGroup> {
        if dim > MAX_SUPPORTED_DIM {
            return Err(Error::DimensionCap {
                dim,
                cap: MAX_SUPPORTED_DIM,
            });
        }
        Ok(HKCubeGroup { filtration, dim })
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `[g]_F`: the configuration equal to `g` on `F`, identity elsewhere.
    pub fn face_element(&self, g: Elem, face: &Face) -> GroupConfig {
        let id = self.filtration.group().id();
        let mut c = Configuration::constant(self.dim, id);
        for v in face.vertices() {
            c.set(v, g);
        }
        c
    }

    /// Left-multiply the vertices of `face` by `g`.
    pub fn face_multiply(&self, c: &mut GroupConfig, g: Elem, face: &Face) {
        let group = self.filtration.group();
        for v in face.vertices() {
            let cur = *c.get(v);
            c.set(v, group.op(g, cur));
        }
    }

    /// Membership by peeling the unique upper-face factorization: processing
    /// vertices in increasing weight order, the residual value at each vertex
    /// `omega` must lie in `G_{|omega|}`, and is then cleared from the face
    /// above `omega`.
    pub fn contains(&self, c: &GroupConfig) -> Result<bool> {
        if c.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: c.dim(),
            });
        }
        let group = self.filtration.group();
        let mut vals: Vec<Elem> = c.vals().to_vec();
        for (w, above) in crate::cube::peel_plan(self.dim) {
            let g = vals[w.bits() as usize];
            if !self.filtration.level_contains(w.weight() as usize, g) {
                return Ok(false);
            }
            let ginv = group.inv(g);
            for &i in above {
                vals[i as usize] = group.op(ginv, vals[i as usize]);
            }
        }
        Ok(true)
    }

    /// The coefficients of the upper-face factorization, in increasing weight
    /// order of the face base: `c = prod_omega [g_omega]_{F_omega}`.
    pub fn factorize(&self, c: &GroupConfig) -> Result<Option<Vec<(Vertex, Elem)>>> {
        if c.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: c.dim(),
            });
        }
        let group = self.filtration.group();
        let mut vals: Vec<Elem> = c.vals().to_vec();
        let plan = crate::cube::peel_plan(self.dim);
        let mut out = Vec::with_capacity(plan.len());
        for (w, above) in plan {
            let g = vals[w.bits() as usize];
            if !self.filtration.level_contains(w.weight() as usize, g) {
                return Ok(None);
            }
            out.push((*w, g));
            let ginv = group.inv(g);
            for &i in above {
                vals[i as usize] = group.op(ginv, vals[i as usize]);
            }
        }
        Ok(Some(out))
    }

    /// Group order: the product over codimensions `k` of `|G_k|^{C(n,k)}`.
    pub fn size(&self) -> u128 {
        let n = self.dim;
        let binom = |n: usize, k: usize| -> u128 {
            (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
        };
        (0..=n)
            .map(|k| (self.filtration.level(k).len() as u128).pow(binom(n, k) as u32))
            .product()
    }

    /// One generator `[g]_F` per face and per non-identity element of the
    /// level at its codimension.
    pub fn generators(&self) -> Result<Vec<GroupConfig>> {
        let id = self.filtration.group().id();
        let mut out = Vec::new();
        for k in 0..=self.dim {
            for face in faces(self.dim, k)? {
                for &g in self.filtration.level(k) {
                    if g != id {
                        out.push(self.face_element(g, &face));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Breadth-first closure of the generators; independent of the peeling
    /// test and therefore useful as an oracle.  Errors out above `cap`.
    pub fn closure(&self, cap: usize) -> Result<Vec<GroupConfig>> {
        let group = self.filtration.group();
        let gens = self.generators()?;
        let id_cfg = Configuration::constant(self.dim, group.id());
        let mut seen: HashMap<GroupConfig, ()> = HashMap::new();
        seen.insert(id_cfg.clone(), ());
        let mut frontier = vec![id_cfg];
        while let Some(c) = frontier.pop() {
            for g in &gens {
                let next = Configuration::new(
                    self.dim,
                    g.vals()
                        .iter()
                        .zip(c.vals())
                        .map(|(&a, &b)| group.op(a, b))
                        .collect(),
                );
                if !seen.contains_key(&next) {
                    if seen.len() >= cap {
                        return Err(Error::CapExceeded {
                            what: format!("cube group closure at dimension {}", self.dim),
                            needed: seen.len() as u128 + 1,
                            cap: cap as u128,
                        });
                    }
                    seen.insert(next.clone(), ());
                    frontier.push(next);
                }
            }
        }
        let mut out: Vec<GroupConfig> = seen.into_keys().collect();
        out.sort();
        Ok(out)
    }
}

/// The degree-`s` abelian space on the product of `Z/m_i`: every
/// configuration of dimension at most `s` is a cube, and a higher-dimensional
/// configuration is a cube exactly when all of its `(s+1)`-dimensional faces
/// have vanishing alternating sum.
pub fn dk_space(moduli: &[u32], s: usize, max_dim: usize) -> Result<Arc<CubeSpace>> {
    let group = FiniteGroup::abelian_product(moduli)?;
    let name = format!(
        "D_{s}({})",
        moduli
            .iter()
            .map(|m| format!("Z/{m}"))
            .collect::<Vec<_>>()
            .join(" x ")
    );
    let points = group.order();
    let oracle = {
        let group = group.clone();
        move |c: &Configuration<Point>| -> bool {
            let n = c.dim();
            if n <= s {
                return true;
            }
            let elems = c.map(|&p| p as Elem);
            for face in faces(n, n - s - 1).expect("codimension within range") {
                let sub = elems.restrict(&face).expect("face of matching dimension");
                if alternating_sum_in(&group, &sub).expect("abelian product") != group.id() {
                    return false;
                }
            }
            true
        }
    };
    Ok(CubeSpace::from_oracle(
        name,
        points,
        max_dim,
        Some(s),
        Arc::new(oracle),
    ))
}

/// The coset space of a filtered group by a finite subgroup, together with
/// the data needed to act on it.
#[derive(Debug, Clone)]
pub struct NilmanifoldSpace {
    pub space: Arc<CubeSpace>,
    pub filtration: Filtration,
    /// The discrete subgroup, sorted.
    pub gamma: Vec<Elem>,
    /// Least element of each coset, indexed by point id.
    pub reps: Vec<Elem>,
    /// Point id of the coset of each group element.
    pub point_of: Vec<Point>,
}

impl NilmanifoldSpace {
    /// The point carrying the coset `g * Gamma`.
    pub fn project(&self, g: Elem) -> Point {
        self.point_of[g as usize]
    }

    /// Left translation by `g` as a point map.
    pub fn left_translation(&self, g: Elem) -> Vec<Point> {
        let group = self.filtration.group();
        self.reps
            .iter()
            .map(|&r| self.point_of[group.op(g, r) as usize])
            .collect()
    }
}

/// Build the coset space `G / Gamma` of a filtration by the subgroup
/// generated by `gamma_gens`.  A configuration of cosets is a cube when some
/// choice of coset representatives lies in the cube group; the search peels
/// vertices in weight order, which prunes hard because the representative at
/// each vertex must reduce into the right filtration level.
pub fn nilmanifold_space(
    filtration: Filtration,
    gamma_gens: &[Elem],
    max_dim: usize,
    name: impl Into<String>,
) -> Result<NilmanifoldSpace> {
    let group = filtration.group().clone();
    let gamma = group.closure(gamma_gens);
    // Cosets g * Gamma, with point ids ordered by least element.
    let mut point_of = vec![Point::MAX; group.order()];
    let mut reps = Vec::new();
    for g in group.elements() {
        if point_of[g as usize] == Point::MAX {
            let members: Vec<Elem> = gamma.iter().map(|&t| group.op(g, t)).collect();
            let id = reps.len() as Point;
            for m in &members {
                point_of[*m as usize] = id;
            }
            reps.push(*members.iter().min().unwrap());
        }
    }
    let degree = filtration.degree();
    let oracle = {
        let filtration = filtration.clone();
        let gamma = gamma.clone();
        let reps = reps.clone();
        move |c: &Configuration<Point>| -> bool {
            coset_lift_exists(&filtration, &gamma, &reps, c)
        }
    };
    let space = CubeSpace::from_oracle(
        name,
        reps.len(),
        max_dim,
        Some(degree),
        Arc::new(oracle),
    );
    Ok(NilmanifoldSpace {
        space,
        filtration,
        gamma,
        reps,
        point_of,
    })
}

/// Decide whether a coset configuration lifts into the cube group: a
/// depth-first search over one subgroup element per vertex, interleaved with
/// the peeling of [`HKCubeGroup::contains`] so each choice is constrained to
/// land in the filtration level of its vertex weight.
fn coset_lift_exists(
    filtration: &Filtration,
    gamma: &[Elem],
    reps: &[Elem],
    c: &Configuration<Point>,
) -> bool {
    let n = c.dim();
    let group = filtration.group();
    let plan = crate::cube::peel_plan(n);
    // adjust[v] is the accumulated left multiplier from the peels so far;
    // undo is a shared stack of overwritten values for backtracking.
    let mut adjust = vec![group.id(); 1 << n];
    let mut undo = Vec::with_capacity(plan.len() * (1 << n));
    coset_lift_dfs(filtration, gamma, reps, c, plan, 0, &mut adjust, &mut undo)
}

#[allow(clippy::too_many_arguments)]
fn coset_lift_dfs(
    filtration: &Filtration,
    gamma: &[Elem],
    reps: &[Elem],
    c: &Configuration<Point>,
    plan: &[(Vertex, Vec<u32>)],
    step: usize,
    adjust: &mut Vec<Elem>,
    undo: &mut Vec<Elem>,
) -> bool {
    if step == plan.len() {
        return true;
    }
    let group = filtration.group();
    let (w, above) = &plan[step];
    let rep = reps[*c.get(*w) as usize];
    let base = group.op(adjust[w.bits() as usize], rep);
    for &t in gamma {
        let u = group.op(base, t);
        if !filtration.level_contains(w.weight() as usize, u) {
            continue;
        }
        // Peel: clear u from the face above w and recurse.
        let uinv = group.inv(u);
        let mark = undo.len();
        for &i in above {
            undo.push(adjust[i as usize]);
            adjust[i as usize] = group.op(uinv, adjust[i as usize]);
        }
        if coset_lift_dfs(filtration, gamma, reps, c, plan, step + 1, adjust, undo) {
            return true;
        }
        for (j, &i) in above.iter().enumerate() {
            adjust[i as usize] = undo[mark + j];
        }
        undo.truncate(mark);
    }
    false
}

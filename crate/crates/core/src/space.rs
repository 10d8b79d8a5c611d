//! Finite cubespaces: carriers, cube sets, axiom checkers, canonical
//! factors, and structure groups.
//!
//! A [`CubeSpace`] couples a finite point carrier with a cube membership
//! backend: an explicit per-dimension set, a membership oracle, or a quotient
//! of another space (membership by lift search).  Cube lists per dimension
//! are enumerated lazily by a depth-first search that assigns vertices in
//! encoding order and prunes on completed faces, and are cached.
//!
//! The checkers return structured reports rather than bare booleans: each
//! records a witness on failure and how much of the search space was covered,
//! since some checks have to sample above a configurable budget.

use crate::cube::{faces_by_last_vertex, Configuration, Face};
use crate::error::{Error, Result};
use crate::groups::{cyclic_decomposition, AbelianDecomposition, FiniteGroup};
use crate::rng::SplitMix64;
use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock};

/// Point id inside a cubespace carrier.
pub type Point = u16;

/// A configuration of points.
pub type Config = Configuration<Point>;

/// Default cap on the number of cubes enumerated per dimension.
pub const DEFAULT_ENUMERATION_CAP: usize = 2_000_000;

/// How much of its search space a checker covered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    Sampled { checked: u64 },
    Skipped { reason: String },
}

/// Outcome of one axiom check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
    pub coverage: Coverage,
}

impl CheckReport {
    pub(crate) fn pass(name: &str, coverage: Coverage) -> Self {
        CheckReport {
            name: name.into(),
            passed: true,
            witness: None,
            coverage,
        }
    }

    pub(crate) fn fail(name: &str, witness: String, coverage: Coverage) -> Self {
        CheckReport {
            name: name.into(),
            passed: false,
            witness: Some(witness),
            coverage,
        }
    }
}

/// Budget for checks that may have to sample: a deterministic seed plus the
/// largest number of individual facts checked exhaustively.
#[derive(Debug, Clone)]
pub struct CheckBudget {
    pub seed: u64,
    pub exhaustive_cap: u64,
    pub sample_size: u64,
}

impl Default for CheckBudget {
    fn default() -> Self {
        CheckBudget {
            seed: 0,
            exhaustive_cap: 4_000_000,
            sample_size: 100_000,
        }
    }
}

/// Cached cube list for one dimension.
#[derive(Debug)]
pub struct CubeList {
    pub cubes: Vec<Config>,
    pub index: HashMap<Config, u32>,
}

enum Backend {
    Oracle(Arc<dyn Fn(&Config) -> bool + Send + Sync>),
    Explicit(Vec<HashSet<Config>>),
    Quotient {
        source: Arc<CubeSpace>,
        fibers: Vec<Vec<Point>>,
    },
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Oracle(_) => write!(f, "Oracle"),
            Backend::Explicit(sets) => write!(f, "Explicit({} dims)", sets.len()),
            Backend::Quotient { source, .. } => write!(f, "Quotient of {}", source.name()),
        }
    }
}

/// A finite cubespace.
#[derive(Debug)]
pub struct CubeSpace {
    name: String,
    points: usize,
    max_dim: usize,
    claimed_degree: Option<usize>,
    enumeration_cap: usize,
    backend: Backend,
    cube_lists: Vec<OnceLock<Result<CubeList>>>,
}

impl CubeSpace {
    fn build(
        name: String,
        points: usize,
        max_dim: usize,
        claimed_degree: Option<usize>,
        backend: Backend,
    ) -> Arc<CubeSpace> {
        Arc::new(CubeSpace {
            name,
            points,
            max_dim,
            claimed_degree,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            backend,
            cube_lists: (0..=max_dim).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Space defined by a membership oracle.
    pub fn from_oracle(
        name: impl Into<String>,
        points: usize,
        max_dim: usize,
        claimed_degree: Option<usize>,
        oracle: Arc<dyn Fn(&Config) -> bool + Send + Sync>,
    ) -> Arc<CubeSpace> {
        CubeSpace::build(name.into(), points, max_dim, claimed_degree, Backend::Oracle(oracle))
    }

    /// Space defined by explicit cube sets per dimension (`sets[n]` holds the
    /// n-dimensional cubes; dimension 0 is normalized to all points).
    pub fn from_sets(
        name: impl Into<String>,
        points: usize,
        mut sets: Vec<HashSet<Config>>,
        claimed_degree: Option<usize>,
    ) -> Result<Arc<CubeSpace>> {
        if sets.is_empty() {
            return Err(Error::Parse("no cube sets given".into()));
        }
        sets[0] = (0..points as Point)
            .map(|p| Configuration::new(0, vec![p]))
            .collect();
        for (n, set) in sets.iter().enumerate() {
            for c in set {
                if c.dim() != n {
                    return Err(Error::DimensionMismatch {
                        left: n,
                        right: c.dim(),
                    });
                }
                if c.vals().iter().any(|&p| p as usize >= points) {
                    return Err(Error::OutOfRange {
                        id: *c.vals().iter().max().unwrap() as usize,
                        size: points,
                    });
                }
            }
        }
        let max_dim = sets.len() - 1;
        Ok(CubeSpace::build(
            name.into(),
            points,
            max_dim,
            claimed_degree,
            Backend::Explicit(sets),
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn point_count(&self) -> usize {
        self.points
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        0..self.points as Point
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn claimed_degree(&self) -> Option<usize> {
        self.claimed_degree
    }

    /// Decide cube membership.  Dimension-0 configurations are always cubes;
    /// dimensions beyond the cap are an error.
    pub fn is_cube(&self, c: &Config) -> Result<bool> {
        if c.dim() > self.max_dim {
            return Err(Error::DimensionCap {
                dim: c.dim(),
                cap: self.max_dim,
            });
        }
        if c.vals().iter().any(|&p| p as usize >= self.points) {
            return Err(Error::OutOfRange {
                id: *c.vals().iter().max().unwrap() as usize,
                size: self.points,
            });
        }
        if c.dim() == 0 {
            return Ok(true);
        }
        // A finished cube list doubles as a membership set.
        if let Some(Ok(list)) = self.cube_lists[c.dim()].get() {
            return Ok(list.index.contains_key(c));
        }
        match &self.backend {
            Backend::Oracle(f) => Ok(f(c)),
            Backend::Explicit(sets) => Ok(sets[c.dim()].contains(c)),
            Backend::Quotient { source, fibers } => {
                let candidates: Vec<&[Point]> = c
                    .vals()
                    .iter()
                    .map(|&p| fibers[p as usize].as_slice())
                    .collect();
                Ok(search_lift(source, c.dim(), &candidates)?.is_some())
            }
        }
    }

    /// The cubes of dimension `n`, enumerated once and cached.
    pub fn cubes(&self, n: usize) -> Result<&CubeList> {
        if n > self.max_dim {
            return Err(Error::DimensionCap {
                dim: n,
                cap: self.max_dim,
            });
        }
        self.cube_lists[n]
            .get_or_init(|| self.enumerate_cubes(n))
            .as_ref()
            .map_err(|e| e.clone())
    }

    fn enumerate_cubes(&self, n: usize) -> Result<CubeList> {
        let mut cubes = Vec::new();
        if n == 0 {
            cubes.extend((0..self.points as Point).map(|p| Configuration::new(0, vec![p])));
        } else {
            let all: Vec<Point> = (0..self.points as Point).collect();
            let candidates = vec![all.as_slice(); 1 << n];
            let faces_at = faces_by_last_vertex(n, n)?;
            let mut vals: Vec<Point> = Vec::with_capacity(1 << n);
            self.dfs_cubes(n, &candidates, &faces_at, &mut vals, &mut cubes)?;
        }
        let index = cubes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i as u32))
            .collect();
        Ok(CubeList { cubes, index })
    }

    fn dfs_cubes(
        &self,
        n: usize,
        candidates: &[&[Point]],
        faces_at: &[Vec<Face>],
        vals: &mut Vec<Point>,
        out: &mut Vec<Config>,
    ) -> Result<()> {
        if vals.len() == 1 << n {
            let c = Configuration::new(n, vals.clone());
            if self.is_cube_uncached(&c)? {
                if out.len() >= self.enumeration_cap {
                    return Err(Error::CapExceeded {
                        what: format!("cube enumeration at dimension {n} in {}", self.name),
                        needed: out.len() as u128 + 1,
                        cap: self.enumeration_cap as u128,
                    });
                }
                out.push(c);
            }
            return Ok(());
        }
        let v = vals.len();
        'next: for &p in candidates[v] {
            vals.push(p);
            // Restriction closure: every completed proper face must be a cube.
            for f in &faces_at[v] {
                let partial = Configuration::new(
                    f.dim() - f.codim(),
                    f.vertices().map(|w| vals[w.bits() as usize]).collect(),
                );
                if !self.is_cube(&partial)? {
                    vals.pop();
                    continue 'next;
                }
            }
            self.dfs_cubes(n, candidates, faces_at, vals, out)?;
            vals.pop();
        }
        Ok(())
    }

    /// Membership via the backend, bypassing the cached list (used while the
    /// list for this dimension is being built).
    fn is_cube_uncached(&self, c: &Config) -> Result<bool> {
        match &self.backend {
            Backend::Oracle(f) => Ok(f(c)),
            Backend::Explicit(sets) => Ok(sets[c.dim()].contains(c)),
            Backend::Quotient { source, fibers } => {
                let candidates: Vec<&[Point]> = c
                    .vals()
                    .iter()
                    .map(|&p| fibers[p as usize].as_slice())
                    .collect();
                Ok(search_lift(source, c.dim(), &candidates)?.is_some())
            }
        }
    }

    pub fn cube_index(&self, c: &Config) -> Result<Option<u32>> {
        Ok(self.cubes(c.dim())?.index.get(c).copied())
    }

    /// C^1 must be all of X x X.
    pub fn check_ergodic(&self) -> Result<CheckReport> {
        for x in self.points() {
            for y in self.points() {
                let c = Configuration::new(1, vec![x, y]);
                if !self.is_cube(&c)? {
                    return Ok(CheckReport::fail(
                        "ergodic",
                        format!("pair ({x}, {y}) is not a 1-cube"),
                        Coverage::Exhaustive,
                    ));
                }
            }
        }
        Ok(CheckReport::pass("ergodic", Coverage::Exhaustive))
    }

    /// Glueing at dimension `n`: if `[c1,c2]` and `[c2,c3]` are cubes along a
    /// common coordinate, so is `[c1,c3]`.
    pub fn check_glueing(&self, n: usize, budget: &CheckBudget) -> Result<CheckReport> {
        let name = format!("glueing-{n}");
        let list = match self.cubes(n) {
            Ok(l) => l,
            Err(Error::CapExceeded { what, .. }) => {
                return Ok(CheckReport::pass(
                    &name,
                    Coverage::Skipped {
                        reason: format!("cube list unavailable: {what}"),
                    },
                ))
            }
            Err(e) => return Err(e),
        };
        let mut checked = 0u64;
        for j in 1..=n {
            // Group cubes by their lower half along coordinate j.
            let mut by_lower: HashMap<Config, Vec<usize>> = HashMap::new();
            let mut halves = Vec::with_capacity(list.cubes.len());
            for (i, c) in list.cubes.iter().enumerate() {
                let (c0, c1) = c.split(j)?;
                by_lower.entry(c0.clone()).or_default().push(i);
                halves.push((c0, c1));
            }
            let total: u64 = halves
                .iter()
                .map(|(_, c1)| by_lower.get(c1).map_or(0, |v| v.len() as u64))
                .sum();
            if checked + total > budget.exhaustive_cap {
                // Deterministic sample of glueing triples.
                let mut rng = SplitMix64::new(budget.seed ^ n as u64 ^ (j as u64) << 8);
                let mut sampled = 0u64;
                while sampled < budget.sample_size {
                    let i = rng.below(list.cubes.len() as u64) as usize;
                    let (c0, c1) = &halves[i];
                    let Some(nexts) = by_lower.get(c1) else {
                        sampled += 1;
                        continue;
                    };
                    let other = nexts[rng.below(nexts.len() as u64) as usize];
                    let c3 = &halves[other].1;
                    let glued = Configuration::concat(c0, c3, j)?;
                    if !self.is_cube(&glued)? {
                        return Ok(CheckReport::fail(
                            &name,
                            format!(
                                "cubes {:?} and {:?} glue along coordinate {j} to non-cube {:?}",
                                list.cubes[i], list.cubes[other], glued
                            ),
                            Coverage::Sampled { checked: sampled },
                        ));
                    }
                    sampled += 1;
                }
                return Ok(CheckReport::pass(&name, Coverage::Sampled { checked: sampled }));
            }
            for (i, (c0, c1)) in halves.iter().enumerate() {
                let Some(nexts) = by_lower.get(c1) else {
                    continue;
                };
                for &other in nexts {
                    let c3 = &halves[other].1;
                    let glued = Configuration::concat(c0, c3, j)?;
                    checked += 1;
                    if !self.is_cube(&glued)? {
                        return Ok(CheckReport::fail(
                            &name,
                            format!(
                                "cubes {:?} and {:?} glue along coordinate {j} to non-cube {:?}",
                                list.cubes[i], list.cubes[other], glued
                            ),
                            Coverage::Exhaustive,
                        ));
                    }
                }
            }
        }
        Ok(CheckReport::pass(&name, Coverage::Exhaustive))
    }

    /// k-uniqueness: two k-cubes agreeing off the all-ones vertex agree
    /// everywhere.
    pub fn check_uniqueness(&self, k: usize) -> Result<CheckReport> {
        let name = format!("uniqueness-{k}");
        let list = self.cubes(k)?;
        let top = (1usize << k) - 1;
        let mut seen: HashMap<&[Point], Point> = HashMap::new();
        for c in &list.cubes {
            let body = &c.vals()[..top];
            let last = c.vals()[top];
            if let Some(&prev) = seen.get(body) {
                if prev != last {
                    return Ok(CheckReport::fail(
                        &name,
                        format!(
                            "cubes {:?} with tops {prev} and {last} agree off the top vertex",
                            body
                        ),
                        Coverage::Exhaustive,
                    ));
                }
            } else {
                seen.insert(body, last);
            }
        }
        Ok(CheckReport::pass(&name, Coverage::Exhaustive))
    }

    /// Completion at dimension `n`: every corner (all vertices but the top
    /// assigned, with every completed proper face a cube) extends to a cube.
    pub fn check_completion(&self, n: usize, budget: &CheckBudget) -> Result<CheckReport> {
        let name = format!("completion-{n}");
        if n == 0 {
            return Ok(CheckReport::pass(&name, Coverage::Exhaustive));
        }
        let faces_at = faces_by_last_vertex(n, n)?;
        let mut vals: Vec<Point> = Vec::with_capacity((1 << n) - 1);
        let mut examined = 0u64;
        let mut witness: Option<String> = None;
        self.dfs_corners(
            n,
            &faces_at,
            &mut vals,
            budget.exhaustive_cap,
            &mut examined,
            &mut witness,
        )?;
        if let Some(w) = witness {
            return Ok(CheckReport::fail(
                &name,
                w,
                if examined >= budget.exhaustive_cap {
                    Coverage::Sampled { checked: examined }
                } else {
                    Coverage::Exhaustive
                },
            ));
        }
        Ok(CheckReport::pass(
            &name,
            if examined >= budget.exhaustive_cap {
                Coverage::Sampled { checked: examined }
            } else {
                Coverage::Exhaustive
            },
        ))
    }

    fn dfs_corners(
        &self,
        n: usize,
        faces_at: &[Vec<Face>],
        vals: &mut Vec<Point>,
        cap: u64,
        examined: &mut u64,
        witness: &mut Option<String>,
    ) -> Result<()> {
        if witness.is_some() || *examined >= cap {
            return Ok(());
        }
        let top = (1usize << n) - 1;
        if vals.len() == top {
            *examined += 1;
            let mut full = vals.clone();
            full.push(0);
            for p in self.points() {
                full[top] = p;
                if self.is_cube(&Configuration::new(n, full.clone()))? {
                    return Ok(());
                }
            }
            *witness = Some(format!("corner {vals:?} has no completion"));
            return Ok(());
        }
        let v = vals.len();
        'next: for p in self.points() {
            vals.push(p);
            for f in &faces_at[v] {
                let partial = Configuration::new(
                    f.dim() - f.codim(),
                    f.vertices().map(|w| vals[w.bits() as usize]).collect(),
                );
                if !self.is_cube(&partial)? {
                    vals.pop();
                    continue 'next;
                }
            }
            self.dfs_corners(n, faces_at, vals, cap, examined, witness)?;
            vals.pop();
            if witness.is_some() || *examined >= cap {
                return Ok(());
            }
        }
        Ok(())
    }

    /// Run the full nilspace axiom suite for a claimed degree: ergodicity,
    /// glueing and completion at every checkable dimension, and
    /// `(degree+1)`-uniqueness.
    pub fn check_nilspace(&self, degree: usize, budget: &CheckBudget) -> Result<Vec<CheckReport>> {
        let mut out = vec![self.check_ergodic()?];
        for n in 2..=self.max_dim {
            out.push(self.check_glueing(n, budget)?);
            out.push(self.check_completion(n, budget)?);
        }
        if degree + 1 <= self.max_dim {
            out.push(self.check_uniqueness(degree + 1)?);
        } else {
            out.push(CheckReport::pass(
                &format!("uniqueness-{}", degree + 1),
                Coverage::Skipped {
                    reason: format!("dimension {} above cap {}", degree + 1, self.max_dim),
                },
            ));
        }
        Ok(out)
    }
}

/// Find one lift of a quotient configuration to a cube of the source space,
/// assigning vertices in encoding order with codimension-1 face pruning.
pub(crate) fn search_lift(
    source: &CubeSpace,
    dim: usize,
    candidates: &[&[Point]],
) -> Result<Option<Config>> {
    if dim == 0 {
        return Ok(Some(Configuration::new(0, vec![candidates[0][0]])));
    }
    let faces_at = faces_by_last_vertex(dim, 1)?;
    let mut vals = Vec::with_capacity(1 << dim);
    Ok(search_lift_dfs(source, dim, candidates, &faces_at, &mut vals)?)
}

fn search_lift_dfs(
    source: &CubeSpace,
    dim: usize,
    candidates: &[&[Point]],
    faces_at: &[Vec<Face>],
    vals: &mut Vec<Point>,
) -> Result<Option<Config>> {
    if vals.len() == 1 << dim {
        let c = Configuration::new(dim, vals.clone());
        return Ok(if source.is_cube(&c)? { Some(c) } else { None });
    }
    let v = vals.len();
    'next: for &p in candidates[v] {
        vals.push(p);
        for f in &faces_at[v] {
            let partial = Configuration::new(
                f.dim() - f.codim(),
                f.vertices().map(|w| vals[w.bits() as usize]).collect(),
            );
            if !source.is_cube(&partial)? {
                vals.pop();
                continue 'next;
            }
        }
        if let Some(c) = search_lift_dfs(source, dim, candidates, faces_at, vals)? {
            vals.pop();
            return Ok(Some(c));
        }
        vals.pop();
    }
    Ok(None)
}

/// A surjective cube-preserving map onto a quotient space.
#[derive(Debug, Clone)]
pub struct FactorMap {
    pub source: Arc<CubeSpace>,
    pub target: Arc<CubeSpace>,
    /// Target class of each source point.
    pub class_of: Vec<Point>,
    /// Source points of each target class, sorted ascending.
    pub fibers: Vec<Vec<Point>>,
}

impl FactorMap {
    pub fn apply(&self, x: Point) -> Point {
        self.class_of[x as usize]
    }

    pub fn apply_config(&self, c: &Config) -> Config {
        c.map(|&x| self.class_of[x as usize])
    }

    /// Least source point in each fiber; the canonical section.
    pub fn section(&self, y: Point) -> Point {
        self.fibers[y as usize][0]
    }

    /// Identity factor (quotient by equality).
    pub fn identity(space: &Arc<CubeSpace>) -> FactorMap {
        FactorMap {
            source: space.clone(),
            target: space.clone(),
            class_of: space.points().collect(),
            fibers: space.points().map(|p| vec![p]).collect(),
        }
    }
}

/// The canonical k-th factor: quotient by `x ~ y` iff the corner with `y` at
/// the top of a `(k+1)`-cube of `x`s is a cube.  The relation is verified to
/// be an equivalence; a violation means the space is not a nilspace and is
/// reported with a witness.
pub fn canonical_factor(space: &Arc<CubeSpace>, k: usize) -> Result<FactorMap> {
    let n = k + 1;
    if n > space.max_dim() {
        return Err(Error::DimensionCap {
            dim: n,
            cap: space.max_dim(),
        });
    }
    let m = space.point_count();
    let mut rel = vec![false; m * m];
    for x in space.points() {
        for y in space.points() {
            let c = Configuration::corner(x, y, n)?;
            rel[x as usize * m + y as usize] = space.is_cube(&c)?;
        }
    }
    for x in 0..m {
        if !rel[x * m + x] {
            return Err(Error::NotANilspace {
                axiom: "corner relation reflexive".into(),
                witness: format!("constant {n}-cube at point {x} is not a cube"),
            });
        }
        for y in 0..m {
            if rel[x * m + y] != rel[y * m + x] {
                return Err(Error::NotANilspace {
                    axiom: "corner relation symmetric".into(),
                    witness: format!("points {x} and {y} at dimension {n}"),
                });
            }
            if rel[x * m + y] {
                for z in 0..m {
                    if rel[y * m + z] && !rel[x * m + z] {
                        return Err(Error::NotANilspace {
                            axiom: "corner relation transitive".into(),
                            witness: format!("points {x} ~ {y} ~ {z} but {x} !~ {z}"),
                        });
                    }
                }
            }
        }
    }
    // Classes keyed by least member; target ids in order of least member.
    let mut class_rep = vec![Point::MAX; m];
    let mut reps = Vec::new();
    for x in 0..m {
        let least = (0..m).find(|&y| rel[x * m + y]).unwrap();
        class_rep[x] = least as Point;
        if least == x {
            reps.push(x as Point);
        }
    }
    let rep_index: HashMap<Point, Point> = reps
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, i as Point))
        .collect();
    let class_of: Vec<Point> = (0..m).map(|x| rep_index[&class_rep[x]]).collect();
    let mut fibers = vec![Vec::new(); reps.len()];
    for x in 0..m {
        fibers[class_of[x] as usize].push(x as Point);
    }
    let target = CubeSpace::build(
        format!("{}/pi_{k}", space.name()),
        reps.len(),
        space.max_dim(),
        Some(k),
        Backend::Quotient {
            source: space.clone(),
            fibers: fibers.clone(),
        },
    );
    Ok(FactorMap {
        source: space.clone(),
        target,
        class_of,
        fibers,
    })
}

/// The degree-`s` structure group acting on the fibers of the canonical
/// `(s-1)`-factor: the fiber-preserving s-translations, verified to form an
/// abelian group acting freely and transitively on every fiber.
#[derive(Debug, Clone)]
pub struct StructureGroupAction {
    pub space: Arc<CubeSpace>,
    pub factor: FactorMap,
    pub level: usize,
    /// Translation maps, indexed by group element id.
    pub maps: Vec<Vec<Point>>,
    pub group: FiniteGroup,
    pub decomposition: AbelianDecomposition,
}

impl StructureGroupAction {
    pub fn act(&self, a: crate::groups::Elem, x: Point) -> Point {
        self.maps[a as usize][x as usize]
    }

    pub fn act_config(&self, a: crate::groups::Elem, c: &Config) -> Config {
        c.map(|&x| self.act(a, x))
    }

    /// The unique element sending `x` to `y`; errors when `x` and `y` are in
    /// different fibers.
    pub fn elem_sending(&self, x: Point, y: Point) -> Result<crate::groups::Elem> {
        for (a, map) in self.maps.iter().enumerate() {
            if map[x as usize] == y {
                return Ok(a as crate::groups::Elem);
            }
        }
        Err(Error::StructureExtraction(format!(
            "no structure group element sends {x} to {y}"
        )))
    }

    pub fn order(&self) -> usize {
        self.maps.len()
    }
}

/// Extract the structure group at level `s` (see [`StructureGroupAction`]).
pub fn structure_group(space: &Arc<CubeSpace>, s: usize) -> Result<StructureGroupAction> {
    if s == 0 {
        return Err(Error::StructureExtraction(
            "structure groups start at level 1".into(),
        ));
    }
    let factor = if s == 1 {
        // pi_0 collapses an ergodic space to a point.
        canonical_factor(space, 0)?
    } else {
        canonical_factor(space, s - 1)?
    };
    let all = crate::translations::enumerate_level(space, s, usize::MAX)?;
    let maps: Vec<Vec<Point>> = all
        .into_iter()
        .filter(|m| {
            space
                .points()
                .all(|x| factor.apply(m[x as usize]) == factor.apply(x))
        })
        .collect();
    if maps.is_empty() {
        return Err(Error::StructureExtraction(
            "no fiber-preserving translations found".into(),
        ));
    }
    // Composition table; the set must be closed.
    let index: HashMap<&Vec<Point>, usize> = maps.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut table = vec![vec![0 as crate::groups::Elem; maps.len()]; maps.len()];
    for (i, a) in maps.iter().enumerate() {
        for (j, b) in maps.iter().enumerate() {
            let comp: Vec<Point> = (0..space.point_count())
                .map(|x| a[b[x] as usize])
                .collect();
            let Some(&k) = index.get(&comp) else {
                return Err(Error::StructureExtraction(format!(
                    "fiber-preserving translations not closed under composition ({i} after {j})"
                )));
            };
            table[i][j] = k as crate::groups::Elem;
        }
    }
    let group = FiniteGroup::from_table(table)
        .map_err(|e| Error::StructureExtraction(format!("translation set: {e}")))?;
    if !group.is_abelian() {
        return Err(Error::StructureExtraction(
            "structure group is not abelian".into(),
        ));
    }
    // Free action.
    for (i, m) in maps.iter().enumerate() {
        if i != group.id() as usize {
            if let Some(x) = space.points().find(|&x| m[x as usize] == x) {
                return Err(Error::StructureExtraction(format!(
                    "translation {i} fixes point {x}: action is not free"
                )));
            }
        }
    }
    // Orbits equal fibers.
    for (y, fiber) in factor.fibers.iter().enumerate() {
        let orbit: HashSet<Point> = maps.iter().map(|m| m[fiber[0] as usize]).collect();
        let fiber_set: HashSet<Point> = fiber.iter().copied().collect();
        if orbit != fiber_set {
            return Err(Error::StructureExtraction(format!(
                "orbit of fiber {y} does not match the fiber"
            )));
        }
    }
    let decomposition = cyclic_decomposition(&group)?;
    Ok(StructureGroupAction {
        space: space.clone(),
        factor,
        level: s,
        maps,
        group,
        decomposition,
    })
}

// Re-export Vertex for downstream convenience in witness construction.
pub use crate::cube::Vertex as CubeVertex;

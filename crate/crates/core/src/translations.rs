//! Translations of a cubespace: bijections moving cubes to cubes along
//! faces.
//!
//! A bijection `phi` of the carrier is a `k`-translation when modifying any
//! cube by `phi` on any face of codimension `k` yields a cube again.  On a
//! space of degree `s` there is an equivalent corner test that only looks at
//! one dimension: `phi` is a `k`-translation exactly when for every cube `c`
//! of dimension `s + 1 - k` the corner configuration with `phi . c` on the
//! top codimension-`k` face is an `(s+1)`-cube.  Both tests are implemented;
//! the enumeration below backtracks against the corner test because it prunes
//! partial assignments, and the two characterizations are played against each
//! other in tests.

use crate::cube::{faces, Configuration};
use crate::error::{Error, Result};
use crate::space::{Config, CubeSpace, Point};
use std::collections::HashSet;
use std::sync::Arc;

/// A map of the carrier, tabulated by point id.
pub type PointMap = Vec<Point>;

/// Default cap on the number of translations enumerated per level.
pub const DEFAULT_TRANSLATION_CAP: usize = 4096;

pub fn is_bijection(map: &[Point], points: usize) -> bool {
    if map.len() != points {
        return false;
    }
    let mut seen = vec![false; points];
    for &y in map {
        if y as usize >= points || seen[y as usize] {
            return false;
        }
        seen[y as usize] = true;
    }
    true
}

/// `a` after `b`.
pub fn compose(a: &[Point], b: &[Point]) -> PointMap {
    b.iter().map(|&x| a[x as usize]).collect()
}

pub fn invert(map: &[Point]) -> Result<PointMap> {
    if !is_bijection(map, map.len()) {
        return Err(Error::NotABijection(format!(
            "map on {} points is not injective",
            map.len()
        )));
    }
    let mut out = vec![0 as Point; map.len()];
    for (x, &y) in map.iter().enumerate() {
        out[y as usize] = x as Point;
    }
    Ok(out)
}

pub fn identity_map(points: usize) -> PointMap {
    (0..points as Point).collect()
}

pub fn apply_to_config(map: &[Point], c: &Config) -> Config {
    c.map(|&x| map[x as usize])
}

/// Which characterization of a translation to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslationTest {
    /// Modify every cube on every codimension-`k` face, at every dimension up
    /// to the space's cap.
    Definition,
    /// The one-dimension corner test; needs the space to carry a claimed
    /// degree with `degree + 1` within the dimension cap.
    Corner,
    /// Corner when available, definition otherwise.
    Auto,
}

fn corner_test_degree(space: &CubeSpace, k: usize) -> Option<usize> {
    let s = space.claimed_degree()?;
    if s + 1 <= space.max_dim() && k <= s + 1 {
        Some(s)
    } else {
        None
    }
}

/// Test whether `map` is a `k`-translation.
pub fn is_k_translation(
    space: &Arc<CubeSpace>,
    map: &[Point],
    k: usize,
    test: TranslationTest,
) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidCodimension {
            dim: space.max_dim(),
            codim: 0,
        });
    }
    if !is_bijection(map, space.point_count()) {
        return Ok(false);
    }
    let use_corner = match test {
        TranslationTest::Definition => false,
        TranslationTest::Corner => {
            if corner_test_degree(space, k).is_none() {
                return Err(Error::StructureExtraction(format!(
                    "corner test needs a claimed degree with room for dimension {} (space {})",
                    k, space.name()
                )));
            }
            true
        }
        TranslationTest::Auto => corner_test_degree(space, k).is_some(),
    };
    if use_corner {
        let s = corner_test_degree(space, k).unwrap();
        let d = s + 1 - k;
        for c in &space.cubes(d)?.cubes {
            let corner = Configuration::corner_config(c, &apply_to_config(map, c), k)?;
            if !space.is_cube(&corner)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    for n in k..=space.max_dim() {
        let face_list = faces(n, k)?;
        for c in &space.cubes(n)?.cubes {
            for f in &face_list {
                let mut moved = c.clone();
                for v in f.vertices() {
                    moved.set(v, map[*c.get(v) as usize]);
                }
                if !space.is_cube(&moved)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Enumerate all `k`-translations of the space, sorted by value table.
///
/// With a claimed degree the search assigns images point by point and rejects
/// a partial map as soon as some fully-assigned cube fails the corner test;
/// without one it falls back to filtering all bijections, which is only
/// feasible on very small carriers.
pub fn enumerate_level(space: &Arc<CubeSpace>, k: usize, cap: usize) -> Result<Vec<PointMap>> {
    if k == 0 {
        return Err(Error::InvalidCodimension {
            dim: space.max_dim(),
            codim: 0,
        });
    }
    let m = space.point_count();
    let mut out = Vec::new();
    if let Some(s) = corner_test_degree(space, k) {
        let d = s + 1 - k;
        let list = space.cubes(d)?;
        // Cubes indexed by their largest point: checkable as soon as the
        // image of that point is chosen.
        let mut by_max: Vec<Vec<&Config>> = vec![Vec::new(); m];
        for c in &list.cubes {
            let mx = *c.vals().iter().max().unwrap() as usize;
            by_max[mx].push(c);
        }
        let mut map: Vec<Point> = Vec::with_capacity(m);
        let mut used = vec![false; m];
        enumerate_dfs(space, k, &by_max, &mut map, &mut used, cap, &mut out)?;
    } else {
        // All bijections; m! of them.
        let mut fact = 1u128;
        for i in 1..=m as u128 {
            fact = fact.saturating_mul(i);
        }
        const BLIND_CAP: u128 = 500_000;
        if fact > BLIND_CAP {
            return Err(Error::CapExceeded {
                what: format!("bijection search on {m} points without a claimed degree"),
                needed: fact,
                cap: BLIND_CAP,
            });
        }
        let mut map: Vec<Point> = (0..m as Point).collect();
        permutations(&mut map, 0, &mut |perm| -> Result<()> {
            if is_k_translation(space, perm, k, TranslationTest::Definition)? {
                if out.len() >= cap {
                    return Err(Error::CapExceeded {
                        what: format!("{k}-translations of {}", space.name()),
                        needed: out.len() as u128 + 1,
                        cap: cap as u128,
                    });
                }
                out.push(perm.to_vec());
            }
            Ok(())
        })?;
    }
    out.sort();
    Ok(out)
}

fn enumerate_dfs(
    space: &Arc<CubeSpace>,
    k: usize,
    by_max: &[Vec<&Config>],
    map: &mut Vec<Point>,
    used: &mut Vec<bool>,
    cap: usize,
    out: &mut Vec<PointMap>,
) -> Result<()> {
    let m = used.len();
    if map.len() == m {
        if out.len() >= cap {
            return Err(Error::CapExceeded {
                what: format!("{k}-translations of {}", space.name()),
                needed: out.len() as u128 + 1,
                cap: cap as u128,
            });
        }
        out.push(map.clone());
        return Ok(());
    }
    let p = map.len();
    'next: for q in 0..m as Point {
        if used[q as usize] {
            continue;
        }
        map.push(q);
        used[q as usize] = true;
        for c in &by_max[p] {
            let moved = c.map(|&x| map[x as usize]);
            let corner = Configuration::corner_config(c, &moved, k)?;
            if !space.is_cube(&corner)? {
                map.pop();
                used[q as usize] = false;
                continue 'next;
            }
        }
        enumerate_dfs(space, k, by_max, map, used, cap, out)?;
        map.pop();
        used[q as usize] = false;
    }
    Ok(())
}

/// Heap's algorithm, calling `visit` on every permutation of `vals`.
fn permutations(
    vals: &mut [Point],
    i: usize,
    visit: &mut impl FnMut(&[Point]) -> Result<()>,
) -> Result<()> {
    if i == vals.len() {
        return visit(vals);
    }
    for j in i..vals.len() {
        vals.swap(i, j);
        permutations(vals, i + 1, visit)?;
        vals.swap(i, j);
    }
    Ok(())
}

/// The translation groups `Aut_1 >= Aut_2 >= ...` up to level `max_k`.
#[derive(Debug, Clone)]
pub struct TranslationFiltration {
    /// `levels[i]` holds the `(i+1)`-translations, sorted.
    pub levels: Vec<Vec<PointMap>>,
}

impl TranslationFiltration {
    pub fn level(&self, k: usize) -> &[PointMap] {
        static EMPTY: Vec<PointMap> = Vec::new();
        if k == 0 || k > self.levels.len() {
            &EMPTY
        } else {
            &self.levels[k - 1]
        }
    }

    pub fn level_contains(&self, k: usize, map: &[Point]) -> bool {
        if k > self.levels.len() {
            // Beyond the computed chain only the identity qualifies.
            return map.iter().enumerate().all(|(x, &y)| x == y as usize);
        }
        self.levels[k - 1].binary_search_by(|m| m.as_slice().cmp(map)).is_ok()
    }

    /// Verify nesting and the commutator law `[Aut_i, Aut_j] <= Aut_{i+j}`;
    /// on failure return `(i, j)` and the offending commutator map.
    pub fn check(&self) -> std::result::Result<(), (usize, usize, PointMap)> {
        let top = self.levels.len();
        for k in 1..top {
            for m in self.level(k + 1) {
                if !self.level_contains(k, m) {
                    return Err((k + 1, k, m.clone()));
                }
            }
        }
        for i in 1..=top {
            for j in 1..=top {
                for a in self.level(i) {
                    for b in self.level(j) {
                        let ainv = invert(a).expect("levels hold bijections");
                        let binv = invert(b).expect("levels hold bijections");
                        let comm = compose(&compose(a, b), &compose(&ainv, &binv));
                        if !self.level_contains(i + j, &comm) {
                            return Err((i, j, comm));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Enumerate the translation filtration up to level `max_k`.
pub fn translation_filtration(
    space: &Arc<CubeSpace>,
    max_k: usize,
    cap: usize,
) -> Result<TranslationFiltration> {
    let levels = (1..=max_k)
        .map(|k| enumerate_level(space, k, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(TranslationFiltration { levels })
}

/// The map induced on the target of a factor: `phi` descends when the class
/// of `phi(x)` depends only on the class of `x`.
pub fn pushforward(factor: &crate::space::FactorMap, map: &[Point]) -> Result<PointMap> {
    let mut out = vec![Point::MAX; factor.target.point_count()];
    for x in factor.source.points() {
        let y = factor.apply(x);
        let image = factor.apply(map[x as usize]);
        if out[y as usize] == Point::MAX {
            out[y as usize] = image;
        } else if out[y as usize] != image {
            return Err(Error::NotABundleMap(format!(
                "map does not descend: fiber of class {y} is split between classes {} and {image}",
                out[y as usize]
            )));
        }
    }
    Ok(out)
}

/// Distinct maps obtained by restricting `maps` to the image of the factor:
/// the translation group a factor inherits.
pub fn descend_translations(
    factor: &crate::space::FactorMap,
    maps: &[PointMap],
) -> Result<Vec<PointMap>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for m in maps {
        let down = pushforward(factor, m)?;
        if seen.insert(down.clone()) {
            out.push(down);
        }
    }
    out.sort();
    Ok(out)
}

/// Result of a lifting attempt: either a lift together with the repairing
/// structure-group correction, or a certificate that no lift exists.
#[derive(Debug, Clone)]
pub enum LiftOutcome {
    Lifted {
        map: PointMap,
        /// The correction `f : X -> A` (by point id) applied to the naive
        /// section-transport lift.
        correction: Vec<crate::groups::Elem>,
    },
    Obstructed {
        certificate: crate::error::ObstructionCertificate,
    },
}

/// Lift a `k`-translation of the canonical factor through the structure
/// group.
///
/// The naive lift `psi` transports each fiber by a section of the factor;
/// its defect cocycle measures the failure of `psi` to be a translation.
/// Every candidate lift differs from `psi` by a point function `f` into the
/// structure group, and is a translation exactly when `f` solves a linear
/// coboundary system with the defect on the right-hand side.  The system is
/// solved exactly, so the returned certificate (when there is one) proves
/// that *no* map over `phi_bar` is a `k`-translation.
pub fn lift_translation(
    structure: &crate::space::StructureGroupAction,
    phi_bar: &[Point],
    k: usize,
) -> Result<LiftOutcome> {
    let space = &structure.space;
    let factor = &structure.factor;
    let target = &factor.target;
    if !is_bijection(phi_bar, target.point_count()) {
        return Err(Error::NotABijection("factor translation".into()));
    }
    if !is_k_translation(target, phi_bar, k, TranslationTest::Auto)? {
        return Err(Error::StructureExtraction(format!(
            "the given factor map is not a {k}-translation of {}",
            target.name()
        )));
    }
    let s = structure.level;
    if k == 0 || k > s + 1 {
        return Err(Error::InvalidCodimension { dim: s + 1, codim: k });
    }
    let l = s + 1 - k;
    // Naive lift by section transport.
    let psi: PointMap = space
        .points()
        .map(|x| {
            let y = factor.apply(x);
            let a = structure.elem_sending(factor.section(y), x)?;
            Ok(structure.act(a, factor.section(phi_bar[y as usize])))
        })
        .collect::<Result<_>>()?;
    let defect = crate::cocycle::translation_defect(structure, &psi, k)?;
    // Repairing with f changes the defect by (-1)^k d^l f, so solve
    // d^l f = (-1)^(k+1) defect componentwise over the structure group.
    let moduli = &structure.decomposition.moduli;
    let group = &structure.group;
    let rhs: Vec<Vec<u64>> = defect
        .iter()
        .map(|&e| {
            let signed = if k % 2 == 1 { e } else { group.inv(e) };
            structure.decomposition.coords_of(signed).to_vec()
        })
        .collect();
    let f = match crate::cocycle::solve_coboundary_linear(space, l, moduli, &rhs, 1 << 20) {
        Ok(f) => f,
        Err(Error::Obstruction(certificate)) => {
            return Ok(LiftOutcome::Obstructed { certificate })
        }
        Err(e) => return Err(e),
    };
    let correction: Vec<crate::groups::Elem> = f
        .iter()
        .map(|coords| structure.decomposition.elem_of(coords))
        .collect();
    let map: PointMap = space
        .points()
        .map(|x| structure.act(correction[x as usize], psi[x as usize]))
        .collect();
    // The repaired map must be a translation over phi_bar; anything else
    // means the solver and the defect calculus disagree.
    if !is_k_translation(space, &map, k, TranslationTest::Auto)? {
        return Err(Error::StructureExtraction(
            "repaired lift fails the translation test".into(),
        ));
    }
    if pushforward(factor, &map)? != phi_bar {
        return Err(Error::StructureExtraction(
            "repaired lift does not push forward to the input".into(),
        ));
    }
    Ok(LiftOutcome::Lifted { map, correction })
}

//! Python bindings: the `nilspace_py` extension module exposes cubespaces,
//! the axiom checks, translation enumeration and lifting, and both
//! coboundary solvers.  Exact values cross the boundary as strings in the
//! same `p/q[,p/q...][;k,...]` format the command-line tables use.

use nilspace_core::cocycle::{
    coboundary, solve_coboundary_averaging, solve_coboundary_linear, Cocycle,
};
use nilspace_core::cube::Configuration;
use nilspace_core::error::Error;
use nilspace_core::groups::{make_heisenberg, Elem, Filtration};
use nilspace_core::host_kra::{dk_space, nilmanifold_space};
use nilspace_core::space::{structure_group, CheckBudget, CubeSpace, Point};
use nilspace_core::translations::{
    enumerate_level, is_k_translation, lift_translation, pushforward, translation_filtration,
    LiftOutcome, TranslationTest,
};
use nilspace_core::values::{ValueGroup, ValuePoint};
use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::collections::HashSet;
use std::sync::Arc;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_window(s: &str) -> PyResult<BigRational> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| PyValueError::new_err(format!("invalid window `{s}` (expected p/q)")))?;
    let p: i64 = p
        .parse()
        .map_err(|_| PyValueError::new_err(format!("invalid window numerator `{p}`")))?;
    let q: i64 = q
        .parse()
        .map_err(|_| PyValueError::new_err(format!("invalid window denominator `{q}`")))?;
    if q <= 0 {
        return Err(PyValueError::new_err("window denominator must be positive"));
    }
    Ok(BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn config_from(vals: Vec<Point>) -> PyResult<Configuration<Point>> {
    if !vals.len().is_power_of_two() {
        return Err(PyValueError::new_err(format!(
            "configuration needs a power-of-two vertex count, got {}",
            vals.len()
        )));
    }
    let dim = vals.len().trailing_zeros() as usize;
    Ok(Configuration::new(dim, vals))
}

/// A finite cubespace.
#[pyclass]
struct Space {
    inner: Arc<CubeSpace>,
}

#[pymethods]
impl Space {
    /// The degree-`s` abelian space on the product of `Z/m` factors.
    #[staticmethod]
    #[pyo3(signature = (moduli, degree, max_dim = 4))]
    fn dk(moduli: Vec<u32>, degree: usize, max_dim: usize) -> PyResult<Space> {
        Ok(Space {
            inner: dk_space(&moduli, degree, max_dim).map_err(err)?,
        })
    }

    /// The Heisenberg group over `Z/modulus` modulo the subgroup generated
    /// by `lattice` (element ids; empty for the full group as its own
    /// carrier).
    #[staticmethod]
    #[pyo3(signature = (modulus, lattice = vec![], max_dim = 3))]
    fn heisenberg(modulus: u32, lattice: Vec<Elem>, max_dim: usize) -> PyResult<Space> {
        let filt = make_heisenberg(modulus).map_err(err)?;
        let name = format!("heisenberg-{modulus}-nilmanifold");
        let nil = nilmanifold_space(filt, &lattice, max_dim, name).map_err(err)?;
        Ok(Space { inner: nil.space })
    }

    /// The coset space of the product of `Z/m` factors, carrying the
    /// degree-`degree` filtration, by the subgroup generated by `lattice`.
    #[staticmethod]
    #[pyo3(signature = (moduli, degree, lattice = vec![], max_dim = 3))]
    fn abelian_nilmanifold(
        moduli: Vec<u32>,
        degree: usize,
        lattice: Vec<Elem>,
        max_dim: usize,
    ) -> PyResult<Space> {
        let filt = Filtration::abelian_of_degree(&moduli, degree).map_err(err)?;
        let nil = nilmanifold_space(filt, &lattice, max_dim, "abelian-nilmanifold")
            .map_err(err)?;
        Ok(Space { inner: nil.space })
    }

    /// A table space from explicit cube lists (one list of vertex tuples per
    /// dimension, starting at dimension 1).
    #[staticmethod]
    #[pyo3(signature = (points, cubes, degree = None))]
    fn from_cubes(
        points: usize,
        cubes: Vec<Vec<Vec<Point>>>,
        degree: Option<usize>,
    ) -> PyResult<Space> {
        let mut sets = vec![HashSet::new()];
        for (d, list) in cubes.iter().enumerate() {
            let mut set = HashSet::new();
            for vals in list {
                let c = config_from(vals.clone())?;
                if c.dim() != d + 1 {
                    return Err(PyValueError::new_err(format!(
                        "cube {vals:?} has dimension {} but sits in the dimension-{} list",
                        c.dim(),
                        d + 1
                    )));
                }
                set.insert(c);
            }
            sets.push(set);
        }
        Ok(Space {
            inner: CubeSpace::from_sets("table", points, sets, degree).map_err(err)?,
        })
    }

    fn name(&self) -> &str {
        self.inner.name()
    }

    fn point_count(&self) -> usize {
        self.inner.point_count()
    }

    fn max_dim(&self) -> usize {
        self.inner.max_dim()
    }

    fn degree(&self) -> Option<usize> {
        self.inner.claimed_degree()
    }

    /// Cube membership of a configuration given as its vertex list.
    fn is_cube(&self, vals: Vec<Point>) -> PyResult<bool> {
        self.inner.is_cube(&config_from(vals)?).map_err(err)
    }

    /// All cubes of dimension `n`, as vertex lists.
    fn cubes(&self, n: usize) -> PyResult<Vec<Vec<Point>>> {
        Ok(self
            .inner
            .cubes(n)
            .map_err(err)?
            .cubes
            .iter()
            .map(|c| c.vals().to_vec())
            .collect())
    }

    /// Run the nilspace axiom checks; returns `(name, passed, witness)`
    /// triples.
    #[pyo3(signature = (degree = None, seed = 0))]
    fn check(
        &self,
        degree: Option<usize>,
        seed: u64,
    ) -> PyResult<Vec<(String, bool, Option<String>)>> {
        let degree = degree
            .or(self.inner.claimed_degree())
            .unwrap_or_else(|| self.inner.max_dim().saturating_sub(1).max(1));
        let budget = CheckBudget {
            seed,
            ..CheckBudget::default()
        };
        Ok(self
            .inner
            .check_nilspace(degree, &budget)
            .map_err(err)?
            .into_iter()
            .map(|r| (r.name, r.passed, r.witness))
            .collect())
    }

    /// All `k`-translations, as point maps.
    #[pyo3(signature = (k, cap = 4096))]
    fn translations(&self, k: usize, cap: usize) -> PyResult<Vec<Vec<Point>>> {
        enumerate_level(&self.inner, k, cap).map_err(err)
    }

    /// Whether the commutator law holds for the translation groups up to
    /// `max_k`.
    #[pyo3(signature = (max_k, cap = 4096))]
    fn translation_filtration_holds(&self, max_k: usize, cap: usize) -> PyResult<bool> {
        let tf = translation_filtration(&self.inner, max_k, cap).map_err(err)?;
        Ok(tf.check().is_ok())
    }

    fn is_translation(&self, map: Vec<Point>, k: usize) -> PyResult<bool> {
        is_k_translation(&self.inner, &map, k, TranslationTest::Auto).map_err(err)
    }

    /// The level-`s` structure group: `(order, maps)`.
    fn structure_group(&self, s: usize) -> PyResult<(usize, Vec<Vec<Point>>)> {
        let structure = structure_group(&self.inner, s).map_err(err)?;
        Ok((structure.group.order(), structure.maps))
    }

    /// Project a point map to the canonical factor below level `s`.
    fn factor_map(&self, s: usize) -> PyResult<Vec<Point>> {
        let structure = structure_group(&self.inner, s).map_err(err)?;
        Ok(structure.factor.class_of.clone())
    }

    /// Lift a `k`-translation of the canonical factor below level `s`.
    /// Returns `(lifted, map, detail)`: on success `map` is the lift and
    /// `detail` confirms the pushforward; on obstruction `map` is `None`
    /// and `detail` carries the certificate.
    fn lift_translation(
        &self,
        phi_bar: Vec<Point>,
        k: usize,
        s: usize,
    ) -> PyResult<(bool, Option<Vec<Point>>, String)> {
        let structure = structure_group(&self.inner, s).map_err(err)?;
        match lift_translation(&structure, &phi_bar, k).map_err(err)? {
            LiftOutcome::Lifted { map, .. } => {
                let down = pushforward(&structure.factor, &map).map_err(err)?;
                let detail = format!("pushforward-matches: {}", down == phi_bar);
                Ok((true, Some(map), detail))
            }
            LiftOutcome::Obstructed { certificate } => {
                Ok((false, None, certificate.to_string()))
            }
        }
    }

    /// `d^order f` as value strings, one per cube of dimension `order`.
    #[pyo3(signature = (order, f, torus_rank = 1))]
    fn coboundary(&self, order: usize, f: Vec<String>, torus_rank: usize) -> PyResult<Vec<String>> {
        let group = ValueGroup::torus_only(torus_rank);
        let f: Vec<ValuePoint> = f
            .iter()
            .map(|s| ValuePoint::parse(s, &group).map_err(err))
            .collect::<PyResult<_>>()?;
        let rho = coboundary(&self.inner, order, &group, &f).map_err(err)?;
        Ok(rho.values.iter().map(|v| v.render()).collect())
    }

    /// Solve `d^order f = rho` by structure-guided averaging; `rho` is one
    /// value string per cube.  Returns the solution as value strings.
    #[pyo3(signature = (order, rho, torus_rank = 1, window = "1/1"))]
    fn solve_averaging(
        &self,
        order: usize,
        rho: Vec<String>,
        torus_rank: usize,
        window: &str,
    ) -> PyResult<Vec<String>> {
        let group = ValueGroup::torus_only(torus_rank);
        let values: Vec<ValuePoint> = rho
            .iter()
            .map(|s| ValuePoint::parse(s, &group).map_err(err))
            .collect::<PyResult<_>>()?;
        let rho = Cocycle::new(self.inner.clone(), order, group, values).map_err(err)?;
        let sol = solve_coboundary_averaging(&rho, &parse_window(window)?).map_err(err)?;
        Ok(sol.f.iter().map(|v| v.render()).collect())
    }

    /// Solve the coboundary equation over finite cyclic components.
    /// Returns `(solved, f, obstruction)` with `f` one coordinate vector per
    /// point on success, and the certificate text on obstruction.
    fn solve_linear(
        &self,
        order: usize,
        moduli: Vec<u64>,
        rhs: Vec<Vec<u64>>,
    ) -> PyResult<(bool, Option<Vec<Vec<u64>>>, Option<String>)> {
        match solve_coboundary_linear(&self.inner, order, &moduli, &rhs, 1 << 20) {
            Ok(f) => Ok((true, Some(f), None)),
            Err(Error::Obstruction(cert)) => Ok((false, None, Some(cert.to_string()))),
            Err(e) => Err(err(e)),
        }
    }
}

#[pymodule]
fn nilspace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Space>()?;
    Ok(())
}

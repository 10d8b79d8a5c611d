//! Exact solver for integer linear systems over `Z/m`.
//!
//! Systems `M f = r (mod m)` are reduced to a Howell-style strong echelon
//! form by unimodular row combinations, with every working row carrying its
//! provenance as a combination of input equations.  This yields
//!
//! * a particular solution when one exists,
//! * an obstruction certificate otherwise: an explicit integer combination of
//!   input equations whose left-hand side vanishes mod `m` while the
//!   right-hand side does not, and
//! * enumeration of the full solution set when it is small, which the callers
//!   use to return lexicographically minimal solutions.
//!
//! All entries are kept reduced mod `m`, so coefficients never grow.

use crate::error::ObstructionCertificate;
use std::collections::HashMap;

/// One equation `sum coeffs[j] * f_j = rhs (mod m)`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub coeffs: Vec<i64>,
    pub rhs: i64,
}

#[derive(Debug, Clone)]
struct WorkRow {
    coeffs: Vec<i64>,
    rhs: i64,
    /// Combination of input equations this row represents, mod m.
    prov: HashMap<usize, i64>,
}

/// Echelonized system plus bookkeeping to answer solve/kernel queries.
#[derive(Debug)]
pub struct Reduced {
    m: i64,
    ncols: usize,
    /// Pivot row for each column, if any; the pivot entry divides `m`.
    pivots: Vec<Option<WorkRow>>,
    /// First contradiction encountered, if any.
    obstruction: Option<ObstructionCertificate>,
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Multiplicative inverse of `a` mod `m` for `gcd(a, m) = 1`.
fn inv_mod(a: i64, m: i64) -> i64 {
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    debug_assert_eq!(g, 1);
    x.rem_euclid(m)
}

/// A unit `u` mod `m` with `u * a = gcd(a, m) (mod m)`.
fn normalizing_unit(a: i64, m: i64) -> i64 {
    let g = egcd(a.rem_euclid(m), m).0;
    // a/g is invertible mod m/g; one lift of that inverse to Z/m is a unit.
    let base = inv_mod((a / g).rem_euclid(m / g), m / g);
    (0..g)
        .map(|k| base + k * (m / g))
        .find(|&u| egcd(u, m).0 == 1)
        .expect("some lift of the inverse is a unit")
}

impl WorkRow {
    fn scaled(&self, k: i64, m: i64) -> WorkRow {
        WorkRow {
            coeffs: self.coeffs.iter().map(|c| (c * k).rem_euclid(m)).collect(),
            rhs: (self.rhs * k).rem_euclid(m),
            prov: self
                .prov
                .iter()
                .map(|(&i, &c)| (i, (c * k).rem_euclid(m)))
                .collect(),
        }
    }

    fn combine(a: &WorkRow, ka: i64, b: &WorkRow, kb: i64, m: i64) -> WorkRow {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x * ka + y * kb).rem_euclid(m))
            .collect();
        let rhs = (a.rhs * ka + b.rhs * kb).rem_euclid(m);
        let mut prov = HashMap::new();
        for (&i, &c) in &a.prov {
            *prov.entry(i).or_insert(0) += c * ka;
        }
        for (&i, &c) in &b.prov {
            *prov.entry(i).or_insert(0) += c * kb;
        }
        prov.retain(|_, c| {
            *c = c.rem_euclid(m);
            *c != 0
        });
        WorkRow { coeffs, rhs, prov }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// Reduce a system of equations mod `m >= 2` over `ncols` unknowns.
pub fn reduce(equations: &[Equation], ncols: usize, m: i64) -> Reduced {
    assert!(m >= 2);
    let mut red = Reduced {
        m,
        ncols,
        pivots: vec![None; ncols],
        obstruction: None,
    };
    for (idx, eq) in equations.iter().enumerate() {
        debug_assert_eq!(eq.coeffs.len(), ncols);
        let row = WorkRow {
            coeffs: eq.coeffs.iter().map(|c| c.rem_euclid(m)).collect(),
            rhs: eq.rhs.rem_euclid(m),
            prov: HashMap::from([(idx, 1)]),
        };
        red.insert(row);
        if red.obstruction.is_some() {
            break;
        }
    }
    red
}

impl Reduced {
    fn insert(&mut self, mut row: WorkRow) {
        let m = self.m;
        for col in 0..self.ncols {
            let a = row.coeffs[col];
            if a == 0 {
                continue;
            }
            match self.pivots[col].take() {
                None => {
                    // Normalize the lead to a divisor of m and record the
                    // Howell companion row killing the lead.
                    let u = normalizing_unit(a, m);
                    let norm = row.scaled(u, m);
                    let g = norm.coeffs[col];
                    debug_assert_eq!(m % g, 0);
                    self.pivots[col] = Some(norm.clone());
                    if g > 1 {
                        let companion = norm.scaled(m / g, m);
                        if !companion.is_zero() || companion.rhs != 0 {
                            self.insert(companion);
                        }
                    }
                    return;
                }
                Some(pivot) => {
                    let p = pivot.coeffs[col];
                    let (g, x, y) = egcd(p, a);
                    if a % p == 0 {
                        // Plain elimination keeps the pivot untouched.
                        row = WorkRow::combine(&row, 1, &pivot, -(a / p), m);
                        self.pivots[col] = Some(pivot);
                    } else {
                        let new_pivot = WorkRow::combine(&pivot, x, &row, y, m);
                        let new_row = WorkRow::combine(&pivot, -(a / g), &row, p / g, m);
                        self.pivots[col] = None;
                        self.insert(new_pivot);
                        row = new_row;
                    }
                }
            }
        }
        if row.rhs.rem_euclid(m) != 0 {
            // A combination of equations with vanishing left-hand side and a
            // non-vanishing right-hand side: the system is inconsistent.
            let mut combination: Vec<(usize, i64)> = row.prov.into_iter().collect();
            combination.sort_unstable();
            self.obstruction.get_or_insert(ObstructionCertificate {
                combination,
                combined_rhs: row.rhs.rem_euclid(m),
                modulus: m,
                gcd: m,
                component: 0,
            });
        }
    }

    pub fn obstruction(&self) -> Option<&ObstructionCertificate> {
        self.obstruction.as_ref()
    }

    /// A particular solution with free unknowns set to 0, or `None` when the
    /// system is inconsistent (in which case [`Reduced::obstruction`] is set).
    pub fn particular(&self) -> Option<Vec<i64>> {
        if self.obstruction.is_some() {
            return None;
        }
        let m = self.m;
        let mut f = vec![0i64; self.ncols];
        for col in (0..self.ncols).rev() {
            if let Some(row) = &self.pivots[col] {
                let g = row.coeffs[col];
                let tail: i64 = (col + 1..self.ncols)
                    .map(|j| row.coeffs[j] * f[j])
                    .sum();
                let t = (row.rhs - tail).rem_euclid(m);
                // The Howell companion rows guarantee g | t for consistent
                // systems.
                debug_assert_eq!(t % g, 0);
                f[col] = (t / g).rem_euclid(m / g);
            }
        }
        Some(f)
    }

    /// Number of solutions mod `m` (None when inconsistent).
    pub fn solution_count(&self) -> Option<u128> {
        if self.obstruction.is_some() {
            return None;
        }
        let mut count: u128 = 1;
        for col in 0..self.ncols {
            count *= match &self.pivots[col] {
                Some(row) => row.coeffs[col] as u128,
                None => self.m as u128,
            };
        }
        Some(count)
    }

    /// All solutions, provided there are at most `cap` of them; sorted, so
    /// the first entry is the lexicographically minimal solution.
    pub fn enumerate(&self, cap: u128) -> Option<Vec<Vec<i64>>> {
        let total = self.solution_count()?;
        if total > cap {
            return None;
        }
        // Depth-first over columns from the last to the first, mirroring the
        // back-substitution order of `particular`.
        let mut out = Vec::new();
        let mut f = vec![0i64; self.ncols];
        self.enumerate_from(self.ncols, &mut f, &mut out);
        out.sort();
        Some(out)
    }

    fn enumerate_from(&self, col: usize, f: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if col == 0 {
            out.push(f.clone());
            return;
        }
        let col = col - 1;
        let m = self.m;
        match &self.pivots[col] {
            None => {
                for v in 0..m {
                    f[col] = v;
                    self.enumerate_from(col, f, out);
                }
            }
            Some(row) => {
                let g = row.coeffs[col];
                let tail: i64 = (col + 1..self.ncols)
                    .map(|j| row.coeffs[j] * f[j])
                    .sum();
                let t = (row.rhs - tail).rem_euclid(m);
                debug_assert_eq!(t % g, 0);
                let md = m / g;
                let base = (t / g).rem_euclid(md);
                for k in 0..g {
                    f[col] = base + k * md;
                    self.enumerate_from(col, f, out);
                }
            }
        }
    }
}

/// Solve `M f = r (mod m)`, preferring the lexicographically minimal solution
/// when the solution set has at most `lex_cap` elements.
pub fn solve_mod(
    equations: &[Equation],
    ncols: usize,
    m: i64,
    component: usize,
    lex_cap: u128,
) -> Result<Vec<i64>, ObstructionCertificate> {
    let red = reduce(equations, ncols, m);
    if let Some(cert) = red.obstruction() {
        let mut cert = cert.clone();
        cert.component = component;
        return Err(cert);
    }
    if let Some(all) = red.enumerate(lex_cap) {
        return Ok(all.into_iter().next().expect("consistent system"));
    }
    Ok(red.particular().expect("consistent system"))
}

/// Re-check an obstruction certificate against the original equations.
pub fn verify_certificate(
    equations: &[Equation],
    ncols: usize,
    cert: &ObstructionCertificate,
) -> bool {
    let m = cert.modulus;
    let mut coeffs = vec![0i64; ncols];
    let mut rhs = 0i64;
    for &(idx, k) in &cert.combination {
        let Some(eq) = equations.get(idx) else {
            return false;
        };
        for (c, &e) in coeffs.iter_mut().zip(&eq.coeffs) {
            *c = (*c + k * e).rem_euclid(m);
        }
        rhs = (rhs + k * eq.rhs).rem_euclid(m);
    }
    coeffs.iter().all(|&c| c == 0) && rhs.rem_euclid(m) == cert.combined_rhs && rhs != 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(coeffs: &[i64], rhs: i64) -> Equation {
        Equation {
            coeffs: coeffs.to_vec(),
            rhs,
        }
    }

    /// Brute-force reference solver.
    fn brute(equations: &[Equation], ncols: usize, m: i64) -> Vec<Vec<i64>> {
        let total = (m as u64).pow(ncols as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut f = Vec::with_capacity(ncols);
            let mut c = code;
            for _ in 0..ncols {
                f.push((c % m as u64) as i64);
                c /= m as u64;
            }
            if equations.iter().all(|e| {
                e.coeffs
                    .iter()
                    .zip(&f)
                    .map(|(a, b)| a * b)
                    .sum::<i64>()
                    .rem_euclid(m)
                    == e.rhs.rem_euclid(m)
            }) {
                out.push(f);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn matches_brute_force_on_small_systems() {
        let cases: Vec<(Vec<Equation>, usize, i64)> = vec![
            (vec![eq(&[1, -1], 1), eq(&[0, 1], 2)], 2, 3),
            (vec![eq(&[2, 0], 2), eq(&[0, 2], 0)], 2, 4),
            (vec![eq(&[2, 2], 2)], 2, 4),
            (vec![eq(&[3, 1, 2], 5), eq(&[1, 1, 1], 0)], 3, 6),
            (vec![eq(&[2, 4], 2)], 2, 6),
            (vec![], 2, 5),
            (vec![eq(&[1, 1], 0), eq(&[1, -1], 0)], 2, 2),
        ];
        for (eqs, ncols, m) in cases {
            let expect = brute(&eqs, ncols, m);
            let red = reduce(&eqs, ncols, m);
            let got = red.enumerate(10_000).expect("small solution set");
            assert_eq!(got, expect, "eqs={eqs:?} m={m}");
            if !expect.is_empty() {
                let lex = solve_mod(&eqs, ncols, m, 0, 10_000).unwrap();
                assert_eq!(lex, expect[0]);
                // The particular solution also solves the system.
                assert!(expect.contains(&red.particular().unwrap()));
            }
        }
    }

    #[test]
    fn detects_inconsistency_with_verified_certificate() {
        let cases: Vec<(Vec<Equation>, usize, i64)> = vec![
            // 2f = 1 (mod 4) has no solution.
            (vec![eq(&[2], 1)], 1, 4),
            // f0 - f1 = 1, f1 - f2 = 1, f2 - f0 = 1 (mod 2): summing gives 0 = 1.
            (
                vec![eq(&[1, -1, 0], 1), eq(&[0, 1, -1], 1), eq(&[-1, 0, 1], 1)],
                3,
                2,
            ),
            // 3f = 1 (mod 6) with an interfering second equation.
            (vec![eq(&[3, 0], 1), eq(&[1, 1], 0)], 2, 6),
        ];
        for (eqs, ncols, m) in cases {
            assert!(brute(&eqs, ncols, m).is_empty());
            let err = solve_mod(&eqs, ncols, m, 7, 1000).unwrap_err();
            assert_eq!(err.component, 7);
            assert!(verify_certificate(&eqs, ncols, &err), "cert {err}");
        }
    }

    #[test]
    fn randomized_agreement_with_brute_force() {
        // Deterministic xorshift; enough structure to hit composite moduli,
        // redundant rows, and inconsistent systems.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..300 {
            let m = [2i64, 3, 4, 6, 8][(next() % 5) as usize];
            let ncols = 1 + (next() % 3) as usize;
            let nrows = (next() % 5) as usize;
            let eqs: Vec<Equation> = (0..nrows)
                .map(|_| Equation {
                    coeffs: (0..ncols).map(|_| (next() % 7) as i64 - 3).collect(),
                    rhs: (next() % (m as u64)) as i64,
                })
                .collect();
            let expect = brute(&eqs, ncols, m);
            let red = reduce(&eqs, ncols, m);
            if expect.is_empty() {
                let cert = red.obstruction().expect("obstruction");
                assert!(verify_certificate(&eqs, ncols, cert));
            } else {
                let got = red
                    .enumerate(100_000)
                    .unwrap_or_else(|| panic!("trial {trial}: solution set too large"));
                assert_eq!(got, expect, "trial {trial}: eqs={eqs:?} m={m}");
                assert_eq!(red.solution_count(), Some(expect.len() as u128));
            }
        }
    }
}

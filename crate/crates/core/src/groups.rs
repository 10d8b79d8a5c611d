//! Finite groups, filtrations, and finite abelian structure.
//!
//! Groups are carried by ids `0..order` with the operation given either by an
//! explicit table (verified on construction) or by a structured rule: a
//! product of cyclic groups, or the Heisenberg group of upper unitriangular
//! 3x3 matrices over `Z/n`.  A filtration is a nested chain of subgroups
//! ending in the trivial group; the commutator condition `[G_i, G_j] <=
//! G_{i+j}` is checked by a separate, witness-producing operation.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Group element id.
pub type Elem = u16;

/// Maximum order accepted for table-backed groups.
pub const MAX_TABLE_ORDER: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
enum GroupKind {
    Table {
        op: Vec<Elem>,
        inv: Vec<Elem>,
        id: Elem,
    },
    /// Direct product of `Z/m_i`, elements in mixed-radix encoding with the
    /// first modulus varying fastest.
    AbelianProduct { moduli: Vec<u32> },
    /// Triples `(x, y, z)` over `Z/n` with
    /// `(x,y,z)*(x',y',z') = (x+x', y+y', z+z'+x*y')`,
    /// encoded as `x + n*y + n^2*z`.
    Heisenberg { n: u32 },
}

/// A finite group on ids `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    kind: GroupKind,
}

impl FiniteGroup {
    /// Build a table-backed group, verifying the group laws.
    pub fn from_table(op: Vec<Vec<Elem>>) -> Result<FiniteGroup> {
        let order = op.len();
        if order == 0 || order > MAX_TABLE_ORDER {
            return Err(Error::NotAGroup(format!(
                "table order {order} outside 1..={MAX_TABLE_ORDER}"
            )));
        }
        let mut flat = Vec::with_capacity(order * order);
        for row in &op {
            if row.len() != order {
                return Err(Error::NotAGroup("ragged operation table".into()));
            }
            for &x in row {
                if x as usize >= order {
                    return Err(Error::NotAGroup(format!("entry {x} out of range")));
                }
                flat.push(x);
            }
        }
        let at = |a: usize, b: usize| flat[a * order + b] as usize;
        // Identity.
        let id = (0..order)
            .find(|&e| (0..order).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or_else(|| Error::NotAGroup("no identity element".into()))?;
        // Inverses.
        let mut inv = vec![0 as Elem; order];
        for a in 0..order {
            let b = (0..order)
                .find(|&b| at(a, b) == id && at(b, a) == id)
                .ok_or_else(|| Error::NotAGroup(format!("element {a} has no inverse")))?;
            inv[a] = b as Elem;
        }
        // Associativity.
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(Error::NotAGroup(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            order,
            kind: GroupKind::Table {
                op: flat,
                inv,
                id: id as Elem,
            },
        })
    }

    /// Direct product of cyclic groups `Z/m_i`.
    pub fn abelian_product(moduli: &[u32]) -> Result<FiniteGroup> {
        if moduli.iter().any(|&m| m == 0) {
            return Err(Error::NotAGroup("zero modulus".into()));
        }
        let order: u64 = moduli.iter().map(|&m| m as u64).product();
        if order > Elem::MAX as u64 + 1 {
            return Err(Error::NotAGroup(format!("order {order} too large")));
        }
        Ok(FiniteGroup {
            order: order as usize,
            kind: GroupKind::AbelianProduct {
                moduli: moduli.to_vec(),
            },
        })
    }

    /// The Heisenberg group over `Z/n`, `n >= 2`.
    pub fn heisenberg(n: u32) -> Result<FiniteGroup> {
        if n < 2 {
            return Err(Error::NotAGroup(format!(
                "Heisenberg modulus {n} must be at least 2"
            )));
        }
        let order = (n as u64).pow(3);
        if order > Elem::MAX as u64 + 1 {
            return Err(Error::NotAGroup(format!("order {order} too large")));
        }
        Ok(FiniteGroup {
            order: order as usize,
            kind: GroupKind::Heisenberg { n },
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn id(&self) -> Elem {
        match &self.kind {
            GroupKind::Table { id, .. } => *id,
            _ => 0,
        }
    }

    pub fn op(&self, a: Elem, b: Elem) -> Elem {
        match &self.kind {
            GroupKind::Table { op, .. } => op[a as usize * self.order + b as usize],
            GroupKind::AbelianProduct { moduli } => {
                let mut out = 0u64;
                let mut place = 1u64;
                let (mut a, mut b) = (a as u64, b as u64);
                for &m in moduli {
                    let m = m as u64;
                    out += (a % m + b % m) % m * place;
                    a /= m;
                    b /= m;
                    place *= m;
                }
                out as Elem
            }
            GroupKind::Heisenberg { n } => {
                let n = *n as u64;
                let (a, b) = (a as u64, b as u64);
                let (x1, y1, z1) = (a % n, a / n % n, a / (n * n));
                let (x2, y2, z2) = (b % n, b / n % n, b / (n * n));
                let x = (x1 + x2) % n;
                let y = (y1 + y2) % n;
                let z = (z1 + z2 + x1 * y2) % n;
                (x + n * y + n * n * z) as Elem
            }
        }
    }

    pub fn inv(&self, a: Elem) -> Elem {
        match &self.kind {
            GroupKind::Table { inv, .. } => inv[a as usize],
            GroupKind::AbelianProduct { moduli } => {
                let mut out = 0u64;
                let mut place = 1u64;
                let mut a = a as u64;
                for &m in moduli {
                    let m = m as u64;
                    out += (m - a % m) % m * place;
                    a /= m;
                    place *= m;
                }
                out as Elem
            }
            GroupKind::Heisenberg { n } => {
                let n = *n as u64;
                let a = a as u64;
                let (x, y, z) = (a % n, a / n % n, a / (n * n));
                let xi = (n - x) % n;
                let yi = (n - y) % n;
                let zi = (x * y % n + n - z % n) % n;
                (xi + n * yi + n * n * zi) as Elem
            }
        }
    }

    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        let ab = self.op(a, b);
        let ba = self.op(b, a);
        self.op(ab, self.inv(ba))
    }

    pub fn is_abelian(&self) -> bool {
        match &self.kind {
            GroupKind::AbelianProduct { .. } => true,
            GroupKind::Heisenberg { n } => *n == 1,
            GroupKind::Table { .. } => {
                let n = self.order as Elem;
                (0..n).all(|a| (a..n).all(|b| self.op(a, b) == self.op(b, a)))
            }
        }
    }

    /// Order of a single element.
    pub fn element_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.id() {
            x = self.op(x, a);
            k += 1;
        }
        k
    }

    pub fn pow(&self, a: Elem, mut k: i64) -> Elem {
        let base = if k < 0 {
            k = -k;
            self.inv(a)
        } else {
            a
        };
        let mut out = self.id();
        for _ in 0..k {
            out = self.op(out, base);
        }
        out
    }

    /// Elements of the whole group, in id order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    /// Smallest subgroup containing `gens`, as a sorted element list.
    pub fn closure(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut seen = vec![false; self.order];
        let mut stack = vec![self.id()];
        seen[self.id() as usize] = true;
        while let Some(x) = stack.pop() {
            for &g in gens {
                for y in [self.op(x, g), self.op(x, self.inv(g))] {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
        }
        (0..self.order as Elem).filter(|&e| seen[e as usize]).collect()
    }

    /// Check that a sorted element list is a subgroup.
    pub fn is_subgroup(&self, elems: &[Elem]) -> bool {
        let member = |e: Elem| elems.binary_search(&e).is_ok();
        member(self.id())
            && elems
                .iter()
                .all(|&a| member(self.inv(a)) && elems.iter().all(|&b| member(self.op(a, b))))
    }

    /// The center, as a sorted element list.
    pub fn center(&self) -> Vec<Elem> {
        (0..self.order as Elem)
            .filter(|&a| (0..self.order as Elem).all(|b| self.op(a, b) == self.op(b, a)))
            .collect()
    }

    /// Human-readable element name.
    pub fn name(&self, a: Elem) -> String {
        match &self.kind {
            GroupKind::Table { .. } => format!("g{a}"),
            GroupKind::AbelianProduct { moduli } => {
                let mut parts = Vec::new();
                let mut a = a as u64;
                for &m in moduli {
                    parts.push((a % m as u64).to_string());
                    a /= m as u64;
                }
                format!("({})", parts.join(","))
            }
            GroupKind::Heisenberg { n } => {
                let n = *n as u64;
                let a = a as u64;
                format!("({},{},{})", a % n, a / n % n, a / (n * n))
            }
        }
    }

    /// Moduli of the cyclic components if this is an abelian product.
    pub fn product_moduli(&self) -> Option<&[u32]> {
        match &self.kind {
            GroupKind::AbelianProduct { moduli } => Some(moduli),
            _ => None,
        }
    }
}

/// The alternating vertex sum of a group-valued configuration, defined for
/// abelian carriers only.
pub fn alternating_sum_in(
    group: &FiniteGroup,
    c: &crate::cube::Configuration<Elem>,
) -> Result<Elem> {
    if !group.is_abelian() {
        return Err(Error::UnsupportedCarrier(
            "alternating sum needs an abelian group".into(),
        ));
    }
    let mut acc = group.id();
    for v in crate::cube::Vertex::all(c.dim()) {
        let term = *c.get(v);
        acc = group.op(acc, if v.sign() > 0 { term } else { group.inv(term) });
    }
    Ok(acc)
}

/// A filtration `G_0 >= G_1 >= ... >= G_{d+1} = {id}` of degree `d`.
///
/// `chain[k]` is `G_k` as a sorted element list; indices beyond the chain are
/// read as the trivial group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtration {
    group: FiniteGroup,
    chain: Vec<Vec<Elem>>,
}

impl Filtration {
    /// Build from a subgroup chain, verifying nesting and the subgroup
    /// property.  The last entry must be the trivial group.
    pub fn new(group: FiniteGroup, chain: Vec<Vec<Elem>>) -> Result<Filtration> {
        if chain.len() < 2 {
            return Err(Error::InvalidFiltration(
                "chain needs at least G_0 and the trivial group".into(),
            ));
        }
        for (k, sub) in chain.iter().enumerate() {
            if !group.is_subgroup(sub) {
                return Err(Error::InvalidFiltration(format!("G_{k} is not a subgroup")));
            }
        }
        for k in 0..chain.len() - 1 {
            if !chain[k + 1].iter().all(|e| chain[k].binary_search(e).is_ok()) {
                return Err(Error::InvalidFiltration(format!(
                    "G_{} is not contained in G_{k}",
                    k + 1
                )));
            }
        }
        if chain.last().unwrap() != &vec![group.id()] {
            return Err(Error::InvalidFiltration(
                "chain must terminate in the trivial group".into(),
            ));
        }
        Ok(Filtration { group, chain })
    }

    /// Degree-`s` filtration on an abelian product: `G_0 = ... = G_s = G`,
    /// then trivial.
    pub fn abelian_of_degree(moduli: &[u32], s: usize) -> Result<Filtration> {
        let group = FiniteGroup::abelian_product(moduli)?;
        let all: Vec<Elem> = group.elements().collect();
        let mut chain = vec![all; s + 1];
        chain.push(vec![group.id()]);
        Filtration::new(group, chain)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn degree(&self) -> usize {
        self.chain.len() - 2
    }

    /// `G_k`, with levels past the end of the chain read as trivial.
    pub fn level(&self, k: usize) -> &[Elem] {
        let k = k.min(self.chain.len() - 1);
        &self.chain[k]
    }

    pub fn level_contains(&self, k: usize, e: Elem) -> bool {
        self.level(k).binary_search(&e).is_ok()
    }

    /// Verify `[G_i, G_j] <= G_{i+j}` elementwise; on failure return the
    /// witness `(i, j, g, h)`.
    pub fn commutator_check(&self) -> std::result::Result<(), (usize, usize, Elem, Elem)> {
        let top = self.chain.len() - 1;
        for i in 0..=top {
            for j in 0..=top {
                let target = (i + j).min(top);
                for &g in self.level(i) {
                    for &h in self.level(j) {
                        if !self.level_contains(target, self.group.commutator(g, h)) {
                            return Err((i, j, g, h));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The Heisenberg group over `Z/n` with its lower central series
/// `G_0 = G_1 = G`, `G_2 = center`, `G_3 = {id}`.
pub fn make_heisenberg(n: u32) -> Result<Filtration> {
    let group = FiniteGroup::heisenberg(n)?;
    let all: Vec<Elem> = group.elements().collect();
    let center = group.center();
    Filtration::new(group.clone(), vec![all.clone(), all, center, vec![group.id()]])
}

/// An explicit isomorphism from a finite abelian group onto a product of
/// cyclic groups `Z/m_1 x ... x Z/m_r` with `m_{i+1} | m_i` (invariant
/// factors).
#[derive(Debug, Clone)]
pub struct AbelianDecomposition {
    pub moduli: Vec<u64>,
    /// Coordinates of each element, indexed by element id.
    pub coords: Vec<Vec<u64>>,
    /// Inverse lookup from coordinates to element id.
    pub from_coords: HashMap<Vec<u64>, Elem>,
}

impl AbelianDecomposition {
    pub fn coords_of(&self, e: Elem) -> &[u64] {
        &self.coords[e as usize]
    }

    pub fn elem_of(&self, coords: &[u64]) -> Elem {
        self.from_coords[coords]
    }
}

/// Decompose a finite abelian group into invariant factors, with an explicit
/// isomorphism.
///
/// A cyclic subgroup of maximal order is always a direct summand; generators
/// for the complement are found recursively in the quotient and corrected to
/// honest lifts (if a quotient generator `q` of order `k` lifts to `h` with
/// `k*h = t*g`, then `k | t` by maximality of `ord(g)` and `h - (t/k)*g` is a
/// lift of order `k`).
pub fn cyclic_decomposition(group: &FiniteGroup) -> Result<AbelianDecomposition> {
    if !group.is_abelian() {
        return Err(Error::UnsupportedCarrier(
            "cyclic decomposition needs an abelian group".into(),
        ));
    }
    let gens = decompose_generators(group, &(0..group.order() as Elem).collect::<Vec<_>>())?;
    let moduli: Vec<u64> = gens.iter().map(|&g| group.element_order(g) as u64).collect();
    // Tabulate the isomorphism by enumerating all coordinate tuples.
    let mut coords = vec![Vec::new(); group.order()];
    let mut from_coords = HashMap::new();
    let mut tuple = vec![0u64; moduli.len()];
    loop {
        let mut e = group.id();
        for (i, &g) in gens.iter().enumerate() {
            e = group.op(e, group.pow(g, tuple[i] as i64));
        }
        if !coords[e as usize].is_empty() || (e == group.id() && from_coords.contains_key(&tuple)) {
            return Err(Error::StructureExtraction(
                "generator tuple does not span freely".into(),
            ));
        }
        coords[e as usize] = tuple.clone();
        from_coords.insert(tuple.clone(), e);
        // Increment the mixed-radix tuple.
        let mut i = 0;
        loop {
            if i == moduli.len() {
                if from_coords.len() != group.order() {
                    return Err(Error::StructureExtraction(
                        "generators do not span the group".into(),
                    ));
                }
                // Elements with empty coords would have been caught above,
                // except the identity in the rank-0 case.
                if moduli.is_empty() {
                    coords[group.id() as usize] = Vec::new();
                }
                return Ok(AbelianDecomposition {
                    moduli,
                    coords,
                    from_coords,
                });
            }
            tuple[i] += 1;
            if tuple[i] < moduli[i] {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// Generators realizing the invariant-factor decomposition of the subgroup
/// `elems` (sorted, assumed closed) of an abelian group.
fn decompose_generators(group: &FiniteGroup, elems: &[Elem]) -> Result<Vec<Elem>> {
    if elems.len() == 1 {
        return Ok(Vec::new());
    }
    // Generator of maximal order.
    let &g = elems
        .iter()
        .max_by_key(|&&e| group.element_order(e))
        .unwrap();
    let m = group.element_order(g) as i64;
    let span = group.closure(&[g]);
    // Quotient by <g>: map each element to the least representative of its
    // coset, and present the quotient as a table group on those reps.
    let mut rep_of = HashMap::new();
    let mut reps = Vec::new();
    for &e in elems {
        let least = span
            .iter()
            .map(|&s| group.op(e, s))
            .min()
            .unwrap();
        if !rep_of.contains_key(&e) {
            for &s in &span {
                rep_of.insert(group.op(e, s), least);
            }
            reps.push(least);
        }
    }
    reps.sort_unstable();
    reps.dedup();
    let index: HashMap<Elem, Elem> = reps
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, i as Elem))
        .collect();
    let table: Vec<Vec<Elem>> = reps
        .iter()
        .map(|&a| {
            reps.iter()
                .map(|&b| index[&rep_of[&group.op(a, b)]])
                .collect()
        })
        .collect();
    let quotient = FiniteGroup::from_table(table)?;
    let sub_gens = decompose_generators(&quotient, &(0..reps.len() as Elem).collect::<Vec<_>>())?;
    let mut gens = vec![g];
    for q in sub_gens {
        let h = reps[q as usize];
        let k = quotient.element_order(q) as i64;
        // k*h lands in <g>; write it as t*g and correct the lift.
        let kh = group.pow(h, k);
        let t = (0..m)
            .find(|&t| group.pow(g, t) == kh)
            .ok_or_else(|| Error::StructureExtraction("lift correction failed".into()))?;
        if t % k != 0 {
            return Err(Error::StructureExtraction(
                "maximal-order summand violated".into(),
            ));
        }
        let h = group.op(h, group.inv(group.pow(g, t / k)));
        gens.push(h);
    }
    Ok(gens)
}

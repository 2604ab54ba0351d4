//! Symmetric diagonal sets E = ⋃ᵢ Aᵢ×Aᵢ and their maximal Cartesian squares.
//!
//! A set B is a Cartesian square base of E when B×B ⊆ E, i.e. every pair of
//! points of B shares an atom. Enumeration works on membership patterns: the
//! pattern of a point x is the index set {i : x ∈ Aᵢ}, patterns are exact
//! when some point realizes them exactly, and maximal square bases are in
//! bijection with maximal cliques of exact patterns under the adjacency
//! "index sets intersect". Bases absent from the atom list are hidden.

use crate::geometry::{region_eq, region_subset, Point, Polytope, Region};
use crate::rational::Rat;
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Input,
    HullStage(usize),
    Sublevel(Rat),
}

/// E = ⋃ᵢ Aᵢ×Aᵢ, stored through its atoms. Normalization removes atoms
/// contained in other atoms, so distinct stored atoms are incomparable.
#[derive(Clone, Debug)]
pub struct SquareUnion {
    dim: usize,
    atoms: Vec<Region>,
    pub provenance: Provenance,
}

impl SquareUnion {
    pub fn new(dim: usize, atoms: Vec<Region>) -> Result<SquareUnion> {
        if atoms.is_empty() {
            return Err(Error::EmptyInput("square union with no atoms"));
        }
        for a in &atoms {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.dim(),
                });
            }
        }
        let mut kept: Vec<Region> = Vec::new();
        'outer: for a in atoms {
            let mut i = 0;
            while i < kept.len() {
                if region_subset(&kept[i], &a)? && !region_eq(&kept[i], &a)? {
                    kept.remove(i);
                    continue;
                }
                if region_subset(&a, &kept[i])? {
                    continue 'outer;
                }
                i += 1;
            }
            kept.push(a);
        }
        kept.sort();
        Ok(SquareUnion {
            dim,
            atoms: kept,
            provenance: Provenance::Input,
        })
    }

    pub fn with_provenance(mut self, p: Provenance) -> SquareUnion {
        self.provenance = p;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Region] {
        &self.atoms
    }

    /// The projection ⋃ᵢ Aᵢ of E onto one factor.
    pub fn union_region(&self) -> Result<Region> {
        let mut r = self.atoms[0].clone();
        for a in &self.atoms[1..] {
            r = r.union(a)?;
        }
        Ok(r)
    }

    /// All atoms are finite point sets.
    pub fn is_discrete(&self) -> bool {
        self.atoms.iter().all(|a| a.is_finite_point_set())
    }

    /// Membership of the pair (ξ, ζ) in E.
    pub fn contains_pair(&self, xi: &[Rat], zeta: &[Rat]) -> Result<bool> {
        for a in &self.atoms {
            if a.contains(xi)? && a.contains(zeta)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Enumeration bounds. The pattern lattice and the clique set are
/// exponential in the worst case; exceeding a bound aborts with a
/// resource error instead of returning a truncated answer.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_atoms: usize,
    pub max_patterns: usize,
    pub max_cliques: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            max_atoms: 16,
            max_patterns: 4096,
            max_cliques: 4096,
        }
    }
}

/// A realizable membership pattern: S with P(S) = ⋂_{i∈S} Aᵢ nonempty.
/// `exact` marks patterns realized exactly, i.e. P(S) ⊄ ⋃_{j∉S} Aⱼ.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub indices: Vec<usize>,
    pub intersection: Region,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct MaximalSquareSet {
    pub squares: Vec<Region>,
    pub hidden: Vec<bool>,
}

impl MaximalSquareSet {
    pub fn hidden_squares(&self) -> Vec<&Region> {
        self.squares
            .iter()
            .zip(&self.hidden)
            .filter(|(_, h)| **h)
            .map(|(s, _)| s)
            .collect()
    }
}

/// Nonempty intersections of the given indexed parts, found by monotone
/// expansion: S∪{j} with j > max(S) is visited from S, so every realizable
/// index set appears exactly once.
fn intersection_lattice(
    parts: &[(usize, Region)],
    max_patterns: usize,
) -> Result<Vec<(BTreeSet<usize>, Region)>> {
    let mut out: Vec<(BTreeSet<usize>, Region)> = Vec::new();
    let mut frontier: Vec<(BTreeSet<usize>, usize, Region)> = Vec::new();
    for (pos, (idx, r)) in parts.iter().enumerate() {
        frontier.push((BTreeSet::from([*idx]), pos, r.clone()));
    }
    while let Some((s, pos, inter)) = frontier.pop() {
        out.push((s.clone(), inter.clone()));
        if out.len() > max_patterns {
            return Err(Error::Limit {
                what: "realizable patterns",
                got: out.len(),
                limit: max_patterns,
            });
        }
        for (next, (idx, r)) in parts.iter().enumerate().skip(pos + 1) {
            if let Some(i) = inter.intersect(r)? {
                let mut s2 = s.clone();
                s2.insert(*idx);
                frontier.push((s2, next, i));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn union_of(parts: &[&Region]) -> Result<Option<Region>> {
    let mut it = parts.iter();
    let Some(first) = it.next() else {
        return Ok(None);
    };
    let mut u = (*first).clone();
    for r in it {
        u = u.union(r)?;
    }
    Ok(Some(u))
}

/// Exactness of each lattice pattern: P(S) not covered by the atoms outside S.
fn exactness_flags(
    lattice: &[(BTreeSet<usize>, Region)],
    parts: &[(usize, Region)],
) -> Result<Vec<bool>> {
    let mut flags = Vec::with_capacity(lattice.len());
    for (s, inter) in lattice {
        let others: Vec<&Region> = parts
            .iter()
            .filter(|(idx, _)| !s.contains(idx))
            .map(|(_, r)| r)
            .collect();
        let exact = match union_of(&others)? {
            None => true,
            Some(u) => !region_subset(inter, &u)?,
        };
        flags.push(exact);
    }
    Ok(flags)
}

/// All realizable membership patterns of E with exactness flags.
pub fn realizable_patterns(e: &SquareUnion, limits: &Limits) -> Result<Vec<Pattern>> {
    if e.atoms.len() > limits.max_atoms {
        return Err(Error::Limit {
            what: "atoms",
            got: e.atoms.len(),
            limit: limits.max_atoms,
        });
    }
    let parts: Vec<(usize, Region)> = e.atoms.iter().cloned().enumerate().collect();
    let lattice = intersection_lattice(&parts, limits.max_patterns)?;
    let flags = exactness_flags(&lattice, &parts)?;
    Ok(lattice
        .into_iter()
        .zip(flags)
        .map(|((s, inter), exact)| Pattern {
            indices: s.into_iter().collect(),
            intersection: inter,
            exact,
        })
        .collect())
}

/// Decides B×B ⊆ E: collect the membership patterns realized by points of B
/// and require every two realized patterns to share an atom index (a pair
/// realizing disjoint patterns shares no atom).
pub fn square_subset(b: &Region, e: &SquareUnion) -> Result<bool> {
    if b.dim() != e.dim {
        return Err(Error::DimensionMismatch {
            expected: e.dim,
            got: b.dim(),
        });
    }
    let mut parts: Vec<(usize, Region)> = Vec::new();
    for (i, a) in e.atoms.iter().enumerate() {
        if let Some(r) = b.intersect(a)? {
            parts.push((i, r));
        }
    }
    match union_of(&parts.iter().map(|(_, r)| r).collect::<Vec<_>>())? {
        None => return Ok(false),
        Some(u) => {
            if !region_subset(b, &u)? {
                return Ok(false);
            }
        }
    }
    let lattice = intersection_lattice(&parts, usize::MAX)?;
    let flags = exactness_flags(&lattice, &parts)?;
    let realized: Vec<&BTreeSet<usize>> = lattice
        .iter()
        .zip(&flags)
        .filter(|(_, f)| **f)
        .map(|((s, _), _)| s)
        .collect();
    for i in 0..realized.len() {
        for j in i + 1..realized.len() {
            if realized[i].is_disjoint(realized[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Bron–Kerbosch with pivoting; deterministic output order.
fn maximal_cliques(adj: &[BTreeSet<usize>], max_cliques: usize) -> Result<Vec<Vec<usize>>> {
    fn expand(
        adj: &[BTreeSet<usize>],
        r: &mut Vec<usize>,
        mut p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        out: &mut Vec<Vec<usize>>,
        max_cliques: usize,
    ) -> Result<()> {
        if p.is_empty() && x.is_empty() {
            out.push(r.clone());
            if out.len() > max_cliques {
                return Err(Error::Limit {
                    what: "maximal cliques",
                    got: out.len(),
                    limit: max_cliques,
                });
            }
            return Ok(());
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|u| p.intersection(&adj[**u]).count())
            .copied()
            .unwrap();
        let cands: Vec<usize> = p.difference(&adj[pivot]).copied().collect();
        for v in cands {
            r.push(v);
            let p2 = p.intersection(&adj[v]).copied().collect();
            let x2 = x.intersection(&adj[v]).copied().collect();
            expand(adj, r, p2, x2, out, max_cliques)?;
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
        Ok(())
    }
    let mut out = Vec::new();
    let p: BTreeSet<usize> = (0..adj.len()).collect();
    expand(adj, &mut Vec::new(), p, BTreeSet::new(), &mut out, max_cliques)?;
    out.iter_mut().for_each(|c| c.sort());
    out.sort();
    Ok(out)
}

/// The complete set 𝒫_E of maximal Cartesian squares of E, with hidden flags.
pub fn maximal_squares(e: &SquareUnion, limits: &Limits) -> Result<MaximalSquareSet> {
    let squares = if e.is_discrete() {
        discrete_maximal_squares(e, limits)?
    } else {
        polytope_maximal_squares(e, limits)?
    };
    let hidden = classify_hidden(&squares, e)?;
    Ok(MaximalSquareSet { squares, hidden })
}

fn polytope_maximal_squares(e: &SquareUnion, limits: &Limits) -> Result<Vec<Region>> {
    let patterns = realizable_patterns(e, limits)?;
    let exact: Vec<&Pattern> = patterns.iter().filter(|p| p.exact).collect();
    let n = exact.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        let si: BTreeSet<usize> = exact[i].indices.iter().copied().collect();
        for j in i + 1..n {
            if exact[j].indices.iter().any(|k| si.contains(k)) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let cliques = maximal_cliques(&adj, limits.max_cliques)?;
    let mut squares: Vec<Region> = Vec::new();
    for clique in &cliques {
        // Union over the upward closure of the clique in the realizable
        // pattern lattice; finer patterns contribute subsets of P(S), so
        // this equals ⋃_{S∈F} P(S) but keeps the region pieces explicit.
        let members: Vec<BTreeSet<usize>> = clique
            .iter()
            .map(|&v| exact[v].indices.iter().copied().collect())
            .collect();
        let mut b: Option<Region> = None;
        for pat in &patterns {
            let t: BTreeSet<usize> = pat.indices.iter().copied().collect();
            if members.iter().any(|s| s.is_subset(&t)) {
                b = Some(match b {
                    None => pat.intersection.clone(),
                    Some(acc) => acc.union(&pat.intersection)?,
                });
            }
        }
        if let Some(b) = b {
            squares.push(b);
        }
    }
    dedup_and_filter(&mut squares)?;
    for b in &squares {
        if !square_subset(b, e)? {
            return Err(Error::Verification(
                "enumerated region fails the square-base check".into(),
            ));
        }
    }
    Ok(squares)
}

/// Hulls of the clique squares over the full pattern lattice. Every clique
/// square is a genuine square base (upward closures of pairwise-intersecting
/// index sets still pairwise intersect), so it sits inside some maximal base;
/// conversely the realized patterns of a maximal base extend to a clique
/// whose square contains it. The union of these hulls therefore equals
/// ⋃ Bᶜᵒ over maximal B, without the exactness, maximality, and hiddenness
/// bookkeeping that dominates `maximal_squares`. Membership queries may use
/// the family; structural reports may not.
pub(crate) fn clique_hulls(dim: usize, atoms: &[Region], limits: &Limits) -> Result<Vec<Polytope>> {
    if atoms.len() > limits.max_atoms {
        return Err(Error::Limit {
            what: "atoms",
            got: atoms.len(),
            limit: limits.max_atoms,
        });
    }
    let parts: Vec<(usize, Region)> = atoms.iter().cloned().enumerate().collect();
    let lattice = intersection_lattice(&parts, limits.max_patterns)?;
    let n = lattice.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if !lattice[i].0.is_disjoint(&lattice[j].0) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let cliques = maximal_cliques(&adj, limits.max_cliques)?;
    let mut hulls: Vec<Polytope> = Vec::with_capacity(cliques.len());
    for clique in &cliques {
        let mut pts: Vec<Point> = Vec::new();
        for (t, inter) in &lattice {
            if clique.iter().any(|&v| lattice[v].0.is_subset(t)) {
                for piece in inter.pieces() {
                    pts.extend(piece.verts().iter().cloned());
                }
            }
        }
        hulls.push(Polytope::hull(dim, &pts)?);
    }
    hulls.sort();
    hulls.dedup();
    let mut kept: Vec<Polytope> = Vec::new();
    'outer: for h in hulls {
        let mut i = 0;
        while i < kept.len() {
            if convex_subset(&kept[i], &h)? {
                kept.remove(i);
                continue;
            }
            if convex_subset(&h, &kept[i])? {
                continue 'outer;
            }
            i += 1;
        }
        kept.push(h);
    }
    kept.sort();
    Ok(kept)
}

/// a ⊆ b for convex polytopes: vertex containment suffices.
fn convex_subset(a: &Polytope, b: &Polytope) -> Result<bool> {
    for v in a.verts() {
        if !b.contains(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn discrete_maximal_squares(e: &SquareUnion, limits: &Limits) -> Result<Vec<Region>> {
    let mut pts: Vec<Point> = Vec::new();
    for a in &e.atoms {
        pts.extend(a.point_list());
    }
    pts.sort();
    pts.dedup();
    let index: BTreeMap<&Point, usize> = pts.iter().zip(0..).collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); pts.len()];
    for a in &e.atoms {
        let members: Vec<usize> = a.point_list().iter().map(|p| index[p]).collect();
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let cliques = maximal_cliques(&adj, limits.max_cliques)?;
    let mut squares = Vec::with_capacity(cliques.len());
    for clique in cliques {
        let members: Vec<Point> = clique.iter().map(|&i| pts[i].clone()).collect();
        squares.push(Region::points(e.dim, &members)?);
    }
    dedup_and_filter(&mut squares)?;
    Ok(squares)
}

/// Deduplicate by set equality and drop regions strictly contained in others.
fn dedup_and_filter(squares: &mut Vec<Region>) -> Result<()> {
    let mut kept: Vec<Region> = Vec::new();
    'outer: for b in squares.drain(..) {
        let mut i = 0;
        while i < kept.len() {
            if region_subset(&kept[i], &b)? && !region_subset(&b, &kept[i])? {
                kept.remove(i);
                continue;
            }
            if region_subset(&b, &kept[i])? {
                continue 'outer;
            }
            i += 1;
        }
        kept.push(b);
    }
    kept.sort();
    *squares = kept;
    Ok(())
}

/// A maximal square base is hidden when it differs from every atom.
pub fn classify_hidden(squares: &[Region], e: &SquareUnion) -> Result<Vec<bool>> {
    let mut flags = Vec::with_capacity(squares.len());
    for b in squares {
        let mut is_atom = false;
        for a in &e.atoms {
            if region_eq(b, a)? {
                is_atom = true;
                break;
            }
        }
        flags.push(!is_atom);
    }
    Ok(flags)
}

/// Ê = {(ξ,ζ) ∈ E : {ξ,ζ}×{ξ,ζ} ⊆ E}, the symmetric diagonal core of a
/// finite relation.
pub fn symmetrize_diagonalize_discrete(pairs: &[(Point, Point)]) -> Vec<(Point, Point)> {
    let set: BTreeSet<(Point, Point)> = pairs.iter().cloned().collect();
    let mut out: Vec<(Point, Point)> = set
        .iter()
        .filter(|(a, b)| {
            set.contains(&(a.clone(), a.clone()))
                && set.contains(&(b.clone(), b.clone()))
                && set.contains(&(b.clone(), a.clone()))
        })
        .cloned()
        .collect();
    out.sort();
    out
}

//! Cartesian convex hull iteration.
//!
//! One step replaces E by ⋃ {Bᶜᵒ×Bᶜᵒ : B maximal square base of E}; the
//! Cartesian convex hull is the fixpoint of that step. A set is Cartesian
//! convex exactly when all of its maximal square bases are convex, so the
//! fixpoint test compares consecutive stages through their square families.

use crate::geometry::{region_eq, Polytope, Region};
use crate::squares::{clique_hulls, maximal_squares, Limits, MaximalSquareSet, Provenance, SquareUnion};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct HullTrace {
    /// Stage 0 is the input; stage k is the k-th hull iterate.
    pub stages: Vec<SquareUnion>,
    /// Maximal squares of each stage, parallel to `stages`.
    pub stage_squares: Vec<MaximalSquareSet>,
    pub fixpoint_reached: bool,
    /// Steps that strictly enlarged the set.
    pub productive_steps: usize,
    /// Total hull steps computed (at most one past the last productive one).
    pub iterations: usize,
}

impl HullTrace {
    pub fn final_stage(&self) -> &SquareUnion {
        self.stages.last().unwrap()
    }

    pub fn final_squares(&self) -> &MaximalSquareSet {
        self.stage_squares.last().unwrap()
    }
}

/// Multiset equality of two square families up to region equality. Both
/// sides come from enumeration, so they are deduplicated; matching is
/// greedy over the canonical order.
pub fn family_eq(a: &[Region], b: &[Region]) -> Result<bool> {
    if a.len() != b.len() {
        return Ok(false);
    }
    let mut used = vec![false; b.len()];
    'outer: for r in a {
        for (j, s) in b.iter().enumerate() {
            if !used[j] && region_eq(r, s)? {
                used[j] = true;
                continue 'outer;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

fn step_from(squares: &MaximalSquareSet, dim: usize, stage: usize) -> Result<SquareUnion> {
    let mut atoms = Vec::with_capacity(squares.squares.len());
    for b in &squares.squares {
        atoms.push(Region::from_polytope(b.hull()?));
    }
    Ok(SquareUnion::new(dim, atoms)?.with_provenance(Provenance::HullStage(stage)))
}

/// One hull iteration: convexify every maximal square base.
pub fn hull_step(e: &SquareUnion, limits: &Limits) -> Result<SquareUnion> {
    let ms = maximal_squares(e, limits)?;
    let stage = match e.provenance {
        Provenance::HullStage(k) => k + 1,
        _ => 1,
    };
    step_from(&ms, e.dim(), stage)
}

/// Iterate hull steps to a fixpoint, or stop after `max_iter` steps with
/// `fixpoint_reached = false`.
pub fn cartesian_hull(e: &SquareUnion, max_iter: usize, limits: &Limits) -> Result<HullTrace> {
    let mut stages = vec![e.clone()];
    let mut stage_squares = vec![maximal_squares(e, limits)?];
    let mut productive = 0usize;
    let mut iterations = 0usize;
    let mut fixpoint = false;
    while iterations < max_iter.max(1) {
        let prev = stage_squares.last().unwrap();
        let next = step_from(prev, e.dim(), stages.len())?;
        iterations += 1;
        let next_squares = maximal_squares(&next, limits)?;
        let equal = family_eq(&prev.squares, &next_squares.squares)?;
        stages.push(next);
        stage_squares.push(next_squares);
        if equal {
            fixpoint = true;
            break;
        }
        productive += 1;
    }
    Ok(HullTrace {
        stages,
        stage_squares,
        fixpoint_reached: fixpoint,
        productive_steps: productive,
        iterations,
    })
}

/// Fast hull of ⋃ᵢ Aᵢ×Aᵢ for membership queries: iterate clique hulls until
/// the family repeats. Hulls are canonical and the filtered family is a
/// function of the stage set alone, so equal consecutive stage sets give
/// equal families and repetition certifies the fixpoint. `None` means no
/// repetition within the budget; the caller falls back to the staged
/// iteration, which settles convergence with full maximality bookkeeping.
pub fn hull_cover(
    dim: usize,
    atoms: &[Region],
    max_iter: usize,
    limits: &Limits,
) -> Result<Option<Vec<Polytope>>> {
    let mut family = clique_hulls(dim, atoms, limits)?;
    for _ in 1..max_iter.max(2) {
        let stage: Vec<Region> = family.iter().cloned().map(Region::from_polytope).collect();
        let next = clique_hulls(dim, &stage, limits)?;
        if next == family {
            return Ok(Some(family));
        }
        family = next;
    }
    Ok(None)
}

/// E is Cartesian convex iff every maximal square base is convex.
pub fn is_cartesian_convex(e: &SquareUnion, limits: &Limits) -> Result<bool> {
    let ms = maximal_squares(e, limits)?;
    all_convex(&ms)
}

pub fn all_convex(ms: &MaximalSquareSet) -> Result<bool> {
    Ok(nonconvex_witness(ms)?.is_none())
}

pub fn nonconvex_witness(ms: &MaximalSquareSet) -> Result<Option<Region>> {
    for b in &ms.squares {
        let hull = Region::from_polytope(b.hull()?);
        if !region_eq(b, &hull)? {
            return Ok(Some(b.clone()));
        }
    }
    Ok(None)
}

/// Outcome of the basic-convexification test: does every maximal square of
/// the first hull stage arise as the convexification of a maximal square of
/// E itself?
#[derive(Clone, Debug)]
pub struct BasicCertificate {
    pub basic: bool,
    /// A maximal square of stage 1 that is not the hull of any square of E.
    pub witness: Option<Region>,
    pub input_squares: MaximalSquareSet,
    pub stage1_squares: MaximalSquareSet,
}

pub fn has_basic_convexification(e: &SquareUnion, limits: &Limits) -> Result<BasicCertificate> {
    let ms = maximal_squares(e, limits)?;
    let mut hulls = Vec::with_capacity(ms.squares.len());
    for b in &ms.squares {
        hulls.push(Region::from_polytope(b.hull()?));
    }
    let stage1 = step_from(&ms, e.dim(), 1)?;
    let stage1_squares = maximal_squares(&stage1, limits)?;
    let mut witness = None;
    'outer: for b1 in &stage1_squares.squares {
        for h in &hulls {
            if region_eq(b1, h)? {
                continue 'outer;
            }
        }
        witness = Some(b1.clone());
        break;
    }
    let basic = witness.is_none();
    if basic {
        // A positive answer certifies that the hull iteration is already
        // stationary after one step; anything else is an algorithm bug.
        let stage2 = step_from(&stage1_squares, e.dim(), 2)?;
        let stage2_squares = maximal_squares(&stage2, limits)?;
        if !family_eq(&stage1_squares.squares, &stage2_squares.squares)? {
            return Err(Error::Verification(
                "basic convexification certified but stage 2 still grows".into(),
            ));
        }
    }
    Ok(BasicCertificate {
        basic,
        witness,
        input_squares: ms,
        stage1_squares,
    })
}

/// Scalar separate hull: in one dimension the hull of E = ⋃ Aᵢ×Aᵢ is
/// ⋃ᵢ [min Aᵢ, max Aᵢ]², since the corner pair (min Aᵢ, max Aᵢ) lies in E
/// and spans every other square with corners in Aᵢ.
pub fn separate_hull_1d(e: &SquareUnion) -> Result<SquareUnion> {
    if e.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: e.dim(),
        });
    }
    let mut atoms = Vec::with_capacity(e.atoms().len());
    for a in e.atoms() {
        atoms.push(Region::from_polytope(a.hull()?));
    }
    Ok(SquareUnion::new(1, atoms)?.with_provenance(Provenance::HullStage(1)))
}

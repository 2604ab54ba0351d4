//! The nonlocal supremal functional J_W(u) = esssup W(u(x), u(y)) on simple
//! functions, its relaxation, the inclusion classes 𝒜_K and 𝒜_K^∞, and
//! structure-preservation reports.
//!
//! For a simple function only the value set matters to J_W and its
//! relaxation; weights enter the Lᵖ quadratures. The relaxation is
//! J^rlx(u) = inf{c : all values of u lie in Bᶜᵒ for one maximal square B
//! of L_c(W)}, computed by the same grid bisection as the envelope. For
//! three wells the closed-form min formula over the three convexified wells
//! and the pairwise-overlap family serves as an independent cross-check.

use crate::geometry::{Norm, Point, Region};
use crate::hull::has_basic_convexification;
use crate::rational::{format_rational, Rat};
use crate::squares::{maximal_squares, Limits, SquareUnion};
use crate::supremand::{grid_step, Bisection, Supremand};
use crate::{Error, Result};
use num::{One, Zero};

/// Piecewise-constant function on a unit-measure domain: weighted values.
/// The spatial layout is irrelevant to every functional computed here.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction {
    dim: usize,
    cells: Vec<(Rat, Point)>,
}

impl SimpleFunction {
    pub fn new(dim: usize, cells: Vec<(Rat, Point)>) -> Result<SimpleFunction> {
        if cells.is_empty() {
            return Err(Error::EmptyInput("simple function with no cells"));
        }
        let mut total = Rat::zero();
        for (w, v) in &cells {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if *w <= Rat::zero() {
                return Err(Error::Invalid("cell weights must be positive".into()));
            }
            total += w;
        }
        if total != Rat::one() {
            return Err(Error::Invalid(format!(
                "cell weights must sum to 1, got {}",
                format_rational(&total)
            )));
        }
        Ok(SimpleFunction { dim, cells })
    }

    /// Equal-weight cells over the given values.
    pub fn from_values(dim: usize, values: &[Point]) -> Result<SimpleFunction> {
        if values.is_empty() {
            return Err(Error::EmptyInput("simple function with no cells"));
        }
        let w = Rat::one() / Rat::from_integer((values.len() as u64).into());
        SimpleFunction::new(dim, values.iter().map(|v| (w.clone(), v.clone())).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[(Rat, Point)] {
        &self.cells
    }

    pub fn values(&self) -> impl Iterator<Item = &Point> {
        self.cells.iter().map(|(_, v)| v)
    }

    pub fn mean(&self) -> Point {
        let mut m = vec![Rat::zero(); self.dim];
        for (w, v) in &self.cells {
            for (acc, x) in m.iter_mut().zip(v) {
                *acc += w * x;
            }
        }
        m
    }
}

fn check_dims(s: &Supremand, u: &SimpleFunction) -> Result<()> {
    if s.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: u.dim(),
        });
    }
    Ok(())
}

/// J_W(u): the max of W over all ordered value pairs, including the
/// diagonal ones. Growth exponent included via `eval_w`.
pub fn eval_j(s: &Supremand, u: &SimpleFunction) -> Result<f64> {
    check_dims(s, u)?;
    let mut best = f64::NEG_INFINITY;
    for (_, vk) in u.cells() {
        for (_, vl) in u.cells() {
            best = best.max(s.eval_w(vk, vl)?);
        }
    }
    Ok(best)
}

/// Exact (linf) or safely padded upper bracket for the raw-scale J value.
fn j_raw_bracket(s: &Supremand, u: &SimpleFunction) -> Result<Rat> {
    if s.norm() == Norm::Linf {
        let mut best = Rat::zero();
        for (_, vk) in u.cells() {
            for (_, vl) in u.cells() {
                let w = s
                    .eval_w_raw_exact(vk, vl)?
                    .expect("linf distances are exact");
                if w > best {
                    best = w;
                }
            }
        }
        Ok(best)
    } else {
        let mut best = 0.0f64;
        for (_, vk) in u.cells() {
            for (_, vl) in u.cells() {
                best = best.max(s.eval_w_raw(vk, vl)?);
            }
        }
        crate::rational::from_f64(best * (1.0 + 1e-9) + 1e-12)
            .ok_or_else(|| Error::Invalid("non-finite distance value".into()))
    }
}

/// u ∈ 𝒜_K: every ordered value pair lies in K.
pub fn membership_a(k: &SquareUnion, u: &SimpleFunction) -> Result<bool> {
    for (_, vk) in u.cells() {
        for (_, vl) in u.cells() {
            if !k.contains_pair(vk, vl)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// u ∈ 𝒜_K^∞: all values lie in Bᶜᵒ for some maximal square B of K.
pub fn membership_a_infty(k: &SquareUnion, u: &SimpleFunction, limits: &Limits) -> Result<bool> {
    let ms = maximal_squares(k, limits)?;
    'squares: for b in &ms.squares {
        let h = b.hull()?;
        for v in u.values() {
            if !h.contains(v)? {
                continue 'squares;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// J_W^rlx(u) = inf{c : u ∈ 𝒜^∞_{L_c(W)}} on the raw distance scale;
/// apply the growth exponent via `Bisection::powered_f64` for the
/// functional value. The upper bracket is the raw J value: whenever every
/// value pair sits in L_c, the realized membership patterns pairwise
/// intersect, so one maximal square of L_c already collects all values.
pub fn eval_j_rlx(s: &Supremand, u: &SimpleFunction, tol: f64) -> Result<Bisection> {
    check_dims(s, u)?;
    let hi = j_raw_bracket(s, u)?;
    let step = grid_step(tol);
    s.search_level(&hi, &step, |c| {
        let cover = s.level_cover(c)?;
        'hulls: for h in cover.iter() {
            for v in u.values() {
                if !h.contains(v)? {
                    continue 'hulls;
                }
            }
            return Ok(true);
        }
        Ok(false)
    })
}

/// Three-well closed form on the raw scale: the min of the three
/// convexified single-well values maxₖ dist(vₖ, Aᵢᶜᵒ) and the relaxed
/// pairwise-overlap term inf{c : all values in (M^c)ᶜᵒ}.
#[derive(Clone, Debug)]
pub struct MinFormula {
    pub well_terms: Vec<f64>,
    pub overlap_term: f64,
    pub value: f64,
}

pub fn eval_j_rlx_minformula(s: &Supremand, u: &SimpleFunction, tol: f64) -> Result<MinFormula> {
    check_dims(s, u)?;
    if s.wells().len() != 3 {
        return Err(Error::Invalid(format!(
            "the min formula needs exactly 3 wells, got {}",
            s.wells().len()
        )));
    }
    let mut well_terms = Vec::with_capacity(3);
    for a in s.wells() {
        let hull = Region::from_polytope(a.hull()?);
        let mut term = 0.0f64;
        for v in u.values() {
            term = term.max(hull.distance_f64(v, s.norm())?);
        }
        well_terms.push(term);
    }

    // At a level equal to the spread of all well vertices and values, every
    // value lies in every inflated well, so the overlap term is bracketed.
    let mut cloud: Vec<Point> = Vec::new();
    for a in s.wells() {
        for p in a.pieces() {
            cloud.extend(p.verts().iter().cloned());
        }
    }
    cloud.extend(u.values().cloned());
    let mut span = Rat::zero();
    for d in 0..s.dim() {
        let lo = cloud.iter().map(|p| &p[d]).min().unwrap();
        let hi = cloud.iter().map(|p| &p[d]).max().unwrap();
        let ext = hi - lo;
        if ext > span {
            span = ext;
        }
    }
    let step = grid_step(tol);
    let overlap = s.search_level(&span, &step, |c| {
        match s.pairwise_overlap(c)?.as_ref() {
            None => Ok(false),
            Some(m) => {
                let h = m.hull()?;
                for v in u.values() {
                    if !h.contains(v)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    })?;
    let overlap_term = overlap.value_f64();
    let value = well_terms
        .iter()
        .copied()
        .fold(overlap_term, f64::min);
    Ok(MinFormula {
        well_terms,
        overlap_term,
        value,
    })
}

/// Per-level basic-convexification verdicts over a ladder of raw levels.
#[derive(Clone, Debug)]
pub struct LevelVerdict {
    pub level: Rat,
    pub basic: bool,
    pub witness: Option<Region>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StructureVerdict {
    /// All probed levels pass; sampled evidence, not a proof over all c.
    PreservedAtProbedLevels,
    NotPreserved { level: Rat },
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub levels: Vec<LevelVerdict>,
    pub verdict: StructureVerdict,
}

pub fn structure_report(s: &Supremand, levels: &[Rat]) -> Result<StructureReport> {
    let mut out = Vec::with_capacity(levels.len());
    let mut verdict = if levels.is_empty() {
        StructureVerdict::Inconclusive
    } else {
        StructureVerdict::PreservedAtProbedLevels
    };
    for c in levels {
        let sub = s.sublevel(c)?;
        let cert = has_basic_convexification(&sub, s.limits())?;
        if !cert.basic && verdict == StructureVerdict::PreservedAtProbedLevels {
            verdict = StructureVerdict::NotPreserved { level: c.clone() };
        }
        out.push(LevelVerdict {
            level: c.clone(),
            basic: cert.basic,
            witness: cert.witness,
        });
    }
    Ok(StructureReport {
        levels: out,
        verdict,
    })
}

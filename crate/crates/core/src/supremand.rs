//! Multi-well supremands W(ξ,ζ) = minᵢ max(dist(ξ,Aᵢ), dist(ζ,Aᵢ)), their
//! sublevel geometry, and the Cartesian level-convex envelope.
//!
//! The envelope W^{×lc}(ξ,ζ) = inf{c : (ξ,ζ) ∈ hull(L_c)} and related
//! infima are computed by bisection over a fixed dyadic level grid: every
//! probe lands on a multiple of one power-of-two step, so distinct queries
//! share their level geometry through the per-supremand caches, and two
//! bisections whose true thresholds coincide return identical grid values.
//!
//! Levels always refer to the raw distance; the growth exponent q is
//! applied outermost (sublevels of W^q at c are sublevels of W at c^{1/q}).

use crate::geometry::{Norm, Point, Polytope, Region};
use crate::hull::{cartesian_hull, hull_cover};
use crate::rational::{rat_int, to_f64, Rat};
use crate::scene::Scene;
use crate::squares::{clique_hulls, maximal_squares, Limits, MaximalSquareSet, Provenance, SquareUnion};
use crate::{Error, Result};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

const HULL_MAX_ITER: usize = 16;

/// Sublevel set of the raw distance at one level, with its maximal squares
/// and their convexifications (the first hull stage).
#[derive(Debug)]
pub struct LevelGeometry {
    pub sublevel: SquareUnion,
    pub squares: MaximalSquareSet,
    pub hulls: Vec<Region>,
    pub all_convex: bool,
}

/// Convex squares covering the full Cartesian hull of one sublevel set.
#[derive(Debug)]
pub struct LevelHull {
    pub squares: Vec<Region>,
}

pub struct Supremand {
    dim: usize,
    wells: Vec<Region>,
    norm: Norm,
    q: u32,
    limits: Limits,
    level_cache: RwLock<BTreeMap<Rat, Arc<LevelGeometry>>>,
    cover_cache: RwLock<BTreeMap<Rat, Arc<Vec<Polytope>>>>,
    hull_cache: RwLock<BTreeMap<Rat, Arc<LevelHull>>>,
    overlap_cache: RwLock<BTreeMap<Rat, Arc<Option<Region>>>>,
}

/// Result of one level bisection: the returned level is the smallest grid
/// multiple at which the membership predicate holds, clamped to the initial
/// upper bracket, so it overestimates the true infimum by less than one step.
#[derive(Clone, Debug)]
pub struct Bisection {
    pub value: Rat,
    pub iterations: usize,
    pub bracket_hi: Rat,
}

impl Bisection {
    pub fn value_f64(&self) -> f64 {
        to_f64(&self.value)
    }

    pub fn powered_f64(&self, q: u32) -> f64 {
        self.value_f64().powi(q as i32)
    }
}

/// Infimum over levels that may lie above the search cap.
#[derive(Clone, Debug)]
pub enum LevelInfimum {
    Finite(Bisection),
    AboveCap { cap: Rat },
}

/// Largest power of two not exceeding tol/2; the shared bisection grid step.
pub fn grid_step(tol: f64) -> Rat {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut step = Rat::one();
    while to_f64(&step) > tol / 2.0 {
        step /= rat_int(2);
    }
    step
}

fn cached<V>(
    lock: &RwLock<BTreeMap<Rat, Arc<V>>>,
    key: &Rat,
    make: impl FnOnce() -> Result<V>,
) -> Result<Arc<V>> {
    if let Some(v) = lock.read().unwrap().get(key) {
        return Ok(v.clone());
    }
    let v = Arc::new(make()?);
    let mut w = lock.write().unwrap();
    Ok(w.entry(key.clone()).or_insert(v).clone())
}

impl Supremand {
    pub fn new(dim: usize, wells: Vec<Region>, norm: Norm, q: u32) -> Result<Supremand> {
        if wells.is_empty() {
            return Err(Error::EmptyInput("supremand with no wells"));
        }
        norm.validate()?;
        // Reuse the atom normalization so well indices match sublevel atoms.
        let normalized = SquareUnion::new(dim, wells)?;
        Ok(Supremand {
            dim,
            wells: normalized.atoms().to_vec(),
            norm,
            q: q.max(1),
            limits: Limits::default(),
            level_cache: RwLock::new(BTreeMap::new()),
            cover_cache: RwLock::new(BTreeMap::new()),
            hull_cache: RwLock::new(BTreeMap::new()),
            overlap_cache: RwLock::new(BTreeMap::new()),
        })
    }

    pub fn from_scene(scene: &Scene) -> Result<Supremand> {
        Supremand::new(
            scene.dim,
            scene.atoms.clone(),
            scene.norm,
            scene.growth_exponent,
        )
    }

    pub fn with_limits(mut self, limits: Limits) -> Supremand {
        self.limits = limits;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn wells(&self) -> &[Region] {
        &self.wells
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn growth_exponent(&self) -> u32 {
        self.q
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    fn check_point(&self, x: &[Rat]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Raw distance value minᵢ max(dist(ξ,Aᵢ), dist(ζ,Aᵢ)), before the
    /// growth exponent.
    pub fn eval_w_raw(&self, xi: &[Rat], zeta: &[Rat]) -> Result<f64> {
        self.check_point(xi)?;
        self.check_point(zeta)?;
        let mut best = f64::INFINITY;
        for a in &self.wells {
            let d = a
                .distance_f64(xi, self.norm)?
                .max(a.distance_f64(zeta, self.norm)?);
            best = best.min(d);
        }
        Ok(best)
    }

    /// W with the growth exponent applied.
    pub fn eval_w(&self, xi: &[Rat], zeta: &[Rat]) -> Result<f64> {
        Ok(self.eval_w_raw(xi, zeta)?.powi(self.q as i32))
    }

    /// Exact raw value in the sup norm; `None` in Euclidean mode.
    pub fn eval_w_raw_exact(&self, xi: &[Rat], zeta: &[Rat]) -> Result<Option<Rat>> {
        if self.norm != Norm::Linf {
            return Ok(None);
        }
        self.check_point(xi)?;
        self.check_point(zeta)?;
        let mut best: Option<Rat> = None;
        for a in &self.wells {
            let d = a.distance_linf(xi)?.max(a.distance_linf(zeta)?);
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
        Ok(best)
    }

    fn inflated_wells(&self, c: &Rat) -> Result<Vec<Region>> {
        self.wells.iter().map(|a| a.inflate(c, self.norm)).collect()
    }

    /// L_c(W) = ⋃ᵢ (Aᵢ)_c × (Aᵢ)_c on the raw distance scale.
    pub fn sublevel(&self, c: &Rat) -> Result<SquareUnion> {
        let atoms = self.inflated_wells(c)?;
        Ok(SquareUnion::new(self.dim, atoms)?.with_provenance(Provenance::Sublevel(c.clone())))
    }

    /// Cached sublevel geometry: maximal squares and their hulls.
    pub fn level_geometry(&self, c: &Rat) -> Result<Arc<LevelGeometry>> {
        cached(&self.level_cache, c, || {
            let sublevel = self.sublevel(c)?;
            let squares = maximal_squares(&sublevel, &self.limits)?;
            let mut hulls = Vec::with_capacity(squares.squares.len());
            let mut all_convex = true;
            for b in &squares.squares {
                let h = Region::from_polytope(b.hull()?);
                if all_convex && !crate::geometry::region_eq(b, &h)? {
                    all_convex = false;
                }
                hulls.push(h);
            }
            Ok(LevelGeometry {
                sublevel,
                squares,
                hulls,
                all_convex,
            })
        })
    }

    /// Cached convex covers of the sublevel squares at `c`: the clique
    /// hulls, whose union equals ⋃ Bᶜᵒ over maximal squares B of L_c.
    /// Membership predicates read this; reports use `level_geometry`.
    pub fn level_cover(&self, c: &Rat) -> Result<Arc<Vec<Polytope>>> {
        cached(&self.cover_cache, c, || {
            clique_hulls(self.dim, &self.inflated_wells(c)?, &self.limits)
        })
    }

    /// Cached full Cartesian hull of the sublevel set at `c`, as a family of
    /// convex squares covering it.
    pub fn level_hull(&self, c: &Rat) -> Result<Arc<LevelHull>> {
        cached(&self.hull_cache, c, || {
            let atoms = self.inflated_wells(c)?;
            if let Some(family) = hull_cover(self.dim, &atoms, HULL_MAX_ITER, &self.limits)? {
                return Ok(LevelHull {
                    squares: family.into_iter().map(Region::from_polytope).collect(),
                });
            }
            let sublevel = self.sublevel(c)?;
            let trace = cartesian_hull(&sublevel, HULL_MAX_ITER, &self.limits)?;
            if !trace.fixpoint_reached {
                return Err(Error::NonConvergence {
                    level: crate::rational::format_rational(c),
                });
            }
            Ok(LevelHull {
                squares: trace.final_squares().squares.clone(),
            })
        })
    }

    /// Pairwise well overlaps at level c: M^c = ⋃_{i≠j} (Aᵢ)_c ∩ (Aⱼ)_c.
    pub fn pairwise_overlap(&self, c: &Rat) -> Result<Arc<Option<Region>>> {
        cached(&self.overlap_cache, c, || {
            let inflated = self
                .wells
                .iter()
                .map(|a| a.inflate(c, self.norm))
                .collect::<Result<Vec<_>>>()?;
            let mut acc: Option<Region> = None;
            for i in 0..inflated.len() {
                for j in i + 1..inflated.len() {
                    if let Some(r) = inflated[i].intersect(&inflated[j])? {
                        acc = Some(match acc {
                            None => r,
                            Some(u) => u.union(&r)?,
                        });
                    }
                }
            }
            Ok(acc)
        })
    }

    /// Is (ξ,ζ) in the Cartesian hull of L_c, i.e. in B×B for some maximal
    /// square B of the hull?
    pub fn envelope_membership(&self, xi: &[Rat], zeta: &[Rat], c: &Rat) -> Result<bool> {
        let hull = self.level_hull(c)?;
        for b in &hull.squares {
            if b.contains(xi)? && b.contains(zeta)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Smallest grid level at which `pred` holds, searched on multiples of
    /// `step` with a power-of-two bracket so probe levels are shared across
    /// queries. `pred` must be monotone in the level and hold at `hi`.
    pub fn search_level(
        &self,
        hi: &Rat,
        step: &Rat,
        mut pred: impl FnMut(&Rat) -> Result<bool>,
    ) -> Result<Bisection> {
        let zero = Rat::zero();
        let mut iterations = 1usize;
        if pred(&zero)? {
            return Ok(Bisection {
                value: zero,
                iterations,
                bracket_hi: hi.clone(),
            });
        }
        let mut n_hi: u64 = 1;
        while Rat::from_integer(n_hi.into()) * step < *hi {
            n_hi *= 2;
            if n_hi > 1 << 50 {
                return Err(Error::Limit {
                    what: "bisection bracket",
                    got: 51,
                    limit: 50,
                });
            }
        }
        iterations += 1;
        if !pred(&(Rat::from_integer(n_hi.into()) * step))? {
            return Err(Error::Verification(
                "level membership fails at the certified upper bracket".into(),
            ));
        }
        let mut lo = 0u64;
        let mut hi_n = n_hi;
        while hi_n - lo > 1 {
            let mid = lo + (hi_n - lo) / 2;
            iterations += 1;
            if pred(&(Rat::from_integer(mid.into()) * step))? {
                hi_n = mid;
            } else {
                lo = mid;
            }
        }
        let mut value = Rat::from_integer(hi_n.into()) * step;
        if value > *hi {
            value = hi.clone();
        }
        Ok(Bisection {
            value,
            iterations,
            bracket_hi: hi.clone(),
        })
    }

    fn upper_bracket(&self, xi: &[Rat], zeta: &[Rat]) -> Result<Rat> {
        match self.eval_w_raw_exact(xi, zeta)? {
            Some(r) => Ok(r),
            None => {
                let w = self.eval_w_raw(xi, zeta)?;
                crate::rational::from_f64(w * (1.0 + 1e-9) + 1e-12)
                    .ok_or_else(|| Error::Invalid("non-finite distance value".into()))
            }
        }
    }

    /// The Cartesian level-convex envelope W^{×lc}(ξ,ζ) on the raw distance
    /// scale, within one grid step of the true infimum.
    pub fn eval_envelope(&self, xi: &[Rat], zeta: &[Rat], tol: f64) -> Result<Bisection> {
        self.check_point(xi)?;
        self.check_point(zeta)?;
        let hi = self.upper_bracket(xi, zeta)?;
        let step = grid_step(tol);
        self.search_level(&hi, &step, |c| self.envelope_membership(xi, zeta, c))
    }

    /// inf{c : ξ, ζ ∈ M^c} for a three-well supremand, or `AboveCap`.
    pub fn eval_w4(&self, xi: &[Rat], zeta: &[Rat], tol: f64, cap: &Rat) -> Result<LevelInfimum> {
        if self.wells.len() != 3 {
            return Err(Error::Invalid(format!(
                "pairwise-overlap infimum needs exactly 3 wells, got {}",
                self.wells.len()
            )));
        }
        self.check_point(xi)?;
        self.check_point(zeta)?;
        let pred = |c: &Rat| -> Result<bool> {
            match self.pairwise_overlap(c)?.as_ref() {
                None => Ok(false),
                Some(m) => Ok(m.contains(xi)? && m.contains(zeta)?),
            }
        };
        if !pred(cap)? {
            return Ok(LevelInfimum::AboveCap { cap: cap.clone() });
        }
        let step = grid_step(tol);
        Ok(LevelInfimum::Finite(self.search_level(cap, &step, pred)?))
    }

    /// Sampled Cartesian level convexity: every probed sublevel set must be
    /// Cartesian convex. Returns the first failing level as a witness.
    pub fn is_cartesian_level_convex(&self, levels: &[Rat]) -> Result<(bool, Option<Rat>)> {
        for c in levels {
            if !self.level_geometry(c)?.all_convex {
                return Ok((false, Some(c.clone())));
            }
        }
        Ok((true, None))
    }
}

/// Symmetrization and diagonalization of an arbitrary pairwise function:
/// Ŵ(ξ,ζ) = max{f(ξ,ζ), f(ζ,ξ), f(ξ,ξ), f(ζ,ζ)}.
pub fn eval_w_hat<F>(f: &mut F, xi: &[Rat], zeta: &[Rat]) -> Result<f64>
where
    F: FnMut(&[Rat], &[Rat]) -> Result<f64>,
{
    let mut best = f(xi, zeta)?;
    for v in [f(zeta, xi)?, f(xi, xi)?, f(zeta, zeta)?] {
        best = best.max(v);
    }
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct JensenViolation {
    pub quad: [Point; 4],
    pub alpha: Point,
    pub beta: Point,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct JensenReport {
    pub checked: usize,
    pub violations: Vec<JensenViolation>,
}

fn lerp(a: &[Rat], b: &[Rat], t: &Rat) -> Point {
    a.iter()
        .zip(b)
        .map(|(x, y)| x + t * (y - x))
        .collect()
}

/// Max-type Jensen inequality check: for quadruples (ξ₁,ξ₂,ζ₁,ζ₂) and
/// interpolation parameters (t,s), the value at (α,β) on the segment
/// product must not exceed the max of f over all 16 ordered corner pairs.
/// Cartesian level convex functions satisfy this everywhere.
pub fn check_jensen<F>(
    f: &mut F,
    quads: &[[Point; 4]],
    params: &[(Rat, Rat)],
    slack: f64,
) -> Result<JensenReport>
where
    F: FnMut(&[Rat], &[Rat]) -> Result<f64>,
{
    let mut report = JensenReport::default();
    for quad in quads {
        let corners = [&quad[0], &quad[1], &quad[2], &quad[3]];
        let mut rhs = f64::NEG_INFINITY;
        for a in &corners {
            for b in &corners {
                rhs = rhs.max(f(a, b)?);
            }
        }
        for (t, s) in params {
            let alpha = lerp(&quad[0], &quad[1], t);
            let beta = lerp(&quad[2], &quad[3], s);
            let lhs = f(&alpha, &beta)?;
            report.checked += 1;
            if lhs > rhs + slack {
                report.violations.push(JensenViolation {
                    quad: quad.clone(),
                    alpha,
                    beta,
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(report)
}

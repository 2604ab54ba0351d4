//! Worked-example checks behind the `selftest` subcommand: square counts,
//! hull traces, basic-convexification verdicts, and a handful of frozen
//! evaluation values on the named fixtures.

use crate::functional::{eval_j_rlx, SimpleFunction};
use crate::geometry::{region_eq, Polytope, Region};
use crate::hull::{all_convex, cartesian_hull, family_eq, has_basic_convexification};
use crate::rational::{rat, rat_int, Rat};
use crate::scene::fixture;
use crate::squares::{maximal_squares, Limits, SquareUnion};
use crate::supremand::{LevelInfimum, Supremand};
use crate::Result;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(x) => x,
        Err(e) => (false, e.to_string()),
    };
    Check {
        name,
        passed,
        detail,
        millis: start.elapsed().as_millis(),
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn m_points() -> Result<Region> {
    Region::points(
        2,
        &[
            vec![rat(1, 2), rat_int(1)],
            vec![rat(-1, 2), rat_int(1)],
            vec![rat_int(0), rat_int(0)],
        ],
    )
}

fn m_triangle() -> Result<Region> {
    Ok(Region::from_polytope(Polytope::hull(
        2,
        &m_points()?.point_list(),
    )?))
}

fn fixture_union(name: &str) -> Result<SquareUnion> {
    fixture(name)?.build()?.square_union()
}

fn g3_supremand() -> Result<Supremand> {
    Supremand::from_scene(&fixture("G3")?.build()?)
}

/// The three crossing segments have exactly the atom squares plus the
/// hidden square over the three crossing points.
pub fn g1_squares() -> Check {
    check("g1-squares", || {
        let scene = fixture("G1")?.build()?;
        let e = scene.square_union()?;
        let ms = maximal_squares(&e, &Limits::default())?;
        let hidden = ms.hidden.iter().filter(|h| **h).count();
        let mut expected = scene.atoms.clone();
        expected.push(m_points()?);
        let mut ok = ms.squares.len() == 4 && hidden == 1;
        ok = ok && family_eq(&ms.squares, &expected)?;
        for (b, h) in ms.squares.iter().zip(&ms.hidden) {
            if *h {
                ok = ok && region_eq(b, &m_points()?)?;
            }
        }
        Ok((ok, format!("{} squares, {hidden} hidden", ms.squares.len())))
    })
}

/// One productive hull step turns the segments into segments plus the
/// convexified crossing triangle.
pub fn g1_hull() -> Check {
    check("g1-hull", || {
        let e = fixture_union("G1")?;
        let trace = cartesian_hull(&e, 16, &Limits::default())?;
        let mut expected = e.atoms().to_vec();
        expected.push(m_triangle()?);
        let ok = trace.fixpoint_reached
            && trace.productive_steps == 1
            && family_eq(&trace.final_squares().squares, &expected)?;
        Ok((
            ok,
            format!(
                "{} productive steps, fixpoint = segments + triangle",
                trace.productive_steps
            ),
        ))
    })
}

/// The endpoint pairs need two productive steps: first to the segments,
/// then to the triangle; only the second stage is Cartesian convex.
pub fn g3_hull() -> Check {
    check("g3-hull", || {
        let e = fixture_union("G3")?;
        let trace = cartesian_hull(&e, 16, &Limits::default())?;
        let mut expected = fixture_union("G1")?.atoms().to_vec();
        expected.push(m_triangle()?);
        let ok = trace.fixpoint_reached
            && trace.productive_steps == 2
            && !all_convex(&trace.stage_squares[1])?
            && all_convex(&trace.stage_squares[2])?
            && family_eq(&trace.final_squares().squares, &expected)?;
        Ok((
            ok,
            format!(
                "{} productive steps, stage 1 not convex, stage 2 adds the triangle",
                trace.productive_steps
            ),
        ))
    })
}

pub fn basic_g2() -> Check {
    check("basic-g2", || {
        let cert = has_basic_convexification(&fixture_union("G2")?, &Limits::default())?;
        Ok((
            cert.basic && cert.witness.is_none(),
            format!("basic = {}", cert.basic),
        ))
    })
}

/// G3 is not basic: the crossing-point square appears at stage 1 without
/// being the hull of any square of the input.
pub fn basic_g3() -> Check {
    check("basic-g3", || {
        let cert = has_basic_convexification(&fixture_union("G3")?, &Limits::default())?;
        let witness_is_m = match &cert.witness {
            Some(w) => region_eq(w, &m_points()?)?,
            None => false,
        };
        Ok((
            !cert.basic && witness_is_m,
            format!("basic = {}, witness = crossing points", cert.basic),
        ))
    })
}

/// Square counts of the four-segment panels: 8 with 4 hidden, then 6 and 4
/// on the derived middle/right coordinates.
pub fn figure2_counts() -> Check {
    check("figure2-counts", || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, total, hidden) in [("G2L", 8usize, 4usize), ("G2M", 6, 2), ("G2R", 4, 0)] {
            let ms = maximal_squares(&fixture_union(name)?, &Limits::default())?;
            let h = ms.hidden.iter().filter(|x| **x).count();
            ok = ok && ms.squares.len() == total && h == hidden;
            parts.push(format!("{name} {}/{h}", ms.squares.len()));
        }
        Ok((ok, parts.join(", ")))
    })
}

/// Relaxation at the triangle corners drops from 1 (wells only) to 1/2.
pub fn corner_relaxation() -> Check {
    check("g3-corner-relaxation", || {
        let s = g3_supremand()?;
        let u = SimpleFunction::from_values(2, &m_points()?.point_list())?;
        let b = eval_j_rlx(&s, &u, 1e-6)?;
        Ok((
            b.value == rat(1, 2),
            format!("relaxed level = {}", b.value_f64()),
        ))
    })
}

/// The envelope sits strictly between 0 and W on the diagonal at (0,-1).
pub fn envelope_diagonal() -> Check {
    check("g3-envelope-diagonal", || {
        let s = g3_supremand()?;
        let x = vec![rat_int(0), rat_int(-1)];
        let b = s.eval_envelope(&x, &x, 1e-6)?;
        let w = s.eval_w(&x, &x)?;
        let ok = (b.value_f64() - 1.0 / 3.0).abs() <= 2e-6 && b.value_f64() < w;
        Ok((ok, format!("envelope = {:.7}, W = {w}", b.value_f64())))
    })
}

/// Infimal level at which the pairwise well overlaps capture (0,-1).
pub fn overlap_level() -> Check {
    check("g3-overlap-level", || {
        let s = g3_supremand()?;
        let x = vec![rat_int(0), rat_int(-1)];
        match s.eval_w4(&x, &x, 1e-6, &rat_int(2))? {
            LevelInfimum::Finite(b) => Ok((
                b.value == rat(1, 2),
                format!("overlap level = {}", b.value_f64()),
            )),
            LevelInfimum::AboveCap { .. } => Ok((false, "above cap".into())),
        }
    })
}

/// At the triangle centroid the relaxation stays strictly above the
/// envelope: the relaxation gap the three-well scene exists to show.
pub fn centroid_gap() -> Check {
    check("g3-centroid-gap", || {
        let s = g3_supremand()?;
        let c: Vec<Rat> = vec![rat_int(0), rat(2, 3)];
        let u = SimpleFunction::from_values(2, std::slice::from_ref(&c))?;
        let rlx = eval_j_rlx(&s, &u, 1e-6)?;
        let env = s.eval_envelope(&c, &c, 1e-6)?;
        let gap = rlx.value_f64() - env.value_f64();
        Ok((gap > 0.05, format!("gap = {gap:.6}")))
    })
}

pub fn fixture_checks() -> Vec<Check> {
    vec![
        g1_squares(),
        g1_hull(),
        g3_hull(),
        basic_g2(),
        basic_g3(),
        figure2_counts(),
        corner_relaxation(),
        envelope_diagonal(),
        overlap_level(),
        centroid_gap(),
    ]
}

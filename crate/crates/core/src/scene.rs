//! Scene, function, and problem descriptions: the JSON input schema and the
//! named fixtures.
//!
//! Coordinates are rational strings ("1/2", "-0.25", "3") so that exactness
//! survives serialization. A scene either names a fixture or lists explicit
//! atoms; fixtures expand to explicit atoms before any processing.

use crate::geometry::{Norm, Point, Polytope, Region};
use crate::rational::{format_rational, parse_rational, rat, Rat};
use crate::squares::SquareUnion;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneSpec {
    #[serde(default)]
    pub dim: Option<usize>,
    /// One of G1, G2, G3, G2L, G2M, G2R; overrides `atoms` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomSpec>,
    /// "linf" or "l2:k" with even k >= 8.
    #[serde(default = "default_norm")]
    pub norm: String,
    #[serde(default = "default_growth")]
    pub growth_exponent: u32,
}

fn default_norm() -> String {
    "linf".into()
}

fn default_growth() -> u32 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AtomSpec {
    /// Convex hull of the listed vertices.
    Polytope { vertices: Vec<Vec<String>> },
    /// Finite point set.
    Points { points: Vec<Vec<String>> },
    /// Union of convex pieces, each the hull of its vertex list.
    Region { pieces: Vec<Vec<Vec<String>>> },
}

/// A resolved scene: exact atoms plus evaluation settings.
#[derive(Clone, Debug)]
pub struct Scene {
    pub dim: usize,
    pub atoms: Vec<Region>,
    pub norm: Norm,
    pub growth_exponent: u32,
}

pub fn parse_point(coords: &[String], dim: usize) -> Result<Point> {
    if coords.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: coords.len(),
        });
    }
    coords
        .iter()
        .map(|s| parse_rational(s).map_err(Error::Invalid))
        .collect()
}

pub fn parse_rational_pairs(pairs: &[[String; 2]], dim: usize) -> Result<Vec<(Rat, Rat)>> {
    if pairs.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: pairs.len(),
        });
    }
    pairs
        .iter()
        .map(|[lo, hi]| {
            Ok((
                parse_rational(lo).map_err(Error::Invalid)?,
                parse_rational(hi).map_err(Error::Invalid)?,
            ))
        })
        .collect()
}

pub fn parse_norm(s: &str) -> Result<Norm> {
    let norm = if s == "linf" {
        Norm::Linf
    } else if let Some(k) = s.strip_prefix("l2:") {
        let k: u32 = k
            .parse()
            .map_err(|_| Error::Invalid(format!("bad l2 vertex count in norm {s:?}")))?;
        Norm::L2 { k }
    } else {
        return Err(Error::Invalid(format!(
            "unknown norm {s:?}; expected \"linf\" or \"l2:k\""
        )));
    };
    norm.validate()?;
    Ok(norm)
}

impl AtomSpec {
    pub fn build(&self, dim: usize) -> Result<Region> {
        match self {
            AtomSpec::Polytope { vertices } => {
                let pts = vertices
                    .iter()
                    .map(|v| parse_point(v, dim))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Region::from_polytope(Polytope::hull(dim, &pts)?))
            }
            AtomSpec::Points { points } => {
                let pts = points
                    .iter()
                    .map(|v| parse_point(v, dim))
                    .collect::<Result<Vec<_>>>()?;
                Region::points(dim, &pts)
            }
            AtomSpec::Region { pieces } => {
                let mut polys = Vec::new();
                for piece in pieces {
                    let pts = piece
                        .iter()
                        .map(|v| parse_point(v, dim))
                        .collect::<Result<Vec<_>>>()?;
                    polys.push(Polytope::hull(dim, &pts)?);
                }
                Region::new(dim, polys)
            }
        }
    }

    pub fn from_region(r: &Region) -> AtomSpec {
        let fmt = |p: &Polytope| -> Vec<Vec<String>> {
            p.verts()
                .iter()
                .map(|v| v.iter().map(format_rational).collect())
                .collect()
        };
        let pieces = r.pieces();
        if r.is_finite_point_set() && pieces.len() > 1 {
            AtomSpec::Points {
                points: r
                    .point_list()
                    .iter()
                    .map(|v| v.iter().map(format_rational).collect())
                    .collect(),
            }
        } else if pieces.len() == 1 {
            AtomSpec::Polytope {
                vertices: fmt(&pieces[0]),
            }
        } else {
            AtomSpec::Region {
                pieces: pieces.iter().map(fmt).collect(),
            }
        }
    }
}

impl SceneSpec {
    pub fn named_fixture(name: &str) -> Result<SceneSpec> {
        fixture(name)
    }

    pub fn build(&self) -> Result<Scene> {
        if let Some(name) = &self.fixture {
            let mut scene = fixture(name)?.build_atoms()?;
            scene.norm = parse_norm(&self.norm)?;
            scene.growth_exponent = self.growth_exponent.max(1);
            return Ok(scene);
        }
        self.build_atoms()
    }

    fn build_atoms(&self) -> Result<Scene> {
        let dim = self
            .dim
            .ok_or_else(|| Error::Invalid("scene needs a dim".into()))?;
        if self.atoms.is_empty() {
            return Err(Error::EmptyInput("scene with no atoms"));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| a.build(dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(Scene {
            dim,
            atoms,
            norm: parse_norm(&self.norm)?,
            growth_exponent: self.growth_exponent.max(1),
        })
    }
}

impl Scene {
    pub fn square_union(&self) -> Result<SquareUnion> {
        SquareUnion::new(self.dim, self.atoms.clone())
    }
}

fn seg_spec(a: [&str; 2], b: [&str; 2]) -> AtomSpec {
    AtomSpec::Polytope {
        vertices: vec![
            vec![a[0].into(), a[1].into()],
            vec![b[0].into(), b[1].into()],
        ],
    }
}

fn pair_spec(a: [&str; 2], b: [&str; 2]) -> AtomSpec {
    AtomSpec::Points {
        points: vec![
            vec![a[0].into(), a[1].into()],
            vec![b[0].into(), b[1].into()],
        ],
    }
}

/// The three crossing segments: endpoints (1,2)-(-1/2,-1), (-1,2)-(1/2,-1),
/// and (3/2,1)-(-3/2,1). Their pairwise crossings are (0,0) and (±1/2, 1).
fn g1_atoms() -> Vec<AtomSpec> {
    vec![
        seg_spec(["1", "2"], ["-1/2", "-1"]),
        seg_spec(["-1", "2"], ["1/2", "-1"]),
        seg_spec(["3/2", "1"], ["-3/2", "1"]),
    ]
}

pub fn fixture(name: &str) -> Result<SceneSpec> {
    let atoms: Vec<AtomSpec> = match name {
        "G1" => g1_atoms(),
        // Convex thickening of the G1 segments: each segment inflated by 1/8
        // in the sup norm. The atoms are convex hexagons with pairwise
        // nonempty intersections; the closest point to all three segments
        // sits at distance 1/4, so there is still no triple intersection.
        "G2" => {
            let base = SceneSpec {
                dim: Some(2),
                fixture: None,
                atoms: g1_atoms(),
                norm: default_norm(),
                growth_exponent: 1,
            }
            .build()?;
            let c = rat(1, 8);
            base.atoms
                .iter()
                .map(|a| Ok(AtomSpec::from_region(&a.inflate(&c, Norm::Linf)?)))
                .collect::<Result<Vec<_>>>()?
        }
        // The segment endpoints as three two-point atoms.
        "G3" => vec![
            pair_spec(["1", "2"], ["-1/2", "-1"]),
            pair_spec(["-1", "2"], ["1/2", "-1"]),
            pair_spec(["3/2", "1"], ["-3/2", "1"]),
        ],
        // Four-segment panels. The fourth segment of the left panel crosses
        // all three others away from their mutual crossings.
        "G2L" => {
            let mut v = g1_atoms();
            v.push(seg_spec(["-13/10", "2/25"], ["3/2", "6/5"]));
            v
        }
        // Middle panel: a horizontal segment at height 1/2, parallel to the
        // third, crossing only the slanted pair.
        "G2M" => {
            let mut v = g1_atoms();
            v.push(seg_spec(["-3/2", "1/2"], ["3/2", "1/2"]));
            v
        }
        // Right panel: two parallel slanted segments and two parallel
        // horizontal ones; only four crossings survive.
        "G2R" => vec![
            seg_spec(["-1/2", "-1"], ["1", "2"]),
            seg_spec(["-1", "-1"], ["1/2", "2"]),
            seg_spec(["3/2", "1"], ["-3/2", "1"]),
            seg_spec(["-3/2", "1/2"], ["3/2", "1/2"]),
        ],
        other => {
            return Err(Error::Invalid(format!(
                "unknown fixture {other:?}; expected G1, G2, G3, G2L, G2M, or G2R"
            )))
        }
    };
    Ok(SceneSpec {
        dim: Some(2),
        fixture: None,
        atoms,
        norm: default_norm(),
        growth_exponent: 1,
    })
}

/// Piecewise-constant function: weighted values with unit total weight.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub cells: Vec<CellSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellSpec {
    pub weight: String,
    pub value: Vec<String>,
}

impl FunctionSpec {
    pub fn build(&self, dim: usize) -> Result<crate::functional::SimpleFunction> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let w = parse_rational(&c.weight).map_err(Error::Invalid)?;
            cells.push((w, parse_point(&c.value, dim)?));
        }
        crate::functional::SimpleFunction::new(dim, cells)
    }

    pub fn from_function(f: &crate::functional::SimpleFunction) -> FunctionSpec {
        FunctionSpec {
            cells: f
                .cells()
                .iter()
                .map(|(w, v)| CellSpec {
                    weight: format_rational(w),
                    value: v.iter().map(format_rational).collect(),
                })
                .collect(),
        }
    }
}

/// Input for the exponent-ladder sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpProblemSpec {
    pub scene: SceneSpec,
    #[serde(default = "default_cells")]
    pub n_cells: usize,
    pub mean: Vec<String>,
    /// Exponents; strictly increasing, each >= growth exponent.
    pub ladder: Vec<u32>,
    /// Value box per coordinate, [lo, hi] pairs.
    pub value_box: Vec<[String; 2]>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_opt_iters")]
    pub max_opt_iters: usize,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_cells() -> usize {
    16
}

fn default_restarts() -> usize {
    6
}

fn default_opt_iters() -> usize {
    4000
}

fn default_penalty() -> f64 {
    1e4
}

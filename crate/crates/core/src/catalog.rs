//! Built-in reference instances and scripted reproductions of every claim
//! made about them.
//!
//! A reproduction never panics or errors on a failed check: subsolver
//! failures become failed claims carrying the error text.

use std::fmt::Display;

use serde::{Deserialize, Serialize};

use crate::certsearch::{
    self, find_excluding_aggregation, solve_linear_feasibility, verify_dual_witness,
    verify_pdlc_witness, verify_psd_combination, ExclusionOutcome, LinearOutcome, LinearRow,
    PdlcOutcome, RowSense, VarBox,
};
use crate::error::{Error, Result};
use crate::hull::{
    closed_separate, hull_membership, intersect_aggregations, sample_interior, sample_set,
    separate, Membership, SampleBox, SeparationOutcome,
};
use crate::linalg::solve;
use crate::quadcore::{
    aggregate, contains_point, evaluate, nu, QuadSystem, Sense, SymMatrix, Weights, DEFAULT_MARGIN,
    DEFAULT_NU_TOL,
};
use crate::sdprank::{
    extract_strict_point, is_strict_point, StrictPointOptions, StrictPointOutcome,
};
use crate::spectral::{is_psd, min_eigenvalue};

pub const INSTANCE_IDS: [&str; 6] = [
    "example1-open",
    "example1-closed",
    "fourquad",
    "nonpdlc",
    "infinite-agg",
    "slemma-diag",
];

/// Grid used for the PDLC search on instances without a PDLC.
pub const NONPDLC_GRID: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogInstance {
    pub id: &'static str,
    pub title: &'static str,
    pub system: QuadSystem,
    /// Box that contains the set, used for rejection sampling.
    pub sample_box: SampleBox,
    pub points: Vec<(&'static str, Vec<f64>)>,
    pub weights: Vec<(&'static str, Vec<f64>)>,
}

impl CatalogInstance {
    pub fn point(&self, label: &str) -> Option<&[f64]> {
        self.points
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, p)| p.as_slice())
    }

    pub fn weight(&self, label: &str) -> Option<&[f64]> {
        self.weights
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, w)| w.as_slice())
    }
}

fn diag3(a: f64, b: f64, c: f64) -> SymMatrix {
    SymMatrix::diag(&[a, b, c])
}

fn example1_system(sense: Sense) -> QuadSystem {
    QuadSystem::from_parts(
        sense,
        vec![
            (diag3(1.0, 1.0, 0.0), vec![0.0; 3], -2.0),
            (diag3(-1.0, -1.0, 0.0), vec![0.0; 3], 1.0),
            (diag3(-1.0, 1.0, 1.0), vec![3.0, 0.0, 0.0], 0.0),
        ],
    )
    .expect("static instance")
}

fn fourquad_system() -> QuadSystem {
    let a1 = SymMatrix::from_rows(&[
        vec![1.0, 1.1, 1.1],
        vec![1.1, 1.0, 1.1],
        vec![1.1, 1.1, 1.0],
    ])
    .expect("symmetric");
    QuadSystem::from_parts(
        Sense::Strict,
        vec![
            (a1, vec![0.0; 3], -1.0),
            (diag3(-2.1, 1.0, 1.0), vec![0.0; 3], 0.0),
            (diag3(1.0, -2.1, 1.0), vec![0.0; 3], 0.0),
            (diag3(1.0, 1.0, -2.1), vec![0.0; 3], 0.0),
        ],
    )
    .expect("static instance")
}

fn nonpdlc_system() -> QuadSystem {
    let a3 = SymMatrix::from_rows(&[
        vec![0.0, -0.5, 0.0],
        vec![-0.5, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])
    .expect("symmetric");
    QuadSystem::from_parts(
        Sense::Strict,
        vec![
            (diag3(1.0, 0.0, 0.0), vec![0.0; 3], -1.0),
            (diag3(0.0, 1.0, 0.0), vec![0.0; 3], -1.0),
            (a3, vec![0.0; 3], 0.0),
        ],
    )
    .expect("static instance")
}

/// `(x1-1)^2 + (x2-1)^2 >= 1` is stored negated as
/// `-x1^2 - x2^2 + 2x1 + 2x2 - 1 <= 0`.
fn infinite_agg_system() -> QuadSystem {
    QuadSystem::from_parts(
        Sense::Nonstrict,
        vec![
            (SymMatrix::diag(&[1.0, 0.0]), vec![0.0; 2], -1.0),
            (SymMatrix::diag(&[0.0, 1.0]), vec![0.0; 2], -1.0),
            (SymMatrix::diag(&[-1.0, -1.0]), vec![1.0, 1.0], -1.0),
        ],
    )
    .expect("static instance")
}

/// Homogenized matrices `diag(-1,0,0)`, `diag(0,-1,0)`, `diag(0,0,-1)`.
fn slemma_diag_system() -> QuadSystem {
    QuadSystem::from_parts(
        Sense::Strict,
        vec![
            (SymMatrix::diag(&[-1.0, 0.0]), vec![0.0; 2], 0.0),
            (SymMatrix::diag(&[0.0, -1.0]), vec![0.0; 2], 0.0),
            (SymMatrix::zeros(2), vec![0.0; 2], -1.0),
        ],
    )
    .expect("static instance")
}

fn bx(lo: &[f64], hi: &[f64]) -> SampleBox {
    SampleBox::new(lo.to_vec(), hi.to_vec()).expect("static box")
}

pub fn load_instance(id: &str) -> Result<CatalogInstance> {
    let inst = match id {
        "example1-open" | "example1-closed" => {
            let closed = id == "example1-closed";
            let mut weights = vec![
                ("theta", vec![-12.0, -15.0, 1.0]),
                ("e1", vec![1.0, 0.0, 0.0]),
                ("e3", vec![0.0, 0.0, 1.0]),
                ("hull-agg", vec![0.0, 1.0, 1.0]),
            ];
            if closed {
                weights.push(("left-branch", vec![0.0, 0.5, 0.5]));
                weights.push(("right-branch", vec![1.0, 0.0, 1.0]));
            }
            CatalogInstance {
                id: if closed {
                    "example1-closed"
                } else {
                    "example1-open"
                },
                title: if closed {
                    "closed version of the three-quadratic example with PDLC"
                } else {
                    "three quadratics with PDLC whose hull needs one extra aggregation"
                },
                system: example1_system(if closed {
                    Sense::Nonstrict
                } else {
                    Sense::Strict
                }),
                sample_box: bx(&[-1.5, -1.5, -3.3], &[1.5, 1.5, 3.3]),
                points: vec![
                    ("outside", vec![2.0, 0.0, 0.0]),
                    ("cut-by-hull-agg", vec![-0.1, 0.0, 0.0]),
                ],
                weights,
            }
        }
        "fourquad" => CatalogInstance {
            id: "fourquad",
            title: "four quadratics with PDLC whose hull is not given by aggregations",
            system: fourquad_system(),
            sample_box: bx(&[-8.0; 3], &[8.0; 3]),
            points: vec![
                (
                    "x1",
                    vec![1207.0 / 1000.0, -117.0 / 4000.0, -117.0 / 4000.0],
                ),
                ("x2", vec![10.0, -5.0, -5.0]),
                (
                    "xt1",
                    vec![1207.0 / 1000.0, 1207.0 / 1000.0, -2531.0 / 2000.0],
                ),
                (
                    "xt2",
                    vec![1207.0 / 1000.0, -2531.0 / 2000.0, 1207.0 / 1000.0],
                ),
            ],
            weights: vec![("theta", vec![-1.0, -40.0, -40.0, -40.0])],
        },
        "nonpdlc" => CatalogInstance {
            id: "nonpdlc",
            title: "three quadratics without PDLC whose hull is not given by aggregations",
            system: nonpdlc_system(),
            sample_box: bx(&[-1.0; 3], &[1.0; 3]),
            points: vec![
                ("exclude", vec![-0.5, 0.5, 0.5]),
                ("keep", vec![0.0, 0.0, 7.0 / 8.0]),
            ],
            weights: vec![],
        },
        "infinite-agg" => CatalogInstance {
            id: "infinite-agg",
            title: "planar set whose hull needs infinitely many aggregations",
            system: infinite_agg_system(),
            sample_box: bx(&[-1.0; 2], &[1.0; 2]),
            points: vec![],
            weights: vec![],
        },
        "slemma-diag" => CatalogInstance {
            id: "slemma-diag",
            title: "diagonal homogeneous triple with a common strict point",
            system: slemma_diag_system(),
            sample_box: bx(&[-2.0; 2], &[2.0; 2]),
            points: vec![],
            weights: vec![("theta", vec![-1.0, -1.0, -1.0])],
        },
        other => return Err(Error::UnknownInstance(other.to_string())),
    };
    Ok(inst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub description: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: f64,
    pub passed: bool,
}

impl Claim {
    pub fn new(
        id: &str,
        description: &str,
        expected: impl Display,
        computed: impl Display,
        tolerance: f64,
        passed: bool,
    ) -> Self {
        Claim {
            id: id.to_string(),
            description: description.to_string(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            tolerance,
            passed,
        }
    }

    fn failed(id: &str, description: &str, err: Error) -> Self {
        Claim::new(
            id,
            description,
            "no error",
            format!("error: {err}"),
            0.0,
            false,
        )
    }
}

/// Runs `f`, converting an error into a failed claim.
fn guarded(id: &str, description: &str, f: impl FnOnce() -> Result<Claim>) -> Claim {
    f().unwrap_or_else(|e| Claim::failed(id, description, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub instance: String,
    pub claims: Vec<Claim>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    /// One line per claim.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.claims {
            s.push_str(&format!(
                "[{}] {}/{}: expected {}, computed {} (tol {:e})\n",
                if c.passed { "PASS" } else { "FAIL" },
                self.instance,
                c.id,
                c.expected,
                c.computed,
                c.tolerance
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReproduceConfig {
    pub seed: u64,
    /// Rejection-sampling proposals per sampling claim.
    pub samples: usize,
    pub pdlc_grid: usize,
    pub simplex_grid: usize,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig {
            seed: 0,
            samples: crate::hull::DEFAULT_PROPOSALS,
            pdlc_grid: certsearch::DEFAULT_PDLC_GRID,
            simplex_grid: certsearch::DEFAULT_SIMPLEX_GRID,
        }
    }
}

pub fn reproduce(id: &str, cfg: &ReproduceConfig) -> Result<Report> {
    let inst = load_instance(id)?;
    let claims = match inst.id {
        "example1-open" => example1_open_claims(&inst, cfg),
        "example1-closed" => example1_closed_claims(&inst, cfg),
        "fourquad" => fourquad_claims(&inst, cfg),
        "nonpdlc" => nonpdlc_claims(&inst, cfg),
        "infinite-agg" => infinite_agg_claims(&inst, cfg),
        "slemma-diag" => slemma_diag_claims(&inst, cfg),
        _ => unreachable!("load_instance validated the id"),
    };
    Ok(Report {
        instance: inst.id.to_string(),
        claims,
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn max_abs_diff(a: &SymMatrix, b: &SymMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn example1_open_claims(inst: &CatalogInstance, cfg: &ReproduceConfig) -> Vec<Claim> {
    let sys = &inst.system;
    let ms = sys.homogenized();
    let mut out = Vec::new();

    out.push(guarded("theta-combination", "the combination (-12,-15,1) of the homogenized matrices", || {
        let theta = inst.weight("theta").expect("annotated");
        let comb = SymMatrix::combination(theta, &ms);
        let expected = SymMatrix::from_rows(&[
            vec![2.0, 0.0, 0.0, 3.0],
            vec![0.0, 4.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![3.0, 0.0, 0.0, 9.0],
        ])?;
        let diff = max_abs_diff(&comb, &expected);
        let lmin = min_eigenvalue(&comb)?;
        Ok(Claim::new(
            "theta-combination",
            "the combination equals [[2,0,0,3],[0,4,0,0],[0,0,1,0],[3,0,0,9]] and is positive definite",
            "exact match, lambda_min > 0",
            format!("max entry error {diff:e}, lambda_min {lmin:.6}"),
            0.0,
            diff == 0.0 && lmin > 0.0,
        ))
    }));

    out.push(guarded(
        "pdlc-search",
        "PDLC search finds a witness",
        || {
            let computed = certsearch::check_pdlc(&ms, cfg.pdlc_grid)?;
            Ok(match computed {
                PdlcOutcome::Witness(w) => {
                    let ok = w.margin > 1e-4 && verify_pdlc_witness(&ms, &w);
                    Claim::new(
                        "pdlc-search",
                        "PDLC search finds a witness",
                        "witness with margin > 1e-4",
                        format!("theta {} margin {:.6}", fmt_vec(&w.theta), w.margin),
                        1e-4,
                        ok,
                    )
                }
                other => Claim::new(
                    "pdlc-search",
                    "PDLC search finds a witness",
                    "witness",
                    format!("{other:?}"),
                    1e-4,
                    false,
                ),
            })
        },
    ));

    let hull_lams: Vec<Weights> = ["e1", "e3", "hull-agg"]
        .iter()
        .map(|l| {
            Weights::nonnegative(inst.weight(l).expect("annotated").to_vec()).expect("nonnegative")
        })
        .collect();

    out.push(guarded(
        "hull-description",
        "sampled points of S satisfy the three hull aggregations",
        || {
            let hull = sample_set(sys, &inst.sample_box, cfg.samples, cfg.seed)?;
            let mut bad = 0usize;
            for p in hull.points() {
                if !intersect_aggregations(sys, &hull_lams, p, DEFAULT_MARGIN)? {
                    bad += 1;
                }
            }
            Ok(Claim::new(
                "hull-description",
                "every sampled point of S lies in S_e1, S_e3 and S_(0,1,1)",
                ">= 10000 samples, 0 violations",
                format!("{} samples, {bad} violations", hull.len()),
                DEFAULT_MARGIN,
                hull.len() >= 10_000 && bad == 0,
            ))
        },
    ));

    out.push(guarded(
        "nu-values",
        "negative eigenvalue counts of the hull aggregations",
        || {
            let nus = hull_lams
                .iter()
                .map(|l| nu(&aggregate(sys, l)?, DEFAULT_NU_TOL))
                .collect::<Result<Vec<_>>>()?;
            Ok(Claim::new(
                "nu-values",
                "nu of the aggregations e1, e3, (0,1,1)",
                "[0, 1, 1]",
                format!("{nus:?}"),
                DEFAULT_NU_TOL,
                nus == [0, 1, 1],
            ))
        },
    ));

    out.push(guarded(
        "hull-agg-cut",
        "(-0.1,0,0) violates the (0,1,1) aggregation",
        || {
            let p = inst.point("cut-by-hull-agg").expect("annotated");
            let v = evaluate(&aggregate(sys, &hull_lams[2])?, p)?;
            let inside = intersect_aggregations(sys, &hull_lams, p, DEFAULT_MARGIN)?;
            Ok(Claim::new(
                "hull-agg-cut",
                "value of -2x1^2 + x3^2 + 6x1 + 1 at (-0.1,0,0); the point is excluded",
                "0.38, excluded",
                format!(
                    "{v:.15}, {}",
                    if inside { "not excluded" } else { "excluded" }
                ),
                1e-12,
                (v - 0.38).abs() <= 1e-12 && !inside,
            ))
        },
    ));

    out.push(guarded(
        "separation",
        "separation certificate for (2,0,0) with x1 <= 1.5",
        || {
            let hull = sample_set(sys, &inst.sample_box, cfg.samples.min(200_000), cfg.seed)?;
            let q = inst.point("outside").expect("annotated");
            let res = separate(sys, q, &[1.0, 0.0, 0.0], 1.5, &hull, cfg.simplex_grid)?;
            Ok(match res {
                SeparationOutcome::Certificate(c) => Claim::new(
                    "separation",
                    "separation certificate for (2,0,0) with x1 <= 1.5",
                    "certificate passing all checks, homogenized nu = 1",
                    format!(
                        "lambda {} value {:.6} nu_h {}",
                        fmt_vec(c.lambda.values()),
                        c.query_value,
                        c.nu_homogenized
                    ),
                    1e-9,
                    c.checks.all() && c.nu_homogenized == 1,
                ),
                SeparationOutcome::NoAggregation { detail } => Claim::new(
                    "separation",
                    "separation certificate for (2,0,0) with x1 <= 1.5",
                    "certificate",
                    detail,
                    1e-9,
                    false,
                ),
            })
        },
    ));
    out
}

fn example1_closed_claims(inst: &CatalogInstance, cfg: &ReproduceConfig) -> Vec<Claim> {
    let sys = &inst.system;
    let mut out = Vec::new();
    out.push(guarded(
        "closed-separation",
        "closed separation of (2,0,0) with x1 <= 1.5",
        || {
            let hull = sample_interior(sys, &inst.sample_box, cfg.samples.min(200_000), cfg.seed)?;
            let q = inst.point("outside").expect("annotated");
            let res = closed_separate(sys, q, &[1.0, 0.0, 0.0], 1.5, &hull, cfg.simplex_grid)?;
            Ok(match res {
                SeparationOutcome::Certificate(c) => Claim::new(
                    "closed-separation",
                    "closed separation of (2,0,0) with x1 <= 1.5",
                    "certificate passing all checks",
                    format!(
                        "lambda {} value {:.6}",
                        fmt_vec(c.lambda.values()),
                        c.query_value
                    ),
                    1e-9,
                    c.checks.all(),
                ),
                SeparationOutcome::NoAggregation { detail } => Claim::new(
                    "closed-separation",
                    "closed separation",
                    "certificate",
                    detail,
                    1e-9,
                    false,
                ),
            })
        },
    ));
    out.extend(verify_sdp_tightness_gap(cfg));
    out
}

/// `(3 - sqrt(11)) / 2`, the aggregation bound on `x1` over the closed set.
pub fn tightness_bound() -> f64 {
    0.5 * (3.0 - 11f64.sqrt())
}

/// Aggregation bound on `x1`, sampled maximum of `x1`, and the SDP point
/// with objective `1/3`.
pub fn verify_sdp_tightness_gap(cfg: &ReproduceConfig) -> Vec<Claim> {
    let sys = example1_system(Sense::Nonstrict);
    let bound = tightness_bound();
    let mut out = Vec::new();

    out.push(guarded(
        "left-branch-aggregation",
        "multipliers (0,1/2,1/2)",
        || {
            let agg = aggregate(&sys, &Weights::nonnegative(vec![0.0, 0.5, 0.5])?)?;
            let exact = agg.a == diag3(-1.0, 0.0, 0.5) && agg.b == [1.5, 0.0, 0.0] && agg.c == 0.5;
            let root = -2.0 * bound * bound + 6.0 * bound + 1.0;
            Ok(Claim::new(
                "left-branch-aggregation",
                "(0,1/2,1/2) gives -x1^2 + x3^2/2 + 3x1 + 1/2 <= 0, whose x3 = 0 roots bound x1",
                format!("exact coefficients, root {bound:.12} of -2t^2+6t+1"),
                format!(
                    "coefficients {}, residual {root:e}",
                    if exact { "exact" } else { "differ" }
                ),
                1e-12,
                exact && root.abs() <= 1e-12,
            ))
        },
    ));

    out.push(guarded("right-branch-aggregation", "multipliers (1,0,1)", || {
        let agg = aggregate(&sys, &Weights::nonnegative(vec![1.0, 0.0, 1.0])?)?;
        let exact = agg.a == diag3(0.0, 2.0, 1.0) && agg.b == [3.0, 0.0, 0.0] && agg.c == -2.0;
        let right = 0.5 * (3.0 + 11f64.sqrt());
        let cap = -agg.c / (2.0 * agg.b[0]);
        Ok(Claim::new(
            "right-branch-aggregation",
            "(1,0,1) gives 2x2^2 + x3^2 + 6x1 <= 2, so x1 <= 1/3 rules out x1 >= (3+sqrt(11))/2",
            "exact coefficients, 1/3 < (3+sqrt(11))/2",
            format!("coefficients {}, cap {cap:.6} vs {right:.6}", if exact { "exact" } else { "differ" }),
            0.0,
            exact && cap == 1.0 / 3.0 && cap < right,
        ))
    }));

    out.push(guarded(
        "sampled-max-x1",
        "sampled maximum of x1 over T near the maximizer",
        || {
            // box around the maximizer, using the x2 -> -x2, x3 -> -x3 symmetry
            let near = SampleBox::new(vec![-0.2, 0.9, 0.0], vec![0.0, 1.05, 0.15])?;
            let hull = sample_set_with(&sys, &near, cfg.samples, cfg.seed)?;
            let best = hull.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok(Claim::new(
                "sampled-max-x1",
                "largest sampled x1 lies in [bound - 2e-3, bound + 1e-6]",
                format!("{bound:.6}"),
                format!("{best:.6} from {} points", hull.len()),
                2e-3,
                best >= bound - 2e-3 && best <= bound + 1e-6,
            ))
        },
    ));

    out.push(guarded(
        "sampled-bound",
        "no sampled point of T exceeds the bound",
        || {
            let wide = SampleBox::new(vec![-1.5, -1.5, -3.3], vec![1.5, 1.5, 3.3])?;
            let hull = sample_set_with(&sys, &wide, cfg.samples, cfg.seed.wrapping_add(1))?;
            let best = hull.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            Ok(Claim::new(
                "sampled-bound",
                "every sampled x1 over the enclosing box is at most the bound",
                format!("<= {bound:.6}"),
                format!("{best:.6} from {} points", hull.len()),
                1e-6,
                !hull.is_empty() && best <= bound + 1e-6,
            ))
        },
    ));

    out.push(guarded("sdp-point", "moment matrix with x1 = 1/3", || {
        let y = SymMatrix::from_rows(&[
            vec![1.0, 1.0 / 3.0, 0.0, 0.0],
            vec![1.0 / 3.0, 2.0, 0.0, 0.0],
            vec![0.0; 4],
            vec![0.0; 4],
        ])?;
        let psd = is_psd(&y, 1e-12)?;
        let det = 2.0 - 1.0 / 9.0;
        let (x11, x22, x33, x1) = (y.get(1, 1), y.get(2, 2), y.get(3, 3), y.get(0, 1));
        let feas = x11 + x22 <= 2.0 && -x11 - x22 <= -1.0 && -x11 + x22 + x33 + 6.0 * x1 <= 1e-15;
        Ok(Claim::new(
            "sdp-point",
            "[[1,1/3,0,0],[1/3,2,0,0],0,0] is PSD, meets the lifted constraints, objective 1/3",
            "PSD, feasible, objective 1/3 > 0",
            format!("psd {psd}, leading 2x2 det {det:.6}, feasible {feas}, objective {x1:.6}"),
            1e-12,
            psd && det > 0.0 && feas && x1 == 1.0 / 3.0,
        ))
    }));
    out
}

fn sample_set_with(
    sys: &QuadSystem,
    b: &SampleBox,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    Ok(sample_set(sys, b, count, seed)?.points().to_vec())
}

/// `lambda_min` of the sign-pattern matrices, worst value first.
pub fn fourquad_pattern_matrices() -> Vec<([f64; 3], SymMatrix)> {
    // q12 * q13 * q23 = sgn(x1^2 x2^2 x3^2) = 1
    let patterns = [
        [1.0, 1.0, 1.0],
        [-1.0, -1.0, 1.0],
        [-1.0, 1.0, -1.0],
        [1.0, -1.0, -1.0],
    ];
    patterns
        .iter()
        .map(|q| {
            let off = |s: f64| 11.0 / 20.0 - 31.0 / 60.0 * s;
            let m = SymMatrix::from_rows(&[
                vec![1.5, off(q[0]), off(q[1])],
                vec![off(q[0]), 1.5, off(q[2])],
                vec![off(q[1]), off(q[2]), 1.5],
            ])
            .expect("symmetric");
            (*q, m)
        })
        .collect()
}

pub fn fourquad_worst_lambda_min() -> f64 {
    22.0 / (15.0 * (8193f64.sqrt() + 91.0))
}

/// The analytic chain bounding the four-quadratic set by `[-8, 8]^3`.
pub fn verify_fourquad_boundedness() -> Vec<Claim> {
    let sys = fourquad_system();
    let mut out = Vec::new();

    out.push(guarded(
        "min-relaxation",
        "constraints 2..4 read |x|^2 < 3.1 x_i^2",
        || {
            let mut worst = 0.0f64;
            for (i, q) in sys.constraints()[1..].iter().enumerate() {
                let mut d = vec![1.0; 3];
                d[i] -= 3.1;
                let target = SymMatrix::diag(&d);
                worst = worst.max(max_abs_diff(&q.a, &target)).max(q.c.abs());
            }
            Ok(Claim::new(
                "min-relaxation",
                "each of constraints 2..4 equals |x|^2 - 3.1 x_i^2",
                "coefficient error 0",
                format!("{worst:e}"),
                1e-15,
                worst <= 1e-15,
            ))
        },
    ));

    let pats = fourquad_pattern_matrices();
    out.push(guarded("pattern-matrices", "Q = A1/2 + I - (31/60) P for each sign pattern", || {
        let a1 = &sys.constraints()[0].a;
        let mut worst = 0.0f64;
        for (q, m) in &pats {
            let p = SymMatrix::from_rows(&[vec![0.0, q[0], q[1]], vec![q[0], 0.0, q[2]], vec![q[1], q[2], 0.0]])?;
            let built = a1.scaled(0.5).add(&SymMatrix::identity(3)).sub(&p.scaled(31.0 / 60.0));
            worst = worst.max(max_abs_diff(&built, m));
        }
        Ok(Claim::new(
            "pattern-matrices",
            "the four sign-pattern matrices come from half the first constraint plus the relaxation",
            "entry error <= 1e-15",
            format!("{worst:e}"),
            1e-15,
            worst <= 1e-15,
        ))
    }));

    out.push(guarded("worst-lambda-min", "smallest eigenvalue over the sign patterns", || {
        let mins = pats.iter().map(|(_, m)| min_eigenvalue(m)).collect::<Result<Vec<_>>>()?;
        let worst = mins.iter().cloned().fold(f64::INFINITY, f64::min);
        let closed = fourquad_worst_lambda_min();
        let all_pos = mins[0] > worst;
        Ok(Claim::new(
            "worst-lambda-min",
            "min over patterns of lambda_min(Q) equals 22/(15(sqrt(8193)+91)) > 8/1000; all-positive pattern is larger",
            format!("{closed:.15}"),
            format!("{worst:.15} (all-positive pattern {:.6})", mins[0]),
            1e-12,
            (worst - closed).abs() <= 1e-12 && worst > 8.0 / 1000.0 && all_pos,
        ))
    }));

    out.push(guarded(
        "box-radius",
        "radius bound of the ellipsoid x'Qx <= 1/2",
        || {
            let worst = pats
                .iter()
                .map(|(_, m)| min_eigenvalue(&m.scaled(2.0)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let r = 1.0 / worst.sqrt();
            let cap = (1000.0f64 / 16.0).sqrt();
            Ok(Claim::new(
                "box-radius",
                "1/sqrt(lambda_min(2Q)) <= sqrt(1000/16) < 8",
                format!("<= {cap:.6} < 8"),
                format!("{r:.6}"),
                0.0,
                r <= cap && cap < 8.0,
            ))
        },
    ));
    out
}

/// Largest `lambda_min(sum w_i A_i)` over the grid `{w >= 0, sum w = 1}` with
/// step `1/steps`; exhaustive, so only for a handful of small matrices.
pub fn best_simplex_grid(mats: &[SymMatrix], steps: usize) -> Result<(Vec<f64>, f64)> {
    let m = mats.len();
    let mut best = (vec![0.0; m], f64::NEG_INFINITY);
    let mut counts = vec![0usize; m];
    fn rec(
        k: usize,
        left: usize,
        steps: usize,
        counts: &mut Vec<usize>,
        mats: &[SymMatrix],
        best: &mut (Vec<f64>, f64),
    ) -> Result<()> {
        if k + 1 == counts.len() {
            counts[k] = left;
            let w: Vec<f64> = counts.iter().map(|c| *c as f64 / steps as f64).collect();
            let v = min_eigenvalue(&SymMatrix::combination(&w, mats))?;
            if v > best.1 {
                *best = (w, v);
            }
            return Ok(());
        }
        for c in 0..=left {
            counts[k] = c;
            rec(k + 1, left - c, steps, counts, mats, best)?;
        }
        Ok(())
    }
    rec(0, steps, steps, &mut counts, mats, &mut best)?;
    Ok(best)
}

/// The approximate linear system printed for the four-quadratic exclusion.
pub fn fourquad_approximate_rows() -> Vec<LinearRow> {
    vec![
        LinearRow::new(vec![0.3051, -3.0576, 1.4559, 1.4559], RowSense::Lt, 0.0),
        LinearRow::new(vec![-16.0, -160.0, 72.5, 72.5], RowSense::Gt, 0.0),
        LinearRow::new(vec![1.0; 4], RowSense::Eq, 1.0),
    ]
}

fn fourquad_claims(inst: &CatalogInstance, cfg: &ReproduceConfig) -> Vec<Claim> {
    let sys = &inst.system;
    let (x1, x2) = (
        inst.point("x1").expect("annotated"),
        inst.point("x2").expect("annotated"),
    );
    let (xt1, xt2) = (
        inst.point("xt1").expect("annotated"),
        inst.point("xt2").expect("annotated"),
    );
    let mut out = Vec::new();

    out.push(guarded(
        "pdlc",
        "theta = (-1,-40,-40,-40) gives a positive definite combination",
        || {
            let theta = inst.weight("theta").expect("annotated");
            let lmin = min_eigenvalue(&SymMatrix::combination(theta, &sys.homogenized()))?;
            Ok(Claim::new(
                "pdlc",
                "theta = (-1,-40,-40,-40) combination",
                "lambda_min > 0",
                format!("{lmin:.6}"),
                0.0,
                lmin > 0.0,
            ))
        },
    ));

    out.push(guarded(
        "midpoint-inside",
        "x1 is the midpoint of two points of S",
        || {
            let vals: Vec<f64> = sys
                .values(xt1)?
                .into_iter()
                .chain(sys.values(xt2)?)
                .collect();
            let mid: Vec<f64> = xt1.iter().zip(xt2).map(|(a, b)| 0.5 * (a + b)).collect();
            let err = mid
                .iter()
                .zip(x1)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let worst = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok(Claim::new(
                "midpoint-inside",
                "all eight evaluations at the two points are negative and their midpoint is x1",
                "max value < 0, midpoint error <= 1e-15",
                format!("max value {worst:e}, midpoint error {err:e}"),
                1e-15,
                worst < 0.0 && err <= 1e-15,
            ))
        },
    ));

    out.push(guarded(
        "exact-exclusion",
        "no lambda >= 0 keeps x1 and excludes x2",
        || {
            Ok(match find_excluding_aggregation(sys, x1, x2)? {
                ExclusionOutcome::Infeasible(cert) => {
                    let (rows, bounds) = certsearch::exclusion_rows(sys, x1, x2)?;
                    let mut rows = rows;
                    rows[0].sense = RowSense::Ge;
                    Claim::new(
                        "exact-exclusion",
                        "the exclusion system built from x1, x2 is infeasible",
                        "verified Farkas certificate",
                        format!("multipliers {}", fmt_vec(&cert.multipliers)),
                        1e-9,
                        cert.verify(&rows, &bounds),
                    )
                }
                ExclusionOutcome::Aggregation(w) => Claim::new(
                    "exact-exclusion",
                    "the exclusion system built from x1, x2 is infeasible",
                    "infeasible",
                    format!("found lambda {}", fmt_vec(w.values())),
                    1e-9,
                    false,
                ),
            })
        },
    ));

    out.push(guarded("approximate-certificate", "certificate for the printed approximate system", || {
        let rows = fourquad_approximate_rows();
        let bounds = VarBox::nonnegative(4);
        Ok(match solve_linear_feasibility(&rows, Some(&bounds))? {
            LinearOutcome::Infeasible(cert) => {
                let s = cert.derived.coeffs[0];
                let y: Vec<f64> = cert.multipliers.iter().map(|v| v / s).collect();
                let rhs = cert.derived.rhs / s;
                let target = [1.7629, -0.0342, -0.0854];
                let err = y.iter().zip(target).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                Claim::new(
                    "approximate-certificate",
                    "weights normalized to a unit lambda_1 coefficient match (1.7629,-0.0342,-0.0854) and derive lambda_1 < -0.085",
                    "weight error <= 1e-2, bound -0.085 +- 5e-3",
                    format!("weights {}, bound {rhs:.5}", fmt_vec(&y)),
                    1e-2,
                    cert.verify(&rows, &bounds) && err <= 1e-2 && (rhs + 0.085).abs() <= 5e-3,
                )
            }
            LinearOutcome::Feasible(x) => Claim::new(
                "approximate-certificate",
                "approximate system is infeasible",
                "infeasible",
                format!("feasible at {}", fmt_vec(&x)),
                1e-2,
                false,
            ),
        })
    }));

    out.extend(verify_fourquad_boundedness());

    out.push(guarded("sampled-box", "sampled points stay in [-1.3,1.3]^3", || {
        let wide = sample_set(sys, &inst.sample_box, cfg.samples, cfg.seed)?;
        // denser pass; still wider than the claimed box
        let dense = sample_set(sys, &bx(&[-1.5; 3], &[1.5; 3]), cfg.samples, cfg.seed.wrapping_add(1))?;
        let pts: Vec<&Vec<f64>> = wide.points().iter().chain(dense.points()).collect();
        let radius = pts.iter().map(|p| p.iter().fold(0.0f64, |m, v| m.max(v.abs()))).fold(0.0f64, f64::max);
        let pats = fourquad_pattern_matrices();
        let mut relax_bad = 0usize;
        for p in &pts {
            let sq: Vec<f64> = p.iter().map(|v| v * v).collect();
            let n2: f64 = sq.iter().sum();
            let min_sq = sq.iter().cloned().fold(f64::INFINITY, f64::min);
            let sg = |i: usize, j: usize| if p[i] * p[j] >= 0.0 { 1.0 } else { -1.0 };
            let key = [sg(0, 1), sg(0, 2), sg(1, 2)];
            // a zero coordinate can give an inconsistent key; such points have measure zero
            let Some((_, q)) = pats.iter().find(|(k, _)| *k == key) else { continue };
            if n2 >= 3.1 * min_sq || q.quad_form(p) >= 0.5 {
                relax_bad += 1;
            }
        }
        let mut hull = dense;
        hull.add_point(sys, xt1.to_vec())?;
        hull.add_point(sys, xt2.to_vec())?;
        let inside = matches!(hull_membership(&hull, x1)?, Membership::Inside { .. });
        let outside = matches!(hull_membership(&hull, x2)?, Membership::OutsideSampledHull { .. });
        Ok(Claim::new(
            "sampled-box",
            "samples from [-8,8]^3 and [-1.5,1.5]^3 lie in [-1.3,1.3]^3 and obey the relaxation; x1 inside, x2 outside the sampled hull",
            "radius <= 1.3, 0 relaxation violations, inside, outside",
            format!(
                "{} + {} samples, radius {radius:.4}, {relax_bad} violations, x1 {}, x2 {}",
                wide.len(),
                hull.len() - 2,
                if inside { "inside" } else { "not inside" },
                if outside { "outside" } else { "not outside" }
            ),
            0.0,
            !wide.is_empty() && radius <= 1.3 && relax_bad == 0 && inside && outside,
        ))
    }));

    out.push(guarded(
        "no-pd-nonnegative",
        "no nonnegative combination of the A_i is positive definite",
        || {
            let mats: Vec<SymMatrix> = sys.constraints().iter().map(|q| q.a.clone()).collect();
            let (w, v) = best_simplex_grid(&mats, cfg.simplex_grid)?;
            Ok(Claim::new(
                "no-pd-nonnegative",
                "largest lambda_min of sum w_i A_i over the simplex grid",
                "<= 0",
                format!("{v:.6} at {}", fmt_vec(&w)),
                0.0,
                v <= 0.0,
            ))
        },
    ));
    out
}

fn nonpdlc_claims(inst: &CatalogInstance, cfg: &ReproduceConfig) -> Vec<Claim> {
    let sys = &inst.system;
    let ms = sys.homogenized();
    let mut out = Vec::new();

    out.push(guarded(
        "no-pdlc",
        "PDLC search returns no positive witness",
        || {
            let res = certsearch::check_pdlc(&ms, NONPDLC_GRID)?;
            let (computed, ok) = match &res {
                PdlcOutcome::Witness(w) => (format!("witness {}", fmt_vec(&w.theta)), false),
                PdlcOutcome::Dual(d) => {
                    ("dual witness".to_string(), verify_dual_witness(&ms, &d.w))
                }
                PdlcOutcome::Inconclusive { best_value, .. } => {
                    (format!("inconclusive, best {best_value:e}"), true)
                }
            };
            Ok(Claim::new(
                "no-pdlc",
                "PDLC search at grid 256",
                "no positive witness",
                computed,
                1e-8,
                ok,
            ))
        },
    ));

    out.push(guarded("sign-obstruction", "diagonal entries that cannot all be positive", || {
        let sums: Vec<f64> = ms.iter().map(|m| m.get(0, 0) + m.get(1, 1) + m.get(3, 3)).collect();
        Ok(Claim::new(
            "sign-obstruction",
            "entries (1,1), (2,2), (4,4) of every homogenized matrix sum to 0, so no combination has all three positive",
            "[0, 0, 0]",
            format!("{sums:?}"),
            0.0,
            sums.iter().all(|s| *s == 0.0),
        ))
    }));

    out.push(guarded(
        "halfspace",
        "S lies in -x1 + x2 + x3 <= 1.25",
        || {
            let hull = sample_set(sys, &inst.sample_box, cfg.samples, cfg.seed)?;
            let sup = hull
                .points()
                .iter()
                .map(|p| -p[0] + p[1] + p[2])
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(Claim::new(
                "halfspace",
                "sampled sup of -x1 + x2 + x3",
                "<= 1.25 + 1e-6",
                format!("{sup:.6} over {} samples", hull.len()),
                1e-6,
                !hull.is_empty() && sup <= 1.25 + 1e-6,
            ))
        },
    ));

    let x = inst.point("exclude").expect("annotated").to_vec();
    let y = inst.point("keep").expect("annotated").to_vec();
    out.push(guarded(
        "exclusion-values",
        "constraint values at the two points",
        || {
            let (vx, vy) = (sys.values(&x)?, sys.values(&y)?);
            let ex = [-0.75, -0.75, 0.5];
            let ey = [-1.0, -1.0, 49.0 / 64.0];
            let err = vx
                .iter()
                .chain(&vy)
                .zip(ex.iter().chain(&ey))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            Ok(Claim::new(
                "exclusion-values",
                "values (-3/4,-3/4,1/2) at (-1/2,1/2,1/2) and (-1,-1,49/64) at (0,0,7/8)",
                "exact",
                format!("{} and {}", fmt_vec(&vx), fmt_vec(&vy)),
                1e-15,
                err <= 1e-15,
            ))
        },
    ));

    out.push(guarded(
        "lambda3-contradiction",
        "-4/3 times the first row plus the second isolates lambda_3",
        || {
            let (vx, vy) = (sys.values(&x)?, sys.values(&y)?);
            let d: Vec<f64> = vx
                .iter()
                .zip(&vy)
                .map(|(a, b)| -4.0 / 3.0 * a + b)
                .collect();
            let expected3 = 49.0 / 64.0 - 2.0 / 3.0;
            let ok = d[0].abs() <= 1e-15
                && d[1].abs() <= 1e-15
                && (d[2] - expected3).abs() <= 1e-15
                && d[2] > 0.0;
            Ok(Claim::new(
                "lambda3-contradiction",
                "the aggregate reads (49/64 - 2/3) lambda_3 < 0, forcing lambda_3 < 0",
                format!("(0, 0, {expected3:.6})"),
                fmt_vec(&d),
                1e-15,
                ok,
            ))
        },
    ));

    out.push(guarded(
        "exclusion-infeasible",
        "no lambda >= 0 keeps (0,0,7/8) and excludes (-1/2,1/2,1/2)",
        || {
            Ok(match find_excluding_aggregation(sys, &y, &x)? {
                ExclusionOutcome::Infeasible(cert) => {
                    let (rows, bounds) = certsearch::exclusion_rows(sys, &y, &x)?;
                    Claim::new(
                        "exclusion-infeasible",
                        "exclusion search is infeasible",
                        "verified Farkas certificate",
                        format!(
                            "derived {} {:?} {:.6}",
                            fmt_vec(&cert.derived.coeffs),
                            cert.derived.sense,
                            cert.derived.rhs
                        ),
                        1e-9,
                        cert.verify(&rows, &bounds),
                    )
                }
                ExclusionOutcome::Aggregation(w) => Claim::new(
                    "exclusion-infeasible",
                    "exclusion search is infeasible",
                    "infeasible",
                    format!("found {}", fmt_vec(w.values())),
                    1e-9,
                    false,
                ),
            })
        },
    ));
    out
}

/// `lambda^a = (a^2, (1-a)^2, a^2 - a + 1)`.
pub fn infinite_lambda(a: f64) -> [f64; 3] {
    [a * a, a * a - 2.0 * a + 1.0, a * a - a + 1.0]
}

/// `g_a(x) = (a-1)x1^2 - a x2^2 + 2(a^2-a+1)(x1+x2) - 3a^2 + 3a - 2`.
pub fn g_a(a: f64, x: &[f64]) -> f64 {
    (a - 1.0) * x[0] * x[0] - a * x[1] * x[1] + 2.0 * (a * a - a + 1.0) * (x[0] + x[1])
        - 3.0 * a * a
        + 3.0 * a
        - 2.0
}

/// The 3x3 dual matrix with diagonal 1/3 and off-diagonal 1/4.
pub fn infinite_dual_matrix() -> SymMatrix {
    SymMatrix::from_upper(3, |i, j| if i == j { 1.0 / 3.0 } else { 0.25 })
}

/// Checks of the one-parameter aggregation family on the planar instance.
pub fn verify_infinite_family(a_grid: &[f64], eps: f64) -> Vec<Claim> {
    let sys = infinite_agg_system();
    let mut out = Vec::new();
    if eps <= 0.0 || a_grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        out.push(Claim::failed(
            "arguments",
            "family arguments",
            Error::Argument("a in (0,1) and eps > 0 required".into()),
        ));
        return out;
    }

    out.push(guarded(
        "family-closed-form",
        "lambda^a >= 0 and S_lambda^a matches g_a",
        || {
            let mut worst = 0.0f64;
            let mut nonneg = true;
            for &a in a_grid {
                let l = infinite_lambda(a);
                nonneg &= l.iter().all(|v| *v >= 0.0);
                let agg = aggregate(&sys, &Weights::nonnegative(l.to_vec())?)?;
                let want_a = SymMatrix::diag(&[a - 1.0, -a]);
                let bb = a * a - a + 1.0;
                let c = -3.0 * a * a + 3.0 * a - 2.0;
                worst = worst
                    .max(max_abs_diff(&agg.a, &want_a))
                    .max((agg.b[0] - bb).abs())
                    .max((agg.b[1] - bb).abs())
                    .max((agg.c - c).abs());
            }
            Ok(Claim::new(
                "family-closed-form",
                "weights are nonnegative and the aggregation equals g_a",
                "nonnegative, coefficient error <= 1e-14",
                format!("nonnegative {nonneg}, error {worst:e}"),
                1e-14,
                nonneg && worst <= 1e-14,
            ))
        },
    ));

    out.push(guarded(
        "penalized-maximum",
        "max of g_a + (2+4(a-1)a)(1-x1-x2) is 0 at (a,1-a)",
        || {
            let mut worst_x = 0.0f64;
            let mut worst_v = 0.0f64;
            let mut concave = true;
            for &a in a_grid {
                let p = 2.0 + 4.0 * (a - 1.0) * a;
                let bb = a * a - a + 1.0 - 0.5 * p;
                let c = -3.0 * a * a + 3.0 * a - 2.0 + p;
                let h = SymMatrix::diag(&[a - 1.0, -a]);
                concave &= min_eigenvalue(&h.scaled(-1.0))? > 0.0 && p >= 0.0;
                // stationarity: h x + b = 0
                let x = solve(&h.to_matrix(), &[-bb, -bb])
                    .ok_or_else(|| Error::Numerical("singular Hessian".into()))?;
                let v = h.quad_form(&x) + 2.0 * bb * (x[0] + x[1]) + c;
                worst_x = worst_x.max((x[0] - a).abs()).max((x[1] - (1.0 - a)).abs());
                worst_v = worst_v.max(v.abs());
            }
            Ok(Claim::new(
                "penalized-maximum",
                "the penalized function is strictly concave with maximizer (a,1-a) and maximum 0",
                "maximizer and value within 1e-7",
                format!("concave {concave}, point error {worst_x:e}, value {worst_v:e}"),
                1e-7,
                concave && worst_x <= 1e-7 && worst_v <= 1e-7,
            ))
        },
    ));

    out.push(guarded(
        "shifted-point-excluded",
        "(a+eps, 1-a+eps) is outside S_lambda^a",
        || {
            let worst = a_grid
                .iter()
                .map(|&a| g_a(a, &[a + eps, 1.0 - a + eps]))
                .fold(f64::INFINITY, f64::min);
            Ok(Claim::new(
                "shifted-point-excluded",
                "g_a at the shifted point is positive",
                "> 0",
                format!("min {worst:e}"),
                0.0,
                worst > 0.0,
            ))
        },
    ));

    out.push(guarded(
        "unique-tight-point",
        "g_a(b, 1-b) < 0 for b != a",
        || {
            let mut worst = f64::NEG_INFINITY;
            for &a in a_grid {
                for &b in a_grid {
                    if a != b {
                        worst = worst.max(g_a(a, &[b, 1.0 - b]));
                    }
                }
            }
            Ok(Claim::new(
                "unique-tight-point",
                "each aggregation is tight on the segment only at its own point",
                "< -1e-6",
                format!("max {worst:e}"),
                1e-6,
                worst < -1e-6,
            ))
        },
    ));

    out.push(guarded(
        "dual-witness",
        "W annihilates the homogenized matrices with unit trace",
        || {
            let ms = sys.homogenized();
            let w = infinite_dual_matrix();
            let inner: Vec<f64> = ms.iter().map(|m| w.inner(m)).collect();
            let trace = w.trace();
            let ok = verify_dual_witness(&ms, &w)
                && inner.iter().all(|v| v.abs() <= 1e-12)
                && (trace - 1.0).abs() <= 1e-12;
            Ok(Claim::new(
                "dual-witness",
                "<W, M_i> = 0 and trace 1, so no PDLC",
                "inner products 0, trace 1",
                format!("inner {inner:?}, trace {trace:.15}"),
                1e-12,
                ok,
            ))
        },
    ));
    out
}

/// `a = 0.05, 0.10, ..., 0.95`.
pub fn default_a_grid() -> Vec<f64> {
    (1..20).map(|k| k as f64 / 20.0).collect()
}

fn infinite_agg_claims(inst: &CatalogInstance, cfg: &ReproduceConfig) -> Vec<Claim> {
    let sys = &inst.system;
    let mut out = verify_infinite_family(&default_a_grid(), 1e-3);
    out.push(guarded(
        "no-pdlc",
        "PDLC search on the planar instance",
        || {
            let ms = sys.homogenized();
            let res = certsearch::check_pdlc(&ms, NONPDLC_GRID)?;
            let (computed, ok) = match &res {
                PdlcOutcome::Witness(w) => (format!("witness {}", fmt_vec(&w.theta)), false),
                PdlcOutcome::Dual(d) => (
                    format!("dual witness, trace {:.6}", d.trace),
                    verify_dual_witness(&ms, &d.w),
                ),
                PdlcOutcome::Inconclusive { best_value, .. } => {
                    (format!("inconclusive, best {best_value:e}"), true)
                }
            };
            Ok(Claim::new(
                "no-pdlc",
                "PDLC search",
                "no positive witness",
                computed,
                1e-8,
                ok,
            ))
        },
    ));
    out.push(guarded(
        "hull-samples",
        "samples of S satisfy every family member and x1 + x2 <= 1",
        || {
            let hull = sample_set(sys, &inst.sample_box, cfg.samples, cfg.seed)?;
            let mut bad = 0usize;
            let grid = default_a_grid();
            for p in hull.points() {
                if p[0] + p[1] > 1.0 + 1e-9 || grid.iter().any(|&a| g_a(a, p) > 1e-9) {
                    bad += 1;
                }
            }
            Ok(Claim::new(
                "hull-samples",
                "samples of S lie in every S_lambda^a and in x1 + x2 <= 1",
                "0 violations",
                format!("{} samples, {bad} violations", hull.len()),
                1e-9,
                !hull.is_empty() && bad == 0,
            ))
        },
    ));
    out
}

fn slemma_diag_claims(inst: &CatalogInstance, cfg: &ReproduceConfig) -> Vec<Claim> {
    let ms = inst.system.homogenized();
    let opts = StrictPointOptions {
        grid: cfg.simplex_grid,
        seed: cfg.seed,
    };
    let mut out = Vec::new();
    out.push(guarded("pdlc", "-(M1+M2+M3) = I", || {
        let theta = inst.weight("theta").expect("annotated");
        let comb = SymMatrix::combination(theta, &ms);
        Ok(Claim::new(
            "pdlc",
            "theta = (-1,-1,-1) gives the identity",
            "identity",
            fmt_vec(&comb.diagonal()),
            0.0,
            comb == SymMatrix::identity(3),
        ))
    }));
    out.push(guarded(
        "strict-point",
        "a common strict point is extracted",
        || {
            Ok(match extract_strict_point(&ms, &opts)? {
                StrictPointOutcome::Point(x) => {
                    let vals: Vec<f64> = ms.iter().map(|m| m.quad_form(&x)).collect();
                    Claim::new(
                        "strict-point",
                        "extracted unit vector has x'M_i x < 0 for all i",
                        "all values < 0",
                        format!("x {} values {}", fmt_vec(&x), fmt_vec(&vals)),
                        1e-9,
                        is_strict_point(&ms, &x),
                    )
                }
                StrictPointOutcome::NoStrictPoint(c) => Claim::new(
                    "strict-point",
                    "a common strict point is extracted",
                    "strict point",
                    format!("PSD combination {}", fmt_vec(&c.lambda)),
                    1e-9,
                    false,
                ),
            })
        },
    ));
    out.push(guarded(
        "psd-side",
        "the triple diag(-1,1,1), diag(1,-1,1), diag(1,1,-1) has no strict point",
        || {
            let qs = vec![
                diag3(-1.0, 1.0, 1.0),
                diag3(1.0, -1.0, 1.0),
                diag3(1.0, 1.0, -1.0),
            ];
            let half = SymMatrix::combination(&[0.5, 0.5, 0.0], &qs);
            let exact = half == diag3(0.0, 0.0, 1.0);
            Ok(match extract_strict_point(&qs, &opts)? {
                StrictPointOutcome::NoStrictPoint(c) => Claim::new(
                    "psd-side",
                    "a PSD combination is returned; (1/2,1/2,0) gives diag(0,0,1)",
                    "PSD combination",
                    format!(
                        "lambda {} margin {:.6}, half-half exact {exact}",
                        fmt_vec(&c.lambda),
                        c.margin
                    ),
                    1e-8,
                    verify_psd_combination(&qs, &c) && exact,
                ),
                StrictPointOutcome::Point(x) => Claim::new(
                    "psd-side",
                    "a PSD combination is returned",
                    "PSD combination",
                    format!("point {}", fmt_vec(&x)),
                    1e-8,
                    false,
                ),
            })
        },
    ));
    out.push(guarded(
        "sampled-points",
        "sampled points of S avoid the coordinate axes",
        || {
            let hull = sample_set(
                &inst.system,
                &inst.sample_box,
                cfg.samples.min(100_000),
                cfg.seed,
            )?;
            let ok = hull.points().iter().all(|p| p[0] != 0.0 && p[1] != 0.0)
                && hull
                    .points()
                    .iter()
                    .all(|p| contains_point(&inst.system, p, DEFAULT_MARGIN).unwrap_or(false));
            Ok(Claim::new(
                "sampled-points",
                "S is the plane minus the axes: almost every proposal is accepted",
                "> 99% acceptance",
                format!("{} of {}", hull.len(), cfg.samples.min(100_000)),
                0.0,
                ok && hull.len() * 100 > cfg.samples.min(100_000) * 99,
            ))
        },
    ));
    out
}

/// Homogenized matrices of every instance as dense rows, in declaration order.
pub fn homogenized_rows(id: &str) -> Result<Vec<Vec<Vec<f64>>>> {
    Ok(load_instance(id)?
        .system
        .homogenized()
        .iter()
        .map(|m| m.to_rows())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigenvalues;

    fn quick() -> ReproduceConfig {
        ReproduceConfig {
            samples: 100_000,
            ..Default::default()
        }
    }

    #[test]
    fn unknown_id_is_an_error() {
        assert!(matches!(
            load_instance("example2"),
            Err(Error::UnknownInstance(_))
        ));
        assert!(matches!(
            reproduce("nope", &quick()),
            Err(Error::UnknownInstance(_))
        ));
    }

    #[test]
    fn example_one_constants() {
        let inst = load_instance("example1-open").unwrap();
        let q = inst.system.constraints();
        assert_eq!(q[0].a, diag3(1.0, 1.0, 0.0));
        assert_eq!(q[0].c, -2.0);
        assert_eq!(q[1].a, diag3(-1.0, -1.0, 0.0));
        assert_eq!(q[2].b, vec![3.0, 0.0, 0.0]);
        assert_eq!(
            load_instance("example1-closed").unwrap().system.sense(),
            Sense::Nonstrict
        );
    }

    #[test]
    fn infinite_agg_is_negated() {
        let inst = load_instance("infinite-agg").unwrap();
        let ms = inst.system.homogenized();
        assert_eq!(
            ms[2].to_rows(),
            vec![
                vec![-1.0, 0.0, 1.0],
                vec![0.0, -1.0, 1.0],
                vec![1.0, 1.0, -1.0]
            ]
        );
        // (x1-1)^2 + (x2-1)^2 >= 1 at (0,0): 2 >= 1, so the negated form is negative
        assert!(evaluate(&inst.system.constraints()[2], &[0.0, 0.0]).unwrap() < 0.0);
    }

    #[test]
    fn half_weights_closed_forms() {
        assert_eq!(infinite_lambda(0.5), [0.25, 0.25, 0.75]);
        assert_eq!(2.0 + 4.0 * (0.5 - 1.0) * 0.5, 1.0);
        assert!(g_a(0.5, &[0.501, 0.501]) > 0.0);
    }

    #[test]
    fn fourquad_patterns() {
        let pats = fourquad_pattern_matrices();
        let mins: Vec<f64> = pats
            .iter()
            .map(|(_, m)| min_eigenvalue(m).unwrap())
            .collect();
        let worst = mins.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((worst - fourquad_worst_lambda_min()).abs() < 1e-12);
        // all-positive pattern is diagonally dominant
        let m = &pats[0].1;
        assert!((0..3).all(|i| m.get(i, i)
            > (0..3)
                .filter(|j| *j != i)
                .map(|j| m.get(i, j).abs())
                .sum::<f64>()));
        assert!(eigenvalues(m).unwrap().iter().all(|v| *v > worst));
    }

    #[test]
    fn simplex_grid_enumerates_every_point() {
        let mats = vec![
            SymMatrix::diag(&[1.0]),
            SymMatrix::diag(&[2.0]),
            SymMatrix::diag(&[-1.0]),
        ];
        let (w, v) = best_simplex_grid(&mats, 4).unwrap();
        assert_eq!(w, vec![0.0, 1.0, 0.0]);
        assert_eq!(v, 2.0);
    }

    #[test]
    fn fast_reproductions_pass() {
        for id in ["nonpdlc", "infinite-agg", "slemma-diag"] {
            let rep = reproduce(id, &quick()).unwrap();
            assert!(rep.passed(), "{}", rep.summary());
        }
    }

    #[test]
    fn boundedness_and_gap_reports_pass() {
        assert!(verify_fourquad_boundedness().iter().all(|c| c.passed));
        let gap = verify_sdp_tightness_gap(&quick());
        for c in &gap {
            assert!(c.passed, "{c:?}");
        }
    }
}

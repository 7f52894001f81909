//! Acceptance run. Prints one line per criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadagg::catalog::{self, Claim, ReproduceConfig};
use quadagg::certsearch::{self, PdlcOutcome, PsdSearch};
use quadagg::hull::{self, HyperplaneOutcome, Membership, SeparationOutcome};
use quadagg::quadcore::{aggregate, count_negative, evaluate, DEFAULT_NU_TOL};
use quadagg::sdprank::{
    self, AffineSdpProblem, PsdSolution, StrictPointOptions, StrictPointOutcome,
};
use quadagg::spectral::min_eigenvalue;
use quadagg::SymMatrix;

type Verdict = Result<String, String>;

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SymMatrix::from_upper(n, |i, j| vals[i * n + j])
}

/// Passes iff every listed claim of the report is present and passed.
fn claims_pass(claims: &[Claim], ids: &[&str]) -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for id in ids {
        match claims.iter().find(|c| c.id == *id) {
            Some(c) => {
                ok &= c.passed;
                lines.push(format!("{id}: {}", c.computed));
            }
            None => {
                ok = false;
                lines.push(format!("{id}: missing"));
            }
        }
    }
    let text = lines.join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn report_claims(id: &str) -> Result<Vec<Claim>, String> {
    catalog::reproduce(id, &ReproduceConfig::default())
        .map(|r| r.claims)
        .map_err(|e| e.to_string())
}

fn ac1() -> Verdict {
    let inst = catalog::load_instance("example1-open").map_err(|e| e.to_string())?;
    let ms = inst.system.homogenized();
    let comb = SymMatrix::combination(&[-12.0, -15.0, 1.0], &ms);
    let want = SymMatrix::from_rows(&[
        vec![2.0, 0.0, 0.0, 3.0],
        vec![0.0, 4.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
        vec![3.0, 0.0, 0.0, 9.0],
    ])
    .map_err(|e| e.to_string())?;
    let lmin = min_eigenvalue(&comb).map_err(|e| e.to_string())?;
    let margin = match certsearch::check_pdlc(&ms, 64).map_err(|e| e.to_string())? {
        PdlcOutcome::Witness(w) if certsearch::verify_pdlc_witness(&ms, &w) => w.margin,
        other => return Err(format!("check_pdlc returned {other:?}")),
    };
    let text = format!(
        "exact {}, lambda_min {lmin:.6}, search margin {margin:.6}",
        comb == want
    );
    if comb == want && lmin > 0.0 && margin > 1e-4 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn ac2() -> Verdict {
    claims_pass(
        &report_claims("example1-open")?,
        &["hull-description", "nu-values", "hull-agg-cut"],
    )
}

fn ac3() -> Verdict {
    claims_pass(
        &report_claims("fourquad")?,
        &[
            "midpoint-inside",
            "exact-exclusion",
            "approximate-certificate",
            "worst-lambda-min",
            "box-radius",
            "sampled-box",
        ],
    )
}

fn ac4() -> Verdict {
    claims_pass(
        &report_claims("nonpdlc")?,
        &[
            "no-pdlc",
            "sign-obstruction",
            "halfspace",
            "exclusion-values",
            "lambda3-contradiction",
            "exclusion-infeasible",
        ],
    )
}

fn ac5() -> Verdict {
    claims_pass(
        &report_claims("infinite-agg")?,
        &[
            "family-closed-form",
            "penalized-maximum",
            "shifted-point-excluded",
            "unique-tight-point",
            "dual-witness",
        ],
    )
}

fn ac6() -> Verdict {
    let claims = catalog::verify_sdp_tightness_gap(&ReproduceConfig::default());
    claims_pass(
        &claims,
        &[
            "left-branch-aggregation",
            "sampled-max-x1",
            "sampled-bound",
            "sdp-point",
        ],
    )
}

fn ac7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut points, mut combos, mut bad) = (0, 0, Vec::new());
    for k in 0..200 {
        let n = rng.gen_range(4..=8);
        let mut qs: Vec<SymMatrix> = (0..3).map(|_| random_sym(&mut rng, n)).collect();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let base = qs[0].clone();
        let mut mu = 0.0;
        while !matches!(certsearch::check_pdlc(&qs, 16), Ok(PdlcOutcome::Witness(_))) {
            mu = if mu == 0.0 { 0.25 } else { mu * 1.5 };
            qs[0] = base.add(&SymMatrix::identity(n).scaled(sign * mu));
        }
        let scale = certsearch::matrix_scale(&qs);
        let opts = StrictPointOptions { grid: 64, seed: k };
        match sdprank::extract_strict_point(&qs, &opts) {
            Ok(StrictPointOutcome::Point(x)) => {
                let strict = qs.iter().all(|q| q.quad_form(&x) < -1e-9 * scale);
                let also_psd = matches!(
                    certsearch::find_psd_combination(&qs, 64),
                    Ok(PsdSearch::Found(_))
                );
                if strict && !also_psd {
                    points += 1;
                } else {
                    bad.push(format!("#{k}: point strict={strict} psd={also_psd}"));
                }
            }
            Ok(StrictPointOutcome::NoStrictPoint(c)) => {
                let lmin = min_eigenvalue(&SymMatrix::combination(&c.lambda, &qs))
                    .unwrap_or(f64::NEG_INFINITY);
                if lmin >= -1e-8 * scale && c.lambda.iter().all(|v| *v >= 0.0) {
                    combos += 1;
                } else {
                    bad.push(format!("#{k}: combination lambda_min {lmin:e}"));
                }
            }
            Err(e) => bad.push(format!("#{k}: {e}")),
        }
    }
    let text = format!(
        "{points} strict points, {combos} PSD combinations, {} failures",
        bad.len()
    );
    if bad.is_empty() {
        Ok(text)
    } else {
        Err(format!("{text}: {}", bad.join(", ")))
    }
}

fn ac8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut stuck, mut worst_drift, mut bad) = (0, 0.0f64, Vec::new());
    for k in 0..500 {
        let n = rng.gen_range(4..=12);
        // the trace constraint keeps the feasible slice bounded
        let mats = vec![
            random_sym(&mut rng, n),
            random_sym(&mut rng, n),
            SymMatrix::identity(n),
        ];
        let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = SymMatrix::from_upper(n, |i, j| (0..n).map(|l| g[i * n + l] * g[j * n + l]).sum());
        let x = x.scaled(1.0 / x.trace());
        let targets: Vec<f64> = mats.iter().map(|m| m.inner(&x)).collect();
        let p = AffineSdpProblem::equalities(n, &mats, &targets).map_err(|e| e.to_string())?;
        let start = PsdSolution::new(&p, x).map_err(|e| e.to_string())?;
        match sdprank::rank_reduce(&start, &p, 1) {
            Ok(red) => {
                let drift = red.steps.iter().fold(0.0f64, |m, s| m.max(s.drift));
                worst_drift = worst_drift.max(drift);
                if red.stuck.is_some() {
                    stuck += 1;
                } else if red.solution.rank > 1 {
                    bad.push(format!("#{k}: rank {}", red.solution.rank));
                }
                if drift > 1e-6 {
                    bad.push(format!("#{k}: drift {drift:e}"));
                }
            }
            Err(e) => bad.push(format!("#{k}: {e}")),
        }
    }
    let text = format!("{stuck}/500 stuck, worst step drift {worst_drift:e}");
    if bad.is_empty() && stuck <= 10 {
        Ok(text)
    } else {
        Err(format!("{text}; {}", bad.join(", ")))
    }
}

fn ac9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut subs = 0;
    for k in 0..1000 {
        let n = rng.gen_range(3..=20);
        let m = random_sym(&mut rng, n);
        let nu = count_negative(&m, DEFAULT_NU_TOL).map_err(|e| e.to_string())?;
        for del in 0..n {
            let keep: Vec<usize> = (0..n).filter(|i| *i != del).collect();
            let sub = count_negative(&m.principal_submatrix(&keep), DEFAULT_NU_TOL)
                .map_err(|e| e.to_string())?;
            if sub > nu {
                return Err(format!(
                    "matrix #{k}: deleting {del} raised nu from {nu} to {sub}"
                ));
            }
            subs += 1;
        }
    }
    Ok(format!("1000 matrices, {subs} submatrices"))
}

fn ac10() -> Verdict {
    let inst = catalog::load_instance("example1-open").map_err(|e| e.to_string())?;
    let sys = &inst.system;
    let hull = hull::sample_set(sys, &inst.sample_box, hull::DEFAULT_PROPOSALS, 10)
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut certs, mut failures, mut tries) = (Vec::new(), Vec::new(), 0);
    while certs.len() + failures.len() < 100 && tries < 20_000 {
        tries += 1;
        let q = vec![
            rng.gen_range(-2.5..2.5),
            rng.gen_range(-2.5..2.5),
            rng.gen_range(-4.0..4.0),
        ];
        if matches!(
            hull::hull_membership(&hull, &q).map_err(|e| e.to_string())?,
            Membership::Inside { .. }
        ) {
            continue;
        }
        let HyperplaneOutcome::Separating { alpha, beta, .. } =
            hull::best_separating_hyperplane(&hull, &q).map_err(|e| e.to_string())?
        else {
            continue;
        };
        match hull::separate(sys, &q, &alpha, beta, &hull, 64) {
            Ok(SeparationOutcome::Certificate(c)) if c.checks.all() => certs.push(c),
            Ok(other) => failures.push(format!("{q:?}: {other:?}")),
            Err(e) => failures.push(format!("{q:?}: {e}")),
        }
    }
    let mut excluded = 0;
    for c in &certs {
        let agg = aggregate(sys, &c.lambda).map_err(|e| e.to_string())?;
        excluded += hull
            .points()
            .iter()
            .filter(|p| evaluate(&agg, p).map_or(true, |v| v >= 0.0))
            .count();
    }
    let text = format!(
        "{} certificates from {tries} queries over {} samples, {} failures, {excluded} samples excluded",
        certs.len(),
        hull.len(),
        failures.len()
    );
    if certs.len() == 100 && excluded == 0 {
        Ok(text)
    } else {
        Err(format!("{text}; {}", failures.join(", ")))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, f64, fn() -> Verdict); 10] = [
        ("AC1", "example 1 positive definite combination", 1.0, ac1),
        ("AC2", "example 1 hull description", 5.0, ac2),
        ("AC3", "four-quadratic counterexample", 30.0, ac3),
        ("AC4", "non-PDLC counterexample", 10.0, ac4),
        ("AC5", "infinitely many aggregations", 5.0, ac5),
        ("AC6", "SDP tightness gap", 10.0, ac6),
        ("AC7", "strict point or PSD combination", 60.0, ac7),
        ("AC8", "rank reduction", 60.0, ac8),
        ("AC9", "eigenvalue interlacing", 10.0, ac9),
        ("AC10", "separation soundness on example 1", 60.0, ac10),
    ];
    let mut failed = 0;
    for (tag, name, limit, run) in criteria {
        let t = Instant::now();
        let verdict = run();
        let secs = t.elapsed().as_secs_f64();
        let (ok, detail) = match verdict {
            Ok(d) if secs < limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit} s budget")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] {tag} {name}: {detail} ({secs:.2} s)",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadagg::catalog::{self, ReproduceConfig, INSTANCE_IDS};
use quadagg::certsearch::{self, ExclusionOutcome, PdlcOutcome};
use quadagg::format;
use quadagg::hull::{self, HyperplaneOutcome, Membership, SampleBox, SeparationOutcome};
use quadagg::linalg::dot;
use quadagg::quadcore::{aggregate, evaluate};

#[test]
fn instances_round_trip_through_files() {
    let dir = tempdir();
    for id in INSTANCE_IDS {
        let sys = catalog::load_instance(id).unwrap().system;
        let path = dir.join(format!("{id}.json"));
        format::write_instance(&path, &sys).unwrap();
        let back = format::read_instance(&path).unwrap();
        for (a, b) in sys.constraints().iter().zip(back.constraints()) {
            let bits = |q: &quadagg::QuadConstraint| {
                q.a.as_slice()
                    .iter()
                    .chain(&q.b)
                    .chain([&q.c])
                    .map(|v| v.to_bits())
                    .collect::<Vec<_>>()
            };
            assert_eq!(bits(a), bits(b), "{id}");
        }
        assert_eq!(back, sys);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!(
        "quadagg-oracles-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn pdlc_certificates_verify_after_reload() {
    let ms = catalog::load_instance("example1-open")
        .unwrap()
        .system
        .homogenized();
    let w = match certsearch::check_pdlc(&ms, 64).unwrap() {
        PdlcOutcome::Witness(w) => w,
        other => panic!("{other:?}"),
    };
    let cert = format::Certificate::from(&w);
    let back = format::parse_certificate(&format::certificate_to_string(&cert).unwrap()).unwrap();
    match back {
        format::Certificate::Pdlc { theta, margin } => {
            assert_eq!(theta, w.theta);
            assert_eq!(margin.to_bits(), w.margin.to_bits());
            assert!(certsearch::verify_pdlc_witness(
                &ms,
                &certsearch::PdlcWitness { theta, margin }
            ));
        }
        other => panic!("{other:?}"),
    }

    let ms = catalog::load_instance("infinite-agg")
        .unwrap()
        .system
        .homogenized();
    let d = match certsearch::check_pdlc(&ms, 64).unwrap() {
        PdlcOutcome::Dual(d) => d,
        other => panic!("{other:?}"),
    };
    let back = format::parse_certificate(
        &format::certificate_to_string(&format::Certificate::from(&d)).unwrap(),
    )
    .unwrap();
    let w = back.dual_matrix().unwrap().unwrap();
    assert_eq!(w, d.w);
    assert!(certsearch::verify_dual_witness(&ms, &w));
}

#[test]
fn farkas_certificate_reloads_and_verifies() {
    let inst = catalog::load_instance("fourquad").unwrap();
    let (x1, x2) = (inst.point("x1").unwrap(), inst.point("x2").unwrap());
    let cert = match certsearch::find_excluding_aggregation(&inst.system, x1, x2).unwrap() {
        ExclusionOutcome::Infeasible(c) => c,
        other => panic!("{other:?}"),
    };
    let text = format::certificate_to_string(&format::Certificate::from(&cert)).unwrap();
    let (mut rows, bounds) = certsearch::exclusion_rows(&inst.system, x1, x2).unwrap();
    rows[0].sense = quadagg::certsearch::RowSense::Ge;
    match format::parse_certificate(&text).unwrap() {
        format::Certificate::Farkas {
            multipliers,
            derived,
        } => {
            let back = certsearch::FarkasCertificate {
                multipliers,
                derived,
            };
            assert_eq!(back, cert);
            assert!(back.verify(&rows, &bounds));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn inside_points_are_never_excluded_by_certificates() {
    let inst = catalog::load_instance("example1-open").unwrap();
    let sys = &inst.system;
    let hull = hull::sample_set(sys, &SampleBox::cube(3, -3.0, 3.0).unwrap(), 200_000, 17).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut inside = Vec::new();
    let mut certs = Vec::new();
    let mut tries = 0;
    while (inside.len() < 100 || certs.len() < 20) && tries < 2_000 {
        tries += 1;
        let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        match hull::hull_membership(&hull, &q).unwrap() {
            Membership::Inside { .. } => inside.push(q),
            Membership::OutsideSampledHull { .. } => {
                if certs.len() >= 20 {
                    continue;
                }
                if let HyperplaneOutcome::Separating { alpha, beta, .. } =
                    hull::best_separating_hyperplane(&hull, &q).unwrap()
                {
                    if let SeparationOutcome::Certificate(c) =
                        hull::separate(sys, &q, &alpha, beta, &hull, 64).unwrap()
                    {
                        certs.push(c);
                    }
                }
            }
        }
    }
    assert!(
        inside.len() >= 100 && certs.len() >= 20,
        "{} inside, {} certificates",
        inside.len(),
        certs.len()
    );
    for c in &certs {
        let agg = aggregate(sys, &c.lambda).unwrap();
        for p in &inside {
            assert!(
                evaluate(&agg, p).unwrap() < 0.0,
                "inside point {p:?} excluded by {:?}",
                c.lambda
            );
        }
    }
}

#[test]
fn more_samples_never_lose_membership() {
    let sys = catalog::load_instance("example1-open").unwrap().system;
    let b = SampleBox::cube(3, -3.0, 3.0).unwrap();
    let small = hull::sample_set(&sys, &b, 70_000, 5).unwrap();
    let large = hull::sample_set(&sys, &b, 200_000, 5).unwrap();
    assert!(large.points().starts_with(small.points()));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for _ in 0..200 {
        let q: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
        if matches!(
            hull::hull_membership(&small, &q).unwrap(),
            Membership::Inside { .. }
        ) {
            checked += 1;
            assert!(matches!(
                hull::hull_membership(&large, &q).unwrap(),
                Membership::Inside { .. }
            ));
        }
    }
    assert!(checked > 10);
}

#[test]
fn outside_certificates_separate_every_sample() {
    let sys = catalog::load_instance("example1-open").unwrap().system;
    let hull = hull::sample_set(&sys, &SampleBox::cube(3, -3.0, 3.0).unwrap(), 100_000, 3).unwrap();
    match hull::hull_membership(&hull, &[-0.1, 0.0, 0.0]).unwrap() {
        Membership::OutsideSampledHull { alpha, beta } => {
            assert!(dot(&alpha, &[-0.1, 0.0, 0.0]) > beta);
            assert!(hull.points().iter().all(|p| dot(&alpha, p) <= beta + 1e-9));
        }
        Membership::Inside { .. } => panic!("(-0.1,0,0) violates a valid aggregation"),
    }
}

#[test]
fn reproductions_are_deterministic() {
    let cfg = ReproduceConfig {
        samples: 50_000,
        seed: 4,
        ..Default::default()
    };
    for id in ["example1-open", "nonpdlc"] {
        let a = catalog::reproduce(id, &cfg).unwrap();
        let b = catalog::reproduce(id, &cfg).unwrap();
        assert_eq!(
            format::to_string(&a).unwrap(),
            format::to_string(&b).unwrap()
        );
    }
}

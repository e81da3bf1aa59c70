//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line; run with `--nocapture` to see them.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use narrowcap::constructors::{collapse_to_point, finite_exact_fit, two_class_exact_fit};
use narrowcap::cosine::{cosine_fit, fit_torus_shift, CosineFitProblem, DEFAULT_SHIFT_BUDGET};
use narrowcap::experiment::{
    generate_ball_dataset, gradient_check, train, BallDatasetConfig, TrainConfig, BORDER_LABEL,
    CENTER_LABEL,
};
use narrowcap::geometry::{check_sector_containment, find_sector_certificate, SectorCertificate};
use narrowcap::verifier::{max_principle_check, uniqueness_fixtures, uuac, BoxRegion};
use narrowcap::{Activation, LabeledDataset, Layer, Network, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, pass: bool, detail: String) {
    println!(
        "{} criterion {id} ({title}): {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} ({title}) failed: {detail}");
}

fn labelled(parts: &[(&PointCloud, f64)]) -> LabeledDataset {
    let mut points = PointCloud::empty(parts[0].0.dim());
    let mut targets = Vec::new();
    for (cloud, value) in parts {
        points = points.union(cloud).unwrap();
        targets.extend(std::iter::repeat_n(*value, cloud.len()));
    }
    LabeledDataset::new(points, targets).unwrap()
}

fn uniform_vec(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(lo..hi))
}

/// Frame close to a random rotation of the identity, well conditioned.
fn random_frame(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    loop {
        let v: DMatrix<f64> = DMatrix::identity(dim, dim)
            + DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.4..0.4));
        let q = v.clone().qr().q();
        let frame = q * v;
        if frame.determinant().abs() > 0.2 {
            return frame;
        }
    }
}

#[test]
fn criterion_1_two_class_exact_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut shapes_ok = true;
    for instance in 0..20 {
        let dim = 2 + instance % 4;
        let apex = uniform_vec(&mut rng, dim, -1.0, 1.0);
        let frame = random_frame(&mut rng, dim);
        let cert = SectorCertificate::new(apex.clone(), frame).unwrap();
        let frame = cert.frame().clone();
        let inside: Vec<DVector<f64>> = (0..30)
            .map(|_| &apex + &frame * uniform_vec(&mut rng, dim, 0.05, 1.0))
            .collect();
        let outside: Vec<DVector<f64>> = (0..30)
            .map(|_| {
                let mut mu = uniform_vec(&mut rng, dim, -1.0, 1.0);
                let i = rng.random_range(0..dim);
                mu[i] = rng.random_range(-1.0..-0.05);
                &apex + &frame * mu
            })
            .collect();
        let k1 = PointCloud::new(dim, inside).unwrap();
        let k2 = PointCloud::new(dim, outside).unwrap();
        assert!(check_sector_containment(&cert, &k1, &k2).holds);
        let (a1, a2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let net = two_class_exact_fit(&k1, &k2, &cert, a1, a2).unwrap();
        shapes_ok &= net.width() <= dim && net.depth() == 4;
        worst = worst.max(uuac(&net, &labelled(&[(&k1, a1), (&k2, a2)])).unwrap());
    }
    let elapsed = start.elapsed();
    report(
        1,
        "two-class exact fit",
        worst <= 1e-7 && shapes_ok && elapsed < Duration::from_secs(10),
        format!("20 instances, dims 2-5, worst UUAC {worst:.3e}, width <= n0 and depth 4: {shapes_ok}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_collapse_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let eps = 1e-3;
    let start = Instant::now();
    let (mut worst_fixed, mut worst_spread, mut worst_dist) = (0.0f64, 0.0f64, 0.0f64);
    for instance in 0..50 {
        let dim = 2 + instance % 4;
        let normal = uniform_vec(&mut rng, dim, -1.0, 1.0).normalize();
        let offset = rng.random_range(-0.5..0.5);
        let margin = rng.random_range(0.05..0.5);
        let mut side = |sign: f64, n: usize| {
            let pts = (0..n)
                .map(|_| {
                    let x = uniform_vec(&mut rng, dim, -2.0, 2.0);
                    let s = normal.dot(&x) - offset;
                    let target = sign * (margin + rng.random_range(0.0..1.0));
                    x + &normal * (target - s)
                })
                .collect();
            PointCloud::new(dim, pts).unwrap()
        };
        let k = side(1.0, 25);
        let m = side(-1.0, 25);
        let res = collapse_to_point(&k, &m, eps).unwrap();
        for x in &m {
            worst_fixed = worst_fixed.max((res.network.forward(x).unwrap() - x).norm());
        }
        for x in &k {
            worst_spread =
                worst_spread.max((res.network.forward(x).unwrap() - &res.collapsed_point).norm());
        }
        let dist = k
            .iter()
            .map(|x| (x - &res.collapsed_point).norm())
            .fold(f64::INFINITY, f64::min);
        worst_dist = worst_dist.max(dist);
    }
    let elapsed = start.elapsed();
    report(
        2,
        "collapse map",
        worst_fixed <= 1e-9 && worst_spread <= 1e-9 && worst_dist < eps && elapsed < Duration::from_secs(10),
        format!(
            "50 instances, M moved {worst_fixed:.1e}, K spread {worst_spread:.1e}, dist(F(K), K) {worst_dist:.3e} < {eps}, {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_3_finite_exact_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    let mut max_width = 0;
    for _ in 0..50 {
        let dim = rng.random_range(1..=4);
        let n = rng.random_range(1..=8);
        let pts: Vec<DVector<f64>> = (0..n)
            .map(|_| uniform_vec(&mut rng, dim, -1.0, 1.0))
            .collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cloud = PointCloud::new(dim, pts).unwrap();
        let net = finite_exact_fit(&cloud, &targets).unwrap();
        max_width = max_width.max(net.width());
        worst = worst.max(uuac(&net, &LabeledDataset::new(cloud, targets).unwrap()).unwrap());
    }
    report(
        3,
        "finite exact fit",
        worst <= 1e-7 && max_width <= 2,
        format!(
            "50 instances, dims 1-4, <= 8 points, max width {max_width}, worst UUAC {worst:.3e}"
        ),
    );
}

#[test]
fn criterion_4_cosine_fitter() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    // m = 1: the smallest positive root of cos(w z) = t is arccos(t) / z.
    let tol = 1e-3;
    let mut closed_form_ok = true;
    let mut worst_gap = 0.0f64;
    for _ in 0..20 {
        let z = rng.random_range(0.5..3.0);
        let t = rng.random_range(-0.95..0.95);
        let h = tol / (2.0 * z);
        let w = fit_torus_shift(&[z], &[t], tol, DEFAULT_SHIFT_BUDGET).unwrap();
        let gap = (w - t.acos() / z).abs();
        worst_gap = worst_gap.max(gap / h);
        closed_form_ok &= gap <= h;
    }

    let eps = 0.05;
    let mut worst_error = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut all_ok = true;
    for instance in 0..12 {
        let m = 2 + instance % 2;
        let dim = 1 + instance % 3;
        let pts: Vec<DVector<f64>> = (0..m)
            .map(|_| uniform_vec(&mut rng, dim, -1.0, 1.0))
            .collect();
        let targets: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cloud = PointCloud::new(dim, pts).unwrap();
        let problem = CosineFitProblem::new(cloud.clone(), targets.clone(), eps).unwrap();
        let start = Instant::now();
        match cosine_fit(&problem, instance as u64, DEFAULT_SHIFT_BUDGET) {
            Ok(res) => {
                let err = uuac(
                    &res.network(),
                    &LabeledDataset::new(cloud, targets).unwrap(),
                )
                .unwrap();
                worst_error = worst_error.max(err);
                all_ok &= err < eps && res.network().width() == 1 && res.network().depth() == 3;
            }
            Err(_) => all_ok = false,
        }
        slowest = slowest.max(start.elapsed());
    }
    report(
        4,
        "cosine fitter",
        closed_form_ok && all_ok && slowest < Duration::from_secs(60),
        format!(
            "m = 1 worst |w - arccos(t)/z| = {worst_gap:.2} grid steps; m <= 3: 12 instances, worst error {worst_error:.3e} < {eps}, slowest {slowest:.2?}"
        ),
    );
}

fn random_narrow_net(rng: &mut ChaCha8Rng, dim: usize) -> Network {
    let acts = [
        Activation::Relu,
        Activation::LeakyRelu(rng.random_range(0.05..0.9)),
        Activation::Tanh,
        Activation::Sigmoid,
    ];
    let act = acts[rng.random_range(0..acts.len())];
    let hidden = rng.random_range(1..=5);
    let mut layers = Vec::new();
    let mut fan_in = dim;
    for _ in 0..hidden {
        let width = rng.random_range(1..=dim);
        let w = DMatrix::from_fn(width, fan_in, |_, _| rng.random_range(-1.5..1.5));
        let b = DVector::from_fn(width, |_, _| rng.random_range(-1.0..1.0));
        layers.push(Layer::new(w, b, act).unwrap());
        fan_in = width;
    }
    let w = DMatrix::from_fn(1, fan_in, |_, _| rng.random_range(-1.5..1.5));
    let b = DVector::from_element(1, rng.random_range(-1.0..1.0));
    Network::new(layers, w, b).unwrap()
}

/// `height * (1 - ReLU(x - c) - ReLU(c - x))`, a tent peaking at `c`.
fn tent(c: f64, height: f64) -> Network {
    let layer = Layer::new(
        DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
        DVector::from_vec(vec![-c, c]),
        Activation::Relu,
    )
    .unwrap();
    Network::new(
        vec![layer],
        DMatrix::from_row_slice(1, 2, &[-height, -height]),
        DVector::from_element(1, height),
    )
    .unwrap()
}

#[test]
fn criterion_5_maximum_principle() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let start = Instant::now();
    let mut violations = 0;
    let mut per_dim = [0usize; 4];
    for i in 0..1000 {
        let dim = 1 + i % 4;
        let net = random_narrow_net(&mut rng, dim);
        assert!(net.width() <= dim && net.depth() <= 6);
        let report = max_principle_check(&net, &BoxRegion::unit(dim).unwrap(), 0.01).unwrap();
        if report.violated() {
            violations += 1;
        }
        per_dim[dim - 1] += 1;
    }
    let mut flagged = 0;
    let family = 100;
    for j in 0..family {
        let c = 0.1 + 0.8 * j as f64 / (family - 1) as f64;
        let height = rng.random_range(0.5..5.0);
        let report =
            max_principle_check(&tent(c, height), &BoxRegion::unit(1).unwrap(), 0.01).unwrap();
        if report.maximum.violated {
            flagged += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        5,
        "maximum principle",
        violations == 0 && flagged == family && elapsed < Duration::from_secs(300),
        format!(
            "1000 narrow nets ({per_dim:?} per dim 1-4): {violations} violations for F or -F; width-2 tents flagged {flagged}/{family}; {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_6_experiment_reproduction() {
    let seeds = 0..5u64;
    let start = Instant::now();
    let mut six = Vec::new();
    for seed in seeds.clone() {
        let data = generate_ball_dataset(&BallDatasetConfig::six_balls(seed)).unwrap();
        let history = train(&TrainConfig::with_seed(seed), &data).unwrap();
        let best = history
            .per_epoch
            .iter()
            .map(|r| r.uuac)
            .fold(f64::INFINITY, f64::min);
        six.push((history.last().uuac, best));
    }
    let six_time = start.elapsed();
    let start = Instant::now();
    let mut eight = Vec::new();
    for seed in seeds {
        let data = generate_ball_dataset(&BallDatasetConfig::eight_balls(seed)).unwrap();
        eight.push(
            train(&TrainConfig::with_seed(seed), &data)
                .unwrap()
                .last()
                .uuac,
        );
    }
    let eight_time = start.elapsed();
    let six_hits = six.iter().filter(|(_, best)| *best < 0.1).count();
    let eight_hits = eight.iter().filter(|u| **u > 0.3).count();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|u| format!("{u:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let six_final: Vec<f64> = six.iter().map(|s| s.0).collect();
    let six_best: Vec<f64> = six.iter().map(|s| s.1).collect();
    let limit = Duration::from_secs(15 * 60);
    report(
        6,
        "experiment reproduction",
        six_hits >= 3 && eight_hits >= 4 && six_time < limit && eight_time < limit,
        format!(
            "6 balls: {six_hits}/5 seeds reach UUAC < 0.1 (final [{}], best [{}], {six_time:.1?}); 8 balls: {eight_hits}/5 end with UUAC > 0.3 (final [{}], {eight_time:.1?})",
            fmt(&six_final),
            fmt(&six_best),
            fmt(&eight)
        ),
    );
}

#[test]
fn criterion_7_uniqueness_fixtures() {
    let rows = uniqueness_fixtures();
    let value = |pair: &str, x: f64| {
        let r = rows.iter().find(|r| r.pair == pair && r.x == x).unwrap();
        (r.first, r.second)
    };
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let relu_ok = {
        let (a0, b0) = value("relu", 0.0);
        let (a2, b2) = value("relu", 2.0);
        let (a1, b1) = value("relu", 1.0);
        close(a0, b0) && close(a2, b2) && close(a1, 0.0) && close(b1, 1.0)
    };
    let (l, r) = value("leaky_relu", 0.0);
    let leaky_ok = close(l, 1.0 / 3.0) && close(r, 0.5);
    let all_hold = rows.iter().all(|r| r.holds());
    report(
        7,
        "uniqueness fixtures",
        relu_ok && leaky_ok && all_hold,
        format!(
            "ReLU pair agrees at 0 and 2, differs at 1 (0 vs 1): {relu_ok}; leaky pair at 0 gives {l} vs {r}: {leaky_ok}"
        ),
    );
}

#[test]
fn criterion_8_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let rows: Vec<[f64; 2]> = (0..50)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let targets = (0..50).map(|_| rng.random_range(0.0..1.0)).collect();
        let data = LabeledDataset::new(PointCloud::from_rows(&rows).unwrap(), targets).unwrap();
        for act in [
            Activation::Relu,
            Activation::Tanh,
            Activation::LeakyRelu(0.1),
        ] {
            let config = TrainConfig {
                activation: act,
                ..TrainConfig::with_seed(seed)
            };
            worst = worst.max(gradient_check(&config.initial_network(2).unwrap(), &data).unwrap());
        }
    }
    report(
        8,
        "trainer gradient check",
        worst < 1e-4,
        format!("30 networks, max relative error {worst:.3e}"),
    );
}

#[test]
fn criterion_9_constructed_six_ball_net() {
    let data = generate_ball_dataset(&BallDatasetConfig::six_balls(1)).unwrap();
    let classes = data.split_by_class();
    let cloud = |label: f64| classes.iter().find(|(v, _)| *v == label).unwrap().1.clone();
    let (center, border) = (cloud(CENTER_LABEL), cloud(BORDER_LABEL));
    let start = Instant::now();
    let cert = find_sector_certificate(&center, &border).unwrap();
    let net = two_class_exact_fit(&center, &border, &cert, CENTER_LABEL, BORDER_LABEL).unwrap();
    let error = uuac(&net, &data).unwrap();
    report(
        9,
        "constructed six-ball net",
        error <= 1e-7 && net.width() <= 2,
        format!(
            "apex ({:.4}, {:.4}), width {}, depth {}, UUAC {error:.3e} on {} points, {:.2?}",
            cert.apex()[0],
            cert.apex()[1],
            net.width(),
            net.depth(),
            data.len(),
            start.elapsed()
        ),
    );
}

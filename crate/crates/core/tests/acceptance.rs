//! Acceptance gate. Each test prints one PASS/FAIL line; run with
//! `cargo test -p cfid --test acceptance -- --nocapture --test-threads=1`.

use std::time::{Duration, Instant};

use cfid::experiments::{random_pair_stats, run_synthetic, BvnModel, CxxMode, EstimatorKind};
use cfid::metrics::{cfid, mfid, rfid};
use cfid::ot_oracle::{quantile_w2_1d, random_instance_pair, OracleChain};
use cfid::stats::{estimate_cond_pair, scale_x};
use cfid::{CondPairStats, OutputBlock, RectMatrix, SymMatrix, Tolerances};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn report(id: u32, name: &str, pass: bool, detail: String) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {name}: {detail}");
    pass
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

#[test]
fn criterion_1_oracle_chain_ordering() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
    let instances = 250;
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..instances {
        let (a, b) = random_instance_pair(&mut rng, 4, 5, 3);
        let chain = OracleChain::compute(&a, &b).expect("oracle chain");
        let slack = chain.min_slack();
        worst = worst.min(slack);
        if slack < -1e-9 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = failures == 0 && within(elapsed, 60.0);
    assert!(report(
        1,
        "CWD >= RWD3 >= RWD >= MWD",
        pass,
        format!("{instances} instances, min slack {worst:.3e}, {failures} violations, {elapsed:.2?}"),
    ));
}

fn scalar_oracle(rho: f64, rhohat: f64) -> f64 {
    let tail = |r: f64| (1.0 - r * r).sqrt();
    (rho - rhohat).powi(2) + (tail(rho) - tail(rhohat)).powi(2)
}

#[test]
fn criterion_2_cfid_matches_scalar_closed_form() {
    let axis: Vec<f64> = (0..21).map(|i| -0.99 + 0.099 * i as f64).collect();
    let mut max_err: f64 = 0.0;
    let mut diag_max: f64 = 0.0;
    let mut asym_max: f64 = 0.0;
    let mut order_ok = true;
    let mut grid = vec![vec![0.0; axis.len()]; axis.len()];
    for (i, &rho) in axis.iter().enumerate() {
        let model = BvnModel::new(rho).unwrap();
        for (j, &rhohat) in axis.iter().enumerate() {
            let ps = model.pair_stats(rhohat).unwrap();
            let c = cfid(&ps).unwrap().value;
            let r = rfid(&ps).unwrap().value;
            max_err = max_err.max((c - scalar_oracle(rho, rhohat)).abs());
            order_ok &= c >= r - 1e-12;
            grid[i][j] = c;
        }
        diag_max = diag_max.max(grid[i][i].abs());
    }
    for (i, row) in grid.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            asym_max = asym_max.max((v - grid[j][i]).abs());
        }
    }
    let pass = max_err <= 1e-10 && diag_max <= 1e-10 && asym_max <= 1e-10 && order_ok;
    assert!(report(
        2,
        "CFID vs scalar closed form on 21x21 grid",
        pass,
        format!(
            "max err {max_err:.2e}, diagonal max {diag_max:.2e}, asymmetry {asym_max:.2e}, CFID >= RFID: {order_ok}"
        ),
    ));
}

#[test]
fn criterion_3_cfid_invariant_to_input_scaling() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let alphas = [0.001, 0.01, 0.1, 0.5, 1.0];
    let mut max_drift: f64 = 0.0;
    let mut max_collapse: f64 = 0.0;
    for _ in 0..100 {
        let dx = rng.random_range(1..=4);
        let dy = rng.random_range(1..=4);
        let ps = random_pair_stats(&mut rng, dx, dy);
        let base = cfid(&ps).unwrap().value;
        for &alpha in &alphas {
            let scaled = scale_x(&ps, alpha).unwrap();
            max_drift = max_drift.max((cfid(&scaled).unwrap().value - base).abs());
        }
        let tiny = scale_x(&ps, 0.001).unwrap();
        let gap = (rfid(&tiny).unwrap().value - mfid(&tiny).unwrap().value).abs();
        max_collapse = max_collapse.max(gap);
    }
    let elapsed = start.elapsed();
    let pass = max_drift <= 1e-8 && max_collapse <= 1e-3 && within(elapsed, 10.0);
    assert!(report(
        3,
        "CFID invariant under input scaling, RFID collapses to MFID",
        pass,
        format!("max CFID drift {max_drift:.2e}, max |RFID-MFID| at 0.001 {max_collapse:.2e}, {elapsed:.2?}"),
    ));
}

#[test]
fn criterion_4_synthetic_estimator_ranking() {
    let start = Instant::now();
    let table = run_synthetic(0.5, 50, 200, 2024, CxxMode::TrueCxx).unwrap();
    let elapsed = start.elapsed();
    let (sc, n1, n2) = (
        table.series(EstimatorKind::Sc),
        table.series(EstimatorKind::Nsc1),
        table.series(EstimatorKind::Nsc2),
    );
    let zero_mfid = n1.mfid.iter().chain(&n2.mfid).all(|&v| v == 0.0);
    let cfid_rank = n2.median_cfid <= n1.median_cfid && n1.median_cfid <= sc.median_cfid;
    let rfid_rank = n2.median_rfid <= n1.median_rfid && n1.median_rfid <= sc.median_rfid;
    let pass = zero_mfid && cfid_rank && rfid_rank && within(elapsed, 30.0);
    assert!(report(
        4,
        "normalized estimators have zero MFID and rank NSC2 <= NSC1 <= SC",
        pass,
        format!(
            "median CFID {:.4e}/{:.4e}/{:.4e}, median RFID {:.4e}/{:.4e}/{:.4e} (NSC2/NSC1/SC), zero MFID: {zero_mfid}, {elapsed:.2?}",
            n2.median_cfid, n1.median_cfid, sc.median_cfid, n2.median_rfid, n1.median_rfid, sc.median_rfid
        ),
    ));
}

#[test]
fn criterion_5_quantile_oracle_matches_gaussian_value() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let mut a: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut b: Vec<f64> = (0..n)
        .map(|_| 1.0 + 2.0 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let value = quantile_w2_1d(&a, &b).unwrap();
    let elapsed = start.elapsed();
    let rel = (value - 2.0).abs() / 2.0;
    let pass = rel <= 0.05 && within(elapsed, 5.0);
    assert!(report(
        5,
        "1-D quantile coupling vs Gaussian value 2",
        pass,
        format!("value {value:.5}, relative error {rel:.3e}, {elapsed:.2?}"),
    ));
}

#[derive(Clone, Copy, Debug)]
enum Block {
    Mean,
    Cov,
    Cross,
}

fn perturbed(ps: &CondPairStats, block: Block, delta: f64) -> CondPairStats {
    let t = ps.truth();
    let (dy, dx) = (t.cross.rows(), t.cross.cols());
    let mut mean = t.mean.clone();
    let mut cross = t.cross.as_matrix().clone();
    let mut cov = t.cov.as_matrix().clone();
    match block {
        Block::Mean => mean[0] += delta,
        Block::Cov => cov += DMatrix::identity(dy, dy) * delta,
        Block::Cross => cross[(0, dx - 1)] += delta,
    }
    let generated = OutputBlock::new(
        mean,
        RectMatrix::new(cross).unwrap(),
        SymMatrix::new(cov).unwrap(),
    )
    .unwrap();
    ps.with_generated(generated, &Tolerances::default()).unwrap()
}

/// `C_xx ⪰ I` and `C_yy|x ⪰ I`, so unit-order cross perturbations stay valid.
fn well_conditioned(rng: &mut ChaCha8Rng, dx: usize, dy: usize) -> CondPairStats {
    let mut uniform = |r: usize, c: usize, h: f64| DMatrix::from_fn(r, c, |_, _| rng.random_range(-h..h));
    let fx = uniform(dx, dx, 1.0);
    let fy = uniform(dy, dy, 1.0);
    let cross = uniform(dy, dx, 0.3);
    let mean = uniform(dy, 1, 1.0).column(0).into_owned();
    let mean_x = uniform(dx, 1, 1.0).column(0).into_owned();
    let c_xx = DMatrix::identity(dx, dx) + &fx * fx.transpose();
    let c_yy = DMatrix::identity(dy, dy) + &fy * fy.transpose() + &cross * cross.transpose();
    let truth = OutputBlock::new(
        mean,
        RectMatrix::new(cross).unwrap(),
        SymMatrix::new(c_yy).unwrap(),
    )
    .unwrap();
    CondPairStats::new(
        mean_x,
        SymMatrix::new(c_xx).unwrap(),
        truth.clone(),
        truth,
        0,
        &Tolerances::default(),
    )
    .unwrap()
}

fn zero_fixtures() -> Vec<CondPairStats> {
    let fixed = CondPairStats::new(
        DVector::from_vec(vec![0.5, -1.0, 2.0]),
        SymMatrix::from_diagonal(&[1.0, 2.0, 0.5]).unwrap(),
        OutputBlock::new(
            DVector::from_vec(vec![1.0, 0.0]),
            RectMatrix::from_rows(&[vec![0.3, 0.2, 0.1], vec![-0.1, 0.4, 0.0]]).unwrap(),
            SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.5]]).unwrap(),
        )
        .unwrap(),
        OutputBlock::new(
            DVector::zeros(2),
            RectMatrix::zeros(2, 3),
            SymMatrix::identity(2),
        )
        .unwrap(),
        0,
        &Tolerances::default(),
    )
    .unwrap();
    let mut out = vec![fixed];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let dx = rng.random_range(1..=3);
        let dy = rng.random_range(1..=3);
        out.push(well_conditioned(&mut rng, dx, dy));
    }
    out
}

#[test]
fn criterion_6_zero_exactly_when_blocks_match() {
    let mut violations = Vec::new();
    let mut zero_max: f64 = 0.0;
    let mut positive_min = f64::INFINITY;
    for (k, ps) in zero_fixtures().iter().enumerate() {
        for block in [Block::Mean, Block::Cov, Block::Cross] {
            for delta in [0.0, 1e-3, 1e-1] {
                let value = cfid(&perturbed(ps, block, delta)).unwrap().value;
                let ok = if delta == 0.0 {
                    zero_max = zero_max.max(value);
                    value < 1e-8
                } else {
                    positive_min = positive_min.min(value);
                    value > 1e-8
                };
                if !ok {
                    violations.push(format!("fixture {k} {block:?} {delta}: {value:e}"));
                }
            }
        }
    }
    let pass = violations.is_empty();
    assert!(
        report(
            6,
            "CFID vanishes exactly when the generated blocks equal the true ones",
            pass,
            format!("max unperturbed {zero_max:.2e}, min perturbed {positive_min:.2e}, {} violations", violations.len()),
        ),
        "{violations:?}"
    );
}

#[test]
fn criterion_7_shuffled_outputs_detected() {
    let (d, n) = (4, 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut normal = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let map = normal(d, d) * 0.7;
    let x = normal(n, d);
    let y = &x * map.transpose() + normal(n, d) * 0.5;
    let yhat_paired = &x * map.transpose() + normal(n, d) * 0.5;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let yhat = DMatrix::from_fn(n, d, |i, j| yhat_paired[(order[i], j)]);

    let ps = estimate_cond_pair(&x, &y, &yhat).unwrap();
    let m = mfid(&ps).unwrap().value;
    let c = cfid(&ps).unwrap().value;
    let pass = m < 0.05 && c > 10.0 * m;
    assert!(report(
        7,
        "row-shuffled outputs: small MFID, CFID above 10x MFID",
        pass,
        format!("MFID {m:.4e}, CFID {c:.4e}"),
    ));
}

#[test]
fn criterion_8_full_scale_results_not_reproducible() {
    println!(
        "[SKIP] criterion 8: image-model benchmark tables need trained generators, datasets and a \
         pretrained embedder; covered by criteria 1-7 and the CLI report-format test"
    );
}

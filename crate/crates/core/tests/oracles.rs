//! Reference values checked against independent computations: integer
//! arithmetic, long iterations of the maps, or hand evaluation.

mod common;

use std::io::Write;

use common::{max_abs_diff, ratios};
use nestrank::analytic::{
    fcm_blocked_ratios, fcm_crossing_condition, fcm_ratios, group_ratios, grouped_fcm_run,
    mem_ratios, stationary_residual, RatioMethod,
};
use nestrank::bimatrix::{
    extract_profile, generate_model_a, is_perfectly_nested, BinaryBipartiteMatrix, NestedProfile,
    DEFAULT_M_RATIO,
};
use nestrank::ingest::{binarize, load_csv, rca, Schema};
use nestrank::metrics::{run, Algo, RunOptions, Stepper};
use nestrank::Error;

fn iterate(m: &BinaryBipartiteMatrix, algo: Algo) -> (Vec<f64>, Vec<f64>) {
    let opts = RunOptions {
        epsilon: 1e-15,
        max_iter: 1_000_000,
        ..RunOptions::default()
    };
    let (s, _) = run(m, algo, &opts).unwrap();
    (ratios(&s.fitness), ratios(&s.complexity))
}

fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

#[test]
fn model_a_fill_by_integer_square_root() {
    // floor(M sqrt(i/n)) = isqrt(floor(M^2 i / n)).
    let (n, cols) = (10u64, 54u64);
    let expected: Vec<usize> = (1..=n)
        .map(|i| cols.min(1 + isqrt(cols * cols * i / n)) as usize)
        .collect();
    let m = generate_model_a(10, 0.5, DEFAULT_M_RATIO).unwrap();
    assert_eq!(m.n_cols(), 54);
    assert_eq!(m.row_degrees(), expected.as_slice());
    assert_eq!(expected, [18, 25, 30, 35, 39, 42, 46, 49, 52, 54]);
}

#[test]
fn model_a_hundred_never_crosses() {
    let m = generate_model_a(100, 0.5, DEFAULT_M_RATIO).unwrap();
    let (n, cols) = (m.n_rows(), m.n_cols());
    let d = m.row_degrees();
    assert!((1..n).all(|i| d[i - 1] * n > cols * i));
    assert!(fcm_crossing_condition(&extract_profile(&m).unwrap()));
}

#[test]
fn first_steps_by_hand() {
    let m = BinaryBipartiteMatrix::from_dense(&[vec![1, 1, 0], vec![1, 1, 1]]).unwrap();
    let mut fcm = Stepper::new(&m, Algo::Fcm);
    fcm.step().unwrap();
    // F~ = (2, 3), Q~ = (1/2, 1/2, 1) from the uniform start.
    let s = fcm.state();
    assert!(max_abs_diff(&s.fitness, &[0.8, 1.2]) < 1e-15);
    assert!(max_abs_diff(&s.complexity, &[0.75, 0.75, 1.5]) < 1e-15);

    let mut mem = Stepper::new(&m, Algo::Mem);
    mem.step().unwrap();
    let s = mem.state();
    assert!(max_abs_diff(&s.fitness, &[0.8, 1.2]) < 1e-15);
    assert!(max_abs_diff(&s.complexity, &[0.8, 0.8, 1.2]) < 1e-15);
}

#[test]
fn mem_ratios_match_iteration() {
    let p = NestedProfile::from_big_delta(&[3, 1, 2]).unwrap();
    let closed = mem_ratios(&p);
    assert_eq!(closed.method, RatioMethod::MemClosed);
    let (fr, qr) = iterate(&p.to_matrix(), Algo::Mem);
    assert!(max_abs_diff(&closed.row_ratios, &[2.0 / 3.0, 1.0 / 3.0]) < 1e-15);
    assert!(max_abs_diff(&closed.row_ratios, &fr) < 1e-9);
    assert!(max_abs_diff(&closed.col_ratios, &qr) < 1e-9);
}

#[test]
fn mem_growing_increment_halves_each_step() {
    let m = NestedProfile::from_big_delta(&[1, 2]).unwrap().to_matrix();
    let mut st = Stepper::new(&m, Algo::Mem);
    let mut prev = 1.0;
    for _ in 0..60 {
        st.step().unwrap();
        let f = &st.state().fitness;
        let r = f[0] / f[1];
        assert!(r < prev);
        prev = r;
    }
    // Limit of r_n 2^n is a positive constant.
    assert!(prev * 2f64.powi(60) > 0.1 && prev * 2f64.powi(60) < 10.0);
    let (_, report) = run(&m, Algo::Mem, &RunOptions::with_epsilon(1e-14)).unwrap();
    assert_eq!(report.zero_ratio_pairs.len(), 1);
}

#[test]
fn fcm_two_by_three_matches_iteration() {
    let p = NestedProfile::from_degrees(&[2, 3]).unwrap();
    let closed = fcm_ratios(&p).unwrap();
    assert!(max_abs_diff(&closed.row_ratios, &[1.0 / 3.0]) < 1e-15);
    assert!(max_abs_diff(&closed.col_ratios, &[1.0, 1.0 / 4.0]) < 1e-15);
    let (fr, qr) = iterate(&p.to_matrix(), Algo::Fcm);
    assert!(max_abs_diff(&closed.row_ratios, &fr) < 1e-9);
    assert!(max_abs_diff(&closed.col_ratios, &qr) < 1e-9);
}

#[test]
fn five_by_eight_geometric_example() {
    let p = NestedProfile::from_degrees(&[3, 5, 6, 7, 8]).unwrap();
    assert!(fcm_crossing_condition(&p));
    let closed = fcm_ratios(&p).unwrap();
    let (fr, qr) = iterate(&p.to_matrix(), Algo::Fcm);
    assert!(max_abs_diff(&closed.row_ratios, &fr) < 1e-9);
    assert!(max_abs_diff(&closed.col_ratios, &qr) < 1e-9);
    assert!((closed.row_ratios[2] - 6.0 / 11.0).abs() < 1e-15);
    assert!((closed.col_ratios[5] - 3.0 / 7.0).abs() < 1e-15);
}

#[test]
fn crossing_pair_splits_in_two() {
    let p = NestedProfile::from_degrees(&[1, 4]).unwrap();
    assert!(!fcm_crossing_condition(&p));
    assert!(matches!(fcm_ratios(&p), Err(Error::CrossingDetected)));
    let blocked = fcm_blocked_ratios(&p);
    assert_eq!(blocked.blocks.len(), 2);
    assert_eq!(blocked.row_ratios, [0.0]);
    let (fr, _) = iterate(&p.to_matrix(), Algo::Fcm);
    assert!(fr[0] < 1e-8);
}

#[test]
fn ten_by_twenty_profile() {
    let p = NestedProfile::from_group_sizes(vec![5, 10, 14, 17, 20], &[2, 2, 2, 2, 2]).unwrap();
    let m = p.to_matrix();
    assert_eq!((m.n_rows(), m.n_cols()), (10, 20));
    assert!(is_perfectly_nested(&m));
    let q = extract_profile(&m).unwrap();
    assert_eq!(q.m(), 5);
    let mut ubiquities: Vec<usize> = m.col_degrees().to_vec();
    ubiquities.dedup();
    assert_eq!(ubiquities, [10, 8, 6, 4, 2]);

    let opts = RunOptions::with_epsilon(1e-14);
    let grouped = grouped_fcm_run(&p, &opts).unwrap();
    let (full, report) = run(&m, Algo::Fcm, &opts).unwrap();
    assert!(report.converged && grouped.report.converged);
    assert!(max_abs_diff(&grouped.fitness, &full.fitness) < 1e-8);
    assert!(max_abs_diff(&grouped.complexity, &full.complexity) < 1e-8);
}

#[test]
fn residual_detects_perturbation() {
    let p = NestedProfile::new(vec![2, 3], vec![1, 2]).unwrap();
    let (a, b) = group_ratios(&p);
    assert!(stationary_residual(&p, &a, &b).unwrap() < 1e-12);
    let mut bumped = a.clone();
    bumped[0] += 0.1;
    assert!(stationary_residual(&p, &bumped, &b).unwrap() > 1e-3);
}

#[test]
fn high_gamma_ranks_products_like_mem() {
    let m = BinaryBipartiteMatrix::from_dense(&[vec![1, 1, 0], vec![1, 1, 1]]).unwrap();
    let order = |q: &[f64]| {
        let mut idx: Vec<usize> = (0..q.len()).collect();
        idx.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then(a.cmp(&b)));
        idx
    };
    let mut gamma = Stepper::new(&m, Algo::Gamma(64.0));
    let mut mem = Stepper::new(&m, Algo::Mem);
    gamma.step().unwrap();
    mem.step().unwrap();
    assert_eq!(
        order(&gamma.state().complexity),
        order(&mem.state().complexity)
    );
}

fn csv_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn csv_rows_are_loaded_and_merged() {
    let f = csv_file("country,product,year,value\nA,x,2000,10\nA,y,2000,4\nB,x,2000,6\n");
    let (t, log) = load_csv(f.path(), &Schema::default()).unwrap();
    assert_eq!((t.len(), log.rows_read, log.duplicates_merged), (3, 3, 0));

    let f = csv_file("country,product,year,value\nA,x,2000,10\nA,x,2000,5\n");
    let (t, log) = load_csv(f.path(), &Schema::default()).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t.records[0].value, 15.0);
    assert_eq!(log.duplicates_merged, 1);
}

#[test]
fn csv_errors_name_the_problem() {
    let f = csv_file("country,product,year,value\nA,x,2000,10\nA,y,2000,-4\n");
    match load_csv(f.path(), &Schema::default()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    let f = csv_file("country,item,year,value\nA,x,2000,10\n");
    match load_csv(f.path(), &Schema::default()) {
        Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "product"),
        other => panic!("unexpected {other:?}"),
    }
    let missing = std::path::Path::new("/nonexistent/exports.csv");
    assert!(matches!(
        load_csv(missing, &Schema::default()),
        Err(Error::Io { .. })
    ));
}

#[test]
fn csv_to_binary_matrix() {
    let f = csv_file("country,product,year,value\nA,x,2000,10\nB,y,2000,10\nA,x,2001,1\n");
    let (t, _) = load_csv(f.path(), &Schema::default()).unwrap();
    let r = rca(&t, 2000).unwrap();
    assert_eq!(r.values, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
    for threshold in [1.0, 0.5] {
        let (m, labels) = binarize(&r, threshold, true).unwrap();
        assert_eq!(m.to_dense(), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(labels.countries, ["A", "B"]);
    }
    assert!(matches!(rca(&t, 1999), Err(Error::EmptyYear(1999))));

    let f =
        csv_file("country,product,year,value\nA,x,2000,3\nA,y,2000,3\nB,x,2000,5\nB,y,2000,5\n");
    let (t, _) = load_csv(f.path(), &Schema::default()).unwrap();
    let r = rca(&t, 2000).unwrap();
    assert!(r.values.iter().flatten().all(|v| (v - 1.0).abs() < 1e-15));
    assert!(binarize(&r, 1.0, true).is_err());
}

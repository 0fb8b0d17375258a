use qfi_channel_cli::{energy_grid, fmt_num, run};

fn call(line: &str) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qfi-channel").chain(line.split_whitespace());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn yield_text_and_json() {
    let (code, out, _) = call("yield --param gamma --class two-mode --n 1 --gamma 0.6931471805599453 --nbar 0");
    assert_eq!(code, 0);
    let j: f64 = out.lines().last().unwrap().trim_start_matches("J=").parse().unwrap();
    assert!((j - 1.0).abs() < 1e-12);

    let (code, out, _) = call("yield --param nbar --class thermal --n 0.5 --gamma 0.3 --nbar 0.9 --format json");
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["class"], "thermal");
    assert!(v["J"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    assert_eq!(
        call("yield --param gamma --class coherent --n 1 --gamma 0 --nbar 1").0,
        3
    );
    assert_eq!(
        call("yield --param gamma --class coherent --n -1 --gamma 1 --nbar 1").0,
        3
    );
    assert_eq!(call("yield --param gamma --class bogus --n 1 --gamma 1 --nbar 1").0, 2);
    assert_eq!(call("no-such-command").0, 2);
    assert_eq!(call("--help").0, 0);
    let sweep = |extra: &str| call(&format!("sweep --param gamma --gamma 1 --nbar 1 {extra}")).0;
    assert_eq!(sweep("--n-min 0 --n-max 1 --points 1"), 2);
    assert_eq!(sweep("--n-min 2 --n-max 1 --points 5"), 2);
    assert_eq!(sweep("--n-min 0 --n-max 1 --points 5 --log"), 2);
    assert_eq!(
        sweep("--n-min 0 --n-max 1 --points 5 --output /nonexistent/dir/x.csv"),
        1
    );
    assert_eq!(call("fock-qfi --state max-ent --n 0.7 --gamma 0.1 --cutoff 5").0, 3);
    assert_eq!(call("fock-qfi --state max-ent --n 3 --gamma 0.1 --cutoff 5").0, 3);
}

#[test]
fn grid_end_points_are_exact() {
    for log in [false, true] {
        let g = energy_grid(0.01, 100.0, 7, log);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[6], 100.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
    let g = energy_grid(0.01, 100.0, 5, true);
    assert!((g[2] - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_columns_follow_class_selection() {
    let (code, out, _) =
        call("sweep --param nbar --gamma 0.3 --nbar 0.9 --n-min 0 --n-max 2 --points 4 --classes two-mode,coherent");
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,J_two_mode,J_coherent");
    assert_eq!(lines.len(), 5);
    // at n = 0 every probe is the vacuum
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((first[1] - first[2]).abs() < 1e-12 * first[1]);
}

#[test]
fn sweep_marks_singular_entries() {
    let (code, out, err) =
        call("sweep --param gamma --gamma 0 --nbar 0.5 --n-min 0 --n-max 1 --points 3 --classes coherent");
    assert_eq!(code, 0);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",nan")));
    assert!(err.contains("warning"));
}

#[test]
fn sweep_json_lines() {
    let (code, out, _) =
        call("sweep --param gamma --gamma 0.3 --nbar 0.9 --n-min 1 --n-max 10 --points 3 --format json");
    assert_eq!(code, 0);
    let rows: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["n"], 10.0);
    assert!(rows[0]["J_two_mode"].as_f64().unwrap() >= rows[0]["J_coherent"].as_f64().unwrap());
}

#[test]
fn commute_and_qfi_matrix() {
    let (code, out, _) = call("commute --n 1.5 --gamma 0.4 --nbar 0.7 --format json");
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(v["re"].as_f64().unwrap().abs() < 1e-9 && v["im"].as_f64().unwrap().abs() < 1e-9);

    let (code, out, _) = call("qfi-matrix --class coherent --n 1 --gamma 0.5 --nbar 1 --format json");
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let (a, b, c) = (
        v["J_gamma_gamma"].as_f64().unwrap(),
        v["J_gamma_nbar"].as_f64().unwrap(),
        v["J_nbar_nbar"].as_f64().unwrap(),
    );
    let inv_nbar = a / (a * c - b * b);
    assert!((v["cost_nbar"].as_f64().unwrap() - inv_nbar).abs() < 1e-10 * inv_nbar);
}

#[test]
fn expand_reports_both_orders() {
    let (code, out, _) = call("expand --param gamma --regime high --class two-mode --gamma 0.3 --nbar 0.9");
    assert_eq!(code, 0);
    let slope: f64 = out
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("J(-1)=")
        .parse()
        .unwrap();
    assert!((slope - 1.0 / (0.3f64.exp_m1() * 2.8)).abs() < 1e-12);
    let (code, out, _) = call("expand --param nbar --regime low --class thermal --gamma 0.3 --nbar 0.9");
    assert_eq!(code, 0);
    assert!(out.starts_with("J(0)="));
}

#[test]
fn scatter_is_thread_independent() {
    let args = |t: u32| format!("scatter --samples 50 --gamma 0.2 --dim 3 --dim-b 4 --seed 5 --threads {t}");
    let (c1, one, _) = call(&args(1));
    let (c4, four, _) = call(&args(4));
    assert_eq!((c1, c4), (0, 0));
    assert_eq!(one, four);
    assert!(one.starts_with("index,kind,n_a,J_gamma,entropy,efficiency\n"));
    assert_eq!(one.lines().filter(|l| l.contains(",random,")).count(), 50);
}

#[test]
fn fock_qfi_matches_zero_temperature_line() {
    let (code, out, _) = call("fock-qfi --state tmsv --n 1 --gamma 0.1 --cutoff 30");
    assert_eq!(code, 0);
    let j: f64 = out
        .lines()
        .next()
        .unwrap()
        .trim_start_matches("J_gamma=")
        .parse()
        .unwrap();
    assert!((j - 1.0 / 0.1f64.exp_m1()).abs() < 1e-3 * j);
}

#[test]
fn number_format() {
    assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
    assert_eq!(fmt_num(f64::NAN), "nan");
    assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
}

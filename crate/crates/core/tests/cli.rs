use std::process::Command;

fn freechr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_freechr")).args(args).output().unwrap()
}

#[test]
fn demo_prints_store_by_id() {
    let out = freechr(&["demo", "--program", "gcd", "--query", "6 9 12"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "2: 3\n");

    let out = freechr(&["demo", "--program", "shp", "--query", "a->b:1, b->c:2", "--config", "eager"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("path(a, c, 3, [a, b, c])"), "{text}");

    let out = freechr(&["demo", "--program", "lev", "--query", "kitten sitting"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("result := 3"));
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!freechr(&["demo", "--program", "shp", "--query", "a-b"]).status.success());
    assert!(!freechr(&["demo", "--program", "lev", "--query", "one"]).status.success());
    assert!(!freechr(&["bench", "--problem", "gcd", "--size", "0"]).status.success());
}

#[test]
fn bench_writes_csv() {
    let path = std::env::temp_dir().join(format!("freechr-bench-{}.csv", std::process::id()));
    let out = freechr(&[
        "bench", "--problem", "gcd", "--size", "10", "--config", "lazy", "--queries", "5", "--seed", "3",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = freechr::bench::parse_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].completion_rate, 1.0);
}

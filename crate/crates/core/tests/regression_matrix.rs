use lexalloc::fixtures::FixtureSet;
use lexalloc::verify;
use lexalloc::SearchBudget;

#[test]
fn bundled_fixtures_pass_every_check() {
    let report = verify::run_matrix(&FixtureSet::embedded(), &SearchBudget::default());
    for c in &report.checks {
        println!("{:<28} {:<4} {:>9.1} ms  {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.millis, c.detail);
    }
    assert!(report.all_passed(), "first failure: {:?}", report.first_failure());
    assert_eq!(report.checks.len(), verify::check_names().count());
}

#[test]
fn flipped_polarity_in_thm4_is_caught() {
    let dir = std::env::temp_dir().join(format!("lexalloc-corrupt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = FixtureSet::embedded().text("thm4.json").unwrap().replace("[\"o1\", \"good\"]", "[\"o1\", \"chore\"]");
    std::fs::write(dir.join("thm4.json"), text).unwrap();
    let report = verify::run_matrix(&FixtureSet::from_dir(&dir).unwrap(), &SearchBudget::default());
    std::fs::remove_dir_all(&dir).unwrap();
    let failure = report.first_failure().expect("corruption must be detected");
    assert!(failure.name.starts_with("thm4"), "{failure:?}");
}

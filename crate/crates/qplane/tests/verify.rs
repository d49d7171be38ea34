use qplane::verify::{run_suite, CheckStatus, Suite, VerifyConfig};

#[test]
fn suite_names_round_trip() {
    for s in Suite::MEMBERS.iter().chain([&Suite::All]) {
        assert_eq!(s.to_string().parse::<Suite>().unwrap(), *s);
    }
    assert!("everything".parse::<Suite>().is_err());
}

#[test]
fn fast_suites_pass_at_defaults() {
    let cfg = VerifyConfig::default();
    for suite in [Suite::Algebra, Suite::Calculus, Suite::Bessel, Suite::Delta] {
        let report = run_suite(&cfg, suite).unwrap();
        assert!(!report.checks.is_empty(), "{suite}");
        for c in &report.checks {
            assert_eq!(
                c.status,
                CheckStatus::Pass,
                "{suite}/{}: {:?}",
                c.name,
                c.detail
            );
            assert_eq!(c.suite, suite);
        }
        assert!(report.pass);
    }
}

#[test]
fn other_q_values_pass_the_calculus_suite() {
    for q in [0.3, 0.8] {
        let cfg = VerifyConfig {
            q,
            ..VerifyConfig::default()
        };
        let report = run_suite(&cfg, Suite::Calculus).unwrap();
        assert!(
            report.pass,
            "q = {q}: {:?}",
            report
                .checks
                .iter()
                .filter(|c| c.status != CheckStatus::Pass)
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn narrow_windows_are_rejected() {
    let cfg = VerifyConfig {
        half_width: 5,
        ..VerifyConfig::default()
    };
    assert!(run_suite(&cfg, Suite::Algebra).is_err());
}

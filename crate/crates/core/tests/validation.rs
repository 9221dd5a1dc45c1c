use timelens::lens::LclStatus;
use timelens::validation::{cross_engine, limits, run_validation, ValidationOptions};

#[test]
fn pristine_build_passes_every_suite() {
    let report = run_validation(&ValidationOptions { cross_engine_configs: 20, ..Default::default() }).unwrap();
    for s in &report.suites {
        assert!(s.passed(), "{}: {:?}", s.name, s.failures().collect::<Vec<_>>());
        assert!(!s.checks.is_empty(), "{}", s.name);
    }
    assert!(report.passed());
}

#[test]
fn one_percent_correlation_error_is_caught() {
    let opts = ValidationOptions { cross_engine_configs: 20, correlation_perturbation: 0.01, ..Default::default() };
    let suite = cross_engine(&opts);
    assert!(!suite.passed());
    // Only ρf is perturbed; the σ3 comparisons still pass.
    assert!(suite.failures().all(|c| c.name.ends_with("rho_f")));
}

#[test]
fn experimental_lcl_parameter_is_marginal() {
    let report = run_validation(&ValidationOptions { cross_engine_configs: 1, ..Default::default() }).unwrap();
    assert!((report.lcl_parameter - 2.3).abs() < 0.1, "{}", report.lcl_parameter);
    assert_eq!(report.lcl_status, LclStatus::Marginal);
    assert_eq!(report.lcl_status.to_string(), "marginal");
}

#[test]
fn printed_correlation_is_reported_as_diagnostic() {
    let report = run_validation(&ValidationOptions { cross_engine_configs: 1, ..Default::default() }).unwrap();
    let derived = report.diagnostics.iter().find(|d| d.name == "rho_f_derived").unwrap();
    let printed = report.diagnostics.iter().find(|d| d.name == "rho_f_as_printed").unwrap();
    assert!((derived.value - 0.91501).abs() < 1e-4);
    assert!((printed.value - derived.value).abs() > 0.1);
}

#[test]
fn limit_suite_is_tight() {
    let s = limits();
    assert!(s.passed());
    assert!(s.worst_ratio() < 0.5, "{}", s.worst_ratio());
}

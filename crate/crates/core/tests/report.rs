use layerfv::report::{self, ExperimentRow, OutputFormat, RowStatus};
use layerfv::{Scheme, SimConfig};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![1e-300f64..1e300, -1e3f64..1e3]
}

prop_compose! {
    fn arb_row()(
        n in 3usize..200,
        t in finite(),
        eps in finite(),
        cfvm in any::<bool>(),
        blowup in any::<bool>(),
        vel in finite(),
        p in finite(),
        dt in finite(),
        theta in finite(),
        alpha in finite(),
        wall in 0.0f64..1e4,
    ) -> ExperimentRow {
        ExperimentRow {
            n,
            t,
            eps,
            scheme: if cfvm { Scheme::Cfvm } else { Scheme::Nfvm },
            vel_l2: (!blowup).then_some(vel),
            p_l2: (!blowup).then_some(p),
            dt,
            theta,
            alpha,
            status: if blowup { RowStatus::Blowup } else { RowStatus::Ok },
            wall_clock_s: wall,
        }
    }
}

proptest! {
    #[test]
    fn csv_round_trip(rows in prop::collection::vec(arb_row(), 1..20)) {
        let text = report::render(&rows, OutputFormat::Csv).unwrap();
        prop_assert_eq!(report::parse_csv(&text).unwrap(), rows);
    }
}

#[test]
fn identical_configs_give_identical_csv() {
    let base = SimConfig { t_end: 0.1, ..SimConfig::default() };
    let sweep = || {
        let mut rows = report::run_table(&[6], &[1e-3], &[Scheme::Cfvm, Scheme::Nfvm], &base, Some(2)).unwrap();
        for r in &mut rows {
            r.wall_clock_s = 0.0;
        }
        report::render(&rows, OutputFormat::Csv).unwrap()
    };
    assert_eq!(sweep(), sweep());
}

#[test]
fn rows_rerun_from_their_parameters() {
    let base = SimConfig { t_end: 0.1, ..SimConfig::default() };
    let row = report::run_one(6, &SimConfig { eps: 1e-4, scheme: Scheme::Cfvm, ..base }).unwrap();
    let again = report::run_one(row.n, &row.config(&base)).unwrap();
    assert_eq!(row.vel_l2, again.vel_l2);
    assert_eq!(row.p_l2, again.p_l2);
}

#[test]
fn emit_writes_file_and_rejects_bad_path() {
    let base = SimConfig { t_end: 0.05, ..SimConfig::default() };
    let row = report::run_one(5, &base).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.md");
    report::emit(std::slice::from_ref(&row), OutputFormat::Markdown, &path).unwrap();
    assert!(std::fs::read_to_string(&path).unwrap().contains("### Pressure L2 error"));
    assert!(report::emit(&[row], OutputFormat::Csv, &dir.path().join("missing/dir/x.csv")).is_err());
}

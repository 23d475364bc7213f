// SPDX-License-Identifier: MIT OR Apache-2.0
//! Series files, curve tables and grid configs.

use std::io::Write;

use countdiag::asymptotics::IndexKind;
use countdiag::CountSeries;
use countdiag_harness::{
    emit_curves, load_series_csv, read_series, write_series, CurveSpec, Family, GridConfig, HarnessError,
    NaPolicy,
};
use proptest::prelude::*;

#[test]
fn load_from_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "date,count\r\n2024-01-01,2\r\n2024-01-02,3\r\n2024-01-03,NA\r\n2024-01-04,1\r\n\r\n").unwrap();
    let s = load_series_csv(f.path(), NaPolicy::Mask).unwrap();
    assert_eq!(s.values(), &[2, 3, 0, 1]);
    assert_eq!(s.mask(), &[true, true, false, true]);
    let d = load_series_csv(f.path(), NaPolicy::Drop).unwrap();
    assert_eq!(d.values(), &[2, 3, 1]);
}

#[test]
fn missing_and_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_series_csv(dir.path().join("nope.csv"), NaPolicy::Mask), Err(HarnessError::Io(_))));
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert!(matches!(load_series_csv(&empty, NaPolicy::Mask), Err(HarnessError::Empty)));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "2\n3\n1.5\n").unwrap();
    match load_series_csv(&bad, NaPolicy::Mask) {
        Err(HarnessError::Parse { row, .. }) => assert_eq!(row, 3),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #[test]
    fn written_series_reads_back(cells in prop::collection::vec(prop::option::weighted(0.8, 0u64..1000), 1..300)) {
        let values = cells.iter().map(|c| c.unwrap_or(0)).collect();
        let mask = cells.iter().map(Option::is_some).collect();
        let series = CountSeries::new(values, mask).unwrap();
        let mut buf = Vec::new();
        write_series(&series, &mut buf).unwrap();
        prop_assert_eq!(read_series(buf.as_slice(), NaPolicy::Mask).unwrap(), series);
    }
}

#[test]
fn curves_fall_with_more_observations() {
    for (kind, n) in [
        (IndexKind::PoiDispersion, None),
        (IndexKind::SkewPoi, None),
        (IndexKind::BinDispersion, Some(10)),
        (IndexKind::SkewBin, Some(25)),
    ] {
        let rows = emit_curves(&CurveSpec::new(kind, 3.0, n)).unwrap();
        assert_eq!(rows.len(), 3 * 76);
        for curve in rows.chunks(76) {
            for w in curve.windows(2) {
                assert!(w[0].tau < w[1].tau);
                assert!(w[1].t_variance <= w[0].t_variance * (1.0 + 1e-12), "{kind} at tau {}", w[1].tau);
                assert!(w[1].t_bias.abs() <= w[0].t_bias.abs() * (1.0 + 1e-12), "{kind} at tau {}", w[1].tau);
            }
        }
    }
}

#[test]
fn binomial_dispersion_curve_is_compressed() {
    let poi = emit_curves(&CurveSpec::new(IndexKind::PoiDispersion, 3.0, None)).unwrap();
    for n in [5, 10, 25] {
        let bin = emit_curves(&CurveSpec::new(IndexKind::BinDispersion, 3.0, Some(n))).unwrap();
        let c = 1.0 - 1.0 / n as f64;
        for (p, b) in poi.iter().zip(&bin) {
            assert_eq!((p.tau, p.r), (b.tau, b.r));
            assert!((b.t_variance - c * p.t_variance).abs() <= 1e-13 * p.t_variance);
            assert!((b.t_bias - c * p.t_bias).abs() <= 1e-13 * p.t_bias.abs());
        }
    }
}

#[test]
fn binomial_curve_needs_upper_bound() {
    assert!(emit_curves(&CurveSpec::new(IndexKind::SkewBin, 3.0, None)).is_err());
}

#[test]
fn config_json() {
    let config =
        GridConfig::from_json(r#"{"family": "binomial", "n_values": [10], "replications": 500, "seed": 7}"#)
            .unwrap();
    assert_eq!(config.family, Family::Binomial);
    assert_eq!(config.t_values, vec![100, 250, 500, 1000]);
    assert_eq!(config.scenarios().unwrap().len(), 48);
    let text = serde_json::to_string(&config).unwrap();
    assert_eq!(GridConfig::from_json(&text).unwrap(), config);

    assert!(GridConfig::from_json(r#"{"family": "poisson", "replicates": 5}"#).is_err());
    assert!(GridConfig::from_json(r#"{"family": "negbin"}"#).is_err());
    let single = GridConfig::from_json(
        r#"{"family": "poisson", "t_values": [100], "r_values": [0], "tau_values": [0.8], "replications": 10}"#,
    )
    .unwrap();
    assert_eq!(single.scenarios().unwrap().len(), 1);
    let bad = GridConfig::from_json(r#"{"family": "poisson", "tau_values": [1.5]}"#).unwrap();
    assert!(bad.scenarios().is_err());
}

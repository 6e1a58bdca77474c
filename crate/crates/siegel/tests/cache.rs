//! The on-disk generator cache.

use std::fs;
use std::io::BufReader;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use siegel::cache::{expand_generators, read_series, series_file_name, series_to_string, CacheDir, CacheError, DiskSource};
use siegel_core::engine::GeneratorSource;
use siegel_core::generators::{igusa_generator, CohenTable, GeneratorId};
use siegel_core::index::FourierIndex;
use siegel_core::series::TruncatedSeries;

#[test]
fn extended_prefix_equals_a_direct_build() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = CacheDir::open(tmp.path()).unwrap();
    let mut h = CohenTable::new();
    let (small, wrote) = dir.ensure(GeneratorId::Chi12, 4, &mut h).unwrap();
    assert!(wrote);
    let (large, wrote) = dir.ensure(GeneratorId::Chi12, 9, &mut h).unwrap();
    assert!(wrote);
    assert_eq!(large, igusa_generator(GeneratorId::Chi12, 9).unwrap());
    assert_eq!(large.truncate(4), small);
    // both files stay; the smaller one serves small requests
    assert_eq!(dir.cached_trace(GeneratorId::Chi12), Some(9));
    assert_eq!(dir.load(GeneratorId::Chi12, 3).unwrap(), small.truncate(3));
    let (_, wrote) = dir.ensure(GeneratorId::Chi12, 7, &mut h).unwrap();
    assert!(!wrote);
}

#[test]
fn manifest_survives_reopening() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = CacheDir::open(tmp.path()).unwrap();
    let first = expand_generators(&mut dir, 5).unwrap();
    assert_eq!(first.written.len(), 4);
    assert!(first.cohen_written);
    let mut again = CacheDir::open(tmp.path()).unwrap();
    let second = expand_generators(&mut again, 5).unwrap();
    assert!(second.written.is_empty() && !second.cohen_written);
    for id in GeneratorId::ALL {
        assert_eq!(again.load(id, 5).unwrap(), igusa_generator(id, 5).unwrap());
    }
}

#[test]
fn corruption_and_absence_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = CacheDir::open(tmp.path()).unwrap();
    expand_generators(&mut dir, 4).unwrap();
    assert!(matches!(dir.load(GeneratorId::E4, 6), Err(CacheError::Missing(_))));

    let path = tmp.path().join(series_file_name(GeneratorId::E6, 4));
    let mut text = fs::read_to_string(&path).unwrap();
    text = text.replacen("-504", "-503", 1);
    fs::write(&path, text).unwrap();
    assert!(matches!(dir.load(GeneratorId::E6, 4), Err(CacheError::Corrupt { .. })));

    fs::remove_file(tmp.path().join(series_file_name(GeneratorId::E4, 4))).unwrap();
    assert!(dir.load(GeneratorId::E4, 4).is_err());
}

#[test]
fn disk_source_matches_memory_and_persists() {
    let tmp = tempfile::tempdir().unwrap();
    let mut src = DiskSource::new(CacheDir::open(tmp.path()).unwrap()).unwrap();
    let got = src.generator(GeneratorId::Chi10, 6).unwrap().clone();
    assert_eq!(got, igusa_generator(GeneratorId::Chi10, 6).unwrap());
    src.flush().unwrap();
    let dir = CacheDir::open(tmp.path()).unwrap();
    assert_eq!(dir.cached_trace(GeneratorId::Chi10), Some(6));
    assert!(dir.manifest().cohen_h.is_some());
}

fn arb_series() -> impl Strategy<Value = TruncatedSeries> {
    let entry = (0i64..5, 0i64..5, -8i64..=8, -10i64.pow(15)..10i64.pow(15), 1i64..50);
    (prop::collection::vec(entry, 0..30), 0u32..3).prop_map(|(raw, w)| {
        let entries = raw.into_iter().filter_map(|(a, c, b, n, d)| {
            let idx = FourierIndex::new(a, b, c).ok()?;
            Some((idx, BigRational::new(BigInt::from(n), BigInt::from(d))))
        });
        TruncatedSeries::new(4 + 2 * w, 10, entries).unwrap()
    })
}

proptest! {
    #[test]
    fn text_format_round_trips(s in arb_series()) {
        let text = series_to_string(&s);
        let back = read_series(BufReader::new(text.as_bytes())).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(series_to_string(&back), text);
    }
}

use chrono::{Duration, NaiveDate};
use csf::ingest::{iterate_run_to_failure, read_ims_file, write_ims_file, IMS_ROW_COUNT, IMS_SAMPLE_RATE_HZ};
use csf_core::simulate::white_noise;

fn quantized(n: usize, seed: u64) -> Vec<f64> {
    // IMS files store three decimals.
    white_noise(n, seed).iter().map(|v| (v * 1000.0).round() / 1000.0).collect()
}

#[test]
fn full_size_file_round_trips_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("2004.02.12.10.32.39");
    let channels: Vec<Vec<f64>> = (0..4).map(|c| quantized(IMS_ROW_COUNT, c)).collect();
    write_ims_file(&path, &channels).unwrap();
    let original = std::fs::read(&path).unwrap();

    let snap = read_ims_file(&path, IMS_SAMPLE_RATE_HZ).unwrap();
    assert!(snap.warnings.is_empty());
    assert_eq!(snap.n_rows(), IMS_ROW_COUNT);
    assert_eq!(snap.channels, channels);
    assert_eq!(snap.timestamp.unwrap().to_string(), "2004-02-12 10:32:39");
    for (c, expected) in channels.iter().enumerate() {
        let signal = snap.channel(c).unwrap();
        assert_eq!(signal.samples(), &expected[..]);
        assert_eq!(signal.sample_rate_hz(), IMS_SAMPLE_RATE_HZ);
    }
    assert!(snap.channel(4).is_err());

    let copy = dir.path().join("copy");
    write_ims_file(&copy, &snap.channels).unwrap();
    assert_eq!(std::fs::read(&copy).unwrap(), original);
}

#[test]
fn arbitrary_doubles_survive_a_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("2004.02.12.10.42.39");
    let channels = vec![white_noise(500, 9), white_noise(500, 10)];
    write_ims_file(&path, &channels).unwrap();
    let snap = read_ims_file(&path, IMS_SAMPLE_RATE_HZ).unwrap();
    assert_eq!(snap.channels, channels);
    assert_eq!(snap.warnings.len(), 1);
}

#[test]
fn run_to_failure_directory_is_walked_in_timestamp_order() {
    let dir = tempfile::tempdir().unwrap();
    let start = NaiveDate::from_ymd_opt(2004, 2, 12).unwrap().and_hms_opt(10, 32, 39).unwrap();
    let n_files = 984;
    let stamps: Vec<_> = (0..n_files).map(|i| start + Duration::minutes(10 * i as i64)).collect();
    // Write in a scrambled order so creation order says nothing.
    for k in 0..n_files {
        let i = (k * 587) % n_files;
        let name = stamps[i].format("%Y.%m.%d.%H.%M.%S").to_string();
        let channels: Vec<Vec<f64>> = (0..4).map(|c| vec![i as f64, c as f64, 0.5]).collect();
        write_ims_file(&dir.path().join(name), &channels).unwrap();
    }
    std::fs::write(dir.path().join("README"), "not a snapshot").unwrap();

    let run = iterate_run_to_failure(dir.path(), 2, IMS_SAMPLE_RATE_HZ).unwrap();
    assert_eq!(run.snapshots.len(), n_files);
    assert_eq!(run.errors.len(), 1);
    assert_eq!(run.warnings.len(), n_files);
    for (i, snap) in run.snapshots.iter().enumerate() {
        assert_eq!(snap.timestamp, stamps[i]);
        assert_eq!(snap.signal.samples(), &[i as f64, 2.0, 0.5]);
    }
}

#[test]
fn bad_files_are_reported_without_stopping_the_walk() {
    let dir = tempfile::tempdir().unwrap();
    write_ims_file(&dir.path().join("2004.02.12.10.32.39"), &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    std::fs::write(dir.path().join("2004.02.12.10.42.39"), "1.0\tx\n").unwrap();
    write_ims_file(&dir.path().join("2004.02.12.10.52.39"), &[vec![5.0, 6.0]]).unwrap();
    let run = iterate_run_to_failure(dir.path(), 1, IMS_SAMPLE_RATE_HZ).unwrap();
    assert_eq!(run.snapshots.len(), 1);
    assert_eq!(run.errors.len(), 2);
    assert!(iterate_run_to_failure(dir.path(), 7, IMS_SAMPLE_RATE_HZ).is_err());
    let empty = tempfile::tempdir().unwrap();
    assert!(iterate_run_to_failure(empty.path(), 0, IMS_SAMPLE_RATE_HZ).is_err());
}

use std::fs;
use std::path::Path;

use mars_core::io::{run_benchmark, FieldName, RunConfig};

fn short_run(field: FieldName, out: &Path) {
    let mut cfg = RunConfig::benchmark(field);
    cfg.set("h", "1/16,1/32").unwrap();
    cfg.set("t_end", "0.2").unwrap();
    cfg.out = out.to_path_buf();
    run_benchmark(&cfg).unwrap();
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_write_identical_csvs() {
    for field in [FieldName::VorticalShear, FieldName::Deformation] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        short_run(field, a.path());
        short_run(field, b.path());
        let (ca, cb) = (csvs(a.path()), csvs(b.path()));
        assert_eq!(ca.len(), 4);
        assert_eq!(ca, cb);
    }
}

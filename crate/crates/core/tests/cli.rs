use std::path::Path;
use std::process::{Command, Output};

fn ccsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccsim"))
        .args(args)
        .env_remove("RNG_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ccdm_encode_then_decode() {
    let bits = "1011001110101";
    let seq = stdout(&ccsim(&["ccdm", "encode", "--composition", "4,3,2,1", "--bits", bits]));
    let seq = seq.trim();
    assert_eq!(seq.split(',').count(), 10);
    let back = stdout(&ccsim(&["ccdm", "decode", "--composition", "4,3,2,1", "--symbols", seq]));
    assert_eq!(back.trim(), bits);

    let info = stdout(&ccsim(&["ccdm", "info", "--composition", "4,3,2,1"]));
    assert!(info.contains("num_sequences=12600"), "{info}");
    assert!(info.contains("input_bits=13"), "{info}");
}

#[test]
fn ccdm_rejects_wrong_bit_count() {
    let o = ccsim(&["ccdm", "encode", "--composition", "4,3,2,1", "--bits", "101"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn frame_then_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.ccsy");
    let p = path.to_str().unwrap();
    stdout(&ccsim(&["frame", "-n", "10", "--symbols", "1000", "--fec-block-len", "1000", "--out", p]));
    let out = stdout(&ccsim(&["metrics", p]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("n,pairing,interleaved,n_sim,kl_bits"));
    assert!(lines[1].starts_with("10,intra,0,1000,"), "{}", lines[1]);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn tiny_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let cfg = write(
        dir.path(),
        "tiny.toml",
        &format!(
            "[wdm]\nnum_channels = 1\n[link]\nnum_spans = 1\n[sweep]\nblock_lengths = [10]\npairing_modes = [\"intra\"]\n\
             interleave = [false]\nuniform_reference = false\nsymbols_per_run = 1024\nfec_block_len = 512\nnum_runs = 2\n\
             output = {:?}\n",
            csv.to_str().unwrap()
        ),
    );
    let o = ccsim(&["sweep", &cfg, "--quiet"]);
    stdout(&o);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[0].starts_with("n,pairing,interleaved,run,aggregate,snr_db"));
    assert!(lines[3].starts_with("10,intra,0,,1,"), "{}", lines[3]);
}

#[test]
fn validate_passes() {
    let out = stdout(&ccsim(&["validate"]));
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{out}");
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[link]\nnum_spanz = 3\n");
    let o = ccsim(&["sweep", &cfg]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("num_spanz"), "{err}");

    let cfg = write(dir.path(), "zero.toml", "[sweep]\nnum_runs = 0\n");
    let err = String::from_utf8_lossy(&ccsim(&["sweep", &cfg]).stderr).to_string();
    assert!(err.contains("sweep.num_runs"), "{err}");
}

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use garment_augkit::dataio::record::{parse_records, serialize_records, Record};
use garment_augkit::dataio::{
    load_png, parse_landmark_file, save_png, serialize_bbox_file, serialize_category_file,
    serialize_landmark_file, AnnotatedSample, Bbox, ClothesType,
};
use garment_augkit::heatmap::HeatmapStack;
use garment_augkit::orient::tensor_io::save_tensor;
use garment_augkit::{Image, Landmark, LandmarkSet, LandmarkSlot, RngStream, Visibility};
use ndarray::ArrayD;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_garment-augkit"));
    c.env_remove("GARMENT_AUGKIT_SEED");
    c
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

struct Dataset {
    dir: TempDir,
    samples: Vec<AnnotatedSample>,
}

impl Dataset {
    fn images(&self) -> PathBuf {
        self.dir.path().join("images")
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn dataset(n: usize, w: usize, h: usize, seed: u64) -> Dataset {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("images");
    fs::create_dir_all(images.join("img")).unwrap();
    let master = RngStream::new(seed, 9);
    let mut samples = Vec::new();
    for i in 0..n {
        let mut rng = master.derive(i as u64);
        let img = Image::from_fn(w, h, 3, |_, _, _| rng.unit()).unwrap();
        let path = format!("img/{i:03}.png");
        save_png(&images.join(&path), &img).unwrap();
        let ty = [ClothesType::Upper, ClothesType::Lower, ClothesType::Full][i % 3];
        let mut s = AnnotatedSample::new(path, ty);
        for slot in ty.slots() {
            let x = rng.index(w as u64) as f64;
            let y = rng.index(h as u64) as f64;
            s.landmarks.set(*slot, Some(Landmark::visible(x, y)));
        }
        s.bbox = Some(Bbox::new(2, 1, w as i64 - 3, h as i64 - 2).unwrap());
        s.category = Some("Tee".into());
        samples.push(s);
    }
    let ds = Dataset { dir, samples };
    fs::write(ds.file("list_landmarks.txt"), serialize_landmark_file(&ds.samples)).unwrap();
    let boxes: Vec<_> = ds.samples.iter().map(|s| (s.path.clone(), s.bbox.unwrap())).collect();
    fs::write(ds.file("list_bbox.txt"), serialize_bbox_file(&boxes)).unwrap();
    let cats: Vec<_> = ds.samples.iter().map(|s| (s.path.clone(), "Tee".to_string())).collect();
    fs::write(ds.file("list_category_img.txt"), serialize_category_file(&cats)).unwrap();
    ds
}

fn augment(ds: &Dataset, out: &Path, extra: &[&str]) -> Output {
    run(bin()
        .arg("augment")
        .arg("--images")
        .arg(ds.images())
        .arg("--landmarks")
        .arg(ds.file("list_landmarks.txt"))
        .arg("--bbox")
        .arg(ds.file("list_bbox.txt"))
        .arg("--category")
        .arg(ds.file("list_category_img.txt"))
        .arg("--out")
        .arg(out)
        .args(extra))
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

const SMALL: &[&str] = &["--set", "target_size=48", "--set", "alpha=30", "--set", "sigma=6"];

#[test]
fn augment_is_deterministic_across_runs_and_workers() {
    let ds = dataset(9, 60, 50, 1);
    let a = ds.file("a");
    let b = ds.file("b");
    assert!(augment(&ds, &a, &[&["--seed", "11", "--jobs", "1"], SMALL].concat()).status.success());
    assert!(augment(&ds, &b, &[&["--seed", "11", "--jobs", "3"], SMALL].concat()).status.success());
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta.len(), 9 + 5);
    assert_eq!(ta, tb);

    let c = ds.file("c");
    assert!(augment(&ds, &c, &[&["--seed", "12"], SMALL].concat()).status.success());
    assert_ne!(tree(&c), ta);
}

#[test]
fn disabled_augmentations_reproduce_the_inputs() {
    let ds = dataset(4, 40, 30, 2);
    let out = ds.file("out");
    let off = ["--set", "crop=false", "--set", "rotate=false", "--set", "elastic=false"];
    assert!(augment(&ds, &out, &off).status.success());
    for s in &ds.samples {
        let src = load_png(&ds.images().join(&s.path)).unwrap();
        let dst = load_png(&out.join("images").join(&s.path)).unwrap();
        assert_eq!(src, dst);
    }
    let lms = parse_landmark_file(&fs::read_to_string(out.join("list_landmarks.txt")).unwrap()).unwrap();
    for (a, b) in lms.iter().zip(&ds.samples) {
        assert_eq!(a.landmarks, b.landmarks);
    }
}

#[test]
fn emitted_landmarks_are_in_bounds_or_flagged() {
    let ds = dataset(100, 36, 36, 3);
    let out = ds.file("out");
    let args = ["--seed", "5", "--jobs", "4", "--set", "target_size=32", "--set", "alpha=20", "--set", "sigma=4"];
    assert!(augment(&ds, &out, &args).status.success());
    let recs = parse_records(&fs::read_to_string(out.join("annotations.txt")).unwrap()).unwrap();
    assert_eq!(recs.len(), 100);
    let mut flagged = 0;
    for r in &recs {
        let (w, h) = r.size.unwrap();
        for (_, lm) in r.sample.landmarks.iter() {
            let inside = lm.x >= 0.0 && lm.y >= 0.0 && lm.x < w as f64 && lm.y < h as f64;
            match lm.visibility {
                Visibility::OutOfFrame => flagged += 1,
                _ => assert!(inside, "{}: {lm:?} off a {w}x{h} canvas", r.sample.path),
            }
        }
    }
    let manifest = fs::read_to_string(out.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.lines().count(), 100);
    for (i, line) in manifest.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["index"], i);
        assert_eq!(v["status"], "ok");
        assert!(v["theta"].as_f64().is_some());
    }
    assert!(flagged < 800);
}

#[test]
fn unreadable_image_is_recorded_and_skipped() {
    let ds = dataset(3, 30, 30, 4);
    fs::write(ds.images().join("img/001.png"), b"not a png").unwrap();
    let out = ds.file("out");
    let o = augment(&ds, &out, SMALL);
    assert!(o.status.success());
    let manifest = fs::read_to_string(out.join("manifest.jsonl")).unwrap();
    let statuses: Vec<String> = manifest
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["status"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(statuses, ["ok", "error", "ok"]);
    let lms = parse_landmark_file(&fs::read_to_string(out.join("list_landmarks.txt")).unwrap()).unwrap();
    assert_eq!(lms.len(), 2);
}

#[test]
fn invalid_config_exits_nonzero() {
    let ds = dataset(1, 20, 20, 5);
    let cfg = ds.file("bad.cfg");
    fs::write(&cfg, "alpha = 10\nwobble = 3\n").unwrap();
    let o = augment(&ds, &ds.file("out"), &["--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("wobble"));
    let o = augment(&ds, &ds.file("out2"), &["--set", "sigma=-1"]);
    assert!(!o.status.success());
}

#[test]
fn seed_precedence() {
    let ds = dataset(2, 30, 30, 6);
    let cfg = ds.file("seed.cfg");
    fs::write(&cfg, "seed = 6\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let go = |name: &str, args: &[&str], env: Option<&str>| {
        let out = ds.file(name);
        let mut c = bin();
        c.arg("augment")
            .arg("--images")
            .arg(ds.images())
            .arg("--landmarks")
            .arg(ds.file("list_landmarks.txt"))
            .arg("--out")
            .arg(&out)
            .args(SMALL)
            .args(args);
        if let Some(v) = env {
            c.env("GARMENT_AUGKIT_SEED", v);
        }
        assert!(run(&mut c).status.success());
        tree(&out)
    };
    let flag6 = go("f6", &["--seed", "6"], None);
    let flag5 = go("f5", &["--seed", "5"], None);
    assert_eq!(go("env5", &[], Some("5")), flag5);
    assert_eq!(go("cfg6", &["--config", cfg], Some("5")), flag6);
    assert_eq!(go("flag5", &["--config", cfg, "--seed", "5"], Some("7")), flag5);
    assert_eq!(go("none", &[], None), go("zero", &["--seed", "0"], None));
}

fn write_records(path: &Path, recs: &[Record]) {
    fs::write(path, serialize_records(recs)).unwrap();
}

fn rec(path: &str, lms: LandmarkSet, cat: &str, scores: &[(&str, f64)]) -> Record {
    let mut s = AnnotatedSample::new(path, ClothesType::Full);
    s.landmarks = lms;
    s.category = Some(cat.into());
    let mut r = Record::new(s);
    r.size = Some((224, 224));
    if !scores.is_empty() {
        r.scores = Some(scores.iter().map(|(n, p)| (n.to_string(), *p)).collect());
    }
    r
}

fn eval(pred: &Path, gt: &Path, extra: &[&str]) -> String {
    let o = run(bin().arg("eval").arg("--pred").arg(pred).arg("--gt").arg(gt).args(extra));
    assert!(o.status.success());
    String::from_utf8(o.stdout).unwrap()
}

fn collars() -> LandmarkSet {
    LandmarkSet::empty()
        .with(LandmarkSlot::LeftCollar, Landmark::visible(80.0, 40.0))
        .with(LandmarkSlot::RightCollar, Landmark::visible(140.0, 42.0))
        .with(LandmarkSlot::LeftHem, Landmark::visible(70.0, 200.0))
}

#[test]
fn eval_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.txt");
    write_records(&gt, &[
        rec("a", collars(), "Tee", &[("Tee", 0.7), ("Skirt", 0.3)]),
        rec("b", collars(), "Skirt", &[("Tee", 0.1), ("Skirt", 0.9)]),
    ]);
    let table = eval(&gt, &gt, &["--k", "1,2"]);
    let ne: Vec<&str> = table.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(ne[0], "NE");
    assert_eq!(ne[1], "0.0000");
    assert_eq!(ne[9], "0.0000");
    assert!(table.lines().any(|l| l == "all\t100.00\t100.00"));
}

#[test]
fn swapped_collars_touch_exactly_two_slots() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.txt");
    let pred = dir.path().join("pred.txt");
    write_records(&gt, &[rec("a", collars(), "Tee", &[])]);
    let mut swapped = collars();
    swapped.set(LandmarkSlot::LeftCollar, collars().get(LandmarkSlot::RightCollar).copied());
    swapped.set(LandmarkSlot::RightCollar, collars().get(LandmarkSlot::LeftCollar).copied());
    write_records(&pred, &[rec("a", swapped, "Tee", &[])]);
    let table = eval(&pred, &gt, &[]);
    let ne: Vec<&str> = table.lines().nth(1).unwrap().split('\t').collect();
    let nonzero: Vec<usize> = (1..=8).filter(|&i| ne[i] != "-" && ne[i] != "0.0000").collect();
    assert_eq!(nonzero, [1, 2]);
}

#[test]
fn ctu_masked_eval_matches_hand_count() {
    // predictions over a vocabulary with categories outside the CTU subset
    let vocab = ["Tee", "Hoodie", "Sweater", "Skirt", "Dress", "Kimono"];
    let p = |v: [f64; 6]| -> Vec<(&'static str, f64)> { vocab.iter().copied().zip(v).collect() };
    let cases: [(&str, [f64; 6]); 10] = [
        ("tshirt", [0.6, 0.1, 0.1, 0.1, 0.1, 0.0]),  // Tee top -> hit
        ("tshirt", [0.2, 0.0, 0.0, 0.0, 0.8, 0.0]),  // Dress masked, Tee wins -> hit
        ("hoody", [0.1, 0.2, 0.3, 0.0, 0.4, 0.0]),   // Sweater after mask -> hit
        ("hoody", [0.5, 0.2, 0.1, 0.0, 0.2, 0.0]),   // Tee -> miss
        ("skirt", [0.0, 0.0, 0.0, 0.3, 0.0, 0.7]),   // Skirt after mask -> hit
        ("skirt", [0.4, 0.0, 0.0, 0.3, 0.0, 0.3]),   // Tee -> miss
        ("tshirt-long", [0.1, 0.0, 0.2, 0.0, 0.7, 0.0]), // Sweater -> hit
        ("polo", [0.0, 0.6, 0.0, 0.0, 0.4, 0.0]),    // Hoodie -> miss
        ("pants", [0.3, 0.0, 0.0, 0.0, 0.7, 0.0]),   // Tee -> miss
        ("bluse", [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),   // Skirt -> miss
    ];
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.txt");
    let pred = dir.path().join("pred.txt");
    let (mut g, mut pr) = (Vec::new(), Vec::new());
    for (i, (cat, v)) in cases.iter().enumerate() {
        let path = format!("s{i}");
        g.push(rec(&path, LandmarkSet::empty(), cat, &[]));
        pr.push(rec(&path, LandmarkSet::empty(), cat, &p(*v)));
    }
    write_records(&gt, &g);
    write_records(&pred, &pr);
    let table = eval(&pred, &gt, &["--k", "1", "--mask", "ctu"]);
    assert!(table.lines().any(|l| l == "all\t50.00"), "{table}");
    assert!(table.lines().any(|l| l == "hoody\t50.00"));
    assert!(table.lines().any(|l| l == "skirt\t50.00"));
}

#[test]
fn eval_reports_unmatched_paths() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.txt");
    let pred = dir.path().join("pred.txt");
    write_records(&gt, &[rec("a", collars(), "Tee", &[]), rec("b", collars(), "Tee", &[])]);
    write_records(&pred, &[rec("a", collars(), "Tee", &[]), rec("z", collars(), "Tee", &[])]);
    let o = run(bin().arg("eval").arg("--pred").arg(&pred).arg("--gt").arg(&gt));
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("2 unmatched"));
}

#[test]
fn oracle_subcommand() {
    let o = run(bin().args(["oracle", "--alpha", "0", "--trials", "10", "--strict"]));
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("pass 10/10"), "{text}");

    let o = run(bin().args(["oracle", "--alpha", "10000", "--trials", "10"]));
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let oof: usize = text
        .split("out-of-frame ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .unwrap();
    assert!(oof > 0);
}

#[test]
fn overlay_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let img = Image::from_fn(30, 30, 3, |x, y, c| ((x + 3 * y + c) % 5) as f64 / 8.0).unwrap();
    let src = dir.path().join("in.png");
    save_png(&src, &img).unwrap();
    let input = load_png(&src).unwrap();

    let plain = dir.path().join("plain.png");
    assert!(run(bin().arg("overlay").arg("--image").arg(&src).arg("--out").arg(&plain)).status.success());
    assert_eq!(load_png(&plain).unwrap(), input);

    let ann = dir.path().join("ann.txt");
    let lms = LandmarkSet::empty().with(LandmarkSlot::LeftCollar, Landmark::visible(10.0, 10.0));
    write_records(&ann, &[rec("in.png", lms, "Tee", &[])]);
    let crossed = dir.path().join("cross.png");
    let o = run(bin().arg("overlay").arg("--image").arg(&src).arg("--annotations").arg(&ann).arg("--out").arg(&crossed));
    assert!(o.status.success());
    let out = load_png(&crossed).unwrap();
    assert_eq!(out.pixel(10, 10), &[0.0, 0.0, 1.0]);
    let mut differing = 0;
    for y in 0..30 {
        for x in 0..30 {
            let on_cross = (y == 10 && (5..=15).contains(&x)) || (x == 10 && (5..=15).contains(&y));
            if out.pixel(x, y) != input.pixel(x, y) {
                assert!(on_cross, "({x}, {y}) changed");
                differing += 1;
            }
        }
    }
    assert_eq!(differing, 21);

    let tinted = dir.path().join("tint.png");
    let o = run(bin()
        .arg("overlay")
        .arg("--image")
        .arg(&src)
        .arg("--annotations")
        .arg(&ann)
        .arg("--render-heatmaps")
        .arg("3")
        .arg("--out")
        .arg(&tinted));
    assert!(o.status.success());
    let t = load_png(&tinted).unwrap();
    assert!(t.get(12, 12, 0) > input.get(12, 12, 0));

    let hm = dir.path().join("hm.bin");
    let stack = HeatmapStack::zeros(20, 20);
    let flat: Vec<f64> = stack.planes().iter().flat_map(|p| p.iter().copied()).collect();
    save_tensor(&hm, &ArrayD::from_shape_vec(vec![8, 20, 20], flat).unwrap()).unwrap();
    let o = bin()
        .arg("overlay")
        .arg("--image")
        .arg(&src)
        .arg("--heatmaps")
        .arg(&hm)
        .arg("--out")
        .arg(dir.path().join("bad.png"))
        .output()
        .unwrap();
    assert!(!o.status.success());
}

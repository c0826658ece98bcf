//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Expected values come from oracles written here, independent of
//! the library code under test.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use steer_core::geometry::{approach_vector, build_anchor_set, nearest_anchor, ApproachVector, GraspApproachClass, Quat};
use steer_core::language::ReorientDirection;
use steer_core::orchestrator::{execute_plan, parse_plan, validate_plan, IssueCode, Plan};
use steer_core::pipeline::{annotate_corpus, build_mix, relabel_episode, RelabelMode};
use steer_core::segmenter::SegmenterConfig;
use steer_core::sim::synth::{recoverable_labels, relabeling_grid, synth_corpus, synth_episode, CorpusSpec, NoiseConfig};
use steer_core::sim::{ControllerConfig, OrientationClass, SceneState};
use steer_core::skill::SkillCall;
use steer_core::trajectory::{Episode, SkillKind};
use steer_gateway::{router, AppState, GatewayConfig};
use tower::ServiceExt;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Round-trip annotation.

const OBJECTS: [&str; 4] = ["coke can", "pink cup", "apple", "black and white object"];

fn grid_episode(i: usize, noise: &NoiseConfig) -> Episode {
    let object = OBJECTS[i % OBJECTS.len()];
    let grid = relabeling_grid(object);
    synth_episode(
        &format!("acc-{i}"),
        &format!("pick {object}"),
        &grid[(i / OBJECTS.len()) % grid.len()],
        noise,
        &ControllerConfig::default(),
        i as u64,
    )
    .expect("grid scripts are realizable")
}

fn recovered(ep: &Episode) -> bool {
    let got: Vec<(SkillKind, Option<String>)> =
        relabel_episode(ep, &SegmenterConfig::default(), &build_anchor_set())
            .map(|s| s.into_iter().map(|s| (s.kind, s.modifier)).collect())
            .unwrap_or_default();
    got == recoverable_labels(ep.ground_truth_segments.as_ref().unwrap())
}

fn round_trip() -> Outcome {
    let n = 500;
    let t = Instant::now();
    let mut combos = BTreeMap::new();
    let mut clean = 0;
    let mut jittered = 0;
    for i in 0..n {
        let ep = grid_episode(i, &NoiseConfig::NONE);
        let truth = ep.ground_truth_segments.as_ref().unwrap();
        let class = truth[0].modifier.clone();
        let turns = truth.iter().filter(|s| s.kind == SkillKind::Reorient).count();
        let end = truth.last().unwrap().kind;
        *combos.entry((class, turns, end)).or_insert(0usize) += 1;
        clean += recovered(&ep) as usize;
        jittered += recovered(&grid_episode(i, &NoiseConfig::JITTER)) as usize;
    }
    let secs = t.elapsed().as_secs_f64();
    let classes: std::collections::BTreeSet<_> = combos.keys().map(|k| k.0.clone()).collect();
    let turns: std::collections::BTreeSet<_> = combos.keys().map(|k| k.1).collect();
    let ends: std::collections::BTreeSet<_> = combos.keys().map(|k| k.2).collect();
    let spans = classes.len() == 3 && turns == [0, 1, 2].into() && ends.len() == 2;
    ensure(
        spans && clean == n && jittered as f64 >= 0.95 * n as f64 && secs < 10.0,
        format!(
            "{} script shapes; noiseless {clean}/{n}, jittered {jittered}/{n} ({:.1}%), {secs:.2} s",
            combos.len(),
            100.0 * jittered as f64 / n as f64
        ),
    )
}

// Geometry.

fn random_unit_quat(rng: &mut StdRng) -> Quat {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return Quat::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n);
        }
    }
}

/// Second column of the rotation matrix of `q`: the image of (0, 1, 0).
fn matrix_oracle(q: &Quat) -> [f64; 3] {
    let (w, x, y, z) = (q.w, q.x, q.y, q.z);
    [2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z + w * x)]
}

fn lattice() -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for x in [-1.0, 0.0, 1.0] {
        for y in [-1.0, 0.0, 1.0] {
            for z in [-1.0, 0.0, 1.0] {
                if (x, y, z) != (0.0, 0.0, 0.0) {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

fn geometry() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let q = random_unit_quat(&mut rng);
        let got = approach_vector(&q).map_err(|e| e.to_string())?;
        let want = matrix_oracle(&q);
        let v = got.as_vector();
        for (a, b) in [v.x, v.y, v.z].into_iter().zip(want) {
            worst = worst.max((a - b).abs());
        }
    }
    let anchors = build_anchor_set();
    let raw = lattice();
    let mut agree = 0;
    for _ in 0..10_000 {
        let q = random_unit_quat(&mut rng);
        let v = [q.x, q.y, q.z];
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let v = [v[0] / n, v[1] / n, v[2] / n];
        let best = raw
            .iter()
            .max_by(|a, b| {
                let cos = |d: &[f64; 3]| (d[0] * v[0] + d[1] * v[1] + d[2] * v[2]) / (d.iter().map(|c| c * c).sum::<f64>()).sqrt();
                cos(a).total_cmp(&cos(b))
            })
            .unwrap();
        let got = nearest_anchor(&ApproachVector::from_array(v).unwrap(), &anchors).unwrap();
        let d = got.direction.as_vector();
        let scale = best.iter().map(|c| c * c).sum::<f64>().sqrt();
        let same = [d.x, d.y, d.z].iter().zip(best).all(|(a, b)| (a - b / scale).abs() < 1e-12);
        agree += same as usize;
    }
    ensure(
        worst <= 1e-9 && agree == 10_000,
        format!("max deviation {worst:.2e} over 1000 quaternions; argmax agreement {agree}/10000"),
    )
}

// Anchor taxonomy.

fn anchors() -> Outcome {
    let anchors = build_anchor_set();
    let mut hist: BTreeMap<&str, usize> = BTreeMap::new();
    for a in &anchors {
        *hist.entry(a.semantic_class.as_str()).or_default() += 1;
    }
    let want: BTreeMap<&str, usize> =
        [("top_down", 1), ("side", 8), ("diagonal", 8), ("upward", 9)].into_iter().collect();
    ensure(
        anchors.len() == 26 && hist == want,
        format!("{} anchors, histogram {hist:?} (3^3 - 1 nonzero {{-1,0,1}} directions)", anchors.len()),
    )
}

// Template fidelity.

fn random_object(rng: &mut StdRng) -> String {
    const WORDS: [&str; 8] = ["pink", "cup", "coke", "can", "rxbar", "blueberry", "water", "bottle"];
    const CHARS: &[char] = &['a', 'Z', '7', ' ', '"', '\\', '#', '(', ')', ';', ',', '\'', '-', 'é'];
    if rng.random_bool(0.6) {
        let n = rng.random_range(1..4);
        (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
    } else {
        loop {
            let n = rng.random_range(1..16);
            let s: String = (0..n).map(|_| CHARS[rng.random_range(0..CHARS.len())]).collect();
            if !s.trim().is_empty() {
                return s;
            }
        }
    }
}

fn random_call(rng: &mut StdRng) -> SkillCall {
    let object = random_object(rng);
    match rng.random_range(0..4) {
        0 => {
            let class = [GraspApproachClass::TopDown, GraspApproachClass::Side, GraspApproachClass::Diagonal]
                [rng.random_range(0..3)];
            SkillCall::grasp(object, class)
        }
        1 => {
            let d = [ReorientDirection::ToHorizontal, ReorientDirection::ToUpright][rng.random_range(0..2)];
            SkillCall::reorient(object, d)
        }
        2 => SkillCall::lift(object),
        _ => SkillCall::place(object),
    }
}

/// Reverse grammar over the four segment templates.
fn reverse(text: &str) -> Option<(&'static str, String, Option<&'static str>)> {
    if let Some(rest) = text.strip_prefix("grasp the ") {
        for (surface, modifier) in [("top-down", "top-down"), ("side", "side"), ("diagonal", "diagonal")] {
            if let Some(obj) = rest.strip_suffix(&format!(" in a {surface} grasp")) {
                return Some(("grasp", obj.to_string(), Some(modifier)));
            }
        }
        return None;
    }
    if let Some(rest) = text.strip_prefix("reorient the ") {
        for (phrase, modifier) in [("to be horizontal", "to_horizontal"), ("to be upright", "to_upright")] {
            if let Some(obj) = rest.strip_suffix(&format!(" {phrase}")) {
                return Some(("reorient", obj.to_string(), Some(modifier)));
            }
        }
        return None;
    }
    if let Some(obj) = text.strip_prefix("hold and lift the ") {
        return Some(("lift", obj.to_string(), None));
    }
    text.strip_prefix("place the ").map(|obj| ("place", obj.to_string(), None))
}

fn templates() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut rendered_ok = 0;
    let total_calls = 4000;
    for _ in 0..total_calls {
        let call = random_call(&mut rng);
        let wire = serde_json::to_value(&call).unwrap();
        let want = (
            wire["name"].as_str().unwrap().to_string(),
            wire["object"].as_str().unwrap().to_string(),
            wire.get("modifier").and_then(Value::as_str).map(str::to_string),
        );
        let got = reverse(&call.render_language())
            .map(|(k, o, m)| (k.to_string(), o, m.map(str::to_string)));
        rendered_ok += (got.as_ref() == Some(&want)) as usize;
    }
    let mut plans_ok = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..9);
        let calls: Vec<SkillCall> = (0..n).map(|_| random_call(&mut rng)).collect();
        let text = Plan::from_calls(calls.clone()).source_text;
        plans_ok += parse_plan(&text).is_ok_and(|p| p.calls == calls) as usize;
    }
    ensure(
        rendered_ok == total_calls && plans_ok == 1000,
        format!("reverse grammar {rendered_ok}/{total_calls} renderings; parse∘render {plans_ok}/1000 plans"),
    )
}

// Plan composition.

const POUR: &str = r#"grasp("pink cup", "side")
lift("pink cup")
reorient("pink cup", "to_horizontal")
reorient("pink cup", "to_upright")
place("pink cup")
"#;

const UNSTACK: &str = r#"grasp("top cup", "side")
lift("top cup")
reorient("top cup", "to_upright")
place("top cup")
"#;

fn composition() -> Outcome {
    let mut scene = SceneState::reset("single_cup", 0).map_err(|e| e.to_string())?;
    let plan = parse_plan(POUR).map_err(|e| e.to_string())?;
    let log = execute_plan(&plan, &mut scene);
    let saw_horizontal = log
        .entries
        .iter()
        .any(|e| e.scene.objects["pink cup"].orientation_class == OrientationClass::Horizontal);
    let cup = &scene.objects["pink cup"];
    let pour_ok = plan.calls.len() == 5
        && log.succeeded()
        && log.entries.len() == 5
        && saw_horizontal
        && cup.orientation_class == OrientationClass::Upright
        && !cup.held
        && scene.is_on_table("pink cup");

    let mut stacked = SceneState::reset("stacked", 0).map_err(|e| e.to_string())?;
    let started_horizontal = stacked.objects["top cup"].orientation_class == OrientationClass::Horizontal;
    let on_bottom = !stacked.is_on_table("top cup");
    let log2 = execute_plan(&parse_plan(UNSTACK).map_err(|e| e.to_string())?, &mut stacked);
    let top = &stacked.objects["top cup"];
    let unstack_ok = log2.succeeded()
        && started_horizontal
        && on_bottom
        && top.orientation_class == OrientationClass::Upright
        && stacked.is_on_table("top cup");
    ensure(
        pour_ok && unstack_ok,
        format!(
            "pour: {}/5 calls succeeded, horizontal reached {saw_horizontal}, upright on table {}; unstack: {}/4 succeeded, upright on table {}",
            log.entries.iter().filter(|e| e.success).count(),
            cup.orientation_class == OrientationClass::Upright && scene.is_on_table("pink cup"),
            log2.entries.iter().filter(|e| e.success).count(),
            top.orientation_class == OrientationClass::Upright && stacked.is_on_table("top cup"),
        ),
    )
}

// Scenario steering.

/// Plans that break pick/hold ordering, each with the index of the first
/// offending call and the issue it must raise.
fn violation_suite(objects: &[String]) -> Vec<(Vec<SkillCall>, usize, IssueCode)> {
    let mut suite = Vec::new();
    for (oi, object) in objects.iter().enumerate() {
        let other = &objects[(oi + 1) % objects.len()];
        for script in relabeling_grid(object) {
            // Without its grasp, the next call acts on nothing held.
            suite.push((script[1..].to_vec(), 0, IssueCode::OrderViolation));
            // Each non-grasp call hoisted before the grasp.
            for k in 1..script.len() {
                let mut s = script.clone();
                let c = s.remove(k);
                s.insert(0, c);
                suite.push((s, 0, IssueCode::OrderViolation));
            }
            // Acting on a different object than the one held.
            let mut s = script.clone();
            s[1] = match &s[1] {
                SkillCall::Lift { .. } => SkillCall::lift(other.clone()),
                SkillCall::Place { .. } => SkillCall::place(other.clone()),
                SkillCall::Reorient { direction, .. } => SkillCall::reorient(other.clone(), *direction),
                g => g.clone(),
            };
            suite.push((s, 1, IssueCode::OrderViolation));
            // Grasping a second object while holding the first.
            let mut s = script.clone();
            s.insert(1, SkillCall::grasp(other.clone(), GraspApproachClass::Side));
            suite.push((s, 1, IssueCode::GraspWhileHolding));
            // Handling the object again after putting it down.
            if matches!(script.last(), Some(SkillCall::Place { .. })) {
                for extra in [
                    SkillCall::lift(object.clone()),
                    SkillCall::place(object.clone()),
                    SkillCall::reorient(object.clone(), ReorientDirection::ToHorizontal),
                ] {
                    let mut s = script.clone();
                    s.push(extra);
                    suite.push((s.clone(), s.len() - 1, IssueCode::OrderViolation));
                }
            }
        }
    }
    suite
}

fn steering() -> Outcome {
    let mut scene = SceneState::reset("potted_plant", 0).map_err(|e| e.to_string())?;
    let top = scene.exec(&SkillCall::grasp("flower pot", GraspApproachClass::TopDown)).map_err(|e| e.to_string())?;
    let mut scene = SceneState::reset("potted_plant", 0).map_err(|e| e.to_string())?;
    let side = scene.exec(&SkillCall::grasp("flower pot", GraspApproachClass::Side)).map_err(|e| e.to_string())?;
    let steering_ok = !top.success && top.reason == "disturbed attachment" && side.success;

    let clutter = SceneState::reset("clutter", 0).map_err(|e| e.to_string())?;
    let objects: Vec<String> = clutter.objects.keys().cloned().collect();
    let suite = violation_suite(&objects);
    let flagged = suite
        .iter()
        .filter(|(calls, index, code)| {
            let report = validate_plan(&Plan::from_calls(calls.clone()), &clutter);
            report.errors.iter().any(|e| e.index == *index && e.code == *code)
        })
        .count();
    // Control: the unmutated scripts raise nothing.
    let false_alarms = objects
        .iter()
        .flat_map(|o| relabeling_grid(o))
        .filter(|s| !validate_plan(&Plan::from_calls(s.clone()), &clutter).is_ok())
        .count();
    ensure(
        steering_ok && flagged == suite.len() && false_alarms == 0,
        format!(
            "top-down: success={} reason {:?}; side: success={}; violations flagged {flagged}/{}; valid plans flagged {false_alarms}",
            top.success,
            top.reason,
            side.success,
            suite.len()
        ),
    )
}

// Mixing.

fn mixing() -> Outcome {
    let even = build_mix(&[("A", 1.0), ("B", 1.0)], RelabelMode::Augment).map_err(|e| e.to_string())?;
    let sized = build_mix(&[("A", 70_000.0), ("B", 15_000.0)], RelabelMode::Augment).map_err(|e| e.to_string())?;
    let single = build_mix(&[("A", 3.0)], RelabelMode::Augment).map_err(|e| e.to_string())?;
    let w = |m: &steer_core::pipeline::MixManifest, p: &str| m.weight_of(p).unwrap_or(f64::NAN);
    let errs = [
        (w(&even, "A") - 0.5).abs(),
        (w(&even, "B") - 0.5).abs(),
        (w(&sized, "A") - 70.0 / 85.0).abs(),
        (w(&sized, "B") - 15.0 / 85.0).abs(),
        (w(&single, "A") - 1.0).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let draws = 200_000;
    let share = sized.sampler(11).take(draws).filter(|&i| i == 0).count() as f64 / draws as f64;
    ensure(
        worst <= 1e-9 && !worst.is_nan(),
        format!(
            "A/B {:.4}/{:.4}; 70K/15K {:.4}/{:.4}; max error {worst:.1e}; sampler share of A {share:.4}",
            w(&even, "A"),
            w(&even, "B"),
            w(&sized, "A"),
            w(&sized, "B")
        ),
    )
}

// Performance.

fn same_bytes(a: &Path, b: &Path) -> std::io::Result<bool> {
    if std::fs::metadata(a)?.len() != std::fs::metadata(b)?.len() {
        return Ok(false);
    }
    let (mut ra, mut rb) = (BufReader::new(File::open(a)?), BufReader::new(File::open(b)?));
    let (mut ba, mut bb) = (vec![0u8; 1 << 20], vec![0u8; 1 << 20]);
    loop {
        let n = ra.read(&mut ba)?;
        if n == 0 {
            return Ok(true);
        }
        rb.read_exact(&mut bb[..n])?;
        if ba[..n] != bb[..n] {
            return Ok(false);
        }
    }
}

fn performance(info: &mut Vec<String>) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("episodes.jsonl");
    let mut spec = CorpusSpec::single(
        "pour",
        "pick {object}",
        &["grasp:side", "lift", "reorient:to_horizontal", "reorient:to_upright", "place"],
        &["pink cup", "coke can", "water bottle"],
    );
    spec.noise = NoiseConfig::JITTER;
    let n = 70_000;
    let t = Instant::now();
    {
        let mut sink = BufWriter::new(File::create(&input).map_err(|e| e.to_string())?);
        synth_corpus(&spec, n, 1, &mut sink).map_err(|e| e.to_string())?;
    }
    let synth_secs = t.elapsed().as_secs_f64();
    let steps = {
        let mut line = String::new();
        std::io::BufRead::read_line(&mut BufReader::new(File::open(&input).map_err(|e| e.to_string())?), &mut line)
            .map_err(|e| e.to_string())?;
        serde_json::from_str::<Value>(&line).map_err(|e| e.to_string())?["steps"].as_array().map_or(0, Vec::len)
    };
    let mut times = BTreeMap::new();
    let mut reports = Vec::new();
    for workers in [1, 4, 8] {
        let out = dir.path().join(format!("segments-{workers}.jsonl"));
        let report = annotate_corpus(&input, &out, &SegmenterConfig::default(), workers).map_err(|e| e.to_string())?;
        times.insert(workers, report.wall_time);
        reports.push(report);
    }
    let base = dir.path().join("segments-1.jsonl");
    let identical = [4, 8]
        .iter()
        .map(|w| same_bytes(&base, &dir.path().join(format!("segments-{w}.jsonl"))))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .all(|b| b);
    let complete = reports.iter().all(|r| r.episodes_in == n && r.episodes_segmented == n);
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    info.push(format!(
        "INFO speedup: 8 workers {:.2} s vs 1 worker {:.2} s (ratio {:.2}, bound 0.5) on {cores} available core(s)",
        times[&8],
        times[&1],
        times[&8] / times[&1]
    ));
    ensure(
        complete && identical && steps == 100 && times[&8] < 60.0,
        format!(
            "{n} episodes x {steps} steps synthesized in {synth_secs:.1} s; annotate 1/4/8 workers {:.2}/{:.2}/{:.2} s; byte-identical {identical}; segments {}",
            times[&1], times[&4], times[&8], reports[0].segments_out
        ),
    )
}

// Self-improvement wiring.

async fn send(app: &axum::Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = axum::body::to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn self_improvement() -> Outcome {
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let app = router(Arc::new(AppState::new(GatewayConfig::default()).map_err(|e| e.to_string())?));
        let task = "pour from the pink cup";
        let (_, created) = send(&app, "/sessions", json!({ "scenario": "single_cup" })).await;
        let id = created["session_id"].as_str().ok_or("no session id")?.to_string();
        let (_, before) = send(&app, &format!("/sessions/{id}/planner-request"), json!({ "task": task })).await;
        let (s, _) = send(&app, &format!("/sessions/{id}/plan"), json!({ "program": POUR, "mode": "execute" })).await;
        if s != StatusCode::OK {
            return Err(format!("execute returned {s}"));
        }
        let (s, _) = send(&app, &format!("/sessions/{id}/outcome"), json!({ "task": task, "succeeded": true })).await;
        if s != StatusCode::OK {
            return Err(format!("outcome returned {s}"));
        }
        let (_, after) = send(&app, &format!("/sessions/{id}/planner-request"), json!({ "task": task })).await;
        let had_none = before["request"]["examples"].as_array().is_some_and(Vec::is_empty);
        let contains = after["request"]["examples"].as_array().is_some_and(|e| e.contains(&json!(POUR)));
        ensure(
            had_none && contains,
            format!("examples before: {}; after: {}", before["request"]["examples"], after["request"]["examples"]),
        )
    })
}

fn main() -> ExitCode {
    let mut info = Vec::new();
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Vec<String>) -> Outcome>)> = vec![
        ("round-trip annotation", Box::new(|_| round_trip())),
        ("geometry oracle", Box::new(|_| geometry())),
        ("anchor taxonomy", Box::new(|_| anchors())),
        ("template fidelity", Box::new(|_| templates())),
        ("pour composition", Box::new(|_| composition())),
        ("scenario steering", Box::new(|_| steering())),
        ("mixing", Box::new(|_| mixing())),
        ("performance", Box::new(performance)),
        ("self-improvement wiring", Box::new(|_| self_improvement())),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| check(&mut info)))
            .unwrap_or_else(|p| Err(format!("panicked: {}", p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())));
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    for line in info {
        println!("{line}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

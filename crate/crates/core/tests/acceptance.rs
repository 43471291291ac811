// One PASS/FAIL line per acceptance criterion. The lines are the record;
// the target exits 0 either way so known red criteria stay visible without
// breaking the workspace run. Set ACCEPTANCE_STRICT=1 to exit 1 on any FAIL.

use std::collections::BTreeMap;
use std::time::Instant;

use confinium::eigensolve::{shoot_energy, solve_bound_states};
use confinium::observables::{expectation_set, superpose, virial_report};
use confinium::report::{compare, reference_entries, ComparisonRow, Quantity, Source, TableId, Tolerances};
use confinium::{ExpectationSet, Result, StateSpec, SystemKind, SystemSpec, TruncationPolicy, VirialReport};
use rayon::prelude::*;

type Solved = Result<(VirialReport, ExpectationSet)>;

struct Cells {
    systems: Vec<SystemSpec>,
    states: Vec<Result<Vec<Solved>>>,
}

impl Cells {
    fn get(&self, sys: &SystemSpec, st: StateSpec) -> Solved {
        let g = self.systems.iter().position(|s| s == sys).expect("solved");
        match &self.states[g] {
            Ok(v) => v[st.n_index as usize].clone(),
            Err(e) => Err(e.clone()),
        }
    }
}

fn solve_all(policy: &TruncationPolicy) -> Cells {
    let mut top: Vec<(SystemSpec, u32)> = Vec::new();
    for e in reference_entries() {
        match top.iter_mut().find(|(s, _)| *s == e.system) {
            Some(t) => t.1 = t.1.max(e.state.n_index),
            None => top.push((e.system.clone(), e.state.n_index)),
        }
    }
    let states = top
        .par_iter()
        .map(|(sys, n)| {
            let ss = solve_bound_states(sys, *n as usize + 1, policy)?;
            Ok(ss
                .iter()
                .map(|s| Ok((virial_report(sys, s)?, expectation_set(sys, s)?)))
                .collect())
        })
        .collect();
    Cells { systems: top.into_iter().map(|(s, _)| s).collect(), states }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn rows_verdict(rows: &[ComparisonRow]) -> Verdict {
    let counted: Vec<&ComparisonRow> = rows.iter().filter(|r| !r.disputed()).collect();
    let fails: Vec<&&ComparisonRow> = counted.iter().filter(|r| !r.pass).collect();
    let mut detail = format!(
        "{}/{} cells pass, {} disputed",
        counted.len() - fails.len(),
        counted.len(),
        rows.len() - counted.len()
    );
    for r in fails.iter().take(4) {
        let e = &r.reference;
        detail.push_str(&format!(
            "; {} {} {} {}: {} vs {}",
            e.table_id, e.label, e.params, e.quantity.name(), r.computed, e.expected()
        ));
    }
    if fails.len() > 4 {
        detail.push_str(&format!("; +{} more", fails.len() - 4));
    }
    Verdict { pass: fails.is_empty() && !counted.is_empty(), detail }
}

fn table_rows(cells: &Cells, pick: impl Fn(TableId, Source, Quantity) -> bool) -> Vec<ComparisonRow> {
    reference_entries()
        .iter()
        .filter(|e| pick(e.table_id, e.source, e.quantity))
        .map(|e| compare(e, cells.get(&e.system, e.state).map(|(r, _)| r), Tolerances::default()))
        .collect()
}

fn criterion_4(cells: &Cells) -> Verdict {
    let rows = table_rows(cells, |t, _, q| t == TableId::IV || (t == TableId::V && q == Quantity::Energy));
    let mut v = rows_verdict(&rows);
    // the computed four quantities must agree among themselves
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for e in reference_entries().iter().filter(|e| e.table_id == TableId::V && e.quantity == Quantity::DV2) {
        match cells.get(&e.system, e.state) {
            Ok((r, _)) => worst = worst.max(r.spread / r.dV2.abs()),
            Err(_) => bad += 1,
        }
    }
    v.detail.push_str(&format!("; Table V spread/dV2 max {worst:.1e}"));
    if worst > 1e-6 || bad > 0 {
        v.pass = false;
        v.detail.push_str(&format!(" ({bad} unsolved)"));
    }
    v
}

fn criterion_6(policy: &TruncationPolicy) -> Verdict {
    let inf = f64::INFINITY;
    let anchors = [
        ("CHO1D n=0", SystemSpec::cho1d(1.0, inf), 0, 0.125),
        ("CHO1D n=1", SystemSpec::cho1d(1.0, inf), 1, 0.375),
        ("CHO3D 1s", SystemSpec::cho3d(1.0, inf, 0), 0, 0.375),
        ("H 1s", SystemSpec::cha(inf, 0), 0, 1.0),
        ("H 2s", SystemSpec::cha(inf, 0), 1, 3.0 / 16.0),
        ("H 2p", SystemSpec::cha(inf, 1), 0, 1.0 / 48.0),
    ];
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    let mut check = |name: String, want: f64, got: Result<f64>| match got {
        Ok(g) => {
            let rel = (g - want).abs() / want.abs();
            worst = worst.max(rel);
            if rel > 1e-8 {
                fails.push(format!("{name}: {g} vs {want}"));
            }
        }
        Err(e) => fails.push(format!("{name}: {e}")),
    };
    for (name, sys, n, dv2) in anchors {
        let solved = solve_bound_states(&sys, n + 1, policy)
            .and_then(|ss| Ok((virial_report(&sys, &ss[n])?, expectation_set(&sys, &ss[n])?)));
        for q in [Quantity::DV2, Quantity::DT2, Quantity::Cross1, Quantity::Cross2] {
            check(format!("{name} {}", q.name()), dv2, solved.clone().map(|(r, _)| q.of(&r)));
        }
        if name == "H 1s" {
            check("H 1s t2 direct".into(), 1.25, solved.clone().map(|(_, x)| x.t2));
            check("H 1s t2 via energy".into(), 1.25, solved.map(|(r, _)| r.t2_eq6));
        }
    }
    Verdict { pass: fails.is_empty(), detail: format!("max rel err {worst:.1e}; {}", fails.join("; ")) }
}

fn criterion_7(cells: &Cells) -> Verdict {
    let mut n = 0;
    let mut fails = Vec::new();
    for (sys, states) in cells.systems.iter().zip(&cells.states) {
        let states = match states {
            Ok(s) => s,
            Err(e) => {
                fails.push(format!("{} unsolved: {e}", sys.kind.name()));
                continue;
            }
        };
        for (i, s) in states.iter().enumerate() {
            let (r, x) = match s {
                Ok(v) => v,
                Err(e) => {
                    fails.push(format!("{} state {i}: {e}", sys.kind.name()));
                    continue;
                }
            };
            n += 1;
            let tag = format!("{} {}", sys.kind.name(), StateSpec::new(i as u32).label(sys));
            if r.spread > 1e-6 * r.dV2.abs().max(1.0) {
                fails.push(format!("{tag} spread {:.2e}", r.spread));
            }
            if r.t2_gap > 1e-6 * x.t2.max(1.0) {
                fails.push(format!("{tag} t2_gap {:.2e}", r.t2_gap));
            }
            if r.dH2.abs() > 1e-6 * (r.energy * r.energy).max(1.0) {
                fails.push(format!("{tag} dH2 {:.2e}", r.dH2));
            }
            if (x.tv - x.vt).abs() > 1e-6 * x.tv.abs().max(1.0) {
                fails.push(format!("{tag} |tv-vt| {:.2e}", (x.tv - x.vt).abs()));
            }
        }
    }
    let pass = fails.is_empty() && n > 0;
    fails.truncate(4);
    Verdict { pass, detail: format!("{n} states; {}", fails.join("; ")) }
}

fn criterion_8(policy: &TruncationPolicy) -> Verdict {
    // the level gap must be large enough for a 1% admixture to clear 1e-5
    let systems = [
        SystemSpec::cha(5.0, 0),
        SystemSpec::cha(2.0, 1),
        SystemSpec::cho1d(1.0, 1.0),
        SystemSpec::cho3d(1.0, 2.0, 0),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for sys in systems {
        let out = solve_bound_states(&sys, 2, policy).and_then(|s| {
            let predicted = 1e-4 * (s[1].energy - s[0].energy).powi(2) / 1.0001f64.powi(2);
            let mixed = virial_report(&sys, &superpose(&s[0], &s[1], 0.01)?)?.dH2;
            let pure = [virial_report(&sys, &s[0])?, virial_report(&sys, &s[1])?];
            Ok((predicted, mixed, pure))
        });
        match out {
            Ok((p, d, pure)) => {
                let ok_mix = (d - p).abs() <= 0.05 * p && d > 1e-5;
                let ok_pure = pure.iter().all(|r| r.dH2.abs() < 1e-6 * (r.energy * r.energy).max(1.0));
                pass &= ok_mix && ok_pure;
                detail.push(format!("{} mix {d:.4e} vs {p:.4e}", sys.kind.name()));
                if !ok_pure {
                    detail.push("pure state dH2 too large".into());
                }
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{}: {e}", sys.kind.name()));
            }
        }
    }
    Verdict { pass, detail: detail.join("; ") }
}

fn criterion_9(policy: &TruncationPolicy) -> Verdict {
    let cases = [
        (SystemSpec::cho1d(1.0, 0.5), 0),
        (SystemSpec::cho1d(1.0, 1.0), 1),
        (SystemSpec::cho1d(1.0, 2.0), 0),
        (SystemSpec::cho1d(1.0, 3.0), 2),
        (SystemSpec::cho3d(1.0, 0.5, 0), 0),
        (SystemSpec::cho3d(1.0, 1.0, 1), 0),
        (SystemSpec::cho3d(1.0, 2.0, 0), 1),
        (SystemSpec::cho3d(1.0, 3.0, 2), 0),
        (SystemSpec::cha(0.5, 0), 0),
        (SystemSpec::cha(1.0, 1), 0),
        (SystemSpec::cha(2.0, 0), 1),
        (SystemSpec::cha(5.0, 0), 0),
    ];
    let results: Vec<Result<(f64, f64)>> = cases
        .par_iter()
        .map(|(sys, n)| {
            let ss = solve_bound_states(sys, n + 2, policy)?;
            let e = ss[*n].energy;
            let below = if *n == 0 { e - (ss[1].energy - e) } else { ss[n - 1].energy };
            let lo = 0.5 * (below + e);
            let hi = 0.5 * (e + ss[n + 1].energy);
            let shot = shoot_energy(sys, &StateSpec::new(*n as u32), (lo, hi), 1e-14)?;
            Ok((e, shot))
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    for ((sys, n), r) in cases.iter().zip(results) {
        let tag = format!("{} {}", sys.kind.name(), StateSpec::new(*n as u32).label(sys));
        match r {
            Ok((m, s)) => {
                let rel = (m - s).abs() / s.abs();
                worst = worst.max(rel);
                if rel > 1e-7 {
                    fails.push(format!("{tag}: {m} vs {s}"));
                }
            }
            Err(e) => fails.push(format!("{tag}: {e}")),
        }
    }
    Verdict {
        pass: fails.is_empty(),
        detail: format!("12 cases, max rel diff {worst:.1e}; {}", fails.join("; ")),
    }
}

fn criterion_10(cells: &Cells) -> Verdict {
    // dT2 along the confinement parameter, per table and state
    let mut series: BTreeMap<(TableId, String), Vec<(f64, f64)>> = BTreeMap::new();
    let mut fails = Vec::new();
    for e in reference_entries() {
        if e.source != Source::Body || e.quantity != Quantity::DT2 {
            continue;
        }
        let (t, param) = match e.system.kind {
            SystemKind::Cho1d => (TableId::I, e.system.x_c()),
            SystemKind::Cho3d => (TableId::II, e.system.r_c()),
            SystemKind::Cha => (TableId::III, e.system.r_c()),
            _ => continue,
        };
        match cells.get(&e.system, e.state) {
            Ok((r, _)) => series.entry((t, e.label.clone())).or_default().push((param, r.dT2)),
            Err(err) => fails.push(format!("{t} {}: {err}", e.label)),
        }
    }
    let n = series.len();
    for ((t, label), mut pts) in series {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let increasing = t != TableId::III;
        let ok = pts.windows(2).all(|w| if increasing { w[1].1 > w[0].1 } else { w[1].1 < w[0].1 });
        if !ok {
            fails.push(format!("{t} {label} not strictly {}", if increasing { "increasing" } else { "decreasing" }));
        }
    }
    let detail = format!("{n} series; {}", fails.join("; "));
    Verdict { pass: fails.is_empty() && n > 0, detail }
}

fn main() {
    let start = Instant::now();
    let policy = TruncationPolicy::from_env().expect("policy");
    let cells = solve_all(&policy);

    let rows_for = |pick: &dyn Fn(TableId, Source, Quantity) -> bool| rows_verdict(&table_rows(&cells, pick));
    let results = vec![
        ("Table I reproduction", rows_for(&|t, _, _| t == TableId::I)),
        ("Table II reproduction", rows_for(&|t, _, _| t == TableId::II)),
        ("Table III reproduction", rows_for(&|t, _, _| t == TableId::III)),
        ("Tables IV-V reproduction and HICHA literature values", criterion_4(&cells)),
        ("Tables VI-VII reproduction", rows_for(&|t, _, _| t == TableId::VI || t == TableId::VII)),
        ("free-limit anchors", criterion_6(&policy)),
        ("identity suite", criterion_7(&cells)),
        ("sufficiency discrimination", criterion_8(&policy)),
        ("matrix vs shooting", criterion_9(&policy)),
        ("trend properties", criterion_10(&cells)),
    ];
    let mut failed = 0;
    for (i, (name, v)) in results.iter().enumerate() {
        if !v.pass {
            failed += 1;
        }
        let detail = v.detail.trim_end_matches("; ");
        println!("criterion {:>2} {}: {name} ({detail})", i + 1, if v.pass { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria pass in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}

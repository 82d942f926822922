//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always
//! show up in `cargo test` output.

use std::collections::BTreeMap;
use std::fs;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ap3d_core::array::ApArray;
use ap3d_core::bits::Bits;
use ap3d_core::kernels::{
    lut_apply, vector_add, vector_compare_gt, vector_multiply, vector_subtract, BitColumns, FieldSpec, PassTable,
};
use ap3d_core::models::{
    ap_dynamic_norm_per_pu, ap_power, ap_power_for, ap_pu_count, ap_speedup, break_even_area, simd_power,
    simd_pu_count, simd_speedup, ParamSet,
};
use ap3d_core::thermal::{
    reference_floorplan, simulate, solve_steady, Block, Chip, Floorplan, LayerStack, PowerMap, ThermalGrid,
};
use ap3d_core::workloads::{
    bs_error_bound, bs_oracle, dmm_oracle, fft_error_bound, fft_max_error, fft_oracle, random_fft_input,
    random_options, run_black_scholes, run_dmm, run_fft, Market,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn load(arr: &mut ApArray, rows: &[Vec<(FieldSpec, u128)>]) {
    let w = arr.width();
    for (r, fields) in rows.iter().enumerate() {
        let (mut data, mut mask) = (Bits::zeros(w), Bits::zeros(w));
        for (f, v) in fields {
            for i in 0..f.width {
                data.set(f.col(i), (v >> i) & 1 == 1);
                mask.set(f.col(i), true);
            }
        }
        arr.write_row(r, &data, &mask).unwrap();
    }
    arr.reset_ledger();
}

fn random_words(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<u128> {
    let lim = if m == 128 { u128::MAX } else { (1u128 << m) - 1 };
    (0..n).map(|_| rng.gen::<u128>() & lim).collect()
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut parts = Vec::new();
    for m in [2usize, 4, 8, 16, 32] {
        let start = Instant::now();
        let n = 1024;
        let (a, b) = (random_words(&mut rng, n, m), random_words(&mut rng, n, m));
        let (fa, fb) = (FieldSpec::new(0, m), FieldSpec::new(m, m));
        let mut arr = ApArray::new(n, 2 * m + 1).unwrap();
        load(&mut arr, &a.iter().zip(&b).map(|(&x, &y)| vec![(fa, x), (fb, y)]).collect::<Vec<_>>());
        vector_add(&mut arr, fa, fb, 2 * m).unwrap();
        let cycles = arr.ledger().cycles;
        let took = start.elapsed();
        parts.push(format!("m={m}: {cycles} cycles in {:.1} ms", took.as_secs_f64() * 1e3));
        if cycles != 8 * m as u64 || took >= Duration::from_secs(1) {
            return Err(parts.join(", "));
        }
    }
    Ok(parts.join(", "))
}

fn criterion_2() -> Check {
    let adder = PassTable::full_adder();
    // (c, b, a) -> (c', b') with b' the sum bit and c' the carry out
    let mut scalar_ok = true;
    for s in 0..8u8 {
        let state = [s & 4 != 0, s & 2 != 0, s & 1 != 0];
        let total = state.iter().filter(|&&x| x).count();
        scalar_ok &= adder.evaluate(state) == [total >= 2, total % 2 == 1];
    }
    // the same on an array holding all eight states
    let mut arr = ApArray::new(8, 3).unwrap();
    let rows: Vec<_> = (0..8u128)
        .map(|s| {
            vec![(FieldSpec::new(0, 1), s & 1), (FieldSpec::new(1, 1), s >> 1 & 1), (FieldSpec::new(2, 1), s >> 2 & 1)]
        })
        .collect();
    load(&mut arr, &rows);
    adder.apply(&mut arr, BitColumns { a: 0, b: 1, c: 2 }).unwrap();
    let array_ok = (0..8usize).all(|s| {
        let total = s.count_ones() as usize;
        arr.peek(s, 1) == (total % 2 == 1) && arr.peek(s, 2) == (total >= 2)
    });

    let mut wrong = 0;
    let mut perms = 0;
    for p in permutations(4) {
        if p == [0, 1, 2, 3] {
            continue;
        }
        perms += 1;
        let t = adder.reordered(&p);
        let bad = (0..8u8).any(|s| {
            let state = [s & 4 != 0, s & 2 != 0, s & 1 != 0];
            t.evaluate(state) != adder.evaluate(state)
        });
        wrong += bad as usize;
    }
    ensure(
        scalar_ok && array_ok && wrong >= 1,
        format!("table rows exact: {scalar_ok}, array rows exact: {array_ok}, {wrong}/{perms} reorderings give a wrong output"),
    )
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn kernel_oracles(rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<String>, String> {
    let mut done = Vec::new();
    for m in [8usize, 32] {
        let (a, b) = (random_words(rng, n, m), random_words(rng, n, m));
        let lim = (1u128 << m) - 1;
        let (fa, fb) = (FieldSpec::new(0, m), FieldSpec::new(m, m));
        let rows: Vec<_> = a.iter().zip(&b).map(|(&x, &y)| vec![(fa, x), (fb, y)]).collect();

        let mut arr = ApArray::new(n, 2 * m + 1).unwrap();
        load(&mut arr, &rows);
        vector_add(&mut arr, fa, fb, 2 * m).unwrap();
        if (0..n)
            .any(|r| arr.peek_value(r, m, m) != (a[r] + b[r]) & lim || arr.peek(r, 2 * m) != ((a[r] + b[r]) >> m == 1))
        {
            return Err(format!("add m={m} mismatch"));
        }

        let mut arr = ApArray::new(n, 2 * m + 1).unwrap();
        load(&mut arr, &rows);
        vector_subtract(&mut arr, fa, fb, 2 * m).unwrap();
        if (0..n)
            .any(|r| arr.peek_value(r, m, m) != b[r].wrapping_sub(a[r]) & lim || arr.peek(r, 2 * m) != (a[r] > b[r]))
        {
            return Err(format!("sub m={m} mismatch"));
        }

        let mut arr = ApArray::new(n, 4 * m + 1).unwrap();
        load(&mut arr, &rows);
        vector_multiply(&mut arr, fa, fb, FieldSpec::new(2 * m, 2 * m), 4 * m).unwrap();
        if (0..n).any(|r| arr.peek_value(r, 2 * m, 2 * m) != a[r] * b[r]) {
            return Err(format!("multiply m={m} mismatch"));
        }

        let mut arr = ApArray::new(n, 2 * m + 2).unwrap();
        load(&mut arr, &rows);
        let tag = vector_compare_gt(&mut arr, fa, fb, FieldSpec::new(2 * m, 2)).unwrap();
        if (0..n).any(|r| tag.get(r) != (a[r] > b[r])) {
            return Err(format!("compare m={m} mismatch"));
        }
        done.push(format!("add/sub/mul/cmp m={m}"));
    }
    let m = 12;
    let x = random_words(rng, n, m);
    let table = random_words(rng, 1 << m, 16);
    let mut arr = ApArray::new(n, m + 16).unwrap();
    load(&mut arr, &x.iter().map(|&v| vec![(FieldSpec::new(0, m), v)]).collect::<Vec<_>>());
    lut_apply(&mut arr, FieldSpec::new(0, m), FieldSpec::new(m, 16), &table).unwrap();
    if (0..n).any(|r| arr.peek_value(r, m, 16) != table[x[r] as usize]) {
        return Err("lut mismatch".into());
    }
    done.push(format!("lut m={m}"));
    Ok(done)
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows = 10_000;
    let mut parts = vec![format!("{rows} rows: {}", kernel_oracles(&mut rng, rows)?.join(", "))];

    let x = random_fft_input(&mut rng, 64, 16);
    let fft = run_fft(&x, 16).map_err(|e| e.to_string())?;
    let err = fft_max_error(&fft.output, &fft_oracle(&x, 16), 16);
    let bound = fft_error_bound(64, 16);
    parts.push(format!("fft N=64 m=16 error {err:.3e} <= {bound:.3e}"));
    if err > bound {
        return Err(parts.join("; "));
    }

    let market = Market::default();
    let opts = random_options(&mut rng, 256, 8);
    let bs = run_black_scholes(&opts, &market, 8).map_err(|e| e.to_string())?;
    let worst = opts
        .iter()
        .zip(&bs.prices)
        .map(|(o, p)| (p - bs_oracle(*o, &market)).abs() / bs_error_bound(*o, &market, 8))
        .fold(0.0, f64::max);
    parts.push(format!("bs N=256 worst error/bound {worst:.3}"));
    if worst > 1.0 {
        return Err(parts.join("; "));
    }

    let (a, b) = (random_words(&mut rng, 64, 8), random_words(&mut rng, 64, 8));
    let dmm = run_dmm(&a, &b, 8, 8).map_err(|e| e.to_string())?;
    let exact = dmm.product == dmm_oracle(&a, &b, 8);
    parts.push(format!("dmm 8x8 exact: {exact}"));
    ensure(exact, parts.join("; "))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, m) = (4096, 16);
    let (a, b) = (random_words(&mut rng, n, m), random_words(&mut rng, n, m));
    let mut arr = ApArray::new(n, 2 * m + 1).unwrap();
    load(
        &mut arr,
        &a.iter()
            .zip(&b)
            .map(|(&x, &y)| vec![(FieldSpec::new(0, m), x), (FieldSpec::new(m, m), y)])
            .collect::<Vec<_>>(),
    );
    let adder = PassTable::full_adder();
    let mut tagged = 0usize;
    let mut passes = 0usize;
    for i in 0..m {
        let counts = adder.apply(&mut arr, BitColumns { c: 2 * m, b: m + i, a: i }).unwrap();
        passes += counts.len();
        tagged += counts.iter().sum::<usize>();
    }
    let trials = (passes * n) as f64;
    let frac = tagged as f64 / trials;
    let sigma = (0.125 * 0.875 / trials).sqrt();
    let l = arr.ledger();
    let active = (l.compare_bits + l.write_bits + l.miswrite_bits) as f64 / (n as f64 * l.cycles as f64);
    ensure(
        (frac - 0.125).abs() <= 3.0 * sigma && active == 2.5,
        format!("tagged fraction {frac:.5} (1/8 +/- 3 sigma = {:.5}), active columns per cycle {active}", 3.0 * sigma),
    )
}

fn criterion_5() -> Check {
    let p = ParamSet::default();
    let n_ap = ap_pu_count(53.0, &p.ap, &p.units);
    let n_simd = simd_pu_count(5.3, &p.simd, &p.units).map_err(|e| e.to_string())?;
    let floor = p.dataset_words as f64 * p.simd.m as f64;
    let ratio = n_ap as f64 / (1u64 << 20) as f64;
    ensure(
        (0.985..=1.015).contains(&ratio) && n_simd == 768 && p.simd.a_c == 3.668e7 && p.simd.a_c >= floor,
        format!(
            "n_AP(53 mm²) = {n_ap} ({ratio:.4} x 2^20), n_SIMD(5.3 mm²) = {n_simd}, A_C = {:.4e} >= N m = {floor:.4e}",
            p.simd.a_c
        ),
    )
}

fn criterion_6() -> Check {
    let p = ParamSet::default();
    let bracket = ap_dynamic_norm_per_pu(&p.ap);
    let total = ap_power_for(1 << 20, &p.ap, &p.units).total_w();
    let (simd, ap) = p.for_workload("DMM").map_err(|e| e.to_string())?;
    let ps = simd_power(5.3, &simd, &p.units).map_err(|e| e.to_string())?.total_w();
    let pa = ap_power(53.0, &ap, &p.units).total_w();
    let density = (ps / 5.3) / (pa / 53.0);
    ensure(
        (bracket - 1.215625).abs() <= 1e-12
            && (total - 3.3).abs() <= 0.05 * 3.3
            && ps / pa > 2.0
            && (20.0..=30.0).contains(&density),
        format!(
            "bracket {bracket}, P_AP(2^20) = {total:.4} W, P_SIMD(5.3)/P_AP(53) = {:.3}, density ratio {density:.2}",
            ps / pa
        ),
    )
}

/// Closed-form temperatures of a laterally uniform stack cooled from the
/// bottom: the heat crossing each interface is the power of every layer
/// above it.
fn slab_oracle(stack: &LayerStack, layer_w: &[f64], area_m2: f64) -> Vec<f64> {
    let r: Vec<f64> = stack.layers.iter().map(|l| l.thickness_um * 1e-6 / (l.conductivity * area_m2)).collect();
    let n = r.len();
    let total: f64 = layer_w.iter().sum();
    let mut t = vec![0.0; n];
    t[n - 1] = stack.boundary.ambient_c + total * (stack.boundary.r_conv_k_per_w + 0.5 * r[n - 1]);
    for k in (0..n - 1).rev() {
        let above: f64 = layer_w[..=k].iter().sum();
        t[k] = t[k + 1] + above * 0.5 * (r[k] + r[k + 1]);
    }
    t
}

fn max_mirror_gap(a: &ThermalGrid, b: &ThermalGrid) -> f64 {
    let n = a.resolution;
    let mut gap = 0.0f64;
    for l in 0..a.n_layers() {
        for r in 0..n {
            for c in 0..n {
                gap = gap.max((a.at(l, r, c) - b.at(l, r, n - 1 - c)).abs());
            }
        }
    }
    gap
}

fn criterion_7() -> Check {
    let params = ParamSet::default();
    let mut parts = Vec::new();
    let mut ok = true;

    // 1D slab: uniform power, die-sized layers, adiabatic sides
    let stack = LayerStack::default().die_only();
    let die = 5000.0;
    let layer_w = [2.0, 1.5, 1.0, 0.5, 0.0, 0.0];
    let maps: Vec<PowerMap> = stack.powered_layers().map(|l| PowerMap::uniform(die, die, 32, layer_w[l])).collect();
    let sol = solve_steady(&stack, &maps).map_err(|e| e.to_string())?;
    let want = slab_oracle(&stack, &layer_w, (die * 1e-6) * (die * 1e-6));
    let amb = stack.boundary.ambient_c;
    let mut worst = 0.0f64;
    for (l, &w) in want.iter().enumerate() {
        for &t in sol.grid.layer(l).unwrap() {
            worst = worst.max(((t - amb) - (w - amb)).abs() / (w - amb));
        }
    }
    ok &= worst <= 0.01;
    parts.push(format!("slab rel. error {worst:.2e}"));

    // energy balance and runtime on the full stack, 64x64x6
    let fp = reference_floorplan(Chip::Simd, &params).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let sol = simulate(&fp, &LayerStack::default(), 64, 1.0).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let balance = (sol.boundary_flux_w - sol.injected_w).abs() / sol.injected_w;
    ok &= balance <= 1e-3 && took < Duration::from_secs(10);
    parts.push(format!("energy balance {balance:.2e}, 64x64x6 solve {:.2} s", took.as_secs_f64()));

    let cold = simulate(&fp, &LayerStack::default(), 32, 0.0).map_err(|e| e.to_string())?;
    let ambient = cold.grid.temps.iter().flatten().all(|&t| t == LayerStack::default().boundary.ambient_c);
    ok &= ambient;
    parts.push(format!("zero power at ambient: {ambient}"));

    let asym = Floorplan::new(
        4000.0,
        4000.0,
        vec![
            Block::new("hot", 300.0, 500.0, 900.0, 700.0, 2.0),
            Block::new("warm", 2200.0, 2600.0, 1500.0, 900.0, 0.7),
            Block::new("strip", 0.0, 3700.0, 4000.0, 300.0, 0.3),
        ],
    )
    .map_err(|e| e.to_string())?;
    let stack = LayerStack::default();
    let a = simulate(&asym, &stack, 48, 1.0).map_err(|e| e.to_string())?;
    let b = simulate(&asym.mirrored_x(), &stack, 48, 1.0).map_err(|e| e.to_string())?;
    let gap = max_mirror_gap(&a.grid, &b.grid);
    ok &= gap <= 1e-6;
    parts.push(format!("mirror gap {gap:.1e} °C"));
    ensure(ok, parts.join(", "))
}

fn block_at<'a>(fp: &'a Floorplan, grid: &ThermalGrid, row: usize, col: usize) -> Option<&'a Block> {
    let n = grid.resolution as f64;
    let x = (col as f64 + 0.5) * fp.die_width_um / n;
    let y = (row as f64 + 0.5) * fp.die_height_um / n;
    fp.blocks.iter().find(|b| x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h)
}

fn criterion_8() -> Check {
    let params = ParamSet::default();
    let stack = LayerStack::default();
    let res = 64;
    let ap_fp = reference_floorplan(Chip::Ap, &params).map_err(|e| e.to_string())?;
    let ap = simulate(&ap_fp, &stack, res, 1.0).map_err(|e| e.to_string())?;
    let ap_top = ap.grid.layer_stats(0).map_err(|e| e.to_string())?;
    let mid = (res as f64 - 1.0) / 2.0;
    let near = |v: usize| (v as f64 - mid).abs() <= res as f64 / 16.0;
    let ap_centered = near(ap_top.argmax.row) && near(ap_top.argmax.col);

    let simd_fp = reference_floorplan(Chip::Simd, &params).map_err(|e| e.to_string())?;
    let simd = simulate(&simd_fp, &stack, res, 1.0).map_err(|e| e.to_string())?;
    let top = simd.grid.layer_stats(0).map_err(|e| e.to_string())?;
    let hot =
        block_at(&simd_fp, &simd.grid, top.argmax.row, top.argmax.col).map(|b| b.name.clone()).unwrap_or_default();
    let cold =
        block_at(&simd_fp, &simd.grid, top.argmin.row, top.argmin.col).map(|b| b.name.clone()).unwrap_or_default();
    let cold_centered = (top.argmin.row as f64 - mid).abs() <= res as f64 / 8.0
        && (top.argmin.col as f64 - mid).abs() <= res as f64 / 8.0;

    ensure(
        ap_centered
            && ap_top.span_c <= 5.0
            && top.peak_c > 95.0
            && top.peak_c > ap_top.peak_c + 40.0
            && hot.ends_with("/pu")
            && cold == "l2"
            && cold_centered
            && top.exceeds_dram_limit,
        format!(
            "AP top peak {:.2} °C at ({}, {}), span {:.2} °C; SIMD top peak {:.2} °C in {hot}, coolest {:.2} °C in {cold} at ({}, {}), DRAM flag {}",
            ap_top.peak_c,
            ap_top.argmax.row,
            ap_top.argmax.col,
            ap_top.span_c,
            top.peak_c,
            top.min_c,
            top.argmin.row,
            top.argmin.col,
            top.exceeds_dram_limit
        ),
    )
}

fn criterion_9() -> Check {
    let p = ParamSet::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for w in p.workloads.iter().filter(|w| w.i_s > 0.0) {
        let (simd, ap) = p.for_workload(&w.name).map_err(|e| e.to_string())?;
        let u = p.units;
        let be = match break_even_area(&simd, &ap, &u, 0.5, 10_000.0) {
            Ok(a) => a,
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", w.name));
                continue;
            }
        };
        let beyond = (1..=200).all(|i| {
            let a = be * (1.0 + i as f64 * 0.05);
            ap_speedup(a, &ap, &u) > simd_speedup(a, &simd, &u).unwrap_or(0.0)
        });
        let big = simd_speedup(1e6, &simd, &u).map_err(|e| e.to_string())?;
        let sat = (big * w.i_s - 1.0).abs();
        ok &= beyond && sat <= 0.01;
        parts.push(format!(
            "{}: break-even {be:.2} mm², AP ahead beyond: {beyond}, S_SIMD(1e6 mm²) I_s = {:.4}",
            w.name,
            big * w.i_s
        ));
    }
    ensure(ok, parts.join("; "))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn run_all(out: &Path) -> Result<(), String> {
    let runs: [&[&str]; 8] = [
        &["kernel", "add", "--m", "32"],
        &["kernel", "lut", "--m", "6"],
        &["sweep", "--workload", "FFT", "--steps", "50"],
        &["thermal", "ap", "--resolution", "32"],
        &["workload", "dmm"],
        &["workload", "fft", "--n", "32"],
        &["workload", "bs", "--n", "64"],
        &["floorplan-dump", "simd"],
    ];
    for args in runs {
        let status = Command::new(env!("CARGO_BIN_EXE_ap3d"))
            .args(args)
            .args(["--seed", "42", "--out"])
            .arg(out)
            .env_remove("AP3D_PARAMS_DIR")
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
    }
    Ok(())
}

fn criterion_10() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_all(&a)?;
    run_all(&b)?;
    let (fa, fb) = (read_dir_bytes(&a), read_dir_bytes(&b));
    let differing: Vec<_> = fa.iter().filter(|(k, v)| fb.get(*k) != Some(v)).map(|(k, _)| k.clone()).collect();
    let kinds = ["csv", "json", "pgm"].iter().all(|ext| fa.keys().any(|k| k.ends_with(ext)));
    ensure(
        differing.is_empty() && fa.len() == fb.len() && kinds,
        format!("{} artifacts compared, differing: {differing:?}", fa.len()),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("cycle law of addition", criterion_1),
        ("truth-table fidelity", criterion_2),
        ("oracle equivalence", criterion_3),
        ("match statistics", criterion_4),
        ("model anchors", criterion_5),
        ("power model", criterion_6),
        ("thermal solver validation", criterion_7),
        ("thermal qualitative reproduction", criterion_8),
        ("break-even and saturation", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {name}: {tag} | {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Subcommands: read settings, run the library, assemble output tables.

use std::path::PathBuf;

use cubic_mf::model::DomainError;
use cubic_mf::oracle::{metropolis, FiniteSystem, McConfig, GENERATOR};
use cubic_mf::transitions::{
    critical_alpha, critical_k_symmetric, detect_jumps, phase_diagram_2d, refine_transition, sweep_1d, Param,
    PhaseDiagramSpec, TransitionError,
};
use cubic_mf::{Axis, Model, OneComponentParams, SolverConfig, SweepSpec, TransitionOptions, TwoComponentParams};

use crate::error::CliError;
use crate::output::{flag, num, sibling, Output, Table};
use crate::settings::{Settings, ONE_KEYS, TWO_KEYS};
use crate::svg;

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Input(e.to_string())
    }
}

pub fn dispatch(command: &str, s: &mut Settings) -> Result<Output, CliError> {
    match command {
        "solve" => solve(s),
        "sweep" => sweep(s),
        "diagram" => diagram(s),
        "critical" => critical(s),
        "oracle" => oracle(s),
        "mc" => mc(s),
        other => Err(CliError::Input(format!("unknown command `{other}`"))),
    }
}

fn metadata(command: &str, s: &Settings, generator: Option<&str>) -> Vec<(String, String)> {
    let mut meta = vec![
        ("tool".to_string(), format!("cubic-mf {}", env!("CARGO_PKG_VERSION"))),
        ("command".to_string(), command.to_string()),
    ];
    meta.extend(s.resolved().iter().cloned());
    if generator.is_none() {
        meta.push(("seed".into(), "none".into()));
    }
    meta.push(("generator".into(), generator.unwrap_or("none").into()));
    meta
}

fn out_path(s: &Settings) -> Option<PathBuf> {
    s.raw("out").map(PathBuf::from)
}

/// Model parameters. Finite systems take `alpha` from the group sizes.
fn model(s: &mut Settings, finite: bool) -> Result<Model, CliError> {
    let kind: String = s.get("model", "one".to_string())?;
    match kind.as_str() {
        "one" => {
            s.reject(&TWO_KEYS, "is not a parameter of the one-component model")?;
            let p = OneComponentParams::new(s.get("K", 0.0)?, s.get("J", 0.0)?, s.get("h", 0.0)?);
            p.validate()?;
            Ok(Model::One(p))
        }
        "two" => {
            s.reject(&ONE_KEYS, "is not a parameter of the two-component model")?;
            let mut p = TwoComponentParams {
                k111: s.get("K111", 0.0)?,
                k112: s.get("K112", 0.0)?,
                k122: s.get("K122", 0.0)?,
                k222: s.get("K222", 0.0)?,
                j11: s.get("J11", 0.0)?,
                j12: s.get("J12", 0.0)?,
                j22: s.get("J22", 0.0)?,
                ..TwoComponentParams::default()
            };
            let mut m_star = [None, None];
            for (i, (h, m)) in [("h1", "m1star"), ("h2", "m2star")].into_iter().enumerate() {
                m_star[i] = s.opt::<f64>(m)?;
                if m_star[i].is_some() {
                    if s.contains(h) {
                        return Err(CliError::Input(format!("give either `{h}` or `{m}`, not both")));
                    }
                } else {
                    let v = s.get(h, 0.0)?;
                    if i == 0 {
                        p.h1 = v;
                    } else {
                        p.h2 = v;
                    }
                }
            }
            if finite {
                s.reject(&["alpha"], "is fixed by the group sizes N1 and N2")?;
            } else {
                p.alpha = s.get("alpha", 0.5)?;
            }
            let model = Model::Two { params: p, m_star };
            model.resolved_two()?.expect("two-component model").validate()?;
            Ok(model)
        }
        other => Err(CliError::Input(format!("unknown model `{other}`, expected `one` or `two`"))),
    }
}

fn solver_config(s: &mut Settings) -> Result<SolverConfig, CliError> {
    let d = SolverConfig::default();
    let c = SolverConfig {
        fp_tol: s.get("fp-tol", d.fp_tol)?,
        max_iter: s.get("max-iter", d.max_iter)?,
        damping: s.get("damping", d.damping)?,
        n_starts: s.get("n-starts", d.n_starts)?,
        dedup_tol: s.get("dedup-tol", d.dedup_tol)?,
        grid_resolution: s.get("grid-resolution", d.grid_resolution)?,
        residual_tol: s.get("residual-tol", d.residual_tol)?,
        tie_tol: s.get("tie-tol", d.tie_tol)?,
    };
    c.validate()?;
    Ok(c)
}

fn jump_options(s: &mut Settings) -> Result<TransitionOptions, CliError> {
    let d = TransitionOptions::default();
    let o = TransitionOptions {
        jump_threshold: s.get("jump-threshold", d.jump_threshold)?,
        transition_tol: s.get("transition-tol", d.transition_tol)?,
        max_cells: d.max_cells,
    };
    if !(o.jump_threshold > 0.0 && o.transition_tol > 0.0) {
        return Err(CliError::Input("jump-threshold and transition-tol must be positive".into()));
    }
    Ok(o)
}

fn check_vary(model: &Model, s: &Settings, vary: &[Param]) -> Result<(), CliError> {
    if matches!(model, Model::Two { .. }) {
        for (m, h) in [(Param::M1Star, "h1"), (Param::M2Star, "h2")] {
            if vary.contains(&m) && s.contains(h) {
                return Err(CliError::Input(format!("cannot vary `{m}` while `{h}` is given")));
            }
        }
    }
    Ok(())
}

fn solve(s: &mut Settings) -> Result<Output, CliError> {
    let model = model(s, false)?;
    let config = solver_config(s)?;
    let sol = model.solve(&config)?;
    if sol.unconverged_starts > 0 {
        eprintln!("warning: {} starts did not converge", sol.unconverged_starts);
    }
    let mut t = Table::new(&["m1", "m2", "m_total", "phi", "stability"]);
    for p in &sol.points {
        t.push(vec![num(p.m1), num(p.m2), num(p.m_total), num(p.phi), p.stability.as_str().into()]);
    }
    let mut out = Output::default();
    out.emit(out_path(s), t.render(&metadata("solve", s, None)));
    Ok(out)
}

fn sweep(s: &mut Settings) -> Result<Output, CliError> {
    let model = model(s, false)?;
    let config = solver_config(s)?;
    let options = jump_options(s)?;
    let vary = Param::parse_list(&s.require::<String>("vary")?)?;
    check_vary(&model, s, &vary)?;
    let axis = Axis::new(vary.clone(), s.require("from")?, s.require("to")?, s.require("steps")?);
    let spec = SweepSpec { model, axis };
    let rows = sweep_1d(&spec, &config)?;

    let mut table = Table::new(&["param", "m_total", "m1", "m2", "phi", "n_roots", "coexistence"]);
    let mut failed = 0;
    for r in &rows {
        if let Some(e) = &r.error {
            failed += 1;
            eprintln!("warning: {} = {}: {e}", spec.axis.label(), r.param);
        }
        table.push(vec![
            num(r.param),
            num(r.m_total),
            num(r.m1),
            num(r.m2),
            num(r.phi),
            r.n_roots.to_string(),
            flag(r.coexistence),
        ]);
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {} rows failed", rows.len());
    }

    let mut jumps = Table::new(&["location", "width", "m_left", "m_right", "delta"]);
    for br in detect_jumps(&rows, options.jump_threshold) {
        match refine_transition(&model, &vary, &br, options.transition_tol, &config) {
            Ok(ev) => jumps.push(vec![num(ev.location), num(ev.width), num(ev.m_left), num(ev.m_right), num(ev.delta)]),
            Err(TransitionError::NoBranchChange { left, right }) => {
                eprintln!("warning: steep but continuous change in [{left}, {right}], not a jump");
            }
            Err(e) => {
                eprintln!("warning: jump in [{}, {}] not refined: {e}", br.left, br.right);
                let (a, b) = (br.left_point.m_total, br.right_point.m_total);
                let mid = br.left + (br.right - br.left) * 0.5;
                jumps.push(vec![num(mid), num(br.right - br.left), num(a), num(b), num((b - a).abs())]);
            }
        }
    }

    let meta = metadata("sweep", s, None);
    let main = out_path(s);
    let jumps_path = s.raw("jumps").map(PathBuf::from).or_else(|| main.as_ref().map(|p| sibling(p, "jumps.csv")));
    let mut out = Output::default();
    out.emit(main, table.render(&meta));
    out.emit(jumps_path, jumps.render(&meta));
    Ok(out)
}

fn parse_axis(key: &str, raw: &str) -> Result<Axis, CliError> {
    let bad = || CliError::Input(format!("malformed axis `{raw}` for `{key}`, expected name[,name]:from:to:steps"));
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let vary = Param::parse_list(parts[0])?;
    let from = parts[1].trim().parse().map_err(|_| bad())?;
    let to = parts[2].trim().parse().map_err(|_| bad())?;
    let steps = parts[3].trim().parse().map_err(|_| bad())?;
    Ok(Axis::new(vary, from, to, steps))
}

fn diagram(s: &mut Settings) -> Result<Output, CliError> {
    let model = model(s, false)?;
    let config = solver_config(s)?;
    let mut options = jump_options(s)?;
    options.max_cells = s.get("max-cells", options.max_cells)?;
    let x = parse_axis("x", &s.require::<String>("x")?)?;
    let y = parse_axis("y", &s.require::<String>("y")?)?;
    check_vary(&model, s, &x.vary)?;
    check_vary(&model, s, &y.vary)?;
    let format: String = s.get("format", "csv".to_string())?;
    if format != "csv" && format != "csv+svg" {
        return Err(CliError::Input(format!("unknown format `{format}`, expected `csv` or `csv+svg`")));
    }
    let main = out_path(s);
    if format == "csv+svg" && main.is_none() {
        return Err(CliError::Input("format csv+svg needs --out".into()));
    }

    let spec = PhaseDiagramSpec { model, x, y };
    let d = phase_diagram_2d(&spec, &options, &config)?;
    let invalid = d.cells.iter().filter(|c| !c.valid).count();
    if invalid > 0 {
        eprintln!("warning: {invalid} of {} cells failed", d.cells.len());
    }

    let mut grid = Table::new(&["x", "y", "m_total", "phi", "jump"]);
    for c in &d.cells {
        grid.push(vec![num(c.x), num(c.y), num(c.m_total), num(c.phi), flag(c.jump)]);
    }
    let mut lines = Table::new(&["line", "x", "y"]);
    for (i, line) in d.polylines.iter().enumerate() {
        for &(a, b) in line {
            lines.push(vec![i.to_string(), num(a), num(b)]);
        }
    }

    let meta = metadata("diagram", s, None);
    let mut out = Output::default();
    if format == "csv+svg" {
        let path = main.as_ref().expect("checked above").with_extension("svg");
        out.emit(Some(path), svg::render(&d, &spec.x, &spec.y, &meta));
    }
    let lines_path = main.as_ref().map(|p| sibling(p, "polylines.csv"));
    out.emit(main, grid.render(&meta));
    out.emit(lines_path, lines.render(&meta));
    Ok(out)
}

fn critical(s: &mut Settings) -> Result<Output, CliError> {
    let model = model(s, false)?;
    let config = solver_config(s)?;
    let target: String = s.require("target")?;
    let (value, width) = match (target.as_str(), &model) {
        ("K", Model::One(p)) if p.h == 0.0 && p.j < 1.0 => {
            let c = critical_k_symmetric(p.j, &config)?;
            (c.value, c.width)
        }
        ("K", Model::One(_)) => {
            // No symmetric shortcut: lowest refined jump along K.
            let options = jump_options(s)?;
            let axis = Axis::new(vec![Param::K], s.get("from", -4.0)?, s.get("to", 4.0)?, s.get("steps", 801)?);
            let spec = SweepSpec { model, axis };
            let rows = sweep_1d(&spec, &config)?;
            let event = detect_jumps(&rows, options.jump_threshold)
                .iter()
                .find_map(|br| refine_transition(&model, &[Param::K], br, options.transition_tol, &config).ok());
            let ev = event.ok_or_else(|| {
                CliError::NoTransition(format!("no jump along K in [{}, {}]", spec.axis.from, spec.axis.to))
            })?;
            (ev.location, ev.width)
        }
        ("alpha", Model::Two { .. }) => {
            let options = jump_options(s)?;
            let steps = s.get("alpha-steps", 101usize)?;
            if steps < 2 {
                return Err(CliError::Input("alpha-steps must be at least 2".into()));
            }
            let ev = critical_alpha(&model, steps, &options, &config)?
                .ok_or_else(|| CliError::NoTransition("no jump of the order parameter for alpha in [0, 1]".into()))?;
            (ev.location, ev.width)
        }
        ("K", _) => return Err(CliError::Input("target K needs --model one".into())),
        ("alpha", _) => return Err(CliError::Input("target alpha needs --model two".into())),
        (other, _) => return Err(CliError::Input(format!("unknown target `{other}`, expected `K` or `alpha`"))),
    };
    let mut t = Table::new(&["target", "value", "width"]);
    t.push(vec![target, num(value), num(width)]);
    let mut out = Output::default();
    out.emit(out_path(s), t.render(&metadata("critical", s, None)));
    Ok(out)
}

fn finite_system(s: &mut Settings) -> Result<FiniteSystem, CliError> {
    match model(s, true)? {
        Model::One(params) => {
            s.reject(&["N1", "N2"], "applies to the two-component model only; use N")?;
            Ok(FiniteSystem::One { n: s.require("N")?, params })
        }
        m @ Model::Two { .. } => {
            s.reject(&["N"], "is N1 + N2 for the two-component model; use N1 and N2")?;
            let params = m.resolved_two()?.expect("two-component model");
            Ok(FiniteSystem::Two { n1: s.require("N1")?, n2: s.require("N2")?, params })
        }
    }
}

fn oracle(s: &mut Settings) -> Result<Output, CliError> {
    let system = finite_system(s)?;
    let r = system.exact()?;
    let mut t = Table::new(&["N", "p_N", "mean_m", "mean_abs_m", "mean_m2"]);
    t.push(vec![system.size().to_string(), num(r.p_n), num(r.mean_m), num(r.mean_abs_m), num(r.mean_m2)]);
    let mut out = Output::default();
    out.emit(out_path(s), t.render(&metadata("oracle", s, None)));
    Ok(out)
}

fn mc(s: &mut Settings) -> Result<Output, CliError> {
    let system = finite_system(s)?;
    let total_sweeps = s.get("sweeps", 10_000u64)?;
    let mc = McConfig {
        total_sweeps,
        burn_in_sweeps: s.get("burn-in", total_sweeps / 10)?,
        seed: s.get("seed", 0u64)?,
        thinning: s.get("thin", 1u64)?,
    };
    let r = metropolis(&system, &mc)?;
    let mut t = Table::new(&["N", "mean_m", "std_error", "n_samples", "seed"]);
    t.push(vec![
        system.size().to_string(),
        num(r.mean_m),
        num(r.std_error),
        r.n_samples.to_string(),
        r.seed.to_string(),
    ]);
    let mut out = Output::default();
    out.emit(out_path(s), t.render(&metadata("mc", s, Some(GENERATOR))));
    Ok(out)
}

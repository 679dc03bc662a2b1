//! `flatmoduli` command-line front end.
//!
//! Every verb prints one JSON document tagged `"schema": "flatmoduli/1"`.
//! Exit codes: 0 success, 2 domain refusal (with a `"reason"` field), 1
//! internal error, 64 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use flatmoduli::experiments;
use flatmoduli::homotopy::{certify_path, deform_to_semisimple, path_even, path_odd};
use flatmoduli::rootsys::{build_root_system, build_weyl_element, verify_no_unit_eigenvalue, RootType};
use flatmoduli::topology::{component_label, count_components, FiniteAbelianGroup, GroupTopology, ObstructionClass};
use flatmoduli::wire::{
    complex_to_json, element_from_json, matrix_from_json, path_from_json, path_to_json, render, tuple_from_json,
    tuple_to_json,
};
use flatmoduli::{Error, Exec, GroupElement, GroupSpec, SurfaceSig};

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "flatmoduli", version, about = "Flat connections on compact surfaces")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone)]
struct Common {
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output is always JSON; accepted for script compatibility.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Number of connected components of the moduli space.
    Count {
        #[arg(long, value_parser = parse_surface)]
        surface: SurfaceSig,
        #[arg(long, value_parser = parse_group)]
        group: GroupArg,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded relation solutions, optionally in a given component class.
    Sample {
        #[arg(long, value_parser = parse_surface)]
        surface: SurfaceSig,
        #[arg(long, value_parser = parse_group)]
        group: GroupArg,
        #[arg(long, value_parser = parse_class)]
        class: Option<ObstructionClass>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Residual accepted as converged.
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Explicit path for the given crosscap generators (or a tuple on an
    /// orientable surface).
    Connect {
        #[arg(long, value_parser = parse_surface)]
        surface: SurfaceSig,
        #[arg(long, value_parser = parse_group)]
        group: GroupArg,
        /// Crosscap generator: a JSON file or inline JSON; repeat for two.
        #[arg(long = "c")]
        c: Vec<String>,
        /// Tuple JSON for the central deformation on orientable surfaces.
        #[arg(long)]
        tuple: Option<String>,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Weyl element without eigenvalue 1 for an irreducible root system.
    VerifyWeyl {
        #[arg(long = "type", value_parser = parse_type)]
        kind: RootType,
        #[arg(long)]
        rank: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Certify a path produced by `connect`.
    CheckPath {
        /// Path JSON file (or inline JSON).
        #[arg(long)]
        input: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Debug)]
enum GroupArg {
    Spec(GroupSpec),
    Pi1(FiniteAbelianGroup),
}

impl GroupArg {
    fn spec(&self) -> Result<GroupSpec, Error> {
        match self {
            GroupArg::Spec(s) => Ok(*s),
            GroupArg::Pi1(g) => Err(Error::UnsupportedGroup(format!(
                "a group given only by pi1 = {g} supports `count` only"
            ))),
        }
    }

    fn label(&self) -> String {
        match self {
            GroupArg::Spec(s) => s.to_string(),
            GroupArg::Pi1(g) => format!("pi1={g}"),
        }
    }
}

fn parse_surface(s: &str) -> Result<SurfaceSig, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_class(s: &str) -> Result<ObstructionClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_type(s: &str) -> Result<RootType, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `U:2`, `SU:3`, `SO3` or `pi1=2,4`.
fn parse_group(s: &str) -> Result<GroupArg, String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("pi1=") {
        let factors = rest
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<u64>().map_err(|_| format!("bad cyclic factor {p:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        return FiniteAbelianGroup::from_cyclic_factors(&factors)
            .map(GroupArg::Pi1)
            .map_err(|e| e.to_string());
    }
    let upper = s.to_ascii_uppercase();
    if upper == "SO3" || upper == "SO:3" || upper == "SO(3)" {
        return Ok(GroupArg::Spec(GroupSpec::so3()));
    }
    let (fam, n) = upper.split_once(':').ok_or_else(|| format!("expected U:<n>, SU:<n>, SO3 or pi1=..., got {s:?}"))?;
    let n: usize = n.parse().map_err(|_| format!("bad matrix size {n:?}"))?;
    let family = match fam {
        "U" => flatmoduli::Family::U,
        "SU" => flatmoduli::Family::SU,
        _ => return Err(format!("unknown group family {fam:?}")),
    };
    GroupSpec::new(family, n).map(GroupArg::Spec).map_err(|e| e.to_string())
}

fn read_json(arg: &str) -> Result<Value, Error> {
    let text = if arg.trim_start().starts_with(['{', '[']) {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::InvalidInput(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{arg}: {e}")))
}

/// Element JSON, or a bare matrix interpreted in `spec`.
fn read_element(arg: &str, spec: GroupSpec) -> Result<GroupElement, Error> {
    let v = read_json(arg)?;
    if v.is_array() {
        return GroupElement::new(spec, matrix_from_json(&v)?);
    }
    let g = element_from_json(&v)?;
    if g.spec() == spec {
        Ok(g)
    } else {
        g.recast(spec)
    }
}

struct Outcome {
    body: Value,
    code: u8,
}

fn ok(body: Value) -> Result<Outcome, Error> {
    Ok(Outcome { body, code: 0 })
}

fn run(verb: Verb) -> Result<Outcome, Error> {
    match verb {
        Verb::Count { surface, group, .. } => {
            let topo = match &group {
                GroupArg::Spec(s) => GroupTopology::Spec(*s),
                GroupArg::Pi1(g) => GroupTopology::Semisimple { pi1: g.clone() },
            };
            let c = count_components(surface, &topo)?;
            ok(json!({
                "verb": "count",
                "surface": surface,
                "group": group.label(),
                "components": c.components,
                "formula": c.formula.tag(),
            }))
        }
        Verb::Sample { surface, group, class, count, seed, tolerance, .. } => {
            let spec = group.spec()?;
            surface.require_not_excluded()?;
            let reports = match tolerance {
                None => experiments::sample(surface, spec, class.as_ref(), count, seed, Exec::default()),
                Some(tol) => {
                    let exec = Exec::default();
                    exec.map(count, |i| {
                        let cfg = flatmoduli::solver::SolverConfig {
                            seed: flatmoduli::rng::split(seed, i as u64),
                            residual_tol: tol,
                            exec: Exec::Sequential,
                            ..Default::default()
                        };
                        flatmoduli::solver::solve_relation(surface, spec, class.as_ref(), &cfg)
                    })
                }
            };
            let mut samples = Vec::with_capacity(count);
            for (i, r) in reports.into_iter().enumerate() {
                match r {
                    Ok(rep) => {
                        let x = rep.solution.as_ref().expect("converged reports carry a solution");
                        samples.push(json!({
                            "trial": i,
                            "converged": true,
                            "residual": rep.residual,
                            "iters": rep.iters,
                            "restarts_used": rep.restarts_used,
                            "class": component_label(x).ok(),
                            "point": tuple_to_json(x),
                        }));
                    }
                    Err(Error::NoConvergence { best, .. }) => {
                        samples.push(json!({ "trial": i, "converged": false, "residual": best }));
                    }
                    Err(e) => return Err(e),
                }
            }
            let converged = samples.iter().filter(|s| s["converged"] == true).count();
            ok(json!({
                "verb": "sample",
                "surface": surface,
                "group": spec,
                "seed": seed,
                "count": count,
                "converged": converged,
                "samples": samples,
            }))
        }
        Verb::Connect { surface, group, c, tuple, steps, .. } => {
            let spec = group.spec()?;
            surface.require_not_excluded()?;
            let path = if surface.is_orientable() {
                let t = tuple.ok_or_else(|| {
                    Error::InvalidInput("orientable surfaces need --tuple for the central deformation".into())
                })?;
                let x = tuple_from_json(&read_json(&t)?)?;
                if x.sig() != surface || x.spec() != spec {
                    return Err(Error::SpecMismatch("tuple does not match --surface / --group".into()));
                }
                deform_to_semisimple(&x, steps)?
            } else {
                let cs = c.iter().map(|a| read_element(a, spec)).collect::<Result<Vec<_>, _>>()?;
                match (surface.crosscaps(), cs.as_slice()) {
                    (1, [c1]) => path_odd(c1, surface, steps)?,
                    (2, [c1, c2]) => path_even(c1, c2, surface, steps)?,
                    (m, _) => {
                        return Err(Error::ArityError(format!(
                            "{surface} needs {m} --c matrices, got {}",
                            cs.len()
                        )))
                    }
                }
            };
            let cert = certify_path(&path);
            let mut body = path_to_json(&path);
            body["verb"] = json!("connect");
            body["certified"] = json!(cert.certified);
            body["lift"] = path.lift().map(complex_to_json).unwrap_or(Value::Null);
            Ok(Outcome { body, code: if cert.certified { 0 } else { 1 } })
        }
        Verb::VerifyWeyl { kind, rank, .. } => {
            let sys = build_root_system(kind, rank)?;
            let w = build_weyl_element(&sys);
            let rep = verify_no_unit_eigenvalue(&w);
            ok(json!({
                "verb": "verify-weyl",
                "type": kind.letter().to_string(),
                "rank": rank,
                "eigenvalues": w.eigenvalues().iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>(),
                "min_distance_to_1": rep.min_distance_to_1,
                "roots_permuted": rep.root_permutation_ok,
                "root_count": sys.roots().len(),
                "det_w_minus_1": w.det_minus_identity(),
            }))
        }
        Verb::CheckPath { input, .. } => {
            let p = path_from_json(&read_json(&input)?)?;
            let cert = certify_path(&p);
            let mut body = json!({ "verb": "check-path", "certificate": cert });
            if cert.certified {
                ok(body)
            } else {
                body["reason"] = json!("path_not_certified");
                Ok(Outcome { body, code: 2 })
            }
        }
    }
}

fn output_of(verb: &Verb) -> Option<PathBuf> {
    match verb {
        Verb::Count { common, .. }
        | Verb::Sample { common, .. }
        | Verb::Connect { common, .. }
        | Verb::VerifyWeyl { common, .. }
        | Verb::CheckPath { common, .. } => common.output.clone(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let output = output_of(&cli.verb);
    let (body, code) = match run(cli.verb) {
        Ok(o) => (o.body, o.code),
        Err(e) => (
            json!({ "error": e.to_string(), "reason": e.reason() }),
            u8::try_from(e.exit_code()).unwrap_or(1),
        ),
    };
    let text = render(body);
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => println!("{text}"),
    }
    ExitCode::from(code)
}

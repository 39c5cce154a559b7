//! Command-line surface: every module's operations behind subcommands, JSON
//! reports on stdout, human-readable progress on stderr, and the verification
//! suite under `verify-all`.

use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::constraints::{
    adh_basis, assemble, boundary, boundary_closed_form, coboundary_delta1, decomposable_span,
    derivations, lemma3_solve, nabla_w, random_adh_valued_k, solve_constraints, AssembleOpts,
    ConnectionMap, FieldChoice, SystemKind,
};
use crate::curvature::{casimir, einstein_constants, schouten, weyl, weyl_ricci_trace};
use crate::dense::DMat;
use crate::error::{Result, SymError};
use crate::report::{Check, Report, SCHEMA_VERSION};
use crate::roots::{lemma7_check, root_datum};
use crate::scalar::{Rng, Scalar};
use crate::spaces::{build_model, catalog, validate, SpaceModel, SpaceSpec};

#[derive(Parser)]
#[command(
    name = "symcheck",
    about = "Exact models of symmetric-space tangent algebras and their constraint systems",
    disable_help_subcommand = true
)]
struct Cli {
    /// Seed for every randomized witness selection.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report to a file as well as stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Re-run the command recorded in a report and compare payloads.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Clone)]
enum Cmd {
    /// List the model catalog and the space grammar.
    List,
    /// Dump a model: dimension, sign, nonzero structure constants.
    Info { spec: String },
    /// Check every Lie-triple-system axiom.
    Validate { spec: String },
    /// Curvature, Einstein constants, Weyl trace, Casimir.
    Curvature { spec: String },
    /// Cartan subspace, restricted roots, classification, pair witnesses.
    Roots { spec: String },
    /// Assemble and solve the (K, Phi) constraint system.
    Solve {
        spec: String,
        #[arg(long, default_value = "prop3")]
        system: String,
        #[arg(long)]
        orth: bool,
        #[arg(long)]
        phi_zero: bool,
        /// qq (exact characteristic 0) or gfp (two random primes); default
        /// picks qq up to dimension 12 and gfp beyond.
        #[arg(long, default_value = "auto")]
        field: String,
        #[arg(long)]
        prime: Option<u64>,
        /// Rationally certify a modular basis by reconstruction + residuals.
        #[arg(long)]
        certify: bool,
        /// Write the assembled system in the golden matrix format.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// Solve the cyclic pairing system over A in Hom(m, h).
    Lemma3 { spec: String },
    /// Boundary/coboundary machinery checks.
    Cochain {
        spec: String,
        /// partial | delta | d-equals-m | derivations | nabla-w
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
    /// Clifford generators, Hodge-type decomposition, and the Xi kernel.
    Spin9 {
        /// relations | decomposition | xi | all
        #[arg(long, default_value = "all")]
        check: String,
    },
    /// Run the full verification suite (criterion 12 only with --slow).
    VerifyAll {
        #[arg(long)]
        slow: bool,
    },
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    if let Some(path) = &cli.replay {
        return match replay(path) {
            Ok(matches) => {
                if matches {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code_for(&e)
            }
        };
    }
    let Some(cmd) = cli.cmd.clone() else {
        eprintln!("error: a subcommand is required (try --help)");
        return 2;
    };
    match execute(&cmd, cli.seed) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{text}");
            if let Some(out) = &cli.out {
                if let Err(e) = std::fs::write(out, &text) {
                    eprintln!("error: cannot write {}: {e}", out.display());
                    return 1;
                }
            }
            if report.all_pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &SymError) -> i32 {
    match e {
        SymError::InvalidSpec(_) | SymError::Parse(_) | SymError::Usage(_) => 2,
        _ => 1,
    }
}

fn command_echo(cmd: &Cmd, seed: u64) -> String {
    let body = match cmd {
        Cmd::List => "list".into(),
        Cmd::Info { spec } => format!("info {spec}"),
        Cmd::Validate { spec } => format!("validate {spec}"),
        Cmd::Curvature { spec } => format!("curvature {spec}"),
        Cmd::Roots { spec } => format!("roots {spec}"),
        Cmd::Solve {
            spec,
            system,
            orth,
            phi_zero,
            field,
            prime,
            certify,
            dump_matrix,
        } => {
            let mut s = format!("solve {spec} --system {system}");
            if *orth {
                s.push_str(" --orth");
            }
            if *phi_zero {
                s.push_str(" --phi-zero");
            }
            s.push_str(&format!(" --field {field}"));
            if let Some(p) = prime {
                s.push_str(&format!(" --prime {p}"));
            }
            if *certify {
                s.push_str(" --certify");
            }
            if let Some(d) = dump_matrix {
                s.push_str(&format!(" --dump-matrix {}", d.display()));
            }
            s
        }
        Cmd::Lemma3 { spec } => format!("lemma3 {spec}"),
        Cmd::Cochain {
            spec,
            check,
            budget,
        } => format!("cochain {spec} --check {check} --budget {budget}"),
        Cmd::Spin9 { check } => format!("spin9 --check {check}"),
        Cmd::VerifyAll { slow } => {
            if *slow {
                "verify-all --slow".into()
            } else {
                "verify-all".into()
            }
        }
    };
    format!("{body} --seed {seed}")
}

fn parse_command(echo: &str) -> Result<(Cmd, u64)> {
    let words: Vec<String> = echo.split_whitespace().map(|s| s.to_string()).collect();
    let mut argv = vec!["symcheck".to_string()];
    argv.extend(words);
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| SymError::Parse(format!("cannot replay `{echo}`: {e}")))?;
    let cmd = cli
        .cmd
        .ok_or_else(|| SymError::Parse("replayed report has no command".into()))?;
    Ok((cmd, cli.seed))
}

fn replay(path: &PathBuf) -> Result<bool> {
    let text = std::fs::read_to_string(path)?;
    let stored: Report = serde_json::from_str(&text)?;
    let (cmd, seed) = parse_command(&stored.command)?;
    let fresh = execute(&cmd, seed)?;
    let matches = fresh.payload == stored.payload;
    let summary = json!({
        "replayed": stored.command,
        "replay_match": matches,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(matches)
}

fn scalar_tokens(v: &[Scalar]) -> Vec<String> {
    v.iter().map(|x| x.to_token()).collect()
}

fn execute(cmd: &Cmd, seed: u64) -> Result<Report> {
    let t0 = Instant::now();
    let mut space = None;
    let mut checks: Vec<Check> = Vec::new();
    let payload: Value = match cmd {
        Cmd::List => json!({
            "spaces": catalog(),
            "grammar": "gr(p,q) | cp(m) | hp(d) | op2 | sl3so3 | su3so3 | g2so4 | prod(s,t) | dual(s)",
        }),
        Cmd::Info { spec } => {
            let parsed = SpaceSpec::parse(spec)?;
            let model = build_model(&parsed)?;
            space = Some(model.name.clone());
            let constants: Vec<Value> = model
                .nonzero_constants()
                .into_iter()
                .map(|(i, j, k, l, v)| json!([i, j, k, l, v.to_token()]))
                .collect();
            json!({
                "name": model.name,
                "n": model.n,
                "sign": model.sign,
                "field_disc": model.disc,
                "factor_blocks": model.factor_blocks,
                "nonzero_constants": constants,
            })
        }
        Cmd::Validate { spec } => {
            let model = build_model(&SpaceSpec::parse(spec)?)?;
            space = Some(model.name.clone());
            let rep = validate(&model);
            checks.extend(rep.checks.iter().map(Check::from));
            json!({ "all_pass": rep.all_pass() })
        }
        Cmd::Curvature { spec } => {
            let model = build_model(&SpaceSpec::parse(spec)?)?;
            space = Some(model.name.clone());
            let lam = einstein_constants(&model);
            let cas = casimir(&model)?;
            let (scal, weyl_nonzero, weyl_tracefree) = if model.n >= 4 {
                let sch = schouten(&model)?;
                let w = weyl(&model)?;
                let nonzero = (0..model.n)
                    .flat_map(|i| (i + 1..model.n).map(move |j| (i, j)))
                    .any(|(i, j)| !w.at_pair(i, j).is_zero());
                let tracefree = (0..model.n)
                    .all(|x| weyl_ricci_trace(&w, x).iter().all(|v| v.is_zero()));
                checks.push(Check {
                    name: "weyl_trace_free".into(),
                    pass: tracefree,
                    witness: None,
                });
                (Some(sch.scal.to_token()), Some(nonzero), Some(tracefree))
            } else {
                (None, None, None)
            };
            checks.push(Check {
                name: "einstein_blocks".into(),
                pass: lam.is_some(),
                witness: None,
            });
            json!({
                "n": model.n,
                "einstein": lam.is_some(),
                "lambda": lam.map(|v| scalar_tokens(&v)),
                "scal": scal,
                "weyl_nonzero": weyl_nonzero,
                "weyl_tracefree": weyl_tracefree,
                "casimir": scalar_tokens(&cas),
            })
        }
        Cmd::Roots { spec } => {
            let model = build_model(&SpaceSpec::parse(spec)?)?;
            space = Some(model.name.clone());
            let datum = root_datum(&model, seed)?;
            let rep = lemma7_check(&model, &datum, seed);
            checks.extend(rep.checks.iter().map(Check::from));
            let roots: Vec<Value> = datum
                .roots
                .iter()
                .map(|r| {
                    json!({
                        "coords": r.coords.as_ref().map(|c| scalar_tokens(c)),
                        "direction_up_to_scale": scalar_tokens(&r.direction),
                        "squares": scalar_tokens(&r.sq),
                        "multiplicity": r.multiplicity,
                        "len_sq": datum.len_sq(r).to_token(),
                    })
                })
                .collect();
            json!({
                "rank": datum.rank,
                "type": datum.type_label,
                "positive_roots": roots,
                "h_form": "wedge-preimage pairing <u,[X,Y]> = <ad_u X, Y>",
                "lemma7": {
                    "pairs_checked": rep.pairs_checked,
                    "pairs_skipped": rep.pairs_skipped,
                },
            })
        }
        Cmd::Solve {
            spec,
            system,
            orth,
            phi_zero,
            field,
            prime,
            certify,
            dump_matrix,
        } => {
            let model = build_model(&SpaceSpec::parse(spec)?)?;
            space = Some(model.name.clone());
            let system = match system.as_str() {
                "prop3" => SystemKind::Prop3,
                "prop1" => SystemKind::Prop1,
                other => return Err(SymError::Usage(format!("unknown system `{other}`"))),
            };
            let opts = AssembleOpts {
                system,
                orth: *orth,
                phi_zero: *phi_zero,
            };
            let choice = match field.as_str() {
                "qq" => FieldChoice::Exact,
                "gfp" => FieldChoice::Modular {
                    prime: *prime,
                    certify: *certify,
                },
                "auto" => {
                    if model.n <= 12 {
                        FieldChoice::Exact
                    } else {
                        FieldChoice::Modular {
                            prime: *prime,
                            certify: *certify,
                        }
                    }
                }
                other => return Err(SymError::Usage(format!("unknown field `{other}`"))),
            };
            if let Some(path) = dump_matrix {
                let mat = assemble(&model, opts)?;
                let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
                mat.write_golden(&mut f)?;
                f.flush()?;
            }
            let sol = solve_constraints(&model, opts, choice, seed)?;
            // the model's bracket normalization, recorded alongside the dims
            // (solution dimensions themselves are scale-invariant)
            let cas = casimir(&model)?;
            json!({
                "space": model.name,
                "unknowns": sol.unknowns,
                "rows": sol.rows,
                "dim": sol.dim,
                "phi_block_rank": sol.phi_block_rank,
                "k_adh_complement_rank": sol.k_adh_complement_rank,
                "field": sol.field_used,
                "certified": sol.certified,
                "bracket_casimir": scalar_tokens(&cas),
            })
        }
        Cmd::Lemma3 { spec } => {
            let model = build_model(&SpaceSpec::parse(spec)?)?;
            space = Some(model.name.clone());
            let out = lemma3_solve(&model)?;
            checks.push(Check {
                name: "contains_ad_m".into(),
                pass: out.contains_ad_m,
                witness: None,
            });
            json!({
                "dim": out.dim,
                "ad_m_dim": out.ad_m_dim,
                "contains_ad_m": out.contains_ad_m,
                "unknowns": out.unknowns,
                "rows": out.rows,
            })
        }
        Cmd::Cochain {
            spec,
            check,
            budget,
        } => {
            let model = build_model(&SpaceSpec::parse(spec)?)?;
            space = Some(model.name.clone());
            cochain_payload(&model, check, *budget, seed, &mut checks)?
        }
        Cmd::Spin9 { check } => spin9_payload(check, seed, &mut checks)?,
        Cmd::VerifyAll { slow } => verify_all(*slow, seed, &mut checks)?,
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: command_echo(cmd, seed),
        space,
        seed,
        payload,
        checks,
        elapsed_ms: t0.elapsed().as_millis(),
        threads_env: std::env::var("SYMCHECK_THREADS").ok(),
    })
}

fn cochain_payload(
    model: &SpaceModel,
    check: &str,
    budget: usize,
    seed: u64,
    checks: &mut Vec<Check>,
) -> Result<Value> {
    let n = model.n;
    match check {
        "partial" => {
            let b = boundary(model)?;
            // definition check: closed form on wedges reproduces ad_{[e_i,e_j]}
            let mut def_ok = true;
            for i in 0..n {
                for j in i + 1..n {
                    let mut w = DMat::zeros(n, n);
                    *w.at_mut(j, i) = Scalar::one();
                    *w.at_mut(i, j) = Scalar::from_int(-1);
                    if boundary_closed_form(model, &w) != model.ad_pair(i, j) {
                        def_ok = false;
                    }
                }
            }
            checks.push(Check {
                name: "partial_definition".into(),
                pass: def_ok,
                witness: None,
            });
            checks.push(Check {
                name: "orthogonal_split".into(),
                pass: b.orthogonal_split,
                witness: None,
            });
            Ok(json!({
                "adh_dim": b.adh_dim,
                "m_dim": b.m_dim,
                "so_dim": n * (n - 1) / 2,
            }))
        }
        "delta" => {
            let id = DMat::identity(n);
            let doubled = coboundary_delta1(model, &id)
                .into_iter()
                .all(|((i, j, k), v)| {
                    let want: Vec<Scalar> = model
                        .bracket3_basis(i, j, k)
                        .iter()
                        .map(|x| &Scalar::from_int(2) * x)
                        .collect();
                    v == want
                });
            checks.push(Check {
                name: "delta_id_doubles_bracket".into(),
                pass: doubled,
                witness: None,
            });
            let adh = adh_basis(model);
            let inner_zero = adh.iter().all(|u| {
                coboundary_delta1(model, u)
                    .iter()
                    .all(|(_, v)| v.iter().all(|x| x.is_zero()))
            });
            checks.push(Check {
                name: "inner_derivations_are_cocycles".into(),
                pass: inner_zero,
                witness: None,
            });
            let mut l = DMat::zeros(n, n);
            *l.at_mut(0, 0) = Scalar::one();
            let nontrivial = coboundary_delta1(model, &l)
                .iter()
                .any(|(_, v)| v.iter().any(|x| !x.is_zero()));
            checks.push(Check {
                name: "generic_map_is_not_a_cocycle".into(),
                pass: nontrivial,
                witness: None,
            });
            Ok(json!({ "adh_dim": adh.len() }))
        }
        "d-equals-m" => {
            let datum = root_datum(model, seed)?;
            let rank = datum.rank;
            let out = decomposable_span(model, &datum, budget, seed)?;
            // equality is a theorem only from rank 3 up; at rank 2 the span is
            // recorded without an assertion
            if rank >= 3 {
                checks.push(Check {
                    name: "d_equals_m".into(),
                    pass: out.equals_m,
                    witness: Some(format!("dim_D = {}, dim_M = {}", out.dim_d, out.dim_m)),
                });
            }
            checks.push(Check {
                name: "saturation_plateau".into(),
                pass: out.plateaued,
                witness: (!out.plateaued)
                    .then(|| "budget exhausted before an 8-batch plateau".into()),
            });
            Ok(json!({
                "rank": rank,
                "dim_d": out.dim_d,
                "dim_m": out.dim_m,
                "equals_m": out.equals_m,
                "cartans_used": out.cartans_used,
            }))
        }
        "derivations" => {
            let out = derivations(model)?;
            checks.push(Check {
                name: "derivations_equal_adh_action".into(),
                pass: out.equals_adh_action,
                witness: None,
            });
            Ok(json!({
                "dim": out.dim,
                "adh_action_dim": out.adh_action_dim,
            }))
        }
        "nabla-w" => {
            let mut rng = Rng::new(seed).derive("nabla-w");
            let k0 = ConnectionMap::zero(n);
            let zero_ok = nabla_w(model, &k0)?.iter().all(|(_, v)| v.is_zero());
            let adh = adh_basis(model);
            let k = random_adh_valued_k(model, &adh, &mut rng);
            let adh_ok = nabla_w(model, &k)?.iter().all(|(_, v)| v.is_zero());
            checks.push(Check {
                name: "nabla_w_zero_for_zero_k".into(),
                pass: zero_ok,
                witness: None,
            });
            checks.push(Check {
                name: "nabla_w_zero_for_adh_valued_k".into(),
                pass: adh_ok,
                witness: None,
            });
            Ok(json!({ "adh_dim": adh.len() }))
        }
        other => Err(SymError::Usage(format!("unknown cochain check `{other}`"))),
    }
}

fn spin9_payload(check: &str, seed: u64, checks: &mut Vec<Check>) -> Result<Value> {
    let cs = crate::spin9::clifford9()?;
    let mut payload = serde_json::Map::new();
    if check == "relations" || check == "all" {
        // construction already validates; re-assert and record
        let ok = crate::spin9::validate_clifford(&cs).is_ok();
        checks.push(Check {
            name: "clifford_relations".into(),
            pass: ok,
            witness: None,
        });
        payload.insert("so16_span".into(), json!(120));
    }
    if check == "decomposition" || check == "all" {
        let ht = crate::spin9::theta_maps(&cs)?;
        let dims = (ht.t1t0_of_m.len(), ht.p1.len(), ht.p2.len());
        let mut all: Vec<Vec<Scalar>> = ht.t1t0_of_m.clone();
        for v in &ht.p1 {
            all.push(ht.theta1.apply(v));
        }
        all.extend(ht.p2.iter().cloned());
        let total = crate::sparse::dense_span_rank(&all);
        checks.push(Check {
            name: "hodge_dims_16_128_432".into(),
            pass: dims == (16, 128, 432),
            witness: Some(format!("{dims:?}")),
        });
        checks.push(Check {
            name: "decomposition_spans_576".into(),
            pass: total == 576,
            witness: Some(format!("{total}")),
        });
        payload.insert("dims".into(), json!([dims.0, dims.1, dims.2]));
        payload.insert("total".into(), json!(total));
    }
    if check == "xi" || check == "all" {
        let ht = crate::spin9::theta_maps(&cs)?;
        let mut rng = Rng::new(seed).derive("spin9-cli");
        let rep = crate::spin9::ker_xi_check(&cs, &ht, &mut rng)?;
        checks.push(Check {
            name: "ker_xi_is_16".into(),
            pass: rep.dim_ker == 16 && rep.contains_t1t0,
            witness: Some(format!("dim {}", rep.dim_ker)),
        });
        checks.push(Check {
            name: "xi_injective_on_complements".into(),
            pass: rep.rank_on_theta1_p1 == 128 && rep.rank_on_p2 == 432,
            witness: Some(format!("{} / {}", rep.rank_on_theta1_p1, rep.rank_on_p2)),
        });
        let (w1, want1) = crate::spin9::witness_theta1(&cs, &ht)?;
        let (w2, want2) = crate::spin9::witness_p2(&cs, &ht)?;
        checks.push(Check {
            name: "witness_theta1_minus_3_x4".into(),
            pass: w1 == want1 && !w1.is_zero(),
            witness: Some(w1.to_token()),
        });
        checks.push(Check {
            name: "witness_p2_x2_y2".into(),
            pass: w2 == want2 && !w2.is_zero(),
            witness: Some(w2.to_token()),
        });
        payload.insert("ker_xi".into(), json!(rep.dim_ker));
        payload.insert("witness_theta1".into(), json!(w1.to_token()));
        payload.insert("witness_p2".into(), json!(w2.to_token()));
    }
    if !matches!(check, "relations" | "decomposition" | "xi" | "all") {
        return Err(SymError::Usage(format!("unknown spin9 check `{check}`")));
    }
    Ok(Value::Object(payload))
}

fn verify_all(slow: bool, seed: u64, checks: &mut Vec<Check>) -> Result<Value> {
    use crate::verify::CRITERIA;
    let mut entries = Vec::new();
    for c in CRITERIA {
        if c.slow && !slow {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = (c.run)(seed)?;
        let ms = t.elapsed().as_millis();
        eprintln!(
            "{} criterion {:>2}: {} ({} ms) - {}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.desc,
            ms,
            detail
        );
        checks.push(Check {
            name: format!("criterion_{}", c.id),
            pass,
            witness: Some(detail.clone()),
        });
        entries.push(json!({
            "id": c.id,
            "desc": c.desc,
            "pass": pass,
            "elapsed_ms": ms,
            "detail": detail,
        }));
    }
    Ok(json!({ "criteria": entries }))
}

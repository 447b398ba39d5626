use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use dol_core::density::density_profile;
use dol_core::growth::{iterate, steps_estimate, steps_to_fraction};
use dol_core::lipschitz::{cone_check, interpolate_1d, lipschitz_estimate, star_property_check};
use dol_core::orbit::{assemble_itinerary, build_orbit, build_target_list, verify_targets};
use dol_core::packing::{pack_balls, verify_lemma};
use dol_core::report::{
    orbit_summary, read_graph_csv, read_point_csv, write_dorbit_csv, write_growth_csv,
    write_orbit_csv, ConeViolation, CoverageSummary, Envelope, GrowthSummary, LipschitzSummary,
    OrbitSummary, PackingSummary, PushSummary, RunConfig,
};
use dol_core::{
    push_orbit, push_points, AnnulusDomain, Domain, Error, ExactGeometry, GrowthParams,
    OmegaDomain, OpenSet, OrbitRecord, Result, StarCheckConfig, TolerancePolicy,
};
use serde_json::json;

use crate::{Command, Common};

/// 1 for failed verdicts, 2 for usage, parse and input errors.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::TargetUnaddressable { .. }
        | Error::TargetMissed { .. }
        | Error::IterationCap { .. }
        | Error::OutsideDomain { .. }
        | Error::BadSetProximity { .. } => 1,
        _ => 2,
    }
}

struct Run {
    config: RunConfig,
    out: PathBuf,
}

impl Run {
    fn new(
        name: &str,
        m: usize,
        eps: &[f64],
        common: &Common,
        policy: TolerancePolicy,
    ) -> Result<Self> {
        fs::create_dir_all(&common.out)?;
        Ok(Run {
            config: RunConfig {
                subcommand: name.to_string(),
                m,
                resolutions: eps.to_vec(),
                seed: common.seed,
                policy,
                input: None,
                out_dir: common.out.display().to_string(),
                extra: BTreeMap::new(),
            },
            out: common.out.clone(),
        })
    }

    fn input(mut self, p: &Path) -> Self {
        self.config.input = Some(p.display().to_string());
        self
    }

    fn extra(&mut self, key: &str, v: serde_json::Value) {
        self.config.extra.insert(key.to_string(), v);
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn json<T: serde::Serialize>(&self, name: &str, passed: bool, result: T) -> Result<()> {
        Envelope::new(&self.config, passed, result).write(&self.out.join(name))
    }
}

fn open(p: &Path) -> Result<File> {
    File::open(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn build(
    m: usize,
    eps: &[f64],
    seed: u64,
    policy: &TolerancePolicy,
) -> Result<(OrbitRecord, bool, OrbitSummary)> {
    let targets = build_target_list(m, eps, policy, seed)?;
    let it = assemble_itinerary(&targets, policy)?;
    let orbit = build_orbit(&it, it.len(), policy)?;
    let hits_ok = verify_targets(&orbit, &it, &targets).is_ok();
    let summary = orbit_summary(&orbit, &it, &targets);
    let ok = hits_ok && summary.max_shadowing_defect < policy.shadowing_tol;
    Ok((orbit, ok, summary))
}

pub fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Orbit {
            m,
            eps,
            depth,
            common,
        } => {
            let policy = TolerancePolicy::default().with_depth(depth)?;
            let run = Run::new("orbit", m, &eps, &common, policy)?;
            let (orbit, passed, summary) = build(m, &eps, common.seed, &policy)?;
            write_orbit_csv(run.create("orbit.csv")?, &orbit)?;
            run.json("orbit.json", passed, summary)?;
            Ok(passed)
        }
        Command::Push {
            input,
            m,
            eps,
            depth,
            common,
        } => {
            let policy = TolerancePolicy::default().with_depth(depth)?;
            let (d, m, run) = match &input {
                Some(path) => {
                    let table = read_point_csv(open(path)?)?;
                    let m = table.points.first().map_or(m, Vec::len);
                    let run = Run::new("push", m, &eps, &common, policy)?.input(path);
                    (push_points(&table.points)?, m, run)
                }
                None => {
                    if eps.is_empty() {
                        return Err(Error::InvalidArgument("push needs --input or --eps".into()));
                    }
                    let run = Run::new("push", m, &eps, &common, policy)?;
                    let (orbit, _, _) = build(m, &eps, common.seed, &policy)?;
                    (push_orbit(&orbit)?, m, run)
                }
            };
            write_dorbit_csv(run.create("push.csv")?, &d)?;
            let summary = PushSummary {
                m,
                orbit_points: d.points.len(),
                max_conjugacy_defect: d.max_defect(),
                conjugacy_rel_tol: policy.conjugacy_rel_tol,
            };
            let passed = summary.max_conjugacy_defect < policy.conjugacy_rel_tol;
            run.json("push.json", passed, summary)?;
            Ok(passed)
        }
        Command::Density {
            input,
            eps,
            domain,
            common,
        } => {
            let table = read_point_csv(open(&input)?)?;
            let m = table.points.first().map_or(1, Vec::len);
            let kind = match domain.as_deref() {
                Some(k) => k.to_string(),
                None if table.defect_column == "conj_defect" => "annulus".into(),
                None => "omega".into(),
            };
            let dom: Box<dyn Domain> = match kind.as_str() {
                "omega" => Box::new(OmegaDomain { m }),
                "annulus" => Box::new(AnnulusDomain::new(m)),
                other => return Err(Error::InvalidArgument(format!("unknown domain {other:?}"))),
            };
            let mut run =
                Run::new("density", m, &eps, &common, TolerancePolicy::default())?.input(&input);
            run.extra("domain", json!(kind));
            let profile = density_profile(&table.points, dom.as_ref(), &eps)?;
            let rows: Vec<CoverageSummary> = profile.iter().map(CoverageSummary::from).collect();
            let passed = rows.iter().all(|r| r.coverage_fraction == 1.0);
            run.json("density.json", passed, rows)?;
            Ok(passed)
        }
        Command::Pack { geom, h0, common } => {
            let g = ExactGeometry::parse(&geom)?;
            let mut run = Run::new(
                "pack",
                g.dim() / 2,
                &[],
                &common,
                TolerancePolicy::default(),
            )?;
            run.extra("geom", json!(geom));
            run.extra("h0", json!(h0));
            let (h, result, passed) = match verify_lemma(&g, h0) {
                Ok((h, r)) => (h, r, true),
                Err(Error::IterationCap { h, .. }) => (h, pack_balls(&g, h)?, false),
                Err(e) => return Err(e),
            };
            let halvings = (h0 / h).log2().round() as usize;
            let mut summary = serde_json::to_value(PackingSummary::from(&result))?;
            summary["h_final"] = json!(h);
            summary["halvings"] = json!(halvings);
            run.json("pack.json", passed, summary)?;
            Ok(passed)
        }
        Command::Growth {
            m,
            target,
            steps,
            common,
        } => {
            if !(target > 0.0 && target < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "target must lie in (0, 1), got {target}"
                )));
            }
            let p = GrowthParams::new(m, 1.0, 0.0)?;
            let mut run = Run::new("growth", m, &[], &common, TolerancePolicy::default())?;
            run.extra("target", json!(target));
            let n = steps_to_fraction(&p, 1.0 - target)?;
            let rows = steps.unwrap_or(n.min(1_000_000));
            run.extra("steps", json!(rows));
            write_growth_csv(run.create("growth.csv")?, &iterate(&p, rows))?;
            let summary = GrowthSummary {
                m,
                u_volume: p.u_volume,
                v0: p.v0,
                kappa: p.kappa,
                target,
                steps_to_99: n,
                steps_estimate: steps_estimate(m, 1.0 - target),
            };
            run.json("growth.json", true, summary)?;
            Ok(true)
        }
        Command::Lipschitz {
            input,
            c,
            trials,
            common,
        } => {
            let mut s = read_graph_csv(open(&input)?, 0.0)?;
            let estimate = lipschitz_estimate(&s)?;
            let c = c.unwrap_or(estimate);
            s.claimed_c = c;
            let mut run =
                Run::new("lipschitz", s.m, &[], &common, TolerancePolicy::default())?.input(&input);
            run.extra("c", json!(c));
            run.extra("trials", json!(trials));
            let violations = cone_check(&s, c)?;
            let first_violation = violations.first().map(|&(i, j)| {
                let dx = s.points[i]
                    .iter()
                    .zip(&s.points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                ConeViolation {
                    i,
                    j,
                    slope: (s.values[i] - s.values[j]).abs() / dx,
                }
            });
            let star = if s.m == 1 && c > 0.0 {
                let (lo, hi) = s
                    .points
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p[0]), hi.max(p[0]))
                    });
                let mid = 0.5 * (lo + hi);
                let f = interpolate_1d(&s)?;
                let shifted = |x: &[f64]| f(&[x[0] + mid]);
                let mut cfg = StarCheckConfig::new(1);
                // base points within half the sampled range, so images stay inside it
                cfg.half_width = 0.25 * (hi - lo);
                let mut v = star_property_check(&shifted, c, trials, common.seed, &cfg)?;
                if let Some(ce) = v.counterexample.as_mut() {
                    ce.start.v += mid;
                    ce.image.v += mid;
                }
                Some(v)
            } else {
                None
            };
            let passed = violations.is_empty() && star.as_ref().is_none_or(|v| v.passed);
            let summary = LipschitzSummary {
                m: s.m,
                samples: s.len(),
                claimed_c: c,
                estimate,
                cone_violations: violations.len(),
                first_violation,
                star,
            };
            run.json("lipschitz.json", passed, summary)?;
            Ok(passed)
        }
    }
}

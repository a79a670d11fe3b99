//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;
use rug::Float;
use sapt_exchange::accel::extrapolate_j;
use sapt_exchange::asymptotics::{fit_jk, fit_wk, scale_j, select_degree, FitInput};
use sapt_exchange::basis::enumerate_basis;
use sapt_exchange::exchange::{
    compute_point, local_energy, sapt_corrections, ExchangeRecord, Formula, Hamiltonian, OmegaTag, OrderTag,
    PointRequest, Symmetry,
};
use sapt_exchange::integrals::build_matrices;
use sapt_exchange::mpkernel::{to_scientific, DenseMatrix};
use sapt_exchange::perturbation::{detect_ncrit, HsStop, Method, PerturbationSystem};
use sapt_exchange::{PrecisionContext, Real};
use serde::Serialize;

use crate::config::RunConfig;
use crate::store::{write_records, RecordKey, ResultsStore, MANIFEST_FILE};

/// Resolved settings shared by all subcommands.
#[derive(Clone, Debug)]
pub struct Session {
    pub config: Option<RunConfig>,
    pub config_text: Option<String>,
    pub out: PathBuf,
    pub jobs: usize,
    pub cache: bool,
}

impl Session {
    pub fn config(&self) -> anyhow::Result<&RunConfig> {
        self.config.as_ref().context("this command needs --config")
    }

    fn context(&self, r: f64, digits: Option<u32>) -> anyhow::Result<PrecisionContext> {
        Ok(match (digits, &self.config) {
            (Some(d), _) => PrecisionContext::new(d)?,
            (None, Some(c)) => c.context(r),
            (None, None) => PrecisionContext::for_distance(r),
        })
    }
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn sci(x: &Real) -> String {
    to_scientific(x, (x.prec() as f64 / std::f64::consts::LOG2_10).floor() as u32)
}

/// Keys a sweep is expected to produce at one `(R, Omega)` point.
fn expected_keys(cfg: &RunConfig, r: f64, omega: u32) -> Vec<RecordKey> {
    let digits = cfg.context(r).digits();
    let mut orders: Vec<OrderTag> = cfg.orders.iter().map(|&n| OrderTag::Order(n)).collect();
    if cfg.converged {
        orders.push(OrderTag::Converged);
    }
    let mut keys = Vec::new();
    for method in cfg.method.methods() {
        for formula in cfg.formula.formulas() {
            for &order in &orders {
                keys.push(RecordKey { r, omega: OmegaTag::Value(omega), method, formula, order, digits });
            }
        }
    }
    keys
}

#[derive(Debug, Serialize)]
struct PointFailure {
    r: f64,
    omega: u32,
    error: String,
}

#[derive(Debug, Serialize)]
struct PointTiming {
    r: f64,
    omega: u32,
    seconds: f64,
    hs_converged_at: Option<usize>,
    n_crit: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    config_text: &'a str,
    jobs: usize,
    cache: bool,
    digits: BTreeMap<String, u32>,
    points_requested: usize,
    points_computed: usize,
    points_cached: usize,
    records: usize,
    failures: Vec<PointFailure>,
    timings: Vec<PointTiming>,
    total_seconds: f64,
}

pub struct SweepSummary {
    pub computed: usize,
    pub cached: usize,
    pub failed: usize,
}

pub fn sweep(session: &Session) -> anyhow::Result<SweepSummary> {
    let cfg = session.config()?;
    let start = Instant::now();
    let mut store = ResultsStore::open(&session.out)?;
    let points: Vec<(f64, u32)> = cfg.grid.all().into_iter().flat_map(|r| cfg.omega.iter().map(move |&o| (r, o))).collect();
    let todo: Vec<(f64, u32)> = points
        .iter()
        .copied()
        .filter(|&(r, o)| !session.cache || expected_keys(cfg, r, o).iter().any(|k| !store.contains(k)))
        .collect();
    log::info!("{} points requested, {} to compute", points.len(), todo.len());

    let req = PointRequest {
        methods: cfg.method.methods(),
        formulas: cfg.formula.formulas(),
        orders: cfg.orders.clone(),
        converged: cfg.converged,
        hs_cap: cfg.max_order,
        rs_orders: cfg.max_order,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(session.jobs).build()?;
    let results: Vec<_> = pool.install(|| {
        todo.par_iter()
            .map(|&(r, o)| {
                let t = Instant::now();
                let res = compute_point(&cfg.context(r), r, o, &req);
                log::info!("R = {r}, Omega = {o}: {:.1} s", t.elapsed().as_secs_f64());
                (r, o, res, t.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut failures = Vec::new();
    let mut timings = Vec::new();
    for (r, omega, res, seconds) in results {
        match res {
            Ok(p) => {
                timings.push(PointTiming { r, omega, seconds, hs_converged_at: p.hs_converged_at, n_crit: p.n_crit });
                for rec in p.records {
                    store.insert(rec)?;
                }
            }
            Err(e) => {
                log::warn!("R = {r}, Omega = {omega} failed: {e}");
                failures.push(PointFailure { r, omega, error: e.to_string() });
            }
        }
    }
    store.write()?;
    let digits = cfg.grid.all().iter().map(|&r| (r.to_string(), cfg.context(r).digits())).collect();
    let summary = SweepSummary { computed: todo.len() - failures.len(), cached: points.len() - todo.len(), failed: failures.len() };
    let manifest = Manifest {
        tool: "sapt-exchange",
        version: env!("CARGO_PKG_VERSION"),
        command: "sweep",
        config: cfg,
        config_text: session.config_text.as_deref().unwrap_or(""),
        jobs: session.jobs,
        cache: session.cache,
        digits,
        points_requested: points.len(),
        points_computed: summary.computed,
        points_cached: summary.cached,
        records: store.len(),
        failures,
        timings,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&session.out.join(MANIFEST_FILE), &manifest)?;
    Ok(summary)
}

/// Levin-extrapolated records for every `(R, method, formula, order)` group
/// that has the full Omega ladder.
pub fn extrapolated_records(cfg: &RunConfig, store: &ResultsStore) -> anyhow::Result<Vec<ExchangeRecord>> {
    let mut groups: BTreeMap<RecordKey, Vec<ExchangeRecord>> = BTreeMap::new();
    for rec in store.records() {
        let OmegaTag::Value(o) = rec.omega else { continue };
        if !cfg.omega.contains(&o) {
            continue;
        }
        let key = RecordKey { omega: OmegaTag::Extrapolated, ..RecordKey::of(rec) };
        groups.entry(key).or_default().push(rec.clone());
    }
    let mut out = Vec::new();
    for (key, recs) in groups {
        if recs.len() != cfg.omega.len() {
            continue;
        }
        if recs.len() == 1 {
            out.push(ExchangeRecord { omega: OmegaTag::Extrapolated, provenance: Some("single Omega".into()), ..recs[0].clone() });
            continue;
        }
        let ctx = PrecisionContext::new(key.digits)?;
        out.push(extrapolate_j(&ctx, &recs).with_context(|| format!("extrapolating {key}"))?);
    }
    Ok(out)
}

pub fn extrapolate(session: &Session) -> anyhow::Result<usize> {
    let cfg = session.config()?;
    let store = ResultsStore::open(&session.out)?;
    let recs = extrapolated_records(cfg, &store)?;
    write_records(&session.out.join("extrapolated.csv"), &recs)?;
    Ok(recs.len())
}

#[derive(Debug, Serialize)]
struct WkSummary {
    formula: String,
    first_power: i32,
    w: Vec<String>,
    residual: String,
    condition: f64,
    grid: Vec<f64>,
}

/// Per-`(method, formula)` series at the converged order, keyed by R.
struct Series {
    raw: Real,
    extrapolated: Real,
}

pub fn fit(session: &Session) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = session.config()?;
    let store = ResultsStore::open(&session.out)?;
    let all_r = cfg.grid.all();
    let training = cfg.grid.training();
    let top = *cfg.omega.last().expect("validated");

    let mut missing = Vec::new();
    for &r in &all_r {
        for &o in &cfg.omega {
            for key in expected_keys(cfg, r, o) {
                if key.order == OrderTag::Converged && !store.contains(&key) {
                    missing.push(key.to_string());
                }
            }
        }
    }
    if !missing.is_empty() {
        bail!("store lacks {} grid point(s):\n  {}", missing.len(), missing.join("\n  "));
    }
    if !cfg.converged {
        bail!("fitting needs converged records (converged = true)");
    }

    let fit_ctx = all_r.iter().map(|&r| cfg.context(r)).max_by_key(|c| c.digits()).expect("nonempty grid");
    let extrapolated = extrapolated_records(cfg, &store)?;
    let mut series: BTreeMap<(Method, Formula), BTreeMap<u64, Series>> = BTreeMap::new();
    for rec in extrapolated.iter().filter(|r| r.order == OrderTag::Converged && r.digits == cfg.context(r.r).digits()) {
        let raw_key = RecordKey { omega: OmegaTag::Value(top), ..RecordKey::of(rec) };
        let raw = store.get(&raw_key).expect("ladder complete").j.clone();
        series
            .entry((rec.method, rec.formula))
            .or_default()
            .insert(rec.r.to_bits(), Series { raw: fit_ctx.from_ref(&raw), extrapolated: fit_ctx.from_ref(&rec.j) });
    }

    ensure_dir(&session.out)?;
    let mut written = Vec::new();
    for method in cfg.method.methods() {
        for formula in cfg.formula.formulas() {
            let s = &series[&(method, formula)];
            let pick = |rs: &[f64]| -> Vec<(f64, Real)> { rs.iter().map(|r| (*r, s[&r.to_bits()].extrapolated.clone())).collect() };
            let (train, test) = (pick(&training), pick(&cfg.grid.test));
            let degree = match cfg.fit.degree {
                Some(l) => l,
                None if test.is_empty() => bail!("degree selection needs test points; set fit.degree or grid.test"),
                None => select_degree(&fit_ctx, &cfg.fit.candidates, &train, &test)?,
            };
            let result = fit_jk(&fit_ctx, &FitInput::new(train, test, degree)?)
                .with_context(|| format!("fitting {} {}", method.label(), formula.label()))?;
            let stem = format!("fit_{}_{}", method.label(), formula.label());
            let json = session.out.join(format!("{stem}.json"));
            write_json(&json, &result.summary(method.label(), formula.label(), fit_ctx.digits()))?;
            let csv_path = session.out.join(format!("{stem}.csv"));
            let mut w = csv::Writer::from_path(&csv_path)?;
            w.write_record(["r", "set", "j_raw", "j_extrapolated", "j_scaled", "model_scaled"])?;
            for &r in &all_r {
                let v = &s[&r.to_bits()];
                let set = if cfg.grid.test.contains(&r) { "test" } else { "train" };
                let scaled = scale_j(&fit_ctx, r, &v.extrapolated);
                w.write_record([r.to_string(), set.into(), sci(&v.raw), sci(&v.extrapolated), sci(&scaled), sci(&result.model(&fit_ctx, r))])?;
            }
            w.flush()?;
            written.extend([json, csv_path]);
        }
    }

    let methods = cfg.method.methods();
    if methods.contains(&Method::Hs) && methods.contains(&Method::Rs) {
        for formula in cfg.formula.formulas() {
            let (hs, rs) = (&series[&(Method::Hs, formula)], &series[&(Method::Rs, formula)]);
            let pts: Vec<(f64, Real, Real)> = training
                .iter()
                .map(|r| (*r, rs[&r.to_bits()].extrapolated.clone(), hs[&r.to_bits()].extrapolated.clone()))
                .collect();
            let wk = fit_wk(&fit_ctx, &pts, cfg.fit.wk_terms)?;
            let path = session.out.join(format!("fit_wk_{}.json", formula.label()));
            write_json(
                &path,
                &WkSummary {
                    formula: formula.label().into(),
                    first_power: wk.first_power,
                    w: wk.w.iter().map(sci).collect(),
                    residual: to_scientific(&wk.residual, 6),
                    condition: wk.condition,
                    grid: training.clone(),
                },
            )?;
            written.push(path);
        }
    }
    Ok(written)
}

/// `R` and `Omega` from flags, falling back to the config's `[diagnose]`.
pub fn resolve_point(session: &Session, r: Option<f64>, omega: Option<u32>) -> anyhow::Result<(f64, u32, usize)> {
    let d = session.config.as_ref().and_then(|c| c.diagnose.as_ref());
    let r = r.or(d.map(|d| d.r)).context("need --r or a [diagnose] section")?;
    let omega = omega.or(d.map(|d| d.omega)).context("need --omega or a [diagnose] section")?;
    let eta_points = d.map_or(40, |d| d.eta_points);
    Ok((r, omega, eta_points))
}

pub struct DiagnoseOutput {
    pub ratios: PathBuf,
    pub local_energy: PathBuf,
    pub n_crit: Option<usize>,
}

pub fn diagnose(session: &Session, r: f64, omega: u32, eta_points: usize, digits: Option<u32>) -> anyhow::Result<DiagnoseOutput> {
    let ctx = session.context(r, digits)?;
    let max_order = session.config.as_ref().map_or(200, |c| c.max_order);
    let basis = enumerate_basis(&ctx, omega, r);
    let sys = PerturbationSystem::new(&basis)?;
    ensure_dir(&session.out)?;

    let rs = sys.rs_expand(max_order);
    let corr = sapt_corrections(&ctx, &sys.matrices, &rs, rs.max_order());
    let n_crit = detect_ncrit(&corr);
    let ratios = session.out.join(format!("ratios_R{r}_O{omega}.csv"));
    let mut w = csv::Writer::from_path(&ratios)?;
    w.write_record(["n", "j_n", "ratio_next"])?;
    for n in 1..corr.len() {
        let ratio = match corr.get(n + 1) {
            Some(next) if !corr[n].is_zero() => sci(&Float::with_val(ctx.bits(), next / &corr[n])),
            _ => String::new(),
        };
        w.write_record([n.to_string(), sci(&corr[n]), ratio])?;
    }
    w.flush()?;

    let hs = sys.hs_expand(HsStop::converged(max_order));
    let conv = hs.converged_at.unwrap_or(hs.max_order());
    let (eg, eu) = (hs.energy_g_sum(conv), hs.energy_u_sum(conv));
    let phi_hs = hs.partial_sum(conv);
    let phi_rs = rs.partial_sum(n_crit.unwrap_or(rs.max_order()));
    let eta: Vec<f64> = (0..eta_points).map(|i| -1.0 + (2 * i + 1) as f64 / eta_points as f64).collect();
    let mut columns = Vec::new();
    for phi in [&phi_hs, &phi_rs] {
        for (sym, e) in [(Symmetry::G, &eg), (Symmetry::U, &eu)] {
            columns.push(local_energy(&basis, phi, sym, &eta, Hamiltonian::Full, Some(e.clone()))?.e_loc);
        }
    }
    let local = session.out.join(format!("localenergy_R{r}_O{omega}.csv"));
    let mut w = csv::Writer::from_path(&local)?;
    w.write_record(["eta", "hs_g", "hs_u", "rs_g", "rs_u", "e_ref_g", "e_ref_u"])?;
    for (i, e) in eta.iter().enumerate() {
        let mut row = vec![e.to_string()];
        row.extend(columns.iter().map(|c| sci(&c[i])));
        row.extend([sci(&eg), sci(&eu)]);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(DiagnoseOutput { ratios, local_energy: local, n_crit })
}

pub fn dump_basis(session: &Session, r: f64, omega: u32, digits: Option<u32>) -> anyhow::Result<String> {
    let ctx = session.context(r, digits)?;
    let basis = enumerate_basis(&ctx, omega, r);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "center", "n", "m", "norm"])?;
    for (i, f) in basis.functions().iter().enumerate() {
        w.write_record([i.to_string(), f.center.label().into(), f.n.to_string(), f.m.to_string(), sci(&f.norm)])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct MatrixDump {
    r: f64,
    omega: u32,
    digits: u32,
    dim: usize,
    matrices: BTreeMap<&'static str, Vec<Vec<String>>>,
}

pub fn dump_matrices(session: &Session, r: f64, omega: u32, digits: Option<u32>) -> anyhow::Result<PathBuf> {
    let ctx = session.context(r, digits)?;
    let m = build_matrices(&enumerate_basis(&ctx, omega, r))?;
    let rows = |a: &DenseMatrix| -> Vec<Vec<String>> { (0..a.rows()).map(|i| a.row(i).iter().map(sci).collect()).collect() };
    let matrices = BTreeMap::from([
        ("S", rows(&m.s)),
        ("T", rows(&m.t)),
        ("Ua", rows(&m.ua)),
        ("Ub", rows(&m.ub)),
        ("H0", rows(&m.h0)),
        ("V", rows(&m.v)),
    ]);
    ensure_dir(&session.out)?;
    let path = session.out.join(format!("matrices_R{r}_O{omega}.json"));
    write_json(&path, &MatrixDump { r, omega, digits: ctx.digits(), dim: m.dim(), matrices })?;
    Ok(path)
}

//! On-disk record store: `records.csv` plus a JSON run manifest.
//!
//! Rows are kept sorted by key so that the file content depends only on the
//! set of records, not on the order in which they were computed.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rug::Float;
use sapt_exchange::exchange::{ExchangeRecord, Formula, OmegaTag, OrderTag};
use sapt_exchange::mpkernel::to_scientific;
use sapt_exchange::perturbation::Method;
use sapt_exchange::PrecisionContext;
use serde::{Deserialize, Serialize};

pub const RECORDS_FILE: &str = "records.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// `(R, Omega, method, formula, order, digits)`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordKey {
    pub r: f64,
    pub omega: OmegaTag,
    pub method: Method,
    pub formula: Formula,
    pub order: OrderTag,
    pub digits: u32,
}

impl RecordKey {
    pub fn of(rec: &ExchangeRecord) -> Self {
        Self { r: rec.r, omega: rec.omega, method: rec.method, formula: rec.formula, order: rec.order, digits: rec.digits }
    }
}

impl Eq for RecordKey {}

impl Ord for RecordKey {
    fn cmp(&self, o: &Self) -> Ordering {
        self.r
            .total_cmp(&o.r)
            .then(self.omega.cmp(&o.omega))
            .then(self.method.cmp(&o.method))
            .then(self.formula.cmp(&o.formula))
            .then(self.order.cmp(&o.order))
            .then(self.digits.cmp(&o.digits))
    }
}

impl PartialOrd for RecordKey {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl std::fmt::Display for RecordKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "R={} Omega={} {} {} order={} digits={}",
            self.r,
            self.omega,
            self.method.label(),
            self.formula.label(),
            self.order,
            self.digits
        )
    }
}

/// CSV row of one [`ExchangeRecord`].
#[derive(Debug, Serialize, Deserialize)]
pub struct RecordRow {
    pub r: f64,
    pub omega: String,
    pub method: String,
    pub formula: String,
    pub order: String,
    pub digits: u32,
    pub j: String,
    pub provenance: String,
}

impl RecordRow {
    pub fn from_record(rec: &ExchangeRecord) -> Self {
        Self {
            r: rec.r,
            omega: rec.omega.to_string(),
            method: rec.method.label().to_string(),
            formula: rec.formula.label().to_string(),
            order: rec.order.to_string(),
            digits: rec.digits,
            j: to_scientific(&rec.j, rec.digits),
            provenance: rec.provenance.clone().unwrap_or_default(),
        }
    }

    pub fn to_record(&self) -> anyhow::Result<ExchangeRecord> {
        let ctx = PrecisionContext::new(self.digits)?;
        Ok(ExchangeRecord {
            r: self.r,
            omega: self.omega.parse()?,
            method: self.method.parse()?,
            formula: self.formula.parse()?,
            order: self.order.parse()?,
            j: ctx.parse(&self.j)?,
            digits: self.digits,
            provenance: (!self.provenance.is_empty()).then(|| self.provenance.clone()),
        })
    }
}

pub fn write_records<'a>(path: &Path, records: impl IntoIterator<Item = &'a ExchangeRecord>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for rec in records {
        w.serialize(RecordRow::from_record(rec))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> anyhow::Result<Vec<ExchangeRecord>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<RecordRow>().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), i + 2))?;
        out.push(row.to_record().with_context(|| format!("{} row {}", path.display(), i + 2))?);
    }
    Ok(out)
}

#[derive(Debug)]
pub struct ResultsStore {
    dir: PathBuf,
    records: BTreeMap<RecordKey, ExchangeRecord>,
}

impl ResultsStore {
    /// Empty store rooted at `dir` (nothing is read).
    pub fn empty(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), records: BTreeMap::new() }
    }

    /// Store with the records already in `dir/records.csv`, if any.
    pub fn open(dir: &Path) -> anyhow::Result<Self> {
        let mut store = Self::empty(dir);
        let path = dir.join(RECORDS_FILE);
        if path.exists() {
            for rec in read_records(&path)? {
                store.insert(rec)?;
            }
        }
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn get(&self, key: &RecordKey) -> Option<&ExchangeRecord> {
        self.records.get(key)
    }

    pub fn contains(&self, key: &RecordKey) -> bool {
        self.records.contains_key(key)
    }

    pub fn records(&self) -> impl Iterator<Item = &ExchangeRecord> {
        self.records.values()
    }

    /// Adds a record. A different value under an existing key (relative
    /// difference above `10^(10-digits)`) is an integrity error.
    pub fn insert(&mut self, rec: ExchangeRecord) -> anyhow::Result<()> {
        let key = RecordKey::of(&rec);
        if let Some(old) = self.records.get(&key) {
            let ctx = PrecisionContext::new(rec.digits)?;
            let diff = Float::with_val(ctx.bits(), &rec.j - &old.j).abs();
            let scale = Float::with_val(ctx.bits(), old.j.abs_ref()).max(&Float::with_val(ctx.bits(), rec.j.abs_ref()));
            if diff > scale * ctx.tolerance(10) {
                bail!(
                    "store integrity error at {key}: {} vs {}",
                    to_scientific(&old.j, 20),
                    to_scientific(&rec.j, 20)
                );
            }
            return Ok(());
        }
        self.records.insert(key, rec);
        Ok(())
    }

    pub fn write(&self) -> anyhow::Result<()> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        write_records(&self.dir.join(RECORDS_FILE), self.records.values())
    }
}

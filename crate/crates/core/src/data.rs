//! Unit-level datasets and the empirical distributions estimated from them.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks on probability tables.
const SUM_TOL: f64 = 1e-12;

/// Unit-level observations: optional binary instrument, binary treatment,
/// and an outcome that is either binary or continuous in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    z: Option<Vec<u8>>,
    x: Vec<u8>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(z: Option<Vec<u8>>, x: Vec<u8>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no units".into()));
        }
        if y.len() != n || z.as_ref().is_some_and(|z| z.len() != n) {
            return Err(Error::InvalidInput(
                "dataset columns differ in length".into(),
            ));
        }
        if x.iter().chain(z.iter().flatten()).any(|&v| v > 1) {
            return Err(Error::InvalidInput(
                "binary column contains a value other than 0/1".into(),
            ));
        }
        if let Some(bad) = y.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("outcome {bad} outside [0, 1]")));
        }
        Ok(Dataset { z, x, y })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn z(&self) -> Option<&[u8]> {
        self.z.as_deref()
    }

    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn has_instrument(&self) -> bool {
        self.z.is_some()
    }

    /// True when every outcome is exactly 0 or 1.
    pub fn has_binary_outcome(&self) -> bool {
        self.y.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Drops the instrument column.
    pub fn without_instrument(&self) -> Dataset {
        Dataset {
            z: None,
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }

    pub(crate) fn with_outcome(&self, y: Vec<f64>) -> Dataset {
        Dataset {
            z: self.z.clone(),
            x: self.x.clone(),
            y,
        }
    }

    /// Writes the dataset as CSV with header `unit_id,z,x,y` (or
    /// `unit_id,x,y` without an instrument).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        match &self.z {
            Some(_) => wr.write_record(["unit_id", "z", "x", "y"])?,
            None => wr.write_record(["unit_id", "x", "y"])?,
        }
        for i in 0..self.n() {
            let id = (i + 1).to_string();
            let x = self.x[i].to_string();
            let y = format_value(self.y[i]);
            match &self.z {
                Some(z) => wr.write_record([id, z[i].to_string(), x, y])?,
                None => wr.write_record([id, x, y])?,
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let (xi, yi) = match (col("x"), col("y")) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                return Err(Error::InvalidInput(
                    "CSV must have `x` and `y` columns".into(),
                ))
            }
        };
        let zi = col("z");
        let (mut z, mut x, mut y) = (zi.map(|_| Vec::new()), Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap_or("").trim();
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("cannot parse `{s}` as a number")))
            };
            x.push(to_binary(field(xi)?)?);
            y.push(field(yi)?);
            if let (Some(zi), Some(z)) = (zi, z.as_mut()) {
                z.push(to_binary(field(zi)?)?);
            }
        }
        Dataset::new(z, x, y)
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Dataset::read_csv(std::io::BufReader::new(f))
    }
}

fn to_binary(v: f64) -> Result<u8> {
    if v == 0.0 {
        Ok(0)
    } else if v == 1.0 {
        Ok(1)
    } else {
        Err(Error::InvalidInput(format!("expected 0/1, found {v}")))
    }
}

fn format_value(v: f64) -> String {
    if v == 0.0 || v == 1.0 {
        format!("{}", v as u8)
    } else {
        format!("{v}")
    }
}

/// Empirical joint `P(X, Y)` of a binary treatment and binary outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryJoint {
    /// `p[x][y]`.
    pub p: [[f64; 2]; 2],
    /// Number of units the table was estimated from.
    pub n: usize,
}

impl BinaryJoint {
    pub fn new(p: [[f64; 2]; 2], n: usize) -> Result<Self> {
        check_table(&p)?;
        Ok(BinaryJoint { p, n })
    }

    /// The table `{P(0,0), P(0,1), P(1,0), P(1,1)}` given in row order.
    pub fn from_cells(p00: f64, p01: f64, p10: f64, p11: f64) -> Result<Self> {
        BinaryJoint::new([[p00, p01], [p10, p11]], 0)
    }

    pub fn px(&self, x: usize) -> f64 {
        self.p[x][0] + self.p[x][1]
    }

    pub fn py(&self, y: usize) -> f64 {
        self.p[0][y] + self.p[1][y]
    }

    /// `P(Y = 1 | X = x)`, or `None` for an empty arm.
    pub fn p_y1_given(&self, x: usize) -> Option<f64> {
        let px = self.px(x);
        (px > 0.0).then(|| self.p[x][1] / px)
    }

    /// Cell counts `p * n`, used as EM weights.
    pub fn counts(&self) -> [[f64; 2]; 2] {
        let n = self.n.max(1) as f64;
        self.p.map(|row| row.map(|v| v * n))
    }
}

/// Instrument marginal plus the per-arm tables `P(X, Y | Z = z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvJoint {
    /// `P(Z = 1)`.
    pub pz: f64,
    /// `cond[z][x][y]`.
    pub cond: [[[f64; 2]; 2]; 2],
    pub n: usize,
}

impl IvJoint {
    pub fn new(pz: f64, cond: [[[f64; 2]; 2]; 2], n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&pz) {
            return Err(Error::InvalidProbability(pz));
        }
        check_table(&cond[0])?;
        check_table(&cond[1])?;
        Ok(IvJoint { pz, cond, n })
    }

    pub fn pz_of(&self, z: usize) -> f64 {
        if z == 1 {
            self.pz
        } else {
            1.0 - self.pz
        }
    }

    /// `P(X = x | Z = z)`.
    pub fn px_given(&self, z: usize, x: usize) -> f64 {
        self.cond[z][x][0] + self.cond[z][x][1]
    }

    /// The instrument-free joint `P(X, Y) = Σ_z P(z) P(X, Y | z)`.
    pub fn marginalize(&self) -> BinaryJoint {
        let mut p = [[0.0; 2]; 2];
        for (x, row) in p.iter_mut().enumerate() {
            for (y, cell) in row.iter_mut().enumerate() {
                *cell = self.pz_of(0) * self.cond[0][x][y] + self.pz_of(1) * self.cond[1][x][y];
            }
        }
        BinaryJoint { p, n: self.n }
    }

    /// Cell counts `n_z * P(x, y | z)` indexed `[z][x][y]`.
    pub fn counts(&self) -> [[[f64; 2]; 2]; 2] {
        let n = self.n.max(1) as f64;
        let mut out = [[[0.0; 2]; 2]; 2];
        for z in 0..2 {
            let nz = n * self.pz_of(z);
            for x in 0..2 {
                for y in 0..2 {
                    out[z][x][y] = nz * self.cond[z][x][y];
                }
            }
        }
        out
    }
}

fn check_table(p: &[[f64; 2]; 2]) -> Result<()> {
    let mut sum = 0.0;
    for &v in p.iter().flatten() {
        if !(v >= 0.0) || v > 1.0 + SUM_TOL {
            return Err(Error::InvalidProbability(v));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidInput(format!(
            "probability table sums to {sum}"
        )));
    }
    Ok(())
}

fn binary_outcomes(d: &Dataset) -> Result<Vec<u8>> {
    d.y()
        .iter()
        .map(|&v| to_binary(v).map_err(|_| Error::ContinuousOutcome))
        .collect()
}

/// Plug-in frequency estimate of `P(X, Y)`. Any instrument column is ignored.
pub fn empirical_binary_joint(d: &Dataset) -> Result<BinaryJoint> {
    let y = binary_outcomes(d)?;
    let mut counts = [[0usize; 2]; 2];
    for (&x, &y) in d.x().iter().zip(&y) {
        counts[x as usize][y as usize] += 1;
    }
    let n = d.n();
    let p = counts.map(|row| row.map(|c| c as f64 / n as f64));
    Ok(BinaryJoint { p, n })
}

/// Plug-in estimate of `P(Z)` and the within-arm tables `P(X, Y | Z)`.
pub fn empirical_iv_joint(d: &Dataset) -> Result<IvJoint> {
    let z = d.z().ok_or(Error::MissingInstrument)?;
    let y = binary_outcomes(d)?;
    let mut counts = [[[0usize; 2]; 2]; 2];
    let mut nz = [0usize; 2];
    for ((&z, &x), &y) in z.iter().zip(d.x()).zip(&y) {
        counts[z as usize][x as usize][y as usize] += 1;
        nz[z as usize] += 1;
    }
    if nz[0] == 0 || nz[1] == 0 {
        return Err(Error::DegenerateInstrumentArm);
    }
    let mut cond = [[[0.0; 2]; 2]; 2];
    for zv in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                cond[zv][x][y] = counts[zv][x][y] as f64 / nz[zv] as f64;
            }
        }
    }
    Ok(IvJoint {
        pz: nz[1] as f64 / d.n() as f64,
        cond,
        n: d.n(),
    })
}

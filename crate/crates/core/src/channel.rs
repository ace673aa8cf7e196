//! Node geometry, distance-based path loss, seeded Rayleigh channel draws and
//! the effective end-to-end channels.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Purpose};
use crate::{CMat, CVec, Error, Result, C64};

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Positions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub alice: [f64; 3],
    pub ris: [f64; 3],
    pub bob: [f64; 3],
    pub eve: [f64; 3],
}

/// Link lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkDistances {
    pub ab: f64,
    pub ar: f64,
    pub rb: f64,
    pub ae: f64,
    pub re: f64,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl Geometry {
    /// Alice (0,5,10), RIS (100,0,2), Bob (100,3,0), Eve (90,2,0).
    pub fn reference() -> Self {
        Self {
            alice: [0.0, 5.0, 10.0],
            ris: [100.0, 0.0, 2.0],
            bob: [100.0, 3.0, 0.0],
            eve: [90.0, 2.0, 0.0],
        }
    }

    pub fn distances(&self) -> LinkDistances {
        LinkDistances {
            ab: distance(self.alice, self.bob),
            ar: distance(self.alice, self.ris),
            rb: distance(self.ris, self.bob),
            ae: distance(self.alice, self.eve),
            re: distance(self.ris, self.eve),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nodes = [self.alice, self.ris, self.bob, self.eve];
        if nodes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("node positions must be finite".into()));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if distance(nodes[i], nodes[j]) <= 0.0 {
                    return Err(Error::Config("two nodes share a position".into()));
                }
            }
        }
        Ok(())
    }
}

/// Per-link path-loss exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossExponents {
    pub ar: f64,
    pub rb: f64,
    pub re: f64,
    pub ab: f64,
    pub ae: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    /// Gain at the reference distance, dB.
    pub rho0_db: f64,
    /// Reference distance, meters.
    pub d0: f64,
    pub gamma: PathLossExponents,
}

impl PathLossModel {
    /// -30 dB at 1 m; exponents ar 2.2, rb 2.5, re 2.5, ab 3.5, ae 3.5.
    pub fn reference() -> Self {
        Self {
            rho0_db: -30.0,
            d0: 1.0,
            gamma: PathLossExponents {
                ar: 2.2,
                rb: 2.5,
                re: 2.5,
                ab: 3.5,
                ae: 3.5,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0 && self.rho0_db.is_finite()) {
            return Err(Error::Config("reference distance must be positive".into()));
        }
        let g = self.gamma;
        if [g.ar, g.rb, g.re, g.ab, g.ae].iter().any(|&e| !(e >= 2.0)) {
            return Err(Error::Config("path-loss exponents must be at least 2".into()));
        }
        Ok(())
    }
}

/// Linear power gain `10^(rho0/10) (d/d0)^-gamma`.
pub fn path_loss(d: f64, gamma: f64, plm: &PathLossModel) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance {d} must be positive")));
    }
    Ok(db_to_linear(plm.rho0_db) * (d / plm.d0).powf(-gamma))
}

/// Antenna counts, power budget (W), noise powers (W) and the channel seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub na: usize,
    pub nb: usize,
    pub ne: usize,
    pub ns: usize,
    pub m: usize,
    pub power: f64,
    pub sigma2_b: f64,
    pub sigma2_e: f64,
    pub seed: u64,
}

impl SystemConfig {
    /// Four antennas everywhere, four streams, 30 dBm budget, -110 dBm noise.
    pub fn reference(m: usize, seed: u64) -> Self {
        Self {
            na: 4,
            nb: 4,
            ne: 4,
            ns: 4,
            m,
            power: dbm_to_watt(30.0),
            sigma2_b: dbm_to_watt(-110.0),
            sigma2_e: dbm_to_watt(-110.0),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.na, self.nb, self.ne, self.ns, self.m].contains(&0) {
            return Err(Error::Config("all counts must be at least 1".into()));
        }
        if self.ns > self.na.min(self.nb) {
            return Err(Error::Config(format!(
                "ns = {} exceeds min(na, nb) = {}",
                self.ns,
                self.na.min(self.nb)
            )));
        }
        for (name, v) in [
            ("power", self.power),
            ("sigma2_b", self.sigma2_b),
            ("sigma2_e", self.sigma2_e),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// The five link matrices, linear scale with path loss included.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Alice to Bob, `nb x na`.
    pub h_ab: CMat,
    /// Alice to RIS, `m x na`.
    pub h_ar: CMat,
    /// RIS to Bob, `nb x m`.
    pub h_rb: CMat,
    /// Alice to Eve, `ne x na`.
    pub h_ae: CMat,
    /// RIS to Eve, `ne x m`.
    pub h_re: CMat,
}

const LINK_NAMES: [&str; 5] = ["H_ab", "H_ar", "H_rb", "H_ae", "H_re"];

impl ChannelSet {
    pub fn na(&self) -> usize {
        self.h_ab.ncols()
    }
    pub fn nb(&self) -> usize {
        self.h_ab.nrows()
    }
    pub fn ne(&self) -> usize {
        self.h_ae.nrows()
    }
    pub fn m(&self) -> usize {
        self.h_ar.nrows()
    }

    pub fn check_dims(&self) -> Result<()> {
        let (na, nb, ne, m) = (self.na(), self.nb(), self.ne(), self.m());
        let ok = self.h_ar.shape() == (m, na)
            && self.h_rb.shape() == (nb, m)
            && self.h_ae.shape() == (ne, na)
            && self.h_re.shape() == (ne, m);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "inconsistent link shapes ab {:?} ar {:?} rb {:?} ae {:?} re {:?}",
                self.h_ab.shape(),
                self.h_ar.shape(),
                self.h_rb.shape(),
                self.h_ae.shape(),
                self.h_re.shape()
            )))
        }
    }

    /// Same direct links with the reflected paths removed.
    pub fn without_ris(&self) -> Self {
        Self {
            h_rb: CMat::zeros(self.nb(), self.m()),
            h_re: CMat::zeros(self.ne(), self.m()),
            ..self.clone()
        }
    }

    /// Bob and Eve exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            h_ab: self.h_ae.clone(),
            h_ar: self.h_ar.clone(),
            h_rb: self.h_re.clone(),
            h_ae: self.h_ab.clone(),
            h_re: self.h_rb.clone(),
        }
    }

    fn links(&self) -> [&CMat; 5] {
        [&self.h_ab, &self.h_ar, &self.h_rb, &self.h_ae, &self.h_re]
    }

    /// Text dump: for each link a `matrix,<name>,<rows>,<cols>` line followed by
    /// its rows as interleaved `re,im` values. Values use shortest round-trip
    /// formatting, so [`ChannelSet::from_csv`] restores them bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (name, h) in LINK_NAMES.iter().zip(self.links()) {
            let _ = writeln!(out, "matrix,{name},{},{}", h.nrows(), h.ncols());
            for i in 0..h.nrows() {
                let row: Vec<String> = (0..h.ncols())
                    .flat_map(|j| [h[(i, j)].re.to_string(), h[(i, j)].im.to_string()])
                    .collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Config(format!("channel dump: {msg}"));
        let mut lines = text.lines();
        let mut mats = Vec::with_capacity(5);
        for name in LINK_NAMES {
            let header = lines.next().ok_or_else(|| bad("truncated"))?;
            let parts: Vec<&str> = header.split(',').collect();
            if parts.len() != 4 || parts[0] != "matrix" || parts[1] != name {
                return Err(bad(&format!("expected header for {name}")));
            }
            let rows: usize = parts[2].parse().map_err(|_| bad("row count"))?;
            let cols: usize = parts[3].parse().map_err(|_| bad("column count"))?;
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = lines.next().ok_or_else(|| bad("truncated"))?;
                let vals: Vec<f64> = line
                    .split(',')
                    .map(|v| v.parse::<f64>().map_err(|_| bad("value")))
                    .collect::<Result<_>>()?;
                if vals.len() != 2 * cols {
                    return Err(bad("row length"));
                }
                data.extend(vals.chunks(2).map(|c| C64::new(c[0], c[1])));
            }
            mats.push(CMat::from_row_slice(rows, cols, &data));
        }
        let mut it = mats.into_iter();
        let set = Self {
            h_ab: it.next().unwrap(),
            h_ar: it.next().unwrap(),
            h_rb: it.next().unwrap(),
            h_ae: it.next().unwrap(),
            h_re: it.next().unwrap(),
        };
        set.check_dims()?;
        Ok(set)
    }
}

/// Circularly-symmetric unit-variance complex Gaussian matrix filled row-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let data: Vec<C64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        })
        .collect();
    CMat::from_row_slice(rows, cols, &data)
}

/// Draws one channel realization. Each link uses its own named stream of
/// `cfg.seed`.
pub fn generate_channels(
    cfg: &SystemConfig,
    geo: &Geometry,
    plm: &PathLossModel,
) -> Result<ChannelSet> {
    cfg.validate()?;
    geo.validate()?;
    plm.validate()?;
    let d = geo.distances();
    let g = plm.gamma;
    let link = |rows, cols, dist, gamma, purpose| -> Result<CMat> {
        let amp = path_loss(dist, gamma, plm)?.sqrt();
        let mut rng = rng::stream(cfg.seed, purpose);
        Ok(gaussian_matrix(rows, cols, &mut rng) * C64::from(amp))
    };
    Ok(ChannelSet {
        h_ab: link(cfg.nb, cfg.na, d.ab, g.ab, Purpose::LinkAb)?,
        h_ar: link(cfg.m, cfg.na, d.ar, g.ar, Purpose::LinkAr)?,
        h_rb: link(cfg.nb, cfg.m, d.rb, g.rb, Purpose::LinkRb)?,
        h_ae: link(cfg.ne, cfg.na, d.ae, g.ae, Purpose::LinkAe)?,
        h_re: link(cfg.ne, cfg.m, d.re, g.re, Purpose::LinkRe)?,
    })
}

/// `H_rx + H_r,rx diag(phi) H_ar`, computed without forming the diagonal.
fn cascade(direct: &CMat, from_ris: &CMat, h_ar: &CMat, phi: &CVec) -> CMat {
    let mut scaled = from_ris.clone();
    for (mut col, p) in scaled.column_iter_mut().zip(phi.iter()) {
        col *= *p;
    }
    direct + scaled * h_ar
}

/// Effective Alice-Bob and Alice-Eve channels for reflection vector `phi`.
pub fn effective_channels(ch: &ChannelSet, phi: &CVec) -> Result<(CMat, CMat)> {
    ch.check_dims()?;
    if phi.len() != ch.m() {
        return Err(Error::Dimension(format!(
            "phi has {} entries, RIS has {}",
            phi.len(),
            ch.m()
        )));
    }
    Ok((
        cascade(&ch.h_ab, &ch.h_rb, &ch.h_ar, phi),
        cascade(&ch.h_ae, &ch.h_re, &ch.h_ar, phi),
    ))
}

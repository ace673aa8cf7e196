//! Serde representation of complex matrices as row-major `[re, im]` pairs.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{CMat, C64};

#[derive(Serialize, Deserialize)]
struct Repr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
    let data = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
        .collect();
    Repr {
        rows: m.nrows(),
        cols: m.ncols(),
        data,
    }
    .serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
    let r = Repr::deserialize(d)?;
    if r.data.len() != r.rows * r.cols {
        return Err(serde::de::Error::custom("matrix data length does not match shape"));
    }
    let data: Vec<C64> = r.data.iter().map(|p| C64::new(p[0], p[1])).collect();
    Ok(CMat::from_row_slice(r.rows, r.cols, &data))
}

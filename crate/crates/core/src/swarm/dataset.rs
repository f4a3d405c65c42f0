use serde::{Deserialize, Serialize};

use super::SwarmError;

/// One row of a `t,value` time-series CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub t: f64,
    pub value: f64,
}

/// What a scatterplot point's LED encodes.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesMark {
    Series(String),
    Scalar(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    pub x: f64,
    pub y: f64,
    pub mark: SeriesMark,
}

/// One row of a `name,lat,lon,scalar` CSV.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct GeoRow {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub scalar: f64,
}

fn read<T: for<'de> Deserialize<'de>>(text: &str, header: &[&str]) -> Result<Vec<T>, SwarmError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| SwarmError::Dataset(e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(SwarmError::Dataset(format!(
            "expected header `{}`, found `{}`",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| SwarmError::Dataset(e.to_string())))
        .collect()
}

pub fn read_timeseries_csv(text: &str) -> Result<Vec<TimeSample>, SwarmError> {
    let mut rows: Vec<TimeSample> = read(text, &["t", "value"])?;
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(rows)
}

pub fn read_geo_csv(text: &str) -> Result<Vec<GeoRow>, SwarmError> {
    read(text, &["name", "lat", "lon", "scalar"])
}

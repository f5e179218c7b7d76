//! Grid syntax shared by flags and config files: a comma list (`0.3,0.5,0.7`)
//! or an inclusive range `start:stop:step` (`0:1:0.05`). Integer grids also
//! accept `start:stop` with a unit step.

use serde::Deserialize;

use crate::error::{Error, Result};

/// Largest number of points a range may expand to.
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FloatGrid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct CountGrid(pub Vec<u32>);

#[derive(Debug, Clone, PartialEq)]
pub struct YieldPairs(pub Vec<(f64, f64)>);

pub fn parse_float_grid(text: &str) -> Result<FloatGrid, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("grid is empty".into());
    }
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("range `{text}` must be start:stop:step"));
        };
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        return float_range(start, stop, step).map(FloatGrid);
    }
    text.split(',').map(|s| number(s.trim())).collect::<Result<Vec<_>, _>>().map(FloatGrid)
}

pub fn parse_count_grid(text: &str) -> Result<CountGrid, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("grid is empty".into());
    }
    if text.contains(':') {
        let parts: Vec<u32> = text.split(':').map(|s| count(s.trim())).collect::<Result<_, _>>()?;
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (*a, *b, 1),
            [a, b, s] => (*a, *b, *s),
            _ => return Err(format!("range `{text}` must be start:stop or start:stop:step")),
        };
        if step == 0 || start > stop {
            return Err(format!("range `{text}` is empty or has a zero step"));
        }
        return Ok(CountGrid((start..=stop).step_by(step as usize).collect()));
    }
    text.split(',').map(|s| count(s.trim())).collect::<Result<Vec<_>, _>>().map(CountGrid)
}

/// `high/low` pairs separated by commas, e.g. `1000/500,600/300`.
pub fn parse_yield_pairs(text: &str) -> Result<YieldPairs, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("yield list is empty".into());
    }
    text.split(',')
        .map(|pair| {
            let (hi, lo) = pair
                .trim()
                .split_once('/')
                .ok_or_else(|| format!("yield pair `{}` must be HIGH/LOW", pair.trim()))?;
            Ok((number(hi.trim())?, number(lo.trim())?))
        })
        .collect::<Result<Vec<_>, String>>()
        .map(YieldPairs)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn count(s: &str) -> Result<u32, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn float_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0) || stop < start {
        return Err(format!("range {start}:{stop}:{step} needs step > 0 and stop >= start"));
    }
    let span = (stop - start) / step;
    let last = span.round();
    if (span - last).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(format!("range {start}:{stop}:{step}: step does not divide the span"));
    }
    if last >= MAX_GRID_POINTS as f64 {
        return Err(format!("range {start}:{stop}:{step} has too many points"));
    }
    let last = last as usize;
    Ok((0..=last).map(|i| if i == last { stop } else { start + i as f64 * step }).collect())
}

/// A grid in a config file: a number, an array of numbers, or grid syntax.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    One(f64),
    Many(Vec<f64>),
    Text(String),
}

impl GridValue {
    pub fn floats(&self, key: &str) -> Result<FloatGrid> {
        match self {
            GridValue::One(v) => Ok(FloatGrid(vec![*v])),
            GridValue::Many(v) if v.is_empty() => Err(Error::config(format!("config `{key}`: grid is empty"))),
            GridValue::Many(v) => Ok(FloatGrid(v.clone())),
            GridValue::Text(s) => parse_float_grid(s).map_err(|e| Error::config(format!("config `{key}`: {e}"))),
        }
    }

    pub fn counts(&self, key: &str) -> Result<CountGrid> {
        let bad = || Error::config(format!("config `{key}`: expected non-negative integers"));
        let as_count = |v: f64| {
            if v.fract() == 0.0 && (0.0..=f64::from(u32::MAX)).contains(&v) {
                Ok(v as u32)
            } else {
                Err(bad())
            }
        };
        match self {
            GridValue::One(v) => Ok(CountGrid(vec![as_count(*v)?])),
            GridValue::Many(v) if v.is_empty() => Err(Error::config(format!("config `{key}`: grid is empty"))),
            GridValue::Many(v) => v.iter().map(|&x| as_count(x)).collect::<Result<_>>().map(CountGrid),
            GridValue::Text(s) => parse_count_grid(s).map_err(|e| Error::config(format!("config `{key}`: {e}"))),
        }
    }
}

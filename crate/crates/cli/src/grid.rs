use serde::Serialize;
use std::str::FromStr;

/// `min:max:points[:log]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self {
            min,
            max,
            points,
            log: false,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else if i + 1 == self.points {
                    self.max
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(format!("grid must be min:max:points[:log], got {s:?}"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad grid bound {t:?}: {e}"));
        let min = num(parts[0])?;
        let max = num(parts[1])?;
        let points: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("bad point count {:?}: {e}", parts[2]))?;
        let log = match parts.get(3).map(|t| t.trim()) {
            None | Some("lin") | Some("linear") => false,
            Some("log") => true,
            Some(other) => return Err(format!("grid spacing must be lin or log, got {other:?}")),
        };
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(format!("grid needs finite min < max, got {min} and {max}"));
        }
        if points < 2 {
            return Err(format!("grid needs at least 2 points, got {points}"));
        }
        if log && min <= 0.0 {
            return Err("log grid needs min > 0".into());
        }
        Ok(Self { min, max, points, log })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        let g: GridSpec = "0:0.111:200".parse().unwrap();
        assert_eq!(g.values().len(), 200);
        assert_eq!(g.values()[199], 0.111);
        let l: GridSpec = "0.01:100:5:log".parse().unwrap();
        assert!((l.values()[2] - 1.0).abs() < 1e-12);
        for bad in ["1:0:10", "0:1:1", "0:1", "0:1:5:cubic", "0:1:5:log", "a:1:3"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}

//! Parameter-grid flag: `MIN:MAX:COUNT[:lin|log]`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

/// An inclusive scan range with its sampling density and spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: GridScale,
}

impl GridSpec {
    /// The sample points, endpoints exact.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        let interior = |i: usize| {
            let t = i as f64 / (n - 1) as f64;
            match self.scale {
                GridScale::Linear => self.min + (self.max - self.min) * t,
                GridScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
            }
        };
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i == n - 1 {
                    self.max
                } else {
                    interior(i)
                }
            })
            .collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            GridScale::Linear => "lin",
            GridScale::Log => "log",
        };
        write!(f, "{}:{}:{}:{scale}", self.min, self.max, self.count)
    }
}

/// Flag parser for [`GridSpec`]; rejections become usage errors.
pub fn parse_grid(text: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(format!(
            "expected MIN:MAX:COUNT[:lin|log], got `{text}`"
        ));
    }
    let number = |what: &str, s: &str| -> Result<f64, String> {
        let v: f64 = s
            .parse()
            .map_err(|_| format!("{what} `{s}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("{what} `{s}` is not finite"));
        }
        Ok(v)
    };
    let min = number("grid minimum", parts[0])?;
    let max = number("grid maximum", parts[1])?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| format!("grid count `{}` is not an integer", parts[2]))?;
    let scale = match parts.get(3).copied() {
        None | Some("log") => GridScale::Log,
        Some("lin") => GridScale::Linear,
        Some(other) => return Err(format!("grid scale must be `lin` or `log`, got `{other}`")),
    };
    if count < 2 {
        return Err(format!("grid needs at least 2 points, got {count}"));
    }
    if min >= max {
        return Err(format!("grid minimum {min} must be below maximum {max}"));
    }
    if scale == GridScale::Log && min <= 0.0 {
        return Err(format!("log grid needs a positive minimum, got {min}"));
    }
    Ok(GridSpec {
        min,
        max,
        count,
        scale,
    })
}

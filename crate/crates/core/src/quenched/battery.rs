use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::operator::{Grid, GridFunction};

/// Named test functions on `[0, 1]`.
///
/// JSON forms: `{"indicator": [a, b]}`, `"ramp"`, `"constant"` (the constant
/// 1), `{"constant": c}` and `{"hat": {"center": c, "width": w}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", try_from = "RawTestFunction")]
pub enum TestFunction {
    Indicator([f64; 2]),
    Ramp,
    Constant(f64),
    Hat { center: f64, width: f64 },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTestFunction {
    Name(String),
    Tagged(TaggedTestFunction),
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum TaggedTestFunction {
    Indicator([f64; 2]),
    Constant(f64),
    Hat { center: f64, width: f64 },
}

impl TryFrom<RawTestFunction> for TestFunction {
    type Error = String;

    fn try_from(raw: RawTestFunction) -> std::result::Result<Self, String> {
        let f = match raw {
            RawTestFunction::Name(n) => match n.as_str() {
                "ramp" => TestFunction::Ramp,
                "constant" => TestFunction::Constant(1.0),
                other => return Err(format!("unknown test function {other:?}")),
            },
            RawTestFunction::Tagged(TaggedTestFunction::Indicator(iv)) => {
                TestFunction::Indicator(iv)
            }
            RawTestFunction::Tagged(TaggedTestFunction::Constant(c)) => TestFunction::Constant(c),
            RawTestFunction::Tagged(TaggedTestFunction::Hat { center, width }) => {
                TestFunction::Hat { center, width }
            }
        };
        f.validate().map_err(|e| e.to_string())?;
        Ok(f)
    }
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TestFunction::Indicator([a, b]) if !(0.0 <= a && a < b && b <= 1.0) => Err(
                Error::config("indicator", format!("need 0 ≤ a < b ≤ 1, got [{a}, {b}]")),
            ),
            TestFunction::Hat { center, width }
                if !((0.0..=1.0).contains(&center) && width > 0.0) =>
            {
                Err(Error::config(
                    "hat",
                    format!("need center in [0,1] and width > 0, got ({center}, {width})"),
                ))
            }
            TestFunction::Constant(c) if !c.is_finite() => {
                Err(Error::config("constant", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Short identifier used as a report key.
    pub fn id(&self) -> String {
        match self {
            TestFunction::Indicator([a, b]) => format!("indicator[{a:.6},{b:.6}]"),
            TestFunction::Ramp => "ramp".into(),
            TestFunction::Constant(c) => format!("constant({c})"),
            TestFunction::Hat { center, width } => format!("hat({center:.6},{width:.6})"),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Indicator([a, b]) => {
                if (a <= x && x < b) || (b == 1.0 && x == 1.0) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Ramp => x,
            TestFunction::Constant(c) => c,
            TestFunction::Hat { center, width } => (1.0 - (x - center).abs() / width).max(0.0),
        }
    }

    /// Exact total variation on `[0, 1]`.
    pub fn variation(&self) -> f64 {
        match *self {
            TestFunction::Indicator([a, b]) => (a > 0.0) as u8 as f64 + (b < 1.0) as u8 as f64,
            TestFunction::Ramp => 1.0,
            TestFunction::Constant(_) => 0.0,
            TestFunction::Hat { .. } => (1.0 - self.eval(0.0)) + (1.0 - self.eval(1.0)),
        }
    }

    /// Exact average over `[lo, hi]`.
    pub fn average(&self, lo: f64, hi: f64) -> f64 {
        let len = hi - lo;
        match *self {
            TestFunction::Indicator([a, b]) => (hi.min(b) - lo.max(a)).max(0.0) / len,
            TestFunction::Ramp => 0.5 * (lo + hi),
            TestFunction::Constant(c) => c,
            TestFunction::Hat { center, width } => {
                // Piecewise linear: integrate exactly between kinks.
                let mut pts = vec![lo, hi];
                pts.extend(
                    [center - width, center, center + width]
                        .into_iter()
                        .filter(|&k| lo < k && k < hi),
                );
                pts.sort_by(f64::total_cmp);
                let integral: f64 = pts
                    .windows(2)
                    .map(|w| 0.5 * (self.eval(w[0]) + self.eval(w[1])) * (w[1] - w[0]))
                    .sum();
                integral / len
            }
        }
    }

    pub fn on_grid(&self, grid: &Arc<Grid>) -> GridFunction {
        match self {
            TestFunction::Indicator([a, b]) => {
                GridFunction::indicator(grid.clone(), &IntervalSet::from_pairs(&[[*a, *b]]))
            }
            _ => GridFunction::from_cell_averages(grid.clone(), |lo, hi| self.average(lo, hi)),
        }
    }
}

/// The default battery of 20 indicators, ramps, hats and constants.
pub fn standard_battery() -> Vec<TestFunction> {
    let third = 1.0 / 3.0;
    let mut out = vec![TestFunction::Constant(1.0), TestFunction::Ramp];
    for iv in [
        [0.0, 0.5],
        [0.5, 1.0],
        [0.0, third],
        [third, 2.0 * third],
        [2.0 * third, 1.0],
        [0.0, 0.25],
        [0.25, 0.5],
        [0.5, 0.75],
        [0.75, 1.0],
        [0.1, 0.7],
        [0.2, 0.3],
    ] {
        out.push(TestFunction::Indicator(iv));
    }
    for (center, width) in [
        (0.5, 0.25),
        (0.25, 0.1),
        (0.75, 0.2),
        (1.0 / 6.0, 1.0 / 6.0),
        (0.9, 0.05),
        (0.4, 0.3),
    ] {
        out.push(TestFunction::Hat { center, width });
    }
    out.push(TestFunction::Constant(2.5));
    out
}

//! Mutual-dimension profiles: the density `I(S↾n : T↾n) / (n log2 k)` on a
//! schedule of prefix lengths, and tail-window estimates of its liminf and
//! limsup.
//!
//! A limit has no finite witness. `mdim_hat` and `Mdim_hat` are the min and
//! max density over the last `w·N` positions, and every estimate carries
//! `(N, w)` and the proxy that produced it.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infoproxy::{ComplexityProxy, ProxyError};
use crate::seq::{SeqError, SequenceGen, Str};

pub const MIN_HORIZON: usize = 16;
pub const MIN_SAMPLES: usize = 16;
pub const MIN_TAIL_SAMPLES: usize = 4;
pub const DEFAULT_WINDOW: f64 = 0.25;
/// Tail oscillation width at or below which a profile counts as stable.
pub const STABLE_WIDTH: f64 = 0.1;
/// Start of geometric schedules (clamped to the horizon).
pub const GEOMETRIC_START: usize = 64;

#[derive(Debug, Error)]
pub enum MdimError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Proxy(#[from] ProxyError),
    #[error("horizon {0} is below the minimum of 16")]
    HorizonTooSmall(usize),
    #[error("bad schedule `{0}`")]
    BadSchedule(String),
    #[error("schedule gives {got} sample points; at least 16 are needed")]
    TooFewPoints { got: usize },
    #[error("window fraction {0} is outside (0, 0.5]")]
    BadWindow(f64),
    #[error("tail window holds {got} samples; at least {need} are needed")]
    WindowTooSmall { got: usize, need: usize },
    #[error("profile has {got} samples; at least 16 are needed")]
    ProfileTooShort { got: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("profile CSV: {0}")]
    BadCsv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which prefix lengths a profile samples. Text forms: `linear`,
/// `linear:<step>`, `geometric:<ratio>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Schedule {
    /// Multiples of `step` up to `N`; `None` means `N / 32`.
    Linear { step: Option<usize> },
    /// `ceil(64 * ratio^j)` up to `N`.
    Geometric { ratio: f64 },
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Linear { step: None }
    }
}

impl Schedule {
    /// Strictly increasing sample points in `[1, horizon]`, always ending at
    /// `horizon`.
    pub fn points(&self, horizon: usize) -> Result<Vec<usize>, MdimError> {
        if horizon < MIN_HORIZON {
            return Err(MdimError::HorizonTooSmall(horizon));
        }
        let mut pts = match *self {
            Schedule::Linear { step } => {
                let step = step.unwrap_or(horizon / 32).max(1);
                (1..=horizon / step).map(|j| j * step).collect::<Vec<_>>()
            }
            Schedule::Geometric { ratio } => {
                let mut pts = Vec::new();
                let mut x = GEOMETRIC_START.min(horizon) as f64;
                while x.ceil() <= horizon as f64 {
                    pts.push(x.ceil() as usize);
                    x *= ratio;
                }
                pts
            }
        };
        if pts.last() != Some(&horizon) {
            pts.push(horizon);
        }
        pts.dedup();
        if pts.len() < MIN_SAMPLES {
            return Err(MdimError::TooFewPoints { got: pts.len() });
        }
        Ok(pts)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Linear { step: None } => f.write_str("linear"),
            Schedule::Linear { step: Some(s) } => write!(f, "linear:{s}"),
            Schedule::Geometric { ratio } => write!(f, "geometric:{ratio}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = MdimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MdimError::BadSchedule(s.to_string());
        match s.split_once(':') {
            None if s == "linear" => Ok(Schedule::Linear { step: None }),
            Some(("linear", v)) => match v.parse::<usize>() {
                Ok(step) if step > 0 => Ok(Schedule::Linear { step: Some(step) }),
                _ => Err(bad()),
            },
            Some(("geometric", v)) => match v.parse::<f64>() {
                Ok(ratio) if ratio > 1.0 && ratio.is_finite() => Ok(Schedule::Geometric { ratio }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Schedule {
    type Error = MdimError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Schedule> for String {
    fn from(s: Schedule) -> String {
        s.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub n: usize,
    /// Raw symmetric-form estimate; may be negative.
    pub info_bits: f64,
    /// `max(info_bits, 0) / (n log2 k)`; values above 1 are kept.
    pub density: f64,
}

impl Sample {
    pub fn clamped(&self) -> bool {
        self.info_bits < 0.0
    }

    pub fn overshoot(&self) -> bool {
        self.density > 1.0
    }

    pub fn flags(&self) -> String {
        let mut f = Vec::new();
        if self.clamped() {
            f.push("clamped");
        }
        if self.overshoot() {
            f.push("overshoot");
        }
        f.join("|")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionProfile {
    pub samples: Vec<Sample>,
    pub horizon: usize,
    /// Text form of the [`Schedule`]; `csv` for profiles read back from CSV.
    pub schedule: String,
    pub proxy: String,
    pub alphabet: usize,
}

impl DimensionProfile {
    /// Reads a profile written by [`DimensionProfile::write_csv`]. The horizon
    /// is the last `n`; proxy and alphabet are not recorded in the CSV.
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self, MdimError> {
        let mut samples: Vec<Sample> = Vec::new();
        for rec in csv::Reader::from_reader(r).records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let bad = || MdimError::BadCsv(format!("bad row {:?}", rec));
            let s = Sample {
                n: field(0).parse().map_err(|_| bad())?,
                info_bits: field(1).parse().map_err(|_| bad())?,
                density: field(2).parse().map_err(|_| bad())?,
            };
            if samples.last().is_some_and(|p| p.n >= s.n) {
                return Err(MdimError::BadCsv("n values must be strictly increasing".into()));
            }
            samples.push(s);
        }
        let horizon = samples
            .last()
            .map(|s| s.n)
            .ok_or_else(|| MdimError::BadCsv("no samples".into()))?;
        Ok(DimensionProfile {
            samples,
            horizon,
            schedule: "csv".into(),
            proxy: "unknown".into(),
            alphabet: 0,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), MdimError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "info_bits", "density", "flags"])?;
        for s in &self.samples {
            out.write_record([
                s.n.to_string(),
                s.info_bits.to_string(),
                s.density.to_string(),
                s.flags(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Every sample with `n >= ceil((1 - w) N)`.
    pub fn tail(&self, w: f64) -> &[Sample] {
        let lo = ((1.0 - w) * self.horizon as f64).ceil() as usize;
        let start = self.samples.partition_point(|s| s.n < lo);
        &self.samples[start..]
    }
}

/// Profile of the prefixes `x↾n`, `y↾n` at each scheduled `n`.
pub fn profile_strs(
    x: &Str,
    y: &Str,
    horizon: usize,
    schedule: &Schedule,
    proxy: &dyn ComplexityProxy,
) -> Result<DimensionProfile, MdimError> {
    x.alphabet().check_same(y.alphabet())?;
    let points = schedule.points(horizon)?;
    let (x, y) = (x.truncated(horizon), y.truncated(horizon));
    if x.len() < horizon || y.len() < horizon {
        return Err(SeqError::Diverged(x.len().min(y.len())).into());
    }
    let log_k = x.alphabet().log2_size();
    let mut terms = proxy.prefix_terms(&x, &y, &points);
    terms.sort_by_key(|t| t.n);
    let samples = terms
        .iter()
        .map(|t| {
            let info_bits = t.info();
            Sample {
                n: t.n,
                info_bits,
                density: info_bits.max(0.0) / (t.n as f64 * log_k),
            }
        })
        .collect();
    Ok(DimensionProfile {
        samples,
        horizon,
        schedule: schedule.to_string(),
        proxy: proxy.name().to_string(),
        alphabet: x.alphabet().size(),
    })
}

pub fn profile(
    s: &SequenceGen,
    t: &SequenceGen,
    horizon: usize,
    schedule: &Schedule,
    proxy: &dyn ComplexityProxy,
) -> Result<DimensionProfile, MdimError> {
    s.alphabet().check_same(t.alphabet())?;
    if horizon < MIN_HORIZON {
        return Err(MdimError::HorizonTooSmall(horizon));
    }
    let x = s.try_prefix(horizon)?;
    let y = t.try_prefix(horizon)?;
    profile_strs(&x, &y, horizon, schedule, proxy)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mdim_hat: f64,
    #[serde(rename = "Mdim_hat")]
    pub mdim_upper_hat: f64,
    pub horizon: usize,
    pub window: f64,
    pub tail_samples: usize,
}

fn check_window(w: f64) -> Result<(), MdimError> {
    if w > 0.0 && w <= 0.5 {
        Ok(())
    } else {
        Err(MdimError::BadWindow(w))
    }
}

/// Min and max density over the tail window.
pub fn estimate(profile: &DimensionProfile, w: f64) -> Result<Estimate, MdimError> {
    check_window(w)?;
    let tail = profile.tail(w);
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(MdimError::WindowTooSmall {
            got: tail.len(),
            need: MIN_TAIL_SAMPLES,
        });
    }
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.density), hi.max(s.density))
    });
    Ok(Estimate {
        mdim_hat: lo,
        mdim_upper_hat: hi,
        horizon: profile.horizon,
        window: w,
        tail_samples: tail.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Least-squares slope of density against `n / N` over the tail.
    pub tail_slope: f64,
    pub tail_width: f64,
    pub stable: bool,
    pub window: f64,
}

pub fn convergence_report(profile: &DimensionProfile, w: f64) -> Result<ConvergenceReport, MdimError> {
    if profile.samples.len() < MIN_SAMPLES {
        return Err(MdimError::ProfileTooShort {
            got: profile.samples.len(),
        });
    }
    let e = estimate(profile, w)?;
    let tail = profile.tail(w);
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|s| (s.n as f64 / profile.horizon as f64, s.density))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let tail_width = e.mdim_upper_hat - e.mdim_hat;
    Ok(ConvergenceReport {
        tail_slope: if sxx > 0.0 { sxy / sxx } else { 0.0 },
        tail_width,
        stable: tail_width <= STABLE_WIDTH,
        window: w,
    })
}

/// A gnuplot script plotting density against `n` for each `(title, csv path)`.
pub fn gnuplot_script(series: &[(String, String)]) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'n'\nset ylabel 'density'\nset yrange [0:*]\n",
    );
    let plots: Vec<String> = series
        .iter()
        .map(|(title, path)| {
            format!("'{}' using 1:3 with linespoints title '{}'", path.replace('\'', "''"), title.replace('\'', "''"))
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infoproxy::{ContextProxy, Lz78Proxy};
    use crate::seq::{coupled_gen, Alphabet, JointDistribution};

    fn flat(densities: &[f64], horizon: usize) -> DimensionProfile {
        let step = horizon / densities.len();
        DimensionProfile {
            samples: densities
                .iter()
                .enumerate()
                .map(|(i, &d)| Sample {
                    n: (i + 1) * step,
                    info_bits: d * ((i + 1) * step) as f64,
                    density: d,
                })
                .collect(),
            horizon,
            schedule: format!("linear:{step}"),
            proxy: "synthetic".into(),
            alphabet: 2,
        }
    }

    fn h2(q: f64) -> f64 {
        -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
    }

    #[test]
    fn schedule_points() {
        let p = Schedule::default().points(1024).unwrap();
        assert_eq!(p.len(), 32);
        assert_eq!((p[0], *p.last().unwrap()), (32, 1024));
        let g = Schedule::Geometric { ratio: 2f64.sqrt() }.points(1 << 16).unwrap();
        assert_eq!((g[0], *g.last().unwrap()), (64, 1 << 16));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(
            Schedule::Geometric { ratio: 2.0 }.points(1024),
            Err(MdimError::TooFewPoints { got: 5 })
        ));
        assert!(matches!(
            Schedule::default().points(8),
            Err(MdimError::HorizonTooSmall(8))
        ));
        let odd = Schedule::Linear { step: Some(7) }.points(200).unwrap();
        assert_eq!(*odd.last().unwrap(), 200);
    }

    #[test]
    fn schedule_text_forms() {
        for s in ["linear", "linear:64", "geometric:1.5"] {
            assert_eq!(s.parse::<Schedule>().unwrap().to_string(), s);
        }
        for s in ["linear:0", "geometric:1", "geometric:x", "log:2"] {
            assert!(s.parse::<Schedule>().is_err(), "{s}");
        }
    }

    #[test]
    fn estimate_examples() {
        let e = estimate(&flat(&[0.3; 32], 1024), 0.25).unwrap();
        assert_eq!((e.mdim_hat, e.mdim_upper_hat), (0.3, 0.3));
        let alt: Vec<f64> = (0..32).map(|i| if i % 2 == 0 { 0.2 } else { 0.4 }).collect();
        let e = estimate(&flat(&alt, 1024), 0.25).unwrap();
        assert_eq!((e.mdim_hat, e.mdim_upper_hat), (0.2, 0.4));
        assert_eq!(e.tail_samples, 9);
        assert!(matches!(estimate(&flat(&alt, 1024), 0.0), Err(MdimError::BadWindow(_))));
        assert!(matches!(estimate(&flat(&alt, 1024), 0.6), Err(MdimError::BadWindow(_))));
        assert!(matches!(
            estimate(&flat(&alt, 1024), 0.05),
            Err(MdimError::WindowTooSmall { got: 2, .. })
        ));
    }

    #[test]
    fn convergence_thresholds() {
        let wide: Vec<f64> = (0..32).map(|i| if i % 2 == 0 { 0.1 } else { 0.4 }).collect();
        let r = convergence_report(&flat(&wide, 1024), 0.25).unwrap();
        assert!(!r.stable);
        assert!((r.tail_width - 0.3).abs() < 1e-12);
        let r = convergence_report(&flat(&[0.5; 32], 1024), 0.25).unwrap();
        assert!(r.stable);
        assert_eq!(r.tail_slope, 0.0);
        assert!(matches!(
            convergence_report(&flat(&[0.5; 8], 1024), 0.25),
            Err(MdimError::ProfileTooShort { got: 8 })
        ));
    }

    #[test]
    fn zeros_have_no_mutual_dimension() {
        let z = SequenceGen::zeros(Alphabet::BINARY);
        for proxy in [&ContextProxy as &dyn ComplexityProxy, &Lz78Proxy::default()] {
            let p = profile(&z, &z, 1 << 12, &Schedule::default(), proxy).unwrap();
            assert!(p.samples.iter().all(|s| s.density <= 0.05), "{}", proxy.name());
            let r = convergence_report(&p, DEFAULT_WINDOW).unwrap();
            assert!(r.stable && r.tail_slope.abs() < 0.05);
        }
    }

    #[test]
    fn bsc_calibration_and_schedule_robustness() {
        let (x, y) = coupled_gen(&JointDistribution::binary_symmetric(0.1).unwrap(), 11).unwrap();
        let n = 1 << 14;
        let lin = profile(&x, &y, n, &Schedule::default(), &ContextProxy).unwrap();
        let geo = profile(&x, &y, n, &Schedule::Geometric { ratio: 1.05 }, &ContextProxy).unwrap();
        let (a, b) = (estimate(&lin, 0.25).unwrap(), estimate(&geo, 0.25).unwrap());
        assert!((a.mdim_hat - (1.0 - h2(0.1))).abs() < 0.15, "{a:?}");
        assert!((a.mdim_hat - b.mdim_hat).abs() <= 0.05, "{a:?} {b:?}");
        assert!((a.mdim_upper_hat - b.mdim_upper_hat).abs() <= 0.05, "{a:?} {b:?}");
    }

    #[test]
    fn estimates_are_symmetric() {
        let (x, y) = coupled_gen(&JointDistribution::binary_symmetric(0.25).unwrap(), 2).unwrap();
        for proxy in [&ContextProxy as &dyn ComplexityProxy, &Lz78Proxy::default()] {
            let s = Schedule::default();
            let a = profile(&x, &y, 4096, &s, proxy).unwrap();
            let b = profile(&y, &x, 4096, &s, proxy).unwrap();
            assert_eq!(a, b);
            assert_eq!(estimate(&a, 0.25).unwrap(), estimate(&b, 0.25).unwrap());
        }
    }

    #[test]
    fn negative_information_is_clamped_and_flagged() {
        let x = SequenceGen::uniform(Alphabet::BINARY, 3);
        let p = profile(&x, &x, 1024, &Schedule::default(), &Lz78Proxy::default()).unwrap();
        let s = p.samples.iter().find(|s| s.clamped()).expect("lz78 self-information goes negative");
        assert_eq!(s.density, 0.0);
        assert!(s.info_bits < 0.0);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,info_bits,density,flags\n"));
        assert!(text.contains(",clamped"));
        let back = DimensionProfile::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.samples, p.samples);
        assert_eq!(estimate(&back, 0.25).unwrap(), estimate(&p, 0.25).unwrap());
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let a = SequenceGen::zeros(Alphabet::BINARY);
        let b = SequenceGen::zeros(Alphabet::new(3).unwrap());
        assert!(matches!(
            profile(&a, &b, 64, &Schedule::default(), &ContextProxy),
            Err(MdimError::Seq(_))
        ));
    }

    #[test]
    fn gnuplot_references_csvs() {
        let s = gnuplot_script(&[("X:Y".into(), "xy.csv".into()), ("Z:Y".into(), "zy.csv".into())]);
        assert!(s.contains("'xy.csv' using 1:3"));
        assert!(s.contains("'zy.csv' using 1:3"));
    }
}

use std::path::Path;
use std::time::Instant;

use contrarian_core::{
    attractor_dimension, find_transition_q, full_spectrum, full_spectrum_extended, mixed_spectrum,
    ConvolutionSet, GroupParams, MixtureSpec, OutputSet,
};
use serde::Serialize;
use serde_json::json;

use crate::commands::finish;
use crate::{CliError, RunConfig};

pub const EXAMPLES: [&str; 5] = ["ex1", "ex2", "ex3", "mix-low", "mix-high"];
pub const DEFAULT_N: u32 = 29;
/// Used where the example leaves `p` open.
pub const DEFAULT_P: f64 = 0.3;
/// The collapse example needs both pure systems at full dimension, which
/// for a basis of `Z_n^2` requires `p > 1/3`.
pub const MIX_LOW_P: f64 = 0.5;
pub const MIX_HIGH_P: f64 = 0.9;
pub const MIX_HIGH_Q: f64 = 0.0306;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, expected: impl ToString, observed: impl ToString, pass: bool) -> Self {
        Check {
            name: name.to_string(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            pass,
        }
    }

    pub fn line(&self, example: &str) -> String {
        format!(
            "{} {example}: {} (expected {}, observed {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.expected,
            self.observed
        )
    }
}

fn sorted_coords(g: &GroupParams, idx: &[usize]) -> Vec<Vec<i64>> {
    let mut w: Vec<Vec<i64>> = idx.iter().map(|&v| g.signed_coords(&g.point_at(v))).collect();
    w.sort();
    w
}

fn parse(g: &GroupParams, text: &str) -> Result<ConvolutionSet, CliError> {
    Ok(ConvolutionSet::parse(g, text)?)
}

/// Runs the canned configuration of `example` and evaluates its claims.
/// Spectrum tables for the systems involved go to `outputs`.
pub fn run_example(
    example: &str,
    n: u32,
    p: f64,
    outputs: &mut OutputSet,
) -> Result<Vec<Check>, CliError> {
    let g = GroupParams::new(n, 2)?;
    let mut checks = Vec::new();
    match example {
        "ex1" => {
            let c = parse(&g, "(1,0);(0,1);(-1,0);(0,-1)")?;
            let r = full_spectrum(&c, p, &g)?;
            outputs.write("spectrum.csv", |buf| r.write_csv(buf))?;
            let mut want: Vec<Vec<i64>> = c.elements().iter().map(|v| g.signed_coords(v)).collect();
            want.sort();
            let w = sorted_coords(&g, &r.w);
            checks.push(Check::new("W = C", format!("{want:?}"), format!("{w:?}"), w == want));
            checks.push(Check::new(
                "vartheta empty",
                "[]",
                format!("{:?}", r.vartheta),
                r.vartheta.is_empty(),
            ));
        }
        "ex2" => {
            let c = parse(&g, "(1,0);(0,1)")?;
            let r = full_spectrum_extended(&c, p, &g)?;
            outputs.write("spectrum.csv", |buf| r.write_csv(buf))?;
            let duals: Vec<f64> = [vec![1, 0], vec![0, 1]]
                .iter()
                .map(|v| Ok(r.pairs[g.index_of(&g.point(v)?)].theta))
                .collect::<Result<_, CliError>>()?;
            let half = duals.iter().all(|&th| th == 0.5);
            checks.push(Check::new(
                "theta of the basis duals",
                "0.5",
                format!("{duals:?}"),
                half,
            ));
            let alpha = r.rotation_numbers.first().copied();
            let want = 1.0 / (2.0 * n as f64);
            checks.push(Check::new(
                "smallest rotation number = 1/(2n)",
                want,
                format!("{alpha:?}"),
                alpha.is_some_and(|a| (a - want).abs() <= 1e-12),
            ));
        }
        "ex3" => {
            let c = parse(&g, "(1,0);(0,1);(2,3)")?;
            let r = full_spectrum(&c, p, &g)?;
            outputs.write("spectrum.csv", |buf| r.write_csv(buf))?;
            let want = vec![vec![-1, 0], vec![-1, 1], vec![1, -1], vec![1, 0]];
            let w = sorted_coords(&g, &r.w);
            checks.push(Check::new("W", format!("{want:?}"), format!("{w:?}"), w == want));
            checks.push(Check::new(
                "|vartheta| = 2",
                2,
                r.vartheta.len(),
                r.vartheta.len() == 2,
            ));
        }
        "mix-low" | "mix-high" => {
            let low = example == "mix-low";
            // The growth example's q weights the basis set: the transition
            // away from the doubled set's W sits at q = 0.0308, while q as the
            // weight of the doubled set only moves W at 0.969.
            let (c1, c2) = if low {
                (parse(&g, "(1,0);(0,1)")?, parse(&g, "(1,0);(0,2)")?)
            } else {
                (parse(&g, "(2,0);(0,2)")?, parse(&g, "(1,0);(0,1)")?)
            };
            let r1 = full_spectrum(&c1, p, &g)?;
            let r2 = full_spectrum(&c2, p, &g)?;
            outputs.write("spectrum_c1.csv", |buf| r1.write_csv(buf))?;
            outputs.write("spectrum_c2.csv", |buf| r2.write_csv(buf))?;
            let dims = [attractor_dimension(&r1), attractor_dimension(&r2)];
            checks.push(Check::new(
                "pure dimensions",
                "[2, 2]",
                format!("{dims:?}"),
                dims == [2, 2],
            ));
            if low {
                let spec = MixtureSpec::uniform(g, vec![c1, c2], p, 0)?;
                let ms = mixed_spectrum(&spec)?;
                outputs.write("mixed_spectrum.csv", |buf| ms.write_csv(buf))?;
                let dim = ms.attractor_dimension();
                checks.push(Check::new("mixture dimension", 1, dim, dim == 1));
            } else {
                let t = find_transition_q(&c1, &c2, p, &g, 0.0, 1.0)?;
                let spec = MixtureSpec::two_set(g, c1, c2, t.q, p, 0)?;
                let ms = mixed_spectrum(&spec)?;
                outputs.write("mixed_spectrum.csv", |buf| ms.write_csv(buf))?;
                checks.push(Check::new(
                    "q*",
                    format!("{MIX_HIGH_Q} +- 1e-3"),
                    format!("{:.6}", t.q),
                    (t.q - MIX_HIGH_Q).abs() <= 1e-3,
                ));
                checks.push(Check::new(
                    "|W(q*)| > |W(0)|",
                    format!("> {}", t.w_before.len()),
                    t.w_at.len(),
                    t.w_at.len() > t.w_before.len(),
                ));
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown example {other:?}; expected one of {}",
                EXAMPLES.join(", ")
            )))
        }
    }
    Ok(checks)
}

/// Parameter defaults of each example: `p` is the value the example fixes,
/// or [`DEFAULT_P`] where it leaves it open.
pub fn example_p(example: &str) -> f64 {
    match example {
        "ex2" => 0.0,
        "ex3" => 0.25,
        "mix-low" => MIX_LOW_P,
        "mix-high" => MIX_HIGH_P,
        _ => DEFAULT_P,
    }
}

pub fn reproduce(cfg: RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    let started = Instant::now();
    let example = RunConfig::require(&cfg.example, "example")?;
    if !EXAMPLES.contains(&example.as_str()) {
        return Err(CliError::Config(format!(
            "unknown example {example:?}; expected one of {}",
            EXAMPLES.join(", ")
        )));
    }
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let p = cfg.p.unwrap_or_else(|| example_p(&example));
    let resolved = RunConfig {
        example: Some(example.clone()),
        n: Some(n),
        p: Some(p),
        ..RunConfig::default()
    };
    let mut outputs = OutputSet::create(out)?;
    let checks = run_example(&example, n, p, &mut outputs)?;
    let pass = checks.iter().all(|c| c.pass);
    let summary = json!({"example": example, "pass": pass, "checks": checks});
    outputs.write_json("checks.json", &summary)?;
    finish("reproduce", &resolved, &summary, &outputs, started)?;
    let lines: Vec<String> = checks.iter().map(|c| c.line(&example)).collect();
    if pass {
        Ok(lines)
    } else {
        Err(CliError::Assertion(lines.join("\n")))
    }
}

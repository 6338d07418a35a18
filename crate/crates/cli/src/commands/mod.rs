mod axisym;
mod cube;
mod field;

use std::path::{Path, PathBuf};

use eigenstrain::io::svg::{LinePlot, Series};
use eigenstrain::ElasticModel;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{resolve_path, MaterialConfig, RunConfig};
use crate::output::{InputFile, Output};
use crate::{CliError, Command};

pub struct Ctx {
    pub cfg: RunConfig,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub stamp: bool,
}

impl Ctx {
    /// Reads an input file, resolving relative paths against the config file.
    fn read(&self, p: &Path) -> Result<(PathBuf, Vec<u8>, InputFile), CliError> {
        let path = resolve_path(self.config_path.as_deref(), p);
        let data = eigenstrain::io::read_file(&path).map_err(CliError::Lib)?;
        let info = InputFile::new(p, &data);
        Ok((path, data, info))
    }

    fn output(&self, cmd: Command, inputs: Vec<InputFile>, config: Value) -> Output {
        Output::new(self.out.clone(), self.stamp, cmd.name(), inputs, config)
    }
}

pub fn run(cmd: Command, ctx: &Ctx) -> Result<String, CliError> {
    match cmd {
        Command::AxisymForward => axisym::forward(ctx),
        Command::AxisymFit => axisym::fit(ctx),
        Command::AxisymFitD0 => axisym::fit_d0(ctx),
        Command::CubeFit => cube::fit(ctx),
        Command::Decompose => field::decompose(ctx),
        Command::LrtSim => field::lrt_sim(ctx),
        Command::LinkCheck => field::link_check(ctx),
    }
}

fn value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serialisable")
}

/// Resolved material constants and the section echo for provenance.
fn config_echo<T: Serialize>(material: &MaterialConfig, fallback: &str, m: &ElasticModel, section: &T) -> Value {
    json!({
        "material": {
            "preset": material.preset.as_deref().unwrap_or(fallback),
            "youngs_modulus_gpa": m.youngs_modulus() / 1e9,
            "poisson_ratio": m.poisson_ratio(),
        },
        "parameters": value(section),
    })
}

fn material_json(m: &ElasticModel) -> Value {
    json!({ "youngs_modulus": m.youngs_modulus(), "poisson_ratio": m.poisson_ratio() })
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
}

fn plot(title: &str, x_label: &str, y_label: &str, series: Vec<Series>) -> String {
    LinePlot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series }.to_svg()
}

/// One-line summary per artifact for stdout.
fn summary(out: &Output, lines: &[String]) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    for a in &out.artifacts {
        s.push_str(&format!("wrote {}\n", out.path(a).display()));
    }
    s
}

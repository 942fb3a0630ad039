//! Line-oriented experiment configuration.
//!
//! ```text
//! # top-level keys come before the first section
//! seed = 7
//! replications = 2000
//! horizons = 512 1024 2048
//! normalization = biased
//!
//! [environment]
//! gamma = 5
//! theta = 0
//!
//! [arm]
//! variance = 1
//! [arm]
//! diag = 2
//!
//! [policy]
//! kind = lcb
//! ```
//!
//! `[arm]`, `[policy]` and `[sigma]` may repeat; other sections appear at
//! most once. Lists are whitespace separated and matrix rows are separated
//! by `;`. Unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::environment::{gap_profile, EnvironmentSpec};
use crate::error::{Error, Result};
use crate::numkit::{Matrix, Normalization, PsdMatrix};
use crate::policies::PolicyKind;

#[derive(Clone, Debug, PartialEq)]
pub enum CovarianceSpec {
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

impl CovarianceSpec {
    pub fn to_matrix(&self) -> Result<Matrix> {
        match self {
            CovarianceSpec::Diagonal(d) => Ok(Matrix::diag(d)),
            CovarianceSpec::Full(rows) => Matrix::from_rows(rows),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CovarianceSpec::Diagonal(d) => d.len(),
            CovarianceSpec::Full(rows) => rows.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentBlock {
    pub gamma: f64,
    pub theta: Vec<f64>,
    pub arms: Vec<CovarianceSpec>,
}

impl EnvironmentBlock {
    pub fn build(&self) -> Result<EnvironmentSpec> {
        let covs = self.arms.iter().map(CovarianceSpec::to_matrix).collect::<Result<Vec<_>>>()?;
        EnvironmentSpec::new(self.theta.clone(), covs, self.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicySpec {
    Lcb,
    Uniform,
    Greedy,
    EpsilonGreedy { epsilon: f64 },
    /// Resolved to the environment's best arm.
    Oracle,
}

impl PolicySpec {
    pub fn resolve(&self, env: &EnvironmentSpec) -> PolicyKind {
        match *self {
            PolicySpec::Lcb => PolicyKind::Lcb,
            PolicySpec::Uniform => PolicyKind::Uniform,
            PolicySpec::Greedy => PolicyKind::Greedy,
            PolicySpec::EpsilonGreedy { epsilon } => PolicyKind::EpsilonGreedy { epsilon },
            PolicySpec::Oracle => PolicyKind::Oracle {
                best_arm: gap_profile(env).best_arm,
            },
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            PolicySpec::Lcb => "lcb",
            PolicySpec::Uniform => "uniform",
            PolicySpec::Greedy => "greedy",
            PolicySpec::EpsilonGreedy { .. } => "epsilon-greedy",
            PolicySpec::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationParams {
    pub trials: usize,
    pub m: Vec<usize>,
    pub epsilon: Vec<f64>,
    /// Adds `ε = multiplier·‖Σ‖_F/‖Σ‖_2` per matrix when set.
    pub ratio_multiplier: Option<f64>,
    pub sigmas: Vec<CovarianceSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundParams {
    pub sigma1: f64,
    pub gamma: f64,
    pub arms: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replications: usize,
    pub horizons: Vec<usize>,
    pub normalization: Normalization,
    pub output: Option<String>,
    pub environment: Option<EnvironmentBlock>,
    pub policies: Vec<PolicySpec>,
    pub concentration: Option<ConcentrationParams>,
    pub lowerbound: Option<LowerBoundParams>,
}

impl ExperimentConfig {
    pub fn environment(&self) -> Result<EnvironmentSpec> {
        self.environment
            .as_ref()
            .ok_or_else(|| Error::Validation("environment block is required".into()))?
            .build()
    }

    pub fn policy_kinds(&self, env: &EnvironmentSpec) -> Result<Vec<PolicyKind>> {
        if self.policies.is_empty() {
            return Err(Error::Validation("at least one [policy] block is required".into()));
        }
        Ok(self.policies.iter().map(|p| p.resolve(env)).collect())
    }

    /// Canonical text form; `parse_config(&c.to_text())` returns `c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "replications = {}", self.replications);
        let _ = writeln!(s, "horizons = {}", join(&self.horizons));
        let _ = writeln!(s, "normalization = {}", self.normalization.as_str());
        if let Some(out) = &self.output {
            let _ = writeln!(s, "output = {out}");
        }
        if let Some(env) = &self.environment {
            let _ = writeln!(s, "\n[environment]\ngamma = {}\ntheta = {}", env.gamma, join(&env.theta));
            for arm in &env.arms {
                let _ = writeln!(s, "\n[arm]\n{}", covariance_line(arm));
            }
        }
        for p in &self.policies {
            let _ = writeln!(s, "\n[policy]\nkind = {}", p.kind_name());
            if let PolicySpec::EpsilonGreedy { epsilon } = p {
                let _ = writeln!(s, "epsilon = {epsilon}");
            }
        }
        if let Some(c) = &self.concentration {
            let _ = writeln!(
                s,
                "\n[concentration]\ntrials = {}\nm = {}\nepsilon = {}",
                c.trials,
                join(&c.m),
                join(&c.epsilon)
            );
            if let Some(r) = c.ratio_multiplier {
                let _ = writeln!(s, "ratio_multiplier = {r}");
            }
            for sigma in &c.sigmas {
                let _ = writeln!(s, "\n[sigma]\n{}", covariance_line(sigma));
            }
        }
        if let Some(lb) = &self.lowerbound {
            let _ = writeln!(
                s,
                "\n[lowerbound]\nsigma1 = {}\ngamma = {}\narms = {}",
                lb.sigma1,
                lb.gamma,
                join(&lb.arms)
            );
        }
        s
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn covariance_line(c: &CovarianceSpec) -> String {
    match c {
        CovarianceSpec::Diagonal(d) => format!("diag = {}", join(d)),
        CovarianceSpec::Full(rows) => format!(
            "matrix = {}",
            rows.iter().map(|r| join(r)).collect::<Vec<_>>().join("; ")
        ),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum SectionKind {
    Top,
    Environment,
    Arm,
    Policy,
    Concentration,
    Sigma,
    LowerBound,
}

impl SectionKind {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "environment" => SectionKind::Environment,
            "arm" => SectionKind::Arm,
            "policy" => SectionKind::Policy,
            "concentration" => SectionKind::Concentration,
            "sigma" => SectionKind::Sigma,
            "lowerbound" => SectionKind::LowerBound,
            _ => return None,
        })
    }

    fn repeatable(self) -> bool {
        matches!(self, SectionKind::Arm | SectionKind::Policy | SectionKind::Sigma)
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            SectionKind::Top => &["seed", "replications", "horizons", "normalization", "output"],
            SectionKind::Environment => &["gamma", "theta", "k"],
            SectionKind::Arm | SectionKind::Sigma => &["variance", "diag", "matrix"],
            SectionKind::Policy => &["kind", "epsilon"],
            SectionKind::Concentration => &["trials", "m", "epsilon", "ratio_multiplier"],
            SectionKind::LowerBound => &["sigma1", "gamma", "arms"],
        }
    }
}

#[derive(Debug)]
struct Section {
    kind: SectionKind,
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| Error::Parse {
            line: self.line,
            message: format!("missing key `{key}`"),
        })
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn scalar<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| parse_error(line, format!("`{key}`: cannot parse `{value}`")))
}

fn list<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value.split_whitespace().map(|v| scalar(line, key, v)).collect()
}

fn covariance(section: &mut Section) -> Result<CovarianceSpec> {
    let v = section.take("variance");
    let d = section.take("diag");
    let m = section.take("matrix");
    match (v, d, m) {
        (Some((l, v)), None, None) => Ok(CovarianceSpec::Diagonal(vec![scalar(l, "variance", &v)?])),
        (None, Some((l, d)), None) => Ok(CovarianceSpec::Diagonal(list(l, "diag", &d)?)),
        (None, None, Some((l, m))) => {
            let rows = m
                .split(';')
                .map(|r| list(l, "matrix", r))
                .collect::<Result<Vec<Vec<f64>>>>()?;
            Ok(CovarianceSpec::Full(rows))
        }
        (None, None, None) => Err(parse_error(section.line, "expected one of `variance`, `diag`, `matrix`")),
        _ => Err(parse_error(section.line, "give exactly one of `variance`, `diag`, `matrix`")),
    }
}

fn validation(field: &str) -> Error {
    Error::Validation(field.to_string())
}

fn tokenize(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section {
        kind: SectionKind::Top,
        line: 0,
        entries: BTreeMap::new(),
    }];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(line, "unterminated section header"))?
                .trim();
            let kind = SectionKind::parse(name).ok_or_else(|| parse_error(line, format!("unknown section `{name}`")))?;
            if !kind.repeatable() && sections.iter().any(|s| s.kind == kind) {
                return Err(parse_error(line, format!("section `{name}` appears twice")));
            }
            sections.push(Section {
                kind,
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_error(line, "expected `key = value`"))?;
        let key = key.trim();
        let section = sections.last_mut().expect("top section always present");
        if !section.kind.keys().contains(&key) {
            return Err(parse_error(line, format!("unknown key `{key}`")));
        }
        if section.entries.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(parse_error(line, format!("duplicate key `{key}`")));
        }
    }
    Ok(sections)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut sections = tokenize(text)?;
    let mut top = sections.remove(0);

    let seed = match top.take("seed") {
        Some((l, v)) => scalar(l, "seed", &v)?,
        None => 0,
    };
    let (l, v) = top.require("replications")?;
    let replications: usize = scalar(l, "replications", &v)?;
    let (l, v) = top.require("horizons")?;
    let horizons: Vec<usize> = list(l, "horizons", &v)?;
    let normalization = match top.take("normalization") {
        Some((l, v)) => v.parse().map_err(|e: String| parse_error(l, e))?,
        None => Normalization::Biased,
    };
    let output = top.take("output").map(|(_, v)| v);

    let mut environment: Option<(EnvironmentBlock, Option<(usize, usize)>)> = None;
    let mut arms = Vec::new();
    let mut policies = Vec::new();
    let mut concentration: Option<ConcentrationParams> = None;
    let mut sigmas = Vec::new();
    let mut lowerbound = None;

    for mut s in sections {
        match s.kind {
            SectionKind::Top => unreachable!(),
            SectionKind::Environment => {
                let (l, v) = s.require("gamma")?;
                let gamma = scalar(l, "gamma", &v)?;
                let (l, v) = s.require("theta")?;
                let theta = list(l, "theta", &v)?;
                let k = match s.take("k") {
                    Some((l, v)) => Some((l, scalar(l, "k", &v)?)),
                    None => None,
                };
                environment = Some((
                    EnvironmentBlock {
                        gamma,
                        theta,
                        arms: Vec::new(),
                    },
                    k,
                ));
            }
            SectionKind::Arm => arms.push(covariance(&mut s)?),
            SectionKind::Sigma => sigmas.push(covariance(&mut s)?),
            SectionKind::Policy => {
                let (l, kind) = s.require("kind")?;
                let eps = s.take("epsilon");
                let policy = match kind.as_str() {
                    "lcb" => PolicySpec::Lcb,
                    "uniform" => PolicySpec::Uniform,
                    "greedy" => PolicySpec::Greedy,
                    "oracle" => PolicySpec::Oracle,
                    "epsilon-greedy" => {
                        let (el, ev) = eps.clone().ok_or_else(|| parse_error(l, "epsilon-greedy needs `epsilon`"))?;
                        PolicySpec::EpsilonGreedy {
                            epsilon: scalar(el, "epsilon", &ev)?,
                        }
                    }
                    other => return Err(parse_error(l, format!("unknown policy kind `{other}`"))),
                };
                if eps.is_some() && !matches!(policy, PolicySpec::EpsilonGreedy { .. }) {
                    return Err(parse_error(l, "`epsilon` only applies to epsilon-greedy"));
                }
                policies.push(policy);
            }
            SectionKind::Concentration => {
                let (l, v) = s.require("trials")?;
                let trials = scalar(l, "trials", &v)?;
                let (l, v) = s.require("m")?;
                let m = list(l, "m", &v)?;
                let (l, v) = s.require("epsilon")?;
                let epsilon = list(l, "epsilon", &v)?;
                let ratio_multiplier = match s.take("ratio_multiplier") {
                    Some((l, v)) => Some(scalar(l, "ratio_multiplier", &v)?),
                    None => None,
                };
                concentration = Some(ConcentrationParams {
                    trials,
                    m,
                    epsilon,
                    ratio_multiplier,
                    sigmas: Vec::new(),
                });
            }
            SectionKind::LowerBound => {
                let (l, v) = s.require("sigma1")?;
                let sigma1 = scalar(l, "sigma1", &v)?;
                let (l, v) = s.require("gamma")?;
                let gamma = scalar(l, "gamma", &v)?;
                let (l, v) = s.require("arms")?;
                let arms = list(l, "arms", &v)?;
                lowerbound = Some(LowerBoundParams { sigma1, gamma, arms });
            }
        }
    }

    // validation
    if replications < 2 {
        return Err(validation("replications must be at least 2"));
    }
    if horizons.is_empty() || horizons[0] < 1 {
        return Err(validation("horizons must be positive"));
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(validation("horizon grid strictly increasing"));
    }

    let environment = match environment {
        Some((mut block, k)) => {
            if !(block.gamma > 0.0) {
                return Err(validation("gamma"));
            }
            if block.theta.is_empty() {
                return Err(validation("theta"));
            }
            if arms.is_empty() {
                return Err(validation("environment needs at least one [arm]"));
            }
            if let Some((_, k)) = k {
                if k != arms.len() {
                    return Err(validation("k"));
                }
            }
            block.arms = arms;
            block.build().map_err(|e| Error::Validation(format!("arm: {e}")))?;
            Some(block)
        }
        None if !arms.is_empty() => return Err(validation("[arm] blocks need an [environment] section")),
        None => None,
    };
    for p in &policies {
        if let PolicySpec::EpsilonGreedy { epsilon } = p {
            if !(0.0..=1.0).contains(epsilon) {
                return Err(validation("epsilon"));
            }
        }
    }
    let concentration = match concentration {
        Some(mut c) => {
            if c.trials < 1 {
                return Err(validation("trials"));
            }
            if c.m.is_empty() || c.m.iter().any(|&m| m < 2) {
                return Err(validation("m"));
            }
            if c.epsilon.iter().any(|&e| !(e > 0.0)) {
                return Err(validation("epsilon"));
            }
            if c.ratio_multiplier.is_some_and(|r| !(r > 1.0)) {
                return Err(validation("ratio_multiplier must exceed 1"));
            }
            if sigmas.is_empty() {
                return Err(validation("concentration needs at least one [sigma]"));
            }
            for s in &sigmas {
                PsdMatrix::new(s.to_matrix()?).map_err(|e| Error::Validation(format!("sigma: {e}")))?;
            }
            c.sigmas = sigmas;
            Some(c)
        }
        None if !sigmas.is_empty() => return Err(validation("[sigma] blocks need a [concentration] section")),
        None => None,
    };
    if let Some(lb) = &lowerbound {
        if !(lb.sigma1 > 0.0) {
            return Err(validation("sigma1"));
        }
        if !(lb.gamma > 0.0) {
            return Err(validation("gamma"));
        }
        if lb.arms.is_empty() || lb.arms.iter().any(|&k| k < 2) {
            return Err(validation("arms"));
        }
    }

    Ok(ExperimentConfig {
        seed,
        replications,
        horizons,
        normalization,
        output,
        environment,
        policies,
        concentration,
        lowerbound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
replications = 10
horizons = 100 200 400

[environment]
gamma = 5
theta = 0

[arm]
variance = 1
[arm]
variance = 2

[policy]
kind = lcb
";

    #[test]
    fn minimal_config_round_trips() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.horizons, vec![100, 200, 400]);
        assert_eq!(c.policies, vec![PolicySpec::Lcb]);
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn full_config_round_trips() {
        let text = "\
seed = 42
replications = 500
horizons = 1000 10000
normalization = unbiased
output = out/run  # trailing comment

[environment]
gamma = 10
theta = 1 -2.5
k = 3

[arm]
diag = 1 2
[arm]
matrix = 2 0.5; 0.5 1
[arm]
diag = 0.1 0.25

[policy]
kind = epsilon-greedy
epsilon = 0.1
[policy]
kind = oracle

[concentration]
trials = 1000
m = 10 30
epsilon = 0.25 0.5
ratio_multiplier = 1.5

[sigma]
diag = 1 4
[sigma]
matrix = 2 1; 1 2

[lowerbound]
sigma1 = 1
gamma = 2
arms = 2 5
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.normalization, Normalization::Unbiased);
        assert_eq!(c.output.as_deref(), Some("out/run"));
        assert_eq!(c.environment.as_ref().unwrap().arms.len(), 3);
        assert_eq!(c.concentration.as_ref().unwrap().sigmas.len(), 2);
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        let env = c.environment().unwrap();
        let kinds = c.policy_kinds(&env).unwrap();
        assert_eq!(kinds[1], PolicyKind::Oracle { best_arm: 2 });
    }

    #[test]
    fn negative_gamma_is_rejected() {
        let text = MINIMAL.replace("gamma = 5", "gamma = -1");
        assert_eq!(parse_config(&text).unwrap_err(), Error::Validation("gamma".into()));
    }

    #[test]
    fn horizons_must_increase() {
        let text = MINIMAL.replace("horizons = 100 200 400", "horizons = 100 100");
        assert_eq!(
            parse_config(&text).unwrap_err(),
            Error::Validation("horizon grid strictly increasing".into())
        );
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = MINIMAL.replace("theta = 0", "theta = 0\ncolour = blue");
        assert!(matches!(parse_config(&text).unwrap_err(), Error::Parse { line: 7, .. }));
    }

    #[test]
    fn syntax_errors() {
        for (text, line) in [
            ("replications = 2\nhorizons = 5\n[nope]\n", 3),
            ("replications = 2\nhorizons = 5\njunk\n", 3),
            ("replications = two\nhorizons = 5\n", 1),
            ("replications = 2\nreplications = 3\nhorizons = 5\n", 2),
            ("replications = 2\nhorizons = 5\n[lowerbound\n", 3),
            ("replications = 2\nhorizons = 5\n[lowerbound]\nsigma1 = 1\ngamma = 2\narms = 2\n[lowerbound]\n", 7),
        ] {
            match parse_config(text).unwrap_err() {
                Error::Parse { line: l, .. } => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn validation_errors() {
        let cases = [
            MINIMAL.replace("replications = 10", "replications = 1"),
            MINIMAL.replace("theta = 0", "theta = 0\nk = 3"),
            MINIMAL.replace("variance = 2", "variance = 6"),
            MINIMAL.replace("kind = lcb", "kind = epsilon-greedy\nepsilon = 2"),
            MINIMAL.replace("[environment]\ngamma = 5\ntheta = 0\n", ""),
        ];
        for text in &cases {
            assert!(matches!(parse_config(text), Err(Error::Validation(_))), "{text}");
        }
    }

    #[test]
    fn environment_block_is_optional() {
        let c = parse_config("replications = 2\nhorizons = 5\n").unwrap();
        assert!(c.environment.is_none());
        assert!(matches!(c.environment(), Err(Error::Validation(_))));
    }
}

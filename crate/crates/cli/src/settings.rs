//! Run settings merged from a TOML config file, the tolerance-profile
//! environment variable and command-line flags, in increasing precedence.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use jdlg::Tolerances;
use serde::Deserialize;

use crate::failure::{Failure, Outcome};

pub const PROFILE_ENV: &str = "JDLG_TOL_PROFILE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Spectral,
    Idempotent,
    Gram,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceChoice {
    /// Projection onto invariant forms (exact limit of every Følner average).
    MeanErgodic,
    /// Average over a finite closure group.
    Haar,
    /// Cesàro averages along the `--folner` boxes.
    Folner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    AnalyzeSemigroup,
    Decompose,
    Characterize,
    UnitaryStructure,
    Counterexample,
    Closure,
    ListCatalog,
}

impl CommandKind {
    pub fn parse(name: &str) -> Outcome<Self> {
        Ok(match name {
            "analyze-semigroup" => Self::AnalyzeSemigroup,
            "decompose" => Self::Decompose,
            "characterize" => Self::Characterize,
            "unitary-structure" => Self::UnitaryStructure,
            "counterexample" => Self::Counterexample,
            "closure" => Self::Closure,
            "list-catalog" => Self::ListCatalog,
            other => return Err(Failure::malformed(format!("unknown command `{other}` in config"))),
        })
    }
}

/// Per-field tolerance overrides, shared by the `[tolerances]` table and the
/// `--tol-*` flags.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[arg(long = "tol-rank", global = true, value_name = "X")]
    pub rank_tol: Option<f64>,
    #[arg(long = "tol-closure-eps", global = true, value_name = "X")]
    pub closure_eps: Option<f64>,
    #[arg(long = "tol-idempotent", global = true, value_name = "X")]
    pub idempotent_tol: Option<f64>,
    #[arg(long = "tol-convergence", global = true, value_name = "X")]
    pub convergence_tol: Option<f64>,
    #[arg(long = "tol-max-iterations", global = true, value_name = "N")]
    pub max_iterations: Option<usize>,
    #[arg(long = "tol-spectral-boundary", global = true, value_name = "X")]
    pub spectral_boundary: Option<f64>,
    #[arg(long = "tol-norm-cap", global = true, value_name = "X")]
    pub norm_cap: Option<f64>,
    #[arg(long = "tol-max-net-size", global = true, value_name = "N")]
    pub max_net_size: Option<usize>,
}

impl ToleranceOverrides {
    fn apply(&self, t: &mut Tolerances) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { t.$f = v; })* };
        }
        set!(rank_tol, closure_eps, idempotent_tol, convergence_tol, max_iterations, spectral_boundary, norm_cap, max_net_size);
    }
}

/// Options that every subcommand accepts.
#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML experiment file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Input document (representation or Cayley table JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Built-in representation, `name` or `name:params` (see `list-catalog`).
    #[arg(long, global = true, value_name = "NAME")]
    pub catalog: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// `box`, `box:<start>` or `shifted:<start>,<drift>`.
    #[arg(long, global = true, value_name = "SEQ")]
    pub folner: Option<String>,
    /// Følner depth for `characterize`, largest N for `counterexample`.
    #[arg(long, global = true, value_name = "N")]
    pub depth: Option<usize>,
    /// Tolerance profile: default, strict or loose.
    #[arg(long = "tol-profile", global = true, value_name = "NAME")]
    pub profile: Option<String>,
    #[command(flatten)]
    pub tol: ToleranceOverrides,
}

/// Subcommand-specific flags, all optional so that a config file can supply them.
#[derive(Clone, Debug, Default)]
pub struct CommandArgs {
    pub method: Option<MethodChoice>,
    pub reconcile: bool,
    pub vector: Option<String>,
    pub curves: Option<PathBuf>,
    pub source: Option<SourceChoice>,
    pub base: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    command: Option<String>,
    input: Option<PathBuf>,
    catalog: Option<String>,
    output: Option<PathBuf>,
    format: Option<Format>,
    folner: Option<String>,
    depth: Option<usize>,
    profile: Option<String>,
    method: Option<MethodChoice>,
    #[serde(default)]
    reconcile: bool,
    vector: Option<String>,
    curves: Option<PathBuf>,
    source: Option<SourceChoice>,
    base: Option<String>,
    #[serde(default)]
    tolerances: ToleranceOverrides,
}

#[derive(Clone, Debug)]
pub struct Settings {
    pub command: CommandKind,
    pub input: Option<PathBuf>,
    pub catalog: Option<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub folner: Option<String>,
    pub depth: Option<usize>,
    pub profile: String,
    pub tol: Tolerances,
    pub method: MethodChoice,
    pub reconcile: bool,
    pub vector: Option<String>,
    pub curves: Option<PathBuf>,
    pub source: SourceChoice,
    pub base: Option<String>,
}

fn read_config(path: &Path) -> Outcome<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::malformed(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: ConfigFile =
        toml::from_str(&text).map_err(|e| Failure::malformed(format!("config {}: {e}", path.display())))?;
    // paths in the file are relative to the file
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut cfg.input, &mut cfg.output, &mut cfg.curves].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}

impl Settings {
    pub fn resolve(
        command: Option<CommandKind>,
        common: CommonArgs,
        args: CommandArgs,
        env_profile: Option<String>,
    ) -> Outcome<Self> {
        let cfg = match &common.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let command = match (command, &cfg.command) {
            (Some(c), _) => c,
            (None, Some(name)) => CommandKind::parse(name)?,
            (None, None) => return Err(Failure::malformed("no subcommand given")),
        };

        let profile = common
            .profile
            .or(cfg.profile)
            .or(env_profile)
            .unwrap_or_else(|| "default".into());
        let mut tol = Tolerances::profile(&profile)?;
        cfg.tolerances.apply(&mut tol);
        common.tol.apply(&mut tol);
        tol.validate()?;

        // a source named on the command line replaces both config sources
        let (input, catalog) = if common.input.is_some() || common.catalog.is_some() {
            (common.input, common.catalog)
        } else {
            (cfg.input, cfg.catalog)
        };
        if input.is_some() && catalog.is_some() {
            return Err(Failure::malformed("give either --input or --catalog, not both"));
        }
        if common.depth == Some(0) || (common.depth.is_none() && cfg.depth == Some(0)) {
            return Err(Failure::malformed("depth must be positive"));
        }

        Ok(Self {
            command,
            input,
            catalog,
            output: common.output.or(cfg.output),
            format: common.format.or(cfg.format),
            folner: common.folner.or(cfg.folner),
            depth: common.depth.or(cfg.depth),
            profile,
            tol,
            method: args.method.or(cfg.method).unwrap_or(MethodChoice::Idempotent),
            reconcile: args.reconcile || cfg.reconcile,
            vector: args.vector.or(cfg.vector),
            curves: args.curves.or(cfg.curves),
            source: args.source.or(cfg.source).unwrap_or(SourceChoice::MeanErgodic),
            base: args.base.or(cfg.base),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("run.toml");
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn flags_beat_config_beats_env() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(
            dir.path(),
            "command = \"decompose\"\nprofile = \"loose\"\ninput = \"rep.json\"\n[tolerances]\nrank_tol = 1e-7\nnorm_cap = 50.0\n",
        );
        let common = CommonArgs {
            config: Some(path),
            tol: ToleranceOverrides {
                norm_cap: Some(20.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let s = Settings::resolve(None, common, CommandArgs::default(), Some("strict".into())).unwrap();
        assert_eq!(s.command, CommandKind::Decompose);
        assert_eq!(s.profile, "loose");
        assert_eq!(s.tol.rank_tol, 1e-7);
        assert_eq!(s.tol.norm_cap, 20.0);
        assert_eq!(s.tol.idempotent_tol, Tolerances::profile("loose").unwrap().idempotent_tol);
        assert_eq!(s.input.unwrap(), dir.path().join("rep.json"));
    }

    #[test]
    fn env_profile_applies_without_config() {
        let s = Settings::resolve(
            Some(CommandKind::Closure),
            CommonArgs::default(),
            CommandArgs::default(),
            Some("strict".into()),
        )
        .unwrap();
        assert_eq!(s.tol, Tolerances::profile("strict").unwrap());
    }

    #[test]
    fn rejects_bad_values() {
        let neg = CommonArgs {
            tol: ToleranceOverrides {
                rank_tol: Some(-1.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let e = Settings::resolve(Some(CommandKind::Closure), neg, CommandArgs::default(), None).unwrap_err();
        assert_eq!(e.code, crate::failure::MALFORMED);

        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "command = \"decompose\"\nbogus = 1\n");
        let common = CommonArgs {
            config: Some(path),
            ..Default::default()
        };
        assert!(Settings::resolve(None, common, CommandArgs::default(), None).is_err());

        let both = CommonArgs {
            input: Some("a.json".into()),
            catalog: Some("identity".into()),
            ..Default::default()
        };
        assert!(Settings::resolve(Some(CommandKind::Decompose), both, CommandArgs::default(), None).is_err());
    }
}

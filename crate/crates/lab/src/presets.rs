//! The experiments the runner knows, their parameters and defaults.

use std::fmt::Write as _;

use crate::config::Kind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    TheoremC,
    TheoremDBlocks,
    TheoremEDw,
    TheoremFDensity,
    ExRotations,
    ExNested,
    ExLengths,
    ExConjugated,
    ExRescaled,
    ExParabolic,
    Custom,
}

/// One configurable parameter.
#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub key: &'static str,
    pub default: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

const fn p(key: &'static str, default: &'static str, kind: Kind, help: &'static str) -> Param {
    Param {
        key,
        default,
        kind,
        help,
    }
}

use Kind::*;

const THEOREM_C: &[Param] = &[
    p("map", "nested(0.5)", Map, "autonomous centred map"),
    p("target_center", "0", Real, "centre of the target arcs (radians)"),
    p("lengths", "power(1, 0.1)", Sequence, "target lengths |I_n|"),
    p("horizon", "100000", Count, "last step N"),
    p("samples", "200", Count, "uniform starting points"),
    p(
        "checkpoints",
        "1000, 10000, 100000",
        Counts,
        "N at which A(N) is recorded",
    ),
    p(
        "assert_min_hit_fraction",
        "1",
        Real,
        "least fraction of samples with A(N) >= 1",
    ),
    p("assert_ratio_low", "0.7", Real, "lower bound on mean A(N)/phi(N)"),
    p("assert_ratio_high", "1.3", Real, "upper bound on mean A(N)/phi(N)"),
];

const THEOREM_D: &[Param] = &[
    p("mu", "power(0.5, 0.5)", Sequence, "mu_n = 1 - |f_n'(0)|"),
    p("lengths", "power(1, 0.4)", Sequence, "target lengths |I_n|"),
    p(
        "target_center",
        "2",
        Real,
        "centre of the target arcs (radians), away from the common fixed point 1",
    ),
    p("blocks", "20", Count, "blocks in the partition"),
    p("horizon", "100000", Count, "last step N"),
    p("samples", "200", Count, "uniform starting points"),
    p(
        "assert_min_hit_fraction",
        "1",
        Real,
        "least fraction of samples with A(N) >= 1",
    ),
];

const THEOREM_E: &[Param] = &[
    p("mu", "default", Sequence, "mu_n of the nested maps"),
    p("lengths", "power(0.5, 1.5)", Sequence, "arc lengths defining M_n"),
    p("horizon", "10000", Count, "last step N"),
    p("samples", "100", Count, "uniform starting points"),
    p("compare_at", "100", Count, "early step compared against N"),
    p("rows", "100", Count, "rows in the distance table"),
    p(
        "assert_max_median_ratio",
        "0.5",
        Real,
        "largest median d_N / median d_compare",
    ),
];

const THEOREM_F: &[Param] = &[
    p("map", "nested(0.5)", Map, "autonomous map"),
    p("horizon", "1000000", Count, "orbit length N"),
    p("cells", "100", Count, "equal cells on the circle"),
    p("samples", "100", Count, "uniform starting points"),
    p(
        "assert_min_dense_fraction",
        "0.99",
        Real,
        "least fraction of orbits visiting every cell",
    ),
];

const EX_ROTATIONS: &[Param] = &[
    p("max_m", "1414", Count, "largest rotation block m"),
    p("horizon", "1000000", Count, "last step N"),
    p("theta_grid", "16", Count, "evenly spaced starting points"),
    p(
        "spot_thetas",
        "1.0, 4.71238898038469",
        Reals,
        "extra starting points (radians)",
    ),
    p("samples", "1000", Count, "uniform starting points"),
    p("window_start", "100000", Count, "first step of the hit window"),
    p(
        "assert_min_upper_hits",
        "1000",
        Real,
        "least A(N) for starting points in (0, pi)",
    ),
    p("assert_fraction_low", "0.45", Real, "lower bound on the hit fraction"),
    p("assert_fraction_high", "0.55", Real, "upper bound on the hit fraction"),
];

const EX_NESTED: &[Param] = &[
    p("mu", "default", Sequence, "mu_n = 1 - lambda_n"),
    p("lengths", "default", Sequence, "target lengths l_n"),
    p("window_start", "1000", Count, "first step N0 of the hit window"),
    p("window_end", "100000", Count, "last step N1 of the hit window"),
    p("samples", "2000", Count, "uniform starting points"),
    p("branch_max", "20", Count, "steps with exact branch split"),
    p(
        "epsilon_partial_to",
        "10000000",
        Count,
        "exact terms in the epsilon sum",
    ),
    p("assert_max_fraction", "0.08", Real, "largest admissible hit fraction"),
];

const EX_LENGTHS: &[Param] = &[
    p("mu", "inverse-log(8)", Sequence, "null sequence mu_n"),
    p("horizon", "100000", Count, "largest index searched for breakpoints"),
    p("cap", "1", Real, "budget for the sum of mu at breakpoints"),
    p("samples", "500", Count, "uniform starting points"),
    p("assert_min_blocks", "3", Count, "least number of completed blocks"),
    p(
        "assert_fraction_margin",
        "0.02",
        Real,
        "allowed excess of the hit fraction over epsilon / 2pi",
    ),
];

const EX_CONJUGATED: &[Param] = &[
    p("mu", "default", Sequence, "mu_n of the nested maps"),
    p("lengths", "default", Sequence, "arc lengths defining M_n"),
    p("horizon", "10000", Count, "last step N"),
    p("samples", "100", Count, "uniform starting points"),
    p("quiet_from", "100", Count, "visits to I are counted from this step on"),
    p(
        "assert_min_quiet_fraction",
        "0.9",
        Real,
        "least fraction of orbits with no late visit to I",
    ),
];

const EX_RESCALED: &[Param] = &[
    p("mu", "default", Sequence, "mu_n of the nested maps"),
    p("lengths", "default", Sequence, "original arc lengths l_n"),
    p("horizon", "10000", Count, "last step N"),
    p("samples", "100", Count, "uniform starting points"),
    p("compare_at", "100", Count, "early step compared against N"),
    p("rows", "100", Count, "rows in the distance table"),
    p(
        "assert_max_median_ratio",
        "0.5",
        Real,
        "largest median d_N / median d_compare",
    ),
];

const EX_PARABOLIC: &[Param] = &[
    p("horizon", "1000000", Count, "iterates N"),
    p("rows", "10", Count, "rows at multiples of N / rows"),
    p(
        "assert_ratio_low",
        "0.95",
        Real,
        "lower bound on the last / first sqrt(n)(1 - f^n(0)) ratio",
    ),
    p("assert_ratio_high", "1.05", Real, "upper bound on that ratio"),
    p("assert_nmu_low", "0.9", Real, "lower bound on N mu_N"),
    p("assert_nmu_high", "1.1", Real, "upper bound on N mu_N"),
];

const CUSTOM: &[Param] = &[
    p("map", "nested(0.5)", Map, "map family"),
    p("mu", "default", Sequence, "mu_n for map = nested-sequence"),
    p("target_center", "0", Real, "centre of the target arcs (radians)"),
    p("lengths", "default", Sequence, "target lengths |I_n|"),
    p("horizon", "10000", Count, "last step N"),
    p("samples", "200", Count, "uniform starting points"),
    p("window_start", "1", Count, "first step of the hit window"),
    p("checkpoints", "10000", Counts, "N at which A(N) is recorded"),
    p("cells", "64", Count, "cells for the density profile"),
];

impl Preset {
    pub const ALL: [Preset; 11] = [
        Preset::TheoremC,
        Preset::TheoremDBlocks,
        Preset::TheoremEDw,
        Preset::TheoremFDensity,
        Preset::ExRotations,
        Preset::ExNested,
        Preset::ExLengths,
        Preset::ExConjugated,
        Preset::ExRescaled,
        Preset::ExParabolic,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TheoremC => "theorem-c",
            Preset::TheoremDBlocks => "theorem-d-blocks",
            Preset::TheoremEDw => "theorem-e-dw",
            Preset::TheoremFDensity => "theorem-f-density",
            Preset::ExRotations => "ex-rotations",
            Preset::ExNested => "ex-nested",
            Preset::ExLengths => "ex-lengths",
            Preset::ExConjugated => "ex-conjugated",
            Preset::ExRescaled => "ex-rescaled",
            Preset::ExParabolic => "ex-parabolic",
            Preset::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn parameters(self) -> &'static [Param] {
        match self {
            Preset::TheoremC => THEOREM_C,
            Preset::TheoremDBlocks => THEOREM_D,
            Preset::TheoremEDw => THEOREM_E,
            Preset::TheoremFDensity => THEOREM_F,
            Preset::ExRotations => EX_ROTATIONS,
            Preset::ExNested => EX_NESTED,
            Preset::ExLengths => EX_LENGTHS,
            Preset::ExConjugated => EX_CONJUGATED,
            Preset::ExRescaled => EX_RESCALED,
            Preset::ExParabolic => EX_PARABOLIC,
            Preset::Custom => CUSTOM,
        }
    }

    /// The statement the preset reproduces at finite scale.
    pub fn claim(self) -> &'static str {
        match self {
            Preset::TheoremC => {
                r"centred $f_n$ with $|f_n'(0)| \le \lambda < 1$ and $\sum |I_n| = \infty$: $(F_n(\zeta))$ hits $(I_n)$ for almost every $\zeta$"
            }
            Preset::TheoremDBlocks => {
                r"centred $f_n$ with $\sum \mu_n |I_n| = \infty$: hits $(I_n)$ for almost all $\zeta$; blocks with $\sum \mu \ge 1$ have $|g_k'(0)| \le e^{-1}$"
            }
            Preset::TheoremEDw => {
                r"$\sum (1-|F_n(0)|) < \infty$: ${\rm dist}(F_n(\zeta), F_n(0)) \to 0$ for almost every $\zeta$"
            }
            Preset::TheoremFDensity => {
                r"$\sum \mu_n (1-|F_n(0)|) = \infty$: $(F_n(\zeta))$ is dense in the circle for almost every $\zeta$"
            }
            Preset::ExRotations => {
                r"$R_{m,k}(z) = e^{\pi i (k+1)/m} z$ hits $(I_n)$ for $0 \le \theta \le \pi$ and fails to hit $(I_n)$ for $\pi < \theta < 2\pi$"
            }
            Preset::ExNested => {
                r"$b_n(z) = z(z+\lambda_n)/(1+\lambda_n z)$ fails to hit nested $(I_n)$: $|\bigcup_{n \ge N} B_n^{-1}(I_n)| \le 2\sum_{n \ge N} \mu_n |I_n| + |I_N| =: \epsilon_N$"
            }
            Preset::ExLengths => {
                r"$l_n := 1/(n_{k+1}-n_k)$ on $[n_k, n_{k+1})$: $\sum l_n = \infty$ while $\sum \mu_n l_n < \infty$"
            }
            Preset::ExConjugated => {
                r"$f_n = M_n \circ b_n \circ M_{n-1}^{-1}$: $F_n(\zeta) \in I$ at most finitely often for almost every $\zeta$"
            }
            Preset::ExRescaled => {
                r"arcs of length $|I_n|/t_n$, $t_n = \sum_{k \le n} |I_k|$: $\tilde F_n(\zeta) \to 1$ for almost every $\zeta$"
            }
            Preset::ExParabolic => r"$f(z) = ((z+1/3)/(1+z/3))^2$: $1-f^n(0) \sim n^{-1/2}$ and $\mu_n \sim 1/n$",
            Preset::Custom => "exploratory: records evidence only, no outcome is claimed",
        }
    }
}

/// Text table with one row per preset: name and reproduced claim.
pub fn list_presets() -> String {
    let width = Preset::ALL.iter().map(|p| p.name().len()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:width$}  claim", "preset");
    for preset in Preset::ALL {
        let _ = writeln!(out, "{:width$}  {}", preset.name(), preset.claim());
    }
    out
}

/// Parameters of one preset with defaults and descriptions.
pub fn describe(preset: Preset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}: {}", preset.name(), preset.claim());
    let _ = writeln!(out, "preset = {}", preset.name());
    for p in preset.parameters() {
        let _ = writeln!(out, "{} = {}  # {}", p.key, p.default, p.help);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn every_default_config_is_valid() {
        for p in Preset::ALL {
            ExperimentConfig::defaults(p);
            ExperimentConfig::parse(&describe(p)).unwrap();
        }
    }
}

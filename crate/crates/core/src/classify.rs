//! Map limit verdicts of the criteria functionals onto a solution-type
//! prediction.
//!
//! The decision table below is evaluated in order, first match wins. A
//! rule matches only when every one of its hypotheses has a conclusive
//! verdict of the required kind; Inconclusive never coerces to either
//! side. "x < y" between two gauges means both converge and the limits
//! compare strictly.
//!
//! ```text
//! 1. H1=∞  H2=∞  P̲1=∞  P̲2=∞          -> u large,   v large
//! 2. H1=∞  H2=∞  P̄1<∞  P̄2<∞          -> u bounded, v bounded
//! 3. H1=∞  H2=∞  P̄1<∞  P̲2=∞          -> u bounded, v large
//! 4. H1=∞  H2=∞  P̲1=∞  P̄2<∞          -> u large,   v bounded
//! 5. P̄1<H1<∞  P̄2<H2<∞                -> both bounded, sandwich envelopes
//! 6. H1=∞  P̲1=∞  P̄2<H2<∞             -> u large,   v bounded
//! 7. P̄1<H1<∞  H2=∞  P̲2=∞             -> u bounded, v large
//! ```
//!
//! Rules 5-7 reuse the existence construction that rules 1-4 justify under
//! divergent gauges; each report carries a caveat note recording that
//! dependency. Overlapping matches are possible numerically (the verdicts
//! are heuristic); every report exposes all six verdicts so the choice is
//! auditable, and simultaneous matches are flagged as warnings.

use crate::functionals::{ArgTable, FunctionalTable, LimitOutcome, LimitVerdict};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("finite envelope requested for a component predicted {0:?}")]
    NotBounded(Behavior),
    #[error("finite envelope needs a converged upper-envelope limit")]
    NoConvergedLimit,
}

/// Predicted behaviour of one solution component as r grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    Large,
    Bounded,
    Unknown,
}

impl std::fmt::Display for Behavior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Behavior::Large => write!(f, "large"),
            Behavior::Bounded => write!(f, "bounded"),
            Behavior::Unknown => write!(f, "unknown"),
        }
    }
}

/// The matched row of the decision table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    BothLarge,
    BothBounded,
    BoundedAndLarge,
    LargeAndBounded,
    BothBoundedSandwich,
    LargeAndBoundedSandwich,
    BoundedAndLargeSandwich,
    NoRuleMatched,
}

impl Rule {
    pub fn behaviors(self) -> (Behavior, Behavior) {
        match self {
            Rule::BothLarge => (Behavior::Large, Behavior::Large),
            Rule::BothBounded | Rule::BothBoundedSandwich => (Behavior::Bounded, Behavior::Bounded),
            Rule::BoundedAndLarge | Rule::BoundedAndLargeSandwich => {
                (Behavior::Bounded, Behavior::Large)
            }
            Rule::LargeAndBounded | Rule::LargeAndBoundedSandwich => {
                (Behavior::Large, Behavior::Bounded)
            }
            Rule::NoRuleMatched => (Behavior::Unknown, Behavior::Unknown),
        }
    }

    /// Rules that assert boundedness through finite gauges inherit the
    /// existence argument from the divergent-gauge rules.
    pub fn existence_caveat(self) -> bool {
        matches!(
            self,
            Rule::BothBoundedSandwich | Rule::LargeAndBoundedSandwich | Rule::BoundedAndLargeSandwich
        )
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Rule::BothLarge => "both-large",
            Rule::BothBounded => "both-bounded",
            Rule::BoundedAndLarge => "bounded-large",
            Rule::LargeAndBounded => "large-bounded",
            Rule::BothBoundedSandwich => "both-bounded-sandwich",
            Rule::LargeAndBoundedSandwich => "large-bounded-sandwich",
            Rule::BoundedAndLargeSandwich => "bounded-large-sandwich",
            Rule::NoRuleMatched => "no-rule-matched",
        };
        f.write_str(name)
    }
}

/// The six limits the decision table consumes.
#[derive(Debug, Clone)]
pub struct VerdictSet {
    pub h1: LimitVerdict,
    pub h2: LimitVerdict,
    pub p_under1: LimitVerdict,
    pub p_under2: LimitVerdict,
    pub p_bar1: LimitVerdict,
    pub p_bar2: LimitVerdict,
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub rule: Rule,
    pub u_behavior: Behavior,
    pub v_behavior: Behavior,
    pub verdicts: VerdictSet,
    /// Conclusive hypotheses that blocked matching, when no rule fired.
    pub blocking: Vec<String>,
    pub warnings: Vec<String>,
    /// Sandwich rules reuse the divergent-gauge existence construction.
    pub existence_caveat: bool,
}

fn diverges(v: &LimitVerdict) -> bool {
    matches!(v.outcome, LimitOutcome::Diverges)
}

fn converged(v: &LimitVerdict) -> Option<f64> {
    match v.outcome {
        LimitOutcome::Converges { value, .. } => Some(value),
        _ => None,
    }
}

/// Both converge with bar strictly below gauge.
fn strictly_below(bar: &LimitVerdict, gauge: &LimitVerdict) -> bool {
    match (converged(bar), converged(gauge)) {
        (Some(b), Some(g)) => b < g,
        _ => false,
    }
}

fn rule_matches(rule: Rule, v: &VerdictSet) -> bool {
    match rule {
        Rule::BothLarge => {
            diverges(&v.h1) && diverges(&v.h2) && diverges(&v.p_under1) && diverges(&v.p_under2)
        }
        Rule::BothBounded => {
            diverges(&v.h1)
                && diverges(&v.h2)
                && converged(&v.p_bar1).is_some()
                && converged(&v.p_bar2).is_some()
        }
        Rule::BoundedAndLarge => {
            diverges(&v.h1)
                && diverges(&v.h2)
                && converged(&v.p_bar1).is_some()
                && diverges(&v.p_under2)
        }
        Rule::LargeAndBounded => {
            diverges(&v.h1)
                && diverges(&v.h2)
                && diverges(&v.p_under1)
                && converged(&v.p_bar2).is_some()
        }
        Rule::BothBoundedSandwich => {
            strictly_below(&v.p_bar1, &v.h1) && strictly_below(&v.p_bar2, &v.h2)
        }
        Rule::LargeAndBoundedSandwich => {
            diverges(&v.h1) && diverges(&v.p_under1) && strictly_below(&v.p_bar2, &v.h2)
        }
        Rule::BoundedAndLargeSandwich => {
            strictly_below(&v.p_bar1, &v.h1) && diverges(&v.h2) && diverges(&v.p_under2)
        }
        Rule::NoRuleMatched => false,
    }
}

const RULE_ORDER: [Rule; 7] = [
    Rule::BothLarge,
    Rule::BothBounded,
    Rule::BoundedAndLarge,
    Rule::LargeAndBounded,
    Rule::BothBoundedSandwich,
    Rule::LargeAndBoundedSandwich,
    Rule::BoundedAndLargeSandwich,
];

/// Evaluate the decision table; first match wins, Inconclusive never
/// matches, and simultaneous matches are reported as warnings.
pub fn classify(verdicts: VerdictSet) -> ClassificationReport {
    let matched: Vec<Rule> = RULE_ORDER
        .iter()
        .copied()
        .filter(|r| rule_matches(*r, &verdicts))
        .collect();
    let rule = matched.first().copied().unwrap_or(Rule::NoRuleMatched);
    let mut warnings = Vec::new();
    if matched.len() > 1 {
        warnings.push(format!(
            "multiple rule hypotheses hold simultaneously ({}); they are analytically exclusive, so the probe verdicts conflict",
            matched
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    let mut blocking = Vec::new();
    if rule == Rule::NoRuleMatched {
        for (name, v) in [
            ("H1", &verdicts.h1),
            ("H2", &verdicts.h2),
            ("Punder1", &verdicts.p_under1),
            ("Punder2", &verdicts.p_under2),
            ("Pbar1", &verdicts.p_bar1),
            ("Pbar2", &verdicts.p_bar2),
        ] {
            if matches!(v.outcome, LimitOutcome::Inconclusive) {
                blocking.push(format!("{name}: inconclusive"));
            }
        }
        if blocking.is_empty() {
            blocking.push("no hypothesis pattern fits the conclusive verdicts".to_string());
        }
    }
    let (u_behavior, v_behavior) = rule.behaviors();
    ClassificationReport {
        existence_caveat: rule.existence_caveat(),
        rule,
        u_behavior,
        v_behavior,
        verdicts,
        blocking,
        warnings,
    }
}

/// Asymptotic envelope H_i^{-1}(P̄_i(∞)) for a component predicted bounded.
pub fn finite_envelope(
    behavior: Behavior,
    p_bar_limit: &LimitVerdict,
    h_table: &ArgTable,
) -> Result<f64, ClassifyError> {
    if behavior != Behavior::Bounded {
        return Err(ClassifyError::NotBounded(behavior));
    }
    let limit = converged(p_bar_limit).ok_or(ClassifyError::NoConvergedLimit)?;
    Ok(h_table.invert(limit).value)
}

/// Envelopes for both components where the report predicts boundedness.
pub fn envelopes(
    report: &ClassificationReport,
    tables: &FunctionalTable,
) -> (Option<f64>, Option<f64>) {
    let u = finite_envelope(report.u_behavior, &report.verdicts.p_bar1, &tables.h[0]).ok();
    let v = finite_envelope(report.v_behavior, &report.verdicts.p_bar2, &tables.h[1]).ok();
    (u, v)
}

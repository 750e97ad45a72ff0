//! Planted causal pathways and the synthetic experiments built on them.
//!
//! A pathway is a disjunction of conjunctions written in one of two forms:
//!
//! * Boolean shorthand, `ab+CD+ace+BDF`: one letter per factor, upper case
//!   for level 1 and lower case for level 0. Only available when every
//!   factor name is a single letter.
//! * Multi-value, `A0*B0+B1*C1`: a factor name immediately followed by its
//!   level, or `name=level`. Literals are joined with `*`.
//!
//! Whitespace is ignored. The generator enumerates the full truth table in
//! odometer order (last factor fastest), labels each row by the pathway,
//! samples rows with replacement and flips the outcome of a number of
//! distinct sampled rows.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Case, CaseTable, Conjunction, FactorSchema, Level, Literal, Notation};
use crate::rng::ExperimentRng;

/// Default limit on materialized truth-table rows.
pub const DEFAULT_ROW_BOUND: u64 = 1 << 24;

/// A DNF bound to a schema.
#[derive(Clone, Debug, PartialEq)]
pub struct PathwaySpec {
    terms: Vec<Conjunction>,
    schema: FactorSchema,
}

impl PathwaySpec {
    pub fn new(terms: Vec<Conjunction>, schema: FactorSchema) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter { name: "pathway", reason: "needs at least one term".into() });
        }
        for t in &terms {
            if t.is_empty() {
                return Err(Error::InvalidParameter { name: "pathway", reason: "empty term".into() });
            }
            t.validate(&schema)?;
        }
        Ok(PathwaySpec { terms, schema })
    }

    pub fn terms(&self) -> &[Conjunction] {
        &self.terms
    }

    pub fn schema(&self) -> &FactorSchema {
        &self.schema
    }

    /// Whether any term holds for `values`.
    pub fn evaluate(&self, values: &[Level]) -> bool {
        self.terms.iter().any(|t| t.matches_values(values))
    }

    pub fn to_text(&self) -> String {
        dnf_string(&self.terms, &self.schema)
    }
}

fn boolean_letters(schema: &FactorSchema) -> bool {
    let mut seen = [false; 128];
    schema.factors().iter().all(|f| {
        let mut chars = f.name.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => {
                let k = c.to_ascii_lowercase() as usize;
                !core::mem::replace(&mut seen[k], true)
            }
            _ => false,
        }
    })
}

/// Renders a disjunction the way [`parse_pathway`] reads it: `ab+CD` when
/// every factor is a single-letter binary, `A0*B1+C2` style otherwise.
pub fn dnf_string(terms: &[Conjunction], schema: &FactorSchema) -> String {
    let juxtapose = boolean_letters(schema) && schema.factors().iter().all(|f| f.levels == 2 && f.labels.is_empty());
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            out.push('+');
        }
        let s = format!("{}", t.display(schema, Notation::Compact));
        if juxtapose {
            out.extend(s.chars().filter(|&c| c != '*'));
        } else {
            out.push_str(&s);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Plus,
    Star,
    Eq,
    Ident(String),
    Number(u32),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((i, Token::Plus));
                i += 1;
            }
            b'*' => {
                out.push((i, Token::Star));
                i += 1;
            }
            b'=' => {
                out.push((i, Token::Eq));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..i].parse().map_err(|_| Error::Parse { position: start, message: "level number too large".into() })?;
                out.push((start, Token::Number(n)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Token::Ident(String::from(&text[start..i]))));
            }
            _ => return Err(Error::Parse { position: i, message: format!("unexpected character `{}`", text[i..].chars().next().unwrap_or('?')) }),
        }
    }
    Ok(out)
}

fn level_literal(schema: &FactorSchema, name: &str, level: u32, position: usize) -> Result<Literal> {
    let factor = schema.factor_index(name).ok_or_else(|| Error::Parse { position, message: format!("unknown factor `{name}`") })?;
    let levels = schema.factors()[factor].levels;
    if level >= levels {
        return Err(Error::Parse { position, message: format!("level {level} out of range for `{name}` ({levels} levels)") });
    }
    Ok(Literal::new(factor, level))
}

/// Literals denoted by one identifier without an explicit `=level`.
fn ident_literals(schema: &FactorSchema, ident: &str, position: usize) -> Result<Vec<Literal>> {
    let head = ident.trim_end_matches(|c: char| c.is_ascii_digit());
    if head.len() < ident.len() && !head.is_empty() {
        let level = ident[head.len()..].parse::<u32>().map_err(|_| Error::Parse { position, message: "level number too large".into() })?;
        return Ok(alloc::vec![level_literal(schema, head, level, position)?]);
    }
    if !boolean_letters(schema) {
        return Err(Error::Parse {
            position,
            message: format!("`{ident}`: Boolean shorthand needs single-letter factor names; write `name<level>` or `name=level`"),
        });
    }
    ident
        .char_indices()
        .map(|(k, c)| {
            let factor = schema
                .factors()
                .iter()
                .position(|f| f.name.eq_ignore_ascii_case(c.encode_utf8(&mut [0; 4])))
                .ok_or_else(|| Error::Parse { position: position + k, message: format!("unknown factor `{c}`") })?;
            let value = c.is_ascii_uppercase() as u32;
            let name = &schema.factors()[factor].name;
            level_literal(schema, name, value, position + k)
        })
        .collect()
}

/// Parses a DNF pathway against `schema`.
pub fn parse_pathway(text: &str, schema: &FactorSchema) -> Result<PathwaySpec> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::Parse { position: 0, message: "empty pathway".into() });
    }
    let mut terms = Vec::new();
    let mut current: Vec<(usize, Literal)> = Vec::new();
    let mut expect_literal = true; // after start, '+' or '*'
    let mut i = 0;

    let close_term = |current: &mut Vec<(usize, Literal)>, terms: &mut Vec<Conjunction>, at: usize| -> Result<()> {
        if current.is_empty() {
            return Err(Error::Parse { position: at, message: "empty term".into() });
        }
        let mut lits: Vec<(usize, Literal)> = core::mem::take(current);
        lits.sort_by_key(|(_, l)| l.factor);
        if let Some(w) = lits.windows(2).find(|w| w[0].1.factor == w[1].1.factor) {
            return Err(Error::Parse {
                position: w[1].0,
                message: format!("factor `{}` repeated in one term", schema.factors()[w[1].1.factor].name),
            });
        }
        terms.push(Conjunction::new(lits.into_iter().map(|(_, l)| l).collect())?);
        Ok(())
    };

    while i < tokens.len() {
        let (pos, ref tok) = tokens[i];
        match tok {
            Token::Plus => {
                if expect_literal {
                    return Err(Error::Parse {
                        position: pos,
                        message: if current.is_empty() { "empty term".into() } else { "dangling `*`".into() },
                    });
                }
                close_term(&mut current, &mut terms, pos)?;
                expect_literal = true;
            }
            Token::Star => {
                if expect_literal {
                    return Err(Error::Parse { position: pos, message: "dangling `*`".into() });
                }
                expect_literal = true;
            }
            Token::Ident(name) => {
                if let Some((_, Token::Eq)) = tokens.get(i + 1) {
                    let Some(&(npos, Token::Number(level))) = tokens.get(i + 2) else {
                        return Err(Error::Parse { position: tokens[i + 1].0, message: "expected a level after `=`".into() });
                    };
                    current.push((pos, level_literal(schema, name, level, npos)?));
                    i += 2;
                } else {
                    current.extend(ident_literals(schema, name, pos)?.into_iter().map(|l| (pos, l)));
                }
                expect_literal = false;
            }
            Token::Eq | Token::Number(_) => return Err(Error::Parse { position: pos, message: "expected a factor".into() }),
        }
        i += 1;
    }
    if expect_literal {
        let at = tokens.last().map(|t| t.0).unwrap_or(0);
        return Err(Error::Parse { position: at, message: "dangling operator at end of pathway".into() });
    }
    close_term(&mut current, &mut terms, text.len())?;
    PathwaySpec::new(terms, schema.clone())
}

/// Condition rows of a truth table, no outcomes yet.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    pub schema: FactorSchema,
    pub rows: Vec<Vec<Level>>,
}

/// `Π levels`, or `None` past `u64`.
pub fn row_count(schema: &FactorSchema) -> Option<u64> {
    schema.factors().iter().try_fold(1u64, |acc, f| acc.checked_mul(f.levels as u64))
}

/// Row `index` of the full truth table in odometer order.
pub fn row_values(schema: &FactorSchema, mut index: u64) -> Vec<Level> {
    let mut values = alloc::vec![0; schema.len()];
    for (slot, f) in values.iter_mut().zip(schema.factors()).rev() {
        *slot = (index % f.levels as u64) as Level;
        index /= f.levels as u64;
    }
    values
}

/// Every combination of factor levels, refusing more than `bound` rows.
pub fn full_truth_table(schema: &FactorSchema, bound: u64) -> Result<TruthTable> {
    let rows = row_count(schema).unwrap_or(u64::MAX);
    if rows > bound {
        return Err(Error::TruthTableTooLarge { rows, bound });
    }
    Ok(TruthTable { schema: schema.clone(), rows: (0..rows).map(|i| row_values(schema, i)).collect() })
}

/// Labels each row 1 when some pathway term matches it, else 0. Row ids are
/// `r0`, `r1`, ….
pub fn plant_outcome(skeleton: &TruthTable, pathway: &PathwaySpec) -> Result<CaseTable> {
    let cases = skeleton.rows.iter().enumerate().map(|(i, v)| Case::new(format!("r{i}"), v.clone(), pathway.evaluate(v) as Level)).collect();
    CaseTable::new(skeleton.schema.clone(), cases)
}

/// One synthetic experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub pathway: PathwaySpec,
    pub sample_size: usize,
    pub confound_count: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn schema(&self) -> &FactorSchema {
        self.pathway.schema()
    }

    pub fn validate(&self) -> Result<()> {
        if self.confound_count > self.sample_size {
            return Err(Error::InvalidParameter {
                name: "confound count",
                reason: format!("{} exceeds the sample size {}", self.confound_count, self.sample_size),
            });
        }
        Ok(())
    }
}

/// Draws `sample_size` rows of `table` with replacement, then gives
/// `confound_count` distinct sampled rows a different outcome level, chosen
/// uniformly among the others. Sample ids are `s0`, `s1`, ….
pub fn sample_and_confound(table: &CaseTable, spec: &ExperimentSpec) -> Result<CaseTable> {
    spec.validate()?;
    if table.is_empty() && spec.sample_size > 0 {
        return Err(Error::InvalidParameter { name: "table", reason: "cannot sample from an empty table".into() });
    }
    let n = table.len() as u64;
    draw(
        table.schema(),
        spec,
        |i| {
            let c = &table.cases()[i as usize];
            (c.values.clone(), c.outcome)
        },
        n,
    )
}

/// [`full_truth_table`] → [`plant_outcome`] → [`sample_and_confound`] without
/// materializing the truth table; identical output for the same spec.
pub fn generate(spec: &ExperimentSpec) -> Result<CaseTable> {
    spec.validate()?;
    let schema = spec.schema();
    let rows = row_count(schema).ok_or(Error::TruthTableTooLarge { rows: u64::MAX, bound: u64::MAX })?;
    draw(
        schema,
        spec,
        |i| {
            let v = row_values(schema, i);
            let o = spec.pathway.evaluate(&v) as Level;
            (v, o)
        },
        rows,
    )
}

fn draw<F: Fn(u64) -> (Vec<Level>, Level)>(schema: &FactorSchema, spec: &ExperimentSpec, row: F, rows: u64) -> Result<CaseTable> {
    let mut rng = ExperimentRng::new(spec.seed);
    let mut cases: Vec<Case> = (0..spec.sample_size)
        .map(|k| {
            let (values, outcome) = row(rng.below(rows));
            Case::new(format!("s{k}"), values, outcome)
        })
        .collect();
    let levels = schema.outcome().levels as u64;
    for pos in rng.choose_distinct(spec.sample_size, spec.confound_count) {
        let old = cases[pos].outcome as u64;
        let r = rng.below(levels - 1);
        cases[pos].outcome = if r >= old { r + 1 } else { r } as Level;
    }
    CaseTable::new(schema.clone(), cases)
}

/// Uniform schema `A, B, …` (or `F1, F2, …` past 26 factors) with `levels`
/// each and a binary outcome `OUTCOME`.
pub fn letter_schema(factors: usize, levels: &[u32]) -> Result<FactorSchema> {
    let names: Vec<String> =
        (0..factors).map(|i| if factors <= 26 { String::from((b'A' + i as u8) as char) } else { format!("F{}", i + 1) }).collect();
    let level_of = |i: usize| -> u32 {
        match levels {
            [] => 2,
            [one] => *one,
            many => many.get(i).copied().unwrap_or(2),
        }
    };
    if levels.len() > 1 && levels.len() != factors {
        return Err(Error::InvalidParameter { name: "levels", reason: format!("{} level counts for {factors} factors", levels.len()) });
    }
    FactorSchema::new(
        names.iter().enumerate().map(|(i, n)| crate::model::Factor::new(n.clone(), level_of(i))).collect(),
        crate::model::Factor::new("OUTCOME", 2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::conj;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn six() -> FactorSchema {
        letter_schema(6, &[2]).unwrap()
    }

    #[test]
    fn boolean_shorthand() {
        let s = letter_schema(4, &[2]).unwrap();
        let p = parse_pathway("ab+CD", &s).unwrap();
        assert_eq!(p.terms(), [conj(&[(0, 0), (1, 0)]), conj(&[(2, 1), (3, 1)])]);
        assert_eq!(p.to_text(), "ab+CD");
    }

    #[test]
    fn reference_pathways_parse() {
        let p = parse_pathway("ab+CD+ace+BDF", &six()).unwrap();
        let orders: Vec<_> = p.terms().iter().map(|t| t.len()).collect();
        assert_eq!(orders, [2, 2, 3, 3]);
        let mv = letter_schema(5, &[3]).unwrap();
        let p = parse_pathway("A0*B0+B1*C1+C2 *D2+D0*E0", &mv).unwrap();
        assert_eq!(p.terms(), [conj(&[(0, 0), (1, 0)]), conj(&[(1, 1), (2, 1)]), conj(&[(2, 2), (3, 2)]), conj(&[(3, 0), (4, 0)])]);
        assert_eq!(p.to_text(), "A0*B0+B1*C1+C2*D2+D0*E0");
    }

    #[test]
    fn explicit_assignment_and_multi_letter_names() {
        let s = FactorSchema::simple(&[("MS", 2), ("PI", 2), ("X1", 3)], "O", 2).unwrap();
        let p = parse_pathway("MS=0*PI1 + X1=2", &s).unwrap();
        assert_eq!(p.terms(), [conj(&[(0, 0), (1, 1)]), conj(&[(2, 2)])]);
        assert!(parse_pathway("ms*PI", &s).is_err());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let s = six();
        let err = |t: &str| match parse_pathway(t, &s) {
            Err(Error::Parse { position, .. }) => position,
            other => panic!("{t}: {other:?}"),
        };
        assert_eq!(err("ab+G"), 3);
        assert_eq!(err("ab++CD"), 3);
        assert_eq!(err("+ab"), 0);
        assert_eq!(err("ab+"), 2);
        assert_eq!(err("a**b"), 2);
        assert_eq!(err("ab*"), 2);
        assert_eq!(err("A2"), 0);
        assert_eq!(err("aA"), 0);
        assert_eq!(err("a-b"), 1);
        assert_eq!(err(""), 0);
        assert_eq!(err("   "), 0);
    }

    #[test]
    fn truth_table_shapes() {
        assert_eq!(full_truth_table(&six(), DEFAULT_ROW_BOUND).unwrap().rows.len(), 64);
        assert_eq!(full_truth_table(&letter_schema(5, &[3]).unwrap(), DEFAULT_ROW_BOUND).unwrap().rows.len(), 243);
        let s = FactorSchema::simple(&[("A", 2), ("B", 3)], "O", 2).unwrap();
        let tt = full_truth_table(&s, DEFAULT_ROW_BOUND).unwrap();
        assert_eq!(tt.rows, [vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]);
        assert!(matches!(full_truth_table(&six(), 63), Err(Error::TruthTableTooLarge { rows: 64, .. })));
    }

    /// Independent evaluation: literal-by-literal over the parsed text.
    fn oracle_eval(text: &str, values: &[Level]) -> bool {
        text.split('+').any(|term| {
            term.chars().all(|c| {
                let f = (c.to_ascii_uppercase() as u8 - b'A') as usize;
                values[f] == c.is_ascii_uppercase() as u32
            })
        })
    }

    #[test]
    fn planting_matches_oracle_and_counts_35() {
        let text = "ab+CD+ace+BDF";
        let p = parse_pathway(text, &six()).unwrap();
        let t = plant_outcome(&full_truth_table(&six(), DEFAULT_ROW_BOUND).unwrap(), &p).unwrap();
        for c in t.cases() {
            assert_eq!(c.outcome == 1, oracle_eval(text, &c.values), "{:?}", c);
        }
        assert_eq!(t.outcome_set(1).unwrap().len(), 35);
        // a=0,b=0 fires the first term whatever the rest
        assert_eq!(t.cases()[0].outcome, 1);
        // A=1,B=0,C=0,D=0,E=1,F=1 matches no term
        let row = t.cases().iter().find(|c| c.values == [1, 0, 0, 0, 1, 1]).unwrap();
        assert_eq!(row.outcome, 0);
    }

    fn spec(confound: usize, seed: u64) -> ExperimentSpec {
        ExperimentSpec { pathway: parse_pathway("ab+CD+ace+BDF", &six()).unwrap(), sample_size: 200, confound_count: confound, seed }
    }

    #[test]
    fn sampling_contracts() {
        let clean = generate(&spec(0, 3)).unwrap();
        assert_eq!(clean.len(), 200);
        assert!(clean.cases().iter().all(|c| (c.outcome == 1) == oracle_eval("ab+CD+ace+BDF", &c.values)));
        let one = generate(&spec(1, 3)).unwrap();
        let disagree = one.cases().iter().filter(|c| (c.outcome == 1) != oracle_eval("ab+CD+ace+BDF", &c.values)).count();
        assert_eq!(disagree, 1);
        assert_eq!(generate(&spec(20, 9)).unwrap(), generate(&spec(20, 9)).unwrap());
        assert_ne!(generate(&spec(0, 9)).unwrap(), generate(&spec(0, 10)).unwrap());
        assert!(generate(&spec(201, 0)).is_err());
    }

    #[test]
    fn virtual_generation_equals_materialized_pipeline() {
        let s = spec(20, 11);
        let planted = plant_outcome(&full_truth_table(&six(), DEFAULT_ROW_BOUND).unwrap(), &s.pathway).unwrap();
        assert_eq!(sample_and_confound(&planted, &s).unwrap(), generate(&s).unwrap());
    }

    #[test]
    fn multi_value_confounding_changes_level() {
        let mv = letter_schema(2, &[3]).unwrap();
        let schema3 = FactorSchema::new(mv.factors().to_vec(), crate::model::Factor::new("OUTCOME", 3)).unwrap();
        let p = parse_pathway("A0", &schema3).unwrap();
        let planted = plant_outcome(&full_truth_table(&schema3, DEFAULT_ROW_BOUND).unwrap(), &p).unwrap();
        let s = ExperimentSpec { pathway: p.clone(), sample_size: 50, confound_count: 50, seed: 1 };
        let t = sample_and_confound(&planted, &s).unwrap();
        assert!(t.cases().iter().all(|c| c.outcome != p.evaluate(&c.values) as u32));
    }

    #[test]
    fn letter_schema_names() {
        let s = letter_schema(20, &[2]).unwrap();
        assert_eq!(s.factors()[19].name, "T");
        assert_eq!(letter_schema(30, &[2]).unwrap().factors()[0].name, "F1");
        let mixed = letter_schema(2, &[2, 3]).unwrap();
        assert_eq!(mixed.factors()[1].levels, 3);
        assert!(letter_schema(3, &[2, 3]).is_err());
        assert_eq!(letter_schema(1, &[]).unwrap().factors()[0].name.to_string(), "A");
    }

    proptest! {
        #[test]
        fn confounding_bounds_disagreement(k in 0usize..60, seed in any::<u64>()) {
            let t = generate(&spec(k, seed)).unwrap();
            let disagree = t.cases().iter()
                .filter(|c| (c.outcome == 1) != oracle_eval("ab+CD+ace+BDF", &c.values))
                .count();
            prop_assert_eq!(disagree, k);
        }

        #[test]
        fn rendering_round_trips(terms in prop::collection::vec(prop::collection::btree_map(0usize..6, 0u32..2, 1..4), 1..5)) {
            let s = six();
            let conjs: Vec<_> = terms.iter()
                .map(|m| Conjunction::new(m.iter().map(|(&f, &v)| Literal::new(f, v)).collect()).unwrap())
                .collect();
            let p = PathwaySpec::new(conjs, s.clone()).unwrap();
            prop_assert_eq!(parse_pathway(&p.to_text(), &s).unwrap(), p);
        }
    }
}

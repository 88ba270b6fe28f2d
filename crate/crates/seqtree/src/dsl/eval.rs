//! Total evaluation of validated feature expressions.

use super::energy::stacking_energy;
use super::{FeatureExpr, Motif, NucSet, Window};

/// Evaluate an expression on a sequence.
///
/// The expression must have been validated against `seq.len()`; indicator
/// forms return exactly 0.0 or 1.0, counts return non-negative integers as
/// reals, and `prop` returns a value in [0,1].
pub fn eval_expr(e: &FeatureExpr, seq: &str) -> f64 {
    let bytes = seq.as_bytes();
    match e {
        FeatureExpr::Count { set, window } => count_in(bytes, *set, *window) as f64,
        FeatureExpr::Prop { set, window } => {
            count_in(bytes, *set, *window) as f64 / window.len() as f64
        }
        FeatureExpr::PosIn { pos, set } => set.contains(bytes[*pos as usize]) as u8 as f64,
        FeatureExpr::MotifCount { pat, window } => motif_count_in(bytes, pat, *window) as f64,
        FeatureExpr::MotifPresent { pat, window } => {
            (motif_count_in(bytes, pat, *window) > 0) as u8 as f64
        }
        FeatureExpr::Transitions { from, to, window } => {
            let (a, b) = (window.a as usize, window.b as usize);
            (a..b)
                .filter(|&p| from.contains(bytes[p]) && to.contains(bytes[p + 1]))
                .count() as f64
        }
        FeatureExpr::StackEnergy { window } => {
            let (a, b) = (window.a as usize, window.b as usize);
            (a..b).map(|p| stacking_energy(bytes[p], bytes[p + 1])).sum()
        }
        FeatureExpr::Raw { index } => {
            let pos = (*index / 4) as usize;
            let base = crate::seqdata::BASES[(*index % 4) as usize];
            (bytes[pos] == base) as u8 as f64
        }
        FeatureExpr::Add(l, r) => eval_expr(l, seq) + eval_expr(r, seq),
        FeatureExpr::Sub(l, r) => eval_expr(l, seq) - eval_expr(r, seq),
        FeatureExpr::Scale(c, inner) => c.to_f64() * eval_expr(inner, seq),
        FeatureExpr::And(l, r) => {
            ((eval_expr(l, seq) != 0.0) && (eval_expr(r, seq) != 0.0)) as u8 as f64
        }
        FeatureExpr::Or(l, r) => {
            ((eval_expr(l, seq) != 0.0) || (eval_expr(r, seq) != 0.0)) as u8 as f64
        }
        FeatureExpr::Not(inner) => (eval_expr(inner, seq) == 0.0) as u8 as f64,
    }
}

fn count_in(bytes: &[u8], set: NucSet, window: Window) -> usize {
    bytes[window.a as usize..=window.b as usize]
        .iter()
        .filter(|&&b| set.contains(b))
        .count()
}

fn motif_count_in(bytes: &[u8], pat: &Motif, window: Window) -> usize {
    let span = &bytes[window.a as usize..=window.b as usize];
    if pat.len() > span.len() {
        return 0;
    }
    span.windows(pat.len())
        .filter(|w| *w == pat.as_str().as_bytes())
        .count()
}

#[cfg(test)]
mod tests {
    use super::super::{parse, stacking_energy};
    use super::*;

    fn ev(text: &str, seq: &str) -> f64 {
        eval_expr(&parse(text).unwrap(), seq)
    }

    #[test]
    fn prop_full_window() {
        assert_eq!(ev("prop({G},0,3)", "GGGG"), 1.0);
        assert_eq!(ev("prop({G},0,3)", "GGAA"), 0.5);
    }

    #[test]
    fn motif_count_overlapping() {
        // TATATATA contains TATA at offsets 0, 2, 4.
        assert_eq!(ev("motif_count(\"TATA\",0,7)", "TATATATA"), 3.0);
        assert_eq!(ev("motif_present(\"TATA\",0,7)", "TATATATA"), 1.0);
        assert_eq!(ev("motif_count(\"TATA\",1,7)", "TATATATA"), 2.0);
        assert_eq!(ev("motif_count(\"TATA\",0,2)", "TATATATA"), 0.0);
    }

    #[test]
    fn transitions_hand_case() {
        // Pairs in GGAA over [0,3]: GG, GA, AA; only GA is S->W.
        assert_eq!(ev("transitions(S,W,0,3)", "GGAA"), 1.0);
        assert_eq!(ev("transitions(N,N,0,3)", "GGAA"), 3.0);
    }

    #[test]
    fn stack_energy_single_pair_is_table_lookup() {
        assert_eq!(ev("stack_energy(0,1)", "AA"), stacking_energy(b'A', b'A'));
        let expected = stacking_energy(b'G', b'C') + stacking_energy(b'C', b'T');
        assert_eq!(ev("stack_energy(0,2)", "GCT"), expected);
    }

    #[test]
    fn zero_length_pair_windows_are_total() {
        assert_eq!(ev("transitions(N,N,2,2)", "ACGT"), 0.0);
        assert_eq!(ev("stack_energy(2,2)", "ACGT"), 0.0);
    }

    #[test]
    fn raw_matches_one_hot_coordinate() {
        // "ACGT": position 2 is G, so raw(4*2+2)=1 and raw(4*2+0)=0.
        assert_eq!(ev("raw(10)", "ACGT"), 1.0);
        assert_eq!(ev("raw(8)", "ACGT"), 0.0);
    }

    #[test]
    fn arithmetic_and_boolean() {
        assert_eq!(ev("add(count({A},0,3),count({T},0,3))", "AATT"), 4.0);
        assert_eq!(ev("sub(count({A},0,3),count({T},0,3))", "AATT"), 0.0);
        assert_eq!(ev("scale(1/2,count({A},0,3))", "AATT"), 1.0);
        assert_eq!(ev("and(pos_in(0,{A}),pos_in(1,{A}))", "AATT"), 1.0);
        assert_eq!(ev("and(pos_in(0,{A}),pos_in(2,{A}))", "AATT"), 0.0);
        assert_eq!(ev("or(pos_in(0,{T}),pos_in(3,{T}))", "AATT"), 1.0);
        assert_eq!(ev("not(pos_in(0,{T}))", "AATT"), 1.0);
    }
}

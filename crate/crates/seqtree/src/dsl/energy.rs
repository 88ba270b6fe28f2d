//! Dinucleotide stacking-energy table.
//!
//! The table is a declared constant shipped as `assets/stacking_energy.tsv`
//! and echoed into run reports; it is parsed once at first use.

use std::sync::OnceLock;

use crate::seqdata::base_index;

const TABLE_TSV: &str = include_str!("../../assets/stacking_energy.tsv");

fn table() -> &'static [[f64; 4]; 4] {
    static TABLE: OnceLock<[[f64; 4]; 4]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[f64::NAN; 4]; 4];
        for line in TABLE_TSV.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (dinuc, value) = line
                .split_once('\t')
                .expect("stacking table lines are `XY<TAB>value`");
            let bytes = dinuc.as_bytes();
            assert_eq!(bytes.len(), 2, "dinucleotide key `{dinuc}`");
            t[base_index(bytes[0])][base_index(bytes[1])] =
                value.trim().parse().expect("stacking energy value");
        }
        assert!(
            t.iter().flatten().all(|v| v.is_finite()),
            "stacking table must cover all 16 dinucleotides"
        );
        t
    })
}

/// Stacking energy (kcal/mol) for the dinucleotide step `first → second`.
pub fn stacking_energy(first: u8, second: u8) -> f64 {
    table()[base_index(first)][base_index(second)]
}

/// The raw table asset, for echoing into reports.
pub fn stacking_energy_table_text() -> &'static str {
    TABLE_TSV
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_all_sixteen_steps() {
        for &a in b"ACGT" {
            for &b in b"ACGT" {
                assert!(stacking_energy(a, b).is_finite());
            }
        }
    }

    #[test]
    fn has_ten_unique_values_with_reverse_complement_symmetry() {
        let comp = |b: u8| match b {
            b'A' => b'T',
            b'C' => b'G',
            b'G' => b'C',
            _ => b'A',
        };
        let mut values = Vec::new();
        for &a in b"ACGT" {
            for &b in b"ACGT" {
                // XY pairs with the step comp(Y)comp(X) on the other strand.
                assert_eq!(stacking_energy(a, b), stacking_energy(comp(b), comp(a)));
                values.push(stacking_energy(a, b).to_bits());
            }
        }
        values.sort_unstable();
        values.dedup();
        assert_eq!(values.len(), 10);
    }

    #[test]
    fn aa_step_value() {
        assert_eq!(stacking_energy(b'A', b'A'), -1.00);
    }
}

use crate::bundle::bundle_all;
use crate::error::{HdcError, Result};
use crate::hv::{check_same, Hypervector};
use crate::mapping::ItemMemory;
use crate::rng::RandomSource;

/// Record-based encoding: majority over `values[f[j]] ⊗ ids[j]`.
pub fn encode_record(
    features: &[usize],
    ids: &ItemMemory,
    values: &ItemMemory,
    rng: &mut RandomSource,
) -> Result<Hypervector> {
    if features.len() != ids.len() {
        return Err(HdcError::LengthMismatch {
            what: "features vs id memory",
            left: features.len(),
            right: ids.len(),
        });
    }
    check_same(ids.dim(), values.dim())?;
    let terms = features
        .iter()
        .zip(ids.entries())
        .map(|(&f, id)| values.get(f)?.bind(id))
        .collect::<Result<Vec<_>>>()?;
    bundle_all(&terms, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{build_linear, build_orthogonal};

    #[test]
    fn single_feature_is_bound_pair() {
        let mut rng = RandomSource::new(1);
        let ids = build_orthogonal(&mut rng, 1, 512).unwrap();
        let values = build_linear(&mut rng, 5, 512).unwrap();
        let v = encode_record(&[3], &ids, &values, &mut rng).unwrap();
        assert_eq!(v, values.entries()[3].bind(&ids.entries()[0]).unwrap());
    }

    #[test]
    fn consistent_reordering_is_identical() {
        let mut rng = RandomSource::new(2);
        let ids = build_orthogonal(&mut rng, 4, 1000).unwrap();
        let values = build_linear(&mut rng, 5, 1000).unwrap();
        let a = encode_record(&[0, 1, 2, 4], &ids, &values, &mut RandomSource::new(5)).unwrap();
        let mut swapped: Vec<Hypervector> = ids.entries().to_vec();
        swapped.reverse();
        let rev = ItemMemory::from_entries(swapped, ids.kind(), ids.splits()).unwrap();
        let b = encode_record(&[4, 2, 1, 0], &rev, &values, &mut RandomSource::new(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let mut rng = RandomSource::new(3);
        let ids = build_orthogonal(&mut rng, 2, 64).unwrap();
        let values = build_linear(&mut rng, 3, 64).unwrap();
        assert!(matches!(
            encode_record(&[0, 3], &ids, &values, &mut rng),
            Err(HdcError::IndexOutOfRange { index: 3, len: 3 })
        ));
        assert!(encode_record(&[0], &ids, &values, &mut rng).is_err());
    }
}

//! Small reduction helpers shared by the norm code.

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation. The result does not depend on how callers
/// chunk their data, only on the slice contents.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Maximum of a slice, `0.0` for an empty one. NaNs propagate.
pub fn max_of(values: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for &v in values {
        if v.is_nan() {
            return f64::NAN;
        }
        if v > m {
            m = v;
        }
    }
    m
}

/// `(sum_i |v_i|^p)^{1/p}` for p in (0, inf), sup for p = inf. The values are
/// assumed nonnegative.
pub fn lp_aggregate(values: &[f64], p: f64, measure: f64) -> f64 {
    if p.is_infinite() {
        return max_of(values);
    }
    let powered: Vec<f64> = values.iter().map(|v| v.powf(p)).collect();
    (pairwise_sum(&powered) * measure).powf(1.0 / p)
}

/// Least-squares slope of `y` against `x`. Returns 0 when `x` has no spread.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    let den = pairwise_sum(&sxx);
    if den <= 0.0 {
        return 0.0;
    }
    pairwise_sum(&sxy) / den
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Serde helpers writing infinite exponents as the string `"inf"` (JSON has
/// no infinity).
pub mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_infinite() && v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Num(v)
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" || t == "infinity" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(E::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let r: Vec<Repr> = v.iter().map(|x| to_repr(*x)).collect();
            r.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            v.map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((ls_slope(&x, &y) - 2.0).abs() < 1e-15);
        assert_eq!(ls_slope(&[1.0, 1.0], &[0.0, 5.0]), 0.0);
    }

    #[test]
    fn lp_aggregate_sup() {
        assert_eq!(lp_aggregate(&[1.0, 3.0, 2.0], f64::INFINITY, 1.0), 3.0);
        assert!((lp_aggregate(&[3.0, 4.0], 2.0, 1.0) - 5.0).abs() < 1e-15);
    }
}

use super::{compute_ranges, AttributeSpec, Dataset, Instance, Ranges, Value};

/// Mixed-type Euclidean distance: numeric differences scaled by the
/// attribute range (zero for constant attributes), nominal 0/1 mismatch.
///
/// `active = None` uses every attribute of the schema.
pub fn distance(
    a: &Instance,
    b: &Instance,
    schema: &[AttributeSpec],
    ranges: &Ranges,
    active: Option<&[usize]>,
) -> f64 {
    let sq = match active {
        Some(attrs) => attrs
            .iter()
            .map(|&i| contribution(a.values[i], b.values[i], ranges.width(i)))
            .sum::<f64>(),
        None => (0..schema.len())
            .map(|i| contribution(a.values[i], b.values[i], ranges.width(i)))
            .sum(),
    };
    sq.sqrt()
}

#[inline]
fn contribution(x: Value, y: Value, width: f64) -> f64 {
    match (x, y) {
        (Value::Numeric(x), Value::Numeric(y)) => {
            if width > 0.0 {
                let t = (x - y) / width;
                t * t
            } else {
                0.0
            }
        }
        (Value::Nominal(x), Value::Nominal(y)) => {
            if x == y {
                0.0
            } else {
                1.0
            }
        }
        _ => 1.0,
    }
}

/// Precomputed distance configuration: ranges plus the active attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpace {
    ranges: Ranges,
    active: Vec<usize>,
    widths: Vec<f64>,
}

impl DistanceSpace {
    /// Ranges from `d`, all non-class attributes active.
    pub fn for_dataset(d: &Dataset) -> Self {
        Self::new(compute_ranges(d), d.active_attributes())
    }

    pub fn new(ranges: Ranges, active: Vec<usize>) -> Self {
        let widths = active.iter().map(|&a| ranges.width(a)).collect();
        DistanceSpace {
            ranges,
            active,
            widths,
        }
    }

    /// Raw (unscaled) numeric differences, all non-class attributes active.
    pub fn raw(d: &Dataset) -> Self {
        Self::new(Ranges::unit(d.schema()), d.active_attributes())
    }

    pub fn ranges(&self) -> &Ranges {
        &self.ranges
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn squared(&self, a: &Instance, b: &Instance) -> f64 {
        self.active
            .iter()
            .zip(&self.widths)
            .map(|(&i, &w)| contribution(a.values[i], b.values[i], w))
            .sum()
    }

    pub fn distance(&self, a: &Instance, b: &Instance) -> f64 {
        self.squared(a, b).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schema() -> Vec<AttributeSpec> {
        vec![
            AttributeSpec::numeric("n", ""),
            AttributeSpec::nominal("s", vec!["x".into(), "y".into(), "z".into()]),
        ]
    }

    fn inst(n: f64, s: usize) -> Instance {
        Instance::new(vec![Value::Numeric(n), Value::Nominal(s)])
    }

    fn ranges() -> Ranges {
        Ranges::from_bounds(vec![Some((0.0, 10.0)), None])
    }

    #[test]
    fn hand_examples() {
        let s = schema();
        let r = ranges();
        let d = distance(&inst(0.0, 0), &inst(10.0, 1), &s, &r, None);
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(distance(&inst(3.0, 2), &inst(3.0, 2), &s, &r, None), 0.0);
        assert!((distance(&inst(5.0, 0), &inst(10.0, 0), &s, &r, None) - 0.5).abs() < 1e-12);
        assert_eq!(distance(&inst(5.0, 0), &inst(10.0, 1), &s, &r, Some(&[1])), 1.0);
    }

    #[test]
    fn constant_attribute_contributes_nothing() {
        let r = Ranges::from_bounds(vec![Some((4.0, 4.0)), None]);
        assert_eq!(distance(&inst(4.0, 0), &inst(9.0, 0), &schema(), &r, None), 0.0);
    }

    fn arb_inst() -> impl Strategy<Value = Instance> {
        (0.0f64..10.0, 0usize..3).prop_map(|(n, s)| inst(n, s))
    }

    proptest! {
        #[test]
        fn metric_axioms(a in arb_inst(), b in arb_inst(), c in arb_inst()) {
            let s = schema();
            let r = ranges();
            let ab = distance(&a, &b, &s, &r, None);
            let ba = distance(&b, &a, &s, &r, None);
            let bc = distance(&b, &c, &s, &r, None);
            let ac = distance(&a, &c, &s, &r, None);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert_eq!(ab == 0.0, a == b);
            // normalized numeric contribution stays in [0,1] inside the range
            let numeric_part = distance(&a, &b, &s, &r, Some(&[0]));
            prop_assert!((0.0..=1.0).contains(&numeric_part));
        }

        #[test]
        fn space_agrees_with_free_function(a in arb_inst(), b in arb_inst()) {
            let space = DistanceSpace::new(ranges(), vec![0, 1]);
            let free = distance(&a, &b, &schema(), &ranges(), None);
            prop_assert!((space.distance(&a, &b) - free).abs() < 1e-15);
        }
    }
}

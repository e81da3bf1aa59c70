use nalgebra::DVector;
use serde_json::{json, Value};

use crate::cloud::{LabeledDataset, PointCloud};
use crate::error::{Error, Result};
use crate::network::Network;

/// Data after one elementary map, split by class.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub label: String,
    pub classes: Vec<(f64, PointCloud)>,
}

impl Snapshot {
    pub fn dim(&self) -> usize {
        self.classes.first().map_or(0, |(_, c)| c.dim())
    }

    /// Only planar snapshots can be drawn directly.
    pub fn is_planar(&self) -> bool {
        self.dim() == 2
    }
}

/// The data before and after every affine map and activation, in order.
///
/// The first snapshot is the raw data. For a scalar output and exactly two
/// classes a last snapshot thresholds the output at the midpoint of the two
/// class values.
pub fn layer_snapshots(net: &Network, data: &LabeledDataset) -> Result<Vec<Snapshot>> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if net.input_dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: data.dim(),
        });
    }
    let mut current = data.split_by_class();
    let mut out = vec![Snapshot {
        label: "input".into(),
        classes: current.clone(),
    }];
    let mut push = |label: String,
                    f: &dyn Fn(&DVector<f64>) -> DVector<f64>,
                    current: &mut Vec<(f64, PointCloud)>|
     -> Result<()> {
        for (_, cloud) in current.iter_mut() {
            *cloud = cloud.map(|x| Ok(f(x)))?;
        }
        out.push(Snapshot {
            label,
            classes: current.clone(),
        });
        Ok(())
    };
    for (k, layer) in net.layers().iter().enumerate() {
        push(
            format!("affine {}", k + 1),
            &|x| layer.pre_activation(x),
            &mut current,
        )?;
        let act = layer.activation;
        push(
            format!("{} {}", act.name(), k + 1),
            &|x| x.map(|t| act.apply(t)),
            &mut current,
        )?;
    }
    push(
        "final affine".into(),
        &|x| net.final_weights() * x + net.final_bias(),
        &mut current,
    )?;
    if let [(lo, _), (hi, _)] = current.as_slice() {
        if net.output_dim() == 1 {
            let (lo, hi) = (*lo, *hi);
            let mid = 0.5 * (lo + hi);
            push(
                "threshold".into(),
                &|y| DVector::from_element(1, if y[0] >= mid { hi } else { lo }),
                &mut current,
            )?;
        }
    }
    Ok(out)
}

/// `[{"label": .., "classes": [{"class": .., "points": [[..], ..]}]}]`.
pub fn snapshots_to_json(snapshots: &[Snapshot]) -> String {
    let doc: Vec<Value> = snapshots
        .iter()
        .map(|s| {
            json!({
                "label": s.label,
                "classes": s.classes.iter().map(|(class, cloud)| json!({
                    "class": class,
                    "points": cloud.to_rows(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut text = serde_json::to_string(&doc).expect("serialising a Value");
    text.push('\n');
    text
}

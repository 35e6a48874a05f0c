//! Binary model and mask files.
//!
//! All integers are little-endian; every float is its raw IEEE-754 bit
//! pattern (`f64::to_le_bytes`), so a round trip is bit-exact.
//!
//! Model file (`.snn`):
//!
//! | field | encoding |
//! |---|---|
//! | magic | `b"SNN1"` |
//! | version | `u32`, currently 1 |
//! | width count `k+1` | `u32` |
//! | widths | `k+1` × `u32` |
//! | per layer: activation tag | `u8`: 0 identity, 1 sigmoid, 2 relu, 3 modified-relu, 4 thresholded-sigmoid |
//! | per layer: epsilon kind | `u8`: 0 none, 1 scalar, 2 per-neuron |
//! | per layer: epsilon values | 0, 1 or `n_l` × `f64` |
//! | weight count, bias count | `u64`, `u64` |
//! | weights | row-major, layer after layer, `f64` each |
//! | biases | layer after layer, `f64` each |
//! | has mask | `u8`: 0 or 1 |
//! | mask | one `u8` (0 frozen, 1 active) per weight, same order as weights |
//!
//! Mask sidecar (`.mask`): `b"SNNM"`, `u32` version, `u32` width count,
//! widths as `u32`, then one `u8` per weight.
//!
//! The version is checked before anything after it is read. Trailing bytes
//! are rejected.

use std::path::Path;

use crate::activation::{ActivationKind, ActivationTag, Epsilon};
use crate::error::{Error, Result};
use crate::network::{LayerParams, Network, NetworkShape};
use crate::sparsity::PruneMask;
use crate::tensor::{Matrix, Vector};

pub const MODEL_MAGIC: [u8; 4] = *b"SNN1";
pub const MASK_MAGIC: [u8; 4] = *b"SNNM";
pub const FORMAT_VERSION: u32 = 1;

fn tag_byte(tag: ActivationTag) -> u8 {
    match tag {
        ActivationTag::Identity => 0,
        ActivationTag::Sigmoid => 1,
        ActivationTag::Relu => 2,
        ActivationTag::ModifiedRelu => 3,
        ActivationTag::ThresholdedSigmoid => 4,
    }
}

fn tag_from_byte(b: u8) -> Result<ActivationTag> {
    ActivationTag::ALL
        .get(b as usize)
        .copied()
        .ok_or_else(|| Error::ModelPayload(format!("unknown activation tag {b}")))
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
    fn header(&mut self, magic: [u8; 4], shape: &NetworkShape) {
        self.0.extend_from_slice(&magic);
        self.u32(FORMAT_VERSION as usize);
        self.u32(shape.widths().len());
        for &w in shape.widths() {
            self.u32(w);
        }
    }
    fn mask(&mut self, mask: &PruneMask) {
        for layer in mask.layers() {
            self.0.extend(layer.iter().map(|&a| a as u8));
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::ModelPayload(format!(
                "truncated: need {n} bytes at offset {}, file has {}",
                self.at,
                self.bytes.len()
            ))
        })?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::ModelPayload("length overflow".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn header(&mut self, magic: [u8; 4]) -> Result<NetworkShape> {
        let found: [u8; 4] = self
            .bytes
            .get(..4)
            .and_then(|b| b.try_into().ok())
            .unwrap_or([0; 4]);
        if found != magic {
            return Err(Error::ModelBadMagic {
                expected: magic,
                found,
            });
        }
        self.at = 4;
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelVersion {
                supported: FORMAT_VERSION,
                found: version,
            });
        }
        let count = self.u32()? as usize;
        // Each width occupies 4 bytes; reject absurd counts before allocating.
        if count > self.bytes.len() / 4 {
            return Err(Error::ModelPayload(format!("width count {count} exceeds file size")));
        }
        let widths = (0..count)
            .map(|_| self.u32().map(|w| w as usize))
            .collect::<Result<Vec<_>>>()?;
        NetworkShape::new(widths).map_err(|e| Error::ModelPayload(e.to_string()))
    }
    fn mask(&mut self, shape: &NetworkShape) -> Result<PruneMask> {
        let layers = shape
            .widths()
            .windows(2)
            .map(|p| {
                self.take(p[0] * p[1])?
                    .iter()
                    .map(|&b| match b {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::ModelPayload(format!("mask byte {other} is not 0 or 1"))),
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PruneMask::from_layers(layers))
    }
    fn finish(&self) -> Result<()> {
        if self.at != self.bytes.len() {
            return Err(Error::ModelPayload(format!(
                "{} trailing bytes",
                self.bytes.len() - self.at
            )));
        }
        Ok(())
    }
}

/// Fails when the mask does not fit the network or a frozen weight is nonzero.
pub fn encode(net: &Network, mask: Option<&PruneMask>) -> Result<Vec<u8>> {
    if let Some(m) = mask {
        m.check(net)?;
        m.check_zeros(net)?;
    }
    let mut w = Writer(Vec::new());
    w.header(MODEL_MAGIC, net.shape());
    for layer in net.layers() {
        let act = layer.activation();
        w.u8(tag_byte(act.tag()));
        match act.epsilon() {
            None => w.u8(0),
            Some(Epsilon::Scalar(e)) => {
                w.u8(1);
                w.f64s(&[*e]);
            }
            Some(Epsilon::PerNeuron(v)) => {
                w.u8(2);
                w.f64s(v);
            }
        }
    }
    let count = net.param_count();
    w.u64(count.wt);
    w.u64(count.biases);
    w.f64s(&net.flatten_params());
    match mask {
        None => w.u8(0),
        Some(m) => {
            w.u8(1);
            w.mask(m);
        }
    }
    Ok(w.0)
}

pub fn decode(bytes: &[u8]) -> Result<(Network, Option<PruneMask>)> {
    let mut r = Reader { bytes, at: 0 };
    let shape = r.header(MODEL_MAGIC)?;

    let mut activations = Vec::with_capacity(shape.depth());
    for &width in &shape.widths()[1..] {
        let tag = tag_from_byte(r.u8()?)?;
        let epsilon = match r.u8()? {
            0 => None,
            1 => Some(Epsilon::Scalar(r.f64s(1)?[0])),
            2 => Some(Epsilon::PerNeuron(r.f64s(width)?)),
            other => return Err(Error::ModelPayload(format!("unknown epsilon kind {other}"))),
        };
        let kind = ActivationKind::new(tag, epsilon).map_err(|e| Error::ModelPayload(e.to_string()))?;
        activations.push(kind);
    }

    let count = shape.param_count();
    let (wt, biases) = (r.u64()?, r.u64()?);
    if (wt, biases) != (count.wt as u64, count.biases as u64) {
        return Err(Error::ModelPayload(format!(
            "header declares {wt} weights + {biases} biases, shape {shape} has {} + {}",
            count.wt, count.biases
        )));
    }
    let weights = r.f64s(count.wt)?;
    let bias_values = r.f64s(count.biases)?;

    let mut layers = Vec::with_capacity(shape.depth());
    let (mut wi, mut bi) = (0, 0);
    for (p, act) in shape.widths().windows(2).zip(activations) {
        let (fan_in, fan_out) = (p[0], p[1]);
        let m = Matrix::from_row_major(fan_out, fan_in, weights[wi..wi + fan_in * fan_out].to_vec())?;
        let b = Vector::new(bias_values[bi..bi + fan_out].to_vec());
        wi += fan_in * fan_out;
        bi += fan_out;
        layers.push(LayerParams::new(m, b, act)?);
    }
    let net = Network::from_layers(layers)?;

    let mask = match r.u8()? {
        0 => None,
        1 => Some(r.mask(&shape)?),
        other => return Err(Error::ModelPayload(format!("mask flag {other} is not 0 or 1"))),
    };
    r.finish()?;
    if let Some(m) = &mask {
        m.check_zeros(&net)?;
    }
    Ok((net, mask))
}

pub fn save(net: &Network, mask: Option<&PruneMask>, path: &Path) -> Result<()> {
    let bytes = encode(net, mask)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(Network, Option<PruneMask>)> {
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn encode_mask(shape: &NetworkShape, mask: &PruneMask) -> Result<Vec<u8>> {
    let fits = mask.layers().len() == shape.depth()
        && mask
            .layers()
            .iter()
            .zip(shape.widths().windows(2))
            .all(|(m, p)| m.len() == p[0] * p[1]);
    if !fits {
        return Err(Error::shape(
            "mask encode",
            format!("shape {shape}"),
            format!("mask with {} entries", mask.len()),
        ));
    }
    let mut w = Writer(Vec::new());
    w.header(MASK_MAGIC, shape);
    w.mask(mask);
    Ok(w.0)
}

pub fn decode_mask(bytes: &[u8]) -> Result<(NetworkShape, PruneMask)> {
    let mut r = Reader { bytes, at: 0 };
    let shape = r.header(MASK_MAGIC)?;
    let mask = r.mask(&shape)?;
    r.finish()?;
    Ok((shape, mask))
}

pub fn save_mask(shape: &NetworkShape, mask: &PruneMask, path: &Path) -> Result<()> {
    let bytes = encode_mask(shape, mask)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_mask(path: &Path) -> Result<(NetworkShape, PruneMask)> {
    decode_mask(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsity::prune_to_target;
    use proptest::prelude::*;

    fn net(widths: &[usize], seed: u64) -> Network {
        let shape = NetworkShape::new(widths.to_vec()).unwrap();
        let acts = vec![ActivationKind::sigmoid(); shape.depth()];
        Network::init(&shape, &acts, seed).unwrap()
    }

    fn bits(net: &Network) -> Vec<u64> {
        net.flatten_params().iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn header_declares_param_counts() {
        let bytes = encode(&net(&[3, 2, 1], 0), None).unwrap();
        assert_eq!(&bytes[..4], b"SNN1");
        // magic + version + count + 3 widths + 2 × (tag, eps kind)
        let at = 4 + 4 + 4 + 12 + 4;
        let wt = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let biases = u64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
        assert_eq!((wt, biases), (8, 3));
        assert_eq!(bytes.len(), at + 16 + 11 * 8 + 1);
    }

    #[test]
    fn special_values_survive() {
        let mut n = net(&[2, 2], 1);
        let w = n.layer_mut(0).weights_mut().as_mut_slice();
        w[0] = -0.0;
        w[1] = f64::MIN_POSITIVE / 4.0;
        w[2] = f64::MAX;
        w[3] = -f64::MIN_POSITIVE;
        let (back, mask) = decode(&encode(&n, None).unwrap()).unwrap();
        assert_eq!(bits(&back), bits(&n));
        assert!(mask.is_none());
        assert!(back.layers()[0].weights().as_slice()[0].is_sign_negative());
    }

    #[test]
    fn activations_and_epsilons_survive() {
        let shape = NetworkShape::new(vec![2, 3, 3, 2, 2]).unwrap();
        let acts = vec![
            ActivationKind::thresholded_sigmoid_per_neuron(vec![0.1, 0.0, 2.5]).unwrap(),
            ActivationKind::modified_relu(0.3).unwrap(),
            ActivationKind::relu(),
            ActivationKind::identity(),
        ];
        let n = Network::init(&shape, &acts, 4).unwrap();
        let (back, _) = decode(&encode(&n, None).unwrap()).unwrap();
        assert_eq!(back.activations(), acts);
    }

    #[test]
    fn embedded_mask_and_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let (pruned, mask, _) = prune_to_target(&net(&[4, 3, 2], 2), 0.5).unwrap();
        let path = dir.path().join("m.snn");
        save(&pruned, Some(&mask), &path).unwrap();
        let (back, back_mask) = load(&path).unwrap();
        assert_eq!(bits(&back), bits(&pruned));
        assert_eq!(back_mask.as_ref(), Some(&mask));

        let again = dir.path().join("again.snn");
        save(&back, back_mask.as_ref(), &again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());

        let mpath = dir.path().join("m.mask");
        save_mask(pruned.shape(), &mask, &mpath).unwrap();
        let (shape, m) = load_mask(&mpath).unwrap();
        assert_eq!(&shape, pruned.shape());
        assert_eq!(m, mask);
    }

    #[test]
    fn distinct_diagnostics() {
        let n = net(&[3, 2, 1], 0);
        let good = encode(&n, None).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::ModelBadMagic { .. })));
        assert!(matches!(decode(b"SN"), Err(Error::ModelBadMagic { .. })));

        let mut bad = good.clone();
        bad[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(decode(&bad), Err(Error::ModelVersion { supported: 1, found: 2 })));
        // The version gate fires even when nothing else is readable.
        assert!(matches!(decode(&bad[..8]), Err(Error::ModelVersion { .. })));

        assert!(matches!(decode(&good[..good.len() - 9]), Err(Error::ModelPayload(_))));
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(Error::ModelPayload(_))));

        let mut bad = good.clone();
        bad[24] = 9;
        assert!(matches!(decode(&bad), Err(Error::ModelPayload(_))));

        let mut bad = good.clone();
        bad[28..36].copy_from_slice(&9u64.to_le_bytes());
        assert!(matches!(decode(&bad), Err(Error::ModelPayload(_))));
    }

    #[test]
    fn mask_violation_is_reported() {
        let mut n = net(&[2, 1], 0);
        n.layer_mut(0).weights_mut().as_mut_slice()[1] = 0.0;
        let mask = PruneMask::from_layers(vec![vec![true, false]]);
        let mut bytes = encode(&n, Some(&mask)).unwrap();
        // Second weight sits after header (4+4+4+8), layer meta (2) and counts (16).
        let at = 20 + 2 + 16 + 8;
        bytes[at..at + 8].copy_from_slice(&0.3f64.to_le_bytes());
        assert!(matches!(
            decode(&bytes),
            Err(Error::MaskViolation { layer: 0, index: 1, .. })
        ));

        n.layer_mut(0).weights_mut().as_mut_slice()[1] = 0.3;
        assert!(matches!(encode(&n, Some(&mask)), Err(Error::MaskViolation { .. })));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let n = net(&[2, 1], 0);
        let err = save(&n, None, Path::new("/nonexistent-dir/x/model.snn")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    proptest! {
        #[test]
        fn bitwise_round_trip(seed: u64, hidden in 1usize..6, raw in proptest::collection::vec(any::<u64>(), 8)) {
            let mut n = net(&[3, hidden, 2], seed);
            // Overwrite a few weights with arbitrary finite bit patterns.
            let w = n.layer_mut(0).weights_mut().as_mut_slice();
            for (slot, b) in w.iter_mut().zip(&raw) {
                let x = f64::from_bits(*b);
                if x.is_finite() {
                    *slot = x;
                }
            }
            let bytes = encode(&n, None).unwrap();
            let (back, _) = decode(&bytes).unwrap();
            prop_assert_eq!(bits(&back), bits(&n));
            prop_assert_eq!(encode(&back, None).unwrap(), bytes);
        }
    }
}

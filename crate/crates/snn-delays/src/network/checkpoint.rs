//! Binary network checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic  b"SNNC"
//! u32    version (currently 1)
//! u32    c_in
//! u32    c_out
//! f64    dropout_rate
//! u32    n_layers
//! per layer:
//!   u32  h
//!   u8   model        (0 lif, 1 rlif, 2 adlif, 3 radlif)
//!   u32  n_d
//!   u8   scheme kind  (0 ones, 1 lindecay, 2 expdecay, 3 uniform)
//!   u8   trainable    (0 or 1)
//! per layer payload, in layer order:
//!   f64[h*fan_in]  w
//!   f64[h*h]       v                (recurrent models only)
//!   f64[h] gamma, f64[h] bias, f64[h] running_mean, f64[h] running_var
//!   f64 epsilon, f64 momentum
//!   f64[h] alpha
//!   f64[h] beta, f64[h] adapt_a, f64[h] adapt_b   (adaptive models only)
//!   f64[h*n_d]     delay rows
//! readout payload:
//!   f64[c_out*h_last] w_out
//!   f64[c_out] gamma, bias, running_mean, running_var
//!   f64 epsilon, f64 momentum
//! ```
//!
//! Every f64 is written from its exact bit pattern, so save/load round-trips
//! are bit-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, SnnError};
use crate::math::Matrix;
use crate::network::batchnorm::BatchNorm;
use crate::network::{AdaptParams, HiddenLayer, LayerSpec, Network, NetworkSpec, NeuronModel};
use crate::neuron::{DelayKind, DelayScheme};

const MAGIC: &[u8; 4] = b"SNNC";
const VERSION: u32 = 1;

fn model_code(m: NeuronModel) -> u8 {
    match m {
        NeuronModel::Lif => 0,
        NeuronModel::Rlif => 1,
        NeuronModel::AdLif => 2,
        NeuronModel::RadLif => 3,
    }
}

fn model_from_code(c: u8) -> Result<NeuronModel> {
    Ok(match c {
        0 => NeuronModel::Lif,
        1 => NeuronModel::Rlif,
        2 => NeuronModel::AdLif,
        3 => NeuronModel::RadLif,
        _ => return Err(SnnError::Checkpoint(format!("bad model code {c}"))),
    })
}

fn kind_code(k: DelayKind) -> u8 {
    match k {
        DelayKind::Ones => 0,
        DelayKind::LinearDecay => 1,
        DelayKind::ExpDecay => 2,
        DelayKind::Uniform => 3,
    }
}

fn kind_from_code(c: u8) -> Result<DelayKind> {
    Ok(match c {
        0 => DelayKind::Ones,
        1 => DelayKind::LinearDecay,
        2 => DelayKind::ExpDecay,
        3 => DelayKind::Uniform,
        _ => return Err(SnnError::Checkpoint(format!("bad scheme code {c}"))),
    })
}

struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        self.inner.write_all(&[v])?;
        Ok(())
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        self.inner.write_all(&v.to_le_bytes())?;
        Ok(())
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        self.inner.write_all(&v.to_le_bytes())?;
        Ok(())
    }
    fn f64s(&mut self, vs: &[f64]) -> Result<()> {
        for &v in vs {
            self.f64(v)?;
        }
        Ok(())
    }
    fn bn(&mut self, bn: &BatchNorm) -> Result<()> {
        self.f64s(&bn.gamma)?;
        self.f64s(&bn.bias)?;
        self.f64s(&bn.running_mean)?;
        self.f64s(&bn.running_var)?;
        self.f64(bn.epsilon)?;
        self.f64(bn.momentum)
    }
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.inner.read_exact(&mut b)?;
        Ok(b[0])
    }
    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.inner.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.inner.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let data = self.f64s(rows * cols)?;
        let mut m = Matrix::zeros(rows, cols);
        m.as_mut_slice().copy_from_slice(&data);
        Ok(m)
    }
    fn bn(&mut self, channels: usize) -> Result<BatchNorm> {
        Ok(BatchNorm {
            gamma: self.f64s(channels)?,
            bias: self.f64s(channels)?,
            running_mean: self.f64s(channels)?,
            running_var: self.f64s(channels)?,
            epsilon: self.f64()?,
            momentum: self.f64()?,
        })
    }
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    let mut w = Writer {
        inner: BufWriter::new(File::create(path)?),
    };
    w.inner.write_all(MAGIC)?;
    w.u32(VERSION)?;
    w.u32(net.spec.c_in as u32)?;
    w.u32(net.spec.c_out as u32)?;
    w.f64(net.spec.dropout_rate)?;
    w.u32(net.spec.layers.len() as u32)?;
    for layer in &net.spec.layers {
        w.u32(layer.h as u32)?;
        w.u8(model_code(layer.model))?;
        w.u32(layer.n_d as u32)?;
        w.u8(kind_code(layer.scheme.kind))?;
        w.u8(layer.scheme.trainable as u8)?;
    }
    for layer in &net.layers {
        w.f64s(layer.w.as_slice())?;
        if let Some(v) = &layer.v {
            w.f64s(v.as_slice())?;
        }
        w.bn(&layer.bn)?;
        w.f64s(&layer.alpha)?;
        if let Some(adapt) = &layer.adapt {
            w.f64s(&adapt.beta)?;
            w.f64s(&adapt.a)?;
            w.f64s(&adapt.b)?;
        }
        w.f64s(layer.delay_w.as_slice())?;
    }
    w.f64s(net.w_out.as_slice())?;
    w.bn(&net.bn_out)?;
    w.inner.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network> {
    let mut r = Reader {
        inner: BufReader::new(File::open(path)?),
    };
    let mut magic = [0u8; 4];
    r.inner.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnnError::Checkpoint(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(SnnError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let c_in = r.u32()? as usize;
    let c_out = r.u32()? as usize;
    let dropout_rate = r.f64()?;
    let n_layers = r.u32()? as usize;
    let mut layer_specs = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let h = r.u32()? as usize;
        let model = model_from_code(r.u8()?)?;
        let n_d = r.u32()? as usize;
        let kind = kind_from_code(r.u8()?)?;
        let trainable = r.u8()? != 0;
        layer_specs.push(LayerSpec {
            h,
            model,
            n_d,
            scheme: DelayScheme { kind, trainable },
        });
    }
    let spec = NetworkSpec {
        c_in,
        c_out,
        layers: layer_specs,
        dropout_rate,
    };
    spec.validate()?;

    let mut layers = Vec::with_capacity(n_layers);
    let mut fan_in = c_in;
    for lspec in &spec.layers {
        let h = lspec.h;
        let w = r.matrix(h, fan_in)?;
        let v = if lspec.recurrent() {
            Some(r.matrix(h, h)?)
        } else {
            None
        };
        let bn = r.bn(h)?;
        let alpha = r.f64s(h)?;
        let adapt = if lspec.model.adaptive() {
            Some(AdaptParams {
                beta: r.f64s(h)?,
                a: r.f64s(h)?,
                b: r.f64s(h)?,
            })
        } else {
            None
        };
        let delay_w = r.matrix(h, lspec.n_d)?;
        layers.push(HiddenLayer {
            spec: lspec.clone(),
            w,
            v,
            bn,
            alpha,
            adapt,
            delay_w,
        });
        fan_in = h;
    }
    let w_out = r.matrix(c_out, fan_in)?;
    let bn_out = r.bn(c_out)?;
    // Trailing garbage means the file does not match its header.
    let mut extra = [0u8; 1];
    if r.inner.read(&mut extra)? != 0 {
        return Err(SnnError::Checkpoint("trailing bytes after payload".into()));
    }
    Ok(Network {
        spec,
        layers,
        w_out,
        bn_out,
    })
}

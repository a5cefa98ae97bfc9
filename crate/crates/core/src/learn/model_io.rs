//! Binary model files and CSV training histories.
//!
//! Model layout (all integers and floats little-endian):
//!
//! ```text
//! magic     8 bytes  "RISBLKMD"
//! version   u32      1
//! tag       u8       caller-defined (scenario code)
//! flags     u8       bit 0: uses image, bit 1: uses rate
//! reserved  u16      0
//! tensors   u32      4, then per tensor: rank u32, dims u64 × rank
//! weights   f64      W1, b1, W2, b2 in row-major order
//! rate      f64 × 2  mean, std
//! image     u64 n, then f64 × n means, f64 × n stds
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::mlp::MlpParams;
use super::standardize::Standardizer;
use super::tensor::Tensor;
use super::train::HistoryRecord;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &[u8; 8] = b"RISBLKMD";
pub const MODEL_VERSION: u32 = 1;

/// Parameters plus everything needed to featurize inputs at inference time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T> {
    pub tag: u8,
    pub uses_image: bool,
    pub uses_rate: bool,
    pub standardizer: Standardizer,
    pub params: MlpParams<T>,
}

impl<T: Scalar> TrainedModel<T> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.push(self.tag);
        out.push(u8::from(self.uses_image) | (u8::from(self.uses_rate) << 1));
        out.extend_from_slice(&0u16.to_le_bytes());
        let tensors = self.params.tensors();
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for t in tensors {
            out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for d in t.shape() {
                out.extend_from_slice(&(*d as u64).to_le_bytes());
            }
        }
        for t in tensors {
            for v in t.data() {
                out.extend_from_slice(&v.to_f64_lossless().to_le_bytes());
            }
        }
        let s = &self.standardizer;
        out.extend_from_slice(&s.rate_mean.to_le_bytes());
        out.extend_from_slice(&s.rate_std.to_le_bytes());
        out.extend_from_slice(&(s.image_mean.len() as u64).to_le_bytes());
        for v in s.image_mean.iter().chain(&s.image_std) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let fail = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8).ok_or_else(|| fail("truncated header"))? != MODEL_MAGIC {
            return Err(fail("bad magic"));
        }
        let version = r.u32().ok_or_else(|| fail("truncated header"))?;
        if version != MODEL_VERSION {
            return Err(fail(&format!("unsupported model version {version}")));
        }
        let tag = r.u8().ok_or_else(|| fail("truncated header"))?;
        let flags = r.u8().ok_or_else(|| fail("truncated header"))?;
        r.take(2).ok_or_else(|| fail("truncated header"))?;
        let n_tensors = r.u32().ok_or_else(|| fail("truncated shape table"))? as usize;
        if n_tensors != 4 {
            return Err(fail(&format!("expected 4 tensors, found {n_tensors}")));
        }
        let mut shapes = Vec::with_capacity(4);
        for _ in 0..n_tensors {
            let rank = r.u32().ok_or_else(|| fail("truncated shape table"))? as usize;
            if rank > 8 {
                return Err(fail("implausible tensor rank"));
            }
            let mut dims = Vec::with_capacity(rank);
            for _ in 0..rank {
                dims.push(r.u64().ok_or_else(|| fail("truncated shape table"))? as usize);
            }
            shapes.push(dims);
        }
        let mut tensors = Vec::with_capacity(4);
        for shape in shapes {
            let n: usize = shape.iter().product();
            let mut data = Vec::with_capacity(n);
            for _ in 0..n {
                data.push(T::lit(r.f64().ok_or_else(|| fail("truncated weights"))?));
            }
            tensors.push(Tensor::new(shape, data).map_err(|e| fail(&e.to_string()))?);
        }
        let rate_mean = r.f64().ok_or_else(|| fail("truncated statistics"))?;
        let rate_std = r.f64().ok_or_else(|| fail("truncated statistics"))?;
        let n = r.u64().ok_or_else(|| fail("truncated statistics"))? as usize;
        let mut stats = Vec::with_capacity(2 * n.min(1 << 24));
        for _ in 0..2 * n {
            stats.push(r.f64().ok_or_else(|| fail("truncated statistics"))?);
        }
        if r.pos != bytes.len() {
            return Err(fail("trailing bytes"));
        }
        let image_std = stats.split_off(n);
        let mut it = tensors.into_iter();
        let params = MlpParams::from_tensors(
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
            it.next().unwrap(),
        )
        .map_err(|e| fail(&e.to_string()))?;
        if params.input_dim() != n {
            return Err(fail("standardization statistics do not match the input dimension"));
        }
        Ok(TrainedModel {
            tag,
            uses_image: flags & 1 != 0,
            uses_rate: flags & 2 != 0,
            standardizer: Standardizer {
                image_mean: stats,
                image_std,
                rate_mean,
                rate_std,
            },
            params,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Missing(path.to_path_buf()));
        }
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
}

/// `iteration,epoch,lr,loss,train_accuracy` with a header row.
pub fn history_csv(history: &[HistoryRecord]) -> String {
    let mut s = String::from("iteration,epoch,lr,loss,train_accuracy\n");
    for r in history {
        let _ = writeln!(
            s,
            "{},{},{:e},{:.9},{:.6}",
            r.iteration, r.epoch, r.lr, r.loss, r.train_accuracy
        );
    }
    s
}

pub fn parse_history_csv(text: &str, path: &Path) -> Result<Vec<HistoryRecord>> {
    let fail = |line: usize, reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: format!("line {line}: {reason}"),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(fail(i + 1, "expected 5 columns"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| fail(i + 1, "not a number"));
        let int = |s: &str| s.trim().parse::<usize>().map_err(|_| fail(i + 1, "not an integer"));
        out.push(HistoryRecord {
            iteration: int(f[0])?,
            epoch: int(f[1])?,
            lr: num(f[2])?,
            loss: num(f[3])?,
            train_accuracy: num(f[4])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(seed: u64, d_in: usize, hidden: usize) -> TrainedModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = Standardizer::identity(d_in);
        st.rate_mean = 1.25;
        st.rate_std = 0.5;
        if d_in > 0 {
            st.image_mean[0] = -3.0;
        }
        TrainedModel {
            tag: 3,
            uses_image: true,
            uses_rate: false,
            standardizer: st,
            params: MlpParams::init(d_in, hidden, &mut rng),
        }
    }

    proptest! {
        #[test]
        fn model_bytes_round_trip(seed in 0u64..1000, d_in in 0usize..20, hidden in 0usize..8) {
            let m = model(seed, d_in, hidden);
            let back = TrainedModel::<f64>::from_bytes(&m.to_bytes(), Path::new("m")).unwrap();
            prop_assert_eq!(back, m);
        }
    }

    #[test]
    fn rejects_corruption() {
        let bytes = model(1, 4, 3).to_bytes();
        let p = Path::new("m");
        assert!(TrainedModel::<f64>::from_bytes(&bytes[..bytes.len() - 1], p).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(TrainedModel::<f64>::from_bytes(&bad, p).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(TrainedModel::<f64>::from_bytes(&extra, p).is_err());
    }

    #[test]
    fn history_csv_round_trip() {
        let h = vec![
            HistoryRecord {
                iteration: 1,
                epoch: 1,
                lr: 1e-3,
                loss: 1.0986,
                train_accuracy: 0.34,
            },
            HistoryRecord {
                iteration: 2,
                epoch: 1,
                lr: 1e-3,
                loss: 0.5,
                train_accuracy: 0.8,
            },
        ];
        let text = history_csv(&h);
        assert!(text.starts_with("iteration,epoch,lr,loss,train_accuracy\n"));
        let back = parse_history_csv(&text, Path::new("h")).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].iteration, 2);
        assert!((back[0].loss - 1.0986).abs() < 1e-9);
    }
}

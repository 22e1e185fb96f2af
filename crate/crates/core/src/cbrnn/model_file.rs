//! Self-describing text serialization of a [`TrainedModel`].
//!
//! Sections appear in a fixed order; reals are written with the scalar's
//! full round-trip precision (17 significant digits for `f64`), so loading a
//! file and saving it again reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::params::DENSE_NAMES;
use super::{Activation, CbrnnParams, LossConfig, ModelError, TrainConfig, TrainedModel};
use crate::corpus::Vocabulary;
use crate::embeddings::EmbeddingTable;
use crate::{Matrix, Scalar};

const MAGIC: &str = "cbrnn-model";
const VERSION: u32 = 1;

fn real(v: f64) -> String {
    v.to_exact_string()
}

fn write_matrix<T: Scalar>(out: &mut String, name: &str, rows: usize, cols: usize, data: &[T]) {
    writeln!(out, "{name} {rows} {cols}").unwrap();
    for r in 0..rows {
        let line: Vec<String> = data[r * cols..(r + 1) * cols]
            .iter()
            .map(|v| v.to_exact_string())
            .collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
}

impl<T: Scalar> TrainedModel<T> {
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let c = &self.config;
        let p = &self.params;
        writeln!(o, "{MAGIC} {VERSION}").unwrap();
        writeln!(o, "scalar {}", T::NAME).unwrap();
        writeln!(o, "activation {}", p.activation.name()).unwrap();
        writeln!(o, "train_config").unwrap();
        writeln!(o, "learning_rate {}", real(c.learning_rate)).unwrap();
        writeln!(o, "epochs {}", c.epochs).unwrap();
        writeln!(o, "seed {}", c.seed).unwrap();
        writeln!(o, "window {}", c.window).unwrap();
        writeln!(o, "hidden {}", c.hidden).unwrap();
        writeln!(o, "embed_dim {}", c.embed_dim).unwrap();
        writeln!(o, "min_count {}", c.min_count).unwrap();
        writeln!(o, "clip_norm {}", real(c.clip_norm)).unwrap();
        writeln!(o, "shuffle {}", c.shuffle).unwrap();
        writeln!(o, "trainable_embeddings {}", c.trainable_embeddings).unwrap();
        writeln!(o, "loss_config").unwrap();
        writeln!(o, "gamma {}", real(self.loss.gamma)).unwrap();
        writeln!(o, "m_plus {}", real(self.loss.m_plus)).unwrap();
        writeln!(o, "m_minus {}", real(self.loss.m_minus)).unwrap();
        writeln!(o, "labels {}", self.labels.len()).unwrap();
        for l in &self.labels {
            writeln!(o, "{l}").unwrap();
        }
        writeln!(o, "vocabulary {}", self.vocab.len()).unwrap();
        for t in self.vocab.tokens() {
            writeln!(o, "{t}").unwrap();
        }
        let e = &p.embeddings.matrix;
        write_matrix(&mut o, "embeddings", e.rows(), e.cols(), e.as_slice());
        let shapes = [
            p.u_f.shape(),
            p.u_b.shape(),
            p.w_f.shape(),
            p.w_b.shape(),
            p.w_bi.shape(),
            p.w_hy.shape(),
            (1, p.b_y.len()),
        ];
        for ((name, (r, cc)), data) in DENSE_NAMES.iter().zip(shapes).zip(p.dense()) {
            write_matrix(&mut o, name, r, cc, data);
        }
        writeln!(o, "end").unwrap();
        o
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let mut r = Reader {
            lines: text.split('\n').collect(),
            pos: 0,
        };
        let header: Vec<&str> = r.fields()?;
        if header != [MAGIC, &VERSION.to_string()] {
            return Err(r.error(format!("expected `{MAGIC} {VERSION}` header")));
        }
        let scalar: String = r.value("scalar")?;
        if scalar != T::NAME {
            return Err(r.error(format!("model stores {scalar}, loading as {}", T::NAME)));
        }
        let act: String = r.value("activation")?;
        let activation = Activation::from_name(&act).ok_or_else(|| r.error(format!("unknown activation {act}")))?;
        r.keyword("train_config")?;
        let config = TrainConfig {
            learning_rate: r.value("learning_rate")?,
            epochs: r.value("epochs")?,
            seed: r.value("seed")?,
            window: r.value("window")?,
            hidden: r.value("hidden")?,
            embed_dim: r.value("embed_dim")?,
            min_count: r.value("min_count")?,
            clip_norm: r.value("clip_norm")?,
            shuffle: r.value("shuffle")?,
            trainable_embeddings: r.value("trainable_embeddings")?,
        };
        r.keyword("loss_config")?;
        let loss = LossConfig {
            gamma: r.value("gamma")?,
            m_plus: r.value("m_plus")?,
            m_minus: r.value("m_minus")?,
        };
        let n_labels: usize = r.value("labels")?;
        let labels = r.raw_lines(n_labels)?;
        let n_vocab: usize = r.value("vocabulary")?;
        let line = r.pos + 1;
        let vocab = Vocabulary::from_tokens(r.raw_lines(n_vocab)?).map_err(|e| ModelError::ModelFile {
            line,
            message: e.to_string(),
        })?;
        let embeddings = r.matrix::<T>("embeddings")?;
        let mut dense = Vec::with_capacity(DENSE_NAMES.len());
        for name in DENSE_NAMES {
            dense.push(r.matrix::<T>(name)?);
        }
        r.keyword("end")?;
        if r.lines[r.pos..].iter().any(|l| !l.is_empty()) {
            return Err(r.error("trailing content after `end`".into()));
        }
        let b_y = dense.pop().expect("b_y").as_slice().to_vec();
        let mut it = dense.into_iter();
        let mut next = || it.next().expect("dense tensor");
        let params = CbrnnParams {
            window: config.window,
            embeddings: EmbeddingTable {
                matrix: embeddings,
                trainable: config.trainable_embeddings,
            },
            u_f: next(),
            u_b: next(),
            w_f: next(),
            w_b: next(),
            w_bi: next(),
            w_hy: next(),
            b_y,
            activation,
        };
        params.check_shapes()?;
        if params.embeddings.vocab_size() != vocab.len() || params.classes() != labels.len() {
            return Err(ModelError::ShapeMismatch(
                "model tensors disagree with vocabulary or labels".into(),
            ));
        }
        if params.embeddings.dim() != config.embed_dim || params.hidden() != config.hidden {
            return Err(ModelError::ShapeMismatch(
                "model tensors disagree with train_config".into(),
            ));
        }
        Ok(TrainedModel {
            config,
            loss,
            labels,
            vocab,
            params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

struct Reader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn error(&self, message: String) -> ModelError {
        ModelError::ModelFile {
            line: self.pos.max(1),
            message,
        }
    }

    fn next_line(&mut self) -> Result<&'a str, ModelError> {
        let line = *self
            .lines
            .get(self.pos)
            .ok_or_else(|| self.error("unexpected end of file".into()))?;
        self.pos += 1;
        Ok(line)
    }

    fn fields(&mut self) -> Result<Vec<&'a str>, ModelError> {
        Ok(self.next_line()?.split(' ').collect())
    }

    fn keyword(&mut self, key: &str) -> Result<(), ModelError> {
        if self.next_line()? != key {
            return Err(self.error(format!("expected `{key}`")));
        }
        Ok(())
    }

    fn value<V: FromStr>(&mut self, key: &str) -> Result<V, ModelError> {
        let line = self.next_line()?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| self.error(format!("expected `{key} <value>`")))?;
        rest.parse()
            .map_err(|_| self.error(format!("invalid value for {key}: {rest:?}")))
    }

    fn raw_lines(&mut self, n: usize) -> Result<Vec<String>, ModelError> {
        (0..n).map(|_| self.next_line().map(str::to_owned)).collect()
    }

    fn matrix<T: Scalar>(&mut self, name: &str) -> Result<Matrix<T>, ModelError> {
        let head = self.fields()?;
        let dims = match head.as_slice() {
            [n, r, c] if *n == name => r.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
            _ => None,
        };
        let (rows, cols) = dims.ok_or_else(|| self.error(format!("expected `{name} <rows> <cols>`")))?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = self.next_line()?;
            let before = data.len();
            for f in line.split(' ').filter(|f| !f.is_empty()) {
                let v: T = f
                    .parse()
                    .map_err(|_| self.error(format!("invalid number {f:?} in {name}")))?;
                if !v.is_finite() {
                    return Err(self.error(format!("non-finite value in {name}")));
                }
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(self.error(format!(
                    "{name} row has {} values, expected {cols}",
                    data.len() - before
                )));
            }
        }
        Ok(Matrix::from_vec(rows, cols, data))
    }
}

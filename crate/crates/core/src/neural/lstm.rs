use super::{dot, sigmoid, ModelParams, ParamGroup};
use crate::dataio::Sequence;
use crate::error::{Error, Result};

/// Activations recorded by a forward pass, flat and tick-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrace {
    pub hidden_dim: usize,
    /// `T x H` hidden states.
    pub h: Vec<f64>,
    /// `T x H` cell states.
    pub c: Vec<f64>,
    /// `T x 4H` post-activation gates `[i, f, g, o]`.
    pub gates: Vec<f64>,
}

impl LstmTrace {
    pub fn len(&self) -> usize {
        self.h.len() / self.hidden_dim
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Hidden state at 0-based tick `t`.
    pub fn hidden(&self, t: usize) -> &[f64] {
        &self.h[t * self.hidden_dim..(t + 1) * self.hidden_dim]
    }

    pub fn cell(&self, t: usize) -> &[f64] {
        &self.c[t * self.hidden_dim..(t + 1) * self.hidden_dim]
    }

    pub fn gate(&self, t: usize) -> &[f64] {
        let w = 4 * self.hidden_dim;
        &self.gates[t * w..(t + 1) * w]
    }

    /// Hidden states of the first `t` ticks.
    pub fn hiddens_upto(&self, t: usize) -> &[f64] {
        &self.h[..t * self.hidden_dim]
    }
}

/// One recurrence step. `gates` receives the post-activation `[i, f, g, o]`.
pub fn lstm_step(
    params: &ModelParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    h_out: &mut [f64],
    c_out: &mut [f64],
) {
    let hd = params.config.hidden_dim;
    let d = params.config.input_dim;
    let w_ih = params.group(ParamGroup::InputWeights);
    let w_hh = params.group(ParamGroup::RecurrentWeights);
    let bias = params.group(ParamGroup::GateBias);
    for r in 0..4 * hd {
        let z = bias[r] + dot(&w_ih[r * d..(r + 1) * d], x) + dot(&w_hh[r * hd..(r + 1) * hd], h_prev);
        gates[r] = if (2 * hd..3 * hd).contains(&r) { z.tanh() } else { sigmoid(z) };
    }
    for j in 0..hd {
        let (i, f, g, o) = (gates[j], gates[hd + j], gates[2 * hd + j], gates[3 * hd + j]);
        c_out[j] = f * c_prev[j] + i * g;
        h_out[j] = o * c_out[j].tanh();
    }
}

/// Runs the recurrence from a zero state over every tick of `seq`.
pub fn lstm_forward(params: &ModelParams, seq: Sequence<'_>) -> Result<LstmTrace> {
    let hd = params.config.hidden_dim;
    if seq.dim() != params.config.input_dim {
        return Err(Error::shape(format!(
            "observation width {} does not match model input dimension {}",
            seq.dim(),
            params.config.input_dim
        )));
    }
    if seq.is_empty() {
        return Err(Error::arg("prefix must contain at least one tick"));
    }
    let t_len = seq.len();
    let mut trace = LstmTrace {
        hidden_dim: hd,
        h: vec![0.0; t_len * hd],
        c: vec![0.0; t_len * hd],
        gates: vec![0.0; t_len * 4 * hd],
    };
    let zeros = vec![0.0; hd];
    for t in 0..t_len {
        let (h_done, h_rest) = trace.h.split_at_mut(t * hd);
        let (c_done, c_rest) = trace.c.split_at_mut(t * hd);
        let (h_prev, c_prev) = if t == 0 {
            (&zeros[..], &zeros[..])
        } else {
            (&h_done[(t - 1) * hd..], &c_done[(t - 1) * hd..])
        };
        lstm_step(
            params,
            seq.row(t),
            h_prev,
            c_prev,
            &mut trace.gates[t * 4 * hd..(t + 1) * 4 * hd],
            &mut h_rest[..hd],
            &mut c_rest[..hd],
        );
        if c_rest[..hd].iter().chain(&h_rest[..hd]).any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite LSTM state at tick {}", t + 1)));
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::ModelConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    /// Literal per-gate arithmetic, indexing weights by (gate, unit, column).
    fn reference(p: &ModelParams, xs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (d, hd) = (p.config.input_dim, p.config.hidden_dim);
        let w_ih = p.group(ParamGroup::InputWeights);
        let w_hh = p.group(ParamGroup::RecurrentWeights);
        let b = p.group(ParamGroup::GateBias);
        let pre = |gate: usize, j: usize, x: &[f64], h: &[f64]| {
            let row = gate * hd + j;
            let mut z = b[row];
            for k in 0..d {
                z += w_ih[row * d + k] * x[k];
            }
            for k in 0..hd {
                z += w_hh[row * hd + k] * h[k];
            }
            z
        };
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let (mut hs, mut cs) = (vec![], vec![]);
        for x in xs {
            let mut nh = vec![0.0; hd];
            let mut nc = vec![0.0; hd];
            for j in 0..hd {
                let i = sig(pre(0, j, x, &h));
                let f = sig(pre(1, j, x, &h));
                let g = pre(2, j, x, &h).tanh();
                let o = sig(pre(3, j, x, &h));
                nc[j] = f * c[j] + i * g;
                nh[j] = o * nc[j].tanh();
            }
            h = nh;
            c = nc;
            hs.push(h.clone());
            cs.push(c.clone());
        }
        (hs, cs)
    }

    #[test]
    fn zero_parameters_give_zero_states() {
        let p = ModelParams::zeros(ModelConfig::new(2, 4));
        let data = [0.3, -1.0, 2.0, 5.0, 0.0, 1.0];
        let trace = lstm_forward(&p, Sequence::new(&data, 2).unwrap()).unwrap();
        assert!(trace.h.iter().all(|&v| v == 0.0));
        assert!(trace.c.iter().all(|&v| v == 0.0));
        assert!(trace.gate(0)[..4].iter().all(|&v| v == 0.5));
    }

    #[test]
    fn single_zero_tick_with_zero_bias() {
        let mut p = ModelParams::init(ModelConfig::new(3, 5), 1).unwrap();
        p.group_mut(ParamGroup::GateBias).fill(0.0);
        let trace = lstm_forward(&p, Sequence::new(&[0.0; 3], 3).unwrap()).unwrap();
        assert!(trace.hidden(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_per_gate_reference() {
        let p = ModelParams::init(ModelConfig::new(3, 8), 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let flat = xs.concat();
        let trace = lstm_forward(&p, Sequence::new(&flat, 3).unwrap()).unwrap();
        let (hs, cs) = reference(&p, &xs);
        for t in 0..5 {
            for j in 0..8 {
                assert!((trace.hidden(t)[j] - hs[t][j]).abs() <= 1e-12);
                assert!((trace.cell(t)[j] - cs[t][j]).abs() <= 1e-12);
                assert!(trace.hidden(t)[j].abs() <= 1.0);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = ModelParams::zeros(ModelConfig::new(3, 2));
        let err = lstm_forward(&p, Sequence::new(&[1.0, 2.0], 2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }
}

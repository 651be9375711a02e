use super::{dot, Activation, AttentionMode};

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    /// Weights over the hidden-state history; empty in last-state-only mode.
    pub alpha: Vec<f64>,
    pub context: Vec<f64>,
    /// `activation(W_a [context; query])`.
    pub h_attn: Vec<f64>,
}

/// Softmax attention over `hiddens` (`T x H`, tick-major) using `query` as the
/// scoring vector, followed by the `H x 2H` projection of `[context; query]`.
pub fn attention(
    hiddens: &[f64],
    hidden_dim: usize,
    query: &[f64],
    w_attn: &[f64],
    activation: Activation,
) -> AttentionOutput {
    let scores: Vec<f64> = hiddens.chunks_exact(hidden_dim).map(|h| dot(query, h)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut alpha: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= total);

    let mut context = vec![0.0; hidden_dim];
    for (a, h) in alpha.iter().zip(hiddens.chunks_exact(hidden_dim)) {
        for (c, v) in context.iter_mut().zip(h) {
            *c += a * v;
        }
    }
    let h_attn = project(&context, query, w_attn, activation);
    AttentionOutput {
        alpha,
        context,
        h_attn,
    }
}

/// Dispatches on the attention mode. In last-state-only mode the context is the
/// most recent hidden state and no weights are produced.
pub fn attend(
    mode: AttentionMode,
    hiddens: &[f64],
    hidden_dim: usize,
    query: &[f64],
    w_attn: &[f64],
    activation: Activation,
) -> AttentionOutput {
    match mode {
        AttentionMode::Full => attention(hiddens, hidden_dim, query, w_attn, activation),
        AttentionMode::LastStateOnly => {
            let context = hiddens[hiddens.len() - hidden_dim..].to_vec();
            let h_attn = project(&context, query, w_attn, activation);
            AttentionOutput {
                alpha: Vec::new(),
                context,
                h_attn,
            }
        }
    }
}

fn project(context: &[f64], query: &[f64], w_attn: &[f64], activation: Activation) -> Vec<f64> {
    let hd = context.len();
    (0..hd)
        .map(|j| {
            let row = &w_attn[j * 2 * hd..(j + 1) * 2 * hd];
            activation.apply(dot(&row[..hd], context) + dot(&row[hd..], query))
        })
        .collect()
}

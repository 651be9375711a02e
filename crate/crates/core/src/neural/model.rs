use super::{attend, dot, lstm_forward, AttentionMode, Gradients, ModelParams, ParamGroup};
use crate::dataio::Sequence;
use crate::error::{Error, Result};

/// One training sample: a prefix `X[1:t]` and its benefit target.
#[derive(Debug, Clone, Copy)]
pub struct PrefixSample<'a> {
    pub prefix: Sequence<'a>,
    pub target: f64,
}

/// Several prefixes of the same series, given as 1-based end ticks with targets.
/// Evaluating them together shares a single recurrent pass.
#[derive(Debug, Clone)]
pub struct SeriesTargets<'a> {
    pub series: Sequence<'a>,
    pub ticks: Vec<usize>,
    pub targets: Vec<f64>,
}

impl SeriesTargets<'_> {
    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub value: f64,
    /// Attention weights over the prefix (empty in last-state-only mode).
    pub alpha: Vec<f64>,
}

/// Benefit estimate for a whole prefix using the model's own attention mode.
pub fn predict_benefit(params: &ModelParams, prefix: Sequence<'_>) -> Result<Prediction> {
    predict_benefit_with(params, prefix, params.config.attention)
}

pub fn predict_benefit_with(params: &ModelParams, prefix: Sequence<'_>, mode: AttentionMode) -> Result<Prediction> {
    let trace = lstm_forward(params, prefix)?;
    let t = trace.len();
    let hd = params.config.hidden_dim;
    let att = attend(
        mode,
        &trace.h,
        hd,
        trace.cell(t - 1),
        params.group(ParamGroup::Attention),
        params.config.activation,
    );
    Ok(Prediction {
        value: head(params, &att.h_attn),
        alpha: att.alpha,
    })
}

#[inline]
pub(crate) fn head(params: &ModelParams, h_attn: &[f64]) -> f64 {
    dot(params.group(ParamGroup::HeadWeights), h_attn) + params.head_bias()
}

/// Estimates for several prefixes of one series from a single recurrent pass.
pub fn predict_ticks(params: &ModelParams, series: Sequence<'_>, ticks: &[usize]) -> Result<Vec<f64>> {
    let t_max = ticks.iter().copied().max().unwrap_or(0);
    if t_max == 0 || t_max > series.len() {
        return Err(Error::arg(format!("prefix ticks must lie in 1..={}", series.len())));
    }
    let trace = lstm_forward(params, series.prefix(t_max))?;
    let hd = params.config.hidden_dim;
    let w_attn = params.group(ParamGroup::Attention);
    Ok(ticks
        .iter()
        .map(|&t| {
            let att = attend(
                params.config.attention,
                trace.hiddens_upto(t),
                hd,
                trace.cell(t - 1),
                w_attn,
                params.config.activation,
            );
            head(params, &att.h_attn)
        })
        .collect())
}

/// Mean squared error over the prefix samples, each evaluated independently.
pub fn loss(params: &ModelParams, batch: &[PrefixSample<'_>]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::arg("loss needs a non-empty batch"));
    }
    let mut sse = 0.0;
    for s in batch {
        let r = predict_benefit(params, s.prefix)?.value - s.target;
        sse += r * r;
    }
    Ok(sse / batch.len() as f64)
}

/// Loss and its exact gradient, one independent forward/backward pass per sample.
pub fn backward(params: &ModelParams, batch: &[PrefixSample<'_>]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::arg("backward needs a non-empty batch"));
    }
    let n = batch.len() as f64;
    let mut grad = Gradients::zeros(params.config);
    let mut sse = 0.0;
    for s in batch {
        let item = SeriesTargets {
            series: s.prefix,
            ticks: vec![s.prefix.len()],
            targets: vec![s.target],
        };
        sse += backward_series(params, &item, 1.0 / n, &mut grad)?;
    }
    if !grad.is_finite() {
        return Err(Error::Numeric("gradient has non-finite entries".into()));
    }
    Ok((sse / n, grad))
}

/// Adds `weight * d(sum of squared residuals)/d(params)` over every requested
/// prefix of one series into `grad`, sharing one LSTM pass and one BPTT sweep.
/// Returns the (unweighted) sum of squared residuals.
pub fn backward_series(
    params: &ModelParams,
    item: &SeriesTargets<'_>,
    weight: f64,
    grad: &mut Gradients,
) -> Result<f64> {
    let cfg = params.config;
    let hd = cfg.hidden_dim;
    let d = cfg.input_dim;
    let t_max = item.ticks.iter().copied().max().unwrap_or(0);
    if t_max == 0 || t_max > item.series.len() {
        return Err(Error::arg(format!(
            "prefix ticks must lie in 1..={}",
            item.series.len()
        )));
    }
    let seq = item.series.prefix(t_max);
    let trace = lstm_forward(params, seq)?;

    let w_attn = params.group(ParamGroup::Attention);
    let w_head = params.group(ParamGroup::HeadWeights);
    let w_hh = params.group(ParamGroup::RecurrentWeights);
    let r_ih = ParamGroup::InputWeights.range(&cfg);
    let r_hh = ParamGroup::RecurrentWeights.range(&cfg);
    let r_b = ParamGroup::GateBias.range(&cfg);
    let r_a = ParamGroup::Attention.range(&cfg);
    let r_w = ParamGroup::HeadWeights.range(&cfg);
    let r_w0 = ParamGroup::HeadBias.range(&cfg);
    let g = grad.as_mut_slice();

    let mut ext_dh = vec![0.0; t_max * hd];
    let mut ext_dc = vec![0.0; t_max * hd];
    let mut du = vec![0.0; hd];
    let mut dz = vec![0.0; 2 * hd];
    let mut dalpha = Vec::with_capacity(t_max);
    let mut sse = 0.0;

    for (&t, &target) in item.ticks.iter().zip(&item.targets) {
        let query = trace.cell(t - 1);
        let att = attend(cfg.attention, trace.hiddens_upto(t), hd, query, w_attn, cfg.activation);
        let pred = head(params, &att.h_attn);
        let r = pred - target;
        if !r.is_finite() {
            return Err(Error::Numeric(format!("non-finite benefit estimate at tick {t}")));
        }
        sse += r * r;
        let gb = 2.0 * weight * r;

        // linear head
        for j in 0..hd {
            g[r_w.start + j] += gb * att.h_attn[j];
            du[j] = gb * w_head[j] * cfg.activation.derivative_from_output(att.h_attn[j]);
        }
        g[r_w0.start] += gb;

        // projection of [context; query]
        dz.fill(0.0);
        for j in 0..hd {
            let row = j * 2 * hd;
            for k in 0..hd {
                g[r_a.start + row + k] += du[j] * att.context[k];
                g[r_a.start + row + hd + k] += du[j] * query[k];
                dz[k] += w_attn[row + k] * du[j];
                dz[hd + k] += w_attn[row + hd + k] * du[j];
            }
        }
        let (dctx, dq) = dz.split_at_mut(hd);

        match cfg.attention {
            AttentionMode::Full => {
                dalpha.clear();
                for k in 0..t {
                    let h_k = trace.hidden(k);
                    dalpha.push(dot(dctx, h_k));
                    let a = att.alpha[k];
                    for (e, v) in ext_dh[k * hd..(k + 1) * hd].iter_mut().zip(dctx.iter()) {
                        *e += a * v;
                    }
                }
                let mean: f64 = att.alpha.iter().zip(&dalpha).map(|(a, da)| a * da).sum();
                for k in 0..t {
                    let ds = att.alpha[k] * (dalpha[k] - mean);
                    let h_k = trace.hidden(k);
                    for j in 0..hd {
                        dq[j] += ds * h_k[j];
                        ext_dh[k * hd + j] += ds * query[j];
                    }
                }
            }
            AttentionMode::LastStateOnly => {
                for (e, v) in ext_dh[(t - 1) * hd..t * hd].iter_mut().zip(dctx.iter()) {
                    *e += v;
                }
            }
        }
        for (e, v) in ext_dc[(t - 1) * hd..t * hd].iter_mut().zip(dq.iter()) {
            *e += v;
        }
    }

    // backpropagation through time
    let mut dh_next = vec![0.0; hd];
    let mut dc_next = vec![0.0; hd];
    let mut dzg = vec![0.0; 4 * hd];
    let zeros = vec![0.0; hd];
    for t in (0..t_max).rev() {
        let gates = trace.gate(t);
        let c_t = trace.cell(t);
        let (h_prev, c_prev) = if t == 0 {
            (&zeros[..], &zeros[..])
        } else {
            (trace.hidden(t - 1), trace.cell(t - 1))
        };
        for j in 0..hd {
            let (i, f, gg, o) = (gates[j], gates[hd + j], gates[2 * hd + j], gates[3 * hd + j]);
            let dh = ext_dh[t * hd + j] + dh_next[j];
            let tc = c_t[j].tanh();
            let d_o = dh * tc;
            let dc = ext_dc[t * hd + j] + dc_next[j] + dh * o * (1.0 - tc * tc);
            dc_next[j] = dc * f;
            dzg[j] = dc * gg * i * (1.0 - i);
            dzg[hd + j] = dc * c_prev[j] * f * (1.0 - f);
            dzg[2 * hd + j] = dc * i * (1.0 - gg * gg);
            dzg[3 * hd + j] = d_o * o * (1.0 - o);
        }
        let x = seq.row(t);
        for r in 0..4 * hd {
            let dzr = dzg[r];
            if dzr == 0.0 {
                continue;
            }
            g[r_b.start + r] += dzr;
            let gi = &mut g[r_ih.start + r * d..r_ih.start + (r + 1) * d];
            for (gv, xv) in gi.iter_mut().zip(x) {
                *gv += dzr * xv;
            }
            if t > 0 {
                let gh = &mut g[r_hh.start + r * hd..r_hh.start + (r + 1) * hd];
                for (gv, hv) in gh.iter_mut().zip(h_prev) {
                    *gv += dzr * hv;
                }
            }
        }
        if t > 0 {
            dh_next.fill(0.0);
            for r in 0..4 * hd {
                let dzr = dzg[r];
                if dzr == 0.0 {
                    continue;
                }
                for (dh, w) in dh_next.iter_mut().zip(&w_hh[r * hd..(r + 1) * hd]) {
                    *dh += w * dzr;
                }
            }
        }
        if dh_next.iter().chain(&dc_next).any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient at tick {}", t + 1)));
        }
    }
    Ok(sse)
}

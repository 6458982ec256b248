//! Opportunistic user selection and stream-set construction.

use nalgebra::DMatrix;

use crate::channel::{stack_real_matrix, stack_real_quadrature, ChannelSample};
use crate::receivers::{Field, PreparedStreams};
use crate::{Encoding, Error, Result, SystemConfig, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamKind {
    Complex,
    InPhase,
    Quadrature,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReceiverKind {
    Mmse,
    WidelyLinearMmse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamDescriptor {
    pub antenna: usize,
    pub kind: StreamKind,
    /// 1 for a complex stream, 1/2 for a real one.
    pub pre_log: f64,
    /// Share of the transmitter power carried by this stream.
    pub power_fraction: f64,
}

/// The streams one transmitter sends under a given encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamPlan {
    pub encoding: Encoding,
    pub nt: usize,
    pub receiver: ReceiverKind,
    pub streams: Vec<StreamDescriptor>,
}

/// Builds the stream set of a transmitter.
///
/// Complex encoding sends `Nt` complex streams. Real encoding sends one real
/// stream per antenna. `mixed:m` splits each of the first `m` antennas into
/// independent in-phase and quadrature real streams (half the antenna power
/// each) and sends one real stream on each remaining antenna.
pub fn build_streams(cfg: &SystemConfig) -> Result<StreamPlan> {
    let nt = cfg.nt;
    if nt == 0 {
        return Err(Error::config("Nt must be at least 1"));
    }
    let per_antenna = 1.0 / nt as f64;
    let real = |antenna| StreamDescriptor {
        antenna,
        kind: StreamKind::Real,
        pre_log: 0.5,
        power_fraction: per_antenna,
    };
    let (receiver, streams) = match cfg.encoding {
        Encoding::Complex => (
            ReceiverKind::Mmse,
            (0..nt)
                .map(|antenna| StreamDescriptor {
                    antenna,
                    kind: StreamKind::Complex,
                    pre_log: 1.0,
                    power_fraction: per_antenna,
                })
                .collect(),
        ),
        Encoding::Real => (ReceiverKind::WidelyLinearMmse, (0..nt).map(real).collect()),
        Encoding::Mixed(m) => {
            if m > nt {
                return Err(Error::config(format!("mixed:{m} exceeds Nt={nt}")));
            }
            let mut s = Vec::with_capacity(nt + m);
            for antenna in 0..m {
                for kind in [StreamKind::InPhase, StreamKind::Quadrature] {
                    s.push(StreamDescriptor {
                        antenna,
                        kind,
                        pre_log: 0.5,
                        power_fraction: 0.5 * per_antenna,
                    });
                }
            }
            s.extend((m..nt).map(real));
            (ReceiverKind::WidelyLinearMmse, s)
        }
    };
    Ok(StreamPlan {
        encoding: cfg.encoding,
        nt,
        receiver,
        streams,
    })
}

impl StreamPlan {
    pub fn t(&self) -> usize {
        self.streams.len()
    }

    pub fn sm_rate(&self) -> f64 {
        self.streams.iter().map(|s| s.pre_log).sum()
    }

    pub fn pre_logs(&self) -> Vec<f64> {
        self.streams.iter().map(|s| s.pre_log).collect()
    }

    /// Noise variance per receive dimension seen by this plan's receiver.
    pub fn noise_variance(&self, n0: f64) -> f64 {
        match self.receiver {
            ReceiverKind::Mmse => n0,
            ReceiverKind::WidelyLinearMmse => n0 / 2.0,
        }
    }

    /// Effective complex columns and powers of a transmitter with channel `h`
    /// and total power `power`. Only meaningful for complex plans.
    pub fn complex_columns(&self, h: &DMatrix<C64>, power: f64) -> (DMatrix<C64>, Vec<f64>) {
        debug_assert_eq!(self.receiver, ReceiverKind::Mmse);
        let cols = DMatrix::from_fn(h.nrows(), self.t(), |r, c| h[(r, self.streams[c].antenna)]);
        let p = self.streams.iter().map(|s| s.power_fraction * power).collect();
        (cols, p)
    }

    /// Effective stacked real columns and powers of a transmitter with
    /// channel `h` and total power `power`.
    pub fn real_columns(&self, h: &DMatrix<C64>, power: f64) -> (DMatrix<f64>, Vec<f64>) {
        let inphase = stack_real_matrix(h);
        let quad = stack_real_quadrature(h);
        let mut cols = DMatrix::zeros(2 * h.nrows(), self.t());
        for (c, s) in self.streams.iter().enumerate() {
            let src = match s.kind {
                StreamKind::Quadrature => &quad,
                _ => &inphase,
            };
            cols.column_mut(c).copy_from(&src.column(s.antenna));
        }
        let p = self.streams.iter().map(|s| s.power_fraction * power).collect();
        (cols, p)
    }

    /// Noise-independent per-stream SINR state for one user.
    pub fn prepare_user(&self, sample: &ChannelSample, s: f64, i0: f64) -> Result<PreparedStreams> {
        match self.receiver {
            ReceiverKind::Mmse => {
                let (d, dp) = self.complex_columns(&sample.h, s);
                let (g, gp) = concat(sample.g.iter().map(|g| self.complex_columns(g, i0)), d.nrows());
                PreparedStreams::new(&d, &dp, &g, &gp)
            }
            ReceiverKind::WidelyLinearMmse => {
                let (d, dp) = self.real_columns(&sample.h, s);
                let (g, gp) = concat(sample.g.iter().map(|g| self.real_columns(g, i0)), d.nrows());
                PreparedStreams::new(&d, &dp, &g, &gp)
            }
        }
    }
}

fn concat<T: Field>(
    parts: impl Iterator<Item = (DMatrix<T>, Vec<f64>)>,
    rows: usize,
) -> (DMatrix<T>, Vec<f64>) {
    let parts: Vec<_> = parts.collect();
    let n: usize = parts.iter().map(|(m, _)| m.ncols()).sum();
    let mut out = DMatrix::zeros(rows, n);
    let mut powers = Vec::with_capacity(n);
    let mut j = 0;
    for (m, p) in parts {
        out.columns_mut(j, m.ncols()).copy_from(&m);
        j += m.ncols();
        powers.extend(p);
    }
    (out, powers)
}

/// Whether a user may be assigned more than one stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SchedulerMode {
    /// Users already scheduled are removed from later eligible sets.
    #[default]
    Distinct,
    /// Every stream selects from all `L` users.
    AllowRepeat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assignment {
    pub stream: usize,
    pub user: usize,
    pub gamma: f64,
    /// `pre_log · log2(1 + gamma)` in bits/s/Hz.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleDecision {
    pub assignments: Vec<Assignment>,
    pub encoding: Encoding,
    pub t: usize,
}

impl ScheduleDecision {
    pub fn sum_rate(&self) -> f64 {
        self.assignments.iter().map(|a| a.rate).sum()
    }

    pub fn users(&self) -> Vec<usize> {
        self.assignments.iter().map(|a| a.user).collect()
    }
}

/// Index and value of the largest report; ties go to the lowest index.
pub fn max_sinr_select(reports: &[f64]) -> Result<(usize, f64)> {
    let (&first, rest) = reports.split_first().ok_or(Error::EmptyReports)?;
    let mut best = (0, first);
    for (i, &g) in rest.iter().enumerate() {
        if g > best.1 {
            best = (i + 1, g);
        }
    }
    Ok(best)
}

/// Per-stream user indices chosen by the sequential max-SINR rule on an
/// `L × t` CQI table (rows are users).
pub fn sequential_indices(cqi: &DMatrix<f64>, mode: SchedulerMode) -> Result<Vec<usize>> {
    let (l, t) = cqi.shape();
    if l == 0 {
        return Err(Error::EmptyReports);
    }
    if mode == SchedulerMode::Distinct && l < t {
        return Err(Error::TooFewUsers { users: l, streams: t });
    }
    let mut taken = vec![false; l];
    let mut chosen = Vec::with_capacity(t);
    for i in 0..t {
        let mut best: Option<(usize, f64)> = None;
        for u in 0..l {
            if mode == SchedulerMode::Distinct && taken[u] {
                continue;
            }
            let g = cqi[(u, i)];
            if best.is_none_or(|(_, b)| g > b) {
                best = Some((u, g));
            }
        }
        let (u, _) = best.expect("eligible set is non-empty");
        taken[u] = true;
        chosen.push(u);
    }
    Ok(chosen)
}

fn decision(cqi: &DMatrix<f64>, plan: &StreamPlan, users: &[usize]) -> ScheduleDecision {
    let assignments = users
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let gamma = cqi[(u, i)];
            Assignment {
                stream: i,
                user: u,
                gamma,
                rate: plan.streams[i].pre_log * gamma.ln_1p() / std::f64::consts::LN_2,
            }
        })
        .collect();
    ScheduleDecision {
        assignments,
        encoding: plan.encoding,
        t: plan.t(),
    }
}

fn check_table(cqi: &DMatrix<f64>, plan: &StreamPlan) -> Result<()> {
    if cqi.ncols() != plan.t() {
        return Err(Error::domain(format!(
            "CQI table has {} columns but the plan has {} streams",
            cqi.ncols(),
            plan.t()
        )));
    }
    Ok(())
}

/// Sequential max-SINR scheduling: stream `i` goes to the best user among
/// those not yet scheduled (or among all users in [`SchedulerMode::AllowRepeat`]).
pub fn sequential_max_sinr(cqi: &DMatrix<f64>, plan: &StreamPlan, mode: SchedulerMode) -> Result<ScheduleDecision> {
    check_table(cqi, plan)?;
    let users = sequential_indices(cqi, mode)?;
    Ok(decision(cqi, plan, &users))
}

/// Brute-force search for the distinct-user assignment with the largest sum
/// rate. Limited to `L <= 8`, `t <= 3`; intended as a reference for measuring
/// the greedy scheduler's gap.
pub fn exhaustive_group_search(cqi: &DMatrix<f64>, plan: &StreamPlan) -> Result<ScheduleDecision> {
    check_table(cqi, plan)?;
    let (l, t) = cqi.shape();
    if l > 8 || t > 3 {
        return Err(Error::domain(format!("exhaustive search limited to L<=8, t<=3 (got L={l}, t={t})")));
    }
    if l < t {
        return Err(Error::TooFewUsers { users: l, streams: t });
    }
    let rate = |i: usize, u: usize| plan.streams[i].pre_log * cqi[(u, i)].ln_1p();
    let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, Vec::new());
    let mut current = Vec::with_capacity(t);
    fn recurse(
        i: usize,
        t: usize,
        l: usize,
        acc: f64,
        current: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
        rate: &dyn Fn(usize, usize) -> f64,
    ) {
        if i == t {
            if acc > best.0 {
                *best = (acc, current.clone());
            }
            return;
        }
        for u in 0..l {
            if current.contains(&u) {
                continue;
            }
            current.push(u);
            recurse(i + 1, t, l, acc + rate(i, u), current, best, rate);
            current.pop();
        }
    }
    recurse(0, t, l, 0.0, &mut current, &mut best, &rate);
    Ok(decision(cqi, plan, &best.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complex_plan(t: usize) -> StreamPlan {
        build_streams(&SystemConfig::new(3, 2, 10).with_nt(t)).unwrap()
    }

    #[test]
    fn select_examples() {
        assert_eq!(max_sinr_select(&[0.5, 2.0, 1.0]).unwrap(), (1, 2.0));
        assert_eq!(max_sinr_select(&[1.0; 4]).unwrap(), (0, 1.0));
        assert!(matches!(max_sinr_select(&[]), Err(Error::EmptyReports)));
    }

    #[test]
    fn sequential_hand_traces() {
        let plan = complex_plan(2);
        let cqi = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 2.0, 5.0]);
        let d = sequential_max_sinr(&cqi, &plan, SchedulerMode::Distinct).unwrap();
        assert_eq!(d.users(), vec![0, 1]);
        assert_eq!(d.assignments[1].gamma, 5.0);

        let cqi = DMatrix::from_row_slice(2, 2, &[3.0, 9.0, 2.0, 5.0]);
        let d = sequential_max_sinr(&cqi, &plan, SchedulerMode::Distinct).unwrap();
        assert_eq!(d.users(), vec![0, 1]);
        assert_eq!(d.assignments[1].gamma, 5.0);

        let d = sequential_max_sinr(&cqi, &plan, SchedulerMode::AllowRepeat).unwrap();
        assert_eq!(d.users(), vec![0, 0]);
    }

    #[test]
    fn too_few_users() {
        let plan = complex_plan(3);
        let cqi = DMatrix::from_element(2, 3, 1.0);
        assert!(matches!(
            sequential_max_sinr(&cqi, &plan, SchedulerMode::Distinct),
            Err(Error::TooFewUsers { users: 2, streams: 3 })
        ));
    }

    #[test]
    fn stream_plans() {
        let c = build_streams(&SystemConfig::new(3, 2, 10).with_nt(2)).unwrap();
        assert_eq!((c.t(), c.sm_rate()), (2, 2.0));
        let r = build_streams(&SystemConfig::new(3, 2, 10).with_nt(5).with_encoding(Encoding::Real)).unwrap();
        assert_eq!((r.t(), r.sm_rate()), (5, 2.5));
        let m = build_streams(&SystemConfig::new(3, 2, 10).with_nt(3).with_encoding(Encoding::Mixed(2))).unwrap();
        assert_eq!((m.t(), m.sm_rate()), (5, 2.5));
        assert_eq!(m.receiver, ReceiverKind::WidelyLinearMmse);
        let total: f64 = m.streams.iter().map(|s| s.power_fraction).sum();
        assert!((total - 1.0).abs() < 1e-15);
        let bad = SystemConfig::new(3, 2, 10).with_nt(1).with_encoding(Encoding::Mixed(2));
        assert!(build_streams(&bad).is_err());
    }

    #[test]
    fn rate_carries_pre_log() {
        let plan = build_streams(&SystemConfig::new(3, 1, 10).with_encoding(Encoding::Real)).unwrap();
        let cqi = DMatrix::from_element(3, 1, 3.0);
        let d = sequential_max_sinr(&cqi, &plan, SchedulerMode::Distinct).unwrap();
        assert!((d.sum_rate() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_never_worse_than_greedy() {
        let plan = complex_plan(2);
        let cqi = DMatrix::from_row_slice(3, 2, &[5.0, 4.0, 4.9, 0.1, 0.2, 0.3]);
        let greedy = sequential_max_sinr(&cqi, &plan, SchedulerMode::Distinct).unwrap();
        let best = exhaustive_group_search(&cqi, &plan).unwrap();
        assert!(best.sum_rate() >= greedy.sum_rate());
        assert_eq!(best.users(), vec![1, 0]);
    }
}

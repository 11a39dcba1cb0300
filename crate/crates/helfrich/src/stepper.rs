//! Embedded Dormand–Prince 5(4) integrator with PI step control, a signed
//! event function for controlled termination, and a state guard.
//!
//! The driver is dimension-generic so the same kernel serves the tangent-angle
//! system (three states) and the closed-form-angle profile (two states).

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// Fifth-order solution weights (row 7 of the tableau, FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct DriverOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub h_init: f64,
    pub s_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DriverStatus {
    /// The event function crossed zero from above; integration stopped there.
    EventHit,
    /// Arc length reached `s_end` without an event.
    ReachedEnd,
    /// The guard rejected an accepted state.
    GuardTripped,
    /// Step size underflowed during error control.
    StepUnderflow,
}

struct StepResult<const N: usize> {
    y: [f64; N],
    err_ratio: f64,
    k_last: [f64; N],
}

fn dp_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    s: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> StepResult<N> {
    let mut t = [0.0; N];

    for i in 0..N {
        t[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = f(s + C2 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = f(s + C3 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = f(s + C4 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = f(s + C5 * h, &t);
    for i in 0..N {
        t[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = f(s + h, &t);

    let mut y5 = [0.0; N];
    for i in 0..N {
        y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let k7 = f(s + h, &y5);

    let mut err_ratio: f64 = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
        err_ratio = err_ratio.max((e / scale).abs());
    }
    StepResult {
        y: y5,
        err_ratio,
        k_last: k7,
    }
}

/// Adaptive integration from `(s0, y0)`.
///
/// `event` is a signed stop function: the driver halts at the first accepted
/// step where it becomes ≤ 0, then refines the crossing by re-stepping with a
/// secant/bisection hybrid so the final state lands on the event to solver
/// accuracy. `guard` must return true for every accepted state. `record` is
/// called with each accepted `(s, y, dy/ds)` including the located event state
/// but excluding the initial state.
pub(crate) fn integrate_adaptive<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    s0: f64,
    y0: [f64; N],
    opts: &DriverOpts,
    event: &impl Fn(f64, &[f64; N]) -> f64,
    guard: &impl Fn(f64, &[f64; N]) -> bool,
    record: &mut impl FnMut(f64, &[f64; N], &[f64; N]),
) -> DriverStatus {
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, &y);
    let mut h = opts.h_init.min(opts.max_step).min(opts.s_end - s0);
    let mut err_prev: f64 = 1.0;
    let mut g_prev = event(s, &y);

    loop {
        if s >= opts.s_end {
            return DriverStatus::ReachedEnd;
        }
        if h < 1e-13 * s.abs().max(1.0) {
            return DriverStatus::StepUnderflow;
        }
        let h_try = h.min(opts.s_end - s);
        let step = dp_step(f, s, &y, &k1, h_try, opts.rel_tol, opts.abs_tol);

        if step.err_ratio <= 1.0 {
            let err = step.err_ratio.max(1e-10);
            let fac = (SAFETY * err.powf(-0.14) * err_prev.powf(0.08)).clamp(FAC_MIN, FAC_MAX);
            err_prev = err;

            let s_new = s + h_try;
            if !guard(s_new, &step.y) {
                return DriverStatus::GuardTripped;
            }
            let g_new = event(s_new, &step.y);
            if g_new <= 0.0 && g_prev > 0.0 {
                let (s_ev, y_ev, k_ev) =
                    locate_event(f, event, s, &y, &k1, h_try, g_prev, g_new, opts);
                record(s_ev, &y_ev, &k_ev);
                return DriverStatus::EventHit;
            }
            record(s_new, &step.y, &step.k_last);
            s = s_new;
            y = step.y;
            k1 = step.k_last;
            g_prev = g_new;
            h = (h_try * fac).min(opts.max_step);
        } else {
            let fac = (SAFETY * step.err_ratio.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h = h_try * fac;
        }
    }
}

/// Locate the event crossing inside an accepted step by re-stepping with
/// fraction α of the step and driving g(α) to zero. Secant with a bisection
/// safeguard on the bracket [α with g>0, α with g≤0].
#[allow(clippy::too_many_arguments)]
fn locate_event<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    event: &impl Fn(f64, &[f64; N]) -> f64,
    s: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    g0: f64,
    g1: f64,
    opts: &DriverOpts,
) -> (f64, [f64; N], [f64; N]) {
    let eval = |alpha: f64| -> ([f64; N], [f64; N], f64) {
        let st = dp_step(f, s, y, k1, alpha * h, opts.rel_tol, opts.abs_tol);
        let g = event(s + alpha * h, &st.y);
        (st.y, st.k_last, g)
    };

    let g_scale = g0.abs().max(g1.abs()).max(1e-300);
    let mut lo = 0.0;
    let mut g_lo = g0;
    let mut hi = 1.0;
    let mut g_hi = g1;
    let mut alpha = (g0 / (g0 - g1)).clamp(1e-12, 1.0);
    let (mut y_best, mut k_best, mut g_best) = eval(alpha);

    for _ in 0..60 {
        if g_best.abs() <= 1e-13 * g_scale || (hi - lo) <= 1e-15 {
            break;
        }
        if g_best > 0.0 {
            lo = alpha;
            g_lo = g_best;
        } else {
            hi = alpha;
            g_hi = g_best;
        }
        let denom = g_lo - g_hi;
        let mut next = if denom.abs() > 1e-300 {
            lo + (hi - lo) * g_lo / denom
        } else {
            0.5 * (lo + hi)
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        alpha = next;
        let (y_a, k_a, g_a) = eval(alpha);
        y_best = y_a;
        k_best = k_a;
        g_best = g_a;
    }
    (s + alpha * h, y_best, k_best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(s_end: f64) -> DriverOpts {
        DriverOpts {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.05,
            h_init: 1e-3,
            s_end,
        }
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let f = |_s: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut last = (0.0, [1.0, 0.0]);
        let status = integrate_adaptive(
            &f,
            0.0,
            [1.0, 0.0],
            &opts(10.0),
            &|_, _| 1.0,
            &|_, _| true,
            &mut |s, y, _| last = (s, *y),
        );
        assert_eq!(status, DriverStatus::ReachedEnd);
        assert!((last.1[0] - 10.0f64.cos()).abs() < 1e-8);
        assert!((last.1[1] + 10.0f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn event_located_to_high_accuracy() {
        // y' = -y from y(0)=1; event at y = 0.5 → s = ln 2
        let f = |_s: f64, y: &[f64; 1]| [-y[0]];
        let mut last = (0.0, [1.0]);
        let status = integrate_adaptive(
            &f,
            0.0,
            [1.0],
            &opts(5.0),
            &|_, y| y[0] - 0.5,
            &|_, _| true,
            &mut |s, y, _| last = (s, *y),
        );
        assert_eq!(status, DriverStatus::EventHit);
        assert!((last.0 - std::f64::consts::LN_2).abs() < 1e-10);
        assert!((last.1[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn guard_aborts() {
        let f = |_s: f64, y: &[f64; 1]| [y[0]];
        let status = integrate_adaptive(
            &f,
            0.0,
            [1.0],
            &opts(10.0),
            &|_, _| 1.0,
            &|_, y| y[0] < 5.0,
            &mut |_, _, _| {},
        );
        assert_eq!(status, DriverStatus::GuardTripped);
    }
}

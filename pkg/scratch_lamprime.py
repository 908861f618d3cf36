"""Pick the inverse-design regularizer for both FIR passes: ladder lambda'
over {1,3,10,30} x 5 seeds with paper noise, checking final metric and
stage monotonicity on the [15 ns, 100 us] window."""

import numpy as np

import fluxcal.defaults as defaults
from fluxcal.fircal import (
    FirFitConfig,
    InverseFirConfig,
    design_inverse_fir,
    fit_fir_forward,
    probe_waveform,
)
from fluxcal.iircal import (
    default_fit_schedule,
    default_rms_floor,
    design_inverse_iir,
    extract_step_response,
    fit_exponential_sum,
    fit_spectral_lines,
)
from fluxcal.lti import (
    ExponentialStepModel,
    FilterChain,
    SosCascade,
    Waveform,
    apply_chain,
    gaussian_smooth,
)
from fluxcal.simulator import (
    build_line,
    default_cryo_noise,
    default_cryoscope_schedule,
    default_spec_noise,
    paper_like_scenario,
    rectangular_pulse,
    run_cryoscope,
    run_spectroscopy,
)
from fluxcal.transmon import FrequencyModel, nu

TS = defaults.TS
DUR = defaults.CRYO_PULSE_DURATION_S


def stage_seed(seed, k):
    return int(np.random.SeedSequence([seed, k]).generate_state(1, np.uint64)[0])


def prune(fit):
    kept = [(a, tau) for (a, tau), (sa, _) in zip(fit.model.terms, fit.term_stderr)
            if abs(a) >= 2.0 * sa]
    return ExponentialStepModel(fit.model.alpha0, tuple(kept)) if kept else None


def metric(chain, line, model):
    lead = round(5.0 * defaults.SIGMA_FP_S / TS) + 4
    n_on = round(100e-6 / TS) + 8
    program = np.zeros(lead + n_on)
    program[lead:] = defaults.PULSE_AMP_PHI0
    w = gaussian_smooth(Waveform(program, TS, t0=-lead * TS), defaults.SIGMA_FP_S)
    phi = apply_chain(line, apply_chain(chain, w))
    dev = np.abs(nu(model, phi.samples) - nu(model, w.samples)) / 738e6
    t = w.times
    m = (t >= 15e-9) & (t <= 100e-6)
    i = np.argmax(dev[m])
    return float(dev[m][i]), float(t[m][i])


line = build_line(paper_like_scenario(), TS)
device = defaults.default_device()
model_spec = FrequencyModel(device, v_dc=defaults.SPEC_BIAS_PHI0,
                            spec_shift=defaults.DF_SPEC_HZ)
model_cryo = FrequencyModel(device, v_dc=defaults.CRYO_BIAS_PHI0)
pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, DUR, TS)
sched = default_cryoscope_schedule(edge_margin=defaults.CRYO_EDGE_MARGIN_S)
a = probe_waveform(defaults.PULSE_AMP_PHI0, DUR, TS)
cfg = FirFitConfig()

for seed in (1, 7, 11, 23, 42):
    stages = []
    for k, repass in ((1, False), (2, True)):
        pre = FilterChain(tuple(stages)) if stages else None
        grid = run_spectroscopy(line, pre, model_spec,
                                noise=default_spec_noise(stage_seed(seed, k)))
        trace = fit_spectral_lines(grid)
        samples = extract_step_response(trace, model_spec,
                                        defaults.SPEC_BRANCH_PHI0)
        fit = fit_exponential_sum(samples, default_fit_schedule(repass),
                                  default_rms_floor(trace, samples, model_spec))
        model = prune(fit)
        stages.append(SosCascade((), 1.0, TS) if model is None or not model.terms
                      else design_inverse_iir(model, TS))
    base = FilterChain(tuple(stages))
    m_iir, _ = metric(base, line, model_cryo)
    tr3 = run_cryoscope(line, base, model_cryo, pulse, sched,
                        noise=default_cryo_noise(stage_seed(seed, 3)))
    fit3 = fit_fir_forward(tr3, a, model_cryo, cfg)
    for lamp in (1.0, 3.0, 10.0, 30.0):
        fir1 = design_inverse_fir(fit3.kernel, InverseFirConfig(lambda1=lamp))
        c1 = FilterChain(tuple(stages) + (fir1,))
        m1, t1 = metric(c1, line, model_cryo)
        tr4 = run_cryoscope(line, c1, model_cryo, pulse, sched,
                            noise=default_cryo_noise(stage_seed(seed, 4)))
        fit4 = fit_fir_forward(tr4, a, model_cryo, cfg)
        fir2 = design_inverse_fir(fit4.kernel, InverseFirConfig(lambda1=lamp))
        m2, t2 = metric(FilterChain(tuple(stages) + (fir1, fir2)),
                        line, model_cryo)
        mono = m_iir >= m1 >= m2
        print(f"seed {seed:2d} lam'={lamp:4.0f}: iir {m_iir:.3e}  "
              f"fir1 {m1:.3e}@{t1*1e9:7.1f}ns  fir2 {m2:.3e}@{t2*1e9:7.1f}ns  "
              f"monotone={mono}")

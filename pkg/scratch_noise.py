"""With paper noise on: (a) ladder lambda1 to see how much shrinkage tames
noise absorption in the FIR fits, (b) measure the identity-hypothesis
chi-square of each FIR stage's trace to size a significance gate."""

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
    convolve,
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


def prune_insignificant(fit, n_sigma=2.0):
    kept = [
        (a, tau)
        for (a, tau), (sa, _) in zip(fit.model.terms, fit.term_stderr)
        if abs(a) >= n_sigma * sa
    ]
    if not kept:
        return None
    return ExponentialStepModel(fit.model.alpha0, tuple(kept))


def verify_metric(chain, line, model):
    lead = round(5.0 * defaults.SIGMA_FP_S / TS) + 4
    n_on = round(100e-6 / TS) + 8
    program = np.zeros(lead + n_on)
    program[lead:] = defaults.PULSE_AMP_PHI0
    w = gaussian_smooth(Waveform(program, TS, t0=-lead * TS), defaults.SIGMA_FP_S)
    v = apply_chain(chain, w)
    phi = apply_chain(line, v)
    dev = np.abs(nu(model, phi.samples) - nu(model, w.samples)) / 738e6
    t = w.times
    return float(dev[(t >= 15e-9) & (t <= 100e-6)].max())


def chi2_identity(trace, a, model):
    pred = nu(model, np.interp(trace.t, a.times, a.samples))
    return float((((trace.f01 - pred) / trace.sigma_f) ** 2).sum())


scenario = paper_like_scenario()
line = build_line(scenario, TS)
device = defaults.default_device()
model_spec = FrequencyModel(
    device, v_dc=defaults.SPEC_BIAS_PHI0, spec_shift=defaults.DF_SPEC_HZ
)
model_cryo = FrequencyModel(device, v_dc=defaults.CRYO_BIAS_PHI0)
pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, DUR, TS)
sched = default_cryoscope_schedule(edge_margin=defaults.CRYO_EDGE_MARGIN_S)
a = probe_waveform(defaults.PULSE_AMP_PHI0, DUR, TS)

for seed in (1, 7):
    stages = []
    for k, repass in ((1, False), (2, True)):
        pre = FilterChain(tuple(stages)) if stages else None
        grid = run_spectroscopy(
            line, pre, model_spec, noise=default_spec_noise(stage_seed(seed, k))
        )
        trace = fit_spectral_lines(grid)
        samples = extract_step_response(trace, model_spec, defaults.SPEC_BRANCH_PHI0)
        fit = fit_exponential_sum(
            samples, default_fit_schedule(repass),
            default_rms_floor(trace, samples, model_spec),
        )
        model = prune_insignificant(fit)
        stages.append(
            SosCascade((), 1.0, TS) if model is None or not model.terms
            else design_inverse_iir(model, TS)
        )
    base = FilterChain(tuple(stages))
    m_iir = verify_metric(base, line, model_cryo)
    tr3 = run_cryoscope(line, base, model_cryo, pulse, sched,
                        noise=default_cryo_noise(stage_seed(seed, 3)))
    n = tr3.t.size
    print(f"seed {seed}: iir metric {m_iir:.3e}  "
          f"fir1 trace chi2_id={chi2_identity(tr3, a, model_cryo):.1f} (n={n})")
    for lam1 in (1e11, 1e12, 3e12, 1e13, 3e13):
        fit3 = fit_fir_forward(tr3, a, model_cryo,
                               FirFitConfig(lambda1=lam1, lambda2=1e14))
        fir1 = design_inverse_fir(fit3.kernel, InverseFirConfig())
        c1 = FilterChain(tuple(stages) + (fir1,))
        m1 = verify_metric(c1, line, model_cryo)
        tr4 = run_cryoscope(line, c1, model_cryo, pulse, sched,
                            noise=default_cryo_noise(stage_seed(seed, 4)))
        chi4 = chi2_identity(tr4, a, model_cryo)
        fit4 = fit_fir_forward(tr4, a, model_cryo,
                               FirFitConfig(lambda1=lam1, lambda2=1e14))
        fir2 = design_inverse_fir(fit4.kernel, InverseFirConfig())
        m2 = verify_metric(FilterChain(tuple(stages) + (fir1, fir2)),
                           line, model_cryo)
        print(f"  lam1={lam1:7.1e}: fir1 {m1:.3e}  fir2 {m2:.3e}  "
              f"fir2 trace chi2_id={chi4:.1f}")

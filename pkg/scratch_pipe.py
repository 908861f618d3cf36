"""Full 4-stage calibration prototype with paper noise: spectroscopy -> IIR1
-> spectroscopy -> IIR2 -> cryoscope -> FIR1 -> cryoscope -> FIR2, with the
per-stage verification metrics that the pipeline will persist."""

import time

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


def prune_insignificant(fit, n_sigma=2.0):
    kept = [
        (a, tau)
        for (a, tau), (sa, _) in zip(fit.model.terms, fit.term_stderr)
        if abs(a) >= n_sigma * sa
    ]
    if not kept:
        return None
    return ExponentialStepModel(fit.model.alpha0, tuple(kept))


def verify_metric(chain, line, model, windows=((15e-9, 100e-6),)):
    lead = round(5.0 * defaults.SIGMA_FP_S / TS) + 4
    n_on = round(100e-6 / TS) + 8
    program = np.zeros(lead + n_on)
    program[lead:] = defaults.PULSE_AMP_PHI0
    w = gaussian_smooth(Waveform(program, TS, t0=-lead * TS), defaults.SIGMA_FP_S)
    v = apply_chain(chain, w)
    phi = apply_chain(line, v)
    dev = np.abs(nu(model, phi.samples) - nu(model, w.samples)) / 738e6
    t = w.times
    return [float(dev[(t >= lo) & (t <= hi)].max()) for lo, hi in windows]


def run(seed):
    t0 = time.time()
    scenario = paper_like_scenario()
    line = build_line(scenario, TS)
    device = defaults.default_device()
    model_spec = FrequencyModel(
        device, v_dc=defaults.SPEC_BIAS_PHI0, spec_shift=defaults.DF_SPEC_HZ
    )
    model_cryo = FrequencyModel(device, v_dc=defaults.CRYO_BIAS_PHI0)
    stages = []
    metrics = []

    def iir_stage(k, repass):
        pre = FilterChain(tuple(stages)) if stages else None
        grid = run_spectroscopy(
            line, pre, model_spec, noise=default_spec_noise(stage_seed(seed, k))
        )
        trace = fit_spectral_lines(grid)
        samples = extract_step_response(trace, model_spec, defaults.SPEC_BRANCH_PHI0)
        floor = default_rms_floor(trace, samples, model_spec)
        fit = fit_exponential_sum(samples, default_fit_schedule(repass), floor)
        model = prune_insignificant(fit)
        if model is None or not model.terms:
            stages.append(SosCascade((), 1.0, TS))
            note = "identity"
        else:
            stages.append(design_inverse_iir(model, TS))
            note = f"{len(model.terms)} terms"
        metrics.append(verify_metric(FilterChain(tuple(stages)), line, model_cryo)[0])
        print(f"  stage {k} ({note}): metric {metrics[-1]:.3e}")

    def fir_stage(k):
        pre = FilterChain(tuple(stages))
        sched = default_cryoscope_schedule(edge_margin=defaults.CRYO_EDGE_MARGIN_S)
        pulse = rectangular_pulse(defaults.PULSE_AMP_PHI0, DUR, TS)
        trace = run_cryoscope(
            line, pre, model_cryo, pulse, sched,
            noise=default_cryo_noise(stage_seed(seed, k)),
        )
        a = probe_waveform(defaults.PULSE_AMP_PHI0, DUR, TS)
        fit = fit_fir_forward(trace, a, model_cryo, FirFitConfig())
        fir = design_inverse_fir(fit.kernel, InverseFirConfig())
        stages.append(fir)
        metrics.append(verify_metric(FilterChain(tuple(stages)), line, model_cryo)[0])
        print(f"  stage {k} (fir, data={fit.data_term:.2e}): metric {metrics[-1]:.3e}")

    iir_stage(1, repass=False)
    iir_stage(2, repass=True)
    fir_stage(3)
    fir_stage(4)
    mono = all(m2 <= m1 * (1 + 1e-12) for m1, m2 in zip(metrics, metrics[1:]))
    print(
        f"seed {seed}: final {metrics[-1]:.3e} "
        f"monotone={mono} wall={time.time() - t0:.1f}s"
    )
    return metrics


for seed in (1, 7):
    print(f"seed {seed}:")
    run(seed)

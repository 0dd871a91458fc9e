"""srlab: threshold detectors, noise sweeps and an output-autocorrelation noise controller."""

from .analytic import (
    analytic_ac,
    analytic_cc,
    analytic_mi,
    analytic_q,
    analytic_sigma_opt,
    input_ac_bipolar,
    w_func,
)
from .detectors import DetectorSpec, apply_memoryless, detect, run_lif
from .objectives import (
    BinningSpec,
    ObjectiveSample,
    ac_rms,
    autocorrelation,
    cross_correlation,
    mutual_information,
    pearson_r,
    snr_db,
    success_probability,
)
from .resonance import (
    ControllerState,
    ResonanceCurve,
    SignalSpec,
    SweepConfig,
    adapt_step,
    find_optimum,
    run_controller,
    run_scatter_study,
    run_sweep,
)
from .signals import (
    OuParams,
    RoesslerParams,
    TimeSeries,
    gen_bipolar,
    gen_gaussian_noise,
    gen_ou,
    gen_roessler,
    gen_sine,
    load_audio,
    normalize_amplitude,
)

__version__ = "0.1.0"

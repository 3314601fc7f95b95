"""Spatial point-process traffic model for machine-type devices.

Devices and alarm events are deployed as homogeneous Poisson point
processes.  Each device is pushed into alarm mode by nearby events with a
distance-dependent probability, and then emits regular or alarm traffic
according to a Bernoulli or a two-state Markov source.
"""

from mtc_traffic.errors import (
    ConfigError,
    DegenerateSeriesError,
    NonIntegrableAtpfError,
    ScenarioTooDenseError,
    TruncationImpossibleError,
)
from mtc_traffic.point_process import (
    Annulus,
    Disk,
    PointRealization,
    Rectangle,
    area,
    sample_ppp,
)
from mtc_traffic.atpf import (
    CustomTableAtpf,
    DiskStepAtpf,
    ExponentialAtpf,
    evaluate,
    first_moment_integral,
    load_custom_table,
    tail_mass,
)
from mtc_traffic.alarm_field import (
    AlarmProbabilityField,
    alarm_probability,
    field_for_realization,
    required_event_window,
)
from mtc_traffic.traffic_models import (
    DeviceState,
    MarkovParams,
    RateParams,
    StateSequence,
    markov_transition_matrix,
    rate_of,
    sample_bernoulli_states,
    sample_markov_states,
    steady_state,
)
from mtc_traffic.analytics import (
    AcfEstimate,
    ClosedFormRate,
    approx_total_rate_markov,
    averaged_acf,
    expected_total_rate,
    mean_alarm_probability,
    sample_autocovariance,
)
from mtc_traffic.sim_engine import (
    RateSeries,
    Scenario,
    SummaryStats,
    run_experiment,
    run_trial,
    sweep,
)

__version__ = "0.1.0"

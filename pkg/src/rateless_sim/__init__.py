"""Slot-level simulator of a downlink cell using rateless codes under
imperfect CSI, with genie and fixed-rate reference strategies."""

from ._backend import NUMBA_ENABLED, backend_name
from .channel import (ChannelDraw, ChannelParams, ComplexGain, ConditionalLaw,
                      expected_mutual_info, mutual_info, step_channel)
from .controller import (LinearUtility, LogUtility, NcaParams, SlotDecision,
                         encoding_control, nca_slot, power_for_user,
                         rate_control, schedule)
from .baselines import (FixedRateState, fixed_rate_select, fixed_rate_slot,
                        genie_slot)
from .engine import ExperimentConfig, MetricsReport, run, sweep
from .rateless import (AckOutcome, UserState, VirtualState, decoder_step,
                       encoder_step, w_step, z_step)

__all__ = [
    "AckOutcome", "ChannelDraw", "ChannelParams", "ComplexGain",
    "ConditionalLaw", "ExperimentConfig", "FixedRateState", "LinearUtility",
    "LogUtility", "MetricsReport", "NcaParams", "NUMBA_ENABLED",
    "SlotDecision", "UserState", "VirtualState", "backend_name",
    "decoder_step", "encoder_step", "encoding_control", "expected_mutual_info",
    "fixed_rate_select", "fixed_rate_slot", "genie_slot", "mutual_info",
    "nca_slot", "power_for_user", "rate_control", "run", "schedule",
    "step_channel", "sweep", "w_step", "z_step",
]

__version__ = "0.1.0"

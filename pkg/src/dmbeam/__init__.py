"""Multimodal-antenna beam synthesis and directional-modulation BER simulation."""

from .errors import (
    ConfigError,
    DegeneratePatternError,
    DmBeamError,
    FramingError,
    InsecureConfigurationError,
    InvalidGridError,
    NullPortError,
    PatternSchemaError,
)
from .patterns import (
    AngularGrid,
    Direction,
    PatternSet,
    PortId,
    analytic_set,
    eval_mode,
    export_pattern_csv,
    load_pattern_csv,
    sample_pattern_set,
)
from .synthesis import (
    BeamReport,
    Excitation,
    array_factor,
    beam_report,
    enhance_unidirectional,
    phase_align,
    steer_azimuth,
    steer_elevation,
)
from .dm import AnVector, DmFrame, dm_excite, gen_an, observe_at, qpsk_demap, qpsk_map
from .link import BerCurve, BerRecord, LinkConfig, ber_at, ber_beamwidth, ber_sweep

__version__ = "0.1.0"

__all__ = [
    "AnVector",
    "AngularGrid",
    "BeamReport",
    "BerCurve",
    "BerRecord",
    "ConfigError",
    "DegeneratePatternError",
    "Direction",
    "DmBeamError",
    "DmFrame",
    "Excitation",
    "FramingError",
    "InsecureConfigurationError",
    "InvalidGridError",
    "LinkConfig",
    "NullPortError",
    "PatternSchemaError",
    "PatternSet",
    "PortId",
    "analytic_set",
    "array_factor",
    "beam_report",
    "ber_at",
    "ber_beamwidth",
    "ber_sweep",
    "dm_excite",
    "enhance_unidirectional",
    "eval_mode",
    "export_pattern_csv",
    "gen_an",
    "load_pattern_csv",
    "observe_at",
    "phase_align",
    "qpsk_demap",
    "qpsk_map",
    "sample_pattern_set",
    "steer_azimuth",
    "steer_elevation",
]

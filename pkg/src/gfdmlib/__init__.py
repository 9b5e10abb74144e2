"""GFDM transceiver library.

Direct (dense) and FFT-factorized modulators and equalizers for generalized
frequency division multiplexing, a flop-count complexity model for the
factored transceiver against published alternatives, and a Monte Carlo BER
simulation front end.
"""

from .core import (
    DEFAULT_ORACLE_CAP,
    DataGrid,
    GfdmParams,
    ModulationMatrix,
    PrototypeFilter,
    SpectralDiagonal,
    build_modmatrix_direct,
    build_modmatrix_factored,
    build_prototype_pulse,
    factored_modulate,
    load_pulse_csv,
    permute_forward,
    permute_inverse,
    pulse_from_coefficients,
    save_pulse_csv,
    spectral_diag_lambda,
    spectral_diag_lambda_bar,
    spectral_diagonal,
)
from .channel import (
    ChannelProfile,
    ChannelRealization,
    apply_channel,
    draw_channel,
    etu,
    identity_channel,
    load_profile,
    remove_cp,
)
from .errors import (
    CapacityError,
    ConfigurationError,
    GfdmError,
    ParameterError,
    SingularChannelError,
    SingularPulseError,
    UnsupportedSchemeError,
    UnsupportedSizeError,
)
from .fec import CodeSpec, conv_encode, viterbi_decode
from .flops import ChannelKind, SchemeId, complexity_report, fft_flops, scheme_flops
from .qam import constellation, qam_ber_awgn, qam_demap, qam_map
from .receiver import (
    EqualizerFactors,
    EqualizerKind,
    FdeKind,
    build_deq,
    build_equalizer_direct,
    condition_number,
    equalize_fast,
    fde_equalize,
)
from .sim import (
    BerRecord,
    SimConfig,
    case_i,
    case_ii,
    load_config,
    ofdm_baseline,
    run_ber_sweep,
    run_condition_sweep,
)
from .transmitter import (
    BasebandSignal,
    add_cp,
    load_iq,
    modulate_direct,
    modulate_fast,
    save_iq,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

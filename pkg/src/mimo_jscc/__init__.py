"""Link-level simulation of analog source transmission over block Rayleigh
fading MIMO channels with diversity (OSTBC) and multiplexing mappings."""

from .baseline import CapacityReport, ergodic_capacity, mimo_capacity, separation_distortion
from .channel import (
    ChannelParams,
    ChannelState,
    Seed,
    noise_var_for_snr,
    sample_channel,
    sample_channels,
    snr_db,
    transmit,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DimensionError,
    InsufficientTrialsError,
    MimoJsccError,
    PowerConstraintError,
    SchemeError,
    SingularMatrixError,
)
from .metrics import (
    OutageCurve,
    diversity_order_estimate,
    outage_curve,
    outage_probability,
    scheme_sinr,
    sinr_diversity,
    sinr_mmse,
    sinr_mmse_stream,
)
from .receiver import (
    AffineHook,
    EqualizedLatent,
    EquivalentChannel,
    alamouti_decouple,
    equivalent_channel,
    mmse_equalize,
    ostbc_decode,
    ostbc_scalar_mmse,
    post_equalize,
)
from .source import (
    GaussianSource,
    LinearCodec,
    analytic_distortion,
    decode_source,
    encode_source,
    psnr,
    sample_source,
)
from .stm import (
    ImageDims,
    SchemeKind,
    StmScheme,
    channel_uses,
    encode,
    latent_length,
    map_frame,
    normalize_latent,
)

__version__ = "0.1.0"

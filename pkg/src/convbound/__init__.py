"""Bounds on two-ion correlations that are consistent with a summed photon-count histogram."""

__version__ = "0.1.0"

from .bellstats import CorrelationReport, SettingPair, chsh, correlation_bounds, normalized_counts
from .deconv import DeconvConfig, DeconvResult, IonPair, Metric, convolve_pair, deconvolve, fitness, two_lobe_split
from .discriminator import (
    CategoryCounts,
    ThresholdConfig,
    blend_interpretations,
    classify_counts,
    flipped_category_correlation,
    interpret_other,
    interpret_rowe,
    optimal_cut,
    parity_correlation,
    pcc,
)
from .errors import ConfigError, ConvboundError, DegenerateDistributionError, ParseError, ValidationError
from .histogram import FrequencyDist, Histogram, empirical_stats, load_histogram, normalize, read_histogram
from .jointdensity import (
    JointDensity,
    SymAntisymPair,
    antidiagonal_convolve,
    construct_diagonal,
    construct_edge,
    construct_independent,
    construct_random,
    construct_uniform,
    extremal_asymmetric,
    marginal_difference,
    marginal_ion1,
    marginal_ion2,
    pearson_correlation,
    sym_antisym_split,
)
from .synth import ExperimentConfig, JointSamples, Mode, simulate

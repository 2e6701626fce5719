"""Distill near-uniform key bits from environmental noise and measure it."""

__version__ = "0.1.0"

from .bitstream import (
    BinMeanExtractor,
    BitStream,
    SampleStream,
    extract_bits,
    read_bits,
    write_bits,
)
from .correctors import (
    DistillConfig,
    MoonshineDistiller,
    RemapTable,
    SubsequenceHistogram,
    VonNeumannCorrector,
    build_histogram,
    distill,
    moonshine,
    select_typical,
    von_neumann,
)
from .entropy import (
    AcfSequence,
    EntropyRateEstimator,
    EntropyReport,
    acf_from_psd,
    acf_from_samples,
    det_ratio_levinson,
    det_ratio_qr,
    mutual_information,
    renyi_awgn,
    renyi_discrete,
    shannon_gaussian,
    shannon_rate,
    solve_yule_walker,
    toeplitz,
)
from .randtests import BatteryConfig, TestOutcome, run_battery, run_test
from .simulator import SourceModel, acf_analytic, generate

__all__ = [
    "AcfSequence",
    "BatteryConfig",
    "BinMeanExtractor",
    "BitStream",
    "DistillConfig",
    "EntropyRateEstimator",
    "EntropyReport",
    "MoonshineDistiller",
    "RemapTable",
    "SampleStream",
    "SourceModel",
    "SubsequenceHistogram",
    "TestOutcome",
    "VonNeumannCorrector",
    "acf_analytic",
    "acf_from_psd",
    "acf_from_samples",
    "build_histogram",
    "det_ratio_levinson",
    "det_ratio_qr",
    "distill",
    "extract_bits",
    "generate",
    "moonshine",
    "mutual_information",
    "read_bits",
    "renyi_awgn",
    "renyi_discrete",
    "run_battery",
    "run_test",
    "select_typical",
    "shannon_gaussian",
    "shannon_rate",
    "solve_yule_walker",
    "toeplitz",
    "von_neumann",
    "write_bits",
]

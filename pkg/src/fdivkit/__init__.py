"""f-divergences on finite alphabets: information measures, rate-distortion,
tail exponents and generalization bounds."""

from .divergence import (class_f_check, conditional_f_divergence, f_divergence, kappa,
                         supermodularity_gap)
from .estimators import GeneralizationBound, MutualInformation, RateDistortionEstimator
from .generators import Generator, custom_generator, get_generator, registered_names
from .genbounds import BoundReport, LearningInstance
from .information import (ab_gap, f_entropy, mi_ckz, mi_mbgya, mi_pv, mutual_information,
                          ordering_chain, shannon_mi)
from .ratedist import (ConvergenceError, InfeasibleError, RDCurve, RDPoint, blahut_arimoto,
                       dr_classical, f_dr_ckz, f_rd_ckz, mbgya_dr, mbgya_rd, rd_classical)

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "ConvergenceError",
    "GeneralizationBound",
    "Generator",
    "InfeasibleError",
    "LearningInstance",
    "MutualInformation",
    "RDCurve",
    "RDPoint",
    "RateDistortionEstimator",
    "ab_gap",
    "blahut_arimoto",
    "class_f_check",
    "conditional_f_divergence",
    "custom_generator",
    "dr_classical",
    "f_divergence",
    "f_dr_ckz",
    "f_entropy",
    "f_rd_ckz",
    "get_generator",
    "kappa",
    "mbgya_dr",
    "mbgya_rd",
    "mi_ckz",
    "mi_mbgya",
    "mi_pv",
    "mutual_information",
    "ordering_chain",
    "rd_classical",
    "registered_names",
    "shannon_mi",
    "supermodularity_gap",
]

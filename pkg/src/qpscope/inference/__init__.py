"""Analysis pipeline: mixture classification, sector thresholding, hidden
Markov rate extraction, population extrapolation, activation and joint fits,
and the Lorentzian power-spectrum cross-check."""

from qpscope.inference.gmm import MixtureFit, assign_parity, fit_gmm
from qpscope.inference.hmm import HmmFit, fit_parity_hmm, viterbi_path
from qpscope.inference.fits import (
    ArrheniusFit,
    FitResult,
    LineFit,
    arrhenius_fit,
    joint_fit,
    rates_vs_population,
)
from qpscope.inference.psd import PsdFit, psd_rate

__all__ = [
    "ArrheniusFit",
    "FitResult",
    "HmmFit",
    "LineFit",
    "MixtureFit",
    "PsdFit",
    "arrhenius_fit",
    "assign_parity",
    "fit_gmm",
    "fit_parity_hmm",
    "joint_fit",
    "psd_rate",
    "rates_vs_population",
    "viterbi_path",
]

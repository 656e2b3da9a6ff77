"""Block-code decoding toolkit: classical sum-product belief propagation and
an autoregressive hypernetwork decoder, with a Monte Carlo BER harness and
brute-force verification oracles."""

from .codes import ParityCheckCode, encode, extend_parity, load_code, parse_alist, standardize
from .channel import LlrFrame, SnrEstimate, estimate_snr, transmit
from .graph import EdgeGraph, build, lift, marginalize_sum
from .bp import decode_bp, hard_decision
from .hyper import DecoderParams, decode_ar, init_decoder_params
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

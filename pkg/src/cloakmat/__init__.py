"""Outsourced linear algebra with ``M = P + H`` secret-matrix masking.

The client hides its matrices behind products with scaled permutations
plus a rank-one term, an untrusted cloud does the heavy O(n^3) work on
ciphertext, and the client decrypts and runs a cheap randomized check.
Covered tasks: matrix multiplication, least-squares regression and
symmetric eigendecomposition (PCA).
"""
from .errors import *  # noqa: F401,F403
from .matcore import (Permutation, as_matrix, from_mxb_bytes, gen_permutation, make_rng,
                      mat_mul_naive, max_abs, read_matrix, to_mxb_bytes, write_matrix,
                      format_text, parse_text)
from .keyforge import (DEFAULT_KAPPA, EvdKey, LeiKey, LrKey, MmcKey, RankOnePerturbation,
                       ScaledPermutation, SecretMatrix, invertibility_margin, keygen_evd,
                       keygen_lei, keygen_lr, keygen_mmc, keygen_scaled_permutation,
                       keygen_secret, load_key, sample_nonzero, save_key, format_key, parse_key)
from .fastmul import apply_perm, apply_rank_one, apply_secret, count_multiplications
from .mmc import (MmcResult, MmcTask, cloud_mmc, lei_decrypt, lei_encrypt, mmc_decrypt,
                  mmc_encrypt, mmc_verify, mmc_verify_transcript)
from .regress import (CenteredDesign, LrSolution, cloud_lr, least_squares, lr_center,
                      lr_decrypt, lr_encrypt, lr_verify)
from .spectra import (Spectrum, cloud_evd, cov_matrix, evd_decrypt, evd_encrypt, evd_verify,
                      pca_project)
from .gauntlet import ZeaTrialReport, ind_zea_game, tamper, zero_count
from .envelope import TaskEnvelope, read_envelope, write_envelope
from .bench import BenchRow, bench_run, rows_to_csv

__version__ = "0.1.0"

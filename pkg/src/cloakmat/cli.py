"""Command-line front end.

The ``cloud`` subcommand takes only envelope paths, never a key, so the
client/cloud split can run as two separate processes. ``encrypt`` marks a
key file as used (``<key>.used``) and refuses to encrypt under it again.

Exit codes::

    0  success (verify: accept)
    1  unexpected internal error
    2  command-line usage error
    3  verification rejected the result
    4  file could not be read or written
    10 invalid dimension          11 invalid parameter
    12 invalid key                13 key generation failed
    14 ill-conditioned key        15 singular regression design
    16 underdetermined design     17 eigen solver did not converge
    18 complex spectrum
    20 parse error (other)        21 malformed header
    22 truncated payload          23 non-finite value
    24 version mismatch           25 malformed value
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import errors as E
from .bench import DEFAULT_LADDER, bench_run, rows_to_csv
from .envelope import TaskEnvelope, read_envelope, write_envelope
from .gauntlet import SCHEMES, ind_zea_game
from .keyforge import (DEFAULT_KAPPA, LeiKey, LrKey, MmcKey, keygen_evd, keygen_lei,
                       keygen_lr, keygen_mmc, load_key, save_key)
from .matcore import make_rng, read_matrix, write_matrix
from .mmc import (MmcResult, MmcTask, cloud_mmc, lei_decrypt, lei_encrypt, mmc_decrypt, mmc_encrypt, mmc_verify,
                  mmc_verify_transcript)
from .regress import cloud_lr, lr_center, lr_decrypt, lr_encrypt, lr_verify
from .spectra import Spectrum, cloud_evd, cov_matrix, evd_decrypt, evd_encrypt, evd_verify, pca_project

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_REJECT, EXIT_IO = 0, 1, 2, 3, 4

# most specific class first; the first isinstance match wins
ERROR_EXIT_CODES = (
    (E.MalformedHeaderError, 21),
    (E.TruncatedPayloadError, 22),
    (E.NonFiniteValueError, 23),
    (E.VersionMismatchError, 24),
    (E.MalformedValueError, 25),
    (E.ParseError, 20),
    (E.InvalidDimensionError, 10),
    (E.ParameterError, 11),
    (E.InvalidKeyError, 12),
    (E.KeygenFailureError, 13),
    (E.IllConditionedKeyError, 14),
    (E.SingularDesignError, 15),
    (E.UnderdeterminedDesignError, 16),
    (E.ConvergenceError, 17),
    (E.SpectrumAssumptionError, 18),
    (E.VerificationError, EXIT_REJECT),
    (OSError, EXIT_IO),
)


def exit_code_for(exc: BaseException) -> int:
    for cls, code in ERROR_EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return EXIT_INTERNAL


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.replace("x", ",").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}; use e.g. 64,80,96 or 16x16") from None
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"dims must be positive, got {text!r}")
    return dims


def _vector(path) -> np.ndarray:
    return read_matrix(path).reshape(-1)


# --- subcommands -------------------------------------------------------------

def cmd_keygen(a, rng) -> int:
    d = a.dims
    need = {"mmc": 3, "lei": 3, "lr": 2, "evd": 1}[a.kind]
    if len(d) != need:
        raise E.InvalidDimensionError(f"{a.kind} keys need {need} dims, got {len(d)}")
    gen = {"mmc": keygen_mmc, "lei": keygen_lei, "lr": keygen_lr, "evd": keygen_evd}[a.kind]
    save_key(gen(*d, a.kappa, rng), a.out)
    return EXIT_OK


def _used_marker(key_path) -> Path:
    return Path(str(key_path) + ".used")


def cmd_encrypt(a, rng) -> int:
    # keys are single-use; a marker file next to the key records the first use
    marker = _used_marker(a.key)
    if marker.exists() and not a.allow_reuse:
        raise E.ParameterError(f"key {a.key} was already used to encrypt; generate a fresh one")
    key = load_key(a.key)
    x = read_matrix(a.x)
    if isinstance(key, (MmcKey, LeiKey)):
        if a.y is None:
            raise E.ParameterError("multiplication keys need --y")
        enc = mmc_encrypt if isinstance(key, MmcKey) else lei_encrypt
        task = enc(key, x, read_matrix(a.y))
        env = TaskEnvelope("mmc", (task.x_enc, task.y_enc))
    elif isinstance(key, LrKey):
        if a.y is None:
            raise E.ParameterError("regression keys need --y")
        xe, ye = lr_encrypt(key, lr_center(x, _vector(a.y)))
        env = TaskEnvelope("lr", (xe, ye[:, None]))
    else:
        env = TaskEnvelope("evd", (evd_encrypt(key, x),))
    write_envelope(env, a.out)
    marker.touch()
    return EXIT_OK


def cmd_cloud(a, rng) -> int:
    env = read_envelope(a.task)
    if env.protocol == "mmc":
        z = cloud_mmc(MmcTask(*env.matrices), method=a.method).z_enc
        out = TaskEnvelope("mmc-result", (z,))
    elif env.protocol == "lr":
        xe, ye = env.matrices
        out = TaskEnvelope("lr-result", (cloud_lr(xe, ye.reshape(-1))[:, None],))
    elif env.protocol == "evd":
        spec = cloud_evd(env.matrices[0])
        out = TaskEnvelope("evd-result", (spec.eigenvalues[:, None], spec.eigenvectors))
    else:
        raise E.ParameterError(f"{env.protocol} envelope is not a task")
    write_envelope(out, a.out)
    return EXIT_OK


def _result(path, protocol: str) -> TaskEnvelope:
    env = read_envelope(path)
    if env.protocol != protocol:
        raise E.ParameterError(f"expected a {protocol} envelope, got {env.protocol}")
    return env


def cmd_decrypt(a, rng) -> int:
    key = load_key(a.key)
    if isinstance(key, (MmcKey, LeiKey)):
        res = MmcResult(_result(a.result, "mmc-result").matrices[0])
        z = mmc_decrypt(key, res) if isinstance(key, MmcKey) else lei_decrypt(key, res)
        write_matrix(a.out, z)
    elif isinstance(key, LrKey):
        if a.x is None or a.y is None:
            raise E.ParameterError("regression decryption needs the original --x and --y")
        d = lr_center(read_matrix(a.x), _vector(a.y))
        sol = lr_decrypt(key, _result(a.result, "lr-result").matrices[0].reshape(-1), d)
        write_matrix(a.out, np.concatenate([[sol.beta0], sol.beta])[:, None])
    else:
        lam, vecs = _result(a.result, "evd-result").matrices
        spec = evd_decrypt(key, Spectrum(lam.reshape(-1), vecs))
        write_matrix(a.out, spec.eigenvectors)
        if a.values:
            write_matrix(a.values, spec.eigenvalues[:, None])
    return EXIT_OK


def cmd_verify(a, rng) -> int:
    if a.task is not None:
        if a.result is None:
            raise E.ParameterError("--task needs --result")
        task = read_envelope(a.task)
        res = _result(a.result, task.protocol + "-result")
        if task.protocol == "mmc":
            ok = mmc_verify_transcript(MmcTask(*task.matrices), MmcResult(res.matrices[0]), a.loops, rng)
        elif task.protocol == "lr":
            xe, ye = task.matrices
            ok = lr_verify(xe, ye.reshape(-1), res.matrices[0].reshape(-1))
        else:
            lam, vecs = res.matrices
            ok = evd_verify(task.matrices[0], Spectrum(lam.reshape(-1), vecs), a.loops, rng)
    else:
        if a.x is None or a.y is None or a.z is None:
            raise E.ParameterError("verify needs --x --y --z, or --task --result")
        ok = mmc_verify(read_matrix(a.x), read_matrix(a.y), read_matrix(a.z), a.loops, rng)
    print("accept" if ok else "reject")
    return EXIT_OK if ok else EXIT_REJECT


def cmd_lr(a, rng) -> int:
    x, y = read_matrix(a.x), _vector(a.y)
    d = lr_center(x, y)
    key = keygen_lr(x.shape[0], x.shape[1], a.kappa, rng)
    xe, ye = lr_encrypt(key, d)
    be = cloud_lr(xe, ye)
    if not lr_verify(xe, ye, be):
        print("reject")
        return EXIT_REJECT
    sol = lr_decrypt(key, be, d)
    print(f"beta0 {sol.beta0:.17g}")
    print("beta " + " ".join(f"{v:.17g}" for v in sol.beta))
    if a.out:
        write_matrix(a.out, np.concatenate([[sol.beta0], sol.beta])[:, None])
    return EXIT_OK


def cmd_pca(a, rng) -> int:
    x, cov = cov_matrix(read_matrix(a.data), outsource=a.outsource_cov, loops=a.loops,
                        kappa=a.kappa, rng=rng)
    key = keygen_evd(cov.shape[0], a.kappa, rng)
    b = evd_encrypt(key, cov)
    spec_enc = cloud_evd(b)
    if not evd_verify(b, spec_enc, a.loops, rng):
        print("reject")
        return EXIT_REJECT
    spec = evd_decrypt(key, spec_enc)
    proj = pca_project(spec, a.keep, x)
    print("eigenvalues " + " ".join(f"{v:.10g}" for v in spec.eigenvalues[:a.keep]))
    if a.out:
        write_matrix(a.out, proj)
    if a.values:
        write_matrix(a.values, spec.eigenvalues[:, None])
    if a.vectors:
        write_matrix(a.vectors, spec.eigenvectors)
    return EXIT_OK


def cmd_zea(a, rng) -> int:
    if len(a.dims) != 2:
        raise E.InvalidDimensionError("zea needs dims like 16x16")
    print(ind_zea_game(a.scheme, *a.dims, a.trials, rng, a.kappa).line())
    return EXIT_OK


def cmd_bench(a, rng) -> int:
    ladder = a.dims or (list(DEFAULT_LADDER) if a.protocol == "mmc" else None)
    if not ladder:
        raise E.ParameterError(f"--dims is required for {a.protocol}")
    rows = [bench_run(a.protocol, d, a.loops, a.reps, rng, a.kappa) for d in ladder]
    text = rows_to_csv(rows)
    sys.stdout.write(text)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for every random draw")
    common.add_argument("--kappa", type=int, default=DEFAULT_KAPPA, help="key band bit width")

    p = argparse.ArgumentParser(prog="cloakmat", description=__doc__.split("\n")[0],
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                epilog=__doc__[__doc__.index("Exit codes"):])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("keygen", parents=[common], help="write a fresh key file")
    s.add_argument("--kind", choices=("mmc", "lei", "lr", "evd"), required=True)
    s.add_argument("--dims", type=parse_dims, required=True, help="m,n,s | m,n | n")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_keygen)

    s = sub.add_parser("encrypt", parents=[common], help="build a task envelope")
    s.add_argument("--key", required=True)
    s.add_argument("--x", required=True, help="X (mmc/lei), design (lr) or covariance (evd)")
    s.add_argument("--y", help="Y (mmc/lei) or response vector (lr)")
    s.add_argument("--out", required=True)
    s.add_argument("--allow-reuse", action="store_true", help="encrypt again under a used key")
    s.set_defaults(func=cmd_encrypt)

    # deliberately no key argument: the cloud only ever sees envelopes
    s = sub.add_parser("cloud", parents=[common], help="solve a task envelope")
    s.add_argument("--task", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--method", choices=("naive", "blas"), default="naive")
    s.set_defaults(func=cmd_cloud)

    s = sub.add_parser("decrypt", parents=[common], help="decrypt a result envelope")
    s.add_argument("--key", required=True)
    s.add_argument("--result", required=True)
    s.add_argument("--out", required=True, help="Z, [beta0; beta] or eigenvectors")
    s.add_argument("--x", help="original design (lr)")
    s.add_argument("--y", help="original response (lr)")
    s.add_argument("--values", help="eigenvalue output (evd)")
    s.set_defaults(func=cmd_decrypt)

    s = sub.add_parser("verify", parents=[common], help="check a result; prints accept/reject")
    s.add_argument("--x")
    s.add_argument("--y")
    s.add_argument("--z")
    s.add_argument("--task")
    s.add_argument("--result")
    s.add_argument("--loops", type=int, default=20)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("lr", parents=[common], help="outsourced linear regression, in process")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_lr)

    s = sub.add_parser("pca", parents=[common], help="outsourced PCA, in process")
    s.add_argument("--data", required=True, help="n features x m observations")
    s.add_argument("--keep", type=int, required=True)
    s.add_argument("--loops", type=int, default=20)
    s.add_argument("--outsource-cov", action="store_true")
    s.add_argument("--out")
    s.add_argument("--values")
    s.add_argument("--vectors")
    s.set_defaults(func=cmd_pca)

    s = sub.add_parser("zea", parents=[common], help="play the zero-element distinguishing game")
    s.add_argument("--scheme", choices=SCHEMES, required=True)
    s.add_argument("--dims", type=parse_dims, default=(16, 16))
    s.add_argument("--trials", type=int, default=500)
    s.set_defaults(func=cmd_zea)

    s = sub.add_parser("bench", parents=[common], help="time a protocol, CSV to stdout")
    s.add_argument("--protocol", choices=("mmc", "lr", "evd"), required=True)
    s.add_argument("--dims", type=parse_dims, action="append")
    s.add_argument("--loops", type=int, default=20)
    s.add_argument("--reps", type=int, default=3)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, make_rng(args.seed))
    except Exception as exc:  # noqa: BLE001 - every failure becomes an exit code
        code = exit_code_for(exc)
        print(f"cloakmat {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

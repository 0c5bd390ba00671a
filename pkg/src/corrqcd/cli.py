"""Command-line interface: ``corrqcd {density,detect,estimate-j,simulate,generate,sample-v}``.

Exit codes: 0 success (or change detected), 2 input error, 3 stream ended
without a detection.
"""

import argparse
import math
import sys

import numpy as np

from corrqcd.corrstats import summary_statistic
from corrqcd.errors import CorrQcdError
from corrqcd.qcd import GlrConfig, GlrDetector, calibrate_threshold
from corrqcd.scenario import format_csv, metadata, parse_scenario, run_scenario
from corrqcd.simgen import (
    ChangeModel,
    CovarianceSpec,
    equicorrelated_block_cov,
    generate_blocks,
    path_rng,
    sample_wishart_block_cov,
)
from corrqcd.streams import (
    StreamFormatError,
    read_binary_blocks,
    read_text_blocks,
    read_values,
    write_binary_blocks,
    write_text_blocks,
)
from corrqcd.vdensity import ModelParams, log_pdf_v, mle_j, sample_v, w_transform

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_DETECTION = 3


class UsageError(CorrQcdError):
    pass


def _window(value):
    if value == "auto":
        return "auto"
    if value == "none":
        return None
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("window must be an integer, 'auto' or 'none'") from None


def _open_input(path, binary):
    if path == "-":
        return sys.stdin.buffer if binary else sys.stdin
    return open(path, "rb" if binary else "r")


def _block_stream(args):
    """Yield (ModelParams, V) per block of the input stream."""
    binary = args.format == "binary"
    fh = _open_input(args.input, binary)
    blocks = read_binary_blocks(fh) if binary else read_text_blocks(fh)
    params = None
    for i, (header, block) in enumerate(blocks, start=1):
        if params is None:
            for name in ("n", "p"):
                flag = getattr(args, name)
                if flag is not None and flag != getattr(header, name):
                    raise StreamFormatError(f"stream header {name}={getattr(header, name)} does not match --{name} {flag}")
            params = ModelParams(header.n, header.p, args.delta)
        try:
            v = summary_statistic(block, args.delta).v
        except CorrQcdError as exc:
            raise CorrQcdError(f"block {i}: {exc}") from exc
        yield params, v


def _value_stream(args):
    if args.n is None or args.p is None:
        raise UsageError("--values requires --n and --p")
    params = ModelParams(args.n, args.p, args.delta)
    for v in read_values(_open_input(args.input, False)):
        yield params, v


def _stream(args):
    return _value_stream(args) if args.values else _block_stream(args)


def cmd_density(args, out):
    params = ModelParams(args.n, args.p, args.delta)
    if args.grid_size < 2:
        raise UsageError("--grid-size must be >= 2")
    rho = np.arange(1, args.grid_size + 1) / args.grid_size
    cols = []
    for j in args.J:
        f = np.empty_like(rho)
        f[:-1] = np.exp(log_pdf_v(rho[:-1], params, j))
        f[-1] = math.inf if params.n <= 3 else float(np.exp(log_pdf_v(1.0, params, j)))
        cols.append(f)
    out.write(",".join(["rho"] + [f"J={j:g}" for j in args.J]) + "\n")
    for i, r in enumerate(rho):
        out.write(",".join([f"{r:.10g}"] + [f"{c[i]:.10g}" for c in cols]) + "\n")
    return EXIT_OK


def _config(args):
    if (args.beta is None) == (args.threshold is None):
        raise UsageError("give exactly one of --beta or --threshold")
    a = calibrate_threshold(args.beta) if args.beta is not None else args.threshold
    return GlrConfig(a, args.epsilon, args.window, args.sidedness)


def cmd_detect(args, out):
    config = _config(args)
    detector = None
    out.write("record,m,V,W,stat\n")
    for params, v in _stream(args):
        if detector is None:
            detector = GlrDetector(config, params)
        state = detector.step(v)
        w = state.w_buffer[-1]
        out.write(f"block,{state.m},{v:.17g},{w:.17g},{state.current_stat:.17g}\n")
        if state.stopped:
            verdict = detector.verdict()
            out.write("record,stopping_time,change_point_estimate,j_estimate\n")
            out.write(f"verdict,{verdict.stopping_time},{verdict.change_point_estimate},{verdict.j_estimate:.17g}\n")
            return EXIT_OK
    m = 0 if detector is None else detector.state.m
    print(f"no change detected in {m} blocks", file=sys.stderr)
    return EXIT_NO_DETECTION


def cmd_estimate_j(args, out):
    params, values = None, []
    for params, v in _stream(args):
        values.append(v)
    if not values:
        raise UsageError("empty stream: nothing to estimate")
    j = mle_j(values, params)
    out.write("j_hat,count\n")
    out.write(f"{j:.10g},{len(values)}\n")
    return EXIT_OK


def cmd_simulate(args, out):
    with open(args.scenario) as fh:
        sc = parse_scenario(fh.read())
    if args.seed is not None:
        sc.seed = args.seed
    if sc.seed is None:
        raise UsageError("no seed: set 'seed' in the scenario file or pass --seed")
    rows = run_scenario(sc, fast_path=args.fast_path, workers=args.workers)
    out.write(format_csv(rows, metadata(sc, args.fast_path)))
    return EXIT_OK


def cmd_generate(args, out):
    p = args.p
    if args.block_rho is not None:
        post = equicorrelated_block_cov(p, args.k, args.block_rho)
    elif args.dof is not None:
        post = sample_wishart_block_cov(p, args.k, args.dof, path_rng(args.seed, 0, stream=2))
    else:
        post = CovarianceSpec.identity(p)
    gamma = math.inf if args.gamma is None else args.gamma
    model = ChangeModel(args.n, p, CovarianceSpec.identity(p), post, gamma=gamma, seed=args.seed)
    blocks = generate_blocks(model, 1, args.blocks, path_rng(args.seed, 0))
    if args.format == "binary":
        write_binary_blocks(out.buffer if hasattr(out, "buffer") else out, blocks)
    else:
        write_text_blocks(out, blocks, fmt="%.8g")
    return EXIT_OK


def cmd_sample_v(args, out):
    params = ModelParams(args.n, args.p, args.delta)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    for v in np.atleast_1d(sample_v(params, args.J, rng, args.count)):
        out.write(f"{v:.17g}\n")
    return EXIT_OK


def _add_stream_args(sp):
    sp.add_argument("input", nargs="?", default="-", help="stream file, '-' for stdin")
    sp.add_argument("--format", choices=("text", "binary"), default="text")
    sp.add_argument("--values", action="store_true", help="input holds V values, one per line")
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--delta", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="corrqcd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("density", help="tabulate f_V(rho; J) on a uniform grid over (0, 1]")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--delta", type=int, default=1)
    sp.add_argument("--J", type=float, nargs="+", default=[1.0])
    sp.add_argument("--grid-size", type=int, default=1000)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("detect", help="run the GLR stopping rule over a block stream")
    _add_stream_args(sp)
    sp.add_argument("--epsilon", type=float, default=1.5)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--window", type=_window, default="auto")
    sp.add_argument("--sidedness", choices=("increase", "two-sided"), default="increase")
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("estimate-j", help="MLE of J over all blocks of a stream")
    _add_stream_args(sp)
    sp.set_defaults(func=cmd_estimate_j)

    sp = sub.add_parser("simulate", help="Monte Carlo delay / false-alarm campaign from a scenario file")
    sp.add_argument("scenario")
    sp.add_argument("--fast-path", action="store_true", help="sample V from f_V instead of generating matrices")
    sp.add_argument("--seed", type=int, help="override the scenario seed")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("generate", help="write a Gaussian block stream (identity before the change)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--blocks", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--gamma", type=int, help="first post-change block (default: no change)")
    sp.add_argument("--k", type=int, default=5)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--block-rho", type=float, help="equicorrelated post-change block")
    group.add_argument("--dof", type=int, help="Wishart post-change block with this many dof")
    sp.add_argument("--format", choices=("text", "binary"), default="text")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("sample-v", help="draw V values from f_V(.; J), one per line")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--delta", type=int, default=1)
    sp.add_argument("--J", type=float, default=1.0)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(func=cmd_sample_v)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (CorrQcdError, OSError) as exc:
        print(f"corrqcd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

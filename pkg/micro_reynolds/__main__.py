import os
import sys

from micro_reynolds.config import RunConfig
from micro_reynolds.errors import MicroReynoldsError
from micro_reynolds.pipeline import SUBCOMMANDS, Pipeline


def run(
    subcommand: str,
    config: str,
    outdir: str | None = None,
    threads: int | None = None,
    phi2_variant: str | None = None,
) -> int:
    """Run the model pipeline.
    Args:
        subcommand: one of `micro_reynolds.pipeline.SUBCOMMANDS`.
        config: a path to the configuration file, json or yaml.
        outdir: a path to the output directory.
        threads: the number of worker threads, `MICRO_REYNOLDS_THREADS` if not provided.
        phi2_variant: override of the Phi_2 variant flag.
    Returns:
        process exit code, 0 on success.
    """
    if threads is None:
        threads = int(os.environ.get("MICRO_REYNOLDS_THREADS", "1"))
    try:
        loaded = RunConfig.load(config)
        Pipeline(loaded, outdir, threads, phi2_variant).run(subcommand)
    except MicroReynoldsError as e:
        print(f"micro-reynolds: {e}", file=sys.stderr)
        return e.exit_code
    return 0


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(prog="micro-reynolds")
    parser.add_argument("subcommand", choices=list(SUBCOMMANDS), help="pipeline stages to run")
    parser.add_argument("--config", required=True, help="a path to the configuration file")
    parser.add_argument("--out", default=None, help="a path to the output directory")
    parser.add_argument("--threads", type=int, default=None, help="the number of worker threads")
    parser.add_argument(
        "--phi2-variant",
        choices=["auto", "A1", "A2"],
        default=None,
        help="form of the Phi_2 coefficient, overrides the configuration",
    )
    args = parser.parse_args(argv)
    return run(
        subcommand=args.subcommand,
        config=args.config,
        outdir=args.out,
        threads=args.threads,
        phi2_variant=args.phi2_variant,
    )


if __name__ == "__main__":
    sys.exit(main())
